// File formats and atomic output.
//
// Matrix files are UTF-8 text with LF newlines: the first line holds
// "rows cols", then each of the next `rows` lines holds `cols` entries
// separated by single spaces. Entries are written in shortest decimal form
// that parses back to the identical double (round-trip exact), so
// write -> read is the identity on finite values. NaN and infinity are
// rejected on both paths.
//
// All writers go through a temp-file-plus-rename so readers never observe a
// partially written file and failed runs never clobber existing output.
#pragma once

#include "proattn/matrix.hpp"

#include <stdexcept>
#include <string>

namespace proattn {

// Input parsing failure; message names the offending file and 1-based line.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal string that round-trips to exactly d.
std::string format_double(double d);

/// Strict full-token parse; rejects NaN/Inf and trailing characters.
bool parse_double(const std::string& token, double& out);

Matrix read_matrix(const std::string& path);

void write_matrix(const std::string& path, const Matrix& m);

/// Writes content to path atomically (temp file in the same directory, then
/// rename). Throws IoError on any filesystem failure.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

} // namespace proattn
