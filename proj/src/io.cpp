#include "proattn/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace proattn {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

// Splits on spaces/tabs; multiple separators collapse.
std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_size(const std::string& token, std::size_t& out) {
    unsigned long long v = 0;
    const auto* b = token.data();
    const auto* e = b + token.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) return false;
    out = static_cast<std::size_t>(v);
    return true;
}

} // namespace

std::string format_double(double d) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), d);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& token, double& out) {
    const auto* b = token.data();
    const auto* e = b + token.size();
    const auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc() || res.ptr != e) return false;
    return std::isfinite(out);
}

Matrix read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::string line;
    if (!std::getline(in, line)) fail(path, 1, "missing header line");
    if (!line.empty() && line.back() == '\r') fail(path, 1, "CRLF line ending; expected LF");

    const auto header = tokens_of(line);
    std::size_t rows = 0, cols = 0;
    if (header.size() != 2 || !parse_size(header[0], rows) || !parse_size(header[1], cols))
        fail(path, 1, "header must be \"rows cols\"");
    if (rows == 0 || cols == 0) fail(path, 1, "rows and cols must be >= 1");
    if (rows > 100000000ULL / cols) fail(path, 1, "matrix too large");

    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t lineno = i + 2;
        if (!std::getline(in, line)) fail(path, lineno, "unexpected end of file");
        if (!line.empty() && line.back() == '\r')
            fail(path, lineno, "CRLF line ending; expected LF");
        const auto toks = tokens_of(line);
        if (toks.size() != cols)
            fail(path, lineno,
                 "expected " + std::to_string(cols) + " entries, found " +
                     std::to_string(toks.size()));
        for (std::size_t j = 0; j < cols; ++j) {
            double v = 0.0;
            if (!parse_double(toks[j], v))
                fail(path, lineno, "bad entry \"" + toks[j] + "\" (column " +
                                       std::to_string(j + 1) + ")");
            m.at(i, j) = v;
        }
    }
    std::size_t lineno = rows + 2;
    while (std::getline(in, line)) {
        if (!tokens_of(line).empty()) fail(path, lineno, "trailing content after matrix");
        ++lineno;
    }
    return m;
}

void write_matrix(const std::string& path, const Matrix& m) {
    if (m.rows == 0 || m.cols == 0)
        throw std::invalid_argument("write_matrix: empty matrix");
    require_finite(m, "write_matrix");
    std::string out;
    out.reserve(m.rows * m.cols * 12 + 16);
    out += std::to_string(m.rows);
    out += ' ';
    out += std::to_string(m.cols);
    out += '\n';
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j) out += ' ';
            out += format_double(m.at(i, j));
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    const fs::path tmp =
        dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(tmp.string() + ": cannot open for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IoError(tmp.string() + ": write failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw IoError(path + ": rename failed: " + ec.message());
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace proattn
