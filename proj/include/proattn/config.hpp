// JSON wire format for attention configs.
//
// Schema (all keys optional, unknown keys rejected):
//   {
//     "penalty": {"kind": "l2"|"l1"|"huber"|"mcp"|"huber_mcp",
//                  "delta": number, "gamma": number},
//     "steps": nonnegative integer,
//     "eps": positive number,
//     "scaled": boolean
//   }
#pragma once

#include "proattn/attention.hpp"

#include <string>

namespace proattn {

/// Parses and validates a config document. `origin` (a file name or similar)
/// prefixes error messages. Throws std::invalid_argument on unknown keys,
/// type mismatches, or invalid values.
AttentionConfig parse_attention_config(const std::string& json_text,
                                       const std::string& origin);

AttentionConfig load_attention_config(const std::string& path);

/// Serializes a config back to the same schema (canonical key order).
std::string attention_config_json(const AttentionConfig& cfg);

} // namespace proattn
