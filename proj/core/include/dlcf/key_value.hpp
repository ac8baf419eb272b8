#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dlcf {

// One "key = value" line of a flat config file.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Parses flat "key = value" text. Blank lines and lines starting with '#'
// are skipped; a '#' after the value starts a trailing comment. Throws
// ConfigError on a line without '=' or on a repeated key.
std::vector<KeyValue> parse_key_values(std::string_view text);

// Typed field conversions; throw ConfigError naming the key.
std::size_t parse_size(const KeyValue& kv);
int parse_int(const KeyValue& kv);
std::uint64_t parse_u64(const KeyValue& kv);
double parse_double(const KeyValue& kv);
bool parse_bool(const KeyValue& kv);

// Shortest round-trip decimal form, locale independent.
std::string format_double(double value);
// Fixed-point form with `digits` decimals, locale independent.
std::string format_fixed(double value, int digits);

}  // namespace dlcf
