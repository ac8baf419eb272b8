#include "dlcf/key_value.hpp"

#include <charconv>
#include <set>
#include <system_error>

#include "dlcf/errors.hpp"

namespace dlcf {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const KeyValue& kv, const char* expected) {
  throw ConfigError("line " + std::to_string(kv.line) + ": key '" + kv.key + "' expects " +
                    expected + ", got '" + kv.value + "'");
}

template <typename T>
T parse_number(const KeyValue& kv, const char* expected) {
  T out{};
  const char* begin = kv.value.data();
  const char* end = begin + kv.value.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || kv.value.empty()) bad_value(kv, expected);
  return out;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    }
    KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
                line_no};
    if (kv.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(kv.key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + kv.key + "'");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

std::size_t parse_size(const KeyValue& kv) {
  return parse_number<std::size_t>(kv, "a non-negative integer");
}
int parse_int(const KeyValue& kv) { return parse_number<int>(kv, "an integer"); }
std::uint64_t parse_u64(const KeyValue& kv) {
  return parse_number<std::uint64_t>(kv, "a non-negative integer");
}
double parse_double(const KeyValue& kv) { return parse_number<double>(kv, "a number"); }

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  bad_value(kv, "true or false");
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[128];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

}  // namespace dlcf
