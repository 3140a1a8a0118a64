#pragma once

// A reader/writer for the TOML subset used by experiment configs: [tables], bare or dotted
// keys, strings, integers, floats, booleans and (possibly multi-line) arrays of those.
// Inline tables, dates and arrays of tables are not supported.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bilevel::toml {

struct Value {
  enum class Type { boolean, integer, floating, string, array };

  Type type = Type::integer;
  bool boolean = false;
  std::int64_t integer = 0;
  double floating = 0.0;
  std::string string;
  std::vector<Value> array;

  static Value of(bool v);
  static Value of(std::int64_t v);
  static Value of(double v);
  static Value of(std::string v);
  static Value of(std::vector<Value> v);

  bool is_number() const { return type == Type::integer || type == Type::floating; }
  /// Integer or float as double; throws ConfigError otherwise.
  double as_double(std::string_view key) const;
  std::int64_t as_integer(std::string_view key) const;
  bool as_bool(std::string_view key) const;
  const std::string& as_string(std::string_view key) const;

  friend bool operator==(const Value&, const Value&) = default;
};

/// Flat map from dotted key ("noise.sigma") to value.
using Table = std::map<std::string, Value>;

/// Throws ConfigError with the line number on syntax errors and duplicate keys.
Table parse(std::string_view text);

/// Parses a single value ("1e-3", "true", "\"x\"", "[1, 2]"). Throws ConfigError.
Value parse_value(std::string_view text);

/// Renders a value; floats use the shortest representation that round-trips.
std::string format(const Value& v);

/// Top-level keys first, then one [table] per first key component, keys sorted.
std::string serialize(const Table& table);

}  // namespace bilevel::toml
