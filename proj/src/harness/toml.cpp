#include "bilevel/harness/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include "bilevel/errors.hpp"

namespace bilevel::toml {

Value Value::of(bool v) {
  Value out;
  out.type = Type::boolean;
  out.boolean = v;
  return out;
}

Value Value::of(std::int64_t v) {
  Value out;
  out.type = Type::integer;
  out.integer = v;
  return out;
}

Value Value::of(double v) {
  Value out;
  out.type = Type::floating;
  out.floating = v;
  return out;
}

Value Value::of(std::string v) {
  Value out;
  out.type = Type::string;
  out.string = std::move(v);
  return out;
}

Value Value::of(std::vector<Value> v) {
  Value out;
  out.type = Type::array;
  out.array = std::move(v);
  return out;
}

double Value::as_double(std::string_view key) const {
  if (type == Type::integer) return static_cast<double>(integer);
  if (type == Type::floating) return floating;
  throw ConfigError("key '" + std::string(key) + "': expected a number");
}

std::int64_t Value::as_integer(std::string_view key) const {
  if (type == Type::integer) return integer;
  if (type == Type::floating && std::floor(floating) == floating && std::abs(floating) < 9e15)
    return static_cast<std::int64_t>(floating);
  throw ConfigError("key '" + std::string(key) + "': expected an integer");
}

bool Value::as_bool(std::string_view key) const {
  if (type != Type::boolean) throw ConfigError("key '" + std::string(key) + "': expected a boolean");
  return boolean;
}

const std::string& Value::as_string(std::string_view key) const {
  if (type != Type::string) throw ConfigError("key '" + std::string(key) + "': expected a string");
  return string;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Table parse_document() {
    Table table;
    std::string prefix;
    while (!at_end()) {
      skip_blank();
      if (at_end()) break;
      const char c = peek();
      if (c == '\n') {
        advance();
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        advance();
        skip_spaces();
        const std::string name = parse_key();
        skip_spaces();
        expect(']');
        end_of_line();
        prefix = name + ".";
        continue;
      }
      const std::size_t key_line = line_;
      const std::string key = prefix + parse_key();
      skip_spaces();
      expect('=');
      skip_spaces();
      Value v = parse_any();
      end_of_line();
      if (!table.emplace(key, std::move(v)).second) {
        line_ = key_line;
        fail("duplicate key '" + key + "'");
      }
    }
    return table;
  }

  Value parse_single() {
    skip_spaces();
    Value v = parse_any();
    skip_spaces();
    if (!at_end() && peek() == '#') skip_comment();
    if (!at_end()) fail("unexpected trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config syntax error on line " + std::to_string(line_) + ": " + what);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }
  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }
  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
  void skip_blank() { skip_spaces(); }
  void skip_comment() {
    while (!at_end() && peek() != '\n') advance();
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_array_filler() {
    while (!at_end()) {
      if (peek() == '#') {
        skip_comment();
      } else if (std::isspace(static_cast<unsigned char>(peek()))) {
        advance();
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_spaces();
    if (!at_end() && peek() == '#') skip_comment();
    if (!at_end()) {
      if (peek() != '\n') fail("expected end of line");
      advance();
    }
  }

  static bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    std::string key;
    for (;;) {
      skip_spaces();
      std::string part;
      if (!at_end() && peek() == '"') {
        part = parse_string('"');
      } else {
        while (!at_end() && bare_key_char(peek())) {
          part += peek();
          advance();
        }
      }
      if (part.empty()) fail("expected a key");
      key += part;
      skip_spaces();
      if (!at_end() && peek() == '.') {
        key += '.';
        advance();
        continue;
      }
      return key;
    }
  }

  std::string parse_string(char quote) {
    expect(quote);
    std::string out;
    while (!at_end() && peek() != quote) {
      char c = peek();
      if (c == '\n') fail("unterminated string");
      if (c == '\\' && quote == '"') {
        advance();
        if (at_end()) fail("unterminated escape");
        switch (peek()) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case 'r': c = '\r'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape sequence");
        }
      }
      out += c;
      advance();
    }
    expect(quote);
    return out;
  }

  Value parse_any() {
    if (at_end()) fail("expected a value");
    const char c = peek();
    if (c == '"' || c == '\'') return Value::of(parse_string(c));
    if (c == '[') return parse_array();
    std::string token;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' &&
           !std::isspace(static_cast<unsigned char>(peek()))) {
      token += peek();
      advance();
    }
    if (token == "true") return Value::of(true);
    if (token == "false") return Value::of(false);
    return parse_number(token);
  }

  Value parse_array() {
    expect('[');
    std::vector<Value> items;
    for (;;) {
      skip_array_filler();
      if (at_end()) fail("unterminated array");
      if (peek() == ']') {
        advance();
        break;
      }
      items.push_back(parse_any());
      skip_array_filler();
      if (at_end()) fail("unterminated array");
      if (peek() == ',') {
        advance();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    return Value::of(std::move(items));
  }

  Value parse_number(std::string token) {
    if (token.empty()) fail("expected a value");
    std::erase(token, '_');
    if (token == "inf" || token == "+inf") return Value::of(std::numeric_limits<double>::infinity());
    if (token == "-inf") return Value::of(-std::numeric_limits<double>::infinity());
    if (token == "nan" || token == "+nan" || token == "-nan")
      return Value::of(std::numeric_limits<double>::quiet_NaN());
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    const bool is_float = token.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return Value::of(v);
    } else {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec == std::errc() && ptr == last) return Value::of(v);
    }
    fail("invalid value '" + token + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

}  // namespace

Table parse(std::string_view text) { return Parser(text).parse_document(); }

Value parse_value(std::string_view text) { return Parser(text).parse_single(); }

std::string format(const Value& v) {
  switch (v.type) {
    case Value::Type::boolean:
      return v.boolean ? "true" : "false";
    case Value::Type::integer:
      return std::to_string(v.integer);
    case Value::Type::floating:
      return format_double(v.floating);
    case Value::Type::string:
      return quote(v.string);
    case Value::Type::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.array.size(); ++i) {
        if (i) out += ", ";
        out += format(v.array[i]);
      }
      return out + "]";
    }
  }
  return {};
}

std::string serialize(const Table& table) {
  std::string top;
  std::map<std::string, std::string> sections;
  for (const auto& [key, value] : table) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      top += key + " = " + format(value) + "\n";
    } else {
      sections[key.substr(0, dot)] += key.substr(dot + 1) + " = " + format(value) + "\n";
    }
  }
  std::string out = top;
  for (const auto& [name, body] : sections) out += "\n[" + name + "]\n" + body;
  return out;
}

}  // namespace bilevel::toml
