#include "bridg/toml.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bridg/errors.hpp"
#include "bridg/text.hpp"

namespace bridg::toml {

using json = nlohmann::json;

namespace {

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  char take() { return s[pos++]; }
  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
};

[[noreturn]] void fail(const Cursor& c, const std::string& msg) {
  throw config_error("TOML line " + std::to_string(c.line) + ": " + msg);
}

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& c) {
  std::string out;
  c.take();  // opening quote
  while (true) {
    if (c.eof()) fail(c, "unterminated string");
    char ch = c.take();
    if (ch == '"') break;
    if (ch == '\n') fail(c, "newline in basic string");
    if (ch == '\\') {
      if (c.eof()) fail(c, "dangling escape");
      char esc = c.take();
      switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'u': {
          if (c.pos + 4 > c.s.size()) fail(c, "truncated \\u escape");
          unsigned code = 0;
          for (int i = 0; i < 4; ++i) {
            char h = c.take();
            code <<= 4;
            if (h >= '0' && h <= '9') code |= static_cast<unsigned>(h - '0');
            else if (h >= 'a' && h <= 'f') code |= static_cast<unsigned>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') code |= static_cast<unsigned>(h - 'A' + 10);
            else fail(c, "bad \\u escape digit");
          }
          // encode as UTF-8 (BMP only; enough for config text)
          if (code < 0x80) {
            out += static_cast<char>(code);
          } else if (code < 0x800) {
            out += static_cast<char>(0xC0 | (code >> 6));
            out += static_cast<char>(0x80 | (code & 0x3F));
          } else {
            out += static_cast<char>(0xE0 | (code >> 12));
            out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (code & 0x3F));
          }
          break;
        }
        default: fail(c, std::string("unsupported escape '\\") + esc + "'");
      }
    } else {
      out += ch;
    }
  }
  return out;
}

std::string parse_literal_string(Cursor& c) {
  std::string out;
  c.take();  // opening quote
  while (true) {
    if (c.eof()) fail(c, "unterminated literal string");
    char ch = c.take();
    if (ch == '\'') break;
    if (ch == '\n') fail(c, "newline in literal string");
    out += ch;
  }
  return out;
}

json parse_number_or_symbol(Cursor& c) {
  std::size_t start = c.pos;
  while (!c.eof() && c.peek() != ',' && c.peek() != ']' && c.peek() != '#' && c.peek() != '\n' &&
         c.peek() != ' ' && c.peek() != '\t')
    ++c.pos;
  std::string tok(c.s.substr(start, c.pos - start));
  if (tok == "true") return json(true);
  if (tok == "false") return json(false);
  std::string digits;
  digits.reserve(tok.size());
  for (char ch : tok) {  // TOML allows underscores in numbers
    if (ch != '_') digits += ch;
  }
  bool looks_float = digits.find('.') != std::string::npos || digits.find('e') != std::string::npos ||
                     digits.find('E') != std::string::npos;
  if (!looks_float) {
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
    if (ec == std::errc() && p == digits.data() + digits.size()) return json(iv);
  }
  double dv = 0.0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
  if (ec == std::errc() && p == digits.data() + digits.size()) return json(dv);
  fail(c, "cannot parse value '" + tok + "'");
}

json parse_value(Cursor& c);

json parse_array(Cursor& c) {
  json arr = json::array();
  c.take();  // '['
  c.skip_spaces();
  while (true) {
    if (c.eof()) fail(c, "unterminated array");
    if (c.peek() == ']') {
      c.take();
      break;
    }
    arr.push_back(parse_value(c));
    c.skip_spaces();
    if (!c.eof() && c.peek() == ',') {
      c.take();
      c.skip_spaces();
    }
  }
  return arr;
}

json parse_value(Cursor& c) {
  c.skip_spaces();
  if (c.eof()) fail(c, "missing value");
  char ch = c.peek();
  if (ch == '"') return json(parse_basic_string(c));
  if (ch == '\'') return json(parse_literal_string(c));
  if (ch == '[') return parse_array(c);
  return parse_number_or_symbol(c);
}

std::vector<std::string> parse_key_path(Cursor& c) {
  std::vector<std::string> parts;
  while (true) {
    c.skip_spaces();
    if (c.eof()) fail(c, "missing key");
    std::string part;
    if (c.peek() == '"') {
      part = parse_basic_string(c);
    } else {
      std::size_t start = c.pos;
      while (!c.eof() && is_bare_key_char(c.peek())) ++c.pos;
      part = std::string(c.s.substr(start, c.pos - start));
    }
    if (part.empty()) fail(c, "empty key segment");
    parts.push_back(std::move(part));
    c.skip_spaces();
    if (!c.eof() && c.peek() == '.') {
      c.take();
      continue;
    }
    break;
  }
  return parts;
}

json& descend(json& root, const std::vector<std::string>& path, const Cursor& c) {
  json* node = &root;
  for (const auto& part : path) {
    if (!node->is_object()) fail(c, "key '" + part + "' addresses a non-table value");
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
  }
  return *node;
}

void expect_line_end(Cursor& c) {
  c.skip_spaces();
  if (!c.eof() && c.peek() == '#') {
    while (!c.eof() && c.peek() != '\n') ++c.pos;
  }
  if (!c.eof()) {
    if (c.peek() != '\n') fail(c, "trailing characters");
    c.take();
    ++c.line;
  }
}

}  // namespace

json parse(const std::string& input) {
  json root = json::object();
  Cursor c{input};
  std::vector<std::string> table_path;
  while (!c.eof()) {
    c.skip_spaces();
    if (c.eof()) break;
    char ch = c.peek();
    if (ch == '\n') {
      c.take();
      ++c.line;
      continue;
    }
    if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') ++c.pos;
      continue;
    }
    if (ch == '[') {
      c.take();
      if (!c.eof() && c.peek() == '[') fail(c, "arrays of tables are not supported");
      table_path = parse_key_path(c);
      c.skip_spaces();
      if (c.eof() || c.take() != ']') fail(c, "unterminated table header");
      json& table = descend(root, table_path, c);
      if (!table.is_object()) fail(c, "table header reuses a value key");
      expect_line_end(c);
      continue;
    }
    auto key_path = parse_key_path(c);
    c.skip_spaces();
    if (c.eof() || c.take() != '=') fail(c, "expected '=' after key");
    json value = parse_value(c);
    std::vector<std::string> full = table_path;
    full.insert(full.end(), key_path.begin(), key_path.end());
    json& parent = descend(root, std::vector<std::string>(full.begin(), full.end() - 1), c);
    if (parent.contains(full.back())) fail(c, "duplicate key '" + full.back() + "'");
    parent[full.back()] = std::move(value);
    expect_line_end(c);
  }
  return root;
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {

std::string escape_string(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += ch;
    }
  }
  out += '"';
  return out;
}

std::string render_scalar(const json& v) {
  if (v.is_string()) return escape_string(v.get<std::string>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v.get<double>());
    std::string out(buf, p);
    if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
        out.find("inf") == std::string::npos && out.find("nan") == std::string::npos)
      out += ".0";
    return out;
  }
  throw config_error("cannot serialize non-scalar TOML value: " + v.dump());
}

void serialize_table(const json& table, const std::string& prefix, std::string& out) {
  // scalars and arrays first, then subtables
  for (auto it = table.begin(); it != table.end(); ++it) {
    const json& v = it.value();
    if (v.is_object()) continue;
    if (v.is_array()) {
      out += it.key() + " = [";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += render_scalar(v[i]);
      }
      out += "]\n";
    } else {
      out += it.key() + " = " + render_scalar(v) + "\n";
    }
  }
  for (auto it = table.begin(); it != table.end(); ++it) {
    if (!it.value().is_object()) continue;
    std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    out += "\n[" + path + "]\n";
    serialize_table(it.value(), path, out);
  }
}

}  // namespace

std::string serialize(const json& root) {
  if (!root.is_object()) throw config_error("TOML root must be a table");
  std::string out;
  serialize_table(root, "", out);
  return out;
}

json parse_scalar(const std::string& literal) {
  if (literal == "true") return json(true);
  if (literal == "false") return json(false);
  {
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), iv);
    if (ec == std::errc() && p == literal.data() + literal.size()) return json(iv);
  }
  {
    double dv = 0.0;
    auto [p, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), dv);
    if (ec == std::errc() && p == literal.data() + literal.size()) return json(dv);
  }
  std::string s = literal;
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    s = s.substr(1, s.size() - 2);
  return json(s);
}

void set_dotted(json& root, const std::string& dotted_key, const std::string& value_literal) {
  if (dotted_key.empty()) throw config_error("empty override key");
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = dotted_key.find('.', start);
    std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw config_error("empty segment in override key '" + dotted_key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = parse_scalar(value_literal);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    if (!node->is_object())
      throw config_error("override key '" + dotted_key + "' traverses a non-table value");
    start = dot + 1;
  }
}

}  // namespace bridg::toml
