#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <unordered_set>

#include "geobim/error.hpp"
#include "geobim/step.hpp"

namespace geobim {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool parse_hex(std::string_view s, std::uint32_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::SyntaxError,
                "syntax error at line " + std::to_string(line_) + ", column " +
                    std::to_string(col_) + ": " + what,
                std::to_string(line_) + ":" + std::to_string(col_));
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
        auto end = text_.find("*/", pos_ + 2);
        if (end == std::string_view::npos) fail("unterminated comment");
        advance(end + 2 - pos_);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of file");
    return text_[pos_];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance(1);
  }

  bool accept(char c) {
    if (!eof() && text_[pos_] == c) {
      advance(1);
      return true;
    }
    return false;
  }

  bool accept_keyword(std::string_view kw) {
    skip_ws();
    if (text_.substr(pos_, kw.size()) == kw) {
      std::size_t after = pos_ + kw.size();
      if (after < text_.size() && is_kw_char(text_[after]) && is_kw_char(kw.back())) return false;
      advance(kw.size());
      return true;
    }
    return false;
  }

  static bool is_kw_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string keyword() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '!') advance(1);
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      advance(1);
    if (pos_ == start) fail("expected keyword");
    return upper(text_.substr(start, pos_ - start));
  }

  EntityId entity_id() {
    expect('#');
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance(1);
    if (pos_ == start) fail("expected entity id digits");
    EntityId id = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, id);
    if (id == 0) fail("entity id must be positive");
    return id;
  }

  /// Raw body of a '...' literal, quotes stripped, doubled quotes kept.
  std::string_view raw_string() {
    expect('\'');
    std::size_t start = pos_;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string");
      if (text_[pos_] == '\'') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
          advance(2);
          continue;
        }
        break;
      }
      advance(1);
    }
    std::string_view body = text_.substr(start, pos_ - start);
    advance(1);
    return body;
  }

  StepValue number() {
    std::size_t start = pos_;
    bool real = false;
    if (text_[pos_] == '+' || text_[pos_] == '-') advance(1);
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        advance(1);
      } else if (c == '.' || c == 'E' || c == 'e') {
        real = true;
        advance(1);
        if ((c == 'E' || c == 'e') && pos_ < text_.size() &&
            (text_[pos_] == '+' || text_[pos_] == '-'))
          advance(1);
      } else {
        break;
      }
    }
    std::string_view tok = text_.substr(start, pos_ - start);
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    if (real) {
      double d = 0;
      auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), d);
      if (ec != std::errc{} || ptr != tok.data() + tok.size()) fail("malformed real '" + std::string(tok) + "'");
      return StepValue(d);
    }
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), i);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) fail("malformed integer '" + std::string(tok) + "'");
    return StepValue(i);
  }

  std::size_t line() const { return line_; }
  std::size_t pos() const { return pos_; }
  std::string_view text() const { return text_; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, IfcGraph& graph) : lex_(text), graph_(graph) {}

  StepValue value() {
    char c = lex_.peek();
    switch (c) {
      case '$': lex_.advance(1); return Unset{};
      case '*': lex_.advance(1); return Derived{};
      case '#': return EntityRef{lex_.entity_id()};
      case '\'': return decode_step_string(lex_.raw_string(), &graph_.warnings);
      case '"': {
        lex_.advance(1);
        std::size_t start = lex_.pos();
        while (lex_.pos() < lex_.text().size() && lex_.text()[lex_.pos()] != '"') lex_.advance(1);
        if (lex_.pos() >= lex_.text().size()) lex_.fail("unterminated binary literal");
        std::string hex(lex_.text().substr(start, lex_.pos() - start));
        lex_.advance(1);
        return Binary{std::move(hex)};
      }
      case '.': {
        lex_.advance(1);
        std::size_t start = lex_.pos();
        while (lex_.pos() < lex_.text().size() && lex_.text()[lex_.pos()] != '.') lex_.advance(1);
        if (lex_.pos() >= lex_.text().size()) lex_.fail("unterminated enumeration");
        std::string name = upper(lex_.text().substr(start, lex_.pos() - start));
        lex_.advance(1);
        return EnumToken{std::move(name)};
      }
      case '(': return StepValue(list());
      default: break;
    }
    if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) return lex_.number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '!') {
      TypedValue typed;
      typed.type = lex_.keyword();
      typed.args = list();
      return typed;
    }
    lex_.fail(std::string("unexpected character '") + c + "'");
  }

  StepValue::List list() {
    StepValue::List items;
    lex_.expect('(');
    if (lex_.accept(')')) return items;
    while (true) {
      items.push_back(value());
      if (lex_.accept(',')) continue;
      lex_.expect(')');
      return items;
    }
  }

  void header() {
    lex_.skip_ws();
    if (!lex_.accept_keyword("ISO-10303-21")) {
      throw Error(ErrorCode::MissingHeader, "missing ISO-10303-21 banner");
    }
    lex_.expect(';');
    if (!lex_.accept_keyword("HEADER")) lex_.fail("expected HEADER section");
    lex_.expect(';');
    bool have_schema = false;
    while (!lex_.accept_keyword("ENDSEC")) {
      std::string name = lex_.keyword();
      StepValue::List args = list();
      lex_.expect(';');
      if (name == "FILE_SCHEMA" && !args.empty()) {
        if (auto* schemas = args[0].list(); schemas && !schemas->empty()) {
          if (auto s = (*schemas)[0].text()) {
            graph_.schema_id = upper(*s);
            have_schema = true;
          }
        }
      } else if (name == "FILE_NAME") {
        for (const auto& a : args)
          if (auto s = a.text()) graph_.header_file_name.push_back(*s);
      }
    }
    lex_.expect(';');
    if (!have_schema) {
      graph_.warnings.push_back("header has no FILE_SCHEMA; schema unknown");
    } else if (graph_.schema_id != "IFC2X3" && graph_.schema_id.rfind("IFC4", 0) != 0) {
      graph_.warnings.push_back("unsupported FILE_SCHEMA '" + graph_.schema_id +
                                "'; parsing best-effort");
    }
  }

  void data() {
    while (true) {
      if (lex_.accept_keyword("END-ISO-10303-21")) {
        lex_.expect(';');
        return;
      }
      if (!lex_.accept_keyword("DATA")) lex_.fail("expected DATA section");
      if (lex_.peek() == '(') list();
      lex_.expect(';');
      while (!lex_.accept_keyword("ENDSEC")) record();
      lex_.expect(';');
      if (lex_.eof()) {
        graph_.warnings.push_back("missing END-ISO-10303-21 terminator");
        return;
      }
    }
  }

  void record() {
    std::size_t line = lex_.line();
    EntityInstance inst;
    inst.id = lex_.entity_id();
    lex_.expect('=');
    if (lex_.peek() == '(') {
      inst.ifc_class = "(COMPLEX)";
      lex_.advance(1);
      while (!lex_.accept(')')) {
        TypedValue part;
        part.type = lex_.keyword();
        part.args = list();
        inst.attrs.emplace_back(std::move(part));
      }
    } else {
      inst.ifc_class = lex_.keyword();
      inst.attrs = list();
    }
    lex_.expect(';');
    auto id = inst.id;
    if (!graph_.instances.emplace(id, std::move(inst)).second) {
      throw Error(ErrorCode::SyntaxError,
                  "duplicate entity id #" + std::to_string(id) + " at line " + std::to_string(line),
                  std::to_string(line) + ":1");
    }
  }

 private:
  Lexer lex_;
  IfcGraph& graph_;
};

void resolve_refs(StepValue& v, const IfcGraph& graph, bool strict, EntityId owner,
                  std::vector<std::string>& warnings) {
  if (auto* r = std::get_if<EntityRef>(&v.value)) {
    if (!graph.instances.count(r->id)) {
      if (strict) {
        throw Error(ErrorCode::DanglingReference,
                    "dangling reference #" + std::to_string(r->id) + " in #" + std::to_string(owner),
                    std::to_string(r->id));
      }
      warnings.push_back("dangling reference #" + std::to_string(r->id) + " in #" +
                         std::to_string(owner) + " replaced by $");
      v.value = Unset{};
    }
  } else if (auto* l = std::get_if<StepValue::List>(&v.value)) {
    for (auto& item : *l) resolve_refs(item, graph, strict, owner, warnings);
  } else if (auto* t = std::get_if<TypedValue>(&v.value)) {
    for (auto& item : t->args) resolve_refs(item, graph, strict, owner, warnings);
  }
}

void write_value(std::string& out, const StepValue& v);

void write_real(std::string& out, double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, ptr);
  auto e = s.find_first_of("eE");
  std::string mant = s.substr(0, e);
  std::string expo = e == std::string::npos ? "" : s.substr(e + 1);
  if (mant.find('.') == std::string::npos) mant += '.';
  out += mant;
  if (!expo.empty()) out += "E" + expo;
}

void write_list(std::string& out, const StepValue::List& items) {
  out += '(';
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    write_value(out, items[i]);
  }
  out += ')';
}

void write_value(std::string& out, const StepValue& v) {
  std::visit(
      [&out](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Unset>) out += '$';
        else if constexpr (std::is_same_v<T, Derived>) out += '*';
        else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) write_real(out, x);
        else if constexpr (std::is_same_v<T, std::string>) out += "'" + encode_step_string(x) + "'";
        else if constexpr (std::is_same_v<T, EnumToken>) out += "." + x.name + ".";
        else if constexpr (std::is_same_v<T, EntityRef>) out += "#" + std::to_string(x.id);
        else if constexpr (std::is_same_v<T, TypedValue>) {
          out += x.type;
          write_list(out, x.args);
        } else if constexpr (std::is_same_v<T, StepValue::List>) write_list(out, x);
        else if constexpr (std::is_same_v<T, Binary>) out += "\"" + x.hex + "\"";
      },
      v.value);
}

}  // namespace

std::string decode_step_string(std::string_view raw, std::vector<std::string>* warnings) {
  std::string out;
  out.reserve(raw.size());
  auto warn = [&](std::string_view what) {
    if (warnings) warnings->push_back("unrecognized string escape '" + std::string(what) + "' kept verbatim");
  };
  std::size_t i = 0;
  while (i < raw.size()) {
    char c = raw[i];
    if (c == '\'' && i + 1 < raw.size() && raw[i + 1] == '\'') {
      out += '\'';
      i += 2;
      continue;
    }
    if (c != '\\') {
      out += c;
      ++i;
      continue;
    }
    std::string_view rest = raw.substr(i);
    if (rest.substr(0, 2) == "\\\\") {
      out += '\\';
      i += 2;
    } else if (rest.substr(0, 4) == "\\X2\\" || rest.substr(0, 4) == "\\X4\\") {
      const std::size_t width = rest[2] == '2' ? 4 : 8;
      auto end = rest.find("\\X0\\", 4);
      std::string_view hex = end == std::string_view::npos ? std::string_view{} : rest.substr(4, end - 4);
      if (end == std::string_view::npos || hex.size() % width != 0) {
        warn(rest.substr(0, 4));
        out += rest.substr(0, 4);
        i += 4;
        continue;
      }
      bool ok = true;
      std::string decoded;
      for (std::size_t k = 0; k < hex.size(); k += width) {
        std::uint32_t cp = 0;
        if (!parse_hex(hex.substr(k, width), cp)) {
          ok = false;
          break;
        }
        if (width == 4 && cp >= 0xD800 && cp < 0xDC00 && k + 2 * width <= hex.size()) {
          std::uint32_t lo = 0;
          if (parse_hex(hex.substr(k + width, width), lo) && lo >= 0xDC00 && lo < 0xE000) {
            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
            k += width;
          }
        }
        append_utf8(decoded, cp);
      }
      if (!ok) {
        warn(rest.substr(0, 4));
        out += rest.substr(0, 4);
        i += 4;
        continue;
      }
      out += decoded;
      i += end + 4;
    } else if (rest.size() >= 5 && rest.substr(0, 3) == "\\X\\") {
      std::uint32_t byte = 0;
      if (parse_hex(rest.substr(3, 2), byte)) {
        append_utf8(out, byte);
        i += 5;
      } else {
        warn(rest.substr(0, 3));
        out += rest.substr(0, 3);
        i += 3;
      }
    } else if (rest.size() >= 4 && rest.substr(0, 3) == "\\S\\") {
      append_utf8(out, static_cast<unsigned char>(rest[3]) + 128u);
      i += 4;
    } else if (rest.size() >= 4 && rest[1] == 'P' && rest[3] == '\\') {
      i += 4;  // code page switch, Latin-1 assumed
    } else {
      warn(rest.substr(0, std::min<std::size_t>(rest.size(), 3)));
      out += c;
      ++i;
    }
  }
  return out;
}

std::string encode_step_string(std::string_view utf8) {
  std::string out;
  std::size_t i = 0;
  std::string wide;
  auto flush_wide = [&] {
    if (!wide.empty()) {
      out += "\\X2\\" + wide + "\\X0\\";
      wide.clear();
    }
  };
  while (i < utf8.size()) {
    unsigned char c = static_cast<unsigned char>(utf8[i]);
    if (c < 0x80) {
      flush_wide();
      if (c == '\'') out += "''";
      else if (c == '\\') out += "\\\\";
      else out += static_cast<char>(c);
      ++i;
      continue;
    }
    std::uint32_t cp = 0;
    std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
    cp = len == 1 ? c : (c & (0x7F >> len));
    for (std::size_t k = 1; k < len && i + k < utf8.size(); ++k)
      cp = (cp << 6) | (static_cast<unsigned char>(utf8[i + k]) & 0x3F);
    i += len;
    char buf[16];
    if (cp >= 0x10000) {
      std::uint32_t v = cp - 0x10000;
      std::snprintf(buf, sizeof buf, "%04X%04X", 0xD800 + (v >> 10), 0xDC00 + (v & 0x3FF));
    } else {
      std::snprintf(buf, sizeof buf, "%04X", cp);
    }
    wide += buf;
  }
  flush_wide();
  return out;
}

IfcGraph parse_step(std::string_view bytes, ParseOptions options) {
  IfcGraph graph;
  Parser parser(bytes, graph);
  parser.header();
  parser.data();
  for (auto& [id, inst] : graph.instances)
    for (auto& a : inst.attrs) resolve_refs(a, graph, options.strict, id, graph.warnings);
  graph.reindex();
  return graph;
}

std::string to_step_text(const StepValue& value) {
  std::string out;
  write_value(out, value);
  return out;
}

std::string serialize_step(const IfcGraph& graph) {
  std::string out = "ISO-10303-21;\nHEADER;\nFILE_DESCRIPTION(('ViewDefinition [CoordinationView]'),'2;1');\n";
  StepValue::List names;
  for (const auto& n : graph.header_file_name) names.emplace_back(n);
  out += "FILE_NAME";
  write_list(out, names.empty() ? StepValue::List{std::string{}, std::string{}, StepValue::List{},
                                                  StepValue::List{}, std::string{}, std::string{},
                                                  std::string{}}
                                : names);
  out += ";\nFILE_SCHEMA(('" + encode_step_string(graph.schema_id) + "'));\nENDSEC;\nDATA;\n";
  for (const auto& [id, inst] : graph.instances) {
    out += "#" + std::to_string(id) + "=";
    if (inst.ifc_class == "(COMPLEX)") {
      out += '(';
      for (const auto& part : inst.attrs) write_value(out, part);
      out += ')';
    } else {
      out += inst.ifc_class;
      write_list(out, inst.attrs);
    }
    out += ";\n";
  }
  out += "ENDSEC;\nEND-ISO-10303-21;\n";
  return out;
}

}  // namespace geobim
