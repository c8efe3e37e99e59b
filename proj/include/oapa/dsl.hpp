#pragma once

// Reader and writer for the line-oriented `.oapa` ontology format and the
// Manchester-style query language. See docs/oapa-format.md for the grammar.

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "oapa/kb.hpp"

namespace oapa {

struct QueryAst {
  ConceptExpr root;
  std::string source_text;

  /// ASTs compare by expression only; the source text is informational.
  friend bool operator==(const QueryAst& a, const QueryAst& b) { return a.root == b.root; }
};

namespace dsl {

inline const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> k = {
      "module", "import", "class", "sub",  "equiv", "and",   "some",     "objprop",
      "dataprop", "ind", "fact",  "data", "label", "altlabel", "def"};
  return k;
}

enum class Tok { name, number, string, lparen, rparen, lbracket, rbracket, comma, colon, lt, le, gt, ge, end };

struct Token {
  Tok type = Tok::end;
  std::string text;
  double number = 0.0;
  int line = 0;
  int column = 0;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        line_start_ = pos_;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      Token t;
      t.line = line_;
      t.column = column();
      if (is_alpha(c)) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_word(text_[pos_])) ++pos_;
        if (pos_ + 1 < text_.size() && text_[pos_] == ':' && is_alpha(text_[pos_ + 1])) {
          ++pos_;
          while (pos_ < text_.size() && is_word(text_[pos_])) ++pos_;
        }
        t.type = Tok::name;
        t.text = std::string(text_.substr(start, pos_ - start));
      } else if (is_digit(c) || ((c == '-' || c == '+' || c == '.') && pos_ + 1 < text_.size() &&
                                 (is_digit(text_[pos_ + 1]) || text_[pos_ + 1] == '.'))) {
        std::size_t start = pos_;
        ++pos_;
        while (pos_ < text_.size()) {
          char d = text_[pos_];
          bool sign_after_exp = (d == '+' || d == '-') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E');
          if (is_word(d) || d == '.' || sign_after_exp) {
            ++pos_;
          } else {
            break;
          }
        }
        t.type = Tok::number;
        t.text = std::string(text_.substr(start, pos_ - start));
        t.number = parse_number(t.text, t);
      } else if (c == '"') {
        t.type = Tok::string;
        ++pos_;
        bool closed = false;
        while (pos_ < text_.size() && text_[pos_] != '\n') {
          char d = text_[pos_++];
          if (d == '"') {
            closed = true;
            break;
          }
          if (d == '\\') {
            if (pos_ >= text_.size()) break;
            char e = text_[pos_++];
            if (e == 'n') t.text += '\n';
            else if (e == '"' || e == '\\') t.text += e;
            else throw Error(ErrorCode::syntax_error, "unknown escape in string", span(t));
          } else {
            t.text += d;
          }
        }
        if (!closed) throw Error(ErrorCode::syntax_error, "unterminated string", span(t));
      } else {
        ++pos_;
        switch (c) {
          case '(': t.type = Tok::lparen; break;
          case ')': t.type = Tok::rparen; break;
          case '[': t.type = Tok::lbracket; break;
          case ']': t.type = Tok::rbracket; break;
          case ',': t.type = Tok::comma; break;
          case ':': t.type = Tok::colon; break;
          case '<':
            t.type = Tok::lt;
            if (pos_ < text_.size() && text_[pos_] == '=') ++pos_, t.type = Tok::le;
            break;
          case '>':
            t.type = Tok::gt;
            if (pos_ < text_.size() && text_[pos_] == '=') ++pos_, t.type = Tok::ge;
            break;
          default:
            throw Error(ErrorCode::syntax_error, std::string("unexpected character '") + c + "'", span(t));
        }
        t.text = std::string(text_.substr(pos_ - (t.type == Tok::le || t.type == Tok::ge ? 2 : 1),
                                          t.type == Tok::le || t.type == Tok::ge ? 2 : 1));
      }
      out.push_back(std::move(t));
    }
    return out;
  }

  SourceSpan span(const Token& t) const { return {file_, t.line, t.column}; }

 private:
  static bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_word(char c) { return is_alpha(c) || is_digit(c) || c == '_'; }

  int column() const {
    int col = 1;
    for (std::size_t i = line_start_; i < pos_; ++i)
      if ((static_cast<unsigned char>(text_[i]) & 0xC0) != 0x80) ++col;
    return col;
  }

  double parse_number(const std::string& s, const Token& t) const {
    std::string_view v = s;
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(value))
      throw Error(ErrorCode::bad_number, "malformed number '" + s + "'", span(t));
    return value;
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
};

/// Recursive-descent parser over a token range. Used for whole queries and for
/// the expression part of ontology statements.
class ExprParser {
 public:
  ExprParser(const std::vector<Token>& tokens, std::size_t begin, std::size_t end, std::string file,
             int eof_line, int eof_column)
      : toks_(tokens), pos_(begin), end_(end), file_(std::move(file)), eof_line_(eof_line), eof_col_(eof_column) {}

  ConceptExpr expr() {
    std::vector<ConceptExpr> parts;
    parts.push_back(term());
    while (peek_word("and")) {
      ++pos_;
      parts.push_back(term());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return ConceptExpr::conj(std::move(parts));
  }

  NumericRange range() {
    const Token& open = expect(Tok::lbracket, "'['");
    NumericRange r;
    bool have_lower = false, have_upper = false;
    int plain = 0;
    auto bound = [&] {
      const Token& t = current("range bound");
      Tok op = t.type;
      if (op == Tok::lt || op == Tok::le || op == Tok::gt || op == Tok::ge) ++pos_;
      const Token& num = expect(Tok::number, "number");
      bool upper_side = false, inclusive = true;
      switch (op) {
        case Tok::lt: upper_side = true, inclusive = false; break;
        case Tok::le: upper_side = true; break;
        case Tok::gt: inclusive = false; break;
        case Tok::ge: break;
        default: upper_side = plain++ > 0; break;
      }
      if (upper_side ? have_upper : have_lower)
        throw Error(ErrorCode::syntax_error, "range has two bounds on the same side", span(num));
      (upper_side ? have_upper : have_lower) = true;
      (upper_side ? r.upper : r.lower) = num.number;
      (upper_side ? r.upper_inclusive : r.lower_inclusive) = inclusive;
    };
    bound();
    if (at(Tok::comma)) {
      ++pos_;
      bound();
    } else if (plain == 1 && !have_upper) {
      r.upper = r.lower;
      r.upper_inclusive = true;
    }
    if (at(Tok::string)) r.unit = toks_[pos_++].text;
    expect(Tok::rbracket, "']'");
    if (!r.valid()) throw Error(ErrorCode::invalid_range, "empty numeric range", span(open));
    return r;
  }

  bool done() const { return pos_ >= end_; }
  const Token* peek() const { return pos_ < end_ ? &toks_[pos_] : nullptr; }
  void advance() { ++pos_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::syntax_error, message, here());
  }

  SourceSpan here() const {
    if (pos_ < end_) return span(toks_[pos_]);
    return {file_, eof_line_, eof_col_};
  }

  bool peek_word(std::string_view w) const {
    return pos_ < end_ && toks_[pos_].type == Tok::name && toks_[pos_].text == w;
  }

 private:
  ConceptExpr term() {
    if (at(Tok::lparen)) {
      ++pos_;
      ConceptExpr inner = expr();
      expect(Tok::rparen, "')'");
      return inner;
    }
    const Token& name = expect_name("concept or property name");
    if (peek_word("some")) {
      const Token& some_tok = toks_[pos_++];
      if (pos_ >= end_)
        throw Error(ErrorCode::syntax_error, "dangling 'some': expected a filler", span(some_tok));
      if (at(Tok::lbracket)) return ConceptExpr::data_some(data_property_ref(name.text), range());
      return ConceptExpr::some(object_property_ref(name.text), atom());
    }
    return concept_term(name);
  }

  ConceptExpr atom() {
    if (at(Tok::lparen)) {
      ++pos_;
      ConceptExpr inner = expr();
      expect(Tok::rparen, "')'");
      return inner;
    }
    return concept_term(expect_name("filler"));
  }

  static ConceptExpr concept_term(const Token& name) {
    if (name.text == top_id().name) return ConceptExpr::top();
    return ConceptExpr::named(concept_ref(name.text));
  }

  bool at(Tok t) const { return pos_ < end_ && toks_[pos_].type == t; }

  const Token& current(const std::string& what) const {
    if (pos_ >= end_) throw Error(ErrorCode::syntax_error, "expected " + what, here());
    return toks_[pos_];
  }

  const Token& expect(Tok t, const std::string& what) {
    const Token& tok = current(what);
    if (tok.type != t) throw Error(ErrorCode::syntax_error, "expected " + what + ", found '" + tok.text + "'", span(tok));
    ++pos_;
    return tok;
  }

  const Token& expect_name(const std::string& what) {
    const Token& tok = current(what);
    if (tok.type != Tok::name || keywords().count(tok.text))
      throw Error(ErrorCode::syntax_error, "expected " + what + ", found '" + tok.text + "'", span(tok));
    ++pos_;
    return tok;
  }

  SourceSpan span(const Token& t) const { return {file_, t.line, t.column}; }

  const std::vector<Token>& toks_;
  std::size_t pos_;
  std::size_t end_;
  std::string file_;
  int eof_line_;
  int eof_col_;
};

inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\', out += c;
    else if (c == '\n') out += "\\n";
    else out += c;
  }
  return out + "\"";
}

inline std::string ref_text(const EntityId& id, const std::string& own_module) {
  if (id == top_id()) return top_id().name;
  if (id.module.empty() || id.module == own_module) return id.name;
  return id.canonical();
}

}  // namespace dsl

inline std::string serialize_range(const NumericRange& r) {
  using dsl::format_number;
  std::string out = "[";
  if (r.lower && r.upper && r.lower_inclusive && r.upper_inclusive) {
    out += format_number(*r.lower) + ", " + format_number(*r.upper);
  } else {
    if (r.lower) out += (r.lower_inclusive ? ">= " : "> ") + format_number(*r.lower);
    if (r.lower && r.upper) out += ", ";
    if (r.upper) out += (r.upper_inclusive ? "<= " : "< ") + format_number(*r.upper);
  }
  if (r.unit) out += " " + dsl::quote(*r.unit);
  return out + "]";
}

inline std::string serialize_expr(const ConceptExpr& e, const std::string& own_module = {}) {
  switch (e.kind) {
    case ConceptExpr::Kind::top: return top_id().name;
    case ConceptExpr::Kind::named: return dsl::ref_text(e.entity, own_module);
    case ConceptExpr::Kind::data_some:
      return dsl::ref_text(e.entity, own_module) + " some " + serialize_range(e.range);
    case ConceptExpr::Kind::some: {
      const auto& f = e.filler();
      std::string filler = serialize_expr(f, own_module);
      if (f.kind != ConceptExpr::Kind::named && f.kind != ConceptExpr::Kind::top) filler = "(" + filler + ")";
      return dsl::ref_text(e.entity, own_module) + " some " + filler;
    }
    case ConceptExpr::Kind::conj: {
      std::string out;
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += " and ";
        const auto& op = e.operands[i];
        std::string s = serialize_expr(op, own_module);
        out += op.kind == ConceptExpr::Kind::conj ? "(" + s + ")" : s;
      }
      return out;
    }
  }
  return {};
}

inline QueryAst parse_query(std::string_view text, const std::string& file = {}) {
  auto toks = dsl::Lexer(text, file).run();
  int last_line = 1, last_col = 1;
  if (!toks.empty()) {
    last_line = toks.back().line;
    last_col = toks.back().column + static_cast<int>(toks.back().text.size());
  }
  dsl::ExprParser p(toks, 0, toks.size(), file, last_line, last_col);
  if (p.done()) p.fail("empty query");
  ConceptExpr root = p.expr();
  if (!p.done()) p.fail("unexpected trailing input");
  return {std::move(root), std::string(text)};
}

inline std::string serialize_query(const QueryAst& q) { return serialize_expr(q.root); }

/// Parses one `.oapa` module. Unqualified references are left unresolved
/// (empty module) for merge_modules(); declarations and annotations carry the
/// module's own name.
inline OntologyModule parse_module(std::string_view text, const std::string& file = {}) {
  using dsl::Tok;
  using dsl::Token;
  auto toks = dsl::Lexer(text, file).run();

  OntologyModule m;
  bool have_module = false;
  std::map<std::string, EntityKind> declared;
  struct PendingNote {
    Annotation note;
    SourceSpan where;
  };
  std::vector<PendingNote> notes;
  std::set<std::tuple<std::string, AnnotationKey, std::string>> note_keys;

  auto span_of = [&](const Token& t) { return SourceSpan{file, t.line, t.column}; };

  auto declare = [&](const Token& t, EntityKind kind) {
    if (dsl::keywords().count(t.text) || t.text == top_id().name)
      throw Error(ErrorCode::syntax_error, "'" + t.text + "' cannot be used as a name", span_of(t));
    auto [it, fresh] = declared.emplace(t.text, kind);
    if (!fresh && it->second != kind)
      throw Error(ErrorCode::kind_conflict,
                  "'" + t.text + "' declared as " + std::string(to_string(it->second)) + " and " +
                      std::string(to_string(kind)),
                  span_of(t));
    if (fresh) m.declarations.push_back(EntityId{m.name, t.text, kind});
  };

  std::size_t i = 0;
  while (i < toks.size()) {
    std::size_t end = i;
    while (end < toks.size() && toks[end].line == toks[i].line) ++end;
    const Token& head = toks[i];
    const int line_end_col = toks[end - 1].column + static_cast<int>(toks[end - 1].text.size()) + 1;
    dsl::ExprParser p(toks, i + 1, end, file, head.line, line_end_col);

    auto take = [&](Tok type, const std::string& what) -> const Token& {
      const Token* t = p.peek();
      if (!t) p.fail("expected " + what);
      if (t->type != type || (type == Tok::name && dsl::keywords().count(t->text)))
        throw Error(ErrorCode::syntax_error, "expected " + what + ", found '" + t->text + "'", span_of(*t));
      p.advance();
      return *t;
    };
    auto skip_word = [&](std::string_view w) {
      if (!p.peek_word(w)) return false;
      p.advance();
      return true;
    };
    auto qualified = [](const Token& t) { return t.text.find(':') != std::string::npos; };

    if (head.type != Tok::name)
      throw Error(ErrorCode::syntax_error, "statement must start with a keyword", span_of(head));
    const std::string& kw = head.text;

    if (!have_module && kw != "module")
      throw Error(ErrorCode::syntax_error, "file must start with 'module NAME'", span_of(head));

    if (kw == "module") {
      if (have_module) throw Error(ErrorCode::syntax_error, "second 'module' statement", span_of(head));
      const Token& n = take(Tok::name, "module name");
      if (qualified(n)) throw Error(ErrorCode::syntax_error, "module name cannot be qualified", span_of(n));
      m.name = n.text;
      have_module = true;
    } else if (kw == "import") {
      const Token& n = take(Tok::name, "module name");
      if (qualified(n)) throw Error(ErrorCode::syntax_error, "module name cannot be qualified", span_of(n));
      m.imports.push_back(n.text);
    } else if (kw == "objprop") {
      const Token& n = take(Tok::name, "property name");
      if (qualified(n)) throw Error(ErrorCode::syntax_error, "declarations cannot be qualified", span_of(n));
      declare(n, EntityKind::object_property);
    } else if (kw == "dataprop") {
      const Token& n = take(Tok::name, "property name");
      if (!qualified(n)) declare(n, EntityKind::data_property);
      if (!p.done()) {
        take(Tok::colon, "':'");
        if (!skip_word("decimal")) p.fail("expected 'decimal'");
        std::optional<std::string> unit;
        if (skip_word("unit")) unit = take(Tok::string, "unit string").text;
        m.axioms.push_back(Axiom::data_property_decl(data_property_ref(n.text), std::move(unit)));
      } else if (qualified(n)) {
        p.fail("expected ': decimal' after a qualified data property");
      }
    } else if (kw == "class") {
      const Token& n = take(Tok::name, "class name");
      if (!qualified(n)) declare(n, EntityKind::named_concept);
      if (skip_word("sub")) {
        m.axioms.push_back(Axiom::sub(ConceptExpr::named(concept_ref(n.text)), p.expr()));
      } else if (skip_word("equiv")) {
        m.axioms.push_back(Axiom::equivalent(concept_ref(n.text), p.expr()));
      } else if (!p.done()) {
        p.fail("expected 'sub' or 'equiv'");
      } else if (qualified(n)) {
        p.fail("expected 'sub' or 'equiv' after a qualified class");
      }
    } else if (kw == "sub") {
      ConceptExpr lhs = p.expr();
      if (!skip_word("sub")) p.fail("expected 'sub'");
      m.axioms.push_back(Axiom::sub(std::move(lhs), p.expr()));
    } else if (kw == "ind") {
      const Token& n = take(Tok::name, "individual name");
      if (!qualified(n)) declare(n, EntityKind::individual);
      if (!p.done()) {
        take(Tok::colon, "':'");
        m.axioms.push_back(Axiom::concept_assertion(p.expr(), individual_ref(n.text)));
      } else if (qualified(n)) {
        p.fail("expected ': EXPR' after a qualified individual");
      }
    } else if (kw == "fact") {
      const Token& s = take(Tok::name, "subject");
      const Token& prop = take(Tok::name, "object property");
      const Token& o = take(Tok::name, "object");
      m.axioms.push_back(Axiom::object_assertion(object_property_ref(prop.text), individual_ref(s.text),
                                                 individual_ref(o.text)));
    } else if (kw == "data") {
      const Token& s = take(Tok::name, "subject");
      const Token& prop = take(Tok::name, "data property");
      const Token& v = take(Tok::number, "number");
      m.axioms.push_back(Axiom::data_assertion(data_property_ref(prop.text), individual_ref(s.text), v.number));
    } else if (kw == "label" || kw == "altlabel" || kw == "def") {
      const Token& n = take(Tok::name, "entity name");
      const Token& lang = take(Tok::name, "language code");
      if (lang.text.size() != 2 || !std::islower(static_cast<unsigned char>(lang.text[0])) ||
          !std::islower(static_cast<unsigned char>(lang.text[1])))
        throw Error(ErrorCode::syntax_error, "language must be a 2-letter lowercase code", span_of(lang));
      const Token& text_tok = take(Tok::string, "quoted text");
      AnnotationKey key = kw == "label" ? AnnotationKey::label
                          : kw == "altlabel" ? AnnotationKey::altlabel
                                             : AnnotationKey::definition;
      if (!note_keys.emplace(n.text, key, lang.text).second)
        throw Error(ErrorCode::duplicate_annotation, kw + "@" + lang.text + " of '" + n.text + "' given twice",
                    span_of(head));
      Annotation a;
      a.entity.name = n.text;
      a.key = key;
      a.lang = lang.text;
      a.text = text_tok.text;
      notes.push_back({std::move(a), span_of(n)});
    } else {
      throw Error(ErrorCode::syntax_error, "unknown keyword '" + kw + "'", span_of(head));
    }
    if (!p.done()) p.fail("unexpected trailing input");
    m.declaration_spans.resize(m.declarations.size(), span_of(head));
    m.axiom_spans.resize(m.axioms.size(), span_of(head));
    i = end;
  }
  if (!have_module) throw Error(ErrorCode::syntax_error, "missing 'module NAME'", SourceSpan{file, 1, 1});

  for (auto& [a, where] : notes) {
    auto it = declared.find(a.entity.name);
    if (it == declared.end())
      throw Error(ErrorCode::unknown_entity, "annotated entity '" + a.entity.name + "' is not declared in this module",
                  where);
    a.entity = EntityId{m.name, a.entity.name, it->second};
    m.annotations.push_back(std::move(a));
    m.annotation_spans.push_back(where);
  }
  return m;
}

inline OntologyModule parse_module_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_module(buf.str(), path);
}

/// Canonical text: imports, properties, concepts, individuals, facts and
/// annotations, each section sorted.
inline std::string serialize_module(const OntologyModule& m) {
  const std::string& own = m.name;
  auto is_local = [&](const EntityId& id, EntityKind kind) {
    if (!(id.module.empty() || id.module == own)) return false;
    return std::any_of(m.declarations.begin(), m.declarations.end(),
                       [&](const EntityId& d) { return d.name == id.name && d.kind == kind; });
  };
  auto ref = [&](const EntityId& id) { return dsl::ref_text(id, own); };

  std::vector<std::string> imports(m.imports.begin(), m.imports.end());
  std::vector<std::string> props, concepts, individuals, facts, notes;
  std::set<std::string> described;  // local names that already have a declaring line

  for (const auto& ax : m.axioms) {
    switch (ax.kind) {
      case Axiom::Kind::data_property_decl: {
        std::string line = "dataprop " + ref(ax.property) + " : decimal";
        if (ax.unit) line += " unit " + dsl::quote(*ax.unit);
        props.push_back(line);
        if (is_local(ax.property, EntityKind::data_property)) described.insert(ax.property.name);
        break;
      }
      case Axiom::Kind::sub_concept:
        if (ax.lhs.kind == ConceptExpr::Kind::named && is_local(ax.lhs.entity, EntityKind::named_concept)) {
          concepts.push_back("class " + ref(ax.lhs.entity) + " sub " + serialize_expr(ax.rhs, own));
          described.insert(ax.lhs.entity.name);
        } else if (ax.lhs.kind == ConceptExpr::Kind::named && ax.lhs.entity.resolved()) {
          concepts.push_back("class " + ax.lhs.entity.canonical() + " sub " + serialize_expr(ax.rhs, own));
        } else {
          concepts.push_back("sub " + serialize_expr(ax.lhs, own) + " sub " + serialize_expr(ax.rhs, own));
        }
        break;
      case Axiom::Kind::equivalent:
        if (is_local(ax.subject, EntityKind::named_concept)) {
          concepts.push_back("class " + ref(ax.subject) + " equiv " + serialize_expr(ax.rhs, own));
          described.insert(ax.subject.name);
        } else {
          concepts.push_back("class " + ax.subject.canonical() + " equiv " + serialize_expr(ax.rhs, own));
        }
        break;
      case Axiom::Kind::concept_assertion:
        individuals.push_back("ind " + (is_local(ax.subject, EntityKind::individual) ? ref(ax.subject)
                                                                                     : ax.subject.canonical()) +
                              " : " + serialize_expr(ax.rhs, own));
        if (is_local(ax.subject, EntityKind::individual)) described.insert(ax.subject.name);
        break;
      case Axiom::Kind::object_assertion:
        facts.push_back("fact " + ref(ax.subject) + " " + ref(ax.property) + " " + ref(ax.object));
        break;
      case Axiom::Kind::data_assertion:
        facts.push_back("data " + ref(ax.subject) + " " + ref(ax.property) + " " + dsl::format_number(ax.value));
        break;
    }
  }
  for (const auto& d : m.declarations) {
    if (described.count(d.name)) continue;
    switch (d.kind) {
      case EntityKind::named_concept: concepts.push_back("class " + d.name); break;
      case EntityKind::object_property: props.push_back("objprop " + d.name); break;
      case EntityKind::data_property: props.push_back("dataprop " + d.name); break;
      case EntityKind::individual: individuals.push_back("ind " + d.name); break;
    }
  }
  for (const auto& a : m.annotations)
    notes.push_back(std::string(to_string(a.key)) + " " + a.entity.name + " " + a.lang + " " + dsl::quote(a.text));

  std::string out = "module " + m.name + "\n";
  for (auto* section : {&imports, &props, &concepts, &individuals, &facts, &notes}) {
    std::sort(section->begin(), section->end());
    section->erase(std::unique(section->begin(), section->end()), section->end());
    if (section == &imports)
      for (auto& s : *section) s = "import " + s;
    for (const auto& line : *section) out += line + "\n";
  }
  return out;
}

}  // namespace oapa
