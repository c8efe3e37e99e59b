#pragma once

#include <algorithm>
#include <compare>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "oapa/error.hpp"

namespace oapa {

// ---------------------------------------------------------------------------
// Entities
// ---------------------------------------------------------------------------

enum class EntityKind { named_concept, object_property, data_property, individual };

inline std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::named_concept: return "concept";
    case EntityKind::object_property: return "object_property";
    case EntityKind::data_property: return "data_property";
    case EntityKind::individual: return "individual";
  }
  return "?";
}

/// `[A-Za-z][A-Za-z0-9_]*`
inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

/// A module-qualified entity name. An empty module marks a reference that has not
/// been resolved yet; merge_modules() resolves every reference it keeps.
struct EntityId {
  std::string module;
  std::string name;
  EntityKind kind = EntityKind::named_concept;

  std::string canonical() const { return module.empty() ? name : module + ":" + name; }
  bool resolved() const { return !module.empty(); }

  friend auto operator<=>(const EntityId&, const EntityId&) = default;
  friend bool operator==(const EntityId&, const EntityId&) = default;
};

/// Builds a reference from `name` or `Module:name`.
inline EntityId make_ref(std::string_view text, EntityKind kind) {
  EntityId id;
  id.kind = kind;
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    id.module = std::string(text.substr(0, colon));
    id.name = std::string(text.substr(colon + 1));
  } else {
    id.name = std::string(text);
  }
  return id;
}

inline EntityId concept_ref(std::string_view t) { return make_ref(t, EntityKind::named_concept); }
inline EntityId object_property_ref(std::string_view t) { return make_ref(t, EntityKind::object_property); }
inline EntityId data_property_ref(std::string_view t) { return make_ref(t, EntityKind::data_property); }
inline EntityId individual_ref(std::string_view t) { return make_ref(t, EntityKind::individual); }

/// The reserved top concept. `Thing` is not available as a user name.
inline const EntityId& top_id() {
  static const EntityId top{"owl", "Thing", EntityKind::named_concept};
  return top;
}

// ---------------------------------------------------------------------------
// Numeric ranges (the concrete domain)
// ---------------------------------------------------------------------------

struct NumericRange {
  std::optional<double> lower;
  bool lower_inclusive = false;
  std::optional<double> upper;
  bool upper_inclusive = false;
  std::optional<std::string> unit;

  static NumericRange less_than(double v) { return {std::nullopt, false, v, false, {}}; }
  static NumericRange at_most(double v) { return {std::nullopt, false, v, true, {}}; }
  static NumericRange greater_than(double v) { return {v, false, std::nullopt, false, {}}; }
  static NumericRange at_least(double v) { return {v, true, std::nullopt, false, {}}; }
  static NumericRange closed(double lo, double hi) { return {lo, true, hi, true, {}}; }
  static NumericRange exactly(double v) { return closed(v, v); }

  NumericRange with_unit(std::string u) const {
    NumericRange r = *this;
    r.unit = std::move(u);
    return r;
  }

  bool valid() const {
    if (!lower && !upper) return false;
    if (lower && !std::isfinite(*lower)) return false;
    if (upper && !std::isfinite(*upper)) return false;
    if (lower && upper) {
      if (*lower > *upper) return false;
      if (*lower == *upper && !(lower_inclusive && upper_inclusive)) return false;
    }
    return true;
  }

  void validate() const {
    if (!valid()) throw Error(ErrorCode::invalid_range, "empty or unbounded numeric range");
  }

  bool contains(double v) const {
    if (std::isnan(v)) return false;
    if (lower && (lower_inclusive ? v < *lower : v <= *lower)) return false;
    if (upper && (upper_inclusive ? v > *upper : v >= *upper)) return false;
    return true;
  }

  friend auto operator<=>(const NumericRange&, const NumericRange&) = default;
  friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

// ---------------------------------------------------------------------------
// Concept expressions: Top | Named | And | Some | DataSome
// ---------------------------------------------------------------------------

struct ConceptExpr {
  enum class Kind { top, named, conj, some, data_some };

  Kind kind = Kind::top;
  EntityId entity;                   // named: the concept; some/data_some: the property
  NumericRange range;                // data_some only
  std::vector<ConceptExpr> operands; // conj: the conjuncts; some: exactly one filler

  static ConceptExpr top() { return {}; }
  static ConceptExpr named(EntityId id) {
    ConceptExpr e;
    e.kind = Kind::named;
    e.entity = std::move(id);
    return e;
  }
  static ConceptExpr conj(std::vector<ConceptExpr> parts) {
    ConceptExpr e;
    e.kind = Kind::conj;
    e.operands = std::move(parts);
    return e;
  }
  static ConceptExpr some(EntityId property, ConceptExpr filler) {
    ConceptExpr e;
    e.kind = Kind::some;
    e.entity = std::move(property);
    e.operands.push_back(std::move(filler));
    return e;
  }
  static ConceptExpr data_some(EntityId property, NumericRange range) {
    ConceptExpr e;
    e.kind = Kind::data_some;
    e.entity = std::move(property);
    e.range = std::move(range);
    return e;
  }

  const ConceptExpr& filler() const { return operands.front(); }

  friend std::partial_ordering operator<=>(const ConceptExpr& a, const ConceptExpr& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.entity <=> b.entity; c != 0) return c;
    if (auto c = a.range <=> b.range; c != 0) return c;
    return std::lexicographical_compare_three_way(
        a.operands.begin(), a.operands.end(), b.operands.begin(), b.operands.end(),
        [](const ConceptExpr& x, const ConceptExpr& y) { return x <=> y; });
  }
  friend bool operator==(const ConceptExpr& a, const ConceptExpr& b) {
    return a.kind == b.kind && a.entity == b.entity && a.range == b.range &&
           a.operands == b.operands;
  }
};

/// Flattens nested conjunctions, sorts and deduplicates conjuncts. A conjunction
/// that collapses to one operand is replaced by that operand.
inline ConceptExpr canonicalize(const ConceptExpr& e) {
  switch (e.kind) {
    case ConceptExpr::Kind::named:
      if (e.entity == top_id()) return ConceptExpr::top();
      return e;
    case ConceptExpr::Kind::top:
    case ConceptExpr::Kind::data_some:
      return e;
    case ConceptExpr::Kind::some:
      return ConceptExpr::some(e.entity, canonicalize(e.filler()));
    case ConceptExpr::Kind::conj: {
      std::vector<ConceptExpr> parts;
      for (const auto& op : e.operands) {
        ConceptExpr c = canonicalize(op);
        if (c.kind == ConceptExpr::Kind::conj) {
          for (auto& inner : c.operands) parts.push_back(std::move(inner));
        } else {
          parts.push_back(std::move(c));
        }
      }
      std::sort(parts.begin(), parts.end());
      parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
      if (parts.size() == 1) return std::move(parts.front());
      return ConceptExpr::conj(std::move(parts));
    }
  }
  return e;
}

/// Calls `fn` on every entity reference inside the expression.
inline void for_each_entity(const ConceptExpr& e, const std::function<void(const EntityId&)>& fn) {
  switch (e.kind) {
    case ConceptExpr::Kind::top: return;
    case ConceptExpr::Kind::named: fn(e.entity); return;
    case ConceptExpr::Kind::data_some: fn(e.entity); return;
    case ConceptExpr::Kind::some:
      fn(e.entity);
      for_each_entity(e.filler(), fn);
      return;
    case ConceptExpr::Kind::conj:
      for (const auto& op : e.operands) for_each_entity(op, fn);
      return;
  }
}

/// Rebuilds the expression with every entity reference mapped through `fn`.
inline ConceptExpr map_entities(const ConceptExpr& e,
                                const std::function<EntityId(const EntityId&)>& fn) {
  ConceptExpr out = e;
  if (e.kind != ConceptExpr::Kind::top && e.kind != ConceptExpr::Kind::conj) out.entity = fn(e.entity);
  for (auto& op : out.operands) op = map_entities(op, fn);
  return out;
}

// ---------------------------------------------------------------------------
// Axioms, annotations, modules
// ---------------------------------------------------------------------------

struct Axiom {
  enum class Kind {
    sub_concept,         // lhs ⊑ rhs
    equivalent,          // subject ≡ rhs
    concept_assertion,   // subject : rhs
    object_assertion,    // property(subject, object)
    data_assertion,      // property(subject, value)
    data_property_decl,  // property declared decimal, with optional unit
  };

  Kind kind = Kind::sub_concept;
  ConceptExpr lhs;
  ConceptExpr rhs;
  EntityId subject;
  EntityId property;
  EntityId object;
  double value = 0.0;
  std::optional<std::string> unit;

  static Axiom sub(ConceptExpr sub, ConceptExpr sup) {
    Axiom a;
    a.kind = Kind::sub_concept;
    a.lhs = std::move(sub);
    a.rhs = std::move(sup);
    return a;
  }
  static Axiom equivalent(EntityId named, ConceptExpr expr) {
    Axiom a;
    a.kind = Kind::equivalent;
    a.subject = std::move(named);
    a.rhs = std::move(expr);
    return a;
  }
  static Axiom concept_assertion(ConceptExpr expr, EntityId ind) {
    Axiom a;
    a.kind = Kind::concept_assertion;
    a.subject = std::move(ind);
    a.rhs = std::move(expr);
    return a;
  }
  static Axiom object_assertion(EntityId prop, EntityId subject, EntityId object) {
    Axiom a;
    a.kind = Kind::object_assertion;
    a.property = std::move(prop);
    a.subject = std::move(subject);
    a.object = std::move(object);
    return a;
  }
  static Axiom data_assertion(EntityId prop, EntityId subject, double value) {
    Axiom a;
    a.kind = Kind::data_assertion;
    a.property = std::move(prop);
    a.subject = std::move(subject);
    a.value = value;
    return a;
  }
  static Axiom data_property_decl(EntityId prop, std::optional<std::string> unit) {
    Axiom a;
    a.kind = Kind::data_property_decl;
    a.property = std::move(prop);
    a.unit = std::move(unit);
    return a;
  }

  friend auto operator<=>(const Axiom&, const Axiom&) = default;
  friend bool operator==(const Axiom&, const Axiom&) = default;
};

inline void for_each_entity(const Axiom& a, const std::function<void(const EntityId&)>& fn) {
  switch (a.kind) {
    case Axiom::Kind::sub_concept:
      for_each_entity(a.lhs, fn);
      for_each_entity(a.rhs, fn);
      return;
    case Axiom::Kind::equivalent:
    case Axiom::Kind::concept_assertion:
      fn(a.subject);
      for_each_entity(a.rhs, fn);
      return;
    case Axiom::Kind::object_assertion:
      fn(a.property);
      fn(a.subject);
      fn(a.object);
      return;
    case Axiom::Kind::data_assertion:
      fn(a.property);
      fn(a.subject);
      return;
    case Axiom::Kind::data_property_decl:
      fn(a.property);
      return;
  }
}

inline Axiom map_entities(const Axiom& a, const std::function<EntityId(const EntityId&)>& fn) {
  Axiom out = a;
  switch (a.kind) {
    case Axiom::Kind::sub_concept:
      out.lhs = map_entities(a.lhs, fn);
      out.rhs = map_entities(a.rhs, fn);
      break;
    case Axiom::Kind::equivalent:
    case Axiom::Kind::concept_assertion:
      out.subject = fn(a.subject);
      out.rhs = map_entities(a.rhs, fn);
      break;
    case Axiom::Kind::object_assertion:
      out.property = fn(a.property);
      out.subject = fn(a.subject);
      out.object = fn(a.object);
      break;
    case Axiom::Kind::data_assertion:
      out.property = fn(a.property);
      out.subject = fn(a.subject);
      break;
    case Axiom::Kind::data_property_decl:
      out.property = fn(a.property);
      break;
  }
  return out;
}

inline Axiom canonicalize(const Axiom& a) {
  Axiom out = a;
  out.lhs = canonicalize(a.lhs);
  out.rhs = canonicalize(a.rhs);
  return out;
}

enum class AnnotationKey { label, altlabel, definition };

inline std::string_view to_string(AnnotationKey key) {
  switch (key) {
    case AnnotationKey::label: return "label";
    case AnnotationKey::altlabel: return "altlabel";
    case AnnotationKey::definition: return "def";
  }
  return "?";
}

struct Annotation {
  EntityId entity;
  AnnotationKey key = AnnotationKey::label;
  std::string lang;
  std::string text;

  friend auto operator<=>(const Annotation&, const Annotation&) = default;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct OntologyModule {
  std::string name;
  std::vector<std::string> imports;
  std::vector<EntityId> declarations;
  std::vector<Axiom> axioms;
  std::vector<Annotation> annotations;
  // Where each declaration, axiom and annotation came from, when parsed from
  // text. Shorter than its list (or empty) for statements built in code.
  std::vector<SourceSpan> declaration_spans;
  std::vector<SourceSpan> axiom_spans;
  std::vector<SourceSpan> annotation_spans;
};

namespace detail {

/// Runs fn, attaching spans[i] to any span-less error it throws.
template <typename Fn>
void at_statement(const std::vector<SourceSpan>& spans, std::size_t i, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.span() || i >= spans.size()) throw;
    throw Error(e.code(), e.message(), spans[i]);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Knowledge base
// ---------------------------------------------------------------------------

struct KbStats {
  std::size_t concepts = 0;
  std::size_t object_properties = 0;
  std::size_t data_properties = 0;
  std::size_t individuals = 0;
  std::size_t axioms = 0;
  std::size_t modules = 0;

  friend bool operator==(const KbStats&, const KbStats&) = default;
};

/// Merged, resolved view over a set of modules. Immutable once built.
class KnowledgeBase {
 public:
  const std::vector<OntologyModule>& modules() const { return modules_; }
  const std::map<std::string, EntityId>& entity_index() const { return index_; }
  const std::vector<Axiom>& axioms() const { return axioms_; }
  const std::vector<Annotation>& annotations() const { return annotations_; }

  bool contains(const EntityId& id) const {
    if (id == top_id()) return true;
    auto it = index_.find(id.canonical());
    return it != index_.end() && it->second.kind == id.kind;
  }

  std::optional<EntityId> find(std::string_view canonical) const {
    auto it = index_.find(std::string(canonical));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Resolves `name` or `Module:name` to a declared entity of the given kind.
  EntityId resolve(std::string_view ref, EntityKind kind) const {
    EntityId wanted = make_ref(ref, kind);
    if (kind == EntityKind::named_concept && wanted.module.empty() && wanted.name == top_id().name)
      return top_id();
    if (wanted.resolved()) {
      if (contains(wanted)) return wanted;
      throw Error(ErrorCode::unknown_entity,
                  std::string(to_string(kind)) + " '" + std::string(ref) + "' is not declared");
    }
    std::vector<EntityId> hits;
    auto [lo, hi] = by_name_.equal_range(wanted.name);
    for (auto it = lo; it != hi; ++it)
      if (it->second.kind == kind) hits.push_back(it->second);
    if (hits.empty())
      throw Error(ErrorCode::unknown_entity,
                  std::string(to_string(kind)) + " '" + std::string(ref) + "' is not declared");
    if (hits.size() > 1)
      throw Error(ErrorCode::ambiguous_reference,
                  "'" + std::string(ref) + "' is declared in several modules; qualify it");
    return hits.front();
  }

  /// Resolves every entity reference in the expression (already-resolved ids are checked).
  ConceptExpr resolve(const ConceptExpr& expr) const {
    return canonicalize(map_entities(expr, [this](const EntityId& id) {
      return resolve(id.canonical(), id.kind);
    }));
  }

  std::vector<EntityId> entities(EntityKind kind) const {
    std::vector<EntityId> out;
    for (const auto& [_, id] : index_)
      if (id.kind == kind) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::optional<std::string> unit_of(const EntityId& data_property) const {
    auto it = units_.find(data_property);
    if (it == units_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::string> annotation(const EntityId& entity, AnnotationKey key,
                                        const std::string& lang) const {
    auto it = annotation_index_.find({entity, key, lang});
    if (it == annotation_index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> annotation_languages(const EntityId& entity, AnnotationKey key) const {
    std::vector<std::string> langs;
    for (const auto& [k, _] : annotation_index_)
      if (std::get<0>(k) == entity && std::get<1>(k) == key) langs.push_back(std::get<2>(k));
    return langs;
  }

 private:
  friend KnowledgeBase merge_modules(std::vector<OntologyModule> modules);

  std::vector<OntologyModule> modules_;
  std::map<std::string, EntityId> index_;
  std::multimap<std::string, EntityId> by_name_;
  std::vector<Axiom> axioms_;
  std::vector<Annotation> annotations_;
  std::map<EntityId, std::string> units_;
  std::map<std::tuple<EntityId, AnnotationKey, std::string>, std::string> annotation_index_;
};

namespace detail {

inline std::vector<std::string> find_import_cycle(const std::map<std::string, OntologyModule>& mods,
                                                  const std::set<std::string>& remaining) {
  // Every remaining node has an import inside `remaining`, so walking imports must revisit a node.
  std::string start = *remaining.begin();
  std::vector<std::string> path;
  std::map<std::string, std::size_t> seen;
  std::string cur = start;
  while (!seen.count(cur)) {
    seen[cur] = path.size();
    path.push_back(cur);
    std::string next;
    for (const auto& imp : mods.at(cur).imports)
      if (remaining.count(imp)) {
        next = imp;
        break;
      }
    cur = next;
  }
  std::vector<std::string> cycle(path.begin() + static_cast<std::ptrdiff_t>(seen[cur]), path.end());
  std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
  return cycle;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

/// Orders modules topologically along their imports (ties broken by name),
/// resolves every reference and flattens axioms and annotations.
inline KnowledgeBase merge_modules(std::vector<OntologyModule> input) {
  std::map<std::string, OntologyModule> mods;
  for (auto& m : input) {
    if (!is_identifier(m.name))
      throw Error(ErrorCode::invalid_identifier, "module name '" + m.name + "'");
    auto [it, fresh] = mods.try_emplace(m.name, m);
    if (!fresh) {
      auto& dst = it->second;
      dst.imports.insert(dst.imports.end(), m.imports.begin(), m.imports.end());
      dst.declarations.insert(dst.declarations.end(), m.declarations.begin(), m.declarations.end());
      dst.axioms.insert(dst.axioms.end(), m.axioms.begin(), m.axioms.end());
      dst.annotations.insert(dst.annotations.end(), m.annotations.begin(), m.annotations.end());
    }
  }
  for (auto& [name, m] : mods) {
    std::sort(m.imports.begin(), m.imports.end());
    m.imports.erase(std::unique(m.imports.begin(), m.imports.end()), m.imports.end());
    for (const auto& imp : m.imports)
      if (!mods.count(imp))
        throw Error(ErrorCode::missing_import, "module '" + name + "' imports unknown module '" + imp + "'");
  }

  // Kahn's algorithm; the ready set is ordered so the result depends on imports only.
  std::map<std::string, std::size_t> pending;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& [name, m] : mods) {
    pending[name] = m.imports.size();
    for (const auto& imp : m.imports) dependents[imp].push_back(name);
  }
  std::set<std::string> ready;
  for (const auto& [name, n] : pending)
    if (n == 0) ready.insert(name);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string next = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(next);
    for (const auto& dep : dependents[next])
      if (--pending[dep] == 0) ready.insert(dep);
  }
  if (order.size() != mods.size()) {
    std::set<std::string> remaining;
    for (const auto& [name, n] : pending)
      if (n > 0) remaining.insert(name);
    auto cycle = detail::find_import_cycle(mods, remaining);
    throw Error(ErrorCode::cyclic_import, "import cycle [" + detail::join(cycle, ", ") + "]");
  }

  KnowledgeBase kb;
  std::map<std::string, std::set<std::string>> scope;            // module -> transitive imports
  std::map<std::string, std::map<std::string, EntityId>> owned;  // module -> local name -> entity

  auto kind_conflict = [](const std::string& what, EntityKind a, EntityKind b) {
    return Error(ErrorCode::kind_conflict, "'" + what + "' is both " + std::string(to_string(a)) +
                                               " and " + std::string(to_string(b)));
  };

  for (const auto& name : order) {
    const auto& m = mods.at(name);
    auto& sc = scope[name];
    for (const auto& imp : m.imports) {
      sc.insert(imp);
      sc.insert(scope[imp].begin(), scope[imp].end());
    }
    auto& mine = owned[name];
    for (std::size_t di = 0; di < m.declarations.size(); ++di) detail::at_statement(m.declaration_spans, di, [&] {
      const auto& decl = m.declarations[di];
      if (!is_identifier(decl.name))
        throw Error(ErrorCode::invalid_identifier, "entity name '" + decl.name + "' in module " + name);
      if (decl.name == top_id().name)
        throw Error(ErrorCode::invalid_identifier, "'Thing' is reserved for the top concept");
      if (auto it = mine.find(decl.name); it != mine.end()) {
        if (it->second.kind != decl.kind) throw kind_conflict(name + ":" + decl.name, it->second.kind, decl.kind);
        return;
      }
      std::optional<EntityId> inherited;
      for (const auto& imp : sc) {
        auto& theirs = owned[imp];
        auto it = theirs.find(decl.name);
        if (it == theirs.end()) continue;
        if (it->second.kind != decl.kind)
          throw kind_conflict(it->second.canonical(), it->second.kind, decl.kind);
        if (inherited && *inherited != it->second)
          throw Error(ErrorCode::ambiguous_reference,
                      "'" + decl.name + "' is declared by several modules imported by " + name);
        inherited = it->second;
      }
      if (inherited) {
        mine.emplace(decl.name, *inherited);
        return;
      }
      EntityId id{name, decl.name, decl.kind};
      mine.emplace(decl.name, id);
      kb.index_.emplace(id.canonical(), id);
      kb.by_name_.emplace(id.name, id);
    });
  }

  std::set<Axiom> seen_axioms;
  std::map<std::pair<EntityId, EntityId>, double> data_values;
  std::map<std::tuple<EntityId, AnnotationKey, std::string>, std::string>& notes = kb.annotation_index_;

  for (const auto& name : order) {
    const auto& m = mods.at(name);
    const auto& sc = scope[name];

    auto resolve = [&](const EntityId& ref) -> EntityId {
      if (ref == top_id()) return ref;
      auto describe = [&] { return std::string(to_string(ref.kind)) + " '" + ref.canonical() + "'"; };
      if (ref.resolved()) {
        auto mod = owned.find(ref.module);
        if (mod != owned.end()) {
          auto it = mod->second.find(ref.name);
          if (it != mod->second.end()) {
            if (it->second.kind != ref.kind) throw kind_conflict(ref.canonical(), it->second.kind, ref.kind);
            return it->second;
          }
        }
        throw Error(ErrorCode::unknown_entity, describe() + " referenced in module " + name + " is not declared");
      }
      if (auto it = owned[name].find(ref.name); it != owned[name].end()) {
        if (it->second.kind != ref.kind) throw kind_conflict(it->second.canonical(), it->second.kind, ref.kind);
        return it->second;
      }
      std::optional<EntityId> found;
      std::optional<EntityKind> other_kind;
      for (const auto& imp : sc) {
        auto& theirs = owned[imp];
        auto it = theirs.find(ref.name);
        if (it == theirs.end()) continue;
        if (it->second.kind != ref.kind) {
          other_kind = it->second.kind;
          continue;
        }
        if (found && *found != it->second)
          throw Error(ErrorCode::ambiguous_reference,
                      describe() + " in module " + name + " matches several imported declarations");
        found = it->second;
      }
      if (found) return *found;
      if (other_kind) throw kind_conflict(ref.name, *other_kind, ref.kind);
      throw Error(ErrorCode::unknown_entity, describe() + " referenced in module " + name + " is not declared");
    };

    OntologyModule resolved;
    resolved.name = name;
    resolved.imports = m.imports;
    for (const auto& [local, id] : owned[name])
      if (id.module == name) resolved.declarations.push_back(id);

    for (std::size_t ai = 0; ai < m.axioms.size(); ++ai) detail::at_statement(m.axiom_spans, ai, [&] {
      const auto& raw = m.axioms[ai];
      if (raw.kind == Axiom::Kind::equivalent && raw.subject.kind != EntityKind::named_concept)
        throw Error(ErrorCode::unsupported_construct, "equivalence must define a named concept");
      Axiom ax = canonicalize(map_entities(raw, resolve));
      if (ax.kind == Axiom::Kind::data_property_decl) {
        if (ax.unit) {
          auto [it, fresh] = kb.units_.emplace(ax.property, *ax.unit);
          if (!fresh && it->second != *ax.unit)
            throw Error(ErrorCode::unit_mismatch, "data property " + ax.property.canonical() +
                                                      " declared with units '" + it->second + "' and '" +
                                                      *ax.unit + "'");
        }
      }
      if (ax.kind == Axiom::Kind::data_assertion) {
        auto key = std::make_pair(ax.property, ax.subject);
        auto [it, fresh] = data_values.emplace(key, ax.value);
        if (!fresh && it->second != ax.value)
          throw Error(ErrorCode::duplicate_data_assertion,
                      ax.subject.canonical() + " has two values for " + ax.property.canonical());
      }
      resolved.axioms.push_back(ax);
      if (seen_axioms.insert(ax).second) kb.axioms_.push_back(std::move(ax));
    });

    for (std::size_t ni = 0; ni < m.annotations.size(); ++ni) detail::at_statement(m.annotation_spans, ni, [&] {
      Annotation a = m.annotations[ni];
      const auto& raw = m.annotations[ni];
      a.entity = resolve(raw.entity);
      auto key = std::make_tuple(a.entity, a.key, a.lang);
      auto [it, fresh] = notes.emplace(key, a.text);
      if (!fresh) {
        if (it->second != a.text)
          throw Error(ErrorCode::duplicate_annotation, std::string(to_string(a.key)) + "@" + a.lang +
                                                           " of " + a.entity.canonical() + " given twice");
      } else {
        kb.annotations_.push_back(a);
      }
      resolved.annotations.push_back(std::move(a));
    });
    kb.modules_.push_back(std::move(resolved));
  }

  // Range units are checked once every data property declaration is known.
  auto check_units = [&](const ConceptExpr& root) {
    std::function<void(const ConceptExpr&)> walk = [&](const ConceptExpr& e) {
      if (e.kind == ConceptExpr::Kind::data_some) {
        e.range.validate();
        if (e.range.unit) {
          auto declared = kb.unit_of(e.entity);
          if (!declared || *declared != *e.range.unit)
            throw Error(ErrorCode::unit_mismatch, "range unit '" + *e.range.unit + "' does not match " +
                                                      e.entity.canonical() + " unit '" +
                                                      declared.value_or("<none>") + "'");
        }
      }
      for (const auto& op : e.operands) walk(op);
    };
    walk(root);
  };
  for (const auto& ax : kb.axioms_) {
    check_units(ax.lhs);
    check_units(ax.rhs);
  }
  return kb;
}

inline KbStats stats(const KnowledgeBase& kb) {
  KbStats s;
  for (const auto& [_, id] : kb.entity_index()) {
    switch (id.kind) {
      case EntityKind::named_concept: ++s.concepts; break;
      case EntityKind::object_property: ++s.object_properties; break;
      case EntityKind::data_property: ++s.data_properties; break;
      case EntityKind::individual: ++s.individuals; break;
    }
  }
  s.axioms = kb.axioms().size();
  s.modules = kb.modules().size();
  return s;
}

/// Annotation lookup with language fallback: requested, "fr", "en", then the
/// lexicographically first language present.
inline std::optional<std::string> get_annotation(const KnowledgeBase& kb, const EntityId& entity,
                                                 AnnotationKey key, const std::string& lang) {
  if (!kb.contains(entity))
    throw Error(ErrorCode::unknown_entity, entity.canonical() + " is not declared");
  for (const std::string& l : {lang, std::string("fr"), std::string("en")})
    if (auto text = kb.annotation(entity, key, l)) return text;
  auto langs = kb.annotation_languages(entity, key);
  if (langs.empty()) return std::nullopt;
  return kb.annotation(entity, key, langs.front());
}

/// Display name: fr label when present, the local name otherwise.
inline std::string display_label(const KnowledgeBase& kb, const EntityId& entity,
                                 const std::string& lang = "fr") {
  if (kb.contains(entity))
    if (auto text = get_annotation(kb, entity, AnnotationKey::label, lang)) return *text;
  return entity.name;
}

}  // namespace oapa
