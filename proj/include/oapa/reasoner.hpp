#pragma once

// EL classification with a numeric-range concrete domain.
//
// Axioms are rewritten into six normal forms over atomic nodes (named
// concepts, Top, and fresh `_nf` names), then saturated with the completion
// rules below until nothing new can be derived:
//
//   R1  A ⊑ B, B ⊑ C                     =>  A ⊑ C
//   R2  A ⊑ A1, A ⊑ A2, A1 ⊓ A2 ⊑ B      =>  A ⊑ B
//   R3  A ⊑ ∃r.B, B ⊑ C, ∃r.C ⊑ D        =>  A ⊑ D
//   R4  A ⊑ ∃p.R1, R1 ⊆ R2, ∃p.R2 ⊑ B    =>  A ⊑ B
//
// Realization and retrieval reuse the same machinery: every individual gets a
// node of its own and its assertions become axioms on that node.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "oapa/kb.hpp"

namespace oapa {

/// True iff every value of `inner` lies in `outer`. Ranges whose units are both
/// present and differ never subsume each other; an absent unit matches any.
inline bool range_subsumes(const NumericRange& inner, const NumericRange& outer) {
  if (inner.unit && outer.unit && *inner.unit != *outer.unit) return false;
  if (outer.lower) {
    if (!inner.lower) return false;
    if (*inner.lower < *outer.lower) return false;
    if (*inner.lower == *outer.lower && inner.lower_inclusive && !outer.lower_inclusive) return false;
  }
  if (outer.upper) {
    if (!inner.upper) return false;
    if (*inner.upper > *outer.upper) return false;
    if (*inner.upper == *outer.upper && inner.upper_inclusive && !outer.upper_inclusive) return false;
  }
  return true;
}

struct NormalAxiom {
  enum class Kind {
    sub,       // lhs ⊑ rhs
    conj_sub,  // lhs ⊓ lhs2 ⊑ rhs
    sub_some,  // lhs ⊑ ∃role.rhs
    some_sub,  // ∃role.lhs ⊑ rhs
    sub_data,  // lhs ⊑ ∃role.range    (role indexes data properties)
    data_sub,  // ∃role.range ⊑ rhs
  };
  Kind kind = Kind::sub;
  int lhs = -1;
  int lhs2 = -1;
  int role = -1;
  int rhs = -1;
  NumericRange range;

  friend auto operator<=>(const NormalAxiom&, const NormalAxiom&) = default;
  friend bool operator==(const NormalAxiom&, const NormalAxiom&) = default;
};

inline constexpr std::string_view kFreshPrefix = "_nf";
inline constexpr std::string_view kIndividualNodeModule = "_ind";

struct NormalizedTBox {
  std::vector<EntityId> nodes;  // node 0 is Top
  std::vector<bool> internal;
  std::vector<EntityId> roles;
  std::vector<EntityId> data_roles;
  std::vector<NormalAxiom> axioms;
  int fresh_count = 0;

  std::map<EntityId, int> node_ids;
  std::map<EntityId, int> role_ids;
  std::map<EntityId, int> data_role_ids;

  NormalizedTBox() {
    nodes.push_back(top_id());
    internal.push_back(false);
    node_ids.emplace(top_id(), 0);
  }

  std::optional<int> node(const EntityId& id) const {
    auto it = node_ids.find(id);
    if (it == node_ids.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

/// Structural transformation into normal form. Complex subexpressions get
/// fresh names, memoized per side so identical subterms share one name.
class Normalizer {
 public:
  explicit Normalizer(NormalizedTBox& out) : t_(out) {}

  int node(const EntityId& id, bool internal = false) {
    if (id == top_id()) return 0;
    auto [it, fresh] = t_.node_ids.emplace(id, static_cast<int>(t_.nodes.size()));
    if (fresh) {
      t_.nodes.push_back(id);
      t_.internal.push_back(internal);
    }
    return it->second;
  }

  int fresh() {
    EntityId id{std::string(kFreshPrefix), std::string(kFreshPrefix) + std::to_string(t_.fresh_count++),
                EntityKind::named_concept};
    return node(id, true);
  }

  int role(const EntityId& id) {
    auto [it, fresh] = t_.role_ids.emplace(id, static_cast<int>(t_.roles.size()));
    if (fresh) t_.roles.push_back(id);
    return it->second;
  }

  int data_role(const EntityId& id) {
    auto [it, fresh] = t_.data_role_ids.emplace(id, static_cast<int>(t_.data_roles.size()));
    if (fresh) t_.data_roles.push_back(id);
    return it->second;
  }

  void add(const ConceptExpr& sub, const ConceptExpr& sup) {
    if (sup.kind == ConceptExpr::Kind::top) return;
    if (sup.kind == ConceptExpr::Kind::named) {
      add_into(sub, node(sup.entity));
      return;
    }
    add_rhs(name_lhs(sub), sup);
  }

  /// sub ⊑ target
  void add_into(const ConceptExpr& sub, int target) {
    switch (sub.kind) {
      case ConceptExpr::Kind::top:
      case ConceptExpr::Kind::named: {
        int a = atom(sub);
        if (a != target && target != 0) push({NormalAxiom::Kind::sub, a, -1, -1, target, {}});
        return;
      }
      case ConceptExpr::Kind::conj: {
        std::vector<int> parts;
        for (const auto& op : sub.operands) parts.push_back(name_lhs(op));
        int acc = parts.front();
        for (std::size_t i = 1; i + 1 < parts.size(); ++i) {
          int f = fresh();
          push({NormalAxiom::Kind::conj_sub, acc, parts[i], -1, f, {}});
          acc = f;
        }
        push({NormalAxiom::Kind::conj_sub, acc, parts.back(), -1, target, {}});
        return;
      }
      case ConceptExpr::Kind::some:
        push({NormalAxiom::Kind::some_sub, name_lhs(sub.filler()), -1, role(sub.entity), target, {}});
        return;
      case ConceptExpr::Kind::data_some:
        push({NormalAxiom::Kind::data_sub, -1, -1, data_role(sub.entity), target, sub.range});
        return;
    }
    throw Error(ErrorCode::unsupported_construct, "unknown expression kind");
  }

  /// x ⊑ sup
  void add_rhs(int x, const ConceptExpr& sup) {
    switch (sup.kind) {
      case ConceptExpr::Kind::top: return;
      case ConceptExpr::Kind::named: {
        int b = node(sup.entity);
        if (b != x && b != 0) push({NormalAxiom::Kind::sub, x, -1, -1, b, {}});
        return;
      }
      case ConceptExpr::Kind::conj:
        for (const auto& op : sup.operands) add_rhs(x, op);
        return;
      case ConceptExpr::Kind::some:
        push({NormalAxiom::Kind::sub_some, x, -1, role(sup.entity), name_rhs(sup.filler()), {}});
        return;
      case ConceptExpr::Kind::data_some:
        push({NormalAxiom::Kind::sub_data, x, -1, data_role(sup.entity), -1, sup.range});
        return;
    }
    throw Error(ErrorCode::unsupported_construct, "unknown expression kind");
  }

  /// Atom X with expr ⊑ X.
  int name_lhs(const ConceptExpr& e) {
    if (e.kind == ConceptExpr::Kind::top || e.kind == ConceptExpr::Kind::named) return atom(e);
    if (auto it = lhs_names_.find(e); it != lhs_names_.end()) return it->second;
    int f = fresh();
    lhs_names_.emplace(e, f);
    add_into(e, f);
    return f;
  }

  /// Atom Y with Y ⊑ expr.
  int name_rhs(const ConceptExpr& e) {
    if (e.kind == ConceptExpr::Kind::top || e.kind == ConceptExpr::Kind::named) return atom(e);
    if (auto it = rhs_names_.find(e); it != rhs_names_.end()) return it->second;
    int f = fresh();
    rhs_names_.emplace(e, f);
    add_rhs(f, e);
    return f;
  }

 private:
  int atom(const ConceptExpr& e) { return e.kind == ConceptExpr::Kind::top ? 0 : node(e.entity); }

  void push(NormalAxiom a) {
    if (seen_.insert(a).second) t_.axioms.push_back(std::move(a));
  }

  NormalizedTBox& t_;
  std::map<ConceptExpr, int> lhs_names_;
  std::map<ConceptExpr, int> rhs_names_;
  std::set<NormalAxiom> seen_;
};

/// Completion graph after saturation: node subsumer sets and role edges.
class Saturation {
 public:
  explicit Saturation(const NormalizedTBox& t) : n_(static_cast<int>(t.nodes.size())) {
    words_ = (static_cast<std::size_t>(n_) + 63) / 64;
    bits_.assign(words_ * static_cast<std::size_t>(n_), 0);
    subs_.resize(n_);
    pred_.resize(n_);
    index(t);
    run();
  }

  bool has(int a, int b) const {
    return (bits_[static_cast<std::size_t>(a) * words_ + static_cast<std::size_t>(b) / 64] >> (b % 64)) & 1u;
  }
  const std::vector<int>& subsumers(int a) const { return subs_[a]; }
  int size() const { return n_; }

 private:
  struct Item {
    int node;
    int role;  // -1: add concept `target` to S(node); else link node -role-> target
    int target;
  };

  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  }

  void index(const NormalizedTBox& t) {
    told_.resize(n_);
    conj_.resize(n_);
    exist_rhs_.resize(n_);
    data_implied_.resize(n_);
    std::vector<const NormalAxiom*> data_lhs;
    for (const auto& a : t.axioms)
      if (a.kind == NormalAxiom::Kind::data_sub) data_lhs.push_back(&a);
    for (const auto& a : t.axioms) {
      switch (a.kind) {
        case NormalAxiom::Kind::sub: told_[a.lhs].push_back(a.rhs); break;
        case NormalAxiom::Kind::conj_sub:
          conj_[a.lhs].emplace_back(a.lhs2, a.rhs);
          if (a.lhs2 != a.lhs) conj_[a.lhs2].emplace_back(a.lhs, a.rhs);
          break;
        case NormalAxiom::Kind::sub_some: exist_rhs_[a.lhs].emplace_back(a.role, a.rhs); break;
        case NormalAxiom::Kind::some_sub: exist_lhs_[key(a.role, a.lhs)].push_back(a.rhs); break;
        case NormalAxiom::Kind::sub_data:
          for (const NormalAxiom* d : data_lhs)
            if (d->role == a.role && range_subsumes(a.range, d->range)) data_implied_[a.lhs].push_back(d->rhs);
          break;
        case NormalAxiom::Kind::data_sub: break;
      }
    }
  }

  void run() {
    for (int a = 0; a < n_; ++a) {
      queue_.push_back({a, -1, a});
      queue_.push_back({a, -1, 0});
    }
    static const std::vector<int> kNone;
    auto exist_lhs = [&](int role, int filler) -> const std::vector<int>& {
      auto it = exist_lhs_.find(key(role, filler));
      return it == exist_lhs_.end() ? kNone : it->second;
    };
    while (!queue_.empty()) {
      Item it = queue_.front();
      queue_.pop_front();
      if (it.role < 0) {
        const int a = it.node, b = it.target;
        if (has(a, b)) continue;
        bits_[static_cast<std::size_t>(a) * words_ + static_cast<std::size_t>(b) / 64] |= std::uint64_t{1} << (b % 64);
        subs_[a].push_back(b);
        for (int c : told_[b]) queue_.push_back({a, -1, c});
        for (auto [other, c] : conj_[b])
          if (has(a, other)) queue_.push_back({a, -1, c});
        for (auto [r, c] : exist_rhs_[b]) queue_.push_back({a, r, c});
        for (int c : data_implied_[b]) queue_.push_back({a, -1, c});
        for (auto [r, src] : pred_[a])
          for (int d : exist_lhs(r, b)) queue_.push_back({src, -1, d});
      } else {
        const int a = it.node, r = it.role, b = it.target;
        if (!links_.insert(link_key(a, r, b)).second) continue;
        pred_[b].emplace_back(r, a);
        for (int c : subs_[b])
          for (int d : exist_lhs(r, c)) queue_.push_back({a, -1, d});
      }
    }
  }

  std::uint64_t link_key(int a, int r, int b) const {
    const auto n = static_cast<std::uint64_t>(n_);
    return (static_cast<std::uint64_t>(r) * n + static_cast<std::uint64_t>(a)) * n + static_cast<std::uint64_t>(b);
  }

  int n_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::vector<int>> subs_;
  std::vector<std::vector<std::pair<int, int>>> pred_;  // target -> (role, source)
  std::vector<std::vector<int>> told_;
  std::vector<std::vector<std::pair<int, int>>> conj_;
  std::vector<std::vector<std::pair<int, int>>> exist_rhs_;
  std::unordered_map<std::uint64_t, std::vector<int>> exist_lhs_;
  std::vector<std::vector<int>> data_implied_;
  std::unordered_set<std::uint64_t> links_;
  std::deque<Item> queue_;
};

inline ConceptExpr resolve_query(const KnowledgeBase& kb, const ConceptExpr& expr) {
  try {
    return kb.resolve(expr);
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_expr, e.message());
  }
}

}  // namespace detail

/// TBox part of the knowledge base in normal form. Every declared concept gets
/// a node even when no axiom mentions it.
inline NormalizedTBox normalize(const KnowledgeBase& kb) {
  NormalizedTBox t;
  detail::Normalizer n(t);
  for (const auto& c : kb.entities(EntityKind::named_concept)) n.node(c);
  for (const auto& ax : kb.axioms()) {
    switch (ax.kind) {
      case Axiom::Kind::sub_concept: n.add(ax.lhs, ax.rhs); break;
      case Axiom::Kind::equivalent:
        n.add(ConceptExpr::named(ax.subject), ax.rhs);
        n.add(ax.rhs, ConceptExpr::named(ax.subject));
        break;
      default: break;
    }
  }
  return t;
}

struct InferenceIndex {
  std::map<EntityId, std::set<EntityId>> subsumers;
  std::map<EntityId, std::set<EntityId>> instance_types;
  std::map<EntityId, std::set<EntityId>> direct_children;

  // Normal forms reused by retrieval. Not part of the observable value.
  std::shared_ptr<const NormalizedTBox> tbox;
  std::shared_ptr<const NormalizedTBox> abox;

  friend bool operator==(const InferenceIndex& a, const InferenceIndex& b) {
    return a.subsumers == b.subsumers && a.instance_types == b.instance_types &&
           a.direct_children == b.direct_children;
  }
};

inline InferenceIndex classify(const NormalizedTBox& tbox) {
  detail::Saturation sat(tbox);
  InferenceIndex idx;
  const int n = sat.size();
  for (int a = 0; a < n; ++a) {
    if (tbox.internal[a]) continue;
    auto& out = idx.subsumers[tbox.nodes[a]];
    for (int b : sat.subsumers(a))
      if (!tbox.internal[b]) out.insert(tbox.nodes[b]);
  }
  // Direct taxonomy edges: C -> D when D strictly subsumes C and nothing lies strictly between.
  for (const auto& [c, sups] : idx.subsumers) {
    auto strictly_above = [&](const EntityId& lower, const EntityId& upper) {
      return idx.subsumers.at(lower).count(upper) && !idx.subsumers.at(upper).count(lower);
    };
    for (const auto& d : sups) {
      if (!strictly_above(c, d)) continue;
      bool direct = std::none_of(sups.begin(), sups.end(), [&](const EntityId& e) {
        return e != d && strictly_above(c, e) && strictly_above(e, d);
      });
      if (direct) idx.direct_children[d].insert(c);
    }
  }
  idx.tbox = std::make_shared<const NormalizedTBox>(tbox);
  return idx;
}

inline InferenceIndex classify(const KnowledgeBase& kb) { return classify(normalize(kb)); }

namespace detail {

inline EntityId individual_node(const EntityId& ind) {
  return EntityId{std::string(kIndividualNodeModule), ind.canonical(), EntityKind::named_concept};
}

/// TBox plus one internal node per individual carrying its assertions.
inline NormalizedTBox normalize_with_abox(const KnowledgeBase& kb, const NormalizedTBox& base) {
  NormalizedTBox t = base;
  Normalizer n(t);
  for (const auto& ind : kb.entities(EntityKind::individual)) n.node(individual_node(ind), true);
  for (const auto& ax : kb.axioms()) {
    switch (ax.kind) {
      case Axiom::Kind::concept_assertion:
        n.add(ConceptExpr::named(individual_node(ax.subject)), ax.rhs);
        break;
      case Axiom::Kind::object_assertion:
        n.add(ConceptExpr::named(individual_node(ax.subject)),
              ConceptExpr::some(ax.property, ConceptExpr::named(individual_node(ax.object))));
        break;
      case Axiom::Kind::data_assertion:
        n.add(ConceptExpr::named(individual_node(ax.subject)),
              ConceptExpr::data_some(ax.property, NumericRange::exactly(ax.value)));
        break;
      default: break;
    }
  }
  return t;
}

}  // namespace detail

/// Computes instance types for every individual. Uses the normal forms cached
/// in `index` when present.
inline InferenceIndex realize(const KnowledgeBase& kb, const InferenceIndex& index) {
  InferenceIndex out = index;
  NormalizedTBox base = index.tbox ? *index.tbox : normalize(kb);
  auto abox = std::make_shared<const NormalizedTBox>(detail::normalize_with_abox(kb, base));
  detail::Saturation sat(*abox);
  out.instance_types.clear();
  for (const auto& ind : kb.entities(EntityKind::individual)) {
    int node = *abox->node(detail::individual_node(ind));
    auto& types = out.instance_types[ind];
    for (int b : sat.subsumers(node))
      if (!abox->internal[b]) types.insert(abox->nodes[b]);
  }
  if (!out.tbox) out.tbox = std::make_shared<const NormalizedTBox>(std::move(base));
  out.abox = std::move(abox);
  return out;
}

/// Individuals entailed to be instances of `expr`, ascending by id.
inline std::vector<EntityId> instances_of(const KnowledgeBase& kb, const InferenceIndex& index,
                                          const ConceptExpr& expr) {
  ConceptExpr q = detail::resolve_query(kb, expr);
  std::vector<EntityId> out;
  auto named_only = [](const ConceptExpr& e) {
    if (e.kind == ConceptExpr::Kind::top || e.kind == ConceptExpr::Kind::named) return true;
    if (e.kind != ConceptExpr::Kind::conj) return false;
    return std::all_of(e.operands.begin(), e.operands.end(),
                       [](const ConceptExpr& op) { return op.kind == ConceptExpr::Kind::named; });
  };
  if (named_only(q) && !index.instance_types.empty()) {
    for (const auto& [ind, types] : index.instance_types) {
      bool ok = true;
      if (q.kind == ConceptExpr::Kind::named) ok = types.count(q.entity) > 0;
      if (q.kind == ConceptExpr::Kind::conj)
        for (const auto& op : q.operands) ok = ok && types.count(op.entity) > 0;
      if (ok) out.push_back(ind);
    }
    return out;
  }
  NormalizedTBox t;
  if (index.abox) {
    t = *index.abox;
  } else {
    t = detail::normalize_with_abox(kb, index.tbox ? *index.tbox : normalize(kb));
  }
  detail::Normalizer n(t);
  int goal = n.fresh();
  n.add_into(q, goal);
  detail::Saturation sat(t);
  for (const auto& ind : kb.entities(EntityKind::individual)) {
    auto node = t.node(detail::individual_node(ind));
    if (node && sat.has(*node, goal)) out.push_back(ind);
  }
  return out;
}

/// Named concepts subsumed by `expr`, ascending by id. Top is excluded.
inline std::vector<EntityId> subclasses_of(const KnowledgeBase& kb, const InferenceIndex& index,
                                           const ConceptExpr& expr) {
  ConceptExpr q = detail::resolve_query(kb, expr);
  std::vector<EntityId> out;
  if (q.kind == ConceptExpr::Kind::top) return kb.entities(EntityKind::named_concept);
  if (q.kind == ConceptExpr::Kind::named && !index.subsumers.empty()) {
    for (const auto& [c, sups] : index.subsumers)
      if (c != top_id() && sups.count(q.entity)) out.push_back(c);
    return out;
  }
  NormalizedTBox t = index.tbox ? *index.tbox : normalize(kb);
  detail::Normalizer n(t);
  int goal = n.fresh();
  n.add_into(q, goal);
  detail::Saturation sat(t);
  for (const auto& c : kb.entities(EntityKind::named_concept)) {
    auto node = t.node(c);
    if (node && sat.has(*node, goal)) out.push_back(c);
  }
  return out;
}

/// classify + realize in one step.
inline InferenceIndex reason(const KnowledgeBase& kb) { return realize(kb, classify(kb)); }

}  // namespace oapa
