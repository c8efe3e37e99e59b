#pragma once

// Activity suggestions: hard filters remove unsafe or impractical activities,
// the survivors are scored and every score component carries its evidence.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oapa/activity.hpp"
#include "oapa/kb.hpp"
#include "oapa/profile.hpp"
#include "oapa/reasoner.hpp"
#include "oapa/vocabulary.hpp"

namespace oapa {

struct SuggesterWeights {
  double goal = 3.0;
  double intensity = 2.0;
  double preference = 1.0;
  double barrier = 2.0;

  void validate() const {
    for (double w : {goal, intensity, preference, barrier})
      if (!(w >= 0) || !std::isfinite(w)) throw Error(ErrorCode::config_error, "suggester weights must be >= 0");
  }
};

/// Narrowing constraints supplied with a request. Names refer to concepts.
struct Overrides {
  std::optional<std::string> intensity_band;  // e.g. IntensiteFaible
  std::optional<std::string> location;        // e.g. Exterieur
  std::vector<std::string> goals;             // e.g. Endurance

  bool empty() const { return !intensity_band && !location && goals.empty(); }
};

struct SuggestionRequest {
  std::string profile_id;
  Overrides overrides;
};

enum class CriterionStatus { matched, failed, filtered };

inline std::string_view to_string(CriterionStatus s) {
  switch (s) {
    case CriterionStatus::matched: return "matched";
    case CriterionStatus::failed: return "failed";
    case CriterionStatus::filtered: return "filtered";
  }
  return {};
}

struct Explanation {
  std::string criterion;
  CriterionStatus status = CriterionStatus::matched;
  std::vector<EntityId> evidence;
};

struct ScoreBreakdown {
  int goal_matches = 0;
  int intensity_fit = 0;  // 0 or 1
  int preference_matches = 0;
  int barrier_hits = 0;
};

inline double weighted_score(const ScoreBreakdown& b, const SuggesterWeights& w) {
  return w.goal * b.goal_matches + w.intensity * b.intensity_fit + w.preference * b.preference_matches -
         w.barrier * b.barrier_hits;
}

struct Suggestion {
  EntityId activity;
  double score = 0.0;
  ScoreBreakdown breakdown;
  std::vector<Explanation> explanations;
};

/// Why an activity left the candidate set.
struct FilterOutcome {
  EntityId activity;
  std::string filter;  // contraindication | autonomy | environment | overrides
  std::vector<EntityId> evidence;
};

struct SuggestionList {
  std::vector<Suggestion> suggestions;
  std::vector<FilterOutcome> removed;
  std::vector<Explanation> notes;  // set when nothing survives
};

namespace detail {

/// A profile whose references have been resolved against the knowledge base.
struct ResolvedProfile {
  std::set<EntityId> pathologies, goals, barriers, environment;
  int autonomy = 6;
  ActivityLevel level = ActivityLevel::sedentaire;

  ResolvedProfile(const KnowledgeBase& kb, const PersonProfile& p) : autonomy(p.autonomy), level(p.activity_level) {
    auto all = [&](const std::vector<std::string>& refs, const char* field) {
      std::set<EntityId> out;
      for (const auto& r : refs) {
        try {
          out.insert(kb.resolve(r, EntityKind::individual));
        } catch (const Error& e) {
          throw Error(ErrorCode::validation_failed, std::string("/") + field + ": " + e.message());
        }
      }
      return out;
    };
    pathologies = all(p.pathologies, "pathologies");
    goals = all(p.goals, "goals");
    barriers = all(p.barriers, "barriers");
    environment = all(p.environment, "environment");
  }
};

inline std::vector<EntityId> intersect(const std::vector<EntityId>& a, const std::set<EntityId>& b) {
  std::set<EntityId> out;
  for (const auto& x : a)
    if (b.count(x)) out.insert(x);
  return {out.begin(), out.end()};
}

inline std::vector<EntityId> activities(const KnowledgeBase& kb, const InferenceIndex& index) {
  return instances_of(kb, index, ConceptExpr::named(kb.resolve(vocab::Activite, EntityKind::named_concept)));
}

/// Applies the three filters in order; returns the survivors and records the
/// first filter that removed each other activity.
inline std::vector<EntityId> apply_hard_filters(const FactIndex& facts, const ResolvedProfile& rp,
                                                std::vector<EntityId> candidates, std::vector<FilterOutcome>& removed) {
  std::vector<EntityId> kept;
  for (const auto& a : candidates) {
    auto contra = intersect(facts.related(a, vocab::contreIndiquePour), rp.pathologies);
    if (!contra.empty()) {
      removed.push_back({a, "contraindication", contra});
      continue;
    }
    auto required = facts.value(a, vocab::aNiveauAutonomieRequis);
    if (required && *required > rp.autonomy) {
      removed.push_back({a, "autonomy", {}});
      continue;
    }
    const auto& locations = facts.related(a, vocab::seDerouleA);
    if (!rp.environment.empty() && !locations.empty() && intersect(locations, rp.environment).empty()) {
      removed.push_back({a, "environment", locations});
      continue;
    }
    kept.push_back(a);
  }
  return kept;
}

inline Suggestion score_activity(const FactIndex& facts, const ResolvedProfile& rp, const EntityId& activity,
                                 const SuggesterWeights& weights) {
  Suggestion s;
  s.activity = activity;

  auto goals = intersect(facts.related(activity, vocab::aPourGainPhysique), rp.goals);
  s.breakdown.goal_matches = static_cast<int>(goals.size());
  s.explanations.push_back(
      {"goal", goals.empty() ? CriterionStatus::failed : CriterionStatus::matched, goals});

  auto band = activity_band(facts, activity);
  std::vector<EntityId> band_evidence;
  for (const auto& t : facts.related(activity, vocab::aIntensite))
    if (band_from_name(t.name)) band_evidence.push_back(t);
  s.breakdown.intensity_fit = band && *band <= target_band(rp.level) ? 1 : 0;
  s.explanations.push_back({"intensity", s.breakdown.intensity_fit ? CriterionStatus::matched : CriterionStatus::failed,
                            band_evidence});

  auto prefs = intersect(facts.related(activity, vocab::seDerouleA), rp.environment);
  s.breakdown.preference_matches = static_cast<int>(prefs.size());
  s.explanations.push_back(
      {"preference", prefs.empty() ? CriterionStatus::failed : CriterionStatus::matched, prefs});

  auto hits = intersect(facts.related(activity, vocab::estFreinePar), rp.barriers);
  s.breakdown.barrier_hits = static_cast<int>(hits.size());
  if (!hits.empty()) s.explanations.push_back({"barrier", CriterionStatus::failed, hits});

  auto benefits = intersect(facts.related(activity, vocab::beneficiquePour), rp.pathologies);
  if (!benefits.empty()) s.explanations.push_back({"health benefit", CriterionStatus::matched, benefits});

  s.score = weighted_score(s.breakdown, weights);
  return s;
}

inline EntityId concept_or_throw(const KnowledgeBase& kb, const std::string& ref, const char* what) {
  try {
    return kb.resolve(ref, EntityKind::named_concept);
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_override, std::string(what) + ": " + e.message());
  }
}

inline std::optional<ConceptExpr> override_query(const KnowledgeBase& kb, const Overrides& o) {
  if (o.empty()) return std::nullopt;
  auto prop = [&](std::string_view name) {
    try {
      return kb.resolve(name, EntityKind::object_property);
    } catch (const Error& e) {
      throw Error(ErrorCode::malformed_override, e.message());
    }
  };
  std::vector<ConceptExpr> parts;
  if (o.intensity_band) {
    if (!band_from_name(*o.intensity_band))
      throw Error(ErrorCode::malformed_override, "intensity band '" + *o.intensity_band + "' is not a band");
    parts.push_back(ConceptExpr::some(prop(vocab::aIntensite),
                                      ConceptExpr::named(concept_or_throw(kb, *o.intensity_band, "intensity"))));
  }
  if (o.location)
    parts.push_back(ConceptExpr::some(prop(vocab::seDerouleA),
                                      ConceptExpr::named(concept_or_throw(kb, *o.location, "location"))));
  for (const auto& g : o.goals)
    parts.push_back(
        ConceptExpr::some(prop(vocab::aPourGainPhysique), ConceptExpr::named(concept_or_throw(kb, g, "goal"))));
  return ConceptExpr::conj(std::move(parts));
}

}  // namespace detail

/// Activities that survive the contraindication, autonomy and environment filters.
inline std::vector<EntityId> hard_filter(const KnowledgeBase& kb, const InferenceIndex& index,
                                         const PersonProfile& profile) {
  FactIndex facts(kb);
  detail::ResolvedProfile rp(kb, profile);
  std::vector<FilterOutcome> removed;
  return detail::apply_hard_filters(facts, rp, detail::activities(kb, index), removed);
}

inline Suggestion score(const KnowledgeBase& kb, const PersonProfile& profile, const EntityId& activity,
                        const SuggesterWeights& weights = {}) {
  return detail::score_activity(FactIndex(kb), detail::ResolvedProfile(kb, profile), activity, weights);
}

/// Ranked suggestions for a profile: score descending, activity id ascending.
inline SuggestionList suggest_for(const KnowledgeBase& kb, const InferenceIndex& index, const PersonProfile& profile,
                                  const Overrides& overrides = {}, const SuggesterWeights& weights = {}) {
  FactIndex facts(kb);
  detail::ResolvedProfile rp(kb, profile);
  SuggestionList out;

  std::vector<EntityId> candidates = detail::activities(kb, index);
  std::string last_filter = candidates.empty() ? "catalog" : "";
  if (auto q = detail::override_query(kb, overrides)) {
    auto allowed = instances_of(kb, index, *q);
    std::set<EntityId> keep(allowed.begin(), allowed.end());
    std::vector<EntityId> next;
    for (const auto& a : candidates) {
      if (keep.count(a)) next.push_back(a);
      else out.removed.push_back({a, "overrides", {}});
    }
    if (next.empty() && !candidates.empty()) last_filter = "overrides";
    candidates = std::move(next);
  }
  auto before = out.removed.size();
  auto kept = detail::apply_hard_filters(facts, rp, candidates, out.removed);
  if (kept.empty() && out.removed.size() > before) last_filter = out.removed.back().filter;

  for (const auto& a : kept) out.suggestions.push_back(detail::score_activity(facts, rp, a, weights));
  std::sort(out.suggestions.begin(), out.suggestions.end(), [](const Suggestion& x, const Suggestion& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.activity < y.activity;
  });
  if (out.suggestions.empty()) {
    std::vector<EntityId> evidence;
    if (last_filter != "catalog" && !out.removed.empty()) evidence.push_back(out.removed.back().activity);
    out.notes.push_back({"empty result: " + last_filter + " eliminated the last candidate",
                         CriterionStatus::filtered, evidence});
  }
  return out;
}

/// Looks the profile up in `store`; UnknownProfile when absent.
inline SuggestionList suggest(const KnowledgeBase& kb, const InferenceIndex& index, const ProfileStore& store,
                              const SuggestionRequest& request, const SuggesterWeights& weights = {}) {
  auto profile = store.find(request.profile_id);
  if (!profile) throw Error(ErrorCode::unknown_profile, "no profile '" + request.profile_id + "'");
  return suggest_for(kb, index, *profile, request.overrides, weights);
}

}  // namespace oapa
