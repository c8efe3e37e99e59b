#pragma once

// Activity catalog semantics: MET intensity bands, Borg RPE bands, the linear
// RPE -> heart-rate correspondence, and the facts generated for an activity.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oapa/kb.hpp"
#include "oapa/vocabulary.hpp"

namespace oapa {

enum class IntensityBand { faible = 0, moderee = 1, elevee = 2 };

inline constexpr std::array<IntensityBand, 3> kAllBands = {IntensityBand::faible, IntensityBand::moderee,
                                                           IntensityBand::elevee};

inline std::string_view band_class(IntensityBand b) {
  switch (b) {
    case IntensityBand::faible: return "IntensiteFaible";
    case IntensityBand::moderee: return "IntensiteModeree";
    case IntensityBand::elevee: return "IntensiteElevee";
  }
  return {};
}

inline std::string_view band_individual(IntensityBand b) {
  switch (b) {
    case IntensityBand::faible: return "intensiteFaible";
    case IntensityBand::moderee: return "intensiteModeree";
    case IntensityBand::elevee: return "intensiteElevee";
  }
  return {};
}

/// Defined class collecting the activities of a band.
inline std::string_view band_activity_class(IntensityBand b) {
  switch (b) {
    case IntensityBand::faible: return "ActiviteFaibleIntensite";
    case IntensityBand::moderee: return "ActiviteIntensiteModeree";
    case IntensityBand::elevee: return "ActiviteIntensiteElevee";
  }
  return {};
}

inline std::optional<IntensityBand> band_from_name(std::string_view name) {
  for (auto b : kAllBands)
    if (name == band_class(b) || name == band_individual(b)) return b;
  return std::nullopt;
}

enum class Rhythm { faible, modere, eleve };
enum class Effort { leger, modere, intense };

inline std::string_view rhythm_individual(Rhythm r) {
  switch (r) {
    case Rhythm::faible: return "rythmeFaible";
    case Rhythm::modere: return "rythmeModere";
    case Rhythm::eleve: return "rythmeEleve";
  }
  return {};
}

inline std::string_view effort_individual(Effort e) {
  switch (e) {
    case Effort::leger: return "effortLeger";
    case Effort::modere: return "effortModere";
    case Effort::intense: return "effortIntense";
  }
  return {};
}

/// MET upper bounds are exclusive, RPE upper bounds inclusive.
struct ExertionCutpoints {
  double met_light_upper = 3.0;
  double met_moderate_upper = 6.0;
  int rpe_light_upper = 11;
  int rpe_moderate_upper = 14;

  void validate() const {
    if (!(met_light_upper > 0 && met_light_upper < met_moderate_upper))
      throw Error(ErrorCode::config_error, "MET cutpoints must satisfy 0 < light < moderate");
    if (rpe_light_upper < 6 || rpe_moderate_upper > 20 || rpe_light_upper >= rpe_moderate_upper)
      throw Error(ErrorCode::config_error, "RPE cutpoints must satisfy 6 <= light < moderate <= 20");
  }
};

inline IntensityBand met_to_band(double met, const ExertionCutpoints& cfg = {}) {
  if (!(met > 0)) throw Error(ErrorCode::non_positive_met, "MET must be positive, got " + std::to_string(met));
  if (met < cfg.met_light_upper) return IntensityBand::faible;
  if (met < cfg.met_moderate_upper) return IntensityBand::moderee;
  return IntensityBand::elevee;
}

inline void check_rpe(int rpe) {
  if (rpe < 6 || rpe > 20)
    throw Error(ErrorCode::rpe_out_of_scale, "Borg RPE must be within 6..20, got " + std::to_string(rpe));
}

inline IntensityBand rpe_to_band(int rpe, const ExertionCutpoints& cfg = {}) {
  check_rpe(rpe);
  if (rpe <= cfg.rpe_light_upper) return IntensityBand::faible;
  if (rpe <= cfg.rpe_moderate_upper) return IntensityBand::moderee;
  return IntensityBand::elevee;
}

/// Beats per minute, 10 x RPE, no age adjustment.
inline int rpe_to_estimated_hr(int rpe) {
  check_rpe(rpe);
  return 10 * rpe;
}

struct ActivityEntry {
  EntityId id;
  double met = 0.0;
  Rhythm rhythm = Rhythm::faible;
  Effort effort = Effort::leger;
  std::vector<EntityId> gains;
  std::vector<EntityId> locations;
  std::vector<EntityId> equipment;
  int required_autonomy = 1;  // 1 fully dependent .. 6 fully autonomous
};

struct ExertionReport {
  bool consistent = true;
  IntensityBand met_band = IntensityBand::faible;
  std::optional<IntensityBand> rpe_band;
};

/// Lint signal: does the perceived exertion agree with the catalogued MET?
/// An out-of-scale RPE is reported as inconsistent rather than thrown.
inline ExertionReport exertion_consistency(const ActivityEntry& entry, std::optional<int> observed_rpe,
                                           const ExertionCutpoints& cfg = {}) {
  ExertionReport r;
  r.met_band = met_to_band(entry.met, cfg);
  if (!observed_rpe) return r;
  if (*observed_rpe < 6 || *observed_rpe > 20) {
    r.consistent = false;
    return r;
  }
  r.rpe_band = rpe_to_band(*observed_rpe, cfg);
  r.consistent = *r.rpe_band == r.met_band;
  return r;
}

/// Facts describing one activity individual. Vocabulary names and every id the
/// entry references are resolved against `vocabulary`.
inline std::vector<Axiom> emit_activity_axioms(const ActivityEntry& entry, const ExertionCutpoints& cfg,
                                               const KnowledgeBase& vocabulary) {
  auto lookup = [&](std::string_view name, EntityKind kind) {
    try {
      return vocabulary.resolve(name, kind);
    } catch (const Error& e) {
      throw Error(ErrorCode::undeclared_reference, e.message());
    }
  };
  auto require = [&](const EntityId& id) {
    if (!vocabulary.contains(id))
      throw Error(ErrorCode::undeclared_reference, id.canonical() + " is not declared");
  };
  for (const auto* group : {&entry.gains, &entry.locations, &entry.equipment})
    for (const auto& id : *group) require(id);

  const IntensityBand band = met_to_band(entry.met, cfg);
  std::vector<Axiom> out;
  out.push_back(Axiom::concept_assertion(
      ConceptExpr::named(lookup(vocab::ActivitePhysique, EntityKind::named_concept)), entry.id));
  out.push_back(Axiom::data_assertion(lookup(vocab::aValeurMET, EntityKind::data_property), entry.id, entry.met));
  out.push_back(Axiom::object_assertion(lookup(vocab::aIntensite, EntityKind::object_property), entry.id,
                                        lookup(band_individual(band), EntityKind::individual)));
  auto relate = [&](std::string_view prop, const std::vector<EntityId>& targets) {
    EntityId p = lookup(prop, EntityKind::object_property);
    for (const auto& t : targets) out.push_back(Axiom::object_assertion(p, entry.id, t));
  };
  relate(vocab::aPourGainPhysique, entry.gains);
  relate(vocab::seDerouleA, entry.locations);
  relate(vocab::necessiteMateriel, entry.equipment);
  out.push_back(Axiom::object_assertion(lookup(vocab::aRythme, EntityKind::object_property), entry.id,
                                        lookup(rhythm_individual(entry.rhythm), EntityKind::individual)));
  out.push_back(Axiom::object_assertion(lookup(vocab::aEffort, EntityKind::object_property), entry.id,
                                        lookup(effort_individual(entry.effort), EntityKind::individual)));
  out.push_back(Axiom::data_assertion(lookup(vocab::aNiveauAutonomieRequis, EntityKind::data_property), entry.id,
                                      static_cast<double>(entry.required_autonomy)));
  return out;
}

/// Adds `aIntensite` facts derived from every `aValeurMET` value asserted in
/// the module. References stay unresolved; merge_modules() binds them.
inline void add_intensity_facts(OntologyModule& m, const ExertionCutpoints& cfg) {
  std::vector<Axiom> extra;
  for (const auto& ax : m.axioms) {
    if (ax.kind != Axiom::Kind::data_assertion || ax.property.name != vocab::aValeurMET) continue;
    extra.push_back(Axiom::object_assertion(object_property_ref(vocab::aIntensite), ax.subject,
                                            individual_ref(band_individual(met_to_band(ax.value, cfg)))));
  }
  m.axioms.insert(m.axioms.end(), extra.begin(), extra.end());
}

/// Asserted facts of the knowledge base, indexed by subject.
struct FactIndex {
  std::map<EntityId, std::map<std::string, std::vector<EntityId>>> objects;  // subject -> property name -> objects
  std::map<EntityId, std::map<std::string, double>> values;                  // subject -> property name -> value

  explicit FactIndex(const KnowledgeBase& kb) {
    for (const auto& ax : kb.axioms()) {
      if (ax.kind == Axiom::Kind::object_assertion) objects[ax.subject][ax.property.name].push_back(ax.object);
      if (ax.kind == Axiom::Kind::data_assertion) values[ax.subject][ax.property.name] = ax.value;
    }
  }

  const std::vector<EntityId>& related(const EntityId& subject, std::string_view property) const {
    static const std::vector<EntityId> none;
    auto s = objects.find(subject);
    if (s == objects.end()) return none;
    auto p = s->second.find(std::string(property));
    return p == s->second.end() ? none : p->second;
  }

  std::optional<double> value(const EntityId& subject, std::string_view property) const {
    auto s = values.find(subject);
    if (s == values.end()) return std::nullopt;
    auto p = s->second.find(std::string(property));
    if (p == s->second.end()) return std::nullopt;
    return p->second;
  }
};

/// Band of an activity from its `aIntensite` fact.
inline std::optional<IntensityBand> activity_band(const FactIndex& facts, const EntityId& activity) {
  for (const auto& target : facts.related(activity, vocab::aIntensite))
    if (auto b = band_from_name(target.name)) return b;
  return std::nullopt;
}

/// Rebuilds catalog entries for every individual carrying a MET value.
inline std::vector<ActivityEntry> activity_entries(const KnowledgeBase& kb) {
  FactIndex facts(kb);
  std::vector<ActivityEntry> out;
  for (const auto& [subject, values] : facts.values) {
    auto met = values.find(std::string(vocab::aValeurMET));
    if (met == values.end()) continue;
    ActivityEntry e;
    e.id = subject;
    e.met = met->second;
    e.gains = facts.related(subject, vocab::aPourGainPhysique);
    e.locations = facts.related(subject, vocab::seDerouleA);
    e.equipment = facts.related(subject, vocab::necessiteMateriel);
    for (const auto& r : facts.related(subject, vocab::aRythme))
      for (auto v : {Rhythm::faible, Rhythm::modere, Rhythm::eleve})
        if (r.name == rhythm_individual(v)) e.rhythm = v;
    for (const auto& r : facts.related(subject, vocab::aEffort))
      for (auto v : {Effort::leger, Effort::modere, Effort::intense})
        if (r.name == effort_individual(v)) e.effort = v;
    if (auto lvl = facts.value(subject, vocab::aNiveauAutonomieRequis)) e.required_autonomy = static_cast<int>(*lvl);
    out.push_back(std::move(e));
  }
  return out;
}

struct ExertionLint {
  EntityId activity;
  int observed_rpe = 0;
  ExertionReport report;
};

/// Activities whose catalogued perceived exertion disagrees with their MET band.
inline std::vector<ExertionLint> exertion_lint(const KnowledgeBase& kb, const ExertionCutpoints& cfg = {}) {
  FactIndex facts(kb);
  std::vector<ExertionLint> out;
  for (const auto& entry : activity_entries(kb)) {
    auto rpe = facts.value(entry.id, vocab::aRPEObserve);
    if (!rpe) continue;
    auto report = exertion_consistency(entry, static_cast<int>(*rpe), cfg);
    if (!report.consistent) out.push_back({entry.id, static_cast<int>(*rpe), report});
  }
  return out;
}

}  // namespace oapa
