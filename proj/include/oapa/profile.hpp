#pragma once

// Person profiles: fixed identity, timestamped measurements, categorical
// situation. Profiles are validated against a knowledge base, turned into
// assertions about one individual, and persisted as JSON lines.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oapa/activity.hpp"
#include "oapa/kb.hpp"
#include "oapa/reasoner.hpp"
#include "oapa/vocabulary.hpp"

namespace oapa {

enum class ActivityLevel { sedentaire, peu_actif, actif, tres_actif };

inline std::string_view to_string(ActivityLevel l) {
  switch (l) {
    case ActivityLevel::sedentaire: return "Sedentaire";
    case ActivityLevel::peu_actif: return "PeuActif";
    case ActivityLevel::actif: return "Actif";
    case ActivityLevel::tres_actif: return "TresActif";
  }
  return {};
}

/// Individual standing for the level in the ontology.
inline std::string_view level_individual(ActivityLevel l) {
  switch (l) {
    case ActivityLevel::sedentaire: return "sedentaire";
    case ActivityLevel::peu_actif: return "peuActif";
    case ActivityLevel::actif: return "actif";
    case ActivityLevel::tres_actif: return "tresActif";
  }
  return {};
}

inline std::optional<ActivityLevel> parse_activity_level(std::string_view s) {
  for (auto l : {ActivityLevel::sedentaire, ActivityLevel::peu_actif, ActivityLevel::actif, ActivityLevel::tres_actif})
    if (s == to_string(l)) return l;
  return std::nullopt;
}

/// Highest band considered a good fit for someone at this level.
inline IntensityBand target_band(ActivityLevel l) {
  switch (l) {
    case ActivityLevel::sedentaire:
    case ActivityLevel::peu_actif: return IntensityBand::faible;
    case ActivityLevel::actif: return IntensityBand::moderee;
    case ActivityLevel::tres_actif: return IntensityBand::elevee;
  }
  return IntensityBand::faible;
}

enum class MeasurementKind { variable, contextual };

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM:SSZ`.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char tail = 0;
  std::string buf(s);
  if (buf.size() != 20 || std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail) != 7 ||
      tail != 'Z')
    return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0 || sec < 0) return std::nullopt;
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} + std::chrono::seconds{sec};
}

inline std::string format_timestamp(Timestamp t) {
  auto days = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd{days};
  std::chrono::hh_mm_ss hms{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

inline std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  std::string buf(s);
  if (buf.size() != 10 || std::sscanf(buf.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

inline std::string format_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

struct FixedIdentity {
  std::string name;
  std::chrono::year_month_day birth_date{};
  double height = 0.0;  // metres

  friend bool operator==(const FixedIdentity&, const FixedIdentity&) = default;
};

struct Measurement {
  std::string property;  // data property reference
  double value = 0.0;
  std::string unit;
  Timestamp timestamp{};
  MeasurementKind kind = MeasurementKind::variable;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Entity references are kept as written and resolved when the profile is
/// validated or turned into assertions.
struct PersonProfile {
  std::string id;
  FixedIdentity identity;
  std::vector<Measurement> measurements;
  std::vector<std::string> pathologies;
  std::vector<std::string> declared_symptoms;
  ActivityLevel activity_level = ActivityLevel::sedentaire;
  std::vector<std::string> social;
  std::vector<std::string> goals;
  std::vector<std::string> barriers;
  int autonomy = 6;  // 1 fully dependent .. 6 fully autonomous
  std::vector<std::string> environment;

  friend bool operator==(const PersonProfile&, const PersonProfile&) = default;
};

/// Most recent measurement of `property`, compared by reference text.
inline std::optional<Measurement> latest(const PersonProfile& p, std::string_view property) {
  std::optional<Measurement> best;
  for (const auto& m : p.measurements)
    if (m.property == property && (!best || m.timestamp > best->timestamp)) best = m;
  return best;
}

struct Diagnostic {
  std::string code;
  std::string path;  // JSON pointer into the profile document
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

namespace detail {

struct ProfileField {
  std::string_view json_key;
  std::vector<std::string> PersonProfile::*member;
  std::string_view property;
};

inline const std::vector<ProfileField>& profile_fields() {
  static const std::vector<ProfileField> fields = {
      {"pathologies", &PersonProfile::pathologies, vocab::aPathologie},
      {"declared_symptoms", &PersonProfile::declared_symptoms, vocab::aSymptome},
      {"social", &PersonProfile::social, vocab::aCaracteristiqueSociale},
      {"goals", &PersonProfile::goals, vocab::aPourObjectif},
      {"barriers", &PersonProfile::barriers, vocab::aFrein},
      {"environment", &PersonProfile::environment, vocab::aAccesA},
  };
  return fields;
}

}  // namespace detail

/// Every problem found, each with the JSON pointer of the offending field.
inline std::vector<Diagnostic> validate_profile(const PersonProfile& p, const KnowledgeBase& kb) {
  std::vector<Diagnostic> out;
  auto report = [&](ErrorCode code, std::string path, std::string message) {
    out.push_back({std::string(to_string(code)), std::move(path), std::move(message)});
  };
  if (!is_identifier(p.id)) report(ErrorCode::invalid_identifier, "/id", "profile id '" + p.id + "' is not an identifier");
  if (p.identity.name.empty()) report(ErrorCode::validation_failed, "/identity/name", "name is empty");
  if (!p.identity.birth_date.ok()) report(ErrorCode::validation_failed, "/identity/birth_date", "invalid date");
  if (!(p.identity.height > 0))
    report(ErrorCode::validation_failed, "/identity/height", "height must be positive");
  if (p.autonomy < 1 || p.autonomy > 6)
    report(ErrorCode::validation_failed, "/autonomy", "autonomy must be within 1..6");

  std::map<std::string, std::set<Timestamp>> seen_times;
  for (std::size_t i = 0; i < p.measurements.size(); ++i) {
    const auto& m = p.measurements[i];
    const std::string at = "/measurements/" + std::to_string(i);
    if (!std::isfinite(m.value)) report(ErrorCode::bad_number, at + "/value", "value is not finite");
    if (!seen_times[m.property].insert(m.timestamp).second)
      report(ErrorCode::validation_failed, at + "/timestamp",
             "two measurements of " + m.property + " share timestamp " + format_timestamp(m.timestamp));
    EntityId prop;
    try {
      prop = kb.resolve(m.property, EntityKind::data_property);
    } catch (const Error& e) {
      report(e.code(), at + "/property", e.message());
      continue;
    }
    auto declared = kb.unit_of(prop);
    if (declared.value_or("") != m.unit)
      report(ErrorCode::unit_mismatch, at + "/unit",
             "unit '" + m.unit + "' does not match " + prop.canonical() + " unit '" + declared.value_or("") + "'");
  }

  for (const auto& field : detail::profile_fields()) {
    const auto& values = p.*field.member;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string at = "/" + std::string(field.json_key) + "/" + std::to_string(i);
      if (!seen.insert(values[i]).second) report(ErrorCode::validation_failed, at, "'" + values[i] + "' listed twice");
      try {
        kb.resolve(values[i], EntityKind::individual);
      } catch (const Error& e) {
        report(e.code(), at, e.message());
      }
    }
  }
  auto require = [&](std::string_view name, EntityKind kind) {
    try {
      kb.resolve(name, kind);
    } catch (const Error& e) {
      report(e.code(), "", "ontology lacks " + std::string(name) + ": " + e.message());
    }
  };
  require(vocab::Personne, EntityKind::named_concept);
  require(vocab::aNiveauActivite, EntityKind::object_property);
  require(vocab::aNiveauAutonomie, EntityKind::data_property);
  for (auto kind : {EntityKind::named_concept, EntityKind::object_property, EntityKind::data_property,
                    EntityKind::individual}) {
    try {
      kb.resolve(p.id, kind);
      report(ErrorCode::kind_conflict, "/id", "profile id '" + p.id + "' collides with an ontology entity");
      break;
    } catch (const Error&) {
    }
  }
  try {
    kb.resolve(level_individual(p.activity_level), EntityKind::individual);
  } catch (const Error& e) {
    report(e.code(), "/activity_level", e.message());
  }
  return out;
}

inline EntityId person_id(const PersonProfile& p) {
  return EntityId{std::string(vocab::ProfileModule), p.id, EntityKind::individual};
}

/// Assertions about the person individual: the latest value of each measured
/// property plus the categorical situation. Sorted.
inline std::vector<Axiom> profile_to_abox(const PersonProfile& p, const KnowledgeBase& kb) {
  if (auto diags = validate_profile(p, kb); !diags.empty())
    throw Error(ErrorCode::validation_failed, diags.front().path + ": " + diags.front().message);
  const EntityId person = person_id(p);
  std::vector<Axiom> out;
  out.push_back(Axiom::concept_assertion(ConceptExpr::named(kb.resolve(vocab::Personne, EntityKind::named_concept)),
                                         person));
  std::set<std::string> properties;
  for (const auto& m : p.measurements) properties.insert(m.property);
  for (const auto& prop : properties) {
    auto m = latest(p, prop);
    out.push_back(Axiom::data_assertion(kb.resolve(prop, EntityKind::data_property), person, m->value));
  }
  for (const auto& field : detail::profile_fields()) {
    EntityId rel = kb.resolve(field.property, EntityKind::object_property);
    for (const auto& v : p.*field.member)
      out.push_back(Axiom::object_assertion(rel, person, kb.resolve(v, EntityKind::individual)));
  }
  out.push_back(Axiom::object_assertion(kb.resolve(vocab::aNiveauActivite, EntityKind::object_property), person,
                                        kb.resolve(level_individual(p.activity_level), EntityKind::individual)));
  out.push_back(Axiom::data_assertion(kb.resolve(vocab::aNiveauAutonomie, EntityKind::data_property), person,
                                      static_cast<double>(p.autonomy)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// The knowledge base plus a module holding the person and its assertions.
inline KnowledgeBase extend_with_profile(const KnowledgeBase& kb, const PersonProfile& p) {
  auto axioms = profile_to_abox(p, kb);
  std::vector<OntologyModule> mods = kb.modules();
  OntologyModule pm;
  pm.name = std::string(vocab::ProfileModule);
  for (const auto& m : kb.modules()) pm.imports.push_back(m.name);
  pm.declarations.push_back(EntityId{{}, p.id, EntityKind::individual});
  pm.axioms = std::move(axioms);
  mods.push_back(std::move(pm));
  return merge_modules(std::move(mods));
}

/// Named concepts the person is entailed to belong to, Top excluded.
inline std::vector<EntityId> profile_inferences(const KnowledgeBase& kb, const PersonProfile& p) {
  KnowledgeBase ext = extend_with_profile(kb, p);
  InferenceIndex idx = reason(ext);
  std::vector<EntityId> out;
  for (const auto& t : idx.instance_types.at(person_id(p)))
    if (t != top_id()) out.push_back(t);
  return out;
}

// JSON mapping ---------------------------------------------------------------

inline void to_json(nlohmann::json& j, const Measurement& m) {
  j = {{"property", m.property},
       {"value", m.value},
       {"unit", m.unit},
       {"timestamp", format_timestamp(m.timestamp)},
       {"kind", m.kind == MeasurementKind::variable ? "variable" : "contextual"}};
}

inline void to_json(nlohmann::json& j, const PersonProfile& p) {
  j = nlohmann::json::object();
  j["id"] = p.id;
  j["identity"] = {{"name", p.identity.name},
                   {"birth_date", format_date(p.identity.birth_date)},
                   {"height", p.identity.height}};
  j["measurements"] = p.measurements;
  for (const auto& field : detail::profile_fields()) j[std::string(field.json_key)] = p.*field.member;
  j["activity_level"] = std::string(to_string(p.activity_level));
  j["autonomy"] = p.autonomy;
}

namespace detail {

[[noreturn]] inline void bad_profile(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::validation_failed, path + ": " + what);
}

inline const nlohmann::json& member(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.is_object()) bad_profile(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad_profile(path + "/" + key, "missing");
  return *it;
}

inline std::string string_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) bad_profile(path, "expected a string");
  return j.get<std::string>();
}

inline double number_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) bad_profile(path, "expected a number");
  return j.get<double>();
}

}  // namespace detail

/// Strict decoding: wrong shapes raise ValidationFailed with a JSON pointer.
inline PersonProfile profile_from_json(const nlohmann::json& j) {
  using detail::bad_profile;
  using detail::member;
  PersonProfile p;
  p.id = detail::string_at(member(j, "id", ""), "/id");
  const auto& ident = member(j, "identity", "");
  p.identity.name = detail::string_at(member(ident, "name", "/identity"), "/identity/name");
  auto birth = parse_date(detail::string_at(member(ident, "birth_date", "/identity"), "/identity/birth_date"));
  if (!birth) bad_profile("/identity/birth_date", "expected YYYY-MM-DD");
  p.identity.birth_date = *birth;
  p.identity.height = detail::number_at(member(ident, "height", "/identity"), "/identity/height");

  if (auto it = j.find("measurements"); it != j.end()) {
    if (!it->is_array()) bad_profile("/measurements", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& mj = (*it)[i];
      const std::string at = "/measurements/" + std::to_string(i);
      Measurement m;
      m.property = detail::string_at(member(mj, "property", at), at + "/property");
      m.value = detail::number_at(member(mj, "value", at), at + "/value");
      if (auto u = mj.find("unit"); u != mj.end()) m.unit = detail::string_at(*u, at + "/unit");
      auto ts = parse_timestamp(detail::string_at(member(mj, "timestamp", at), at + "/timestamp"));
      if (!ts) bad_profile(at + "/timestamp", "expected YYYY-MM-DDTHH:MM:SSZ");
      m.timestamp = *ts;
      if (auto k = mj.find("kind"); k != mj.end()) {
        std::string kind = detail::string_at(*k, at + "/kind");
        if (kind == "variable") m.kind = MeasurementKind::variable;
        else if (kind == "contextual") m.kind = MeasurementKind::contextual;
        else bad_profile(at + "/kind", "expected 'variable' or 'contextual'");
      }
      p.measurements.push_back(std::move(m));
    }
  }
  for (const auto& field : detail::profile_fields()) {
    auto it = j.find(std::string(field.json_key));
    if (it == j.end()) continue;
    const std::string at = "/" + std::string(field.json_key);
    if (!it->is_array()) bad_profile(at, "expected an array of names");
    for (std::size_t i = 0; i < it->size(); ++i)
      (p.*field.member).push_back(detail::string_at((*it)[i], at + "/" + std::to_string(i)));
  }
  if (auto it = j.find("activity_level"); it != j.end()) {
    auto level = parse_activity_level(detail::string_at(*it, "/activity_level"));
    if (!level) bad_profile("/activity_level", "expected Sedentaire, PeuActif, Actif or TresActif");
    p.activity_level = *level;
  }
  if (auto it = j.find("autonomy"); it != j.end()) {
    if (!it->is_number_integer()) bad_profile("/autonomy", "expected an integer");
    p.autonomy = it->get<int>();
  }
  return p;
}

inline void from_json(const nlohmann::json& j, PersonProfile& p) { p = profile_from_json(j); }

/// Profiles held in memory and, when a directory is configured, appended as
/// one JSON document per line to `<dir>/<id>.jsonl`. The last line wins on load.
class ProfileStore {
 public:
  ProfileStore() = default;

  explicit ProfileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(*dir_);
    for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
      if (entry.path().extension() != ".jsonl") continue;
      std::ifstream in(entry.path());
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          PersonProfile p = profile_from_json(nlohmann::json::parse(line));
          profiles_[p.id] = std::move(p);
        } catch (const std::exception& e) {
          throw Error(ErrorCode::io_error, entry.path().string() + ": " + e.what());
        }
      }
    }
  }

  /// Stores a new version. The identity of an existing profile cannot change.
  void put(const PersonProfile& p) {
    std::unique_lock lock(mutex_);
    if (auto it = profiles_.find(p.id); it != profiles_.end() && !(it->second.identity == p.identity))
      throw Error(ErrorCode::validation_failed, "/identity: identity of profile '" + p.id + "' is immutable");
    if (dir_) {
      std::ofstream out(*dir_ / (p.id + ".jsonl"), std::ios::app);
      out << nlohmann::json(p).dump() << '\n';
      if (!out) throw Error(ErrorCode::io_error, "cannot append to profile store for '" + p.id + "'");
    }
    profiles_[p.id] = p;
  }

  std::optional<PersonProfile> find(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = profiles_.find(id);
    if (it == profiles_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : profiles_) out.push_back(id);
    return out;
  }

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, PersonProfile> profiles_;
};

}  // namespace oapa
