#pragma once

// JSON shapes shared by the HTTP service and the CLI's `--format json`.

#include <nlohmann/json.hpp>

#include "oapa/error.hpp"
#include "oapa/kb.hpp"
#include "oapa/suggester.hpp"

namespace oapa::wire {

using nlohmann::json;

inline json entity(const KnowledgeBase& kb, const EntityId& id) {
  return {{"id", id.canonical()}, {"name", id.name}, {"label", display_label(kb, id)}};
}

inline json ids(const std::vector<EntityId>& v) {
  json out = json::array();
  for (const auto& id : v) out.push_back(id.canonical());
  return out;
}

inline json entities(const KnowledgeBase& kb, const std::vector<EntityId>& v) {
  json out = json::array();
  for (const auto& id : v) out.push_back(entity(kb, id));
  return out;
}

inline json stats(const KbStats& s) {
  return {{"concepts", s.concepts},       {"object_properties", s.object_properties},
          {"data_properties", s.data_properties}, {"individuals", s.individuals},
          {"axioms", s.axioms},           {"modules", s.modules}};
}

inline json explanation(const KnowledgeBase& kb, const Explanation& e) {
  return {{"criterion", e.criterion}, {"status", std::string(to_string(e.status))}, {"evidence", entities(kb, e.evidence)}};
}

inline json suggestions(const KnowledgeBase& kb, const SuggestionList& list) {
  json items = json::array();
  for (const auto& s : list.suggestions) {
    json ex = json::array();
    for (const auto& e : s.explanations) ex.push_back(explanation(kb, e));
    items.push_back({{"activity", entity(kb, s.activity)},
                     {"score", s.score},
                     {"breakdown",
                      {{"goal_matches", s.breakdown.goal_matches},
                       {"intensity_fit", s.breakdown.intensity_fit},
                       {"preference_matches", s.breakdown.preference_matches},
                       {"barrier_hits", s.breakdown.barrier_hits}}},
                     {"explanations", ex}});
  }
  json removed = json::array();
  for (const auto& r : list.removed)
    removed.push_back({{"activity", r.activity.canonical()}, {"filter", r.filter}, {"evidence", ids(r.evidence)}});
  json notes = json::array();
  for (const auto& n : list.notes) notes.push_back(explanation(kb, n));
  return {{"suggestions", items}, {"removed", removed}, {"notes", notes}};
}

inline Overrides overrides_from_json(const json& j) {
  Overrides o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw Error(ErrorCode::malformed_override, "overrides must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "intensity" && value.is_string()) {
      o.intensity_band = value.get<std::string>();
    } else if (key == "location" && value.is_string()) {
      o.location = value.get<std::string>();
    } else if (key == "goals" && value.is_array()) {
      for (const auto& g : value) {
        if (!g.is_string()) throw Error(ErrorCode::malformed_override, "goals must be names");
        o.goals.push_back(g.get<std::string>());
      }
    } else {
      throw Error(ErrorCode::malformed_override, "unsupported override '" + key + "'");
    }
  }
  return o;
}

inline json error(const Error& e) {
  json out = {{"code", std::string(to_string(e.code()))}, {"message", e.message()}};
  if (e.span())
    out["span"] = {{"file", e.span()->file}, {"line", e.span()->line}, {"column", e.span()->column}};
  return out;
}

}  // namespace oapa::wire
