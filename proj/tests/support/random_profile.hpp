#pragma once

// Random valid profiles over the shipped vocabulary, and a fact table read
// directly from asserted axioms for use as a suggestion oracle.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oapa/kb.hpp"
#include "oapa/profile.hpp"
#include "support/seed.hpp"

namespace oracle {

inline const std::vector<std::string> kPathologies = {"hypertension", "diabete",    "polyarthriteRhumatoide",
                                                      "arthrose",     "osteoporose", "hernieDiscale"};
inline const std::vector<std::string> kGoals = {"endurance", "mobiliteArticulaire", "forceMusculaire",
                                                "equilibre", "souplesse",           "autonomieFonctionnelle"};
inline const std::vector<std::string> kBarriers = {"peurDeChuter",       "douleurArticulaire", "peurDeLEau",
                                                   "meteoDefavorable",   "manqueDeMotivation", "coutFinancier",
                                                   "isolementSocial"};
inline const std::vector<std::string> kPlaces = {"exterieur", "domicile", "salleDeSport", "piscine"};

inline std::vector<std::string> random_subset(std::mt19937& rng, const std::vector<std::string>& pool, int max) {
  std::vector<std::string> shuffled = pool;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::uniform_int_distribution<int> n(0, std::min<int>(max, static_cast<int>(pool.size())));
  shuffled.resize(n(rng));
  return shuffled;
}

inline oapa::PersonProfile random_profile(std::mt19937& rng, const std::string& id) {
  oapa::PersonProfile p = seed::profile(id);
  std::uniform_int_distribution<int> level(0, 3), autonomy(1, 6);
  std::uniform_real_distribution<double> glycemia(0.4, 1.6);
  p.pathologies = random_subset(rng, kPathologies, 3);
  p.goals = random_subset(rng, kGoals, 3);
  p.barriers = random_subset(rng, kBarriers, 2);
  p.environment = random_subset(rng, kPlaces, 3);
  p.activity_level = static_cast<oapa::ActivityLevel>(level(rng));
  p.autonomy = autonomy(rng);
  p.measurements = {seed::glycemia(glycemia(rng))};
  return p;
}

/// Object and data assertions by local name: subject -> property -> objects / value.
struct Facts {
  std::map<std::string, std::map<std::string, std::set<std::string>>> objects;
  std::map<std::string, std::map<std::string, double>> values;

  explicit Facts(const oapa::KnowledgeBase& kb) {
    for (const auto& ax : kb.axioms()) {
      if (ax.kind == oapa::Axiom::Kind::object_assertion)
        objects[ax.subject.name][ax.property.name].insert(ax.object.name);
      if (ax.kind == oapa::Axiom::Kind::data_assertion) values[ax.subject.name][ax.property.name] = ax.value;
    }
  }

  const std::set<std::string>& of(const std::string& s, const std::string& p) const {
    static const std::set<std::string> none;
    auto a = objects.find(s);
    if (a == objects.end()) return none;
    auto b = a->second.find(p);
    return b == a->second.end() ? none : b->second;
  }

  /// Catalog activities: every individual with a MET value.
  std::set<std::string> activities() const {
    std::set<std::string> out;
    for (const auto& [s, v] : values)
      if (v.count("aValeurMET")) out.insert(s);
    return out;
  }
};

inline std::size_t overlap(const std::set<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : std::set<std::string>(b.begin(), b.end())) n += a.count(x);
  return n;
}

}  // namespace oracle
