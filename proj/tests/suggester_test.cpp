#include <gtest/gtest.h>

#include "oapa/suggester.hpp"
#include "support/random_profile.hpp"
#include "support/seed.hpp"

using namespace oapa;

namespace {

const oracle::Facts& facts() {
  static const oracle::Facts f(seed::kb());
  return f;
}

std::set<std::string> names(const std::vector<EntityId>& ids) {
  std::set<std::string> out;
  for (const auto& id : ids) out.insert(id.name);
  return out;
}

std::set<std::string> suggested(const SuggestionList& l) {
  std::set<std::string> out;
  for (const auto& s : l.suggestions) out.insert(s.activity.name);
  return out;
}

// Band from the MET value with the default cutpoints, as 0/1/2.
int oracle_band(const std::string& activity) {
  double met = facts().values.at(activity).at("aValeurMET");
  return met < 3.0 ? 0 : met < 6.0 ? 1 : 2;
}

int oracle_target(ActivityLevel l) {
  switch (l) {
    case ActivityLevel::sedentaire:
    case ActivityLevel::peu_actif: return 0;
    case ActivityLevel::actif: return 1;
    case ActivityLevel::tres_actif: return 2;
  }
  return 0;
}

std::set<std::string> oracle_filter(const PersonProfile& p) {
  std::set<std::string> out;
  for (const auto& a : facts().activities()) {
    if (oracle::overlap(facts().of(a, "contreIndiquePour"), p.pathologies)) continue;
    if (facts().values.at(a).at("aNiveauAutonomieRequis") > p.autonomy) continue;
    const auto& places = facts().of(a, "seDerouleA");
    if (!p.environment.empty() && !places.empty() && !oracle::overlap(places, p.environment)) continue;
    out.insert(a);
  }
  return out;
}

double oracle_score(const PersonProfile& p, const std::string& a, const SuggesterWeights& w) {
  double s = w.goal * oracle::overlap(facts().of(a, "aPourGainPhysique"), p.goals);
  s += w.intensity * (oracle_band(a) <= oracle_target(p.activity_level) ? 1 : 0);
  s += w.preference * oracle::overlap(facts().of(a, "seDerouleA"), p.environment);
  s -= w.barrier * oracle::overlap(facts().of(a, "estFreinePar"), p.barriers);
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io_error;
}

}  // namespace

TEST(HardFilter, MatchesSetDifferenceOracle) {
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    auto p = oracle::random_profile(rng, "r" + std::to_string(i));
    EXPECT_EQ(names(hard_filter(seed::kb(), seed::index(), p)), oracle_filter(p)) << nlohmann::json(p).dump();
  }
}

TEST(HardFilter, HerniaExcludesSkiing) {
  auto p = seed::profile();
  p.pathologies = {"hernieDiscale"};
  auto kept = names(hard_filter(seed::kb(), seed::index(), p));
  EXPECT_FALSE(kept.count("skiDeFond"));
  EXPECT_FALSE(kept.count("jogging"));
  auto list = suggest_for(seed::kb(), seed::index(), p);
  auto it = std::find_if(list.removed.begin(), list.removed.end(),
                         [](const FilterOutcome& f) { return f.activity.name == "skiDeFond"; });
  ASSERT_NE(it, list.removed.end());
  EXPECT_EQ(it->filter, "contraindication");
  EXPECT_EQ(names(it->evidence), std::set<std::string>{"hernieDiscale"});
}

TEST(HardFilter, ActivitiesWithoutLocationPassEnvironment) {
  KnowledgeBase kb = merge_modules({parse_module(R"(module T
class Activite
objprop seDerouleA
dataprop aNiveauAutonomieRequis
dataprop aValeurMET
ind lieu
ind ailleurs
ind partout : Activite
ind ici : Activite
fact ici seDerouleA lieu
)")});
  auto idx = reason(kb);
  auto p = seed::profile();
  p.environment.clear();
  EXPECT_EQ(names(hard_filter(kb, idx, p)), (std::set<std::string>{"ici", "partout"}));
  p.environment = {"lieu"};
  EXPECT_EQ(names(hard_filter(kb, idx, p)), (std::set<std::string>{"ici", "partout"}));
  p.environment = {"ailleurs"};
  EXPECT_EQ(names(hard_filter(kb, idx, p)), std::set<std::string>{"partout"});
}

TEST(Scoring, MatchesFormulaAndOrdering) {
  std::mt19937 rng(17);
  SuggesterWeights w;
  for (int i = 0; i < 60; ++i) {
    auto p = oracle::random_profile(rng, "s" + std::to_string(i));
    auto list = suggest_for(seed::kb(), seed::index(), p, {}, w);
    EXPECT_EQ(suggested(list), oracle_filter(p));
    for (std::size_t k = 0; k < list.suggestions.size(); ++k) {
      const auto& s = list.suggestions[k];
      EXPECT_DOUBLE_EQ(s.score, oracle_score(p, s.activity.name, w)) << s.activity.name;
      if (k > 0) {
        const auto& prev = list.suggestions[k - 1];
        EXPECT_TRUE(prev.score > s.score || (prev.score == s.score && prev.activity < s.activity));
      }
    }
  }
}

TEST(Scoring, CustomWeights) {
  auto p = seed::profile();
  p.goals = {"endurance"};
  p.barriers = {"meteoDefavorable"};
  p.environment = {"exterieur"};
  SuggesterWeights w{10, 0, 0, 1};
  for (const auto& s : suggest_for(seed::kb(), seed::index(), p, {}, w).suggestions)
    EXPECT_DOUBLE_EQ(s.score, oracle_score(p, s.activity.name, w));
  EXPECT_EQ(code_of([] { SuggesterWeights{-1, 2, 1, 2}.validate(); }), ErrorCode::config_error);
}

TEST(Scoring, ExplanationsCarryEvidence) {
  auto p = seed::profile();
  p.goals = {"endurance", "souplesse"};
  p.pathologies = {"hypertension"};
  p.barriers = {"meteoDefavorable"};
  p.environment = {"exterieur"};
  auto s = score(seed::kb(), p, seed::ind("marcheLente"));
  std::map<std::string, Explanation> by;
  for (const auto& e : s.explanations) by[e.criterion] = e;
  EXPECT_EQ(by.at("goal").status, CriterionStatus::matched);
  EXPECT_EQ(names(by.at("goal").evidence), std::set<std::string>{"endurance"});
  EXPECT_EQ(by.at("intensity").status, CriterionStatus::matched);
  EXPECT_EQ(names(by.at("intensity").evidence), std::set<std::string>{"intensiteFaible"});
  EXPECT_EQ(names(by.at("preference").evidence), std::set<std::string>{"exterieur"});
  EXPECT_EQ(names(by.at("health benefit").evidence), std::set<std::string>{"hypertension"});
  EXPECT_EQ(by.count("barrier"), facts().of("marcheLente", "estFreinePar").count("meteoDefavorable"));
  EXPECT_EQ(s.breakdown.goal_matches, 1);
}

TEST(Overrides, OnlyNarrow) {
  std::mt19937 rng(23);
  const std::vector<Overrides> variants = {
      {"IntensiteFaible", std::nullopt, {}},
      {std::nullopt, "Exterieur", {}},
      {std::nullopt, std::nullopt, {"Endurance"}},
      {"IntensiteModeree", "Piscine", {"Endurance", "Souplesse"}},
  };
  for (int i = 0; i < 30; ++i) {
    auto p = oracle::random_profile(rng, "o" + std::to_string(i));
    auto base = suggested(suggest_for(seed::kb(), seed::index(), p));
    for (const auto& o : variants) {
      auto narrowed = suggested(suggest_for(seed::kb(), seed::index(), p, o));
      EXPECT_TRUE(std::includes(base.begin(), base.end(), narrowed.begin(), narrowed.end()));
    }
  }
}

TEST(Overrides, IntensityBandIsHonoured) {
  auto p = seed::profile();
  auto list = suggest_for(seed::kb(), seed::index(), p, {"IntensiteFaible", std::nullopt, {}});
  ASSERT_FALSE(list.suggestions.empty());
  for (const auto& s : list.suggestions) EXPECT_EQ(oracle_band(s.activity.name), 0) << s.activity.name;
  for (const auto& r : list.removed) EXPECT_EQ(r.filter, "overrides");
}

TEST(Overrides, MalformedOverrides) {
  auto p = seed::profile();
  auto run = [&](Overrides o) { return code_of([&] { suggest_for(seed::kb(), seed::index(), p, o); }); };
  EXPECT_EQ(run({"Endurance", std::nullopt, {}}), ErrorCode::malformed_override);
  EXPECT_EQ(run({std::nullopt, "Atlantide", {}}), ErrorCode::malformed_override);
  EXPECT_EQ(run({std::nullopt, std::nullopt, {"endurance"}}), ErrorCode::malformed_override);
}

TEST(EmptyResults, NoteNamesTheLastFilter) {
  auto p = seed::profile();
  p.environment = {"piscine"};
  auto list = suggest_for(seed::kb(), seed::index(), p, {std::nullopt, "Exterieur", {}});
  ASSERT_TRUE(list.suggestions.empty());
  ASSERT_EQ(list.notes.size(), 1u);
  EXPECT_EQ(list.notes[0].status, CriterionStatus::filtered);
  EXPECT_NE(list.notes[0].criterion.find(list.removed.back().filter), std::string::npos) << list.notes[0].criterion;
  EXPECT_EQ(list.removed.back().filter, "environment");

  list = suggest_for(seed::kb(), seed::index(), p, {"IntensiteFaible", "Piscine", {}});
  ASSERT_TRUE(list.suggestions.empty());
  EXPECT_NE(list.notes[0].criterion.find("overrides"), std::string::npos) << list.notes[0].criterion;

  p = seed::profile();
  p.autonomy = 1;
  list = suggest_for(seed::kb(), seed::index(), p);
  if (list.suggestions.empty()) {
    EXPECT_NE(list.notes[0].criterion.find("autonomy"), std::string::npos);
  }
  EXPECT_TRUE(suggest_for(seed::kb(), seed::index(), seed::profile()).notes.empty());
}

TEST(Safety, NoContraindicatedSuggestions) {
  std::mt19937 rng(99);
  for (int i = 0; i < 50; ++i) {
    auto p = oracle::random_profile(rng, "z" + std::to_string(i));
    for (const auto& s : suggest_for(seed::kb(), seed::index(), p).suggestions)
      EXPECT_EQ(oracle::overlap(facts().of(s.activity.name, "contreIndiquePour"), p.pathologies), 0u)
          << s.activity.name;
  }
}

TEST(Requests, UnknownProfileAndBadReferences) {
  ProfileStore store;
  EXPECT_EQ(code_of([&] { suggest(seed::kb(), seed::index(), store, {"nobody", {}}); }), ErrorCode::unknown_profile);
  auto p = seed::profile();
  store.put(p);
  EXPECT_FALSE(suggest(seed::kb(), seed::index(), store, {p.id, {}}).suggestions.empty());
  p.goals = {"vitesse"};
  EXPECT_EQ(code_of([&] { suggest_for(seed::kb(), seed::index(), p); }), ErrorCode::validation_failed);
}

TEST(Requests, SeedScenarios) {
  auto p = seed::profile();
  p.pathologies = {"hypertension"};
  p.autonomy = 4;
  p.goals = {"endurance"};
  p.environment = {"exterieur", "domicile"};
  auto got = suggested(suggest_for(seed::kb(), seed::index(), p));
  EXPECT_TRUE(got.count("marcheNordique"));
}
