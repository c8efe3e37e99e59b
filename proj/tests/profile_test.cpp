#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "oapa/profile.hpp"
#include "support/seed.hpp"

using namespace oapa;
using nlohmann::json;

namespace {

PersonProfile load_sample(const std::string& name) {
  std::ifstream in(seed::source_dir() / "data" / "sample-profiles" / (name + ".json"));
  return profile_from_json(json::parse(in));
}

std::set<std::string> diagnostic_paths(const PersonProfile& p) {
  std::set<std::string> out;
  for (const auto& d : validate_profile(p, seed::kb())) out.insert(d.path);
  return out;
}

std::string decode_error(json j) {
  try {
    profile_from_json(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation_failed);
    return e.message().substr(0, e.message().find(':'));
  }
  return "<decoded>";
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("oapa-profile-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST(Timestamps, ParseAndFormat) {
  auto t = parse_timestamp("2026-02-28T23:59:59Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_timestamp(*t), "2026-02-28T23:59:59Z");
  for (const char* bad : {"2026-02-30T10:00:00Z", "2026-01-01T24:00:00Z", "2026-01-01T10:00:00", "2026-01-01 10:00:00Z",
                          "20260101T100000Z", ""})
    EXPECT_FALSE(parse_timestamp(bad)) << bad;
  EXPECT_EQ(format_date(*parse_date("1941-03-02")), "1941-03-02");
  EXPECT_FALSE(parse_date("1941-02-29"));
}

TEST(Levels, NamesAndTargetBands) {
  for (auto l : {ActivityLevel::sedentaire, ActivityLevel::peu_actif, ActivityLevel::actif, ActivityLevel::tres_actif})
    EXPECT_EQ(parse_activity_level(to_string(l)), l);
  EXPECT_FALSE(parse_activity_level("actif"));
  EXPECT_EQ(target_band(ActivityLevel::sedentaire), IntensityBand::faible);
  EXPECT_EQ(target_band(ActivityLevel::peu_actif), IntensityBand::faible);
  EXPECT_EQ(target_band(ActivityLevel::actif), IntensityBand::moderee);
  EXPECT_EQ(target_band(ActivityLevel::tres_actif), IntensityBand::elevee);
}

TEST(Json, SampleProfilesRoundTrip) {
  for (const char* name : {"pa1", "pa2"}) {
    PersonProfile p = load_sample(name);
    EXPECT_EQ(profile_from_json(json(p)), p) << name;
    EXPECT_TRUE(validate_profile(p, seed::kb()).empty()) << name;
  }
}

TEST(Json, RandomProfilesRoundTrip) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> val(0.1, 200.0);
  std::uniform_int_distribution<int> day(1, 28), n(0, 4), level(0, 3), autonomy(1, 6);
  for (int i = 0; i < 100; ++i) {
    PersonProfile p = seed::profile("r" + std::to_string(i));
    p.identity.height = val(rng) / 100;
    for (int k = n(rng); k > 0; --k) {
      char ts[32];
      std::snprintf(ts, sizeof ts, "2026-09-%02dT%02d:00:00Z", day(rng), k);
      p.measurements.push_back({"aPoids", val(rng), "kg", *parse_timestamp(ts),
                                k % 2 ? MeasurementKind::variable : MeasurementKind::contextual});
    }
    p.activity_level = static_cast<ActivityLevel>(level(rng));
    p.autonomy = autonomy(rng);
    if (n(rng) > 1) p.goals = {"endurance", "souplesse"};
    ASSERT_EQ(profile_from_json(json::parse(json(p).dump())), p);
  }
}

TEST(Json, StrictDecodingReportsPointers) {
  json base = json(seed::profile());
  EXPECT_EQ(decode_error(json::array()), "");
  json j = base;
  j.erase("identity");
  EXPECT_EQ(decode_error(j), "/identity");
  j = base;
  j["identity"]["height"] = "tall";
  EXPECT_EQ(decode_error(j), "/identity/height");
  j = base;
  j["measurements"] = {{{"property", "aPoids"}, {"value", 60}, {"unit", "kg"}, {"timestamp", "2026-01-01T00:00:00Z"}},
                       {{"property", "aPoids"}, {"value", 61}, {"unit", "kg"}, {"timestamp", "yesterday"}}};
  EXPECT_EQ(decode_error(j), "/measurements/1/timestamp");
  j = base;
  j["activity_level"] = "Athlete";
  EXPECT_EQ(decode_error(j), "/activity_level");
  j = base;
  j["goals"] = {"endurance", 3};
  EXPECT_EQ(decode_error(j), "/goals/1");
  j = base;
  j["autonomy"] = 2.5;
  EXPECT_EQ(decode_error(j), "/autonomy");
}

TEST(Validation, ReportsEveryProblemWithPaths) {
  PersonProfile p = seed::profile();
  p.identity.height = -1;
  EXPECT_EQ(diagnostic_paths(p), std::set<std::string>{"/identity/height"});

  p = seed::profile("bad id");
  p.autonomy = 7;
  p.pathologies = {"hypertension", "grippe", "hypertension"};
  p.measurements = {seed::glycemia(0.9), seed::glycemia(1.0)};
  p.measurements[1].unit = "mmol/L";
  p.measurements.push_back({"aTaille", 1, "m", *parse_timestamp("2026-01-01T00:00:00Z"), MeasurementKind::variable});
  EXPECT_EQ(diagnostic_paths(p), (std::set<std::string>{"/id", "/autonomy", "/pathologies/1", "/pathologies/2",
                                                         "/measurements/1/timestamp", "/measurements/1/unit",
                                                         "/measurements/2/property"}));
}

TEST(Validation, IdMustNotCollideWithOntologyNames) {
  auto diags = validate_profile(seed::profile("yoga"), seed::kb());
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].code, "KindConflict");
  EXPECT_EQ(diags[0].path, "/id");
}

TEST(Validation, WrongKindOfEntity) {
  PersonProfile p = seed::profile();
  p.goals = {"Endurance"};  // the class, not the individual
  EXPECT_EQ(diagnostic_paths(p), std::set<std::string>{"/goals/0"});
}

TEST(Latest, AgreesWithSortOracle) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> n(1, 12), minute(0, 59), prop(0, 1);
  std::uniform_real_distribution<double> val(0.3, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    PersonProfile p = seed::profile();
    std::set<int> used;
    for (int k = n(rng); k > 0; --k) {
      int m = minute(rng);
      if (!used.insert(m).second) continue;
      char ts[32];
      std::snprintf(ts, sizeof ts, "2026-09-01T10:%02d:00Z", m);
      p.measurements.push_back({prop(rng) ? "aValeurGlycemie" : "aPoids", val(rng), "", *parse_timestamp(ts),
                                MeasurementKind::variable});
    }
    for (const char* property : {"aValeurGlycemie", "aPoids"}) {
      std::vector<Measurement> mine;
      for (const auto& m : p.measurements)
        if (m.property == property) mine.push_back(m);
      std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
      auto got = latest(p, property);
      if (mine.empty()) {
        EXPECT_FALSE(got);
      } else {
        ASSERT_TRUE(got);
        EXPECT_EQ(*got, mine.back());
      }
    }
  }
}

TEST(Abox, CarriesLatestValuesAndSituation) {
  PersonProfile p = load_sample("pa1");
  auto axioms = profile_to_abox(p, seed::kb());
  EXPECT_TRUE(std::is_sorted(axioms.begin(), axioms.end()));
  std::map<std::string, double> values;
  std::multiset<std::string> facts;
  for (const auto& ax : axioms) {
    EXPECT_EQ(ax.subject, person_id(p));
    if (ax.kind == Axiom::Kind::data_assertion) values[ax.property.name] = ax.value;
    if (ax.kind == Axiom::Kind::object_assertion) facts.insert(ax.property.name + ">" + ax.object.name);
  }
  EXPECT_EQ(values.at("aValeurGlycemie"), 0.55);
  EXPECT_EQ(values.at("aNiveauAutonomie"), 4);
  EXPECT_EQ(values.at("aPressionArterielleSystolique"), 146);
  for (const char* f : {"aPathologie>hypertension", "aPathologie>diabete", "aNiveauActivite>peuActif",
                        "aPourObjectif>endurance", "aAccesA>exterieur", "aFrein>meteoDefavorable"})
    EXPECT_EQ(facts.count(f), 1u) << f;

  p.identity.height = 0;
  try {
    profile_to_abox(p, seed::kb());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation_failed);
  }
}

TEST(Abox, SampleInferences) {
  std::set<std::string> types;
  for (const auto& t : profile_inferences(seed::kb(), load_sample("pa1"))) types.insert(t.name);
  for (const char* c : {"Personne", "GlycemieBasse", "Hypoglycemie", "TensionElevee"}) EXPECT_TRUE(types.count(c)) << c;
  EXPECT_FALSE(types.count("Thing"));
}

TEST(Store, AppendsAndReplays) {
  TempDir dir;
  PersonProfile p = seed::profile("pa9");
  {
    ProfileStore store(dir.path());
    store.put(p);
    p.autonomy = 3;
    store.put(p);
    store.put(seed::profile("pa0"));
  }
  std::ifstream log(dir.path() / "pa9.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 2);

  ProfileStore replay(dir.path());
  EXPECT_EQ(replay.ids(), (std::vector<std::string>{"pa0", "pa9"}));
  EXPECT_EQ(replay.find("pa9"), p);
  EXPECT_FALSE(replay.find("nobody"));
}

TEST(Store, IdentityIsImmutable) {
  ProfileStore store;
  PersonProfile p = seed::profile();
  store.put(p);
  p.identity.height = 1.80;
  try {
    store.put(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation_failed);
  }
  EXPECT_EQ(store.find(p.id)->identity.height, 1.70);
}

TEST(Store, CorruptLogIsAnIoError) {
  TempDir dir;
  std::filesystem::create_directories(dir.path());
  std::ofstream(dir.path() / "x.jsonl") << "{not json\n";
  try {
    ProfileStore store(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
  }
}
