#include <gtest/gtest.h>

#include "oapa/dsl.hpp"
#include "oapa/profile.hpp"
#include "oapa/reasoner.hpp"
#include "support/el_oracle.hpp"
#include "support/seed.hpp"
#include "support/synthetic.hpp"

using namespace oapa;

namespace {

std::set<std::string> names(const std::vector<EntityId>& ids) {
  std::set<std::string> out;
  for (const auto& id : ids) out.insert(id.name);
  return out;
}

std::vector<EntityId> query_instances(const std::string& text) {
  return instances_of(seed::kb(), seed::index(), parse_query(text).root);
}

std::set<std::string> person_types(const PersonProfile& p) { return names(profile_inferences(seed::kb(), p)); }

// Membership written out against the bound fields, independent of NumericRange::contains.
bool member(const NumericRange& r, double v) {
  if (r.lower && (v < *r.lower || (v == *r.lower && !r.lower_inclusive))) return false;
  if (r.upper && (v > *r.upper || (v == *r.upper && !r.upper_inclusive))) return false;
  return true;
}

}  // namespace

TEST(Classify, MatchesClosureOracleOnRandomTBoxes) {
  for (std::uint32_t s = 1; s <= 100; ++s) {
    KnowledgeBase kb = merge_modules({oracle::random_tbox(s)});
    InferenceIndex idx = classify(kb);
    auto expected = oracle::closure(kb.axioms(), kb.entities(EntityKind::named_concept));
    ASSERT_EQ(idx.subsumers, expected) << "seed " << s << "\n" << serialize_module(kb.modules().front());
  }
}

TEST(Classify, DeeperRandomTBoxes) {
  oracle::TBoxShape shape{8, 2, 2, 12, 3};
  for (std::uint32_t s = 1000; s < 1040; ++s) {
    KnowledgeBase kb = merge_modules({oracle::random_tbox(s, shape)});
    auto expected = oracle::closure(kb.axioms(), kb.entities(EntityKind::named_concept));
    ASSERT_EQ(classify(kb).subsumers, expected) << "seed " << s;
  }
}

TEST(Classify, SyntheticScaleModuleMatchesOracle) {
  KnowledgeBase kb = merge_modules({parse_module(synthetic::module_text(405))});
  EXPECT_EQ(stats(kb).concepts, 405u);
  auto expected = oracle::closure(kb.axioms(), kb.entities(EntityKind::named_concept));
  EXPECT_EQ(classify(kb).subsumers, expected);
}

TEST(Classify, IsDeterministic) {
  auto a = reason(seed::kb());
  auto b = reason(seed::kb());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, seed::index());
}

TEST(Classify, DirectChildrenFormTheTransitiveReduction) {
  const auto& idx = seed::index();
  for (const auto& [parent, kids] : idx.direct_children)
    for (const auto& k : kids) {
      EXPECT_TRUE(idx.subsumers.at(k).count(parent));
      for (const auto& other : kids)
        if (other != k) {
          EXPECT_FALSE(idx.subsumers.at(k).count(other) && !idx.subsumers.at(other).count(k));
        }
    }
  EXPECT_TRUE(idx.direct_children.at(seed::cls("Marche")).count(seed::cls("MarcheNordique")));
}

TEST(Classify, DefinedClassesPickUpSubclasses) {
  auto sub = subclasses_of(seed::kb(), seed::index(), parse_query("Activite and aPourGainPhysique some Endurance").root);
  auto got = names(sub);
  EXPECT_TRUE(got.count("ActiviteEndurance"));
  EXPECT_TRUE(got.count("MarcheNordique"));
  EXPECT_FALSE(got.count("Marche"));
  EXPECT_TRUE(seed::index().subsumers.at(seed::cls("MarcheNordique")).count(seed::cls("ActiviteEndurance")));
}

TEST(Classify, ThingSubsumesEverything) {
  auto all = subclasses_of(seed::kb(), seed::index(), ConceptExpr::top());
  EXPECT_EQ(all, seed::kb().entities(EntityKind::named_concept));
  for (const auto& [c, sups] : seed::index().subsumers) EXPECT_TRUE(sups.count(top_id())) << c.canonical();
}

TEST(RangeSubsumption, AgreesWithPointSampling) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> probe(-2.0, 12.0);
  // Every integer and half-integer on the grid, plus far points for unbounded sides.
  std::vector<double> fixed = {-1e6, 1e6};
  for (int i = -2; i <= 24; ++i) fixed.push_back(i / 2.0);
  int positives = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    NumericRange inner = oracle::random_range(rng), outer = oracle::random_range(rng);
    bool counterexample = false;
    for (double p : fixed) counterexample = counterexample || (member(inner, p) && !member(outer, p));
    for (int k = 0; k < 10000 && !counterexample; ++k) {
      double p = probe(rng);
      counterexample = member(inner, p) && !member(outer, p);
    }
    ASSERT_EQ(range_subsumes(inner, outer), !counterexample)
        << serialize_range(inner) << " in " << serialize_range(outer);
    ASSERT_EQ(range_subsumes(inner, outer), oracle::contains(inner, outer));
    positives += !counterexample;
  }
  EXPECT_GT(positives, 50);
}

TEST(RangeSubsumption, Units) {
  auto lt = NumericRange::less_than(0.7);
  EXPECT_TRUE(range_subsumes(lt.with_unit("g/L"), lt));
  EXPECT_TRUE(range_subsumes(lt, lt.with_unit("g/L")));
  EXPECT_FALSE(range_subsumes(lt.with_unit("mmol/L"), lt.with_unit("g/L")));
  EXPECT_TRUE(range_subsumes(NumericRange::exactly(0.55), lt));
  EXPECT_FALSE(range_subsumes(NumericRange::exactly(0.7), lt));
  EXPECT_TRUE(range_subsumes(NumericRange::exactly(0.7), NumericRange::closed(0.7, 1.1)));
}

TEST(Realize, GlycemiaThresholds) {
  auto p = seed::profile();
  p.measurements = {seed::glycemia(0.55)};
  auto t = person_types(p);
  EXPECT_TRUE(t.count("GlycemieBasse"));
  EXPECT_TRUE(t.count("Hypoglycemie"));
  EXPECT_TRUE(t.count("EtatGlycemique"));
  EXPECT_FALSE(t.count("GlycemieNormale"));

  for (double v : {0.95, 0.70}) {
    p.measurements = {seed::glycemia(v)};
    t = person_types(p);
    EXPECT_FALSE(t.count("GlycemieBasse")) << v;
    EXPECT_FALSE(t.count("Hypoglycemie")) << v;
    EXPECT_TRUE(t.count("GlycemieNormale")) << v;
  }
  p.measurements = {seed::glycemia(1.25)};
  EXPECT_TRUE(person_types(p).count("GlycemieElevee"));
}

TEST(Realize, LatestMeasurementWins) {
  auto p = seed::profile();
  p.measurements = {seed::glycemia(0.95, "2026-10-01T08:00:00Z"), seed::glycemia(0.55, "2026-10-02T08:00:00Z")};
  EXPECT_TRUE(person_types(p).count("GlycemieBasse"));
  std::swap(p.measurements[0].value, p.measurements[1].value);
  EXPECT_FALSE(person_types(p).count("GlycemieBasse"));
}

TEST(Realize, SystolicThreshold) {
  auto p = seed::profile();
  auto bp = [](double v) {
    return Measurement{"aPressionArterielleSystolique", v, "mmHg", *parse_timestamp("2026-10-01T08:00:00Z"),
                       MeasurementKind::variable};
  };
  p.measurements = {bp(140)};
  EXPECT_TRUE(person_types(p).count("TensionElevee"));
  p.measurements = {bp(139.9)};
  EXPECT_FALSE(person_types(p).count("TensionElevee"));
}

TEST(Realize, CatalogTypes) {
  const auto& types = seed::index().instance_types.at(seed::ind("marcheNordique"));
  for (const char* c : {"MarcheNordique", "Marche", "ActiviteEndurance", "ActiviteIntensiteModeree", "Activite"})
    EXPECT_TRUE(types.count(seed::cls(c))) << c;
  EXPECT_FALSE(types.count(seed::cls("ActiviteFaibleIntensite")));
}

TEST(Retrieval, NestedQueriesMatchFactOracle) {
  // Oracle straight from the asserted facts: catalog activities are the
  // individuals with a MET value; the low band is MET below 3.
  std::map<std::string, double> met;
  std::set<std::pair<std::string, std::string>> facts;
  for (const auto& ax : seed::kb().axioms()) {
    if (ax.kind == Axiom::Kind::data_assertion && ax.property.name == "aValeurMET") met[ax.subject.name] = ax.value;
    if (ax.kind == Axiom::Kind::object_assertion)
      facts.insert({ax.subject.name, ax.property.name + ">" + ax.object.name});
  }
  std::set<std::string> l1, l2, l3, l4;
  for (const auto& [a, v] : met) {
    l1.insert(a);
    if (v >= 3.0) continue;
    l2.insert(a);
    if (!facts.count({a, "aPourGainPhysique>endurance"})) continue;
    l3.insert(a);
    if (facts.count({a, "seDerouleA>exterieur"})) l4.insert(a);
  }
  EXPECT_EQ(names(query_instances("Activite")), l1);
  EXPECT_EQ(names(query_instances("Activite and aIntensite some IntensiteFaible")), l2);
  EXPECT_EQ(names(query_instances("Activite and aIntensite some IntensiteFaible and aPourGainPhysique some Endurance")), l3);
  EXPECT_EQ(names(query_instances("Activite and aIntensite some IntensiteFaible and aPourGainPhysique some Endurance "
                                  "and seDerouleA some Exterieur")),
            l4);
  EXPECT_FALSE(l4.empty());
  EXPECT_GT(l1.size(), l2.size());
}

TEST(Retrieval, NamedShortcutAgreesWithSaturation) {
  // Fresh indexes without cached instance types take the saturation path.
  InferenceIndex bare = classify(seed::kb());
  for (const char* q : {"Activite", "Activite and ActiviteFaibleIntensite", "Materiel", "Thing"}) {
    auto expr = parse_query(q).root;
    EXPECT_EQ(instances_of(seed::kb(), seed::index(), expr), instances_of(seed::kb(), bare, expr)) << q;
  }
}

TEST(Retrieval, UnknownNamesAreMalformed) {
  try {
    query_instances("Activite and aIntensite some Nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_expr);
  }
}

TEST(Retrieval, EmptyKnowledgeBase) {
  KnowledgeBase empty = merge_modules({});
  auto idx = reason(empty);
  EXPECT_TRUE(instances_of(empty, idx, ConceptExpr::top()).empty());
  EXPECT_TRUE(subclasses_of(empty, idx, ConceptExpr::top()).empty());
}
