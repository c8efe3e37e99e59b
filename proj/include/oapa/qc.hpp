#pragma once

// Competency-question harness. A suite is a YAML list of cases; each case is
// either a concept query or a suggestion request for an inline profile, with
// expectations on the returned individuals.

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "oapa/dsl.hpp"
#include "oapa/profile.hpp"
#include "oapa/reasoner.hpp"
#include "oapa/suggester.hpp"

namespace oapa {

enum class QcKind { query, suggestion };

struct QcExpect {
  bool non_empty = false;
  std::vector<std::string> must_contain;
  std::vector<std::string> must_exclude;
};

struct QcCase {
  std::string id;
  std::string question;
  std::vector<int> scenarios;
  QcKind kind = QcKind::query;
  std::string query;                     // query cases
  std::optional<nlohmann::json> profile;  // suggestion cases
  Overrides overrides;
  QcExpect expect;
};

struct QcVerdict {
  std::string id;
  bool pass = false;
  std::vector<std::string> actual;
  std::vector<std::string> diff;  // one line per unmet expectation
};

struct QcReport {
  std::size_t total = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::vector<QcVerdict> verdicts;
};

namespace detail {

/// YAML node to JSON. Plain scalars become booleans or numbers when they
/// read as such; quoted scalars stay strings.
inline nlohmann::json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& item : n) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : n) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: break;
  }
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;
  if (s == "true") return true;
  if (s == "false") return false;
  long long i = 0;
  auto [ip, iec] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (iec == std::errc() && ip == s.data() + s.size() && !s.empty()) return i;
  double d = 0;
  auto [dp, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (dec == std::errc() && dp == s.data() + s.size() && !s.empty()) return d;
  return s;
}

[[noreturn]] inline void bad_suite(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::config_error, "QC suite " + where + ": " + what);
}

inline std::vector<std::string> string_list(const YAML::Node& n, const std::string& where) {
  std::vector<std::string> out;
  if (!n) return out;
  if (!n.IsSequence()) bad_suite(where, "expected a list");
  for (const auto& item : n) out.push_back(item.as<std::string>());
  return out;
}

}  // namespace detail

inline std::vector<QcCase> parse_suite(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::config_error, std::string("QC suite: ") + e.what());
  }
  YAML::Node cases = root.IsMap() ? root["cases"] : root;
  if (!cases.IsSequence()) detail::bad_suite("root", "expected a list of cases");
  std::vector<QcCase> out;
  std::set<std::string> ids;
  for (const auto& node : cases) {
    QcCase c;
    if (!node["id"]) detail::bad_suite("case", "missing id");
    c.id = node["id"].as<std::string>();
    if (!ids.insert(c.id).second) detail::bad_suite(c.id, "duplicate id");
    if (node["question"]) c.question = node["question"].as<std::string>();
    if (node["scenarios"])
      for (const auto& s : node["scenarios"]) c.scenarios.push_back(s.as<int>());
    std::string kind = node["kind"] ? node["kind"].as<std::string>() : "query";
    if (kind == "query") {
      c.kind = QcKind::query;
      if (!node["query"]) detail::bad_suite(c.id, "query case without 'query'");
      c.query = node["query"].as<std::string>();
    } else if (kind == "suggestion") {
      c.kind = QcKind::suggestion;
      if (!node["profile"]) detail::bad_suite(c.id, "suggestion case without 'profile'");
      c.profile = detail::yaml_to_json(node["profile"]);
      if (const auto& o = node["overrides"]) {
        if (o["intensity"]) c.overrides.intensity_band = o["intensity"].as<std::string>();
        if (o["location"]) c.overrides.location = o["location"].as<std::string>();
        c.overrides.goals = detail::string_list(o["goals"], c.id + ".overrides.goals");
      }
    } else {
      detail::bad_suite(c.id, "unknown kind '" + kind + "'");
    }
    if (const auto& e = node["expect"]) {
      if (e["non_empty"]) c.expect.non_empty = e["non_empty"].as<bool>();
      c.expect.must_contain = detail::string_list(e["must_contain"], c.id + ".expect.must_contain");
      c.expect.must_exclude = detail::string_list(e["must_exclude"], c.id + ".expect.must_exclude");
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<QcCase> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open QC suite " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_suite(buf.str());
}

/// Runs one case. Unresolvable names, malformed queries and invalid profiles
/// raise BadCase.
inline QcVerdict run_case(const KnowledgeBase& kb, const InferenceIndex& index, const QcCase& c,
                          const SuggesterWeights& weights = {}) {
  auto bad = [&](const std::string& what) { return Error(ErrorCode::bad_case, c.id + ": " + what); };
  std::vector<EntityId> results;
  try {
    if (c.kind == QcKind::query) {
      results = instances_of(kb, index, parse_query(c.query).root);
    } else {
      PersonProfile p = profile_from_json(*c.profile);
      if (auto diags = validate_profile(p, kb); !diags.empty())
        throw bad("profile " + diags.front().path + ": " + diags.front().message);
      for (const auto& s : suggest_for(kb, index, p, c.overrides, weights).suggestions) results.push_back(s.activity);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::bad_case) throw;
    throw bad(std::string(to_string(e.code())) + ": " + e.message());
  }

  auto lookup = [&](const std::string& ref) {
    try {
      return kb.resolve(ref, EntityKind::individual);
    } catch (const Error& e) {
      throw bad(e.message());
    }
  };
  std::set<EntityId> got(results.begin(), results.end());
  QcVerdict v;
  v.id = c.id;
  for (const auto& r : results) v.actual.push_back(r.canonical());
  if (c.expect.non_empty && results.empty()) v.diff.push_back("non_empty: result is empty");
  for (const auto& ref : c.expect.must_contain)
    if (!got.count(lookup(ref))) v.diff.push_back("must_contain: missing " + ref);
  for (const auto& ref : c.expect.must_exclude)
    if (got.count(lookup(ref))) v.diff.push_back("must_exclude: present " + ref);
  v.pass = v.diff.empty();
  return v;
}

/// Every case runs; a BadCase becomes a failing verdict carrying the reason.
inline QcReport run_suite(const KnowledgeBase& kb, const InferenceIndex& index, const std::vector<QcCase>& suite,
                          const SuggesterWeights& weights = {}) {
  QcReport r;
  for (const auto& c : suite) {
    QcVerdict v;
    try {
      v = run_case(kb, index, c, weights);
    } catch (const Error& e) {
      v.id = c.id;
      v.pass = false;
      v.diff.push_back("BadCase: " + e.message());
    }
    ++r.total;
    ++(v.pass ? r.passed : r.failed);
    r.verdicts.push_back(std::move(v));
  }
  return r;
}

inline nlohmann::json to_json(const QcReport& r) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& v : r.verdicts)
    cases.push_back({{"id", v.id}, {"pass", v.pass}, {"actual", v.actual}, {"diff", v.diff}});
  return {{"total", r.total}, {"passed", r.passed}, {"failed", r.failed}, {"cases", cases}};
}

inline std::string to_text(const QcReport& r) {
  std::ostringstream out;
  for (const auto& v : r.verdicts) {
    out << (v.pass ? "PASS " : "FAIL ") << v.id << '\n';
    for (const auto& d : v.diff) out << "  " << d << '\n';
  }
  out << r.passed << '/' << r.total << " passed\n";
  return out.str();
}

inline nlohmann::json describe_suite(const std::vector<QcCase>& suite) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : suite)
    out.push_back({{"id", c.id},
                   {"question", c.question},
                   {"scenarios", c.scenarios},
                   {"kind", c.kind == QcKind::query ? "query" : "suggestion"}});
  return out;
}

}  // namespace oapa
