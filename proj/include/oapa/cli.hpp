#pragma once

// Command-line front end. Every service capability is available here against
// a locally built snapshot. Exit status: 0 success, 1 domain failure, 2 usage.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oapa/activity.hpp"
#include "oapa/dsl.hpp"
#include "oapa/engine.hpp"
#include "oapa/profile.hpp"
#include "oapa/qc.hpp"
#include "oapa/service.hpp"
#include "oapa/suggester.hpp"
#include "oapa/wire.hpp"

namespace oapa {

namespace detail {

struct CliOptions {
  std::string config;
  std::string ontology_dir;
  std::string format = "text";
  std::vector<std::string> files;
  std::string expr;
  std::string under;
  std::string profile;
  std::string intensity;
  std::string location;
  std::vector<std::string> goals;
  std::string suite;
  std::string listen;
};

inline EngineConfig resolve_config(const CliOptions& o) {
  EngineConfig cfg;
  std::string path = o.config;
  if (path.empty())
    if (const char* env = std::getenv("OAPA_CONFIG")) path = env;
  if (path.empty() && std::filesystem::exists("oapa.toml")) path = "oapa.toml";
  if (!path.empty()) cfg = load_config(path);
  apply_env_overrides(cfg);
  if (!o.ontology_dir.empty()) cfg.ontology_paths = {o.ontology_dir};
  if (!o.suite.empty()) cfg.qc_suite = o.suite;
  if (!o.listen.empty()) cfg.listen_address = o.listen;
  cfg.validate();
  return cfg;
}

struct Local {
  KnowledgeBase kb;
  InferenceIndex index;
};

inline Local load_local(const EngineConfig& cfg) {
  Local l{load_knowledge_base(ontology_files(cfg), cfg.cutpoints), {}};
  l.index = reason(l.kb);
  return l;
}

inline PersonProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read profile " + path);
  try {
    return profile_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::syntax_error, path + ": " + e.what());
  }
}

inline int cmd_validate(const CliOptions& o, std::ostream& out, std::ostream& err) {
  EngineConfig cfg = resolve_config(o);
  std::vector<OntologyModule> mods;
  std::set<std::string> given;
  for (const auto& f : o.files) {
    OntologyModule m = parse_module_file(f);
    add_intensity_facts(m, cfg.cutpoints);
    given.insert(m.name);
    mods.push_back(std::move(m));
  }
  // Imports not supplied on the command line come from the configured corpus.
  for (const auto& f : ontology_files(cfg)) {
    OntologyModule m = parse_module_file(f);
    if (given.count(m.name)) continue;
    add_intensity_facts(m, cfg.cutpoints);
    mods.push_back(std::move(m));
  }
  KnowledgeBase kb = merge_modules(std::move(mods));
  auto lint = exertion_lint(kb, cfg.cutpoints);
  if (o.format == "json") {
    nlohmann::json warnings = nlohmann::json::array();
    for (const auto& l : lint)
      warnings.push_back({{"activity", l.activity.canonical()},
                          {"observed_rpe", l.observed_rpe},
                          {"met_band", std::string(band_class(l.report.met_band))}});
    out << nlohmann::json{{"ok", true}, {"files", o.files}, {"stats", wire::stats(stats(kb))}, {"warnings", warnings}}
               .dump(2)
        << '\n';
  } else {
    for (const auto& l : lint)
      err << "warning: " << l.activity.canonical() << " perceived exertion " << l.observed_rpe
          << " disagrees with MET band " << band_class(l.report.met_band) << '\n';
    out << "ok: " << o.files.size() << " file(s) valid\n";
  }
  return 0;
}

inline int cmd_stats(const CliOptions& o, std::ostream& out) {
  auto l = load_local(resolve_config(o));
  KbStats s = stats(l.kb);
  if (o.format == "json") {
    out << wire::stats(s).dump(2) << '\n';
  } else {
    out << "modules            " << s.modules << "\nconcepts           " << s.concepts << "\nobject properties  "
        << s.object_properties << "\ndata properties    " << s.data_properties << "\nindividuals        "
        << s.individuals << "\naxioms             " << s.axioms << '\n';
  }
  return 0;
}

inline int cmd_classify(const CliOptions& o, std::ostream& out) {
  auto l = load_local(resolve_config(o));
  if (!o.under.empty()) {
    auto subs = subclasses_of(l.kb, l.index, parse_query(o.under, "under").root);
    if (o.format == "json") out << wire::ids(subs).dump(2) << '\n';
    else
      for (const auto& c : subs) out << c.canonical() << '\n';
    return 0;
  }
  // Direct superclasses of every named concept.
  std::map<EntityId, std::vector<EntityId>> parents;
  for (const auto& [parent, children] : l.index.direct_children)
    for (const auto& c : children) parents[c].push_back(parent);
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : l.kb.entities(EntityKind::named_concept)) {
    auto& ps = parents[c];
    if (o.format == "json") {
      j[c.canonical()] = wire::ids(ps);
    } else {
      out << c.canonical();
      for (std::size_t i = 0; i < ps.size(); ++i) out << (i ? ", " : " < ") << ps[i].canonical();
      out << '\n';
    }
  }
  if (o.format == "json") out << j.dump(2) << '\n';
  return 0;
}

inline int cmd_query(const CliOptions& o, std::ostream& out) {
  auto expr = parse_query(o.expr, "query").root;
  auto l = load_local(resolve_config(o));
  auto hits = instances_of(l.kb, l.index, expr);
  if (o.format == "json") out << wire::ids(hits).dump(2) << '\n';
  else
    for (const auto& h : hits) out << h.canonical() << '\n';
  return 0;
}

inline int cmd_infer(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  PersonProfile p = read_profile(o.profile);
  auto l = load_local(cfg);
  auto types = profile_inferences(l.kb, p);
  if (o.format == "json") {
    out << wire::entities(l.kb, types).dump(2) << '\n';
  } else {
    for (const auto& t : types) out << t.canonical() << "  " << display_label(l.kb, t) << '\n';
  }
  return 0;
}

inline int cmd_suggest(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  PersonProfile p = read_profile(o.profile);
  auto l = load_local(cfg);
  if (auto diags = validate_profile(p, l.kb); !diags.empty())
    throw Error(ErrorCode::validation_failed, diags.front().path + ": " + diags.front().message);
  Overrides ov;
  if (!o.intensity.empty()) ov.intensity_band = o.intensity;
  if (!o.location.empty()) ov.location = o.location;
  ov.goals = o.goals;
  auto list = suggest_for(l.kb, l.index, p, ov, cfg.weights);
  if (o.format == "json") {
    out << wire::suggestions(l.kb, list).dump(2) << '\n';
    return 0;
  }
  int rank = 0;
  for (const auto& s : list.suggestions) {
    out << ++rank << ". " << s.activity.canonical() << "  score " << dsl::format_number(s.score) << '\n';
    for (const auto& e : s.explanations) {
      out << "     " << e.criterion << ": " << to_string(e.status);
      for (std::size_t i = 0; i < e.evidence.size(); ++i)
        out << (i ? ", " : " (") << display_label(l.kb, e.evidence[i]) << (i + 1 == e.evidence.size() ? ")" : "");
      out << '\n';
    }
  }
  for (const auto& n : list.notes) out << n.criterion << '\n';
  return 0;
}

inline int cmd_qc_run(const CliOptions& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  auto suite = load_suite(cfg.qc_suite);
  auto l = load_local(cfg);
  auto report = run_suite(l.kb, l.index, suite, cfg.weights);
  if (o.format == "json") out << to_json(report).dump(2) << '\n';
  else out << to_text(report);
  return report.failed == 0 ? 0 : 1;
}

inline int cmd_qc_list(const CliOptions& o, std::ostream& out) {
  auto suite = load_suite(resolve_config(o).qc_suite);
  if (o.format == "json") {
    out << describe_suite(suite).dump(2) << '\n';
  } else {
    for (const auto& c : suite) out << c.id << "  " << c.question << '\n';
  }
  return 0;
}

inline int cmd_serve(const CliOptions& o, std::ostream& out) {
  EngineConfig cfg = resolve_config(o);
  Service service(cfg);
  auto snap = service.snapshots().current();
  out << "serving version " << snap->version << " on " << cfg.listen_address << std::endl;
  return service.listen() ? 0 : 1;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  detail::CliOptions o;
  CLI::App app{"Ontology-based physical activity advisor"};
  app.name("oapa");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config, "Engine config file (default: $OAPA_CONFIG or ./oapa.toml)");
  app.add_option("--ontology-dir", o.ontology_dir, "Directory of .oapa modules, replaces ontology_paths");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  auto* validate = app.add_subcommand("validate", "Parse and merge modules, report the first diagnostic");
  validate->add_option("files", o.files, "Module files")->required();
  app.add_subcommand("stats", "Entity and axiom counts of the loaded corpus");
  auto* classify = app.add_subcommand("classify", "Print the inferred taxonomy");
  classify->add_option("--under", o.under, "List named concepts subsumed by this expression");
  auto* query = app.add_subcommand("query", "Individuals that are instances of an expression");
  query->add_option("expr", o.expr, "Concept expression")->required();
  auto* infer = app.add_subcommand("infer", "Concepts a profile's person is inferred to belong to");
  infer->add_option("--profile", o.profile, "Profile JSON file")->required();
  auto* suggest = app.add_subcommand("suggest", "Ranked activity suggestions for a profile");
  suggest->add_option("--profile", o.profile, "Profile JSON file")->required();
  suggest->add_option("--intensity", o.intensity, "Restrict to an intensity band concept");
  suggest->add_option("--location", o.location, "Restrict to a location concept");
  suggest->add_option("--goal", o.goals, "Restrict to a physical gain concept (repeatable)");
  auto* qc = app.add_subcommand("qc", "Competency-question suite");
  qc->require_subcommand(1);
  qc->fallthrough();
  auto* qc_run = qc->add_subcommand("run", "Run the suite; exit 1 on any failing case");
  qc_run->add_option("--suite", o.suite, "Suite file (default from config)");
  auto* qc_list = qc->add_subcommand("list", "List the suite's cases");
  qc_list->add_option("--suite", o.suite, "Suite file (default from config)");
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--listen", o.listen, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return detail::cmd_validate(o, out, err);
    if (app.got_subcommand("stats")) return detail::cmd_stats(o, out);
    if (*classify) return detail::cmd_classify(o, out);
    if (*query) return detail::cmd_query(o, out);
    if (*infer) return detail::cmd_infer(o, out);
    if (*suggest) return detail::cmd_suggest(o, out);
    if (*qc_run) return detail::cmd_qc_run(o, out);
    if (*qc_list) return detail::cmd_qc_list(o, out);
    if (*serve) return detail::cmd_serve(o, out);
  } catch (const Error& e) {
    if (o.format == "json") out << nlohmann::json{{"error", wire::error(e)}}.dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace oapa
