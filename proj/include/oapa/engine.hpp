#pragma once

// Engine configuration and the snapshot lifecycle: load every module, merge,
// classify and realize, then publish the result as an immutable snapshot.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "oapa/activity.hpp"
#include "oapa/dsl.hpp"
#include "oapa/kb.hpp"
#include "oapa/reasoner.hpp"
#include "oapa/suggester.hpp"

namespace oapa {

struct EngineConfig {
  std::vector<std::string> ontology_paths{"data/ontology"};  // files or directories of *.oapa
  ExertionCutpoints cutpoints;
  SuggesterWeights weights;
  std::string listen_address = "127.0.0.1:8080";
  std::string profile_dir = "data/profiles";  // empty: profiles live in memory only
  std::string qc_suite = "qc/suite.yaml";

  void validate() const {
    cutpoints.validate();
    weights.validate();
    if (ontology_paths.empty()) throw Error(ErrorCode::config_error, "ontology_paths is empty");
    for (const auto& p : ontology_paths)
      if (!std::filesystem::exists(p)) throw Error(ErrorCode::config_error, "ontology path " + p + " does not exist");
    split_listen_address(listen_address);
  }

  static std::pair<std::string, int> split_listen_address(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0)
      throw Error(ErrorCode::config_error, "listen address '" + addr + "' is not host:port");
    int port = 0;
    auto tail = std::string_view(addr).substr(colon + 1);
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), port);
    if (ec != std::errc() || ptr != tail.data() + tail.size() || port < 0 || port > 65535)
      throw Error(ErrorCode::config_error, "listen address '" + addr + "' has a bad port");
    return {addr.substr(0, colon), port};
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Value of a `key = value` line: "string", number, true/false or a one-line
/// array of strings.
struct ConfigValue {
  std::string text;
  bool quoted = false;
  bool is_array = false;
  std::vector<std::string> items;
};

inline std::string strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

inline std::string unquote(const std::string& s, const std::string& where) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    throw Error(ErrorCode::config_error, where + ": expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) ++i;
    out += s[i];
  }
  return out;
}

inline ConfigValue parse_value(const std::string& raw, const std::string& where) {
  ConfigValue v;
  v.text = raw;
  if (raw.empty()) throw Error(ErrorCode::config_error, where + ": missing value");
  if (raw.front() == '[') {
    if (raw.back() != ']') throw Error(ErrorCode::config_error, where + ": unterminated array");
    v.is_array = true;
    std::string body = raw.substr(1, raw.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      v.items.push_back(unquote(item, where));
    }
  } else if (raw.front() == '"') {
    v.quoted = true;
    v.text = unquote(raw, where);
  }
  return v;
}

inline double as_number(const ConfigValue& v, const std::string& where) {
  double d = 0;
  auto [ptr, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), d);
  if (v.quoted || v.is_array || ec != std::errc() || ptr != v.text.data() + v.text.size())
    throw Error(ErrorCode::config_error, where + ": expected a number, got '" + v.text + "'");
  return d;
}

inline int as_int(const ConfigValue& v, const std::string& where) {
  double d = as_number(v, where);
  if (d != static_cast<int>(d)) throw Error(ErrorCode::config_error, where + ": expected an integer");
  return static_cast<int>(d);
}

inline std::string as_string(const ConfigValue& v, const std::string& where) {
  if (v.is_array || !v.quoted) throw Error(ErrorCode::config_error, where + ": expected a quoted string");
  return v.text;
}

/// Applies `section.key = value` to the config. Unknown keys are errors.
inline void set_config_key(EngineConfig& cfg, const std::string& section, const std::string& key,
                           const ConfigValue& v, const std::string& where) {
  const std::string full = section.empty() ? key : section + "." + key;
  if (full == "ontology_paths") {
    cfg.ontology_paths = v.is_array ? v.items : std::vector<std::string>{as_string(v, where)};
  } else if (full == "listen") {
    cfg.listen_address = as_string(v, where);
  } else if (full == "profile_dir") {
    cfg.profile_dir = as_string(v, where);
  } else if (full == "qc_suite") {
    cfg.qc_suite = as_string(v, where);
  } else if (full == "cutpoints.met_light_upper") {
    cfg.cutpoints.met_light_upper = as_number(v, where);
  } else if (full == "cutpoints.met_moderate_upper") {
    cfg.cutpoints.met_moderate_upper = as_number(v, where);
  } else if (full == "cutpoints.rpe_light_upper") {
    cfg.cutpoints.rpe_light_upper = as_int(v, where);
  } else if (full == "cutpoints.rpe_moderate_upper") {
    cfg.cutpoints.rpe_moderate_upper = as_int(v, where);
  } else if (full == "weights.goal") {
    cfg.weights.goal = as_number(v, where);
  } else if (full == "weights.intensity") {
    cfg.weights.intensity = as_number(v, where);
  } else if (full == "weights.preference") {
    cfg.weights.preference = as_number(v, where);
  } else if (full == "weights.barrier") {
    cfg.weights.barrier = as_number(v, where);
  } else {
    throw Error(ErrorCode::config_error, where + ": unknown key '" + full + "'");
  }
}

}  // namespace detail

/// Reads the `key = value` / `[section]` config format. Relative paths are
/// taken relative to `base_dir`.
inline EngineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                                 const std::string& file = "config") {
  EngineConfig cfg;
  std::string section;
  std::stringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = file + ":" + std::to_string(lineno);
    std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw Error(ErrorCode::config_error, where + ": bad section header");
      section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::config_error, where + ": expected key = value");
    std::string key = detail::trim(std::string_view(s).substr(0, eq));
    detail::set_config_key(cfg, section, key, detail::parse_value(detail::trim(std::string_view(s).substr(eq + 1)), where),
                           where);
  }
  if (!base_dir.empty()) {
    auto rebase = [&](std::string& p) {
      if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base_dir / p).lexically_normal().string();
    };
    for (auto& p : cfg.ontology_paths) rebase(p);
    rebase(cfg.profile_dir);
    rebase(cfg.qc_suite);
  }
  return cfg;
}

inline EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path(), path.string());
}

using EnvLookup = std::function<const char*(const char*)>;

/// OAPA_LISTEN, OAPA_ONTOLOGY_DIR, OAPA_PROFILE_DIR, OAPA_QC_SUITE and
/// OAPA_<SECTION>_<KEY> (e.g. OAPA_WEIGHTS_GOAL) override file values.
inline void apply_env_overrides(EngineConfig& cfg, const EnvLookup& env = [](const char* k) { return std::getenv(k); }) {
  if (const char* v = env("OAPA_LISTEN")) cfg.listen_address = v;
  if (const char* v = env("OAPA_ONTOLOGY_DIR")) cfg.ontology_paths = {v};
  if (const char* v = env("OAPA_PROFILE_DIR")) cfg.profile_dir = v;
  if (const char* v = env("OAPA_QC_SUITE")) cfg.qc_suite = v;
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"cutpoints", "met_light_upper"}, {"cutpoints", "met_moderate_upper"}, {"cutpoints", "rpe_light_upper"},
      {"cutpoints", "rpe_moderate_upper"}, {"weights", "goal"}, {"weights", "intensity"},
      {"weights", "preference"}, {"weights", "barrier"}};
  for (const auto& [section, key] : keys) {
    std::string name = "OAPA_" + section + "_" + key;
    for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = env(name.c_str()))
      detail::set_config_key(cfg, section, key, detail::parse_value(v, name), name);
  }
}

/// The `.oapa` files named by the config; directories contribute their
/// `*.oapa` files in name order.
inline std::vector<std::string> ontology_files(const EngineConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& p : cfg.ontology_paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : std::filesystem::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".oapa") found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(p)) {
      out.push_back(p);
    } else {
      throw Error(ErrorCode::io_error, "ontology path " + p + " does not exist");
    }
  }
  return out;
}

/// Parses the files, derives intensity facts from MET values and merges.
inline KnowledgeBase load_knowledge_base(const std::vector<std::string>& files, const ExertionCutpoints& cutpoints) {
  std::vector<OntologyModule> mods;
  for (const auto& f : files) {
    OntologyModule m = parse_module_file(f);
    add_intensity_facts(m, cutpoints);
    mods.push_back(std::move(m));
  }
  return merge_modules(std::move(mods));
}

struct Snapshot {
  std::shared_ptr<const KnowledgeBase> kb;
  InferenceIndex index;
  std::uint64_t version = 0;
  std::chrono::system_clock::time_point loaded_at;
};

inline Snapshot build_snapshot(const EngineConfig& cfg, std::uint64_t version) {
  auto kb = std::make_shared<const KnowledgeBase>(load_knowledge_base(ontology_files(cfg), cfg.cutpoints));
  InferenceIndex index = reason(*kb);
  return Snapshot{std::move(kb), std::move(index), version, std::chrono::system_clock::now()};
}

/// Holds the live snapshot. Readers take a reference under a short lock and
/// keep using it after a reload replaces it; reloads run one at a time and
/// publish only fully built snapshots.
class SnapshotHolder {
 public:
  std::shared_ptr<const Snapshot> current() const {
    std::lock_guard lock(ptr_mutex_);
    return current_;
  }

  /// Builds version n+1 from `cfg` and swaps it in. On failure the previous
  /// snapshot stays live and the error propagates.
  std::shared_ptr<const Snapshot> reload(const EngineConfig& cfg) {
    std::lock_guard serial(reload_mutex_);
    auto next = std::make_shared<const Snapshot>(build_snapshot(cfg, last_version_ + 1));
    ++last_version_;
    publish(next);
    return next;
  }

  /// Publishes a prebuilt knowledge base as the next version.
  std::shared_ptr<const Snapshot> install(KnowledgeBase kb) {
    std::lock_guard serial(reload_mutex_);
    auto shared = std::make_shared<const KnowledgeBase>(std::move(kb));
    InferenceIndex index = reason(*shared);
    auto next = std::make_shared<const Snapshot>(
        Snapshot{std::move(shared), std::move(index), last_version_ + 1, std::chrono::system_clock::now()});
    ++last_version_;
    publish(next);
    return next;
  }

 private:
  void publish(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(ptr_mutex_);
    current_ = std::move(next);
  }

  mutable std::mutex ptr_mutex_;
  std::mutex reload_mutex_;
  std::shared_ptr<const Snapshot> current_;
  std::uint64_t last_version_ = 0;
};

/// First load of a fresh holder.
inline std::shared_ptr<const Snapshot> load_and_classify(SnapshotHolder& holder, const EngineConfig& cfg) {
  return holder.reload(cfg);
}

}  // namespace oapa
