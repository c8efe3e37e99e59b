#pragma once

// HTTP/JSON front end. Every response is an envelope carrying the version of
// the snapshot that produced it: {version, data} or {version, error}.

#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "oapa/dsl.hpp"
#include "oapa/engine.hpp"
#include "oapa/profile.hpp"
#include "oapa/qc.hpp"
#include "oapa/suggester.hpp"
#include "oapa/wire.hpp"

namespace oapa {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_profile: return 404;
    case ErrorCode::io_error:
    case ErrorCode::config_error: return 500;
    default: return 400;
  }
}

class Service {
 public:
  explicit Service(EngineConfig cfg)
      : cfg_(std::move(cfg)),
        store_(cfg_.profile_dir.empty() ? ProfileStore() : ProfileStore(cfg_.profile_dir)) {
    cfg_.validate();
    holder_.reload(cfg_);
    register_routes();
  }

  SnapshotHolder& snapshots() { return holder_; }
  ProfileStore& profiles() { return store_; }
  httplib::Server& server() { return server_; }

  /// Blocks until stop() is called.
  bool listen() {
    auto [host, port] = EngineConfig::split_listen_address(cfg_.listen_address);
    return server_.listen(host, port);
  }

  /// Binds an ephemeral port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1") {
    int port = server_.bind_to_any_port(host);
    if (port <= 0) throw Error(ErrorCode::io_error, "cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  ~Service() { stop(); }

 private:
  using json = nlohmann::json;

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void ok(httplib::Response& res, const Snapshot& snap, json data) {
    send(res, 200, {{"version", snap.version}, {"data", std::move(data)}});
  }

  static void fail(httplib::Response& res, std::uint64_t version, int status, const std::string& code,
                   const std::string& message, json extra = json::object()) {
    json err = {{"code", code}, {"message", message}};
    err.update(extra);
    send(res, status, {{"version", version}, {"error", err}});
  }

  static void fail(httplib::Response& res, std::uint64_t version, const Error& e) {
    send(res, http_status(e.code()), {{"version", version}, {"error", wire::error(e)}});
  }

  static json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::syntax_error, std::string("request body is not JSON: ") + e.what());
    }
  }

  /// Runs `fn` against the current snapshot, mapping library errors to envelopes.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      auto snap = holder_.current();
      try {
        fn(req, res, *snap);
      } catch (const Error& e) {
        fail(res, snap->version, e);
      } catch (const std::exception& e) {
        fail(res, snap->version, 500, "Internal", e.what());
      }
    };
  }

  PersonProfile require_profile(const std::string& id) const {
    auto p = store_.find(id);
    if (!p) throw Error(ErrorCode::unknown_profile, "no profile '" + id + "'");
    return *p;
  }

  void register_routes() {
    server_.Post("/reload", [this](const httplib::Request&, httplib::Response& res) {
      auto before = holder_.current();
      try {
        auto snap = holder_.reload(cfg_);
        ok(res, *snap, wire::stats(stats(*snap->kb)));
      } catch (const Error& e) {
        fail(res, before->version, e);
      } catch (const std::exception& e) {
        fail(res, before->version, 500, "Internal", e.what());
      }
    });

    server_.Get("/stats", guarded([](const httplib::Request&, httplib::Response& res, const Snapshot& snap) {
      ok(res, snap, wire::stats(stats(*snap.kb)));
    }));

    server_.Get("/classes", guarded([](const httplib::Request& req, httplib::Response& res, const Snapshot& snap) {
      std::string under = req.has_param("under") ? req.get_param_value("under") : "Thing";
      auto expr = parse_query(under, "under").root;
      ok(res, snap, wire::entities(*snap.kb, subclasses_of(*snap.kb, snap.index, expr)));
    }));

    server_.Post("/query", guarded([](const httplib::Request& req, httplib::Response& res, const Snapshot& snap) {
      json body = parse_body(req);
      if (!body.contains("expr") || !body["expr"].is_string())
        throw Error(ErrorCode::syntax_error, "body must be {\"expr\": \"...\"}");
      auto expr = parse_query(body["expr"].get<std::string>(), "expr").root;
      ok(res, snap, wire::ids(instances_of(*snap.kb, snap.index, expr)));
    }));

    server_.Put(R"(/profiles/([A-Za-z_][A-Za-z0-9_]*))",
                guarded([this](const httplib::Request& req, httplib::Response& res, const Snapshot& snap) {
                  json body = parse_body(req);
                  const std::string id = req.matches[1];
                  if (body.is_object() && !body.contains("id")) body["id"] = id;
                  PersonProfile p = profile_from_json(body);
                  if (p.id != id) throw Error(ErrorCode::validation_failed, "/id: does not match the URL");
                  auto diags = validate_profile(p, *snap.kb);
                  if (!diags.empty()) {
                    json list = json::array();
                    for (const auto& d : diags)
                      list.push_back({{"code", d.code}, {"path", d.path}, {"message", d.message}});
                    fail(res, snap.version, 400, "ValidationFailed", diags.front().path + ": " + diags.front().message,
                         {{"diagnostics", list}});
                    return;
                  }
                  store_.put(p);
                  ok(res, snap, json(p));
                }));

    server_.Get(R"(/profiles/([A-Za-z_][A-Za-z0-9_]*))",
                guarded([this](const httplib::Request& req, httplib::Response& res, const Snapshot& snap) {
                  ok(res, snap, json(require_profile(req.matches[1])));
                }));

    server_.Get(R"(/profiles/([A-Za-z_][A-Za-z0-9_]*)/inferences)",
                guarded([this](const httplib::Request& req, httplib::Response& res, const Snapshot& snap) {
                  auto p = require_profile(req.matches[1]);
                  ok(res, snap, wire::entities(*snap.kb, profile_inferences(*snap.kb, p)));
                }));

    server_.Post(R"(/profiles/([A-Za-z_][A-Za-z0-9_]*)/suggestions)",
                 guarded([this](const httplib::Request& req, httplib::Response& res, const Snapshot& snap) {
                   json body = parse_body(req);
                   if (body.contains("version") && body["version"] != snap.version) {
                     fail(res, snap.version, 409, "StaleVersion",
                          "request was prepared against version " + body["version"].dump());
                     return;
                   }
                   auto p = require_profile(req.matches[1]);
                   Overrides o = wire::overrides_from_json(body.value("overrides", json()));
                   ok(res, snap, wire::suggestions(*snap.kb, suggest_for(*snap.kb, snap.index, p, o, cfg_.weights)));
                 }));

    server_.Get("/qc", guarded([this](const httplib::Request&, httplib::Response& res, const Snapshot& snap) {
      ok(res, snap, describe_suite(load_suite(cfg_.qc_suite)));
    }));

    server_.Post("/qc/run", guarded([this](const httplib::Request&, httplib::Response& res, const Snapshot& snap) {
      ok(res, snap, to_json(run_suite(*snap.kb, snap.index, load_suite(cfg_.qc_suite), cfg_.weights)));
    }));

    server_.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      auto snap = holder_.current();
      std::uint64_t v = snap ? snap->version : 0;
      if (res.status == 404) fail(res, v, 404, "NotFound", "no such resource");
      else if (res.status >= 400) fail(res, v, res.status, "HttpError", "request failed");
    });
  }

  EngineConfig cfg_;
  SnapshotHolder holder_;
  ProfileStore store_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace oapa
