#pragma once

// HTTP/JSON front door over a catalog snapshot and an in-memory session
// table.
//
//   POST /ingest                    PPCO XML body -> {items, relationships}
//   GET  /viewpoints                [{order, id, actor, context, importance, domain_size}]
//   POST /viewpoints                spec JSON -> 201 summary
//   POST /mappings/mine             {source_vp, target_vp, min_confidence} -> mapping
//   POST /sessions                  {actor, viewpoints[]} -> {session_id}
//   POST /sessions/{id}/query       {terms[], k?, filters?} -> merged result
//   POST /sessions/{id}/transition  {target_vp, anchor?} -> translated query
//   GET  /sessions/{id}             session with history
//   GET  /items/{id}                item with its relationships
//
// Errors are {"error": <code>, "message": <text>}.
//
// The catalog snapshot is immutable and swapped whole on mutation; a
// session keeps the snapshot it was opened on. Each session has its own
// lock, so steps of one session are serialized while distinct sessions run
// concurrently.

#include <httplib.h>
#include <sys/socket.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "vlens/catalog.hpp"
#include "vlens/error.hpp"
#include "vlens/ingest.hpp"
#include "vlens/json_io.hpp"
#include "vlens/orchestrator.hpp"

namespace vlens {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownActor:
    case ErrorCode::UnknownViewpoint:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownItem:
      return 404;
    case ErrorCode::InvalidQuery:
    case ErrorCode::InvalidArgument:
      return 400;
    case ErrorCode::AnchorNotInLastResult:
    case ErrorCode::NoQueryInSession:
    case ErrorCode::NotInIntersection:
      return 409;
    case ErrorCode::IoError:
    case ErrorCode::PortInUse:
      return 500;
    default:
      return 422;
  }
}

class Service {
 public:
  explicit Service(Catalog catalog, std::optional<std::filesystem::path> catalog_path = std::nullopt,
                   Clock clock = system_clock_ms)
      : snapshot_(std::make_shared<const Catalog>(std::move(catalog))),
        catalog_path_(std::move(catalog_path)),
        clock_(std::move(clock)) {
    // SO_REUSEPORT would let a second server bind a busy port silently.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::shared_ptr<const Catalog> snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return snapshot_;
  }

  /// Throws PortInUse.
  void bind(const std::string& host, int port) {
    if (!server_.bind_to_port(host, port))
      throw Error(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
  }

  /// Binds an ephemeral port and returns it.
  int bind_any(const std::string& host = "127.0.0.1") {
    int port = server_.bind_to_any_port(host);
    if (port < 0) throw Error(ErrorCode::PortInUse, "cannot bind any port on " + host);
    return port;
  }

  /// Blocks until stop().
  void listen() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  struct SessionSlot {
    std::mutex mu;
    Session session;
  };

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send(httplib::Response& res, int status, const json_io::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
      try {
        inner(req, res);
      } catch (const Error& e) {
        send(res, http_status(e.code()), json_io::error_body(e));
      } catch (const json_io::json::exception& e) {
        send(res, 400, {{"error", "InvalidArgument"}, {"message", e.what()}});
      } catch (const std::exception& e) {
        send(res, 500, {{"error", "Internal"}, {"message", e.what()}});
      }
    };
  }

  static json_io::json body_json(const httplib::Request& req) {
    return json_io::json::parse(req.body);
  }

  std::shared_ptr<SessionSlot> session(const std::string& id) {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
      throw Error(ErrorCode::UnknownSession, "no session '" + id + "'", {id});
    return it->second;
  }

  // Writers serialize on write_mu_, build the next catalog, persist it, and
  // only then publish it.
  template <typename Fn>
  std::shared_ptr<const Catalog> update_catalog(Fn&& fn) {
    std::lock_guard write(write_mu_);
    auto next = std::make_shared<const Catalog>(fn(*snapshot()));
    if (catalog_path_) save_catalog(*next, *catalog_path_);
    std::lock_guard lock(snapshot_mu_);
    snapshot_ = next;
    return next;
  }

  void routes() {
    server_.Post("/ingest", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto graph = parse_ppco(req.body);
      update_catalog([&](const Catalog& c) {
        try {
          return c.with_graph(graph);
        } catch (const Error& e) {
          throw Error::schema_violation("/catalog", e.what());
        }
      });
      send(res, 200, {{"items", graph.items().size()},
                      {"relationships", graph.relationships().size()}});
    }));

    server_.Get("/viewpoints", guarded([this](const httplib::Request&, httplib::Response& res) {
      auto snap = snapshot();
      auto out = json_io::json::array();
      std::size_t order = 0;
      for (const auto& [id, vp] : snap->viewpoints()) out.push_back(json_io::viewpoint_summary(vp, ++order));
      send(res, 200, out);
    }));

    server_.Post("/viewpoints", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto spec = json_io::viewpoint_spec_from_json(body_json(req));
      auto snap = update_catalog([&](const Catalog& c) { return c.with_viewpoint(spec); });
      const auto& vp = snap->viewpoint(spec.id);
      auto body = json_io::viewpoint_summary(vp, 0);
      body.erase("order");
      body["warnings"] = vp.warnings();
      send(res, 201, body);
    }));

    server_.Post("/mappings/mine", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = body_json(req);
      auto source = json_io::require_string(body, "source_vp");
      auto target = json_io::require_string(body, "target_vp");
      auto min_conf = json_io::optional_number(body, "min_confidence");
      if (!min_conf) throw Error(ErrorCode::InvalidArgument, "missing field 'min_confidence'");
      std::optional<TransitionMapping> mined;
      update_catalog([&](const Catalog& c) {
        mined = mine_mappings(c.viewpoint(source), c.viewpoint(target), *min_conf);
        return c.with_mapping(*mined);
      });
      send(res, 200, json_io::to_json(*mined));
    }));

    server_.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto body = body_json(req);
      auto actor = json_io::require_string(body, "actor");
      auto viewpoints = json_io::require_strings(body, "viewpoints");
      std::lock_guard lock(sessions_mu_);
      std::string id = "s" + std::to_string(next_session_ + 1);
      auto slot = std::shared_ptr<SessionSlot>(
          new SessionSlot{{}, open_session(id, snapshot(), actor, viewpoints, clock_)});
      ++next_session_;
      sessions_.emplace(id, std::move(slot));
      send(res, 201, {{"session_id", id}});
    }));

    server_.Post(R"(/sessions/([^/]+)/query)",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   auto slot = session(req.matches[1]);
                   auto body = body_json(req);
                   auto query = json_io::query_from_json(body);
                   std::optional<std::size_t> k;
                   if (body.contains("k")) {
                     const auto& kj = body.at("k");
                     if (!kj.is_number_integer() || kj.get<long long>() < 1)
                       throw Error(ErrorCode::InvalidArgument, "'k' must be a positive integer");
                     k = kj.get<std::size_t>();
                   }
                   std::lock_guard lock(slot->mu);
                   send(res, 200, json_io::to_json(slot->session.submit_query(query, k)));
                 }));

    server_.Post(R"(/sessions/([^/]+)/transition)",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   auto slot = session(req.matches[1]);
                   auto body = body_json(req);
                   auto target = json_io::require_string(body, "target_vp");
                   std::optional<ItemId> anchor;
                   if (body.contains("anchor") && !body.at("anchor").is_null())
                     anchor = json_io::require_string(body, "anchor");
                   std::lock_guard lock(slot->mu);
                   send(res, 200, json_io::to_json(slot->session.transition(target, anchor)));
                 }));

    server_.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto slot = session(req.matches[1]);
      std::lock_guard lock(slot->mu);
      send(res, 200, json_io::to_json(slot->session));
    }));

    server_.Get(R"(/items/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto snap = snapshot();
      std::string id = req.matches[1];
      auto body = json_io::to_json(snap->graph().at(id));
      auto rels = json_io::json::array();
      for (const auto& r : snap->graph().relationships_of(id)) rels.push_back(json_io::to_json(r));
      body["relationships"] = rels;
      send(res, 200, body);
    }));
  }

  httplib::Server server_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Catalog> snapshot_;
  std::mutex write_mu_;
  std::optional<std::filesystem::path> catalog_path_;
  Clock clock_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
  std::size_t next_session_ = 0;
};

/// Runs the service until stopped. Throws PortInUse.
inline void serve(Catalog catalog, int port, std::optional<std::filesystem::path> catalog_path = std::nullopt,
                  const std::string& host = "0.0.0.0") {
  Service service(std::move(catalog), std::move(catalog_path));
  service.bind(host, port);
  service.listen();
}

}  // namespace vlens
