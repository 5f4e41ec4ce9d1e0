#include "bnmt/service/server.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "bnmt/common/error.hpp"
#include "bnmt/policy/feedback_log.hpp"
#include "bnmt/ratings/jsonl.hpp"

namespace bnmt::service {

using nlohmann::json;

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read service config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw DataError("service config: " + std::string(e.what()));
  }
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  auto opt_path = [&](const char* key) -> std::optional<std::filesystem::path> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return resolve(j[key].get<std::string>());
  };
  ServiceConfig c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.log = resolve(j.at("log").get<std::string>());
    c.items = opt_path("items");
    c.pairs = opt_path("pairs");
    c.cardinal_plan = opt_path("cardinal_plan");
    c.pairwise_plan = opt_path("pairwise_plan");
    c.static_dir = opt_path("static_dir");
    c.admin_token = j.value("admin_token", "");
    for (const auto& r : j.at("raters")) {
      RaterSpec s;
      s.id = r.at("id").get<std::string>();
      s.token = r.at("token").get<std::string>();
      s.task_kind = ratings::parse_task_kind(r.at("task").get<std::string>());
      if (r.contains("order_seed")) s.order_seed = r["order_seed"].get<std::uint64_t>();
      c.raters.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DataError("service config: " + std::string(e.what()));
  }
  return c;
}

StoreContent load_content(const ServiceConfig& cfg) {
  StoreContent c;
  auto open = [](const std::filesystem::path& p) {
    std::ifstream is(p);
    if (!is) throw UsageError("cannot read " + p.string());
    return is;
  };
  if (cfg.items) {
    auto is = open(*cfg.items);
    c.items = ratings::import_items(is);
  }
  if (cfg.pairs) {
    auto is = open(*cfg.pairs);
    c.pairs = ratings::import_pairs(is);
  }
  if (cfg.cardinal_plan) {
    auto is = open(*cfg.cardinal_plan);
    c.cardinal_plan = ratings::import_plan(is);
  }
  if (cfg.pairwise_plan) {
    auto is = open(*cfg.pairwise_plan);
    c.pairwise_plan = ratings::import_plan(is);
  }
  c.raters = cfg.raters;
  return c;
}

namespace {

json assignment_json(const std::string& rater, const Assignment& a) {
  json j;
  j["done"] = false;
  j["rater_id"] = rater;
  j["task_kind"] = std::string(ratings::to_string(a.task_kind));
  j["assignment_id"] = a.entry.id;
  j["occurrence"] = a.entry.occurrence;
  j["section"] = a.entry.section;
  j["position"] = a.entry.position;
  j["index"] = a.entry.index;
  j["total"] = a.total;
  if (a.item) {
    j["source"] = detokenize(a.item->source);
    j["target"] = detokenize(a.item->target);
  } else {
    j["source"] = detokenize(a.pair->source);
    j["target_a"] = detokenize(a.pair->target_a);
    j["target_b"] = detokenize(a.pair->target_b);
  }
  return j;
}

json progress_json(const Progress& p) {
  return json{{"completed", p.completed}, {"total", p.total}, {"section", p.section}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, json{{"error", msg}});
}

// Maps store exceptions onto HTTP status codes.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const AuthError& e) {
    send_error(res, 401, e.what());
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const DuplicateError& e) {
    send_error(res, 409, e.what());
  } catch (const ValidationError& e) {
    send_error(res, 422, e.what());
  } catch (const DataError& e) {
    send_error(res, 422, e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

struct Server::Impl {
  Impl(FeedbackStore& s, std::string token) : store(s), admin_token(std::move(token)) {}

  FeedbackStore& store;
  std::string admin_token;
  httplib::Server http;

  void check_admin(const httplib::Request& req) const {
    if (!admin_token.empty() && req.get_header_value("X-Admin-Token") != admin_token) {
      throw AuthError("admin token required");
    }
  }
};

Server::Server(FeedbackStore& store, std::string admin_token,
               std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store, std::move(admin_token))) {
  auto& http = impl_->http;
  Impl* self = impl_.get();

  http.Get(R"(/api/session/([^/]+)/next)", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string rater = req.matches[1];
      self->store.authenticate(rater, req.get_header_value("X-Rater-Token"));
      const auto a = self->store.next_task(rater);
      if (!a) {
        const auto s = self->store.session(rater);
        const auto p = self->store.progress(rater);
        send_json(res, 200,
                  json{{"done", true},
                       {"rater_id", rater},
                       {"completed", p.completed},
                       {"total", p.total},
                       {"difficulty_pending", !s.difficulty.has_value()}});
        return;
      }
      send_json(res, 200, assignment_json(rater, *a));
    });
  });

  http.Post("/api/ratings", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = json::parse(req.body);
      const auto rater = body.at("rater_id").get<std::string>();
      self->store.authenticate(rater, req.get_header_value("X-Rater-Token"));
      auto record = ratings::rating_from_json(req.body);
      if (record.timestamp_ms == 0) {
        record.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::system_clock::now().time_since_epoch())
                                  .count();
      }
      self->store.submit(record);
      send_json(res, 200, json{{"ok", true}, {"progress", progress_json(self->store.progress(rater))}});
    });
  });

  http.Get(R"(/api/session/([^/]+)/progress)", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string rater = req.matches[1];
      self->store.authenticate(rater, req.get_header_value("X-Rater-Token"));
      send_json(res, 200, progress_json(self->store.progress(rater)));
    });
  });

  http.Post(R"(/api/session/([^/]+)/difficulty)", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string rater = req.matches[1];
      self->store.authenticate(rater, req.get_header_value("X-Rater-Token"));
      const auto body = json::parse(req.body);
      self->store.set_difficulty(rater, body.at("score").get<int>());
      send_json(res, 200, json{{"ok", true}});
    });
  });

  http.Get("/api/export/matrix", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      self->check_admin(req);
      const auto kind = ratings::parse_task_kind(req.get_param_value("task"));
      const auto m = self->store.export_matrix(kind);
      json obs = json::array();
      for (const auto& o : m.observations()) {
        obs.push_back({{"rater", m.raters()[o.rater]}, {"unit", m.units()[o.unit]}, {"value", o.value}});
      }
      send_json(res, 200,
                json{{"task_kind", std::string(ratings::to_string(kind))},
                     {"scale", kind == ratings::TaskKind::cardinal ? "interval" : "ordinal"},
                     {"raters", m.raters()},
                     {"units", m.units()},
                     {"observations", obs}});
    });
  });

  http.Get("/api/export/log", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      self->check_admin(req);
      std::ostringstream os;
      policy::export_log(os, self->store.export_feedback_log());
      res.set_content(os.str(), "application/x-ndjson");
    });
  });

  http.Get("/api/export/ratings", [self](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      self->check_admin(req);
      std::ostringstream os;
      ratings::export_jsonl(os, self->store.records());
      res.set_content(os.str(), "application/x-ndjson");
    });
  });

  if (static_dir) http.set_mount_point("/", static_dir->string());
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->http.bind_to_any_port(host);
    if (p < 0) throw UsageError("cannot bind " + host);
    return p;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    throw UsageError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace bnmt::service
