#include "bolt/service.hpp"

#include <algorithm>
#include <random>

#include <httplib.h>

#include "bolt/journal.hpp"
#include "json_io.hpp"

namespace bolt::service {

using json_io::Json;

struct HistoryEntry {
  std::size_t step_index;
  Matrix query_points;
  Json observations;
  std::optional<double> best;
};

struct Session {
  std::string id;
  Json config_json;
  LoopConfig config;
  AskTellOptimizer optimizer;
  std::unique_ptr<JournalWriter> journal;
  std::vector<HistoryEntry> history;
  std::mutex mutex;

  Session(std::string id_, Json config_json_, LoopConfig config_)
      : id(std::move(id_)), config_json(std::move(config_json_)), config(config_), optimizer(std::move(config_)) {}
};

namespace {

Response json_response(int status, const Json& body) { return {status, json_io::dump(body)}; }

Response error_response(int status, const std::string& code, const std::string& message,
                        const std::optional<std::string>& field = std::nullopt) {
  Json body{{"code", code}, {"message", message}};
  body["field"] = field ? Json(*field) : Json(nullptr);
  return json_response(status, body);
}

int status_for(const Error& e) {
  if (dynamic_cast<const NotFoundError*>(&e)) return 404;
  if (dynamic_cast<const ConflictError*>(&e)) return 409;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const VersionError*>(&e))
    return 400;
  return 500;
}

std::filesystem::path journal_path(const std::filesystem::path& dir, const std::string& id) {
  return dir / (id + ".jsonl");
}

// One observation column per tag for the pending points.
TaggedDatasets observations_from_json(const Json& payload, const Matrix& pending, const std::vector<std::string>& tags) {
  if (!payload.is_object()) throw ValidationError("tell body must be a JSON object", "observations");
  const Json& obs = json_io::member(payload, "observations", "body");
  if (!obs.is_object()) throw ValidationError("observations must be an object keyed by tag", "observations");
  for (const auto& [tag, value] : obs.items())
    if (std::find(tags.begin(), tags.end(), tag) == tags.end())
      throw ValidationError("unexpected tag '" + tag + "'", "observations." + tag);
  TaggedDatasets::Map entries;
  for (const auto& tag : tags) {
    const std::string field = "observations." + tag;
    if (!obs.contains(tag)) throw ValidationError("observations are missing tag '" + tag + "'", field);
    const Json& column = obs[tag];
    if (!column.is_array()) throw ValidationError(field + " must be an array", field);
    if (column.size() != static_cast<std::size_t>(pending.rows()))
      throw ValidationError(field + " has " + std::to_string(column.size()) + " values but " +
                                std::to_string(pending.rows()) + " points were asked",
                            field);
    Matrix y(pending.rows(), 1);
    for (std::size_t i = 0; i < column.size(); ++i) {
      const std::string cell = field + "[" + std::to_string(i) + "]";
      const Json& v = column[i];
      if (v.is_array()) {
        if (v.size() != 1) throw ValidationError(cell + " must hold exactly one value", cell);
        y(static_cast<Eigen::Index>(i), 0) = json_io::number(v[0], cell);
      } else {
        y(static_cast<Eigen::Index>(i), 0) = json_io::number(v, cell);
      }
    }
    entries.emplace(tag, Dataset(pending, y));
  }
  return TaggedDatasets(std::move(entries));
}

Json best_json(const AskTellOptimizer& opt) {
  const auto best = opt.best_value();
  return best ? Json(*best) : Json(nullptr);
}

std::unique_ptr<Session> make_session(const std::string& id, const Json& config_json) {
  LoopConfig config = json_io::loop_config_from_json(config_json);
  return std::make_unique<Session>(id, config_json, std::move(config));
}

// Applies one journal event to a session; returns false for a `created` event.
void apply_event(Session& s, const Json& event, std::size_t line) {
  const std::string type = event.value("event", "");
  const std::string where = "journal line " + std::to_string(line);
  if (type == "asked") {
    const Matrix expected = json_io::matrix_from_json(json_io::member(event, "query_points", where), where,
                                                      s.config.space.dimension());
    const Matrix& got = s.optimizer.ask();
    if (got.rows() != expected.rows() || got != expected)
      throw ValidationError(where + ": replayed ask differs from the journal", "journal");
  } else if (type == "told") {
    if (!s.optimizer.record().pending_ask) throw ValidationError(where + ": tell without a pending ask", "journal");
    const Matrix pending = *s.optimizer.record().pending_ask;
    const auto obs = observations_from_json(event, pending, s.optimizer.tags());
    s.optimizer.tell(obs);
    s.history.push_back({s.optimizer.record().step_index, pending, event["observations"], s.optimizer.best_value()});
  } else if (type != "error") {
    throw ValidationError(where + ": unknown event '" + type + "'", "journal");
  }
}

std::unique_ptr<Session> replay(const std::filesystem::path& path) {
  const auto lines = read_journal(path);
  if (lines.empty()) throw NotFoundError("journal '" + path.string() + "' has no events");
  const Json created = json_io::parse(lines.front());
  if (created.value("event", "") != "created") throw ValidationError("journal must start with 'created'", "journal");
  auto session = make_session(json_io::string(json_io::member(created, "id", "journal"), "id"),
                              json_io::member(created, "config", "journal"));
  for (std::size_t i = 1; i < lines.size(); ++i) apply_event(*session, json_io::parse(lines[i]), i + 1);
  return session;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  const std::string clean = path.substr(0, path.find('?'));
  for (char c : clean) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(status_for(e), e.code(), e.what(), e.field());
  } catch (const std::exception& e) {
    return error_response(500, "internal_error", e.what());
  }
}

}  // namespace

std::string generate_session_id() {
  static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  std::random_device device;
  std::array<std::uint8_t, 16> bytes{};
  for (auto& b : bytes) b = static_cast<std::uint8_t>(device() & 0xFF);
  std::string id;
  std::uint32_t buffer = 0;
  int bits = 0;
  for (auto b : bytes) {
    buffer = (buffer << 8) | b;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      id.push_back(alphabet[(buffer >> bits) & 0x3F]);
    }
  }
  if (bits > 0) id.push_back(alphabet[(buffer << (6 - bits)) & 0x3F]);
  return id;
}

bool valid_session_id(const std::string& id) {
  return id.size() == 22 && std::all_of(id.begin(), id.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
         });
}

std::string replay_journal(const std::filesystem::path& journal) { return replay(journal)->optimizer.save(); }

SessionStore::SessionStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

SessionStore::~SessionStore() = default;

Session& SessionStore::find(const std::string& id) {
  if (!valid_session_id(id)) throw NotFoundError("no session '" + id + "'");
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it != sessions_.end()) return *it->second;
  const auto path = journal_path(directory_, id);
  if (!std::filesystem::exists(path)) throw NotFoundError("no session '" + id + "'");
  auto session = replay(path);
  session->journal = std::make_unique<JournalWriter>(path);
  return *sessions_.emplace(id, std::move(session)).first->second;
}

Response SessionStore::create(const std::string& body) {
  return guarded([&] {
    const Json config_json = json_io::parse(body);
    std::string id = generate_session_id();
    {
      std::lock_guard lock(mutex_);
      while (sessions_.contains(id) || std::filesystem::exists(journal_path(directory_, id))) id = generate_session_id();
    }
    auto session = make_session(id, config_json);
    const Json canonical = json_io::to_json(session->config);
    session->config_json = canonical;
    session->journal = std::make_unique<JournalWriter>(journal_path(directory_, id), true);
    session->journal->append(json_io::dump(Json{{"event", "created"}, {"id", id}, {"config", canonical}}));
    std::lock_guard lock(mutex_);
    sessions_.emplace(id, std::move(session));
    return json_response(201, Json{{"id", id}});
  });
}

Response SessionStore::ask(const std::string& id) {
  return guarded([&] {
    Session& s = find(id);
    std::lock_guard lock(s.mutex);
    if (!s.optimizer.record().pending_ask) {
      AskTellOptimizer next = s.optimizer;
      try {
        const Matrix& points = next.ask();
        s.journal->append(json_io::dump(Json{{"event", "asked"},
                                             {"step_index", next.record().step_index},
                                             {"query_points", json_io::to_json(points)}}));
      } catch (const Error& e) {
        s.journal->append(json_io::dump(Json{{"event", "error"}, {"code", e.code()}, {"message", e.what()}}));
        throw;
      }
      s.optimizer = std::move(next);
    }
    return json_response(200, Json{{"id", s.id},
                                   {"step_index", s.optimizer.record().step_index},
                                   {"tags", s.optimizer.tags()},
                                   {"query_points", json_io::to_json(*s.optimizer.record().pending_ask)}});
  });
}

Response SessionStore::tell(const std::string& id, const std::string& body) {
  return guarded([&] {
    Session& s = find(id);
    const Json payload = json_io::parse(body);
    std::lock_guard lock(s.mutex);
    const Record& current = s.optimizer.record();
    if (payload.is_object() && payload.contains("step_index")) {
      const auto claimed = json_io::unsigned_integer(payload["step_index"], "step_index");
      if (claimed != current.step_index)
        throw ConflictError("tell is for step " + std::to_string(claimed) + " but the session is at step " +
                            std::to_string(current.step_index));
    }
    if (!current.pending_ask) throw ConflictError("no pending ask; request /ask first");
    const Matrix pending = *current.pending_ask;
    const auto obs = observations_from_json(payload, pending, s.optimizer.tags());
    AskTellOptimizer next = s.optimizer;
    try {
      next.tell(obs);
    } catch (const FitFailure& e) {
      s.journal->append(json_io::dump(Json{{"event", "error"}, {"code", e.code()}, {"message", e.what()}}));
      throw;
    }
    s.journal->append(json_io::dump(
        Json{{"event", "told"}, {"step_index", current.step_index}, {"observations", payload["observations"]}}));
    s.optimizer = std::move(next);
    s.history.push_back({s.optimizer.record().step_index, pending, payload["observations"], s.optimizer.best_value()});
    return json_response(200, Json{{"id", s.id}, {"step_index", s.optimizer.record().step_index}, {"best", best_json(s.optimizer)}});
  });
}

Response SessionStore::state(const std::string& id) {
  return guarded([&] {
    Session& s = find(id);
    std::lock_guard lock(s.mutex);
    const Record& r = s.optimizer.record();
    Json models = Json::object();
    for (const auto& [tag, hp] : r.models) models[tag] = json_io::to_json(hp);
    return json_response(200, Json{{"id", s.id},
                                   {"config", s.config_json},
                                   {"status", r.pending_ask ? "awaiting_tell" : "ready"},
                                   {"step_index", r.step_index},
                                   {"tags", s.optimizer.tags()},
                                   {"best", best_json(s.optimizer)},
                                   {"models", std::move(models)},
                                   {"record", json_io::parse(s.optimizer.save())}});
  });
}

Response SessionStore::history(const std::string& id) {
  return guarded([&] {
    Session& s = find(id);
    std::lock_guard lock(s.mutex);
    Json steps = Json::array();
    for (const auto& h : s.history) {
      Json entry{{"step_index", h.step_index}, {"query_points", json_io::to_json(h.query_points)}, {"observations", h.observations}};
      entry["best_so_far"] = h.best ? Json(*h.best) : Json(nullptr);
      steps.push_back(std::move(entry));
    }
    return json_response(200, Json{{"id", s.id}, {"steps", std::move(steps)}});
  });
}

Response SessionStore::handle(const std::string& method, const std::string& path, const std::string& body) {
  const auto parts = split_path(path);
  if (parts.empty() || parts[0] != "sessions") return error_response(404, "not_found", "no route for " + path);
  if (parts.size() == 1) {
    if (method == "POST") return create(body);
    return error_response(405, "method_not_allowed", method + " is not supported on /sessions");
  }
  if (parts.size() != 3) return error_response(404, "not_found", "no route for " + path);
  const std::string& id = parts[1];
  const std::string& action = parts[2];
  if (action == "ask" && method == "GET") return ask(id);
  if (action == "tell" && method == "POST") return tell(id, body);
  if (action == "state" && method == "GET") return state(id);
  if (action == "history" && method == "GET") return history(id);
  if (action == "ask" || action == "tell" || action == "state" || action == "history")
    return error_response(405, "method_not_allowed", method + " is not supported on /" + action);
  return error_response(404, "not_found", "no route for " + path);
}

struct HttpServer::Impl {
  SessionStore& store;
  httplib::Server server;
  explicit Impl(SessionStore& s) : store(s) {}
};

HttpServer::HttpServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = impl_->store.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                     {"Access-Control-Allow-Headers", "Content-Type"},
                                     {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  impl_->server.Get(".*", route);
  impl_->server.Post(".*", route);
  impl_->server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("io_error", "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("io_error", "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace bolt::service
