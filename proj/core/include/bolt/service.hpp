#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "bolt/loop.hpp"

namespace bolt::service {

struct Response {
  int status = 200;
  std::string body;  // JSON
};

// 22-character URL-safe id from 128 random bits.
std::string generate_session_id();
bool valid_session_id(const std::string& id);

struct Session;

// Sessions keyed by id, each backed by `<directory>/<id>.jsonl`. Sessions not
// in memory are rebuilt by replaying their journal on first access.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path directory);
  ~SessionStore();

  // Routes POST /sessions, GET /sessions/{id}/ask, POST /sessions/{id}/tell,
  // GET /sessions/{id}/state and GET /sessions/{id}/history.
  Response handle(const std::string& method, const std::string& path, const std::string& body);

  Response create(const std::string& body);
  Response ask(const std::string& id);
  Response tell(const std::string& id, const std::string& body);
  Response state(const std::string& id);
  Response history(const std::string& id);

  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  Session& find(const std::string& id);

  std::filesystem::path directory_;
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

// Serialized loop Record a journal folds to; throws on a malformed journal.
std::string replay_journal(const std::filesystem::path& journal);

// Blocking HTTP front end for a store.
class HttpServer {
 public:
  explicit HttpServer(SessionStore& store);
  ~HttpServer();

  // Binds to host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bolt::service
