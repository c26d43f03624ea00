#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "formsense/session.hpp"

namespace httplib {
class Server;
}

namespace formsense {

/// File-backed sessions, one `<dir>/<id>/session.json` each. Mutations of one
/// session are serialised by that session's lock and persisted before the lock
/// is released; different sessions never share a lock.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  /// Creates a session; without an id, the next free `sNNNN` is used.
  std::string create(std::optional<std::string> id, std::vector<Product> products);
  Session get(const std::string& id) const;
  /// Applies `change` under the session lock and persists the result. If
  /// `change` throws, the stored session is left untouched.
  void update(const std::string& id, const std::function<void(Session&)>& change);
  std::vector<std::string> ids() const;

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
  };
  std::shared_ptr<Entry> find(const std::string& id) const;
  void persist(const Session& s) const;

  std::filesystem::path dir_;
  mutable std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  int next_id_ = 1;
};

struct ServiceConfig {
  std::filesystem::path data_dir = "sessions";
  std::filesystem::path fixture_dir;            // product catalogue, template and reference model
  std::optional<std::filesystem::path> static_dir;
};

/// Registers every endpoint on `server`. The store must outlive the server.
void install_routes(httplib::Server& server, SessionStore& store, const ServiceConfig& config);

/// Blocks serving on host:port.
int run_service(const std::string& host, int port, const ServiceConfig& config);

}  // namespace formsense
