#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "infdiag/diagram.hpp"
#include "infdiag/evidence.hpp"
#include "infdiag/valuation.hpp"

namespace httplib {
class Server;
}

namespace infdiag {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// In-memory analysis sessions. The current diagram of a session is always the
/// pristine diagram with its evidence log replayed. Requests on one session are
/// serialized; distinct sessions proceed in parallel.
class SessionService {
 public:
  using Query = std::multimap<std::string, std::string>;

  /// Routes one /v1 request. Never throws; failures become {code, message, details}.
  ApiResponse handle(const std::string& method, const std::string& path, const Query& query,
                     const std::string& body);

  /// Every session's pristine diagram, joints and evidence log.
  nlohmann::json snapshot() const;
  /// Replaces all sessions with those of a snapshot.
  void restore(const nlohmann::json& snapshot);

  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    Diagram pristine;
    std::map<std::string, JointConditionalTable> joints;
    std::vector<Evidence> log;
    Diagram current;
    double baseline_ev = 0.0;
    double current_ev = 0.0;
    mutable std::mutex mutex;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string next_id();
  std::shared_ptr<Session> build(std::string id, const nlohmann::json& document) const;

  ApiResponse create(const std::string& body);
  ApiResponse summary(const Session& s) const;
  ApiResponse diagram(const Session& s) const;
  ApiResponse evaluate(const Session& s) const;
  ApiResponse apply(Session& s, const std::string& body);
  ApiResponse retract(Session& s, const std::string& node);
  ApiResponse reset(Session& s);
  ApiResponse metrics(const Session& s, const Query& query) const;
  ApiResponse bench(const Session& s, const Query& query) const;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Serves every /v1 route of `service` on `server`.
void mount(httplib::Server& server, SessionService& service);

}  // namespace infdiag
