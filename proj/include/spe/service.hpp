#pragma once

#include <chrono>
#include <memory>
#include <string>

namespace spe {

struct ServiceOptions {
  /// When non-empty every request must carry "Authorization: Bearer <token>".
  std::string token;
  /// When non-empty, models and sessions are written here after every change
  /// and reloaded on start.
  std::string storeDirectory;
  /// Requests whose solver work takes longer answer 202 with a job URL.
  std::chrono::milliseconds syncBudget{2000};
};

/// HTTP/JSON facade under /api/v1.
///
///   POST /models                               upload a model document
///   GET  /models/{id}
///   POST /models/{id}/analysis?solver=&seed=
///   GET  /models/{id}/antipatterns?thresholds=  thresholds: detection JSON
///   POST /sessions                             {"model": id, "options"?}
///   GET  /sessions/{id}/tree
///   GET  /sessions/{id}/nodes/{nid}
///   POST /sessions/{id}/nodes/{nid}/expand     {"actionId"?, "action"}
///   POST /sessions/{id}/cursor                 {"node": nid}
///   GET  /sessions/{id}/ledger
///   GET  /sessions/{id}/nodes/{nid}/qn
///   POST /sessions/{id}/nodes/{nid}/qn-edits   {"actionId"?, "edits"}
///   GET  /sessions/{id}/nodes/{nid}/antipatterns
///   GET  /sessions/{id}/nodes/{nid}/model      exported software model
///   POST /sessions/{id}/nodes/{nid}/export     same, recorded in the ledger
///   GET  /jobs/{id}
///
/// Errors answer {"error": {"code", "message", "pointer"?}} with 400 for
/// malformed requests, 401 for a missing token, 404 for unknown ids, 409 for
/// frozen elements and edits without a software counterpart, and 422 for
/// everything the solver or the refactorings reject.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to `host`:`port` (0 picks a free port) and returns the port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace spe
