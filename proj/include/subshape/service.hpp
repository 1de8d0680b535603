#pragma once

// Session-scoped request handling for the explorer. The router is transport
// independent; the server binary adapts it to HTTP.
//
//   POST   /sessions?label_column=NAME       body: delimited table -> {"session_id"}
//   GET    /sessions/{id}/projection
//   GET    /sessions/{id}/scene              payload for the active mode
//   POST   /sessions/{id}/rotation           {"rotation": [[3],[3],[3]]}
//   POST   /sessions/{id}/transition         {"slot": "u"|"v"|"w", "dimension": d, "t": t}
//   POST   /sessions/{id}/params             partial SceneParams
//   POST   /sessions/{id}/mode               {"mode": "scatter"|"shape"|"combo"}
//   POST   /sessions/{id}/rebuild
//   POST   /sessions/{id}/brush              {"cluster", "triangles", "new_cluster", "color"}
//   POST   /sessions/{id}/restore-previous
//   DELETE /sessions/{id}

#include "subshape/scene.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

namespace subshape {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class Service {
public:
  explicit Service(SceneParams defaults = {}) : defaults_(defaults) {}

  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body,
                     const std::map<std::string, std::string>& query = {});

  std::size_t session_count() const;

private:
  struct Session {
    mutable std::shared_mutex mutex;  // one writer, many readers
    SceneState state;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string create(std::string_view table, const std::map<std::string, std::string>& query);
  ApiResponse dispatch(Session& session, std::string_view method, const std::string& action, std::string_view body);

  SceneParams defaults_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace subshape
