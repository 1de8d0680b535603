#include "subshape/service.hpp"

#include "subshape/error.hpp"
#include "subshape/wire.hpp"

#include <random>

namespace subshape {

namespace {

struct HttpError : Error {
  HttpError(int status, const std::string& what) : Error(what), status(status) {}
  int status;
};

ApiResponse json_response(int status, const nlohmann::json& body) { return {status, body.dump(), "application/json"}; }

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

nlohmann::json parse_body(std::string_view body) {
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw HttpError(400, "request body must be a JSON object");
  return doc;
}

Slot parse_slot(const std::string& s) {
  if (s == "u") return Slot::U;
  if (s == "v") return Slot::V;
  if (s == "w") return Slot::W;
  throw HttpError(400, "slot must be one of u, v, w");
}

Eigen::Vector3d parse_color(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw HttpError(400, "color must be an [r, g, b] array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::size_t Service::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<Service::Session> Service::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError(404, "unknown session '" + id + "'");
  return it->second;
}

std::string Service::create(std::string_view table, const std::map<std::string, std::string>& query) {
  std::optional<std::string> label_column;
  if (const auto it = query.find("label_column"); it != query.end() && !it->second.empty()) label_column = it->second;
  auto session = std::make_shared<Session>();
  session->state = make_scene_state(load_table(table, label_column), defaults_);

  std::lock_guard lock(sessions_mutex_);
  std::random_device rd;
  const std::string id = std::to_string(next_id_++) + "-" + std::to_string(rd() & 0xffffff);
  sessions_.emplace(id, std::move(session));
  return id;
}

ApiResponse Service::handle(std::string_view method, std::string_view path, std::string_view body,
                            const std::map<std::string, std::string>& query) {
  try {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos < path.size()) {
      if (path[pos] == '/') {
        ++pos;
        continue;
      }
      const std::size_t next = path.find('/', pos);
      parts.emplace_back(path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
      pos = next == std::string_view::npos ? path.size() : next;
    }
    if (parts.empty() || parts[0] != "sessions") return error_response(404, "not found");
    if (parts.size() == 1) {
      if (method != "POST") return error_response(405, "method not allowed");
      return json_response(201, {{"session_id", create(body, query)}});
    }
    if (parts.size() == 2 && method == "DELETE") {
      std::lock_guard lock(sessions_mutex_);
      if (sessions_.erase(parts[1]) == 0) return error_response(404, "unknown session '" + parts[1] + "'");
      return json_response(200, {{"deleted", parts[1]}});
    }
    if (parts.size() != 3) return error_response(404, "not found");
    const auto session = find(parts[1]);
    return dispatch(*session, method, parts[2], body);
  } catch (const HttpError& e) {
    return error_response(e.status, e.what());
  } catch (const StageError& e) {
    return json_response(500, {{"error", e.what()}, {"stage", e.stage()}});
  } catch (const Error& e) {
    return error_response(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("malformed payload: ") + e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ApiResponse Service::dispatch(Session& session, std::string_view method, const std::string& action,
                              std::string_view body) {
  if (method == "GET") {
    std::shared_lock lock(session.mutex);
    if (action == "projection") return json_response(200, projection_payload(session.state));
    if (action == "scene") return json_response(200, mode_payload(session.state));
    if (action == "params") return json_response(200, params_to_json(session.state.params));
    throw HttpError(404, "unknown resource '" + action + "'");
  }
  if (method != "POST") throw HttpError(405, "method not allowed");

  std::unique_lock lock(session.mutex);
  SceneState& state = session.state;
  if (action == "rotation") {
    const auto doc = parse_body(body);
    const auto& rows = doc.at("rotation");
    if (!rows.is_array() || rows.size() != 3) throw HttpError(400, "rotation must be a 3x3 array");
    Eigen::Matrix3d rot;
    for (int r = 0; r < 3; ++r) {
      if (!rows[static_cast<std::size_t>(r)].is_array() || rows[static_cast<std::size_t>(r)].size() != 3) {
        throw HttpError(400, "rotation must be a 3x3 array");
      }
      for (int c = 0; c < 3; ++c) rot(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    set_basis(state, rotate_basis(state.basis, rot));
    return json_response(200, projection_payload(state));
  }
  if (action == "transition") {
    const auto doc = parse_body(body);
    const Slot slot = parse_slot(doc.at("slot").get<std::string>());
    const auto dim = doc.at("dimension").get<Eigen::Index>();
    const double t = doc.at("t").get<double>();
    set_basis(state, transition_to_dimension(state.basis, slot, dim, t));
    return json_response(200, projection_payload(state));
  }
  if (action == "params") {
    const auto doc = parse_body(body);
    set_params(state, apply_params_delta(state.params, doc));
    return json_response(200, {{"ok", true}, {"stale", state.stale}, {"params", params_to_json(state.params)}});
  }
  if (action == "mode") {
    const auto doc = parse_body(body);
    const DisplayMode previous_mode = state.params.mode;
    set_mode(state, parse_display_mode(doc.at("mode").get<std::string>()));
    if (state.params.mode != DisplayMode::Scatter && (!state.current || state.stale)) {
      try {
        build_scene(state);
      } catch (...) {
        set_mode(state, previous_mode);
        throw;
      }
    }
    return json_response(200, mode_payload(state));
  }
  if (action == "rebuild") {
    build_scene(state);
    return json_response(200, mesh_payload(state));
  }
  if (action == "brush") {
    const auto doc = parse_body(body);
    BrushStroke stroke;
    stroke.cluster = doc.at("cluster").get<int>();
    stroke.new_cluster = doc.at("new_cluster").get<int>();
    stroke.painted = doc.at("triangles").get<std::vector<std::uint32_t>>();
    if (doc.contains("color")) stroke.color = parse_color(doc.at("color"));
    apply_brush(state, stroke);
    std::vector<int> labels = state.data.labels;
    nlohmann::json out{{"labels", labels}, {"clusters", state.data.n_clusters()}};
    if (state.current) out["scene"] = mesh_payload(state);
    return json_response(200, out);
  }
  if (action == "restore-previous") {
    if (!restore_previous(state)) {
      nlohmann::json out{{"warning", "no cached scene to restore"}};
      if (state.current) out["scene"] = mesh_payload(state);
      return json_response(200, out);
    }
    return json_response(200, {{"scene", mesh_payload(state)}, {"projection", projection_payload(state)}});
  }
  throw HttpError(404, "unknown action '" + action + "'");
}

}  // namespace subshape
