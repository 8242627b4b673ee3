#include "benthos/review_api.hpp"

#include <charconv>
#include <cmath>
#include <thread>

#include "benthos/error.hpp"
#include "httplib.h"
#include "json.hpp"
#include "text_util.hpp"

namespace benthos {

using nlohmann::json;

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::io:
    case ErrorKind::corrupt_file: return 500;
    default: return 400;
  }
}

ReviewApi::Response json_response(int status, const json& body) {
  return {status, body.dump(), "application/json"};
}

ReviewApi::Response error_response(int status, const std::string& message) {
  return json_response(status, {{"error", message}});
}

json event_json(const AuditEvent& e) { return json::parse(event_to_json_line(e)); }

json session_view(const SessionStore& store) {
  const ReviewSession& s = store.session();
  json dets = json::array();
  std::array<std::size_t, kClassCount> counts{};
  std::size_t rejected = 0;
  for (const auto& d : s.detections()) {
    const auto& st = s.states().at(d.id);
    if (st.state == ReviewState::rejected) {
      ++rejected;
    } else {
      ++counts[index_of(st.cls)];
    }
    dets.push_back({{"id", d.id},
                    {"x", d.embedding.x},
                    {"y", d.embedding.y},
                    {"thumbnail", "/api/thumb/" + std::to_string(d.id)},
                    {"class", std::string(to_string(st.cls))},
                    {"detected_class", std::string(to_string(d.raw.cls))},
                    {"state", std::string(to_string(st.state))},
                    {"sort_keys",
                     {{"uncertainty", d.uncertainty()},
                      {"max_score", max_score(d.raw.scores)}}},
                    {"uncovered", d.uncovered}});
  }
  json classes = json::array();
  json class_counts = json::object();
  for (auto cls : kAllClasses) {
    classes.push_back(std::string(to_string(cls)));
    class_counts[std::string(to_string(cls))] = counts[index_of(cls)];
  }
  return {{"session_id", s.id()},
          {"view", std::string(to_string(s.active_view()))},
          {"classes", classes},
          {"detections", dets},
          {"counts", {{"by_class", class_counts}, {"rejected", rejected}}},
          {"audit_cursor", s.events().size()}};
}

bool is_local_origin(const std::string& origin) {
  for (const char* prefix :
       {"http://localhost", "http://127.0.0.1", "http://[::1]",
        "https://localhost", "https://127.0.0.1"}) {
    const std::string p(prefix);
    if (origin.rfind(p, 0) == 0 &&
        (origin.size() == p.size() || origin[p.size()] == ':')) {
      return true;
    }
  }
  return false;
}

}  // namespace

struct ReviewApi::Impl {
  SessionStore store;
  std::optional<std::filesystem::path> static_dir;
  mutable std::shared_mutex state_mutex;
  std::mutex write_mutex;
  std::mutex thumb_mutex;
  httplib::Server server;
  std::thread worker;

  Impl(SessionStore s, std::optional<std::filesystem::path> dir)
      : store(std::move(s)), static_dir(std::move(dir)) {}
};

ReviewApi::ReviewApi(SessionStore store,
                     std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(std::move(store), std::move(static_dir))) {
  register_routes(impl_->server);
}

ReviewApi::~ReviewApi() { stop(); }

std::unique_lock<std::mutex> ReviewApi::hold_write_slot() {
  return std::unique_lock<std::mutex>(impl_->write_mutex);
}

ReviewApi::Response ReviewApi::get_session() const {
  std::shared_lock lock(impl_->state_mutex);
  return json_response(200, session_view(impl_->store));
}

ReviewApi::Response ReviewApi::get_field(const std::string& view_name) const {
  const auto view = parse_field_view(view_name.empty() ? "combined" : view_name);
  if (!view) {
    return error_response(400, "view must be pattern, spectrum, probability or combined");
  }
  std::shared_lock lock(impl_->state_mutex);
  std::vector<FusedDetection> dets = impl_->store.session().detections();
  lock.unlock();
  assign_embedding(dets, *view);
  json points = json::array();
  for (const auto& d : dets) {
    points.push_back({{"id", d.id}, {"x", d.embedding.x}, {"y", d.embedding.y}});
  }
  return json_response(200, {{"view", std::string(to_string(*view))},
                             {"points", points}});
}

ReviewApi::Response ReviewApi::get_thumb(const std::string& id_text) {
  DetectionId id = 0;
  const auto [ptr, ec] =
      std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
  if (ec != std::errc() || ptr != id_text.data() + id_text.size()) {
    return error_response(400, "invalid detection id");
  }
  std::shared_lock lock(impl_->state_mutex);
  if (!impl_->store.session().contains(id)) {
    return error_response(404, "unknown detection id " + id_text);
  }
  const FusedDetection det = impl_->store.session().detection(id);
  const auto session_dir = impl_->store.dir();
  const auto frames_dir = impl_->store.frames_dir();
  lock.unlock();

  const auto cached = session_dir / "thumbs" / (id_text + ".ppm");
  std::lock_guard thumb_lock(impl_->thumb_mutex);
  if (!std::filesystem::exists(cached)) {
    if (!frames_dir) return error_response(404, "no frame directory for thumbnails");
    const auto frame_path = *frames_dir / (det.raw.frame_id + ".ppm");
    if (!std::filesystem::exists(frame_path)) {
      return error_response(404, "frame not found for detection " + id_text);
    }
    const RgbImage frame = read_ppm(frame_path);
    const auto col = static_cast<std::size_t>(std::floor(det.raw.bbox.x));
    const auto row = static_cast<std::size_t>(std::floor(det.raw.bbox.y));
    const auto w = static_cast<std::size_t>(std::ceil(det.raw.bbox.x + det.raw.bbox.w)) - col;
    const auto h = static_cast<std::size_t>(std::ceil(det.raw.bbox.y + det.raw.bbox.h)) - row;
    const RgbImage patch = frame.crop(col, row, std::max<std::size_t>(w, 1),
                                      std::max<std::size_t>(h, 1));
    if (patch.empty()) return error_response(404, "detection box outside its frame");
    std::filesystem::create_directories(cached.parent_path());
    write_ppm(patch, cached);
  }
  return {200, detail::read_text_file(cached), "image/x-portable-pixmap"};
}

ReviewApi::Response ReviewApi::get_export() const {
  std::shared_lock lock(impl_->state_mutex);
  return {200, session_export_json(impl_->store.session()), "application/json"};
}

ReviewApi::Response ReviewApi::post_mutation(const std::string& action,
                                             const std::string& body) {
  const auto parsed_action = parse_review_action(action);
  if (!parsed_action) return error_response(404, "unknown action " + action);

  std::vector<DetectionId> ids;
  std::optional<DebrisClass> cls;
  std::string actor = "inspector";
  try {
    const json j = json::parse(body);
    if (!j.is_object() || !j.contains("ids") || !j.at("ids").is_array()) {
      return error_response(400, "body must be an object with an 'ids' array");
    }
    for (const auto& v : j.at("ids")) {
      if (!v.is_number_unsigned()) return error_response(400, "ids must be unsigned integers");
      ids.push_back(v.get<DetectionId>());
    }
    if (*parsed_action == ReviewAction::reclassify) {
      if (!j.contains("class") || !j.at("class").is_string()) {
        return error_response(400, "reclassify needs a 'class'");
      }
      cls = parse_class(j.at("class").get<std::string>());
      if (!cls) return error_response(400, "unknown class");
    }
    if (j.contains("actor") && j.at("actor").is_string()) {
      actor = j.at("actor").get<std::string>();
    }
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed body: ") + e.what());
  }

  std::unique_lock write(impl_->write_mutex, std::try_to_lock);
  if (!write.owns_lock()) {
    return error_response(409, "another write is in flight");
  }
  try {
    std::unique_lock lock(impl_->state_mutex);
    auto& store = impl_->store;
    const AuditEvent* event = nullptr;
    switch (*parsed_action) {
      case ReviewAction::verify: event = &store.verify(ids, actor); break;
      case ReviewAction::reclassify: event = &store.reclassify(ids, *cls, actor); break;
      case ReviewAction::reject: event = &store.reject(ids, actor); break;
      case ReviewAction::restore: event = &store.restore(ids, actor); break;
    }
    return json_response(200, {{"event", event_json(*event)},
                                {"session", session_view(store)}});
  } catch (const Error& e) {
    return error_response(status_for(e.kind()), e.what());
  }
}

void ReviewApi::register_routes(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };

  server.set_post_routing_handler(
      [](const httplib::Request& req, httplib::Response& res) {
        const auto origin = req.get_header_value("Origin");
        if (!origin.empty() && is_local_origin(origin)) {
          res.set_header("Access-Control-Allow-Origin", origin);
          res.set_header("Vary", "Origin");
        }
      });
  server.Options(R"(/api/.*)", [](const httplib::Request& req,
                                  httplib::Response& res) {
    const auto origin = req.get_header_value("Origin");
    if (!origin.empty() && is_local_origin(origin)) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
    res.status = 204;
  });

  server.Get("/api/session", [this, send](const httplib::Request&,
                                          httplib::Response& res) {
    send(res, get_session());
  });
  server.Get("/api/field", [this, send](const httplib::Request& req,
                                        httplib::Response& res) {
    send(res, get_field(req.get_param_value("view")));
  });
  server.Get(R"(/api/thumb/([^/]+))", [this, send](const httplib::Request& req,
                                                   httplib::Response& res) {
    send(res, get_thumb(req.matches[1]));
  });
  server.Get("/api/export", [this, send](const httplib::Request&,
                                         httplib::Response& res) {
    send(res, get_export());
  });
  server.Post(R"(/api/(verify|reclassify|reject|restore))",
              [this, send](const httplib::Request& req, httplib::Response& res) {
                send(res, post_mutation(req.matches[1], req.body));
              });
  if (impl_->static_dir) {
    server.set_mount_point("/", impl_->static_dir->string());
  }
}

int ReviewApi::start(const std::string& host, int port) {
  auto& server = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->worker = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return bound;
}

void ReviewApi::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorKind::io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ReviewApi::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace benthos
