#include "benthos/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "benthos/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace benthos {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kActionNames{"verify", "reclassify",
                                                       "reject", "restore"};

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<DetectionId> normalized(std::span<const DetectionId> ids) {
  std::vector<DetectionId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::string_view to_string(ReviewAction action) noexcept {
  return kActionNames[static_cast<std::size_t>(action)];
}

std::optional<ReviewAction> parse_review_action(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<ReviewAction>(i);
  }
  return std::nullopt;
}

void apply_event(std::map<DetectionId, DetectionStatus>& states,
                 const AuditEvent& event) {
  for (DetectionId id : event.ids) {
    auto& st = states.at(id);
    switch (event.action) {
      case ReviewAction::verify:
        if (st.state != ReviewState::rejected) st.state = ReviewState::verified;
        break;
      case ReviewAction::reclassify:
        if (st.state == ReviewState::rejected) break;
        if (st.cls == *event.to) {
          st.state = ReviewState::verified;
        } else {
          st.cls = *event.to;
          st.state = ReviewState::reclassified;
        }
        break;
      case ReviewAction::reject:
        if (st.state != ReviewState::rejected) {
          st.before_reject = st.state;
          st.state = ReviewState::rejected;
        }
        break;
      case ReviewAction::restore:
        if (st.state == ReviewState::rejected) {
          st.state = st.before_reject.value_or(ReviewState::unverified);
          st.before_reject.reset();
        }
        break;
    }
  }
}

ReviewSession::ReviewSession(std::string session_id,
                             std::vector<FusedDetection> detections)
    : id_(std::move(session_id)), detections_(std::move(detections)) {
  for (std::size_t i = 0; i < detections_.size(); ++i) {
    const auto& d = detections_[i];
    if (!index_.emplace(d.id, i).second) {
      throw Error(ErrorKind::format,
                  "duplicate detection id " + std::to_string(d.id));
    }
  }
  states_ = initial_states();
}

std::map<DetectionId, DetectionStatus> ReviewSession::initial_states() const {
  std::map<DetectionId, DetectionStatus> states;
  for (const auto& d : detections_) {
    DetectionStatus st{d.cls, d.state, std::nullopt};
    if (st.state == ReviewState::rejected) st.before_reject = ReviewState::unverified;
    states.emplace(d.id, st);
  }
  return states;
}

const FusedDetection& ReviewSession::detection(DetectionId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorKind::not_found, "unknown detection id " + std::to_string(id));
  }
  return detections_[it->second];
}

bool ReviewSession::contains(DetectionId id) const noexcept {
  return index_.contains(id);
}

std::vector<DetectionId> ReviewSession::select_region(const Rect& rect) const {
  std::vector<DetectionId> out;
  for (const auto& d : detections_) {
    const auto& p = d.embedding;
    if (p.x >= rect.min_x && p.x <= rect.max_x && p.y >= rect.min_y &&
        p.y <= rect.max_y) {
      out.push_back(d.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ReviewSession::require_known(std::span<const DetectionId> ids) const {
  if (ids.empty()) {
    throw Error(ErrorKind::precondition, "empty detection id list");
  }
  for (DetectionId id : ids) {
    if (!contains(id)) {
      throw Error(ErrorKind::not_found,
                  "unknown detection id " + std::to_string(id));
    }
  }
}

void ReviewSession::require_not_rejected(
    std::span<const DetectionId> ids) const {
  for (DetectionId id : ids) {
    if (states_.at(id).state == ReviewState::rejected) {
      throw Error(ErrorKind::precondition,
                  "detection " + std::to_string(id) + " is rejected");
    }
  }
}

const AuditEvent& ReviewSession::commit(AuditEvent event) {
  event.seq = events_.size() + 1;
  if (event.timestamp.empty()) event.timestamp = utc_now_iso8601();
  apply_event(states_, event);
  events_.push_back(std::move(event));
  return events_.back();
}

const AuditEvent& ReviewSession::verify(std::span<const DetectionId> ids,
                                        const std::string& actor) {
  const auto batch = normalized(ids);
  require_known(batch);
  require_not_rejected(batch);
  AuditEvent e;
  e.actor = actor;
  e.action = ReviewAction::verify;
  e.ids = batch;
  return commit(std::move(e));
}

const AuditEvent& ReviewSession::reclassify(std::span<const DetectionId> ids,
                                            DebrisClass new_class,
                                            const std::string& actor) {
  const auto batch = normalized(ids);
  require_known(batch);
  require_not_rejected(batch);
  AuditEvent e;
  e.actor = actor;
  e.action = ReviewAction::reclassify;
  e.ids = batch;
  e.to = new_class;
  for (DetectionId id : batch) e.from.push_back(states_.at(id).cls);
  return commit(std::move(e));
}

const AuditEvent& ReviewSession::reject(std::span<const DetectionId> ids,
                                        const std::string& actor) {
  const auto batch = normalized(ids);
  require_known(batch);
  AuditEvent e;
  e.actor = actor;
  e.action = ReviewAction::reject;
  e.ids = batch;
  return commit(std::move(e));
}

const AuditEvent& ReviewSession::restore(std::span<const DetectionId> ids,
                                         const std::string& actor) {
  const auto batch = normalized(ids);
  require_known(batch);
  AuditEvent e;
  e.actor = actor;
  e.action = ReviewAction::restore;
  e.ids = batch;
  return commit(std::move(e));
}

void ReviewSession::replay(const AuditEvent& event) {
  if (event.seq != events_.size() + 1) {
    throw Error(ErrorKind::corrupt_file,
                "audit log sequence gap at " + std::to_string(event.seq));
  }
  require_known(event.ids);
  if (event.action == ReviewAction::verify ||
      event.action == ReviewAction::reclassify) {
    require_not_rejected(event.ids);
  }
  if (event.action == ReviewAction::reclassify && !event.to) {
    throw Error(ErrorKind::corrupt_file, "reclassify event without target");
  }
  apply_event(states_, event);
  events_.push_back(event);
}

std::vector<ExportRecord> ReviewSession::export_final() const {
  std::vector<ExportRecord> out;
  for (const auto& [id, st] : states_) {
    if (st.state == ReviewState::rejected) continue;
    const auto& d = detection(id);
    out.push_back({id, st.cls, st.state, d.raw.frame_id, d.raw.t, d.raw.scores,
                   d.world});
  }
  return out;
}

std::size_t ReviewSession::rejected_count() const {
  return static_cast<std::size_t>(
      std::count_if(states_.begin(), states_.end(), [](const auto& kv) {
        return kv.second.state == ReviewState::rejected;
      }));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json scores_to_json(const ClassScores& scores) {
  json j = json::object();
  for (auto cls : kAllClasses) j[std::string(to_string(cls))] = scores[index_of(cls)];
  return j;
}

ClassScores scores_from_json(const json& j) {
  ClassScores scores{};
  for (const auto& [name, value] : j.items()) {
    const auto cls = parse_class(name);
    if (!cls) throw Error(ErrorKind::format, "unknown class '" + name + "'");
    scores[index_of(*cls)] = value.get<double>();
  }
  return scores;
}

DebrisClass class_from_json(const json& j) {
  const auto cls = parse_class(j.get<std::string>());
  if (!cls) {
    throw Error(ErrorKind::format, "unknown class '" + j.get<std::string>() + "'");
  }
  return *cls;
}

ReviewState state_from_json(const json& j) {
  const auto st = parse_review_state(j.get<std::string>());
  if (!st) {
    throw Error(ErrorKind::format, "unknown state '" + j.get<std::string>() + "'");
  }
  return *st;
}

json world_to_json(const std::optional<WorldFootprint>& w) {
  if (!w) return nullptr;
  return {{"x", w->center_x}, {"y", w->center_y}, {"radius", w->radius}};
}

std::optional<WorldFootprint> world_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return WorldFootprint{j.at("x").get<double>(), j.at("y").get<double>(),
                        j.at("radius").get<double>()};
}

json fused_to_json_object(const FusedDetection& d) {
  json mask = json::array();
  for (const auto& p : d.raw.mask) mask.push_back({p.x, p.y});
  const auto pattern = d.features.pattern();
  const auto spectral = d.features.spectral();
  const auto probability = d.features.probability();
  return {
      {"id", d.id},
      {"frame_id", d.raw.frame_id},
      {"t", d.raw.t},
      {"bbox", {d.raw.bbox.x, d.raw.bbox.y, d.raw.bbox.w, d.raw.bbox.h}},
      {"scores", scores_to_json(d.raw.scores)},
      {"mask", mask},
      {"detected_class", std::string(to_string(d.raw.cls))},
      {"class", std::string(to_string(d.cls))},
      {"state", std::string(to_string(d.state))},
      {"features",
       {{"pattern", std::vector<double>(pattern.begin(), pattern.end())},
        {"spectrum", std::vector<double>(spectral.begin(), spectral.end())},
        {"probability",
         std::vector<double>(probability.begin(), probability.end())}}},
      {"uncovered", d.uncovered},
      {"uncertainty", d.uncertainty()},
      {"world", world_to_json(d.world)},
      {"embedding", {{"x", d.embedding.x}, {"y", d.embedding.y}}},
  };
}

template <std::size_t N>
void read_part(const json& j, std::size_t expected, std::array<double, N>& out,
               std::size_t offset) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != expected) {
    throw Error(ErrorKind::format, "feature part has wrong length");
  }
  std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
}

FusedDetection fused_from_json_object(const json& j) {
  FusedDetection d;
  d.id = j.at("id").get<DetectionId>();
  d.raw.frame_id = j.at("frame_id").get<std::string>();
  d.raw.t = j.at("t").get<double>();
  const auto& b = j.at("bbox");
  d.raw.bbox = {b.at(0).get<double>(), b.at(1).get<double>(),
                b.at(2).get<double>(), b.at(3).get<double>()};
  d.raw.scores = scores_from_json(j.at("scores"));
  if (const auto it = j.find("mask"); it != j.end()) {
    for (const auto& p : *it) {
      d.raw.mask.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
  }
  d.raw.cls = j.contains("detected_class") ? class_from_json(j.at("detected_class"))
                                           : argmax_class(d.raw.scores);
  d.cls = class_from_json(j.at("class"));
  d.state = state_from_json(j.at("state"));
  const auto& f = j.at("features");
  read_part(f.at("pattern"), kPatternSize, d.features.values, 0);
  read_part(f.at("spectrum"), kSpectralSize, d.features.values, kPatternSize);
  read_part(f.at("probability"), kClassCount, d.features.values,
            kPatternSize + kSpectralSize);
  d.uncovered = j.value("uncovered", true);
  d.world = world_from_json(j.value("world", json(nullptr)));
  const auto& e = j.at("embedding");
  d.embedding = {e.at("x").get<double>(), e.at("y").get<double>()};
  return d;
}

template <typename Fn>
auto with_json_errors(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, what + ": " + e.what());
  }
}

json export_record_to_json(const ExportRecord& r) {
  return {{"id", r.id},
          {"class", std::string(to_string(r.cls))},
          {"state", std::string(to_string(r.state))},
          {"frame_id", r.frame_id},
          {"t", r.t},
          {"scores", scores_to_json(r.scores)},
          {"world", world_to_json(r.world)}};
}

}  // namespace

std::string fused_to_json(std::span<const FusedDetection> dets,
                          const std::optional<std::filesystem::path>& frames_dir) {
  json doc;
  doc["frames_dir"] = frames_dir ? json(frames_dir->string()) : json(nullptr);
  doc["detections"] = json::array();
  for (const auto& d : dets) doc["detections"].push_back(fused_to_json_object(d));
  return doc.dump(1) + "\n";
}

std::vector<FusedDetection> fused_from_json(const std::string& text) {
  return with_json_errors("fused detections", [&] {
    const json doc = json::parse(text);
    const json& arr = doc.is_array() ? doc : doc.at("detections");
    std::vector<FusedDetection> out;
    for (const auto& j : arr) out.push_back(fused_from_json_object(j));
    return out;
  });
}

std::string event_to_json_line(const AuditEvent& e) {
  json j = {{"seq", e.seq},
            {"timestamp", e.timestamp},
            {"actor", e.actor},
            {"action", std::string(to_string(e.action))},
            {"ids", e.ids}};
  if (e.action == ReviewAction::reclassify) {
    json from = json::array();
    for (auto c : e.from) from.push_back(std::string(to_string(c)));
    j["from"] = from;
    j["to"] = e.to ? json(std::string(to_string(*e.to))) : json(nullptr);
  }
  return j.dump();
}

AuditEvent event_from_json_line(const std::string& line) {
  return with_json_errors("audit event", [&] {
    const json j = json::parse(line);
    AuditEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.value("timestamp", "");
    e.actor = j.value("actor", "");
    const auto action = parse_review_action(j.at("action").get<std::string>());
    if (!action) throw Error(ErrorKind::format, "unknown audit action");
    e.action = *action;
    e.ids = j.at("ids").get<std::vector<DetectionId>>();
    if (const auto it = j.find("from"); it != j.end()) {
      for (const auto& c : *it) e.from.push_back(class_from_json(c));
    }
    if (const auto it = j.find("to"); it != j.end() && !it->is_null()) {
      e.to = class_from_json(*it);
    }
    return e;
  });
}

std::string export_to_json(std::span<const ExportRecord> records) {
  json doc;
  doc["count"] = records.size();
  doc["detections"] = json::array();
  for (const auto& r : records) doc["detections"].push_back(export_record_to_json(r));
  return doc.dump(1) + "\n";
}

std::vector<ExportRecord> export_from_json(const std::string& text) {
  return with_json_errors("export", [&] {
    const json doc = json::parse(text);
    const json& arr = doc.is_array() ? doc : doc.at("detections");
    std::vector<ExportRecord> out;
    for (const auto& j : arr) {
      ExportRecord r;
      r.id = j.at("id").get<DetectionId>();
      r.cls = class_from_json(j.at("class"));
      r.state = state_from_json(j.at("state"));
      r.frame_id = j.value("frame_id", "");
      r.t = j.value("t", 0.0);
      if (j.contains("scores")) r.scores = scores_from_json(j.at("scores"));
      r.world = world_from_json(j.value("world", json(nullptr)));
      out.push_back(std::move(r));
    }
    return out;
  });
}

std::string session_export_json(const ReviewSession& session) {
  return export_to_json(session.export_final());
}

// ---------------------------------------------------------------------------
// SessionStore

namespace {

constexpr const char* kInitialFile = "initial.json";
constexpr const char* kEventsFile = "events.ndjson";

}  // namespace

SessionStore::SessionStore(std::filesystem::path dir, ReviewSession session,
                           std::optional<std::filesystem::path> frames_dir)
    : dir_(std::move(dir)),
      session_(std::move(session)),
      frames_dir_(std::move(frames_dir)) {}

SessionStore SessionStore::create(
    const std::filesystem::path& dir, std::span<const FusedDetection> dets,
    const std::optional<std::filesystem::path>& frames_dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string());
  if (std::filesystem::exists(dir / kEventsFile)) {
    throw Error(ErrorKind::precondition,
                "session already exists in " + dir.string());
  }
  detail::write_text_file(dir / kInitialFile, fused_to_json(dets, frames_dir));
  detail::write_text_file(dir / kEventsFile, "");
  return open(dir);
}

SessionStore SessionStore::open(const std::filesystem::path& dir) {
  const std::string text = detail::read_text_file(dir / kInitialFile);
  std::optional<std::filesystem::path> frames_dir;
  with_json_errors("initial.json", [&] {
    const json doc = json::parse(text);
    if (doc.is_object() && doc.contains("frames_dir") &&
        doc.at("frames_dir").is_string()) {
      frames_dir = doc.at("frames_dir").get<std::string>();
    }
    return 0;
  });
  ReviewSession session(std::filesystem::absolute(dir).filename().string(),
                        fused_from_json(text));
  std::ifstream events(dir / kEventsFile);
  if (events) {
    std::string line;
    while (std::getline(events, line)) {
      if (detail::trim(line).empty()) continue;
      session.replay(event_from_json_line(line));
    }
  }
  return SessionStore(dir, std::move(session), std::move(frames_dir));
}

void SessionStore::append(const AuditEvent& event) {
  const std::string line = event_to_json_line(event) + "\n";
  const auto path = (dir_ / kEventsFile).string();
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorKind::io, "cannot open " + path + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(ErrorKind::io, "append failed: " + std::string(std::strerror(err)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw Error(ErrorKind::io, "fsync failed: " + std::string(std::strerror(err)));
  }
  ::close(fd);
}

template <typename Command>
const AuditEvent& SessionStore::run(Command&& command) {
  // The event must be on disk before the in-memory state advances.
  ReviewSession next = session_;
  command(next);
  append(next.events().back());
  session_ = std::move(next);
  return session_.events().back();
}

const AuditEvent& SessionStore::verify(std::span<const DetectionId> ids,
                                       const std::string& actor) {
  return run([&](ReviewSession& s) { s.verify(ids, actor); });
}

const AuditEvent& SessionStore::reclassify(std::span<const DetectionId> ids,
                                           DebrisClass new_class,
                                           const std::string& actor) {
  return run([&](ReviewSession& s) { s.reclassify(ids, new_class, actor); });
}

const AuditEvent& SessionStore::reject(std::span<const DetectionId> ids,
                                       const std::string& actor) {
  return run([&](ReviewSession& s) { s.reject(ids, actor); });
}

const AuditEvent& SessionStore::restore(std::span<const DetectionId> ids,
                                        const std::string& actor) {
  return run([&](ReviewSession& s) { s.restore(ids, actor); });
}

}  // namespace benthos
