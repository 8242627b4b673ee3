#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benthos/detfuse.hpp"
#include "benthos/taxonomy.hpp"

namespace benthos {

using DetectionId = std::uint32_t;

enum class ReviewAction { verify, reclassify, reject, restore };

std::string_view to_string(ReviewAction action) noexcept;
std::optional<ReviewAction> parse_review_action(std::string_view name) noexcept;

struct AuditEvent {
  std::uint64_t seq = 0;  // dense from 1
  std::string timestamp;  // ISO-8601 UTC, informational
  std::string actor;
  ReviewAction action = ReviewAction::verify;
  std::vector<DetectionId> ids;
  /// reclassify only: previous class per id, and the requested class.
  std::vector<DebrisClass> from;
  std::optional<DebrisClass> to;

  friend bool operator==(const AuditEvent&, const AuditEvent&) = default;
};

/// Reviewable state of one detection. `before_reject` holds what restore
/// returns to.
struct DetectionStatus {
  DebrisClass cls = DebrisClass::other;
  ReviewState state = ReviewState::unverified;
  std::optional<ReviewState> before_reject;

  friend bool operator==(const DetectionStatus&,
                         const DetectionStatus&) = default;
};

struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;
};

struct ExportRecord {
  DetectionId id = 0;
  DebrisClass cls = DebrisClass::other;
  ReviewState state = ReviewState::unverified;
  std::string frame_id;
  double t = 0.0;
  ClassScores scores{};
  std::optional<WorldFootprint> world;

  friend bool operator==(const ExportRecord&, const ExportRecord&) = default;
};

/// Applies one event to a state map. Pure; this is the single transition
/// function used for live commands and replay alike.
void apply_event(std::map<DetectionId, DetectionStatus>& states,
                 const AuditEvent& event);

/// Event-sourced review of a fixed detection set. Commands validate the whole
/// batch first, then append one event and fold it in; a failed command leaves
/// the session untouched.
class ReviewSession {
 public:
  ReviewSession() = default;
  ReviewSession(std::string session_id, std::vector<FusedDetection> detections);

  const std::string& id() const noexcept { return id_; }
  const std::vector<FusedDetection>& detections() const noexcept {
    return detections_;
  }
  const std::map<DetectionId, DetectionStatus>& states() const noexcept {
    return states_;
  }
  std::map<DetectionId, DetectionStatus> initial_states() const;
  const std::vector<AuditEvent>& events() const noexcept { return events_; }
  const FusedDetection& detection(DetectionId id) const;
  bool contains(DetectionId id) const noexcept;

  FieldView active_view() const noexcept { return view_; }
  void set_active_view(FieldView view) noexcept { view_ = view; }

  std::vector<DetectionId> select_region(const Rect& rect) const;

  // Each returns the appended event.
  const AuditEvent& verify(std::span<const DetectionId> ids,
                           const std::string& actor = "inspector");
  const AuditEvent& reclassify(std::span<const DetectionId> ids,
                               DebrisClass new_class,
                               const std::string& actor = "inspector");
  const AuditEvent& reject(std::span<const DetectionId> ids,
                           const std::string& actor = "inspector");
  const AuditEvent& restore(std::span<const DetectionId> ids,
                            const std::string& actor = "inspector");

  /// Validates and folds in an event read back from storage.
  void replay(const AuditEvent& event);

  /// Non-rejected detections with their current class and state, by id.
  std::vector<ExportRecord> export_final() const;
  std::size_t rejected_count() const;

 private:
  void require_known(std::span<const DetectionId> ids) const;
  void require_not_rejected(std::span<const DetectionId> ids) const;
  const AuditEvent& commit(AuditEvent event);

  std::string id_;
  std::vector<FusedDetection> detections_;
  std::map<DetectionId, std::size_t> index_;
  std::map<DetectionId, DetectionStatus> states_;
  std::vector<AuditEvent> events_;
  FieldView view_ = FieldView::combined;
};

// JSON persistence. Fused detections and export records use the same field
// names in every file and HTTP payload.

std::string fused_to_json(std::span<const FusedDetection> dets,
                          const std::optional<std::filesystem::path>& frames_dir =
                              std::nullopt);
std::vector<FusedDetection> fused_from_json(const std::string& text);

std::string event_to_json_line(const AuditEvent& event);
AuditEvent event_from_json_line(const std::string& line);

std::string export_to_json(std::span<const ExportRecord> records);
std::vector<ExportRecord> export_from_json(const std::string& text);

/// Export document shared by `GET /api/export` and the CLI `export`.
std::string session_export_json(const ReviewSession& session);

/// Session directory: `initial.json` (fused detections) and `events.ndjson`.
/// Every command is appended and fsync'ed before it is acknowledged.
class SessionStore {
 public:
  /// Writes initial.json and an empty event log into a new directory.
  static SessionStore create(const std::filesystem::path& dir,
                             std::span<const FusedDetection> dets,
                             const std::optional<std::filesystem::path>&
                                 frames_dir = std::nullopt);
  /// Loads initial.json and replays events.ndjson.
  static SessionStore open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const ReviewSession& session() const noexcept { return session_; }
  const std::optional<std::filesystem::path>& frames_dir() const noexcept {
    return frames_dir_;
  }

  const AuditEvent& verify(std::span<const DetectionId> ids,
                           const std::string& actor = "inspector");
  const AuditEvent& reclassify(std::span<const DetectionId> ids,
                               DebrisClass new_class,
                               const std::string& actor = "inspector");
  const AuditEvent& reject(std::span<const DetectionId> ids,
                           const std::string& actor = "inspector");
  const AuditEvent& restore(std::span<const DetectionId> ids,
                            const std::string& actor = "inspector");

 private:
  SessionStore(std::filesystem::path dir, ReviewSession session,
               std::optional<std::filesystem::path> frames_dir);
  template <typename Command>
  const AuditEvent& run(Command&& command);
  void append(const AuditEvent& event);

  std::filesystem::path dir_;
  ReviewSession session_;
  std::optional<std::filesystem::path> frames_dir_;
};

}  // namespace benthos
