#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benthos/hypercube.hpp"
#include "benthos/image.hpp"
#include "benthos/nav.hpp"
#include "benthos/specmatch.hpp"
#include "benthos/taxonomy.hpp"

namespace benthos {

inline constexpr double kDefaultDetectionThreshold = 0.35;

struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// One record from the external RGB detector.
struct RawDetection {
  std::string frame_id;
  double t = 0.0;
  BoundingBox bbox;
  ClassScores scores{};
  std::vector<PixelCoord> mask;
  DebrisClass cls = DebrisClass::other;
};

struct IngestError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  std::vector<RawDetection> detections;
  std::vector<IngestError> errors;
  std::size_t below_threshold = 0;
};

/// Parses newline-delimited JSON records and keeps those whose best class
/// score is >= threshold. Malformed records are reported and skipped.
IngestResult ingest_detections(std::istream& records, double threshold);
IngestResult ingest_detections(const std::filesystem::path& path,
                               double threshold);

inline constexpr std::size_t kHueBins = 16;
inline constexpr std::size_t kOrientationBins = 32;
inline constexpr std::size_t kPatternSize = kHueBins + kOrientationBins;
inline constexpr std::size_t kSpectralSize = 16;
inline constexpr std::size_t kFeatureSize =
    kPatternSize + kSpectralSize + kClassCount;

/// Fixed wavelengths of the spectral feature part: 400, 420, ..., 700 nm.
std::array<double, kSpectralSize> spectral_feature_wavelengths();

/// Pattern, spectral and class-probability parts laid out back to back.
struct FeatureVector {
  std::array<double, kFeatureSize> values{};

  std::span<const double> pattern() const {
    return std::span<const double>(values).subspan(0, kPatternSize);
  }
  std::span<const double> spectral() const {
    return std::span<const double>(values).subspan(kPatternSize,
                                                   kSpectralSize);
  }
  std::span<const double> probability() const {
    return std::span<const double>(values).subspan(kPatternSize + kSpectralSize,
                                                   kClassCount);
  }
  void set_pattern(std::span<const double> v);
  void set_spectral(std::span<const double> v);
  void set_probability(const ClassScores& scores);
};

/// 16-bin hue histogram followed by a 32-bin magnitude-weighted unsigned
/// gradient-orientation histogram, each L1-normalized. Achromatic pixels
/// carry no hue; a constant patch has an all-zero gradient part.
std::array<double, kPatternSize> extract_pattern_features(
    const RgbImage& patch);

struct SpectralFeature {
  std::array<double, kSpectralSize> values{};
  std::size_t pixels = 0;
  bool covered() const noexcept { return pixels > 0; }
};

struct WorldFootprint {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
  friend bool operator==(const WorldFootprint&, const WorldFootprint&) = default;
};

/// Seafloor quadrilateral of a detection box, corners in image order.
std::array<WorldPoint, 4> detection_quad(const RawDetection& det,
                                         const NavTrack& track,
                                         const CameraModel& cam);
WorldFootprint detection_footprint(const RawDetection& det,
                                   const NavTrack& track,
                                   const CameraModel& cam);

/// Seafloor points of every UHI pixel; lines outside the track stay empty.
struct UhiGeometry {
  std::vector<std::vector<WorldPoint>> lines;
  static UhiGeometry compute(const HyperCube& cube, const NavTrack& track,
                             double uhi_fov_deg);
};

/// Mean spectrum over the UHI pixels whose footprint falls inside the
/// detection's seafloor quad, resampled to the fixed feature bands and
/// L2-normalized. No overlap gives a zero vector with pixels == 0.
SpectralFeature coregister_spectrum(const RawDetection& det,
                                    const HyperCube& cube,
                                    const NavTrack& track,
                                    const CameraModel& cam, double uhi_fov_deg);
SpectralFeature coregister_spectrum(const RawDetection& det,
                                    const HyperCube& cube,
                                    const UhiGeometry& geometry,
                                    const NavTrack& track,
                                    const CameraModel& cam);

/// World position of the center of a SAM detection box: the line time is
/// interpolated between line timestamps, the sample position across the swath.
WorldPoint locate_spectral_detection(const SpectralDetection& det,
                                     const HyperCube& cube,
                                     const NavTrack& track, double uhi_fov_deg);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Projection of mean-centered rows onto the top two principal components,
/// each oriented so its largest-magnitude loading is positive, then uniformly
/// scaled into [-1, 1]^2. Fewer than three rows are laid out on the x axis.
std::vector<Point2> embed_2d(std::span<const std::vector<double>> rows);

enum class FieldView { combined, pattern, spectrum, probability };

std::optional<FieldView> parse_field_view(std::string_view name) noexcept;
std::string_view to_string(FieldView view) noexcept;

/// Feature sub-vector used for a given image-field view.
std::vector<double> view_features(const FeatureVector& f, FieldView view);

struct FusedDetection {
  std::uint32_t id = 0;
  RawDetection raw;
  FeatureVector features;
  std::optional<WorldFootprint> world;
  bool uncovered = true;
  DebrisClass cls = DebrisClass::other;
  ReviewState state = ReviewState::unverified;
  Point2 embedding;

  /// Class uncertainty sort key: 1 - max score.
  double uncertainty() const noexcept { return 1.0 - max_score(raw.scores); }
};

struct FuseInputs {
  const NavTrack* track = nullptr;
  CameraModel camera;
  const HyperCube* cube = nullptr;
  double uhi_fov_deg = kDefaultFovDeg;
  /// Directory with `<frame_id>.ppm` images for pattern features.
  std::optional<std::filesystem::path> frames_dir;
};

/// Builds fused detections with ids 1..n, features, world footprints and the
/// combined-view embedding.
std::vector<FusedDetection> fuse_detections(
    const std::vector<RawDetection>& raws, const FuseInputs& inputs);

/// Embeds all detections in the given view and writes their embedding.
void assign_embedding(std::vector<FusedDetection>& dets, FieldView view);

}  // namespace benthos
