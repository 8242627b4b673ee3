#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace benthos {

/// Vehicle pose. Local ENU meters, depth positive down, angles in degrees,
/// heading clockwise from north.
struct NavSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double heading = 0.0;
  double altitude = 1.0;

  void validate() const;
  friend bool operator==(const NavSample&, const NavSample&) = default;
};

struct GeoOrigin {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

struct WorldBounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  void expand(WorldPoint p);
  bool intersects(const WorldBounds& other) const;
};

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

class NavTrack {
 public:
  NavTrack() = default;
  explicit NavTrack(std::vector<NavSample> samples,
                    std::optional<GeoOrigin> origin = std::nullopt);

  const std::vector<NavSample>& samples() const noexcept { return samples_; }
  const std::optional<GeoOrigin>& origin() const noexcept { return origin_; }
  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }
  bool covers(double t) const { return t >= start_time() && t <= end_time(); }

 private:
  std::vector<NavSample> samples_;
  std::optional<GeoOrigin> origin_;
};

/// Nadir-looking pinhole camera. Image x runs across-track (starboard), image
/// row 0 faces forward. The horizontal field of view spans the full image
/// width, edge to edge.
struct CameraModel {
  double hfov_deg = 60.0;
  std::size_t width = 0;
  std::size_t height = 0;

  void validate() const;
  double focal_px() const;
};

/// Continuous image coordinates: the image spans [0, width] x [0, height];
/// pixel (col, row) has its center at (col + 0.5, row + 0.5).
struct PixelCoord {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDefaultAltitudeM = 2.0;
inline constexpr double kDefaultSurveySpeedMps = 1.2;
/// Reproduces a ~2.3 m swath at 2 m altitude.
inline constexpr double kDefaultFovDeg = 60.0;
inline constexpr std::size_t kDefaultUhiSamples = 64;

/// Interpolated pose; linear in every field, shortest arc for heading.
NavSample pose_at(const NavTrack& track, double t);

/// Shortest-arc interpolation between two headings, result in [0, 360).
double interpolate_heading(double from_deg, double to_deg, double fraction);

/// Intersects the ray through tangent-plane coordinates (tan_x across-track,
/// tan_y aft) with the seafloor plane `altitude` below the vehicle.
WorldPoint project_ray(const NavSample& pose, double tan_x, double tan_y);

WorldPoint pixel_to_world(const NavSample& pose, const CameraModel& cam,
                          PixelCoord px);

/// Seafloor point of a (possibly fractional) across-track sample position.
WorldPoint uhi_sample_to_world(const NavSample& pose, double fov_deg,
                               std::size_t samples, double sample);

/// Seafloor points of one push-broom line, samples spread evenly from edge to
/// edge of the field of view. One sample maps to nadir.
std::vector<WorldPoint> uhi_line_footprint(const NavSample& pose,
                                           double fov_deg,
                                           std::size_t samples);

/// Ground swath width 2 * altitude * tan(fov/2) at zero attitude.
double swath_width(double altitude_m, double fov_deg);

/// Local tangent plane to geodetic (spherical earth).
GeoPoint to_geodetic(const GeoOrigin& origin, WorldPoint p);
WorldPoint to_local(const GeoOrigin& origin, GeoPoint g);

/// CSV `t,x,y,depth,roll,pitch,heading,altitude`, optional
/// `# origin_lat=..., origin_lon=...` comment.
NavTrack load_nav(const std::filesystem::path& path);
void save_nav(const NavTrack& track, const std::filesystem::path& path);

}  // namespace benthos
