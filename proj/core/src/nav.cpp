#include "benthos/nav.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "benthos/error.hpp"
#include "text_util.hpp"

namespace benthos {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
// Rays shallower than this (down component of a unit-ish direction) are
// treated as never reaching the seafloor.
constexpr double kMinDownComponent = 1e-9;

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

void WorldBounds::expand(WorldPoint p) {
  min_x = std::min(min_x, p.x);
  min_y = std::min(min_y, p.y);
  max_x = std::max(max_x, p.x);
  max_y = std::max(max_y, p.y);
}

bool WorldBounds::intersects(const WorldBounds& o) const {
  return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y &&
         o.min_y <= max_y;
}

void NavSample::validate() const {
  for (double v : {t, x, y, depth, roll, pitch, heading, altitude}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::format, "nav sample has non-finite field");
    }
  }
  if (heading < 0.0 || heading >= 360.0) {
    throw Error(ErrorKind::format, "heading must lie in [0, 360)");
  }
  if (std::abs(roll) > 90.0 || std::abs(pitch) > 90.0) {
    throw Error(ErrorKind::format, "|roll| and |pitch| must be <= 90");
  }
  if (!(altitude > 0.0)) {
    throw Error(ErrorKind::format, "altitude must be positive");
  }
}

NavTrack::NavTrack(std::vector<NavSample> samples,
                   std::optional<GeoOrigin> origin)
    : samples_(std::move(samples)), origin_(origin) {
  if (samples_.size() < 2) {
    throw Error(ErrorKind::format, "nav track needs at least 2 samples");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    samples_[i].validate();
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
      throw Error(ErrorKind::format,
                  "nav timestamps must be strictly increasing");
    }
  }
}

void CameraModel::validate() const {
  if (!(hfov_deg > 0.0 && hfov_deg < 180.0)) {
    throw Error(ErrorKind::precondition, "camera FOV must lie in (0, 180)");
  }
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::precondition, "camera dimensions must be positive");
  }
}

double CameraModel::focal_px() const {
  return (static_cast<double>(width) / 2.0) /
         std::tan(hfov_deg * kDegToRad / 2.0);
}

double interpolate_heading(double from_deg, double to_deg, double fraction) {
  double delta = std::fmod(to_deg - from_deg, 360.0);
  if (delta > 180.0) delta -= 360.0;
  if (delta < -180.0) delta += 360.0;
  double h = std::fmod(from_deg + fraction * delta, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

NavSample pose_at(const NavTrack& track, double t) {
  const auto& s = track.samples();
  if (!std::isfinite(t) || t < s.front().t || t > s.back().t) {
    throw Error(ErrorKind::out_of_range,
                "time " + detail::format_double(t) + " outside nav track [" +
                    detail::format_double(s.front().t) + ", " +
                    detail::format_double(s.back().t) + "]");
  }
  const auto it = std::lower_bound(
      s.begin(), s.end(), t,
      [](const NavSample& a, double value) { return a.t < value; });
  if (it->t == t) return *it;
  const NavSample& b = *it;
  const NavSample& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  NavSample out;
  out.t = t;
  out.x = lerp(a.x, b.x, f);
  out.y = lerp(a.y, b.y, f);
  out.depth = lerp(a.depth, b.depth, f);
  out.roll = lerp(a.roll, b.roll, f);
  out.pitch = lerp(a.pitch, b.pitch, f);
  out.altitude = lerp(a.altitude, b.altitude, f);
  out.heading = interpolate_heading(a.heading, b.heading, f);
  return out;
}

WorldPoint project_ray(const NavSample& pose, double tan_x, double tan_y) {
  if (!(pose.altitude > 0.0)) {
    throw Error(ErrorKind::precondition, "altitude must be positive");
  }
  // Body frame: forward, starboard, down. Image x is starboard, image y aft.
  const double bf = -tan_y;
  const double bs = tan_x;
  const double bd = 1.0;

  const double cr = std::cos(pose.roll * kDegToRad);
  const double sr = std::sin(pose.roll * kDegToRad);
  const double cp = std::cos(pose.pitch * kDegToRad);
  const double sp = std::sin(pose.pitch * kDegToRad);
  const double ch = std::cos(pose.heading * kDegToRad);
  const double sh = std::sin(pose.heading * kDegToRad);

  // NED = Rz(heading) * Ry(pitch) * Rx(roll) * body
  const double x1 = bf;
  const double y1 = cr * bs - sr * bd;
  const double z1 = sr * bs + cr * bd;
  const double x2 = cp * x1 + sp * z1;
  const double y2 = y1;
  const double z2 = -sp * x1 + cp * z1;
  const double north = ch * x2 - sh * y2;
  const double east = sh * x2 + ch * y2;
  const double down = z2;

  const double norm = std::sqrt(north * north + east * east + down * down);
  if (!(down > kMinDownComponent * norm)) {
    throw Error(ErrorKind::no_intersection,
                "view ray does not reach the seafloor plane");
  }
  const double scale = pose.altitude / down;
  return {pose.x + scale * east, pose.y + scale * north};
}

WorldPoint pixel_to_world(const NavSample& pose, const CameraModel& cam,
                          PixelCoord px) {
  cam.validate();
  const double f = cam.focal_px();
  const double tan_x = (px.x - static_cast<double>(cam.width) / 2.0) / f;
  const double tan_y = (px.y - static_cast<double>(cam.height) / 2.0) / f;
  return project_ray(pose, tan_x, tan_y);
}

WorldPoint uhi_sample_to_world(const NavSample& pose, double fov_deg,
                               std::size_t samples, double sample) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw Error(ErrorKind::precondition, "FOV must lie in (0, 180)");
  }
  if (samples == 0) throw Error(ErrorKind::precondition, "no UHI samples");
  if (samples == 1) return project_ray(pose, 0.0, 0.0);
  const double half = std::tan(fov_deg * kDegToRad / 2.0);
  const double u = 2.0 * sample / static_cast<double>(samples - 1) - 1.0;
  return project_ray(pose, half * u, 0.0);
}

std::vector<WorldPoint> uhi_line_footprint(const NavSample& pose,
                                           double fov_deg,
                                           std::size_t samples) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw Error(ErrorKind::precondition, "FOV must lie in (0, 180)");
  }
  std::vector<WorldPoint> out;
  out.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    out.push_back(
        uhi_sample_to_world(pose, fov_deg, samples, static_cast<double>(k)));
  }
  return out;
}

double swath_width(double altitude_m, double fov_deg) {
  return 2.0 * altitude_m * std::tan(fov_deg * kDegToRad / 2.0);
}

GeoPoint to_geodetic(const GeoOrigin& origin, WorldPoint p) {
  const double lat = origin.lat_deg + p.y / kEarthRadiusM * kRadToDeg;
  const double lon =
      origin.lon_deg +
      p.x / (kEarthRadiusM * std::cos(origin.lat_deg * kDegToRad)) * kRadToDeg;
  return {lat, lon};
}

WorldPoint to_local(const GeoOrigin& origin, GeoPoint g) {
  const double y = (g.lat_deg - origin.lat_deg) * kDegToRad * kEarthRadiusM;
  const double x = (g.lon_deg - origin.lon_deg) * kDegToRad * kEarthRadiusM *
                   std::cos(origin.lat_deg * kDegToRad);
  return {x, y};
}

namespace {

std::optional<GeoOrigin> parse_origin_comment(std::string_view comment) {
  std::optional<double> lat, lon;
  for (auto part : detail::split(comment, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = detail::trim(part.substr(0, eq));
    const auto value = part.substr(eq + 1);
    if (key == "origin_lat") lat = detail::parse_double(value, "origin_lat");
    if (key == "origin_lon") lon = detail::parse_double(value, "origin_lon");
  }
  if (lat && lon) return GeoOrigin{*lat, *lon};
  return std::nullopt;
}

}  // namespace

NavTrack load_nav(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  std::optional<GeoOrigin> origin;
  std::istringstream in(text);
  std::string line;
  std::string rows;
  while (std::getline(in, line)) {
    const auto body = detail::trim(line);
    if (!body.empty() && body.front() == '#') {
      if (auto o = parse_origin_comment(body.substr(1))) origin = o;
      continue;
    }
    rows += line;
    rows += '\n';
  }
  const auto table = detail::parse_numeric_csv(rows, 8, path.string());
  std::vector<NavSample> samples;
  samples.reserve(table.size());
  for (const auto& r : table) {
    samples.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]});
  }
  return NavTrack(std::move(samples), origin);
}

void save_nav(const NavTrack& track, const std::filesystem::path& path) {
  std::ostringstream out;
  if (track.origin()) {
    out << "# origin_lat=" << detail::format_double(track.origin()->lat_deg)
        << ", origin_lon=" << detail::format_double(track.origin()->lon_deg)
        << '\n';
  }
  out << "t,x,y,depth,roll,pitch,heading,altitude\n";
  for (const auto& s : track.samples()) {
    out << detail::format_double(s.t) << ',' << detail::format_double(s.x)
        << ',' << detail::format_double(s.y) << ','
        << detail::format_double(s.depth) << ','
        << detail::format_double(s.roll) << ','
        << detail::format_double(s.pitch) << ','
        << detail::format_double(s.heading) << ','
        << detail::format_double(s.altitude) << '\n';
  }
  detail::write_text_file(path, out.str());
}

}  // namespace benthos
