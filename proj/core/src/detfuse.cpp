#include "benthos/detfuse.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "benthos/error.hpp"
#include "benthos/parallel.hpp"
#include "json.hpp"

namespace benthos {

using nlohmann::json;

namespace {

RawDetection parse_record(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not an object");
  RawDetection det;
  const auto& fid = j.at("frame_id");
  if (fid.is_string()) {
    det.frame_id = fid.get<std::string>();
  } else if (fid.is_number()) {
    det.frame_id = fid.dump();
  } else {
    throw std::invalid_argument("frame_id must be a string or number");
  }
  det.t = j.at("t").get<double>();
  if (!std::isfinite(det.t)) throw std::invalid_argument("t is not finite");

  const auto& bbox = j.at("bbox");
  if (!bbox.is_array() || bbox.size() != 4) {
    throw std::invalid_argument("bbox must be [x, y, w, h]");
  }
  det.bbox = {bbox[0].get<double>(), bbox[1].get<double>(),
              bbox[2].get<double>(), bbox[3].get<double>()};
  for (double v : {det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("bbox values must be finite and >= 0");
    }
  }

  const auto& scores = j.at("scores");
  if (!scores.is_object() || scores.empty()) {
    throw std::invalid_argument("scores must be a non-empty object");
  }
  for (const auto& [name, value] : scores.items()) {
    const auto cls = parse_class(name);
    if (!cls) throw std::invalid_argument("unknown class '" + name + "'");
    const double s = value.get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      throw std::invalid_argument("score for '" + name + "' outside [0, 1]");
    }
    det.scores[index_of(*cls)] = s;
  }

  if (const auto it = j.find("mask"); it != j.end() && !it->is_null()) {
    for (const auto& pt : *it) {
      if (!pt.is_array() || pt.size() != 2) {
        throw std::invalid_argument("mask points must be [x, y]");
      }
      det.mask.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
  }
  det.cls = argmax_class(det.scores);
  return det;
}

}  // namespace

IngestResult ingest_detections(std::istream& records, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::precondition, "threshold must lie in [0, 1]");
  }
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(records, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      RawDetection det = parse_record(json::parse(line));
      if (max_score(det.scores) >= threshold) {
        result.detections.push_back(std::move(det));
      } else {
        ++result.below_threshold;
      }
    } catch (const std::exception& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

IngestResult ingest_detections(const std::filesystem::path& path,
                               double threshold) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return ingest_detections(in, threshold);
}

std::array<double, kSpectralSize> spectral_feature_wavelengths() {
  std::array<double, kSpectralSize> nm{};
  for (std::size_t i = 0; i < kSpectralSize; ++i) {
    nm[i] = 400.0 + 20.0 * static_cast<double>(i);
  }
  return nm;
}

void FeatureVector::set_pattern(std::span<const double> v) {
  std::copy_n(v.begin(), kPatternSize, values.begin());
}

void FeatureVector::set_spectral(std::span<const double> v) {
  std::copy_n(v.begin(), kSpectralSize, values.begin() + kPatternSize);
}

void FeatureVector::set_probability(const ClassScores& scores) {
  std::copy(scores.begin(), scores.end(),
            values.begin() + kPatternSize + kSpectralSize);
}

namespace {

// HSV hue in degrees; nullopt for achromatic pixels.
std::optional<double> hue_of(Rgb px) {
  const double r = px[0], g = px[1], b = px[2];
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double chroma = mx - mn;
  if (chroma <= 0.0) return std::nullopt;
  double h = 0.0;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / chroma, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / chroma + 2.0);
  } else {
    h = 60.0 * ((r - g) / chroma + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

void l1_normalize(std::span<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum > 0.0) {
    for (double& x : v) x /= sum;
  }
}

}  // namespace

std::array<double, kPatternSize> extract_pattern_features(
    const RgbImage& patch) {
  std::array<double, kPatternSize> out{};
  std::span<double> hue(out.data(), kHueBins);
  std::span<double> orient(out.data() + kHueBins, kOrientationBins);
  if (patch.empty()) return out;

  const std::size_t w = patch.width();
  const std::size_t h = patch.height();
  std::vector<double> intensity(w * h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const Rgb px = patch.at(r, c);
      if (const auto hv = hue_of(px)) {
        const auto bin = std::min<std::size_t>(
            kHueBins - 1,
            static_cast<std::size_t>(*hv / (360.0 / kHueBins)));
        hue[bin] += 1.0;
      }
      intensity[r * w + c] = (px[0] + px[1] + px[2]) / 3.0;
    }
  }

  // Central differences on interior pixels; orientation folded into [0, pi).
  for (std::size_t r = 1; r + 1 < h; ++r) {
    for (std::size_t c = 1; c + 1 < w; ++c) {
      const double gx =
          (intensity[r * w + c + 1] - intensity[r * w + c - 1]) / 2.0;
      const double gy =
          (intensity[(r + 1) * w + c] - intensity[(r - 1) * w + c]) / 2.0;
      const double mag = std::hypot(gx, gy);
      if (mag <= 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += std::numbers::pi;
      if (theta >= std::numbers::pi) theta -= std::numbers::pi;
      const auto bin = std::min<std::size_t>(
          kOrientationBins - 1,
          static_cast<std::size_t>(theta / std::numbers::pi *
                                   static_cast<double>(kOrientationBins)));
      orient[bin] += mag;
    }
  }
  l1_normalize(hue);
  l1_normalize(orient);
  return out;
}

std::array<WorldPoint, 4> detection_quad(const RawDetection& det,
                                         const NavTrack& track,
                                         const CameraModel& cam) {
  const NavSample pose = pose_at(track, det.t);
  const auto& b = det.bbox;
  return {pixel_to_world(pose, cam, {b.x, b.y}),
          pixel_to_world(pose, cam, {b.x + b.w, b.y}),
          pixel_to_world(pose, cam, {b.x + b.w, b.y + b.h}),
          pixel_to_world(pose, cam, {b.x, b.y + b.h})};
}

WorldFootprint detection_footprint(const RawDetection& det,
                                   const NavTrack& track,
                                   const CameraModel& cam) {
  const NavSample pose = pose_at(track, det.t);
  const WorldPoint center = pixel_to_world(
      pose, cam, {det.bbox.x + det.bbox.w / 2.0, det.bbox.y + det.bbox.h / 2.0});
  double radius = 0.0;
  for (const auto& p : detection_quad(det, track, cam)) {
    radius = std::max(radius, std::hypot(p.x - center.x, p.y - center.y));
  }
  return {center.x, center.y, radius};
}

namespace {

// Crossing-number test; points on the boundary may fall either way.
bool inside_polygon(const std::array<WorldPoint, 4>& poly, WorldPoint p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double sample_grid(const WavelengthGrid& grid, std::span<const double> values,
                   double nm) {
  const auto g = grid.values();
  if (nm <= g.front()) return values.front();
  if (nm >= g.back()) return values.back();
  const auto it = std::lower_bound(g.begin(), g.end(), nm);
  const auto hi = static_cast<std::size_t>(it - g.begin());
  if (g[hi] == nm) return values[hi];
  const std::size_t lo = hi - 1;
  const double f = (nm - g[lo]) / (g[hi] - g[lo]);
  return values[lo] + (values[hi] - values[lo]) * f;
}

}  // namespace

UhiGeometry UhiGeometry::compute(const HyperCube& cube, const NavTrack& track,
                                 double uhi_fov_deg) {
  UhiGeometry g;
  g.lines.resize(cube.lines());
  parallel_for(0, cube.lines(), [&](std::size_t line) {
    const double t = cube.line_timestamps()[line];
    if (!track.covers(t)) return;
    try {
      g.lines[line] =
          uhi_line_footprint(pose_at(track, t), uhi_fov_deg, cube.samples());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_intersection) throw;
    }
  });
  return g;
}

SpectralFeature coregister_spectrum(const RawDetection& det,
                                    const HyperCube& cube,
                                    const NavTrack& track,
                                    const CameraModel& cam,
                                    double uhi_fov_deg) {
  return coregister_spectrum(det, cube, UhiGeometry::compute(cube, track, uhi_fov_deg),
                             track, cam);
}

SpectralFeature coregister_spectrum(const RawDetection& det,
                                    const HyperCube& cube,
                                    const UhiGeometry& geometry,
                                    const NavTrack& track,
                                    const CameraModel& cam) {
  if (geometry.lines.size() != cube.lines()) {
    throw Error(ErrorKind::precondition, "UHI geometry does not match cube");
  }
  SpectralFeature out;
  const auto quad = detection_quad(det, track, cam);
  WorldBounds box{quad[0].x, quad[0].y, quad[0].x, quad[0].y};
  for (const auto& p : quad) box.expand(p);

  std::vector<double> sum(cube.bands(), 0.0);
  for (std::size_t line = 0; line < cube.lines(); ++line) {
    const auto& points = geometry.lines[line];
    for (std::size_t s = 0; s < points.size(); ++s) {
      const WorldPoint p = points[s];
      if (p.x < box.min_x || p.x > box.max_x || p.y < box.min_y ||
          p.y > box.max_y || !inside_polygon(quad, p)) {
        continue;
      }
      for (std::size_t b = 0; b < cube.bands(); ++b) {
        sum[b] += cube.at(line, s, b);
      }
      ++out.pixels;
    }
  }
  if (out.pixels == 0) return out;

  for (double& v : sum) v /= static_cast<double>(out.pixels);
  const auto nm = spectral_feature_wavelengths();
  double norm2 = 0.0;
  for (std::size_t i = 0; i < kSpectralSize; ++i) {
    out.values[i] = sample_grid(cube.grid(), sum, nm[i]);
    norm2 += out.values[i] * out.values[i];
  }
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    for (double& v : out.values) v /= norm;
  }
  return out;
}

WorldPoint locate_spectral_detection(const SpectralDetection& det,
                                     const HyperCube& cube,
                                     const NavTrack& track, double uhi_fov_deg) {
  if (det.line_max >= cube.lines() || det.sample_max >= cube.samples()) {
    throw Error(ErrorKind::out_of_range, "detection box outside the cube");
  }
  const auto& ts = cube.line_timestamps();
  const double line = 0.5 * static_cast<double>(det.line_min + det.line_max);
  const auto lo = static_cast<std::size_t>(std::floor(line));
  const std::size_t hi = std::min(lo + 1, ts.size() - 1);
  const double t = ts[lo] + (line - static_cast<double>(lo)) * (ts[hi] - ts[lo]);
  const double sample = 0.5 * static_cast<double>(det.sample_min + det.sample_max);
  return uhi_sample_to_world(pose_at(track, t), uhi_fov_deg, cube.samples(),
                             sample);
}

std::vector<Point2> embed_2d(std::span<const std::vector<double>> rows) {
  const std::size_t n = rows.size();
  std::vector<Point2> out(n);
  if (n == 0) return out;
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != d) {
      throw Error(ErrorKind::precondition, "feature rows differ in length");
    }
    for (double v : r) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::precondition, "feature values must be finite");
      }
    }
  }
  if (d == 0) return out;

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  // Orient a component so its largest-magnitude loading is positive.
  auto orient = [](Eigen::VectorXd v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v(i)) > std::abs(v(best))) best = i;
    }
    if (v(best) < 0.0) v = -v;
    return v;
  };

  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2);
  if (n < 3) {
    // Degenerate layout: project onto the direction between the two items.
    if (n == 2) {
      Eigen::VectorXd dir = (x.row(1) - x.row(0)).transpose();
      if (dir.norm() > 0.0) {
        dir = orient(dir / dir.norm());
        coords.col(0) = x * dir;
      }
    }
  } else {
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const auto& evals = solver.eigenvalues();
    const auto& evecs = solver.eigenvectors();
    const double floor_value =
        1e-12 * std::max(1.0, std::abs(evals(evals.size() - 1)));
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, evals.size()); ++k) {
      const Eigen::Index col = evals.size() - 1 - k;
      if (!(evals(col) > floor_value)) continue;
      coords.col(k) = x * orient(evecs.col(col));
    }
  }

  const double extent = coords.cwiseAbs().maxCoeff();
  if (extent > 0.0) coords /= extent;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {coords(static_cast<Eigen::Index>(i), 0),
              coords(static_cast<Eigen::Index>(i), 1)};
  }
  return out;
}

std::optional<FieldView> parse_field_view(std::string_view name) noexcept {
  if (name == "combined") return FieldView::combined;
  if (name == "pattern") return FieldView::pattern;
  if (name == "spectrum") return FieldView::spectrum;
  if (name == "probability") return FieldView::probability;
  return std::nullopt;
}

std::string_view to_string(FieldView view) noexcept {
  switch (view) {
    case FieldView::combined: return "combined";
    case FieldView::pattern: return "pattern";
    case FieldView::spectrum: return "spectrum";
    case FieldView::probability: return "probability";
  }
  return "combined";
}

std::vector<double> view_features(const FeatureVector& f, FieldView view) {
  std::span<const double> part;
  switch (view) {
    case FieldView::combined: part = f.values; break;
    case FieldView::pattern: part = f.pattern(); break;
    case FieldView::spectrum: part = f.spectral(); break;
    case FieldView::probability: part = f.probability(); break;
  }
  return {part.begin(), part.end()};
}

void assign_embedding(std::vector<FusedDetection>& dets, FieldView view) {
  std::vector<std::vector<double>> rows;
  rows.reserve(dets.size());
  for (const auto& d : dets) rows.push_back(view_features(d.features, view));
  const auto points = embed_2d(rows);
  for (std::size_t i = 0; i < dets.size(); ++i) dets[i].embedding = points[i];
}

std::vector<FusedDetection> fuse_detections(
    const std::vector<RawDetection>& raws, const FuseInputs& inputs) {
  std::vector<FusedDetection> out(raws.size());
  std::optional<UhiGeometry> geometry;
  if (inputs.cube && inputs.track) {
    geometry = UhiGeometry::compute(*inputs.cube, *inputs.track,
                                    inputs.uhi_fov_deg);
  }
  parallel_for(0, raws.size(), [&](std::size_t i) {
    const RawDetection& raw = raws[i];
    FusedDetection& fd = out[i];
    fd.id = static_cast<std::uint32_t>(i + 1);
    fd.raw = raw;
    fd.cls = raw.cls;
    fd.features.set_probability(raw.scores);

    if (inputs.frames_dir) {
      const auto frame_path = *inputs.frames_dir / (raw.frame_id + ".ppm");
      std::error_code ec;
      if (std::filesystem::exists(frame_path, ec)) {
        const RgbImage frame = read_ppm(frame_path);
        const auto col = static_cast<std::size_t>(std::floor(raw.bbox.x));
        const auto row = static_cast<std::size_t>(std::floor(raw.bbox.y));
        const auto w = static_cast<std::size_t>(
            std::ceil(raw.bbox.x + raw.bbox.w)) - col;
        const auto h = static_cast<std::size_t>(
            std::ceil(raw.bbox.y + raw.bbox.h)) - row;
        fd.features.set_pattern(
            extract_pattern_features(frame.crop(col, row, w, h)));
      }
    }

    if (inputs.track && inputs.track->covers(raw.t)) {
      try {
        fd.world = detection_footprint(raw, *inputs.track, inputs.camera);
        if (inputs.cube) {
          const auto spec = coregister_spectrum(raw, *inputs.cube, *geometry,
                                                *inputs.track, inputs.camera);
          fd.features.set_spectral(spec.values);
          fd.uncovered = !spec.covered();
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::no_intersection) throw;
        fd.world.reset();
      }
    }
  });
  assign_embedding(out, FieldView::combined);
  return out;
}

}  // namespace benthos
