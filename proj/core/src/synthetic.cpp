#include "benthos/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "benthos/density.hpp"
#include "benthos/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace benthos {

using nlohmann::json;

namespace {

constexpr GeoOrigin kSceneOrigin{60.3913, 5.3221};
constexpr Rgb kPlasticRgb{232, 232, 238};
constexpr Rgb kStarfishRgb{214, 92, 40};

double ramp(double nm, double lo, double hi) {
  return std::clamp((nm - lo) / (hi - lo), 0.0, 1.0);
}

// Deterministic +-amplitude texture keyed on a 1 cm world lattice.
int texture_offset(double x, double y, int amplitude) {
  const auto ix = static_cast<std::int64_t>(std::floor(x * 100.0));
  const auto iy = static_cast<std::int64_t>(std::floor(y * 100.0));
  std::uint64_t h = static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ULL ^
                    static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4FULL;
  h ^= h >> 29;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 32;
  return static_cast<int>(h % static_cast<std::uint64_t>(2 * amplitude + 1)) -
         amplitude;
}

std::uint8_t clamp_byte(int v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

}  // namespace

std::string format_number(double value) { return detail::format_double(value); }

double SyntheticScene::line_interval_s() const {
  const auto& ts = reflectance.line_timestamps();
  return ts.size() > 1 ? ts[1] - ts[0] : 0.0;
}

ReferenceSpectrum synthetic_sand(const WavelengthGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    v[b] = 0.12 + 0.30 * ramp(grid[b], 380.0, 750.0);
  }
  return {"sand", grid, std::move(v)};
}

ReferenceSpectrum synthetic_white_plastic(const WavelengthGrid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const double nm = grid[b];
    v[b] = 0.62 - 0.28 * ramp(nm, 380.0, 750.0) +
           0.06 * std::exp(-std::pow((nm - 470.0) / 40.0, 2.0));
  }
  return {"white_plastic", grid, std::move(v)};
}

SyntheticScene make_synthetic_scene(const SyntheticSceneConfig& cfg) {
  if (cfg.patch_line + cfg.patch_lines > cfg.lines ||
      cfg.patch_sample + cfg.patch_samples > cfg.samples || cfg.samples < 2) {
    throw Error(ErrorKind::precondition, "planted patch does not fit the cube");
  }
  SyntheticScene scene;
  scene.config = cfg;
  const WavelengthGrid grid = WavelengthGrid::uniform(cfg.first_nm, cfg.last_nm,
                                                      cfg.step_nm);
  scene.sand = synthetic_sand(grid);
  scene.target = synthetic_white_plastic(grid);

  // Square UHI pixels: along-track spacing equals the across-track pitch.
  const double pitch = swath_width(cfg.altitude_m, cfg.fov_deg) /
                       static_cast<double>(cfg.samples - 1);
  const double dt = pitch / cfg.speed_mps;
  const double duration = dt * static_cast<double>(cfg.lines - 1);

  std::vector<NavSample> nav;
  const double nav_step = 0.1;
  for (double t = -1.0; t <= duration + 1.0 + 1e-9; t += nav_step) {
    NavSample s;
    s.t = std::round(t * 1e6) / 1e6;
    s.x = cfg.start_x;
    s.y = cfg.start_y + cfg.speed_mps * s.t;
    s.depth = 12.0;
    s.altitude = cfg.altitude_m;
    nav.push_back(s);
  }
  scene.track = NavTrack(std::move(nav), kSceneOrigin);

  scene.reflectance = HyperCube::zeros(cfg.lines, cfg.samples, grid,
                                       CubeKind::reflectance, dt);
  scene.patch_line_min = cfg.patch_line;
  scene.patch_line_max = cfg.patch_line + cfg.patch_lines - 1;
  scene.patch_sample_min = cfg.patch_sample;
  scene.patch_sample_max = cfg.patch_sample + cfg.patch_samples - 1;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise);
  for (std::size_t l = 0; l < cfg.lines; ++l) {
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const bool planted = l >= scene.patch_line_min && l <= scene.patch_line_max &&
                           s >= scene.patch_sample_min && s <= scene.patch_sample_max;
      const auto& ref = planted ? scene.target.values : scene.sand.values;
      for (std::size_t b = 0; b < grid.size(); ++b) {
        scene.reflectance.at(l, s, b) = std::max(0.0, ref[b] * (1.0 + noise(rng)));
      }
    }
  }

  std::vector<double> c(grid.size()), i0(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const double nm = grid[b];
    c[b] = 0.05 + 0.25 * std::pow(ramp(nm, 380.0, 750.0), 2.0);
    i0[b] = 0.6 + 0.4 * std::exp(-std::pow((nm - 550.0) / 120.0, 2.0));
  }
  scene.attenuation = {grid, c};
  scene.illuminant = {grid, i0};

  scene.line_distance_m.resize(cfg.lines);
  for (std::size_t l = 0; l < cfg.lines; ++l) {
    scene.line_distance_m[l] =
        pose_at(scene.track, scene.reflectance.line_timestamps()[l]).altitude;
  }
  scene.radiance = forward_model(scene.reflectance, scene.illuminant,
                                 scene.attenuation, scene.line_distance_m);

  scene.plate.grid = grid;
  scene.plate.plate_distance_m = cfg.plate_distance_m;
  scene.plate.plate_reflectance.assign(grid.size(), 0.95);
  scene.plate.measured_radiance.resize(grid.size());
  for (std::size_t b = 0; b < grid.size(); ++b) {
    scene.plate.measured_radiance[b] =
        0.95 * i0[b] * two_way_transmittance(c[b], cfg.plate_distance_m);
  }

  // Seafloor rectangle covered by the planted UHI pixels.
  const auto first = uhi_line_footprint(
      pose_at(scene.track, scene.reflectance.line_timestamps()[scene.patch_line_min]),
      cfg.fov_deg, cfg.samples);
  const auto last = uhi_line_footprint(
      pose_at(scene.track, scene.reflectance.line_timestamps()[scene.patch_line_max]),
      cfg.fov_deg, cfg.samples);
  const WorldBounds patch{first[scene.patch_sample_min].x - pitch / 2.0,
                          first[scene.patch_sample_min].y - pitch / 2.0,
                          last[scene.patch_sample_max].x + pitch / 2.0,
                          last[scene.patch_sample_max].y + pitch / 2.0};
  // A starfish a meter to port of the plastic.
  const WorldBounds starfish{patch.min_x - 0.9, patch.min_y + 0.6,
                             patch.min_x - 0.75, patch.min_y + 0.75};

  scene.camera = {cfg.fov_deg, cfg.frame_width, cfg.frame_height};
  for (double t = 0.0; t <= duration + 1e-9; t += cfg.frame_interval_s) {
    const NavSample pose = pose_at(scene.track, t);
    TimedFrame frame{format_number(t), t,
                     RgbImage(cfg.frame_width, cfg.frame_height)};
    struct Box {
      std::size_t min_c = SIZE_MAX, min_r = SIZE_MAX, max_c = 0, max_r = 0;
      bool any = false;
      void add(std::size_t r, std::size_t c) {
        min_c = std::min(min_c, c);
        min_r = std::min(min_r, r);
        max_c = std::max(max_c, c);
        max_r = std::max(max_r, r);
        any = true;
      }
    } plastic_box, starfish_box;
    for (std::size_t r = 0; r < cfg.frame_height; ++r) {
      for (std::size_t col = 0; col < cfg.frame_width; ++col) {
        const WorldPoint p = pixel_to_world(
            pose, scene.camera,
            {static_cast<double>(col) + 0.5, static_cast<double>(r) + 0.5});
        auto inside = [&](const WorldBounds& b) {
          return p.x >= b.min_x && p.x <= b.max_x && p.y >= b.min_y && p.y <= b.max_y;
        };
        if (inside(patch)) {
          frame.image.set(r, col, kPlasticRgb);
          plastic_box.add(r, col);
        } else if (inside(starfish)) {
          frame.image.set(r, col, kStarfishRgb);
          starfish_box.add(r, col);
        } else {
          const int d = texture_offset(p.x, p.y, 12);
          frame.image.set(r, col, {clamp_byte(194 + d), clamp_byte(178 + d),
                                   clamp_byte(128 + d / 2)});
        }
      }
    }
    auto record = [&](const Box& b, json scores) {
      json j = {{"frame_id", frame.id},
                {"t", t},
                {"bbox",
                 {b.min_c, b.min_r, b.max_c - b.min_c + 1, b.max_r - b.min_r + 1}},
                {"scores", std::move(scores)}};
      scene.detection_records.push_back(j.dump());
    };
    if (plastic_box.any) {
      record(plastic_box, {{"plastic", 0.82}, {"bottle", 0.11}});
    }
    if (starfish_box.any) {
      record(starfish_box, {{"starfish", 0.64}, {"other", 0.2}});
    }
    // Low-confidence clutter the ingest threshold must drop.
    Box clutter;
    clutter.add(4, 4);
    clutter.add(20, 24);
    record(clutter, {{"tire", 0.21}, {"other", 0.18}});
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

void write_synthetic_scene(const SyntheticScene& scene,
                           const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "references", ec);
  std::filesystem::create_directories(dir / "frames", ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string());

  save_cube(scene.radiance, dir / "radiance.hdr", "synthetic-uhi",
            "synthetic survey line");
  save_nav(scene.track, dir / "nav.csv");
  save_plate(scene.plate, dir / "plate.csv");
  save_attenuation(scene.attenuation, dir / "attenuation.csv");
  save_reference(scene.sand, dir / "references" / "sand.csv");
  save_reference(scene.target, dir / "references" / "white_plastic.csv");
  for (const auto& f : scene.frames) {
    write_ppm(f.image, dir / "frames" / (f.id + ".ppm"));
  }
  std::string records;
  for (const auto& r : scene.detection_records) records += r + "\n";
  detail::write_text_file(dir / "detections.ndjson", records);

  const ClassWeights w = ClassWeights::defaults();
  std::ostringstream weights;
  weights << "class,kg\n";
  for (auto cls : kAllClasses) {
    weights << to_string(cls) << ',' << detail::format_double(w[cls]) << '\n';
  }
  detail::write_text_file(dir / "weights.csv", weights.str());

  const auto& cfg = scene.config;
  json truth = {{"patch",
                 {{"line_min", scene.patch_line_min},
                  {"line_max", scene.patch_line_max},
                  {"sample_min", scene.patch_sample_min},
                  {"sample_max", scene.patch_sample_max}}},
                {"uhi_fov_deg", cfg.fov_deg},
                {"camera_fov_deg", scene.camera.hfov_deg},
                {"altitude_m", cfg.altitude_m},
                {"speed_mps", cfg.speed_mps},
                {"line_interval_s", scene.line_interval_s()}};
  detail::write_text_file(dir / "scene.json", truth.dump(1) + "\n");
}

}  // namespace benthos
