#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "benthos/density.hpp"
#include "benthos/detfuse.hpp"
#include "benthos/error.hpp"
#include "benthos/hypercube.hpp"
#include "benthos/mosaic.hpp"
#include "benthos/parallel.hpp"
#include "benthos/radiometry.hpp"
#include "benthos/review.hpp"
#include "benthos/review_api.hpp"
#include "benthos/specmatch.hpp"
#include "benthos/synthetic.hpp"
#include "json.hpp"
#include "json_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace benthos::tools {
namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kSummaryFile = "run_summary.json";

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

// run_summary.json beside the outputs. No wall-clock fields so reruns match.
struct Summary {
  std::string command;
  json parameters = json::object();
  json outputs = json::array();
  json counts = json::object();

  void output(const fs::path& p) { outputs.push_back(p.filename().string()); }
  void write(const fs::path& dir) const {
    json doc = {{"command", command},
                {"version", kVersion},
                {"status", "ok"},
                {"parameters", parameters},
                {"outputs", outputs},
                {"counts", counts}};
    write_file(dir / kSummaryFile, doc.dump(2) + "\n");
  }
};

GeoOrigin require_origin(const NavTrack& track, const fs::path& nav_path) {
  if (!track.origin()) {
    throw Error(ErrorKind::precondition,
                "nav file has no geodetic origin: " + nav_path.string());
  }
  return *track.origin();
}

// ---------------------------------------------------------------------------

struct CorrectArgs {
  fs::path cube, plate, attenuation, nav, out;
  std::optional<double> distance;
};

int run_correct(const CorrectArgs& a) {
  if (a.nav.empty() == !a.distance.has_value()) {
    throw Error(ErrorKind::precondition, "give exactly one of --nav or --distance");
  }
  const HyperCube radiance = load_cube(a.cube);
  const CalibrationPlate plate = load_plate(a.plate);
  const AttenuationProfile att = load_attenuation(a.attenuation);
  const IlluminantSpectrum illum = calibrate_illuminant(plate, att);

  std::vector<double> distance(radiance.lines(), a.distance.value_or(0.0));
  if (!a.nav.empty()) {
    const NavTrack track = load_nav(a.nav);
    for (std::size_t l = 0; l < radiance.lines(); ++l) {
      distance[l] = pose_at(track, radiance.line_timestamps()[l]).altitude;
    }
  }
  const CorrectionResult result = correct_to_reflectance(radiance, illum, att, distance);
  if (result.clamped > 0) {
    spdlog::warn("{} reflectance values clamped to [0, {}]", result.clamped,
                 kMaxReflectance);
  }

  make_out_dir(a.out);
  Summary s{"correct"};
  const fs::path out = a.out / "reflectance.hdr";
  save_cube(result.cube, out, "benthos", "reflectance from " + a.cube.filename().string());
  s.output(out);
  s.output(payload_path_for(out));
  s.parameters = {{"cube", a.cube.string()},
                  {"plate", a.plate.string()},
                  {"attenuation", a.attenuation.string()},
                  {"distance_source", a.nav.empty() ? "constant" : "nav altitude"}};
  s.counts = {{"lines", result.cube.lines()},
              {"samples", result.cube.samples()},
              {"bands", result.cube.bands()},
              {"clamped", result.clamped},
              {"undefined", result.undefined}};
  s.write(a.out);
  spdlog::info("wrote {}", out.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct SamArgs {
  fs::path cube, ref, nav, out;
  double threshold = 0.0;
  std::size_t min_area = kDefaultMinArea;
  std::optional<double> band_min, band_max;
  bool anomaly = false;
  double uhi_fov = kDefaultFovDeg;
};

int run_sam(const SamArgs& a) {
  const HyperCube cube = load_cube(a.cube);
  const ReferenceSpectrum ref = load_reference(a.ref);
  std::optional<BandWindow> window;
  if (a.band_min || a.band_max) {
    window = BandWindow{a.band_min.value_or(cube.grid().front()),
                        a.band_max.value_or(cube.grid().back())};
  }
  const auto polarity = a.anomaly ? MatchPolarity::anomalous : MatchPolarity::similar;
  const SamMap map = a.anomaly ? anomaly_score(cube, ref, window)
                               : sam_map(cube, ref, window);
  const auto dets = segment_map(map, a.threshold, a.min_area, polarity);

  std::optional<NavTrack> track;
  if (!a.nav.empty()) track = load_nav(a.nav);

  make_out_dir(a.out);
  Summary s{"sam"};
  const fs::path heat = a.out / ("sam_" + ref.name + ".ppm");
  write_ppm(sam_heatmap(map), heat);
  s.output(heat);

  json list = json::array();
  json features = json::array();
  for (const auto& d : dets) {
    json j = {{"line_min", d.line_min},     {"line_max", d.line_max},
              {"sample_min", d.sample_min}, {"sample_max", d.sample_max},
              {"pixel_count", d.pixel_count}, {"mean_angle", d.mean_angle}};
    if (track) {
      const WorldPoint w = locate_spectral_detection(d, cube, *track, a.uhi_fov);
      j["world"] = {{"x", w.x}, {"y", w.y}};
      if (track->origin()) {
        const GeoPoint g = to_geodetic(*track->origin(), w);
        j["world"]["lat"] = g.lat_deg;
        j["world"]["lon"] = g.lon_deg;
        features.push_back(
            {{"type", "Feature"},
             {"geometry", {{"type", "Point"}, {"coordinates", {g.lon_deg, g.lat_deg}}}},
             {"properties",
              {{"reference", ref.name},
               {"pixel_count", d.pixel_count},
               {"mean_angle", d.mean_angle},
               {"line_min", d.line_min},
               {"line_max", d.line_max},
               {"sample_min", d.sample_min},
               {"sample_max", d.sample_max}}}});
      }
    }
    list.push_back(std::move(j));
  }
  const fs::path det_path = a.out / "sam_detections.json";
  write_file(det_path, json({{"reference", ref.name},
                             {"threshold", a.threshold},
                             {"min_area", a.min_area},
                             {"polarity", a.anomaly ? "anomalous" : "similar"},
                             {"detections", list}})
                               .dump(1) + "\n");
  s.output(det_path);
  if (track) {
    require_origin(*track, a.nav);
    const fs::path gj = a.out / "sam_detections.geojson";
    write_file(gj, json({{"type", "FeatureCollection"}, {"features", features}}).dump(1) +
                       "\n");
    s.output(gj);
  }
  s.parameters = {{"cube", a.cube.string()},
                  {"reference", a.ref.string()},
                  {"threshold", a.threshold},
                  {"min_area", a.min_area},
                  {"anomaly", a.anomaly}};
  s.counts = {{"detections", dets.size()}};
  s.write(a.out);
  spdlog::info("{} detections against '{}'", dets.size(), ref.name);
  return 0;
}

// ---------------------------------------------------------------------------

int run_pseudorgb(const fs::path& cube_path, const fs::path& out_dir) {
  const HyperCube cube = load_cube(cube_path);
  make_out_dir(out_dir);
  const fs::path out = out_dir / "pseudo_rgb.ppm";
  write_ppm(pseudo_rgb(cube), out);
  Summary s{"pseudorgb"};
  s.output(out);
  s.parameters = {{"cube", cube_path.string()},
                  {"bands_nm", {cube.grid()[band_index_for_wavelength(cube.grid(), kPseudoRedNm)],
                                cube.grid()[band_index_for_wavelength(cube.grid(), kPseudoGreenNm)],
                                cube.grid()[band_index_for_wavelength(cube.grid(), kPseudoBlueNm)]}}};
  s.counts = {{"lines", cube.lines()}, {"samples", cube.samples()}};
  s.write(out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct MosaicArgs {
  fs::path frames, nav, out;
  double fov = kDefaultFovDeg;
  double cell = kDefaultMosaicCellM;
  bool no_color_correct = false;
};

int run_mosaic(const MosaicArgs& a) {
  std::vector<TimedFrame> frames = load_frames(a.frames);
  if (frames.empty()) throw Error(ErrorKind::precondition, "no frames in " + a.frames.string());
  const NavTrack track = load_nav(a.nav);
  const CameraModel cam{a.fov, frames.front().image.width(), frames.front().image.height()};
  const std::size_t count = frames.size();
  MosaicResult result = build_mosaic(std::move(frames), track, cam, a.cell);
  ColorCorrection cc;
  if (!a.no_color_correct) {
    cc = color_correct(result.grid);
    if (cc.empty) spdlog::warn("mosaic is empty; color correction skipped");
  }
  make_out_dir(a.out);
  const fs::path out = a.out / "mosaic.ppm";
  save_mosaic(result.grid, out);
  Summary s{"mosaic"};
  s.output(out);
  s.output(world_file_path(out));
  s.parameters = {{"frames", a.frames.string()},
                  {"nav", a.nav.string()},
                  {"fov_deg", a.fov},
                  {"cell_m", a.cell},
                  {"color_correct", !a.no_color_correct}};
  s.counts = {{"frames", count},
              {"width", result.grid.width()},
              {"height", result.grid.height()},
              {"written_cells", result.grid.written_cells()},
              {"gains", cc.gains}};
  s.write(a.out);
  spdlog::info("mosaic {}x{} from {} frames", result.grid.width(), result.grid.height(),
               count);
  return 0;
}

// ---------------------------------------------------------------------------

struct FuseArgs {
  fs::path detections, nav, frames, cube, out;
  double threshold = kDefaultDetectionThreshold;
  double fov = kDefaultFovDeg;
  double uhi_fov = kDefaultFovDeg;
  std::size_t frame_width = 0, frame_height = 0;
  bool force = false;
};

int run_fuse(const FuseArgs& a) {
  const IngestResult ingest = ingest_detections(a.detections, a.threshold);
  for (const auto& e : ingest.errors) {
    spdlog::warn("{}:{}: {}", a.detections.string(), e.line, e.message);
  }
  const NavTrack track = load_nav(a.nav);
  std::size_t w = a.frame_width, h = a.frame_height;
  std::optional<fs::path> frames_dir;
  if (!a.frames.empty()) {
    frames_dir = fs::absolute(a.frames);
    if (w == 0 || h == 0) {
      for (const auto& entry : fs::directory_iterator(a.frames)) {
        if (entry.path().extension() == ".ppm") {
          const RgbImage img = read_ppm(entry.path());
          w = img.width();
          h = img.height();
          break;
        }
      }
    }
  }
  if (w == 0 || h == 0) {
    throw Error(ErrorKind::precondition,
                "frame size unknown: give --frames or --frame-width/--frame-height");
  }
  std::optional<HyperCube> cube;
  if (!a.cube.empty()) {
    cube = load_cube(a.cube);
    if (cube->kind() != CubeKind::reflectance) {
      spdlog::warn("co-registering a {} cube", to_string(cube->kind()));
    }
  }
  FuseInputs in;
  in.track = &track;
  in.camera = {a.fov, w, h};
  in.cube = cube ? &*cube : nullptr;
  in.uhi_fov_deg = a.uhi_fov;
  in.frames_dir = frames_dir;
  const auto fused = fuse_detections(ingest.detections, in);

  make_out_dir(a.out);
  Summary s{"fuse"};
  const fs::path fused_path = a.out / "fused.json";
  write_file(fused_path, fused_to_json(fused, frames_dir));
  s.output(fused_path);

  const fs::path session_dir = a.out / "session";
  if (fs::exists(session_dir)) {
    if (!a.force) {
      throw Error(ErrorKind::precondition,
                  "session exists (use --force to replace): " + session_dir.string());
    }
    fs::remove_all(session_dir);
  }
  SessionStore::create(session_dir, fused, frames_dir);
  s.outputs.push_back("session/");

  std::size_t uncovered = 0;
  for (const auto& d : fused) uncovered += d.uncovered ? 1 : 0;
  s.parameters = {{"detections", a.detections.string()},
                  {"nav", a.nav.string()},
                  {"threshold", a.threshold},
                  {"fov_deg", a.fov},
                  {"uhi_fov_deg", a.uhi_fov},
                  {"cube", a.cube.string()}};
  json errors = json::array();
  for (const auto& e : ingest.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  s.counts = {{"ingested", ingest.detections.size()},
              {"below_threshold", ingest.below_threshold},
              {"malformed", ingest.errors.size()},
              {"uhi_uncovered", uncovered},
              {"errors", errors}};
  s.write(a.out);
  spdlog::info("fused {} detections ({} below threshold, {} malformed)", fused.size(),
               ingest.below_threshold, ingest.errors.size());
  return 0;
}

// ---------------------------------------------------------------------------

int run_export(const fs::path& session_dir, const fs::path& out_dir) {
  const SessionStore store = SessionStore::open(session_dir);
  make_out_dir(out_dir);
  const fs::path out = out_dir / "export.json";
  write_file(out, session_export_json(store.session()));
  Summary s{"export"};
  s.output(out);
  s.parameters = {{"session", session_dir.string()}};
  s.counts = {{"exported", store.session().export_final().size()},
              {"rejected", store.session().rejected_count()},
              {"events", store.session().events().size()}};
  s.write(out_dir);
  return 0;
}

// ---------------------------------------------------------------------------

struct DensityArgs {
  fs::path session, export_file, weights, nav, out;
  std::optional<double> origin_lat, origin_lon;
  double cell = kDefaultDensityCellM;
};

int run_density(const DensityArgs& a) {
  if (a.session.empty() == a.export_file.empty()) {
    throw Error(ErrorKind::precondition, "give exactly one of --session or --export");
  }
  std::optional<GeoOrigin> origin;
  if (a.origin_lat && a.origin_lon) {
    origin = GeoOrigin{*a.origin_lat, *a.origin_lon};
  } else if (!a.nav.empty()) {
    origin = require_origin(load_nav(a.nav), a.nav);
  } else {
    throw Error(ErrorKind::precondition, "give --nav or --origin-lat/--origin-lon");
  }
  const std::vector<ExportRecord> records =
      a.session.empty() ? export_from_json(read_file(a.export_file))
                        : SessionStore::open(a.session).session().export_final();
  ClassWeights weights = ClassWeights::defaults();
  if (a.weights.empty()) {
    spdlog::warn("no --weights given; using placeholder class weights");
  } else {
    weights = load_weights(a.weights);
  }
  const DensityGrid grid = aggregate_density(records, weights, a.cell);
  if (grid.skipped > 0) {
    spdlog::warn("{} detections without a world footprint skipped", grid.skipped);
  }

  make_out_dir(a.out);
  Summary s{"density"};
  const fs::path gj = a.out / "density.geojson";
  write_file(gj, export_geojson(records, &grid, *origin));
  s.output(gj);

  json cells = json::array();
  for (const auto& [idx, cell] : grid.cells) {
    json counts = json::object();
    for (auto cls : kAllClasses) counts[std::string(to_string(cls))] = cell.counts[index_of(cls)];
    cells.push_back({{"ix", idx.ix}, {"iy", idx.iy}, {"kg", cell.kg},
                     {"kg_per_ha", cell.kg_per_ha}, {"counts", counts}});
  }
  const ClassCounts totals = class_counts(records);
  json by_class = json::object();
  for (auto cls : kAllClasses) by_class[std::string(to_string(cls))] = totals[index_of(cls)];
  const fs::path table = a.out / "density.json";
  write_file(table, json({{"cell_size_m", a.cell}, {"class_counts", by_class}, {"cells", cells}})
                            .dump(1) + "\n");
  s.output(table);
  s.parameters = {{"cell_m", a.cell},
                  {"source", a.session.empty() ? a.export_file.string() : a.session.string()},
                  {"weights", a.weights.empty() ? "placeholder" : a.weights.string()}};
  s.counts = {{"records", records.size()},
              {"cells", grid.cells.size()},
              {"skipped", grid.skipped},
              {"class_counts", by_class}};
  s.write(a.out);
  return 0;
}

// ---------------------------------------------------------------------------

int run_serve(const fs::path& session_dir, const std::string& host, int port,
              const fs::path& static_dir) {
  std::optional<fs::path> stat;
  if (!static_dir.empty()) stat = static_dir;
  ReviewApi api(SessionStore::open(session_dir), stat);
  spdlog::info("serving session {} on http://{}:{}", session_dir.string(), host, port);
  api.listen(host, port);
  return 0;
}

int run_synth(const fs::path& out_dir, std::uint64_t seed, double noise) {
  SyntheticSceneConfig cfg;
  cfg.seed = seed;
  cfg.noise = noise;
  const SyntheticScene scene = make_synthetic_scene(cfg);
  make_out_dir(out_dir);
  write_synthetic_scene(scene, out_dir);
  Summary s{"synth"};
  for (const char* f : {"radiance.hdr", "radiance.bil", "nav.csv", "plate.csv",
                        "attenuation.csv", "detections.ndjson", "weights.csv",
                        "scene.json"}) {
    s.outputs.push_back(f);
  }
  s.outputs.push_back("references/");
  s.outputs.push_back("frames/");
  s.parameters = {{"seed", seed}, {"noise", noise}};
  s.counts = {{"lines", cfg.lines}, {"frames", scene.frames.size()},
              {"detection_records", scene.detection_records.size()}};
  s.write(out_dir);
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("benthos");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("BENTHOS_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::io ? 2 : 1; }

}  // namespace

int run(int argc, char** argv) {
  configure_logging();

  CLI::App app{"benthos: hyperspectral and debris survey post-processing"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--jobs,-j", jobs, "Worker thread cap")->check(CLI::PositiveNumber);

  CorrectArgs correct;
  auto* c = app.add_subcommand("correct", "Radiance cube to reflectance");
  c->add_option("--cube", correct.cube, "Radiance cube header")->required();
  c->add_option("--plate", correct.plate, "Calibration plate CSV")->required();
  c->add_option("--attenuation", correct.attenuation, "Attenuation CSV")->required();
  c->add_option("--nav", correct.nav, "Nav CSV; per-line distance from altitude");
  c->add_option("--distance", correct.distance, "Constant sensor-seafloor distance (m)");
  c->add_option("--out", correct.out, "Output directory")->required();

  SamArgs sam;
  auto* sm = app.add_subcommand("sam", "Spectral angle map and segmentation");
  sm->add_option("--cube", sam.cube, "Reflectance cube header")->required();
  sm->add_option("--ref", sam.ref, "Reference spectrum CSV")->required();
  sm->add_option("--threshold", sam.threshold, "Angle threshold (rad)")
      ->required()
      ->check(CLI::Range(0.0, kHalfPi));
  sm->add_option("--min-area", sam.min_area, "Minimum component size (pixels)")
      ->capture_default_str();
  sm->add_option("--band-min", sam.band_min, "Band window lower bound (nm)");
  sm->add_option("--band-max", sam.band_max, "Band window upper bound (nm)");
  sm->add_flag("--anomaly", sam.anomaly, "Segment angles >= threshold against a background");
  sm->add_option("--nav", sam.nav, "Nav CSV; georeference detections");
  sm->add_option("--uhi-fov", sam.uhi_fov, "UHI across-track FOV (deg)")->capture_default_str();
  sm->add_option("--out", sam.out, "Output directory")->required();

  fs::path prgb_cube, prgb_out;
  auto* pr = app.add_subcommand("pseudorgb", "630/532/465 nm composite");
  pr->add_option("--cube", prgb_cube, "Cube header")->required();
  pr->add_option("--out", prgb_out, "Output directory")->required();

  MosaicArgs mosaic;
  auto* mo = app.add_subcommand("mosaic", "Nav-placed orthomosaic");
  mo->add_option("--frames", mosaic.frames, "Directory of <t>.ppm frames")->required();
  mo->add_option("--nav", mosaic.nav, "Nav CSV")->required();
  mo->add_option("--fov", mosaic.fov, "Camera horizontal FOV (deg)")->capture_default_str();
  mo->add_option("--cell", mosaic.cell, "Cell size (m)")->capture_default_str();
  mo->add_flag("--no-color-correct", mosaic.no_color_correct, "Skip gray-world balance");
  mo->add_option("--out", mosaic.out, "Output directory")->required();

  FuseArgs fuse;
  auto* fu = app.add_subcommand("fuse", "Ingest detections, attach features, open a session");
  fu->add_option("--detections", fuse.detections, "NDJSON detection records")->required();
  fu->add_option("--nav", fuse.nav, "Nav CSV")->required();
  fu->add_option("--frames", fuse.frames, "Directory of <frame_id>.ppm frames");
  fu->add_option("--cube", fuse.cube, "Reflectance cube for spectral features");
  fu->add_option("--threshold", fuse.threshold, "Minimum max class score")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  fu->add_option("--fov", fuse.fov, "Camera horizontal FOV (deg)")->capture_default_str();
  fu->add_option("--uhi-fov", fuse.uhi_fov, "UHI across-track FOV (deg)")->capture_default_str();
  fu->add_option("--frame-width", fuse.frame_width, "Frame width when --frames is absent");
  fu->add_option("--frame-height", fuse.frame_height, "Frame height when --frames is absent");
  fu->add_flag("--force", fuse.force, "Replace an existing session");
  fu->add_option("--out", fuse.out, "Output directory")->required();

  fs::path serve_session, serve_static;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* se = app.add_subcommand("serve", "Review API for one session");
  se->add_option("--session", serve_session, "Session directory")->required();
  se->add_option("--host", serve_host, "Bind address")->capture_default_str();
  se->add_option("--port", serve_port, "Port")->capture_default_str()->check(CLI::Range(0, 65535));
  se->add_option("--static", serve_static, "Directory of UI assets");

  DensityArgs density;
  auto* de = app.add_subcommand("density", "Per-class counts and kg/ha grid");
  de->add_option("--session", density.session, "Session directory");
  de->add_option("--export", density.export_file, "Export JSON from `export`");
  de->add_option("--weights", density.weights, "CSV class,kg");
  de->add_option("--nav", density.nav, "Nav CSV carrying the geodetic origin");
  de->add_option("--origin-lat", density.origin_lat, "Origin latitude (deg)");
  de->add_option("--origin-lon", density.origin_lon, "Origin longitude (deg)");
  de->add_option("--cell", density.cell, "Cell size (m)")->capture_default_str();
  de->add_option("--out", density.out, "Output directory")->required();

  fs::path export_session, export_out;
  auto* ex = app.add_subcommand("export", "Final reviewed detections");
  ex->add_option("--session", export_session, "Session directory")->required();
  ex->add_option("--out", export_out, "Output directory")->required();

  fs::path synth_out;
  std::uint64_t synth_seed = SyntheticSceneConfig{}.seed;
  double synth_noise = SyntheticSceneConfig{}.noise;
  auto* sy = app.add_subcommand("synth", "Write the synthetic survey scene");
  sy->add_option("--out", synth_out, "Output directory")->required();
  sy->add_option("--seed", synth_seed, "Noise seed")->capture_default_str();
  sy->add_option("--noise", synth_noise, "Multiplicative noise sigma")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const CLI::App* sub : app.get_subcommands()) failed = sub;
    std::cerr << failed->help();
    return 1;
  }

  set_max_jobs(jobs);
  try {
    if (c->parsed()) return run_correct(correct);
    if (sm->parsed()) return run_sam(sam);
    if (pr->parsed()) return run_pseudorgb(prgb_cube, prgb_out);
    if (mo->parsed()) return run_mosaic(mosaic);
    if (fu->parsed()) return run_fuse(fuse);
    if (se->parsed()) return run_serve(serve_session, serve_host, serve_port, serve_static);
    if (de->parsed()) return run_density(density);
    if (ex->parsed()) return run_export(export_session, export_out);
    if (sy->parsed()) return run_synth(synth_out, synth_seed, synth_noise);
  } catch (const Error& e) {
    spdlog::error("{}: {}", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    spdlog::error("io: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

}  // namespace benthos::tools

int main(int argc, char** argv) { return benthos::tools::run(argc, argv); }
