#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "benthos/hypercube.hpp"
#include "benthos/mosaic.hpp"
#include "benthos/nav.hpp"
#include "benthos/radiometry.hpp"
#include "benthos/specmatch.hpp"

namespace benthos {

/// Desk-scale survey: a straight north-bound pass at constant altitude over a
/// sand background with one planted patch of a distinct material.
struct SyntheticSceneConfig {
  std::size_t lines = 200;
  std::size_t samples = kDefaultUhiSamples;
  double first_nm = 380.0;
  double last_nm = 750.0;
  double step_nm = 10.0;
  std::size_t patch_line = 90;
  std::size_t patch_sample = 30;
  std::size_t patch_lines = 12;
  std::size_t patch_samples = 9;
  double noise = 0.02;  // multiplicative, 1-sigma
  double altitude_m = kDefaultAltitudeM;
  double speed_mps = kDefaultSurveySpeedMps;
  double fov_deg = kDefaultFovDeg;
  double start_x = 10.0;
  double start_y = 5.0;
  double plate_distance_m = 1.5;
  std::uint64_t seed = 7;
  // RGB camera
  std::size_t frame_width = 160;
  std::size_t frame_height = 120;
  double frame_interval_s = 1.0;
};

struct SyntheticScene {
  SyntheticSceneConfig config;
  HyperCube reflectance;
  HyperCube radiance;
  NavTrack track;
  AttenuationProfile attenuation;
  IlluminantSpectrum illuminant;
  CalibrationPlate plate;
  ReferenceSpectrum sand;
  ReferenceSpectrum target;
  std::vector<double> line_distance_m;
  // Planted patch, inclusive cube indices.
  std::size_t patch_line_min = 0;
  std::size_t patch_line_max = 0;
  std::size_t patch_sample_min = 0;
  std::size_t patch_sample_max = 0;
  CameraModel camera;
  std::vector<TimedFrame> frames;
  /// Newline-delimited detector records for the frames.
  std::vector<std::string> detection_records;

  double line_interval_s() const;
};

/// Reference spectra used by the generator.
ReferenceSpectrum synthetic_sand(const WavelengthGrid& grid);
ReferenceSpectrum synthetic_white_plastic(const WavelengthGrid& grid);

SyntheticScene make_synthetic_scene(const SyntheticSceneConfig& config = {});

/// Writes the scene as pipeline inputs: radiance cube, nav, plate,
/// attenuation, reference library, frames and detection records.
void write_synthetic_scene(const SyntheticScene& scene,
                           const std::filesystem::path& dir);

/// Shortest round-trip decimal representation, used in file names.
std::string format_number(double value);

}  // namespace benthos
