#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benthos/hypercube.hpp"
#include "benthos/image.hpp"

namespace benthos {

inline constexpr double kHalfPi = 1.57079632679489661923;

struct ReferenceSpectrum {
  std::string name;
  WavelengthGrid grid;
  std::vector<double> values;

  void validate() const;

  /// Linear interpolation onto the target wavelengths. Targets outside this
  /// reference's grid are rejected (no extrapolation).
  std::vector<double> resample(std::span<const double> target_nm) const;
};

/// Spectra keyed by name.
using ReferenceLibrary = std::map<std::string, ReferenceSpectrum>;

/// `wavelength_nm,reflectance` CSV; the reference name is the file stem.
ReferenceSpectrum load_reference(const std::filesystem::path& csv_path);
void save_reference(const ReferenceSpectrum& ref,
                    const std::filesystem::path& csv_path);
/// Every *.csv file in the directory.
ReferenceLibrary load_reference_library(const std::filesystem::path& dir);

/// Angle between two spectra, arccos of the clamped cosine similarity.
double spectral_angle(std::span<const double> s, std::span<const double> r);

/// Inclusive wavelength window restricting which bands take part in matching.
struct BandWindow {
  double min_nm = 0.0;
  double max_nm = 0.0;
};

/// Per-pixel spectral angle against one reference, angles in [0, pi/2].
struct SamMap {
  std::size_t lines = 0;
  std::size_t samples = 0;
  std::vector<double> angles;
  std::string reference;

  double at(std::size_t line, std::size_t sample) const {
    return angles[line * samples + sample];
  }
};

/// Spectral angle for every pixel. Pixels with zero norm over the window get
/// pi/2. The reference is resampled onto the cube bands inside the window.
SamMap sam_map(const HyperCube& cube, const ReferenceSpectrum& ref,
               std::optional<BandWindow> window = std::nullopt);

/// Same computation as sam_map against a background spectrum; large angles
/// flag anomalies.
SamMap anomaly_score(const HyperCube& cube,
                     const ReferenceSpectrum& background,
                     std::optional<BandWindow> window = std::nullopt);

struct SpectralDetection {
  std::size_t line_min = 0;
  std::size_t line_max = 0;
  std::size_t sample_min = 0;
  std::size_t sample_max = 0;
  std::size_t pixel_count = 0;
  double mean_angle = 0.0;
  std::string reference;

  friend bool operator==(const SpectralDetection&,
                         const SpectralDetection&) = default;
};

enum class MatchPolarity {
  similar,    // angle <= threshold
  anomalous,  // angle >= threshold
};

inline constexpr std::size_t kDefaultMinArea = 8;

/// 4-connected components of qualifying pixels with at least min_area pixels,
/// ordered by (line_min, sample_min).
std::vector<SpectralDetection> segment_map(const SamMap& map, double threshold,
                                           std::size_t min_area,
                                           MatchPolarity polarity);

inline std::vector<SpectralDetection> threshold_segment(
    const SamMap& map, double threshold,
    std::size_t min_area = kDefaultMinArea) {
  return segment_map(map, threshold, min_area, MatchPolarity::similar);
}

/// Heatmap: red at angle 0 (similar) grading linearly to blue at pi/2.
RgbImage sam_heatmap(const SamMap& map);

}  // namespace benthos
