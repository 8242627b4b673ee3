#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "benthos/hypercube.hpp"

namespace benthos {

/// Water attenuation coefficient c(lambda) in 1/m, one value per band.
struct AttenuationProfile {
  WavelengthGrid grid;
  std::vector<double> c_per_m;

  void validate() const;
  static AttenuationProfile constant(const WavelengthGrid& grid, double c);
};

/// Target of known reflectance imaged at a known distance.
struct CalibrationPlate {
  WavelengthGrid grid;
  std::vector<double> plate_reflectance;
  std::vector<double> measured_radiance;
  double plate_distance_m = 0.0;

  void validate() const;
};

/// Effective source intensity at zero path length, per band.
struct IlluminantSpectrum {
  WavelengthGrid grid;
  std::vector<double> intensity;
};

inline constexpr double kMaxReflectance = 4.0;

// Forward model used throughout: L = R * I0 * exp(-2 * c * d). Light travels
// the sensor-seafloor distance d twice (source to target, target to sensor).

/// Two-way transmittance exp(-2 c d).
double two_way_transmittance(double c_per_m, double distance_m);

IlluminantSpectrum calibrate_illuminant(const CalibrationPlate& plate,
                                        const AttenuationProfile& att);

/// Reflectance of a single radiance spectrum at distance d, unclamped.
/// Bands with zero illuminant yield zero.
std::vector<double> correct_spectrum(std::span<const double> radiance,
                                     const IlluminantSpectrum& illum,
                                     const AttenuationProfile& att,
                                     double distance_m);

struct CorrectionResult {
  HyperCube cube;
  /// Values clamped to [0, kMaxReflectance].
  std::size_t clamped = 0;
  /// Band values left at zero because the illuminant was zero there.
  std::size_t undefined = 0;
};

CorrectionResult correct_to_reflectance(const HyperCube& radiance,
                                        const IlluminantSpectrum& illum,
                                        const AttenuationProfile& att,
                                        std::span<const double> distance_m);

HyperCube forward_model(const HyperCube& reflectance,
                        const IlluminantSpectrum& illum,
                        const AttenuationProfile& att,
                        std::span<const double> distance_m);

/// `wavelength_nm,value` rows; blank lines, `#` comments and a non-numeric
/// header row are skipped.
AttenuationProfile load_attenuation(const std::filesystem::path& path);
void save_attenuation(const AttenuationProfile& att,
                      const std::filesystem::path& path);

/// `distance_m: <meters>` line followed by `wavelength_nm,reflectance,radiance`
/// rows.
CalibrationPlate load_plate(const std::filesystem::path& path);
void save_plate(const CalibrationPlate& plate,
                const std::filesystem::path& path);

}  // namespace benthos
