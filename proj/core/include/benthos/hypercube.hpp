#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "benthos/image.hpp"

namespace benthos {

/// Band-center wavelengths in nanometers, strictly increasing, at least three
/// bands, all within [300, 1000] nm.
class WavelengthGrid {
 public:
  WavelengthGrid() = default;
  explicit WavelengthGrid(std::vector<double> wavelengths_nm);

  /// Evenly spaced grid first, first+step, ... up to and including last.
  static WavelengthGrid uniform(double first_nm, double last_nm,
                                double step_nm);

  std::size_t size() const noexcept { return nm_.size(); }
  double operator[](std::size_t band) const { return nm_[band]; }
  double front() const { return nm_.front(); }
  double back() const { return nm_.back(); }
  std::span<const double> values() const noexcept { return nm_; }
  double mean_spacing() const;

  friend bool operator==(const WavelengthGrid&,
                         const WavelengthGrid&) = default;

 private:
  std::vector<double> nm_;
};

enum class CubeKind { radiance, reflectance };

std::string to_string(CubeKind kind);
CubeKind parse_cube_kind(const std::string& text);

/// Push-broom cube: one across-track line per time step. Values are held in
/// band-interleaved-by-line order, index ((line * bands) + band) * samples +
/// sample, which is also the on-disk order.
class HyperCube {
 public:
  HyperCube() = default;
  HyperCube(std::size_t lines, std::size_t samples, WavelengthGrid grid,
            CubeKind kind, std::vector<double> data,
            std::vector<double> line_timestamps);

  /// Zero-filled cube with timestamps 0, dt, 2dt, ...
  static HyperCube zeros(std::size_t lines, std::size_t samples,
                         WavelengthGrid grid, CubeKind kind,
                         double line_interval_s = 0.0);

  std::size_t lines() const noexcept { return lines_; }
  std::size_t samples() const noexcept { return samples_; }
  std::size_t bands() const noexcept { return grid_.size(); }
  const WavelengthGrid& grid() const noexcept { return grid_; }
  CubeKind kind() const noexcept { return kind_; }
  const std::vector<double>& line_timestamps() const noexcept {
    return timestamps_;
  }

  std::size_t index(std::size_t line, std::size_t sample,
                    std::size_t band) const noexcept {
    return (line * grid_.size() + band) * samples_ + sample;
  }
  double at(std::size_t line, std::size_t sample, std::size_t band) const {
    return data_[index(line, sample, band)];
  }
  double& at(std::size_t line, std::size_t sample, std::size_t band) {
    return data_[index(line, sample, band)];
  }

  /// All samples of one band within one line (contiguous in BIL).
  std::span<const double> line_band(std::size_t line, std::size_t band) const;
  std::vector<double> spectrum(std::size_t line, std::size_t sample) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> mutable_data() noexcept { return data_; }

  /// Re-checks every invariant; throws Error on violation.
  void validate() const;

  /// Copy with a different kind; data is re-validated for the new kind.
  HyperCube with_kind(CubeKind kind) const;

  friend bool operator==(const HyperCube&, const HyperCube&) = default;

 private:
  std::size_t lines_ = 0;
  std::size_t samples_ = 0;
  WavelengthGrid grid_;
  CubeKind kind_ = CubeKind::radiance;
  std::vector<double> data_;
  std::vector<double> timestamps_;
};

struct CubeHeader {
  std::size_t lines = 0;
  std::size_t samples = 0;
  std::size_t bands = 0;
  WavelengthGrid grid;
  CubeKind kind = CubeKind::radiance;
  std::string interleave = "bil";
  std::string byte_order = "little";
  std::string data_type = "float32";
  std::string sensor_id;
  std::optional<std::string> comment;
  std::vector<double> timestamps;

  std::size_t payload_bytes() const noexcept {
    return lines * samples * bands * 4;
  }
};

/// Payload path for a header: same directory and stem, extension ".bil".
std::filesystem::path payload_path_for(const std::filesystem::path& header);

CubeHeader read_cube_header(const std::filesystem::path& header_path);

/// Loads header + float32 little-endian BIL payload.
HyperCube load_cube(const std::filesystem::path& header_path);

/// Writes header and payload. Values are narrowed to float32; a cube whose
/// values are float-representable round-trips bit-exactly.
void save_cube(const HyperCube& cube, const std::filesystem::path& header_path,
               const std::string& sensor_id = "benthos",
               const std::optional<std::string>& comment = std::nullopt);

/// Nearest band center to target_nm; ties go to the lower index. Targets more
/// than half the mean band spacing outside the grid are rejected.
std::size_t band_index_for_wavelength(const WavelengthGrid& grid,
                                      double target_nm);

/// Linear-interpolated percentile (p in [0, 100]) of the given values.
double percentile(std::vector<double> values, double p);

inline constexpr double kPseudoRedNm = 630.0;
inline constexpr double kPseudoGreenNm = 532.0;
inline constexpr double kPseudoBlueNm = 465.0;

/// Pseudo-RGB composite from the bands nearest 630/532/465 nm. Each channel is
/// stretched independently from its 1st..99th percentile onto 0..255. When a
/// channel's stretch window collapses (constant band) the band is mapped on
/// the absolute scale 0..1 -> 0..255 instead.
RgbImage pseudo_rgb(const HyperCube& cube);

/// Stretch used by pseudo_rgb for one band, exposed for testing.
std::vector<std::uint8_t> stretch_band(std::span<const double> band_values,
                                       double low_pct = 1.0,
                                       double high_pct = 99.0);

}  // namespace benthos
