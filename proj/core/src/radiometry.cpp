#include "benthos/radiometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "benthos/error.hpp"
#include "benthos/parallel.hpp"
#include "text_util.hpp"

namespace benthos {

namespace {

void require_same_grid(const WavelengthGrid& a, const WavelengthGrid& b,
                       const char* what) {
  if (!(a == b)) {
    throw Error(ErrorKind::incompatible_grid,
                std::string("wavelength grids differ: ") + what);
  }
}

void require_length(std::size_t n, const WavelengthGrid& grid,
                    const char* what) {
  if (n != grid.size()) {
    throw Error(ErrorKind::incompatible_grid,
                std::string(what) + " length does not match its grid");
  }
}

void require_distances(std::span<const double> distance_m, std::size_t lines) {
  if (distance_m.size() != lines) {
    throw Error(ErrorKind::precondition,
                "need one distance per cube line (" + std::to_string(lines) +
                    "), got " + std::to_string(distance_m.size()));
  }
  for (double d : distance_m) {
    if (!std::isfinite(d) || d <= 0.0) {
      throw Error(ErrorKind::precondition, "distances must be positive");
    }
  }
}

}  // namespace

void AttenuationProfile::validate() const {
  require_length(c_per_m.size(), grid, "attenuation");
  for (double c : c_per_m) {
    if (!std::isfinite(c) || c < 0.0) {
      throw Error(ErrorKind::format,
                  "attenuation coefficients must be finite and >= 0");
    }
  }
}

AttenuationProfile AttenuationProfile::constant(const WavelengthGrid& grid,
                                                double c) {
  AttenuationProfile att{grid, std::vector<double>(grid.size(), c)};
  att.validate();
  return att;
}

void CalibrationPlate::validate() const {
  require_length(plate_reflectance.size(), grid, "plate reflectance");
  require_length(measured_radiance.size(), grid, "plate radiance");
  if (!std::isfinite(plate_distance_m) || plate_distance_m <= 0.0) {
    throw Error(ErrorKind::precondition, "plate distance must be positive");
  }
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const double r = plate_reflectance[b];
    if (!std::isfinite(r) || r < 0.0 || r > 1.0) {
      throw Error(ErrorKind::format, "plate reflectance must lie in (0, 1]");
    }
    if (!std::isfinite(measured_radiance[b]) || measured_radiance[b] < 0.0) {
      throw Error(ErrorKind::format, "plate radiance must be >= 0");
    }
  }
}

double two_way_transmittance(double c_per_m, double distance_m) {
  return std::exp(-2.0 * c_per_m * distance_m);
}

IlluminantSpectrum calibrate_illuminant(const CalibrationPlate& plate,
                                        const AttenuationProfile& att) {
  require_same_grid(plate.grid, att.grid, "plate vs attenuation");
  plate.validate();
  att.validate();
  IlluminantSpectrum illum{plate.grid, std::vector<double>(plate.grid.size())};
  for (std::size_t b = 0; b < plate.grid.size(); ++b) {
    const double r = plate.plate_reflectance[b];
    if (r == 0.0) {
      throw Error(ErrorKind::degenerate_plate,
                  "plate reflectance is zero at " +
                      detail::format_double(plate.grid[b]) + " nm");
    }
    illum.intensity[b] =
        plate.measured_radiance[b] /
        (r * two_way_transmittance(att.c_per_m[b], plate.plate_distance_m));
  }
  return illum;
}

std::vector<double> correct_spectrum(std::span<const double> radiance,
                                     const IlluminantSpectrum& illum,
                                     const AttenuationProfile& att,
                                     double distance_m) {
  require_same_grid(illum.grid, att.grid, "illuminant vs attenuation");
  require_length(radiance.size(), illum.grid, "radiance spectrum");
  std::vector<double> out(radiance.size(), 0.0);
  for (std::size_t b = 0; b < radiance.size(); ++b) {
    const double denom =
        illum.intensity[b] * two_way_transmittance(att.c_per_m[b], distance_m);
    out[b] = denom > 0.0 ? radiance[b] / denom : 0.0;
  }
  return out;
}

CorrectionResult correct_to_reflectance(const HyperCube& radiance,
                                        const IlluminantSpectrum& illum,
                                        const AttenuationProfile& att,
                                        std::span<const double> distance_m) {
  if (radiance.kind() != CubeKind::radiance) {
    throw Error(ErrorKind::precondition,
                "correction expects a radiance cube");
  }
  require_same_grid(radiance.grid(), illum.grid, "cube vs illuminant");
  require_same_grid(radiance.grid(), att.grid, "cube vs attenuation");
  att.validate();
  require_distances(distance_m, radiance.lines());

  const std::size_t bands = radiance.bands();
  const std::size_t samples = radiance.samples();
  std::vector<double> out(radiance.data().size());
  std::vector<std::size_t> clamped(radiance.lines(), 0);
  std::vector<std::size_t> undefined(radiance.lines(), 0);

  parallel_for(0, radiance.lines(), [&](std::size_t line) {
    for (std::size_t b = 0; b < bands; ++b) {
      const double denom = illum.intensity[b] *
                           two_way_transmittance(att.c_per_m[b], distance_m[line]);
      const auto in = radiance.line_band(line, b);
      const std::size_t base = radiance.index(line, 0, b);
      for (std::size_t s = 0; s < samples; ++s) {
        if (!(denom > 0.0)) {
          out[base + s] = 0.0;
          ++undefined[line];
          continue;
        }
        const double r = in[s] / denom;
        if (r > kMaxReflectance || r < 0.0) ++clamped[line];
        out[base + s] = std::clamp(r, 0.0, kMaxReflectance);
      }
    }
  });

  CorrectionResult result{
      HyperCube(radiance.lines(), samples, radiance.grid(),
                CubeKind::reflectance, std::move(out),
                radiance.line_timestamps()),
      0, 0};
  for (std::size_t l = 0; l < radiance.lines(); ++l) {
    result.clamped += clamped[l];
    result.undefined += undefined[l];
  }
  return result;
}

HyperCube forward_model(const HyperCube& reflectance,
                        const IlluminantSpectrum& illum,
                        const AttenuationProfile& att,
                        std::span<const double> distance_m) {
  require_same_grid(reflectance.grid(), illum.grid, "cube vs illuminant");
  require_same_grid(reflectance.grid(), att.grid, "cube vs attenuation");
  att.validate();
  require_distances(distance_m, reflectance.lines());

  const std::size_t bands = reflectance.bands();
  const std::size_t samples = reflectance.samples();
  std::vector<double> out(reflectance.data().size());
  parallel_for(0, reflectance.lines(), [&](std::size_t line) {
    for (std::size_t b = 0; b < bands; ++b) {
      const double gain = illum.intensity[b] *
                          two_way_transmittance(att.c_per_m[b], distance_m[line]);
      const auto in = reflectance.line_band(line, b);
      const std::size_t base = reflectance.index(line, 0, b);
      for (std::size_t s = 0; s < samples; ++s) out[base + s] = in[s] * gain;
    }
  });
  return HyperCube(reflectance.lines(), samples, reflectance.grid(),
                   CubeKind::radiance, std::move(out),
                   reflectance.line_timestamps());
}

AttenuationProfile load_attenuation(const std::filesystem::path& path) {
  const auto rows = detail::read_numeric_csv(path, 2);
  std::vector<double> nm, c;
  for (const auto& row : rows) {
    nm.push_back(row[0]);
    c.push_back(row[1]);
  }
  AttenuationProfile att{WavelengthGrid(std::move(nm)), std::move(c)};
  att.validate();
  return att;
}

void save_attenuation(const AttenuationProfile& att,
                      const std::filesystem::path& path) {
  std::ostringstream out;
  out << "wavelength_nm,c_per_m\n";
  for (std::size_t b = 0; b < att.grid.size(); ++b) {
    out << detail::format_double(att.grid[b]) << ','
        << detail::format_double(att.c_per_m[b]) << '\n';
  }
  detail::write_text_file(path, out.str());
}

CalibrationPlate load_plate(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  std::optional<double> distance;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto body = detail::trim(line);
    if (body.rfind("distance_m", 0) == 0) {
      auto value = body.substr(std::string_view("distance_m").size());
      value = detail::trim(value);
      if (!value.empty() && (value.front() == ':' || value.front() == '=' ||
                             value.front() == ',')) {
        value.remove_prefix(1);
      }
      distance = detail::parse_double(value, "distance_m");
      break;
    }
  }
  if (!distance) {
    throw Error(ErrorKind::format, path.string() + ": missing distance_m line");
  }
  std::string rows_text;
  std::istringstream again(text);
  while (std::getline(again, line)) {
    if (detail::trim(line).rfind("distance_m", 0) == 0) continue;
    rows_text += line;
    rows_text += '\n';
  }
  const auto rows = detail::parse_numeric_csv(rows_text, 3, path.string());

  CalibrationPlate plate;
  std::vector<double> nm;
  for (const auto& row : rows) {
    nm.push_back(row[0]);
    plate.plate_reflectance.push_back(row[1]);
    plate.measured_radiance.push_back(row[2]);
  }
  plate.grid = WavelengthGrid(std::move(nm));
  plate.plate_distance_m = *distance;
  plate.validate();
  return plate;
}

void save_plate(const CalibrationPlate& plate,
                const std::filesystem::path& path) {
  std::ostringstream out;
  out << "distance_m: " << detail::format_double(plate.plate_distance_m)
      << '\n'
      << "wavelength_nm,reflectance,radiance\n";
  for (std::size_t b = 0; b < plate.grid.size(); ++b) {
    out << detail::format_double(plate.grid[b]) << ','
        << detail::format_double(plate.plate_reflectance[b]) << ','
        << detail::format_double(plate.measured_radiance[b]) << '\n';
  }
  detail::write_text_file(path, out.str());
}

}  // namespace benthos
