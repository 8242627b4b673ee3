#include "benthos/specmatch.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <tuple>

#include "benthos/error.hpp"
#include "benthos/parallel.hpp"
#include "text_util.hpp"

namespace benthos {

void ReferenceSpectrum::validate() const {
  if (values.size() != grid.size()) {
    throw Error(ErrorKind::incompatible_grid,
                "reference '" + name + "' length does not match its grid");
  }
  double norm2 = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::format,
                  "reference '" + name + "' has negative or non-finite values");
    }
    norm2 += v * v;
  }
  if (!(norm2 > 0.0)) {
    throw Error(ErrorKind::degenerate_spectrum,
                "reference '" + name + "' is all zero");
  }
}

std::vector<double> ReferenceSpectrum::resample(
    std::span<const double> target_nm) const {
  const auto nm = grid.values();
  std::vector<double> out(target_nm.size());
  for (std::size_t i = 0; i < target_nm.size(); ++i) {
    const double t = target_nm[i];
    if (t < nm.front() || t > nm.back()) {
      throw Error(ErrorKind::out_of_range,
                  "reference '" + name + "' does not cover " +
                      detail::format_double(t) + " nm");
    }
    const auto it = std::lower_bound(nm.begin(), nm.end(), t);
    const auto hi = static_cast<std::size_t>(it - nm.begin());
    if (nm[hi] == t) {
      out[i] = values[hi];
      continue;
    }
    const std::size_t lo = hi - 1;
    const double frac = (t - nm[lo]) / (nm[hi] - nm[lo]);
    out[i] = values[lo] + (values[hi] - values[lo]) * frac;
  }
  return out;
}

ReferenceSpectrum load_reference(const std::filesystem::path& csv_path) {
  const auto rows = detail::read_numeric_csv(csv_path, 2);
  std::vector<double> nm, values;
  for (const auto& row : rows) {
    nm.push_back(row[0]);
    values.push_back(row[1]);
  }
  ReferenceSpectrum ref{csv_path.stem().string(), WavelengthGrid(std::move(nm)),
                        std::move(values)};
  ref.validate();
  return ref;
}

void save_reference(const ReferenceSpectrum& ref,
                    const std::filesystem::path& csv_path) {
  std::ostringstream out;
  out << "wavelength_nm,reflectance\n";
  for (std::size_t b = 0; b < ref.grid.size(); ++b) {
    out << detail::format_double(ref.grid[b]) << ','
        << detail::format_double(ref.values[b]) << '\n';
  }
  detail::write_text_file(csv_path, out.str());
}

ReferenceLibrary load_reference_library(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::io, "reference library not found: " + dir.string());
  }
  ReferenceLibrary lib;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      auto ref = load_reference(entry.path());
      lib.emplace(ref.name, std::move(ref));
    }
  }
  return lib;
}

double spectral_angle(std::span<const double> s, std::span<const double> r) {
  if (s.size() != r.size()) {
    throw Error(ErrorKind::precondition, "spectra differ in length");
  }
  double dot = 0.0, ss = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dot += s[i] * r[i];
    ss += s[i] * s[i];
    rr += r[i] * r[i];
  }
  if (!(ss > 0.0) || !(rr > 0.0)) {
    throw Error(ErrorKind::degenerate_spectrum, "zero-norm spectrum");
  }
  const double cosine = dot / (std::sqrt(ss) * std::sqrt(rr));
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

SamMap sam_map(const HyperCube& cube, const ReferenceSpectrum& ref,
               std::optional<BandWindow> window) {
  if (cube.kind() != CubeKind::reflectance) {
    throw Error(ErrorKind::precondition, "spectral matching expects reflectance");
  }
  ref.validate();
  std::vector<std::size_t> bands;
  std::vector<double> band_nm;
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    const double nm = cube.grid()[b];
    if (!window || (nm >= window->min_nm && nm <= window->max_nm)) {
      bands.push_back(b);
      band_nm.push_back(nm);
    }
  }
  if (bands.empty()) {
    throw Error(ErrorKind::precondition, "band window selects no bands");
  }
  const std::vector<double> r = ref.resample(band_nm);
  double rr = 0.0;
  for (double v : r) rr += v * v;
  if (!(rr > 0.0)) {
    throw Error(ErrorKind::degenerate_spectrum,
                "reference '" + ref.name + "' is zero over the band window");
  }
  const double r_norm = std::sqrt(rr);

  SamMap map{cube.lines(), cube.samples(),
             std::vector<double>(cube.lines() * cube.samples()), ref.name};
  const std::size_t samples = cube.samples();
  parallel_for(0, cube.lines(), [&](std::size_t line) {
    std::vector<double> dot(samples, 0.0), ss(samples, 0.0);
    for (std::size_t k = 0; k < bands.size(); ++k) {
      const auto row = cube.line_band(line, bands[k]);
      const double rv = r[k];
      for (std::size_t s = 0; s < samples; ++s) {
        dot[s] += row[s] * rv;
        ss[s] += row[s] * row[s];
      }
    }
    double* out = map.angles.data() + line * samples;
    for (std::size_t s = 0; s < samples; ++s) {
      if (!(ss[s] > 0.0)) {
        out[s] = kHalfPi;
        continue;
      }
      const double cosine = dot[s] / (std::sqrt(ss[s]) * r_norm);
      out[s] = std::acos(std::clamp(cosine, -1.0, 1.0));
    }
  });
  return map;
}

SamMap anomaly_score(const HyperCube& cube,
                     const ReferenceSpectrum& background,
                     std::optional<BandWindow> window) {
  return sam_map(cube, background, window);
}

std::vector<SpectralDetection> segment_map(const SamMap& map, double threshold,
                                           std::size_t min_area,
                                           MatchPolarity polarity) {
  if (!(threshold > 0.0) || threshold > kHalfPi) {
    throw Error(ErrorKind::precondition, "threshold must lie in (0, pi/2]");
  }
  if (min_area < 1) {
    throw Error(ErrorKind::precondition, "min_area must be >= 1");
  }
  const std::size_t lines = map.lines;
  const std::size_t samples = map.samples;
  auto qualifies = [&](std::size_t i) {
    return polarity == MatchPolarity::similar ? map.angles[i] <= threshold
                                              : map.angles[i] >= threshold;
  };

  std::vector<bool> visited(lines * samples, false);
  std::vector<SpectralDetection> out;
  std::deque<std::size_t> queue;
  // Row-major seeding already orders by line_min; the final sort settles
  // sample_min.
  for (std::size_t seed = 0; seed < lines * samples; ++seed) {
    if (visited[seed] || !qualifies(seed)) continue;
    SpectralDetection det;
    det.reference = map.reference;
    det.line_min = det.line_max = seed / samples;
    det.sample_min = det.sample_max = seed % samples;
    double angle_sum = 0.0;
    visited[seed] = true;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      const std::size_t l = i / samples;
      const std::size_t s = i % samples;
      ++det.pixel_count;
      angle_sum += map.angles[i];
      det.line_min = std::min(det.line_min, l);
      det.line_max = std::max(det.line_max, l);
      det.sample_min = std::min(det.sample_min, s);
      det.sample_max = std::max(det.sample_max, s);
      auto visit = [&](std::size_t j) {
        if (!visited[j] && qualifies(j)) {
          visited[j] = true;
          queue.push_back(j);
        }
      };
      if (l > 0) visit(i - samples);
      if (l + 1 < lines) visit(i + samples);
      if (s > 0) visit(i - 1);
      if (s + 1 < samples) visit(i + 1);
    }
    if (det.pixel_count >= min_area) {
      det.mean_angle = angle_sum / static_cast<double>(det.pixel_count);
      out.push_back(std::move(det));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.line_min, a.sample_min) <
           std::tie(b.line_min, b.sample_min);
  });
  return out;
}

RgbImage sam_heatmap(const SamMap& map) {
  RgbImage image(map.samples, map.lines);
  for (std::size_t l = 0; l < map.lines; ++l) {
    for (std::size_t s = 0; s < map.samples; ++s) {
      const double t = std::clamp(map.at(l, s) / kHalfPi, 0.0, 1.0);
      image.set(l, s,
                {static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t))), 0,
                 static_cast<std::uint8_t>(std::lround(255.0 * t))});
    }
  }
  return image;
}

}  // namespace benthos
