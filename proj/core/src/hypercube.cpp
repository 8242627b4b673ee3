#include "benthos/hypercube.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "benthos/error.hpp"
#include "text_util.hpp"

namespace benthos {

namespace {

constexpr double kMinWavelengthNm = 300.0;
constexpr double kMaxWavelengthNm = 1000.0;
constexpr double kMaxReflectanceValue = 4.0;

}  // namespace

WavelengthGrid::WavelengthGrid(std::vector<double> wavelengths_nm)
    : nm_(std::move(wavelengths_nm)) {
  if (nm_.size() < 3) {
    throw Error(ErrorKind::format, "wavelength grid needs at least 3 bands");
  }
  for (std::size_t i = 0; i < nm_.size(); ++i) {
    if (!std::isfinite(nm_[i]) || nm_[i] < kMinWavelengthNm ||
        nm_[i] > kMaxWavelengthNm) {
      throw Error(ErrorKind::format, "wavelength outside [300, 1000] nm: " +
                                         detail::format_double(nm_[i]));
    }
    if (i > 0 && !(nm_[i] > nm_[i - 1])) {
      throw Error(ErrorKind::format, "wavelengths must be strictly increasing");
    }
  }
}

WavelengthGrid WavelengthGrid::uniform(double first_nm, double last_nm,
                                       double step_nm) {
  if (!(step_nm > 0.0) || last_nm < first_nm) {
    throw Error(ErrorKind::precondition, "invalid uniform grid");
  }
  const auto n = static_cast<std::size_t>(
      std::floor((last_nm - first_nm) / step_nm + 1e-9)) + 1;
  std::vector<double> nm(n);
  for (std::size_t i = 0; i < n; ++i) {
    nm[i] = first_nm + static_cast<double>(i) * step_nm;
  }
  return WavelengthGrid(std::move(nm));
}

double WavelengthGrid::mean_spacing() const {
  return (nm_.back() - nm_.front()) / static_cast<double>(nm_.size() - 1);
}

std::string to_string(CubeKind kind) {
  return kind == CubeKind::radiance ? "radiance" : "reflectance";
}

CubeKind parse_cube_kind(const std::string& text) {
  if (text == "radiance") return CubeKind::radiance;
  if (text == "reflectance") return CubeKind::reflectance;
  throw Error(ErrorKind::format, "unknown cube kind '" + text + "'");
}

HyperCube::HyperCube(std::size_t lines, std::size_t samples,
                     WavelengthGrid grid, CubeKind kind,
                     std::vector<double> data,
                     std::vector<double> line_timestamps)
    : lines_(lines),
      samples_(samples),
      grid_(std::move(grid)),
      kind_(kind),
      data_(std::move(data)),
      timestamps_(std::move(line_timestamps)) {
  validate();
}

HyperCube HyperCube::zeros(std::size_t lines, std::size_t samples,
                           WavelengthGrid grid, CubeKind kind,
                           double line_interval_s) {
  std::vector<double> ts(lines);
  for (std::size_t i = 0; i < lines; ++i) {
    ts[i] = static_cast<double>(i) * line_interval_s;
  }
  const std::size_t n = lines * samples * grid.size();
  return HyperCube(lines, samples, std::move(grid), kind,
                   std::vector<double>(n, 0.0), std::move(ts));
}

std::span<const double> HyperCube::line_band(std::size_t line,
                                             std::size_t band) const {
  return std::span<const double>(data_).subspan(index(line, 0, band), samples_);
}

std::vector<double> HyperCube::spectrum(std::size_t line,
                                        std::size_t sample) const {
  std::vector<double> s(bands());
  for (std::size_t b = 0; b < bands(); ++b) s[b] = at(line, sample, b);
  return s;
}

void HyperCube::validate() const {
  if (lines_ == 0 || samples_ == 0) {
    throw Error(ErrorKind::precondition, "cube must have lines and samples");
  }
  if (grid_.size() < 3) {
    throw Error(ErrorKind::format, "cube grid needs at least 3 bands");
  }
  if (data_.size() != lines_ * samples_ * grid_.size()) {
    throw Error(ErrorKind::precondition,
                "cube data extent does not match lines x samples x bands");
  }
  if (timestamps_.size() != lines_) {
    throw Error(ErrorKind::precondition,
                "line timestamp count does not match line count");
  }
  for (std::size_t i = 0; i < timestamps_.size(); ++i) {
    if (!std::isfinite(timestamps_[i]) ||
        (i > 0 && timestamps_[i] < timestamps_[i - 1])) {
      throw Error(ErrorKind::precondition,
                  "line timestamps must be finite and non-decreasing");
    }
  }
  const double upper = kind_ == CubeKind::reflectance
                           ? kMaxReflectanceValue
                           : std::numeric_limits<double>::max();
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > upper) {
      throw Error(ErrorKind::precondition,
                  "cube value out of range for " + to_string(kind_) + ": " +
                      detail::format_double(v));
    }
  }
}

HyperCube HyperCube::with_kind(CubeKind kind) const {
  return HyperCube(lines_, samples_, grid_, kind, data_, timestamps_);
}

std::filesystem::path payload_path_for(const std::filesystem::path& header) {
  auto p = header;
  p.replace_extension(".bil");
  return p;
}

namespace {

std::vector<double> parse_number_list(std::string_view text,
                                      std::string_view what) {
  std::vector<double> out;
  const auto body = detail::trim(text);
  if (body.empty()) return out;
  for (auto field : detail::split(body, ',')) {
    out.push_back(detail::parse_double(field, what));
  }
  return out;
}

std::string join_numbers(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += detail::format_double(values[i]);
  }
  return out;
}

}  // namespace

CubeHeader read_cube_header(const std::filesystem::path& header_path) {
  const std::string text = detail::read_text_file(header_path);
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::format,
                  header_path.string() + ": expected 'key: value' line");
    }
    std::string key(detail::trim(body.substr(0, colon)));
    std::string value(detail::trim(body.substr(colon + 1)));
    if (!fields.emplace(key, value).second) {
      throw Error(ErrorKind::format,
                  header_path.string() + ": duplicate key '" + key + "'");
    }
  }

  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw Error(ErrorKind::format,
                  header_path.string() + ": missing field '" + key + "'");
    }
    return it->second;
  };

  CubeHeader h;
  h.lines = detail::parse_size(require("lines"), "lines");
  h.samples = detail::parse_size(require("samples"), "samples");
  h.bands = detail::parse_size(require("bands"), "bands");
  h.grid = WavelengthGrid(
      parse_number_list(require("wavelengths_nm"), "wavelengths_nm"));
  if (h.grid.size() != h.bands) {
    throw Error(ErrorKind::format,
                header_path.string() + ": wavelength count != bands");
  }
  h.kind = parse_cube_kind(require("kind"));
  h.timestamps = parse_number_list(require("timestamps"), "timestamps");
  if (h.timestamps.size() != h.lines) {
    throw Error(ErrorKind::format,
                header_path.string() + ": timestamp count != lines");
  }
  if (auto it = fields.find("interleave"); it != fields.end()) {
    h.interleave = it->second;
  }
  if (auto it = fields.find("byte_order"); it != fields.end()) {
    h.byte_order = it->second;
  }
  if (auto it = fields.find("data_type"); it != fields.end()) {
    h.data_type = it->second;
  }
  if (auto it = fields.find("sensor_id"); it != fields.end()) {
    h.sensor_id = it->second;
  }
  if (auto it = fields.find("comment"); it != fields.end()) {
    h.comment = it->second;
  }
  if (h.interleave != "bil" || h.byte_order != "little" ||
      h.data_type != "float32") {
    throw Error(ErrorKind::format,
                header_path.string() +
                    ": only float32 little-endian BIL payloads are supported");
  }
  return h;
}

namespace {

float decode_le_float(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void encode_le_float(float value, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  p[0] = static_cast<unsigned char>(bits & 0xFF);
  p[1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
  p[2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
  p[3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
}

}  // namespace

HyperCube load_cube(const std::filesystem::path& header_path) {
  const CubeHeader h = read_cube_header(header_path);
  const auto payload = payload_path_for(header_path);
  std::error_code ec;
  const auto size = std::filesystem::file_size(payload, ec);
  if (ec) {
    throw Error(ErrorKind::corrupt_file,
                "missing cube payload " + payload.string());
  }
  if (size != h.payload_bytes()) {
    throw Error(ErrorKind::corrupt_file,
                payload.string() + ": payload is " + std::to_string(size) +
                    " bytes, header requires " +
                    std::to_string(h.payload_bytes()));
  }
  std::ifstream in(payload, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + payload.string());
  std::vector<unsigned char> raw(h.payload_bytes());
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw Error(ErrorKind::corrupt_file, payload.string() + ": short read");
  }
  std::vector<double> data(raw.size() / 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = decode_le_float(raw.data() + 4 * i);
  }
  return HyperCube(h.lines, h.samples, h.grid, h.kind, std::move(data),
                   h.timestamps);
}

void save_cube(const HyperCube& cube, const std::filesystem::path& header_path,
               const std::string& sensor_id,
               const std::optional<std::string>& comment) {
  cube.validate();
  std::ostringstream hdr;
  hdr << "lines: " << cube.lines() << '\n'
      << "samples: " << cube.samples() << '\n'
      << "bands: " << cube.bands() << '\n'
      << "wavelengths_nm: " << join_numbers(cube.grid().values()) << '\n'
      << "kind: " << to_string(cube.kind()) << '\n'
      << "interleave: bil\n"
      << "byte_order: little\n"
      << "data_type: float32\n"
      << "sensor_id: " << sensor_id << '\n';
  if (comment) hdr << "comment: " << *comment << '\n';
  hdr << "timestamps: " << join_numbers(cube.line_timestamps()) << '\n';

  std::vector<unsigned char> raw(cube.data().size() * 4);
  for (std::size_t i = 0; i < cube.data().size(); ++i) {
    encode_le_float(static_cast<float>(cube.data()[i]), raw.data() + 4 * i);
  }
  const auto payload = payload_path_for(header_path);
  {
    std::ofstream out(payload, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + payload.string());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + payload.string());
  }
  detail::write_text_file(header_path, hdr.str());
}

std::size_t band_index_for_wavelength(const WavelengthGrid& grid,
                                      double target_nm) {
  const double margin = grid.mean_spacing() / 2.0;
  if (!std::isfinite(target_nm) || target_nm < grid.front() - margin ||
      target_nm > grid.back() + margin) {
    throw Error(ErrorKind::out_of_range,
                "wavelength " + detail::format_double(target_nm) +
                    " nm is outside the cube grid");
  }
  const auto values = grid.values();
  const auto it = std::lower_bound(values.begin(), values.end(), target_nm);
  if (it == values.begin()) return 0;
  if (it == values.end()) return values.size() - 1;
  const auto hi = static_cast<std::size_t>(it - values.begin());
  const std::size_t lo = hi - 1;
  // Equal distance resolves to the lower index.
  return (target_nm - values[lo] <= values[hi] - target_nm) ? lo : hi;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) {
    throw Error(ErrorKind::precondition, "percentile of empty set");
  }
  std::sort(values.begin(), values.end());
  const double pos =
      std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<std::uint8_t> stretch_band(std::span<const double> band_values,
                                       double low_pct, double high_pct) {
  std::vector<double> copy(band_values.begin(), band_values.end());
  double lo = percentile(copy, low_pct);
  double hi = percentile(std::move(copy), high_pct);
  if (!(hi > lo)) {
    // Collapsed window: absolute reflectance-style scale.
    lo = 0.0;
    hi = 1.0;
  }
  std::vector<std::uint8_t> out(band_values.size());
  for (std::size_t i = 0; i < band_values.size(); ++i) {
    const double t = std::clamp((band_values[i] - lo) / (hi - lo), 0.0, 1.0);
    out[i] = static_cast<std::uint8_t>(std::lround(t * 255.0));
  }
  return out;
}

RgbImage pseudo_rgb(const HyperCube& cube) {
  const std::array<std::size_t, 3> bands{
      band_index_for_wavelength(cube.grid(), kPseudoRedNm),
      band_index_for_wavelength(cube.grid(), kPseudoGreenNm),
      band_index_for_wavelength(cube.grid(), kPseudoBlueNm)};
  RgbImage image(cube.samples(), cube.lines());
  std::vector<double> plane(cube.lines() * cube.samples());
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t l = 0; l < cube.lines(); ++l) {
      const auto row = cube.line_band(l, bands[ch]);
      std::copy(row.begin(), row.end(), plane.begin() + l * cube.samples());
    }
    const auto levels = stretch_band(plane);
    for (std::size_t l = 0; l < cube.lines(); ++l) {
      for (std::size_t s = 0; s < cube.samples(); ++s) {
        auto px = image.at(l, s);
        px[ch] = levels[l * cube.samples() + s];
        image.set(l, s, px);
      }
    }
  }
  return image;
}

}  // namespace benthos
