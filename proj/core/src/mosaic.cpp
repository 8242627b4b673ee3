#include "benthos/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "benthos/error.hpp"
#include "benthos/parallel.hpp"
#include "text_util.hpp"

namespace benthos {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Axes {
  double starboard_x, starboard_y;
  double forward_x, forward_y;
};

Axes axes_for(double rotation_deg) {
  const double c = std::cos(rotation_deg * kDegToRad);
  const double s = std::sin(rotation_deg * kDegToRad);
  return {c, -s, s, c};
}

std::size_t cell_count(double extent, double cell) {
  const double n = std::ceil(extent / cell - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, n));
}

}  // namespace

std::array<WorldPoint, 4> frame_corners(const FramePlacement& placement,
                                        std::size_t width,
                                        std::size_t height) {
  const Axes a = axes_for(placement.rotation_deg);
  const double hw = static_cast<double>(width) / 2.0 * placement.scale_m_per_px;
  const double hh = static_cast<double>(height) / 2.0 * placement.scale_m_per_px;
  auto corner = [&](double u, double v) {
    // u to starboard, v toward the image bottom (aft).
    return WorldPoint{
        placement.center_x + u * a.starboard_x - v * a.forward_x,
        placement.center_y + u * a.starboard_y - v * a.forward_y};
  };
  return {corner(-hw, -hh), corner(hw, -hh), corner(hw, hh), corner(-hw, hh)};
}

MosaicGrid::MosaicGrid(WorldBounds bounds, double cell_size_m)
    : bounds_(bounds), cell_size_(cell_size_m) {
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) {
    throw Error(ErrorKind::precondition, "mosaic cell size must be positive");
  }
  if (!(bounds.max_x >= bounds.min_x && bounds.max_y >= bounds.min_y)) {
    throw Error(ErrorKind::precondition, "mosaic bounds are inverted");
  }
  width_ = cell_count(bounds.max_x - bounds.min_x, cell_size_m);
  height_ = cell_count(bounds.max_y - bounds.min_y, cell_size_m);
  rgb_.assign(width_ * height_ * 3, 0.0F);
  writes_.assign(width_ * height_, 0);
  last_frame_.assign(width_ * height_, -1);
}

WorldPoint MosaicGrid::cell_center(std::size_t row, std::size_t col) const {
  return {bounds_.min_x + (static_cast<double>(col) + 0.5) * cell_size_,
          bounds_.max_y - (static_cast<double>(row) + 0.5) * cell_size_};
}

std::array<float, 3> MosaicGrid::color(std::size_t row, std::size_t col) const {
  const std::size_t i = (row * width_ + col) * 3;
  return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
}

void MosaicGrid::set_color(std::size_t row, std::size_t col,
                           std::array<float, 3> rgb) {
  const std::size_t i = (row * width_ + col) * 3;
  rgb_[i] = rgb[0];
  rgb_[i + 1] = rgb[1];
  rgb_[i + 2] = rgb[2];
}

void MosaicGrid::paint(std::size_t row, std::size_t col,
                       std::array<float, 3> rgb, std::int32_t frame_index) {
  set_color(row, col, rgb);
  ++writes_[row * width_ + col];
  last_frame_[row * width_ + col] = frame_index;
}

std::size_t MosaicGrid::written_cells() const {
  return static_cast<std::size_t>(
      std::count_if(writes_.begin(), writes_.end(),
                    [](std::uint32_t w) { return w > 0; }));
}

RgbImage MosaicGrid::to_image() const {
  RgbImage image(width_, height_);
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      const auto px = color(r, c);
      Rgb out{};
      for (int k = 0; k < 3; ++k) {
        out[k] = static_cast<std::uint8_t>(
            std::lround(std::clamp(static_cast<double>(px[k]), 0.0, 255.0)));
      }
      image.set(r, c, out);
    }
  }
  return image;
}

std::size_t place_frame(MosaicGrid& grid, const RgbImage& image,
                        const FramePlacement& placement) {
  if (!(placement.scale_m_per_px > 0.0) ||
      !std::isfinite(placement.scale_m_per_px)) {
    throw Error(ErrorKind::precondition, "frame scale must be positive");
  }
  if (image.empty()) {
    throw Error(ErrorKind::precondition, "frame image is empty");
  }
  const auto corners = frame_corners(placement, image.width(), image.height());
  WorldBounds fb{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
  for (const auto& p : corners) fb.expand(p);
  if (!fb.intersects(grid.bounds())) {
    throw Error(ErrorKind::precondition,
                "frame " + placement.frame_id + " lies outside the mosaic");
  }

  const double cell = grid.cell_size();
  const auto& gb = grid.bounds();
  auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(
        std::clamp(v, 0.0, static_cast<double>(n)));
  };
  const std::size_t col0 = clamp_index(std::floor((fb.min_x - gb.min_x) / cell), grid.width());
  const std::size_t col1 = clamp_index(std::ceil((fb.max_x - gb.min_x) / cell), grid.width());
  const std::size_t row0 = clamp_index(std::floor((gb.max_y - fb.max_y) / cell), grid.height());
  const std::size_t row1 = clamp_index(std::ceil((gb.max_y - fb.min_y) / cell), grid.height());

  const Axes a = axes_for(placement.rotation_deg);
  const double inv_scale = 1.0 / placement.scale_m_per_px;
  const double half_w = static_cast<double>(image.width()) / 2.0;
  const double half_h = static_cast<double>(image.height()) / 2.0;
  const std::int32_t frame_index = grid.begin_frame();

  std::vector<std::size_t> painted(row1 > row0 ? row1 - row0 : 0, 0);
  // Rows are independent; each cell is written by exactly one task.
  parallel_for(row0, row1, [&](std::size_t row) {
    for (std::size_t col = col0; col < col1; ++col) {
      const WorldPoint p = grid.cell_center(row, col);
      const double dx = p.x - placement.center_x;
      const double dy = p.y - placement.center_y;
      const double u = (dx * a.starboard_x + dy * a.starboard_y) * inv_scale;
      const double v = -(dx * a.forward_x + dy * a.forward_y) * inv_scale;
      const double fx = std::floor(u + half_w);
      const double fy = std::floor(v + half_h);
      if (fx < 0.0 || fy < 0.0 || fx >= static_cast<double>(image.width()) ||
          fy >= static_cast<double>(image.height())) {
        continue;
      }
      const Rgb src = image.at(static_cast<std::size_t>(fy),
                               static_cast<std::size_t>(fx));
      grid.paint(row, col,
                 {static_cast<float>(src[0]), static_cast<float>(src[1]),
                  static_cast<float>(src[2])},
                 frame_index);
      ++painted[row - row0];
    }
  });
  std::size_t total = 0;
  for (auto n : painted) total += n;
  return total;
}

FramePlacement placement_for(const TimedFrame& frame, const NavTrack& track,
                             const CameraModel& cam) {
  const NavSample pose = pose_at(track, frame.timestamp);
  const CameraModel frame_cam{cam.hfov_deg, frame.image.width(),
                              frame.image.height()};
  const WorldPoint center = pixel_to_world(
      pose, frame_cam,
      {static_cast<double>(frame.image.width()) / 2.0,
       static_cast<double>(frame.image.height()) / 2.0});
  FramePlacement p;
  p.frame_id = frame.id;
  p.timestamp = frame.timestamp;
  p.center_x = center.x;
  p.center_y = center.y;
  p.rotation_deg = pose.heading;
  p.scale_m_per_px = swath_width(pose.altitude, cam.hfov_deg) /
                     static_cast<double>(frame.image.width());
  return p;
}

MosaicResult build_mosaic(std::vector<TimedFrame> frames, const NavTrack& track,
                          const CameraModel& cam, double cell_size_m) {
  if (frames.empty()) {
    throw Error(ErrorKind::precondition, "no frames to mosaic");
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const TimedFrame& a, const TimedFrame& b) {
                     return std::tie(a.timestamp, a.id) <
                            std::tie(b.timestamp, b.id);
                   });
  std::vector<FramePlacement> placements;
  placements.reserve(frames.size());
  WorldBounds bounds{std::numeric_limits<double>::max(),
                     std::numeric_limits<double>::max(),
                     std::numeric_limits<double>::lowest(),
                     std::numeric_limits<double>::lowest()};
  for (const auto& f : frames) {
    placements.push_back(placement_for(f, track, cam));
    for (const auto& c : frame_corners(placements.back(), f.image.width(),
                                       f.image.height())) {
      bounds.expand(c);
    }
  }
  MosaicResult result{MosaicGrid(bounds, cell_size_m), std::move(placements),
                      {}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    result.painted_cells.push_back(
        place_frame(result.grid, frames[i].image, result.placements[i]));
  }
  return result;
}

ColorCorrection color_correct(MosaicGrid& grid) {
  ColorCorrection out;
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  std::size_t n = 0;
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      if (grid.write_count(r, c) == 0) continue;
      const auto px = grid.color(r, c);
      for (int k = 0; k < 3; ++k) sum[k] += px[k];
      ++n;
    }
  }
  if (n == 0) {
    out.empty = true;
    return out;
  }
  std::array<double, 3> mean{};
  for (int k = 0; k < 3; ++k) mean[k] = sum[k] / static_cast<double>(n);
  const double target = (mean[0] + mean[1] + mean[2]) / 3.0;
  for (int k = 0; k < 3; ++k) {
    out.gains[k] = mean[k] > 0.0 ? target / mean[k] : 1.0;
  }
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      if (grid.write_count(r, c) == 0) continue;
      auto px = grid.color(r, c);
      for (int k = 0; k < 3; ++k) {
        px[k] = static_cast<float>(px[k] * out.gains[k]);
      }
      grid.set_color(r, c, px);
    }
  }
  return out;
}

std::vector<TimedFrame> load_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorKind::io, "frame directory not found: " + dir.string());
  }
  std::vector<TimedFrame> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".ppm") {
      continue;
    }
    const std::string stem = entry.path().stem().string();
    double t = 0.0;
    if (!detail::try_parse_double(stem, t)) {
      throw Error(ErrorKind::format,
                  "frame name is not a timestamp: " + entry.path().string());
    }
    frames.push_back({stem, t, read_ppm(entry.path())});
  }
  std::sort(frames.begin(), frames.end(),
            [](const TimedFrame& a, const TimedFrame& b) {
              return std::tie(a.timestamp, a.id) < std::tie(b.timestamp, b.id);
            });
  return frames;
}

std::filesystem::path world_file_path(const std::filesystem::path& ppm_path) {
  auto p = ppm_path;
  p.replace_extension(".wld");
  return p;
}

void save_mosaic(const MosaicGrid& grid, const std::filesystem::path& ppm_path) {
  write_ppm(grid.to_image(), ppm_path);
  std::ostringstream wld;
  wld << "cell_size: " << detail::format_double(grid.cell_size()) << '\n'
      << "origin_x: " << detail::format_double(grid.bounds().min_x) << '\n'
      << "origin_y: " << detail::format_double(grid.bounds().max_y) << '\n'
      << "width: " << grid.width() << '\n'
      << "height: " << grid.height() << '\n';
  detail::write_text_file(world_file_path(ppm_path), wld.str());
}

}  // namespace benthos
