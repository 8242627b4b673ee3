#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "benthos/image.hpp"
#include "benthos/nav.hpp"

namespace benthos {

/// Rigid placement of one frame: the frame center lands on (center_x,
/// center_y), image "up" points along `rotation_deg` (clockwise from north),
/// and every source pixel covers scale x scale meters.
struct FramePlacement {
  std::string frame_id;
  double timestamp = 0.0;
  double center_x = 0.0;
  double center_y = 0.0;
  double rotation_deg = 0.0;
  double scale_m_per_px = 0.0;
};

/// World positions of the four outer corners of a placed frame.
std::array<WorldPoint, 4> frame_corners(const FramePlacement& placement,
                                        std::size_t width, std::size_t height);

/// North-up raster. Cell (row, col) covers x in [min_x + col*cell,
/// min_x + (col+1)*cell) and y in (max_y - (row+1)*cell, max_y - row*cell].
class MosaicGrid {
 public:
  MosaicGrid(WorldBounds bounds, double cell_size_m);

  const WorldBounds& bounds() const noexcept { return bounds_; }
  double cell_size() const noexcept { return cell_size_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  WorldPoint cell_center(std::size_t row, std::size_t col) const;

  std::array<float, 3> color(std::size_t row, std::size_t col) const;
  void set_color(std::size_t row, std::size_t col, std::array<float, 3> rgb);
  std::uint32_t write_count(std::size_t row, std::size_t col) const {
    return writes_[row * width_ + col];
  }
  /// Index (in placement order) of the last frame painted into the cell, -1
  /// when never written.
  std::int32_t last_frame(std::size_t row, std::size_t col) const {
    return last_frame_[row * width_ + col];
  }
  std::size_t written_cells() const;
  std::size_t frames_placed() const noexcept { return frames_placed_; }

  /// Paints a cell and records its provenance.
  void paint(std::size_t row, std::size_t col, std::array<float, 3> rgb,
             std::int32_t frame_index);
  std::int32_t begin_frame() { return static_cast<std::int32_t>(frames_placed_++); }

  RgbImage to_image() const;

 private:
  WorldBounds bounds_;
  double cell_size_;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> rgb_;
  std::vector<std::uint32_t> writes_;
  std::vector<std::int32_t> last_frame_;
  std::size_t frames_placed_ = 0;
};

inline constexpr double kDefaultMosaicCellM = 0.005;

/// Paints `image` into the grid with nearest-neighbor sampling. Later frames
/// overwrite earlier ones. Returns the number of cells painted.
std::size_t place_frame(MosaicGrid& grid, const RgbImage& image,
                        const FramePlacement& placement);

struct TimedFrame {
  std::string id;
  double timestamp = 0.0;
  RgbImage image;
};

/// Placement from the interpolated pose: center under the image center, scale
/// from the swath at the pose altitude, rotation = heading.
FramePlacement placement_for(const TimedFrame& frame, const NavTrack& track,
                             const CameraModel& cam);

struct MosaicResult {
  MosaicGrid grid;
  std::vector<FramePlacement> placements;  // in painting order
  std::vector<std::size_t> painted_cells;  // per placement
};

/// Places frames in timestamp order (ties by id) on a grid whose bounds
/// enclose every footprint.
MosaicResult build_mosaic(std::vector<TimedFrame> frames, const NavTrack& track,
                          const CameraModel& cam, double cell_size_m);

struct ColorCorrection {
  std::array<double, 3> gains{1.0, 1.0, 1.0};
  bool empty = false;
};

/// Gray-world balance: each channel is scaled so its mean over written cells
/// equals the mean of the three channel means.
ColorCorrection color_correct(MosaicGrid& grid);

/// Frames named `<t_seconds>.ppm` in a directory.
std::vector<TimedFrame> load_frames(const std::filesystem::path& dir);

/// Mosaic raster plus a world-file sidecar with cell size and the world
/// coordinates of the top-left corner.
void save_mosaic(const MosaicGrid& grid, const std::filesystem::path& ppm_path);
std::filesystem::path world_file_path(const std::filesystem::path& ppm_path);

}  // namespace benthos
