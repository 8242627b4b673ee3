#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "benthos/nav.hpp"
#include "benthos/review.hpp"
#include "benthos/taxonomy.hpp"

namespace benthos {

inline constexpr double kSquareMetersPerHectare = 10'000.0;
inline constexpr double kDefaultDensityCellM = 10.0;

/// Average weight per class in kilograms. Operator supplied.
struct ClassWeights {
  std::array<double, kClassCount> kg{};

  double operator[](DebrisClass cls) const { return kg[index_of(cls)]; }
  void validate() const;

  /// Placeholder weights with starfish at zero. Replace with survey values.
  static ClassWeights defaults();
};

/// CSV `class,kg`; every class must appear exactly once.
ClassWeights load_weights(const std::filesystem::path& path);

using ClassCounts = std::array<std::size_t, kClassCount>;

struct DensityCell {
  ClassCounts counts{};
  double kg = 0.0;
  double kg_per_ha = 0.0;
};

/// Cell (ix, iy) covers [ix*size, (ix+1)*size) x [iy*size, (iy+1)*size).
struct CellIndex {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct DensityGrid {
  double cell_size = kDefaultDensityCellM;
  std::map<CellIndex, DensityCell> cells;
  std::size_t skipped = 0;  // records without a world footprint

  bool empty() const noexcept { return cells.empty(); }
  /// Occupied-cell bounds in world meters; nullopt when empty.
  std::optional<std::pair<WorldPoint, WorldPoint>> bounds() const;
  double cell_area() const noexcept { return cell_size * cell_size; }
};

CellIndex cell_of(double x, double y, double cell_size);

DensityGrid aggregate_density(std::span<const ExportRecord> records,
                              const ClassWeights& weights, double cell_size_m);

ClassCounts class_counts(std::span<const ExportRecord> records);

/// RFC 7946 FeatureCollection: one Point per record with a footprint, one
/// Polygon per occupied grid cell. Longitude first.
std::string export_geojson(std::span<const ExportRecord> records,
                           const DensityGrid* grid, const GeoOrigin& origin);

}  // namespace benthos
