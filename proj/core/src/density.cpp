#include "benthos/density.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "benthos/error.hpp"
#include "json.hpp"
#include "text_util.hpp"

namespace benthos {

using nlohmann::json;

void ClassWeights::validate() const {
  for (double w : kg) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorKind::format, "class weights must be finite and >= 0");
    }
  }
}

ClassWeights ClassWeights::defaults() {
  ClassWeights w;
  w.kg[index_of(DebrisClass::bottle)] = 0.4;
  w.kg[index_of(DebrisClass::plastic)] = 0.2;
  w.kg[index_of(DebrisClass::anchor)] = 15.0;
  w.kg[index_of(DebrisClass::tire)] = 8.0;
  w.kg[index_of(DebrisClass::metal)] = 5.0;
  w.kg[index_of(DebrisClass::other)] = 1.0;
  w.kg[index_of(DebrisClass::starfish)] = 0.0;
  return w;
}

ClassWeights load_weights(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  ClassWeights w;
  std::array<bool, kClassCount> seen{};
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split(body, ',');
    if (fields.size() != 2) {
      throw Error(ErrorKind::format, path.string() + ":" +
                                         std::to_string(line_no) +
                                         ": expected 'class,kg'");
    }
    const auto name = detail::trim(fields[0]);
    if (name == "class") continue;  // header
    const auto cls = parse_class(name);
    if (!cls) {
      throw Error(ErrorKind::format,
                  path.string() + ": unknown class '" + std::string(name) + "'");
    }
    if (seen[index_of(*cls)]) {
      throw Error(ErrorKind::format,
                  path.string() + ": duplicate class '" + std::string(name) + "'");
    }
    seen[index_of(*cls)] = true;
    w.kg[index_of(*cls)] = detail::parse_double(fields[1], "kg");
  }
  for (auto cls : kAllClasses) {
    if (!seen[index_of(cls)]) {
      throw Error(ErrorKind::format, path.string() + ": missing weight for '" +
                                         std::string(to_string(cls)) + "'");
    }
  }
  w.validate();
  return w;
}

CellIndex cell_of(double x, double y, double cell_size) {
  return {static_cast<std::int64_t>(std::floor(x / cell_size)),
          static_cast<std::int64_t>(std::floor(y / cell_size))};
}

std::optional<std::pair<WorldPoint, WorldPoint>> DensityGrid::bounds() const {
  if (cells.empty()) return std::nullopt;
  std::int64_t min_ix = std::numeric_limits<std::int64_t>::max();
  std::int64_t min_iy = min_ix;
  std::int64_t max_ix = std::numeric_limits<std::int64_t>::min();
  std::int64_t max_iy = max_ix;
  for (const auto& [idx, cell] : cells) {
    min_ix = std::min(min_ix, idx.ix);
    min_iy = std::min(min_iy, idx.iy);
    max_ix = std::max(max_ix, idx.ix);
    max_iy = std::max(max_iy, idx.iy);
  }
  return std::pair{
      WorldPoint{static_cast<double>(min_ix) * cell_size,
                 static_cast<double>(min_iy) * cell_size},
      WorldPoint{static_cast<double>(max_ix + 1) * cell_size,
                 static_cast<double>(max_iy + 1) * cell_size}};
}

DensityGrid aggregate_density(std::span<const ExportRecord> records,
                              const ClassWeights& weights, double cell_size_m) {
  if (!(cell_size_m > 0.0) || !std::isfinite(cell_size_m)) {
    throw Error(ErrorKind::precondition, "density cell size must be positive");
  }
  weights.validate();
  DensityGrid grid;
  grid.cell_size = cell_size_m;
  for (const auto& r : records) {
    if (!r.world) {
      ++grid.skipped;
      continue;
    }
    auto& cell = grid.cells[cell_of(r.world->center_x, r.world->center_y,
                                    cell_size_m)];
    ++cell.counts[index_of(r.cls)];
  }
  const double area = grid.cell_area();
  for (auto& [idx, cell] : grid.cells) {
    cell.kg = 0.0;
    for (auto cls : kAllClasses) {
      cell.kg += static_cast<double>(cell.counts[index_of(cls)]) * weights[cls];
    }
    cell.kg_per_ha = cell.kg * kSquareMetersPerHectare / area;
  }
  return grid;
}

ClassCounts class_counts(std::span<const ExportRecord> records) {
  ClassCounts counts{};
  for (const auto& r : records) ++counts[index_of(r.cls)];
  return counts;
}

namespace {

json lon_lat(const GeoOrigin& origin, WorldPoint p) {
  const GeoPoint g = to_geodetic(origin, p);
  return json::array({g.lon_deg, g.lat_deg});
}

json counts_to_json(const ClassCounts& counts) {
  json j = json::object();
  for (auto cls : kAllClasses) j[std::string(to_string(cls))] = counts[index_of(cls)];
  return j;
}

}  // namespace

std::string export_geojson(std::span<const ExportRecord> records,
                           const DensityGrid* grid, const GeoOrigin& origin) {
  json features = json::array();
  for (const auto& r : records) {
    if (!r.world) continue;
    json scores = json::object();
    for (auto cls : kAllClasses) {
      scores[std::string(to_string(cls))] = r.scores[index_of(cls)];
    }
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "Point"},
           {"coordinates", lon_lat(origin, {r.world->center_x, r.world->center_y})}}},
         {"properties",
          {{"id", r.id},
           {"class", std::string(to_string(r.cls))},
           {"state", std::string(to_string(r.state))},
           {"frame_id", r.frame_id},
           {"t", r.t},
           {"radius_m", r.world->radius},
           {"scores", scores}}}});
  }
  if (grid) {
    const double s = grid->cell_size;
    for (const auto& [idx, cell] : grid->cells) {
      const double x0 = static_cast<double>(idx.ix) * s;
      const double y0 = static_cast<double>(idx.iy) * s;
      const double x1 = static_cast<double>(idx.ix + 1) * s;
      const double y1 = static_cast<double>(idx.iy + 1) * s;
      // Exterior ring counterclockwise.
      json ring = json::array({lon_lat(origin, {x0, y0}), lon_lat(origin, {x1, y0}),
                               lon_lat(origin, {x1, y1}), lon_lat(origin, {x0, y1}),
                               lon_lat(origin, {x0, y0})});
      features.push_back({{"type", "Feature"},
                          {"geometry",
                           {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
                          {"properties",
                           {{"cell_ix", idx.ix},
                            {"cell_iy", idx.iy},
                            {"cell_size_m", s},
                            {"kg", cell.kg},
                            {"kg_per_ha", cell.kg_per_ha},
                            {"counts", counts_to_json(cell.counts)}}}});
    }
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1) + "\n";
}

}  // namespace benthos
