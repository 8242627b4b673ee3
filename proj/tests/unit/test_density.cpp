#include <random>

#include "benthos/density.hpp"
#include "benthos/error.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace benthos;

namespace {

ExportRecord at(DebrisClass cls, double x, double y, DetectionId id = 1) {
  ExportRecord r;
  r.id = id;
  r.cls = cls;
  r.world = WorldFootprint{x, y, 0.1};
  return r;
}

std::vector<ExportRecord> random_records(std::size_t n, std::uint64_t seed) {
  ReviewSession s("s", test::make_detections(n, seed));
  return s.export_final();
}

}  // namespace

TEST_CASE("one tire in a 10 m cell is 800 kg/ha") {
  const std::vector<ExportRecord> recs{at(DebrisClass::tire, 3.0, 4.0)};
  const auto g = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  REQUIRE(g.cells.size() == 1);
  const auto& cell = g.cells.begin()->second;
  CHECK(cell.kg == 8.0);
  CHECK(cell.kg_per_ha == 800.0);
  CHECK(cell.counts[index_of(DebrisClass::tire)] == 1);
}

TEST_CASE("empty input and missing footprints") {
  CHECK(aggregate_density({}, ClassWeights::defaults(), 10.0).empty());
  ExportRecord r;
  const std::vector<ExportRecord> recs{r, at(DebrisClass::metal, 1, 1)};
  const auto g = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  CHECK(g.skipped == 1);
  CHECK(g.cells.size() == 1);
  CHECK_THROWS_AS(aggregate_density(recs, ClassWeights::defaults(), 0.0), Error);
  CHECK_FALSE(aggregate_density({}, ClassWeights::defaults(), 10.0).bounds().has_value());
}

TEST_CASE("cell boundaries are lower-inclusive") {
  CHECK(cell_of(10.0, 0.0, 10.0) == CellIndex{1, 0});
  CHECK(cell_of(9.999, -0.001, 10.0) == CellIndex{0, -1});
  CHECK(cell_of(-10.0, 20.0, 10.0) == CellIndex{-1, 2});
  const std::vector<ExportRecord> recs{at(DebrisClass::tire, 10.0, 10.0)};
  const auto g = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  CHECK(g.cells.begin()->first == CellIndex{1, 1});
  const auto b = g.bounds();
  CHECK(b->first.x == 10.0);
  CHECK(b->second.y == 20.0);
}

TEST_CASE("starfish count but weigh nothing") {
  const std::vector<ExportRecord> recs{at(DebrisClass::starfish, 1, 1),
                                       at(DebrisClass::bottle, 2, 2)};
  const auto g = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  const auto& cell = g.cells.begin()->second;
  CHECK(cell.counts[index_of(DebrisClass::starfish)] == 1);
  CHECK(cell.kg == doctest::Approx(0.4));
}

TEST_CASE("density is linear in the weights") {
  const auto recs = random_records(200, 10);
  ClassWeights w = ClassWeights::defaults(), w2;
  for (std::size_t k = 0; k < kClassCount; ++k) w2.kg[k] = 2.0 * w.kg[k];
  const auto a = aggregate_density(recs, w, 10.0), b = aggregate_density(recs, w2, 10.0);
  REQUIRE(a.cells.size() == b.cells.size());
  for (const auto& [idx, cell] : a.cells) CHECK(b.cells.at(idx).kg_per_ha == 2.0 * cell.kg_per_ha);
}

TEST_CASE("shifting by one cell shifts the index by one") {
  auto recs = random_records(200, 11);
  const auto a = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  for (auto& r : recs) {
    r.world->center_x += 10.0;
    r.world->center_y -= 10.0;
  }
  const auto b = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  REQUIRE(a.cells.size() == b.cells.size());
  for (const auto& [idx, cell] : a.cells) {
    const auto& moved = b.cells.at({idx.ix + 1, idx.iy - 1});
    CHECK(moved.counts == cell.counts);
    CHECK(moved.kg_per_ha == cell.kg_per_ha);
  }
}

TEST_CASE("class counts match a brute-force tally") {
  CHECK(class_counts({}) == ClassCounts{});
  std::vector<ExportRecord> recs{at(DebrisClass::bottle, 0, 0), at(DebrisClass::tire, 0, 0),
                                 at(DebrisClass::bottle, 0, 0), at(DebrisClass::tire, 0, 0),
                                 at(DebrisClass::bottle, 0, 0)};
  const auto c = class_counts(recs);
  CHECK(c[index_of(DebrisClass::bottle)] == 3);
  CHECK(c[index_of(DebrisClass::tire)] == 2);
  recs = random_records(300, 12);
  const auto counts = class_counts(recs);
  std::size_t total = 0;
  for (auto cls : kAllClasses) {
    std::size_t n = 0;
    for (const auto& r : recs) n += r.cls == cls;
    CHECK(counts[index_of(cls)] == n);
    total += counts[index_of(cls)];
  }
  CHECK(total == recs.size());
  const auto g = aggregate_density(recs, ClassWeights::defaults(), 7.0);
  std::size_t in_cells = 0;
  for (const auto& [idx, cell] : g.cells)
    for (auto n : cell.counts) in_cells += n;
  CHECK(in_cells == recs.size());
}

TEST_CASE("weights file") {
  test::TempDir dir("w");
  test::spit(dir / "w.csv",
             "class,kg\nbottle,0.5\nplastic,0.1\nanchor,20\ntire,8\nmetal,4\nother,1\nstarfish,0\n");
  const auto w = load_weights(dir / "w.csv");
  CHECK(w[DebrisClass::anchor] == 20.0);
  test::spit(dir / "m.csv", "class,kg\nbottle,0.5\n");
  CHECK_THROWS_AS(load_weights(dir / "m.csv"), Error);
  test::spit(dir / "n.csv",
             "bottle,0.5\nplastic,-1\nanchor,20\ntire,8\nmetal,4\nother,1\nstarfish,0\n");
  CHECK_THROWS_AS(load_weights(dir / "n.csv"), Error);
}

#ifdef BENTHOS_SOURCE_DIR
TEST_CASE("shipped weights file matches the built-in defaults") {
  const auto w = load_weights(std::filesystem::path(BENTHOS_SOURCE_DIR) / "config" / "weights.csv");
  CHECK(w.kg == ClassWeights::defaults().kg);
}
#endif

TEST_CASE("geojson parses back with lon-lat order and counterclockwise cells") {
  const GeoOrigin origin{60.3913, 5.3221};
  auto recs = random_records(25, 13);
  recs[0].world = WorldFootprint{0.0, 0.0, 0.1};
  recs[1].world.reset();
  const auto grid = aggregate_density(recs, ClassWeights::defaults(), 10.0);
  const auto doc = nlohmann::json::parse(export_geojson(recs, &grid, origin));
  CHECK(doc["type"] == "FeatureCollection");
  const auto& feats = doc["features"];
  CHECK(feats.size() == 24 + grid.cells.size());
  const auto& first = feats[0]["geometry"]["coordinates"];
  CHECK(first[0].get<double>() == origin.lon_deg);
  CHECK(first[1].get<double>() == origin.lat_deg);
  std::size_t points = 0;
  for (const auto& f : feats) {
    if (f["geometry"]["type"] == "Point") {
      const auto id = f["properties"]["id"].get<DetectionId>();
      const auto& r = *std::find_if(recs.begin(), recs.end(),
                                    [&](const ExportRecord& e) { return e.id == id; });
      const auto expect = to_geodetic(origin, {r.world->center_x, r.world->center_y});
      CHECK(std::abs(f["geometry"]["coordinates"][0].get<double>() - expect.lon_deg) <= 1e-9);
      CHECK(std::abs(f["geometry"]["coordinates"][1].get<double>() - expect.lat_deg) <= 1e-9);
      CHECK(f["properties"]["class"] == std::string(to_string(r.cls)));
      ++points;
    } else {
      const auto& ring = f["geometry"]["coordinates"][0];
      REQUIRE(ring.size() == 5);
      CHECK(ring[0] == ring[4]);
      double area2 = 0;
      for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        area2 += ring[i][0].get<double>() * ring[i + 1][1].get<double>() -
                 ring[i + 1][0].get<double>() * ring[i][1].get<double>();
      CHECK(area2 > 0.0);
      CHECK(f["properties"]["kg_per_ha"].is_number());
    }
  }
  CHECK(points == 24);
  const auto only_points = nlohmann::json::parse(export_geojson(recs, nullptr, origin));
  CHECK(only_points["features"].size() == 24);
}
