#include <benchmark/benchmark.h>

#include <random>

#include "benthos/detfuse.hpp"
#include "benthos/mosaic.hpp"
#include "benthos/radiometry.hpp"
#include "benthos/specmatch.hpp"
#include "support.hpp"

using namespace benthos;

namespace {

const WavelengthGrid kGrid = WavelengthGrid::uniform(380, 750, 10);

void BM_SamMap(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto lines = static_cast<std::size_t>(state.range(0));
  const auto cube = test::random_cube(rng, lines, 64, kGrid, CubeKind::reflectance, 0.0, 1.0);
  const auto ref = test::random_cube(rng, 1, 1, kGrid, CubeKind::reflectance, 0.1, 1.0);
  const ReferenceSpectrum r{"r", kGrid, ref.spectrum(0, 0)};
  for (auto _ : state) benchmark::DoNotOptimize(sam_map(cube, r));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lines * 64));
}
BENCHMARK(BM_SamMap)->Arg(200)->Arg(2000);

void BM_CorrectToReflectance(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto lines = static_cast<std::size_t>(state.range(0));
  const auto cube = test::random_cube(rng, lines, 64, kGrid, CubeKind::radiance, 0.0, 1.0);
  const auto att = AttenuationProfile::constant(kGrid, 0.15);
  const IlluminantSpectrum illum{kGrid, std::vector<double>(kGrid.size(), 1.0)};
  const std::vector<double> d(lines, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(correct_to_reflectance(cube, illum, att, d));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(lines * 64));
}
BENCHMARK(BM_CorrectToReflectance)->Arg(200)->Arg(2000);

void BM_PlaceFrame(benchmark::State& state) {
  const RgbImage img(640, 480, {120, 80, 40});
  const FramePlacement p{"f", 0.0, 0.0, 0.0, 37.0, 0.005};
  for (auto _ : state) {
    MosaicGrid grid(WorldBounds{-2.5, -2.5, 2.5, 2.5}, kDefaultMosaicCellM);
    benchmark::DoNotOptimize(place_frame(grid, img, p));
  }
}
BENCHMARK(BM_PlaceFrame);

void BM_Embed2d(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(state.range(0)),
                                       std::vector<double>(kFeatureSize));
  for (auto& r : rows)
    for (auto& v : r) v = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(embed_2d(rows));
}
BENCHMARK(BM_Embed2d)->Arg(100)->Arg(2000);

}  // namespace
BENCHMARK_MAIN();
