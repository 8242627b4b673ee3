#include <cmath>
#include <numbers>
#include <random>

#include "benthos/error.hpp"
#include "benthos/specmatch.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace benthos;

namespace {

SamMap map_from(const std::vector<std::vector<double>>& rows) {
  SamMap m{rows.size(), rows[0].size(), {}, "r"};
  for (const auto& r : rows) m.angles.insert(m.angles.end(), r.begin(), r.end());
  return m;
}

}  // namespace

TEST_CASE("spectral_angle basics") {
  const std::vector<double> a{1, 0, 0}, b{0, 1, 0}, c{1, 1, 0};
  CHECK(spectral_angle(a, a) == 0.0);
  CHECK(spectral_angle(a, b) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  // arccos(1/sqrt 2)
  CHECK(spectral_angle(c, a) == doctest::Approx(0.78539816339744828).epsilon(1e-15));
  CHECK(spectral_angle(c, a) == spectral_angle(a, c));
  const std::vector<double> z{0, 0, 0};
  CHECK_THROWS_AS(spectral_angle(z, a), Error);
  try {
    spectral_angle(z, a);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_spectrum);
  }
}

TEST_CASE("spectral_angle is symmetric on random spectra") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> s(9), r(9);
    for (auto& v : s) v = u(rng);
    for (auto& v : r) v = u(rng);
    CHECK(spectral_angle(s, r) == spectral_angle(r, s));
    CHECK(spectral_angle(s, r) >= 0.0);
    CHECK(spectral_angle(s, r) <= kHalfPi);
  }
}

TEST_CASE("sam_map on a cube equal to the reference is zero") {
  const auto grid = WavelengthGrid::uniform(400, 700, 50);
  const ReferenceSpectrum ref{"r", grid, {0.1, 0.2, 0.3, 0.3, 0.2, 0.4, 0.5}};
  HyperCube cube = HyperCube::zeros(3, 4, grid, CubeKind::reflectance);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t b = 0; b < 7; ++b) cube.at(l, s, b) = ref.values[b];
  const auto m = sam_map(cube, ref);
  for (double a : m.angles) CHECK(a < 1e-7);
}

TEST_CASE("sam_map is blind to pixel scale") {
  const auto grid = WavelengthGrid::uniform(400, 700, 50);
  const ReferenceSpectrum ref{"r", grid, {0.1, 0.2, 0.3, 0.3, 0.2, 0.4, 0.5}};
  HyperCube cube = HyperCube::zeros(1, 3, grid, CubeKind::reflectance);
  const double alphas[3] = {0.01, 1.0, 7.5};
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t b = 0; b < 7; ++b) cube.at(0, s, b) = alphas[s] * ref.values[b] / 2.0;
  const auto m = sam_map(cube, ref);
  for (double a : m.angles) CHECK(a < 1e-7);
}

TEST_CASE("sam_map matches a brute-force recomputation") {
  std::mt19937_64 rng(21);
  const auto grid = WavelengthGrid::uniform(400, 600, 50);
  const auto cube = test::random_cube(rng, 4, 4, grid, CubeKind::reflectance);
  const ReferenceSpectrum ref{"r", grid, {0.2, 0.9, 0.4, 0.1, 0.6}};
  const auto m = sam_map(cube, ref);
  CHECK(m.lines == 4);
  CHECK(m.samples == 4);
  for (std::size_t l = 0; l < 4; ++l)
    for (std::size_t s = 0; s < 4; ++s)
      CHECK(std::abs(m.at(l, s) - oracle::angle(cube.spectrum(l, s), ref.values)) <= 1e-12);
}

TEST_CASE("sam_map resamples the reference and honors the band window") {
  const auto cube_grid = WavelengthGrid({450.0, 500.0, 550.0, 600.0});
  const ReferenceSpectrum ref{"r", WavelengthGrid::uniform(400, 700, 100), {0.0, 1.0, 3.0, 5.0}};
  HyperCube cube = HyperCube::zeros(1, 1, cube_grid, CubeKind::reflectance);
  // reference on the cube grid is 0.5, 1, 2, 3
  const std::vector<double> px{0.5, 1.0, 2.0, 1.0};
  for (std::size_t b = 0; b < 4; ++b) cube.at(0, 0, b) = px[b];
  const auto full = sam_map(cube, ref);
  CHECK(full.at(0, 0) == doctest::Approx(oracle::angle(px, {0.5, 1.0, 2.0, 3.0})));
  const auto win = sam_map(cube, ref, BandWindow{440.0, 560.0});
  CHECK(win.at(0, 0) < 1e-7);
  CHECK_THROWS_AS(sam_map(cube, ref, BandWindow{601.0, 700.0}), Error);

  const ReferenceSpectrum narrow{"n", WavelengthGrid({460.0, 500.0, 600.0}), {1, 1, 1}};
  CHECK_THROWS_AS(sam_map(cube, narrow), Error);
}

TEST_CASE("zero pixels score pi/2") {
  const auto grid = WavelengthGrid::uniform(400, 600, 100);
  const HyperCube cube = HyperCube::zeros(2, 2, grid, CubeKind::reflectance);
  const auto m = sam_map(cube, ReferenceSpectrum{"r", grid, {1, 1, 1}});
  for (double a : m.angles) CHECK(a == kHalfPi);
}

TEST_CASE("sam_map requires reflectance") {
  const auto grid = WavelengthGrid::uniform(400, 600, 100);
  const HyperCube cube = HyperCube::zeros(1, 1, grid, CubeKind::radiance);
  CHECK_THROWS_AS(sam_map(cube, ReferenceSpectrum{"r", grid, {1, 1, 1}}), Error);
}

TEST_CASE("anomaly_score equals sam_map and flags an orthogonal pixel") {
  const auto grid = WavelengthGrid::uniform(400, 600, 100);
  const ReferenceSpectrum bg{"bg", grid, {1.0, 0.0, 0.0}};
  HyperCube cube = HyperCube::zeros(3, 3, grid, CubeKind::reflectance);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t s = 0; s < 3; ++s) cube.at(l, s, 0) = 0.4;
  auto m = anomaly_score(cube, bg);
  for (double a : m.angles) CHECK(a == 0.0);
  CHECK(segment_map(m, 0.5, 1, MatchPolarity::anomalous).empty());
  cube.at(1, 1, 0) = 0.0;
  cube.at(1, 1, 2) = 0.7;
  m = anomaly_score(cube, bg);
  CHECK(m.at(1, 1) == doctest::Approx(kHalfPi));
  CHECK(m.angles == sam_map(cube, bg).angles);
  const auto found = segment_map(m, 0.5, 1, MatchPolarity::anomalous);
  REQUIRE(found.size() == 1);
  CHECK(found[0].line_min == 1);
  CHECK(found[0].sample_min == 1);
}

TEST_CASE("threshold_segment trivial and block cases") {
  const double hp = kHalfPi;
  const auto all_far = map_from({{hp, hp, hp}, {hp, hp, hp}});
  CHECK(threshold_segment(all_far, 0.2, 1).empty());

  auto m = map_from({{hp, hp, hp, hp}, {hp, 0.1, 0.1, hp}, {hp, 0.1, 0.1, hp}, {hp, hp, hp, hp}});
  const auto dets = threshold_segment(m, 0.2, 2);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].line_min == 1);
  CHECK(dets[0].line_max == 2);
  CHECK(dets[0].sample_min == 1);
  CHECK(dets[0].sample_max == 2);
  CHECK(dets[0].pixel_count == 4);
  CHECK(dets[0].mean_angle == doctest::Approx(0.1));
  CHECK(threshold_segment(m, 0.2, 5).empty());
}

TEST_CASE("diagonal contact does not merge components") {
  const double hp = kHalfPi;
  const auto m = map_from({{0.0, hp, hp}, {hp, 0.0, hp}, {hp, hp, 0.0}});
  CHECK(threshold_segment(m, 0.1, 1).size() == 3);
}

TEST_CASE("threshold_segment agrees with brute-force labeling") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, kHalfPi);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t h = 4 + trial % 29, w = 3 + (trial * 7) % 30;
    SamMap m{h, w, {}, "r"};
    for (std::size_t i = 0; i < h * w; ++i) m.angles.push_back(u(rng));
    const double thr = 0.3 + 0.02 * trial;
    const std::size_t min_area = 1 + trial % 4;
    std::vector<std::vector<bool>> mask(h, std::vector<bool>(w));
    std::size_t qualifying = 0;
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) mask[r][c] = m.at(r, c) <= thr;
    const auto expect = oracle::blobs(mask, min_area);
    const auto got = threshold_segment(m, thr, min_area);
    REQUIRE(got.size() == expect.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].line_min == expect[i].line_min);
      CHECK(got[i].line_max == expect[i].line_max);
      CHECK(got[i].sample_min == expect[i].sample_min);
      CHECK(got[i].sample_max == expect[i].sample_max);
      CHECK(got[i].pixel_count == expect[i].pixels);
      total += got[i].pixel_count;
      qualifying += expect[i].members.size();
    }
    CHECK(total == qualifying);
  }
}

TEST_CASE("raising the threshold never shrinks the detected area") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, kHalfPi);
  SamMap m{20, 20, {}, "r"};
  for (int i = 0; i < 400; ++i) m.angles.push_back(u(rng));
  std::size_t prev = 0;
  for (double thr = 0.05; thr <= kHalfPi; thr += 0.05) {
    std::size_t total = 0;
    for (const auto& d : threshold_segment(m, thr, 3)) total += d.pixel_count;
    CHECK(total >= prev);
    prev = total;
  }
}

TEST_CASE("segmentation preconditions") {
  const auto m = map_from({{0.1, 0.1}});
  CHECK_THROWS_AS(threshold_segment(m, 0.0, 1), Error);
  CHECK_THROWS_AS(threshold_segment(m, 2.0, 1), Error);
  CHECK_THROWS_AS(threshold_segment(m, 0.5, 0), Error);
  CHECK(threshold_segment(m, kHalfPi, 1).size() == 1);
}

TEST_CASE("heatmap grades from red at 0 to blue at pi/2") {
  const auto m = map_from({{0.0, kHalfPi / 2, kHalfPi}});
  const RgbImage img = sam_heatmap(m);
  CHECK(img.at(0, 0) == Rgb{255, 0, 0});
  CHECK(img.at(0, 1) == Rgb{128, 0, 128});
  CHECK(img.at(0, 2) == Rgb{0, 0, 255});
}

TEST_CASE("reference library loads every csv by stem") {
  test::TempDir dir("lib");
  const auto grid = WavelengthGrid::uniform(400, 600, 100);
  save_reference({"sand", grid, {0.1, 0.2, 0.3}}, dir / "sand.csv");
  save_reference({"white_plastic", grid, {0.6, 0.5, 0.4}}, dir / "white_plastic.csv");
  test::spit(dir / "notes.txt", "ignored");
  const auto lib = load_reference_library(dir.path());
  CHECK(lib.size() == 2);
  CHECK(lib.at("sand").values == std::vector<double>{0.1, 0.2, 0.3});
  test::spit(dir / "zero.csv", "wavelength_nm,reflectance\n400,0\n500,0\n600,0\n");
  CHECK_THROWS_AS(load_reference(dir / "zero.csv"), Error);
}
