#include <cmath>
#include <random>

#include "benthos/error.hpp"
#include "benthos/hypercube.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace benthos;
using benthos::test::TempDir;

namespace {

void write_header(const std::filesystem::path& p, std::size_t lines, std::size_t samples,
                  const std::string& wavelengths, std::size_t bands) {
  std::string ts;
  for (std::size_t i = 0; i < lines; ++i) ts += (i ? "," : "") + std::to_string(i);
  test::spit(p, "lines: " + std::to_string(lines) + "\nsamples: " + std::to_string(samples) +
                    "\nbands: " + std::to_string(bands) + "\nwavelengths_nm: " + wavelengths +
                    "\nkind: radiance\ntimestamps: " + ts + "\n");
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

}  // namespace

TEST_CASE("load_cube reads a 2x3x4 cube from a 96-byte payload") {
  TempDir dir("cube");
  write_header(dir / "c.hdr", 2, 3, "400,450,500,550", 4);
  std::string payload(96, '\0');
  // first float = 1.0f little-endian
  payload[2] = '\x80';
  payload[3] = '\x3f';
  test::spit(dir / "c.bil", payload);
  const HyperCube cube = load_cube(dir / "c.hdr");
  CHECK(cube.lines() == 2);
  CHECK(cube.samples() == 3);
  CHECK(cube.bands() == 4);
  CHECK(cube.at(0, 0, 0) == 1.0);
  CHECK(cube.at(1, 2, 3) == 0.0);
}

TEST_CASE("load_cube rejects a payload one byte short") {
  TempDir dir("cube");
  write_header(dir / "c.hdr", 2, 3, "400,450,500,550", 4);
  test::spit(dir / "c.bil", std::string(95, '\0'));
  CHECK(kind_of([&] { load_cube(dir / "c.hdr"); }) == ErrorKind::corrupt_file);
}

TEST_CASE("load_cube without payload is corrupt") {
  TempDir dir("cube");
  write_header(dir / "c.hdr", 2, 3, "400,450,500,550", 4);
  CHECK(kind_of([&] { load_cube(dir / "c.hdr"); }) == ErrorKind::corrupt_file);
}

TEST_CASE("non-monotone wavelengths are a format error") {
  TempDir dir("cube");
  write_header(dir / "c.hdr", 2, 3, "400,450,440,550", 4);
  test::spit(dir / "c.bil", std::string(96, '\0'));
  CHECK(kind_of([&] { load_cube(dir / "c.hdr"); }) == ErrorKind::format);
}

TEST_CASE("wavelength grid invariants") {
  CHECK(kind_of([] { WavelengthGrid({400.0, 500.0}); }) == ErrorKind::format);
  CHECK(kind_of([] { WavelengthGrid({250.0, 500.0, 600.0}); }) == ErrorKind::format);
  CHECK(kind_of([] { WavelengthGrid({400.0, 500.0, 1200.0}); }) == ErrorKind::format);
  CHECK(WavelengthGrid::uniform(380, 750, 5).size() == 75);
}

TEST_CASE("save_cube then load_cube is bit-exact on random cubes") {
  TempDir dir("cube");
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cube = test::random_cube(rng, 7, 5, WavelengthGrid::uniform(400, 700, 25),
                                        trial % 2 ? CubeKind::radiance : CubeKind::reflectance,
                                        0.0, 3.5);
    const auto path = dir / ("r" + std::to_string(trial) + ".hdr");
    save_cube(cube, path);
    CHECK(std::filesystem::exists(payload_path_for(path)));
    const HyperCube back = load_cube(path);
    CHECK(back == cube);
  }
}

TEST_CASE("save_cube to an unwritable location is an I/O error") {
  std::mt19937_64 rng(1);
  const auto cube =
      test::random_cube(rng, 2, 2, WavelengthGrid::uniform(400, 600, 100), CubeKind::radiance);
  CHECK(kind_of([&] { save_cube(cube, "/nonexistent_dir_benthos/x/c.hdr"); }) == ErrorKind::io);
}

TEST_CASE("cube invariants") {
  const auto grid = WavelengthGrid::uniform(400, 600, 100);
  CHECK(kind_of([&] {
          HyperCube(1, 2, grid, CubeKind::radiance, std::vector<double>(5, 0.0), {0.0});
        }) == ErrorKind::precondition);
  CHECK(kind_of([&] {
          HyperCube(2, 1, grid, CubeKind::radiance, std::vector<double>(6, 0.0), {1.0, 0.0});
        }) == ErrorKind::precondition);
  CHECK(kind_of([&] {
          HyperCube(1, 1, grid, CubeKind::reflectance, {0.1, 4.5, 0.2}, {0.0});
        }) == ErrorKind::precondition);
  CHECK_NOTHROW(HyperCube(1, 1, grid, CubeKind::reflectance, {0.1, 3.9, 0.2}, {0.0}));
}

TEST_CASE("band_index_for_wavelength") {
  const auto grid = WavelengthGrid::uniform(380, 750, 5);
  // exhaustive-scan oracle: 465 is the 17th step above 380
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - 465.0) < std::abs(grid[best] - 465.0)) best = i;
  CHECK(best == 17);
  CHECK(band_index_for_wavelength(grid, 465.0) == 17);
  CHECK(band_index_for_wavelength(grid, 630.0) == 50);
  CHECK(band_index_for_wavelength(WavelengthGrid({400.0, 500.0, 600.0}), 450.0) == 0);
  CHECK(band_index_for_wavelength(WavelengthGrid({400.0, 500.0, 600.0}), 550.0) == 1);
  CHECK(band_index_for_wavelength(grid, 377.6) == 0);
  CHECK(kind_of([&] { band_index_for_wavelength(grid, 377.0); }) == ErrorKind::out_of_range);
  CHECK(kind_of([&] { band_index_for_wavelength(grid, 900.0); }) == ErrorKind::out_of_range);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(378.0, 752.0);
  for (int i = 0; i < 500; ++i) {
    const double t = u(rng);
    const std::size_t got = band_index_for_wavelength(grid, t);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(std::abs(grid[got] - t) <= std::abs(grid[k] - t));
    }
  }
}

TEST_CASE("pseudo_rgb of a constant cube is uniform gray") {
  const auto grid = WavelengthGrid::uniform(400, 700, 10);
  HyperCube cube = HyperCube::zeros(6, 4, grid, CubeKind::reflectance);
  for (double& v : cube.mutable_data()) v = 0.4;
  const RgbImage img = pseudo_rgb(cube);
  CHECK(img.width() == 4);
  CHECK(img.height() == 6);
  const Rgb first = img.at(0, 0);
  CHECK(first[0] == first[1]);
  CHECK(first[1] == first[2]);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 4; ++c) CHECK(img.at(r, c) == first);
}

TEST_CASE("pseudo_rgb with only the 630 nm band lit is pure red") {
  const auto grid = WavelengthGrid::uniform(400, 700, 10);
  HyperCube cube = HyperCube::zeros(3, 3, grid, CubeKind::reflectance);
  const std::size_t red = band_index_for_wavelength(grid, 630.0);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t s = 0; s < 3; ++s) cube.at(l, s, red) = 1.0;
  const RgbImage img = pseudo_rgb(cube);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(img.at(r, c) == Rgb{255, 0, 0});
}

namespace {

// Independent 1-99 percentile stretch (sorted-position interpolation).
std::vector<int> stretch_oracle(std::vector<double> v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  auto pct = [&](double p) {
    const double pos = p / 100.0 * static_cast<double>(s.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const std::size_t j = std::min(i + 1, s.size() - 1);
    return s[i] + (s[j] - s[i]) * (pos - static_cast<double>(i));
  };
  const double lo = pct(1), hi = pct(99);
  std::vector<int> out;
  for (double x : v) {
    double t = (x - lo) / (hi - lo);
    t = t < 0 ? 0 : (t > 1 ? 1 : t);
    out.push_back(static_cast<int>(std::lround(t * 255)));
  }
  return out;
}

}  // namespace

TEST_CASE("pseudo_rgb channels equal the stretched nearest bands") {
  std::mt19937_64 rng(5);
  const auto grid = WavelengthGrid::uniform(380, 750, 5);
  const auto cube = test::random_cube(rng, 20, 15, grid, CubeKind::reflectance);
  const RgbImage img = pseudo_rgb(cube);
  const double targets[3] = {630.0, 532.0, 465.0};
  for (int ch = 0; ch < 3; ++ch) {
    std::size_t band = 0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(grid[i] - targets[ch]) < std::abs(grid[band] - targets[ch])) band = i;
    std::vector<double> plane;
    for (std::size_t l = 0; l < 20; ++l)
      for (std::size_t s = 0; s < 15; ++s) plane.push_back(cube.at(l, s, band));
    const auto expect = stretch_oracle(plane);
    for (std::size_t l = 0; l < 20; ++l)
      for (std::size_t s = 0; s < 15; ++s)
        CHECK(static_cast<int>(img.at(l, s)[ch]) == expect[l * 15 + s]);
  }
}

TEST_CASE("pseudo_rgb is monotone per channel") {
  std::mt19937_64 rng(9);
  const auto grid = WavelengthGrid::uniform(400, 700, 10);
  const auto cube = test::random_cube(rng, 12, 12, grid, CubeKind::reflectance);
  const RgbImage img = pseudo_rgb(cube);
  const std::size_t band = band_index_for_wavelength(grid, 532.0);
  for (std::size_t a = 0; a < 144; ++a)
    for (std::size_t b = 0; b < 144; ++b) {
      const double va = cube.at(a / 12, a % 12, band), vb = cube.at(b / 12, b % 12, band);
      if (va >= vb) CHECK(img.at(a / 12, a % 12)[1] >= img.at(b / 12, b % 12)[1]);
    }
}

TEST_CASE("pseudo_rgb needs 465-630 nm coverage") {
  HyperCube cube = HyperCube::zeros(2, 2, WavelengthGrid::uniform(500, 700, 10),
                                    CubeKind::reflectance);
  CHECK(kind_of([&] { pseudo_rgb(cube); }) == ErrorKind::out_of_range);
}

TEST_CASE("ppm round trip") {
  TempDir dir("ppm");
  RgbImage img(5, 3);
  img.set(1, 4, {1, 2, 3});
  write_ppm(img, dir / "a.ppm");
  CHECK(read_ppm(dir / "a.ppm") == img);
  CHECK(test::slurp(dir / "a.ppm").rfind("P6", 0) == 0);
}
