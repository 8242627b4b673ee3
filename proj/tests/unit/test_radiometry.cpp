#include <cmath>
#include <random>

#include "benthos/error.hpp"
#include "benthos/radiometry.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace benthos;

namespace {

const WavelengthGrid kGrid = WavelengthGrid::uniform(400, 700, 50);

CalibrationPlate plate_with(double r, double l, double d) {
  return {kGrid, std::vector<double>(kGrid.size(), r), std::vector<double>(kGrid.size(), l), d};
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

TEST_CASE("calibrate_illuminant without attenuation") {
  const auto illum = calibrate_illuminant(plate_with(1.0, 0.8, 2.0),
                                          AttenuationProfile::constant(kGrid, 0.0));
  for (double v : illum.intensity) CHECK(v == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("calibrate_illuminant with c=0.1, d=2") {
  const auto illum = calibrate_illuminant(plate_with(0.99, 0.5, 2.0),
                                          AttenuationProfile::constant(kGrid, 0.1));
  // 0.5 / (0.99 * e^-0.4)
  const double expect = 0.7534468169905406;
  for (double v : illum.intensity) CHECK(v == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("calibrate_illuminant errors") {
  const auto other = WavelengthGrid::uniform(400, 700, 100);
  CHECK(kind_of([&] {
          calibrate_illuminant(plate_with(1.0, 0.5, 1.0), AttenuationProfile::constant(other, 0.1));
        }) == ErrorKind::incompatible_grid);
  CHECK(kind_of([&] {
          calibrate_illuminant(plate_with(0.0, 0.5, 1.0), AttenuationProfile::constant(kGrid, 0.1));
        }) == ErrorKind::degenerate_plate);
}

TEST_CASE("forward_model evaluates R*I0*exp(-2cd)") {
  HyperCube r = HyperCube::zeros(1, 1, kGrid, CubeKind::reflectance);
  for (double& v : r.mutable_data()) v = 0.5;
  const IlluminantSpectrum one{kGrid, std::vector<double>(kGrid.size(), 1.0)};
  const std::vector<double> d{2.0};
  const HyperCube l = forward_model(r, one, AttenuationProfile::constant(kGrid, 0.1), d);
  CHECK(l.kind() == CubeKind::radiance);
  for (double v : l.data()) CHECK(v == doctest::Approx(0.33516002301781966).epsilon(1e-14));

  const IlluminantSpectrum two{kGrid, std::vector<double>(kGrid.size(), 2.0)};
  const HyperCube l0 = forward_model(r, two, AttenuationProfile::constant(kGrid, 0.0), d);
  for (double v : l0.data()) CHECK(v == 1.0);
}

TEST_CASE("identity correction when c = 0 and I0 = 1") {
  std::mt19937_64 rng(2);
  const auto cube = test::random_cube(rng, 4, 3, kGrid, CubeKind::radiance, 0.0, 3.0);
  const IlluminantSpectrum one{kGrid, std::vector<double>(kGrid.size(), 1.0)};
  const std::vector<double> d(4, 1.7);
  const auto res = correct_to_reflectance(cube, one, AttenuationProfile::constant(kGrid, 0.0), d);
  CHECK(res.cube.kind() == CubeKind::reflectance);
  CHECK(res.clamped == 0);
  for (std::size_t i = 0; i < cube.data().size(); ++i) CHECK(res.cube.data()[i] == cube.data()[i]);
}

TEST_CASE("correction preconditions") {
  std::mt19937_64 rng(2);
  const auto cube = test::random_cube(rng, 4, 3, kGrid, CubeKind::radiance);
  const IlluminantSpectrum one{kGrid, std::vector<double>(kGrid.size(), 1.0)};
  const auto att = AttenuationProfile::constant(kGrid, 0.1);
  CHECK(kind_of([&] { correct_to_reflectance(cube, one, att, std::vector<double>(3, 1.0)); }) ==
        ErrorKind::precondition);
  CHECK(kind_of([&] { correct_to_reflectance(cube, one, att, std::vector<double>{1, 1, 0, 1}); }) ==
        ErrorKind::precondition);
  CHECK(kind_of([&] {
          correct_to_reflectance(cube.with_kind(CubeKind::reflectance), one, att,
                                 std::vector<double>(4, 1.0));
        }) == ErrorKind::precondition);
}

TEST_CASE("corrected values are clamped to [0, 4] and counted") {
  HyperCube cube = HyperCube::zeros(1, 2, kGrid, CubeKind::radiance);
  cube.at(0, 0, 0) = 10.0;
  const IlluminantSpectrum one{kGrid, std::vector<double>(kGrid.size(), 1.0)};
  const auto res = correct_to_reflectance(cube, one, AttenuationProfile::constant(kGrid, 0.0),
                                          std::vector<double>{1.0});
  CHECK(res.clamped == 1);
  CHECK(res.cube.at(0, 0, 0) == kMaxReflectance);
}

TEST_CASE("round trip correct(forward(R)) = R") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> c(0.0, 0.6), dist(0.5, 6.0), i0(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = test::random_cube(rng, 6, 5, kGrid, CubeKind::reflectance, 0.01, 1.5);
    AttenuationProfile att{kGrid, {}};
    IlluminantSpectrum illum{kGrid, {}};
    for (std::size_t b = 0; b < kGrid.size(); ++b) {
      att.c_per_m.push_back(c(rng));
      illum.intensity.push_back(i0(rng));
    }
    std::vector<double> d(6);
    for (double& v : d) v = dist(rng);
    const auto back = correct_to_reflectance(forward_model(r, illum, att, d), illum, att, d);
    for (std::size_t i = 0; i < r.data().size(); ++i) {
      CHECK(std::abs(back.cube.data()[i] - r.data()[i]) <= 1e-6 * r.data()[i]);
    }
  }
}

TEST_CASE("plate self-consistency") {
  CalibrationPlate plate{kGrid, {0.9, 0.95, 0.8, 0.99, 0.7, 0.85, 0.6},
                         {0.4, 0.6, 0.5, 0.3, 0.2, 0.25, 0.1}, 1.3};
  AttenuationProfile att{kGrid, {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  const auto illum = calibrate_illuminant(plate, att);
  const auto r = correct_spectrum(plate.measured_radiance, illum, att, plate.plate_distance_m);
  for (std::size_t b = 0; b < kGrid.size(); ++b)
    CHECK(std::abs(r[b] - plate.plate_reflectance[b]) <= 1e-9);
}

TEST_CASE("increasing attenuation strictly lowers radiance") {
  HyperCube r = HyperCube::zeros(1, 1, kGrid, CubeKind::reflectance);
  for (double& v : r.mutable_data()) v = 0.3;
  const IlluminantSpectrum one{kGrid, std::vector<double>(kGrid.size(), 1.0)};
  double prev = 1e9;
  for (double c : {0.0, 0.05, 0.1, 0.5, 1.0}) {
    const auto l = forward_model(r, one, AttenuationProfile::constant(kGrid, c),
                                 std::vector<double>{1.5});
    CHECK(l.data()[0] < prev);
    prev = l.data()[0];
  }
}

TEST_CASE("plate and attenuation files round trip") {
  test::TempDir dir("rad");
  CalibrationPlate plate{kGrid, std::vector<double>(7, 0.95),
                         {0.4, 0.6, 0.5, 0.3, 0.2, 0.25, 0.1}, 1.5};
  save_plate(plate, dir / "plate.csv");
  const auto back = load_plate(dir / "plate.csv");
  CHECK(back.grid == plate.grid);
  CHECK(back.plate_reflectance == plate.plate_reflectance);
  CHECK(back.measured_radiance == plate.measured_radiance);
  CHECK(back.plate_distance_m == 1.5);

  const AttenuationProfile att{kGrid, {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6}};
  save_attenuation(att, dir / "att.csv");
  const auto att2 = load_attenuation(dir / "att.csv");
  CHECK(att2.c_per_m == att.c_per_m);

  test::spit(dir / "bad.csv", "wavelength_nm,reflectance,radiance\n400,1,1\n");
  CHECK_THROWS_AS(load_plate(dir / "bad.csv"), Error);
}
