#include <cmath>
#include <random>

#include "benthos/error.hpp"
#include "benthos/nav.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace benthos;

namespace {

NavSample at(double t, double x, double y, double heading = 0.0, double altitude = 2.0) {
  NavSample s;
  s.t = t;
  s.x = x;
  s.y = y;
  s.heading = heading;
  s.altitude = altitude;
  return s;
}

}  // namespace

TEST_CASE("pose_at interpolates linearly and returns exact samples") {
  NavSample a = at(0.0, 0.0, 0.0);
  a.depth = 10.0;
  NavSample b = at(2.0, 4.0, -2.0);
  b.depth = 12.0;
  b.altitude = 3.0;
  const NavTrack track({a, b});
  const auto mid = pose_at(track, 0.5);
  CHECK(mid.x == doctest::Approx(1.0));
  CHECK(mid.y == doctest::Approx(-0.5));
  CHECK(mid.depth == doctest::Approx(10.5));
  CHECK(mid.altitude == doctest::Approx(2.25));
  CHECK(pose_at(track, 2.0) == b);
  CHECK_THROWS_AS(pose_at(track, 2.0001), Error);
  CHECK_THROWS_AS(pose_at(track, -0.1), Error);
}

TEST_CASE("heading takes the short way round") {
  const NavTrack track({at(0.0, 0, 0, 350.0), at(1.0, 0, 0, 10.0)});
  CHECK(pose_at(track, 0.5).heading == doctest::Approx(0.0));
  CHECK(pose_at(track, 0.25).heading == doctest::Approx(355.0));
  CHECK(pose_at(track, 0.75).heading == doctest::Approx(5.0));
  CHECK(interpolate_heading(10.0, 350.0, 0.5) == doctest::Approx(0.0));
  CHECK(interpolate_heading(90.0, 180.0, 0.5) == doctest::Approx(135.0));
}

TEST_CASE("track validation") {
  CHECK_THROWS_AS(NavTrack({at(0, 0, 0)}), Error);
  CHECK_THROWS_AS(NavTrack({at(0, 0, 0), at(0, 1, 0)}), Error);
  CHECK_THROWS_AS(NavTrack({at(0, 0, 0), at(1, 0, 0, 360.0)}), Error);
  CHECK_THROWS_AS(NavTrack({at(0, 0, 0), at(1, 0, 0, 0.0, 0.0)}), Error);
  NavSample rolled = at(1, 0, 0);
  rolled.roll = 91.0;
  CHECK_THROWS_AS(NavTrack({at(0, 0, 0), rolled}), Error);
}

TEST_CASE("image center lands at nadir") {
  const CameraModel cam{60.0, 160, 120};
  for (double h : {0.0, 37.0, 90.0, 271.5}) {
    const auto p = pixel_to_world(at(0, 3.0, -4.0, h, 2.5), cam, {80.0, 60.0});
    CHECK(p.x == doctest::Approx(3.0));
    CHECK(p.y == doctest::Approx(-4.0));
  }
}

TEST_CASE("90 degree FOV at 2 m puts the image edge 2 m to starboard") {
  const CameraModel cam{90.0, 200, 100};
  const auto p = pixel_to_world(at(0, 0, 0), cam, {200.0, 50.0});
  CHECK(p.x == doctest::Approx(2.0));
  CHECK(std::abs(p.y) < 1e-12);
  const auto q = pixel_to_world(at(0, 0, 0), cam, {100.0, 0.0});
  // row 0 is forward, square pixels: 50 px at f = 100 px
  CHECK(std::abs(q.x) < 1e-12);
  CHECK(q.y == doctest::Approx(1.0));
}

TEST_CASE("heading 90 swaps the footprint axes") {
  const auto line = uhi_line_footprint(at(0, 10, 20, 90.0), 90.0, 5);
  // forward is east, starboard is south
  CHECK(line.front().x == doctest::Approx(10.0));
  CHECK(line.front().y == doctest::Approx(22.0));
  CHECK(line.back().x == doctest::Approx(10.0));
  CHECK(line.back().y == doctest::Approx(18.0));
  CHECK(line[2].y == doctest::Approx(20.0));
  const CameraModel cam{90.0, 200, 100};
  const auto fwd = pixel_to_world(at(0, 10, 20, 90.0), cam, {100.0, 0.0});
  CHECK(fwd.x == doctest::Approx(11.0));
  CHECK(fwd.y == doctest::Approx(20.0));
}

TEST_CASE("swath grows linearly with altitude") {
  for (double alt : {1.0, 2.0, 5.0}) {
    const auto line = uhi_line_footprint(at(0, 0, 0, 0.0, alt), 60.0, 64);
    const double width = line.back().x - line.front().x;
    CHECK(std::abs(width - 2.0 * alt * std::tan(M_PI / 6.0)) <= 1e-9);
    CHECK(std::abs(width - swath_width(alt, 60.0)) <= 1e-9);
  }
  // 2.3 m swath at 2 m
  CHECK(swath_width(2.0, kDefaultFovDeg) == doctest::Approx(2.3094010767585).epsilon(1e-12));
}

TEST_CASE("single-sample line maps to nadir and fractional samples interpolate") {
  const auto one = uhi_line_footprint(at(0, 1, 1), 60.0, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].x == doctest::Approx(1.0));
  const auto half = uhi_sample_to_world(at(0, 0, 0), 90.0, 5, 2.0);
  CHECK(std::abs(half.x) < 1e-12);
  const auto q = uhi_sample_to_world(at(0, 0, 0), 90.0, 5, 3.0);
  CHECK(q.x == doctest::Approx(1.0));
  CHECK_THROWS_AS(uhi_line_footprint(at(0, 0, 0), 180.0, 4), Error);
}

TEST_CASE("extreme attitude never reaches the seafloor") {
  NavSample s = at(0, 0, 0);
  s.roll = 90.0;
  CHECK_THROWS_AS(project_ray(s, 0.0, 0.0), Error);
  try {
    project_ray(s, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_intersection);
  }
  s.roll = 10.0;
  // body down tilts to port when rolling starboard-down
  CHECK(project_ray(s, 0.0, 0.0).x == doctest::Approx(-2.0 * std::tan(10.0 * M_PI / 180.0)));
}

TEST_CASE("geodetic conversion") {
  const GeoOrigin o{0.0, 0.0};
  const auto g = to_geodetic(o, {0.0, 111194.92664455873});
  CHECK(g.lat_deg == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.lon_deg == 0.0);
  const auto e = to_geodetic(o, {111194.92664455873, 0.0});
  CHECK(e.lon_deg == doctest::Approx(1.0).epsilon(1e-12));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-70, 70), lon(-180, 180), d(-5000, 5000);
  for (int i = 0; i < 500; ++i) {
    const GeoOrigin org{lat(rng), lon(rng)};
    const GeoPoint g = to_geodetic(org, {d(rng), d(rng)});
    const auto back = to_geodetic(org, to_local(org, g));
    CHECK(std::abs(back.lat_deg - g.lat_deg) <= 1e-9);
    CHECK(std::abs(back.lon_deg - g.lon_deg) <= 1e-9);
  }
}

TEST_CASE("nav csv round trip keeps the origin") {
  test::TempDir dir("nav");
  NavSample a = at(0.0, 1.25, -3.5, 359.5, 1.75);
  a.roll = -2.5;
  a.pitch = 4.0;
  a.depth = 30.125;
  const NavTrack t({a, at(0.5, 2, 2)}, GeoOrigin{60.5, 5.25});
  save_nav(t, dir / "nav.csv");
  const auto back = load_nav(dir / "nav.csv");
  CHECK(back.samples() == t.samples());
  REQUIRE(back.origin().has_value());
  CHECK(back.origin()->lat_deg == 60.5);
  test::spit(dir / "bad.csv", "t,x,y,depth,roll,pitch,heading,altitude\n0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(load_nav(dir / "bad.csv"), Error);
  CHECK_THROWS_AS(load_nav(dir / "missing.csv"), Error);
}
