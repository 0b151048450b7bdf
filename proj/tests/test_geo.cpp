#include <algorithm>
#include <random>
#include <sstream>

#include "conley/csv.hpp"
#include "conley/error.hpp"
#include "conley/geo.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace conley;

TEST_CASE("projected distance is euclidean") {
  CHECK(distance({0, 0}, {3, 4}, Crs::ProjectedKm) == doctest::Approx(5.0));
}

TEST_CASE("haversine: one degree of latitude") {
  const double d = distance({0, 0}, {0, 1}, Crs::LonLatDeg);
  CHECK(d == doctest::Approx(kEarthRadiusKm * M_PI / 180.0).epsilon(1e-12));
  CHECK(d == doctest::Approx(111.195).epsilon(1e-4));
}

TEST_CASE("quarter great circle and identity") {
  CHECK(distance({0, 0}, {90, 0}, Crs::LonLatDeg) == doctest::Approx(M_PI * kEarthRadiusKm / 2).epsilon(1e-14));
  CHECK(distance({0, 0}, {90, 0}, Crs::LonLatDeg) == doctest::Approx(10007.557).epsilon(1e-7));
  for (Crs crs : {Crs::ProjectedKm, Crs::LonLatDeg}) {
    CHECK(distance({12.5, 40.25}, {12.5, 40.25}, crs) == 0.0);
    CHECK(distance({12.5, 40.25}, {-3.0, 7.0}, crs) == distance({-3.0, 7.0}, {12.5, 40.25}, crs));
  }
}

TEST_CASE("neighbors_within on three collinear points") {
  const PointSet ps({{0, 0}, {10, 0}, {25, 0}}, Crs::ProjectedKm);
  const auto nl = neighbors_within(ps, 10);
  REQUIRE(nl.pairs.size() == 1);
  CHECK(nl.pairs[0].i == 0);
  CHECK(nl.pairs[0].j == 1);
  CHECK(nl.pairs[0].d == 10.0);
  CHECK(neighbors_within(ps, 0).pairs.empty());
  CHECK(neighbors_within(ps, 0).radius == 0.0);
}

TEST_CASE("neighbors_within on 200 random points at radius 150") {
  std::mt19937_64 g(150);
  const PointSet ps(oracle::random_points(g, 200, 1500, 1000), Crs::ProjectedKm);
  const auto nl = neighbors_within(ps, 150);
  const auto ref = oracle::pairs_within(ps, 150);
  REQUIRE(nl.pairs.size() == ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    CHECK(nl.pairs[k].i == ref[k].i);
    CHECK(nl.pairs[k].j == ref[k].j);
  }
}

TEST_CASE("distance rejects non-finite and out-of-range coordinates") {
  CHECK_THROWS_AS(distance({NAN, 0}, {0, 0}, Crs::ProjectedKm), InvalidInput);
  CHECK_THROWS_AS(distance({0, 95}, {0, 0}, Crs::LonLatDeg), InvalidInput);
  CHECK_THROWS_AS(distance({190, 0}, {0, 0}, Crs::LonLatDeg), InvalidInput);
}

TEST_CASE("PointSet needs at least two points") {
  CHECK_THROWS_AS(PointSet({{0, 0}}, Crs::ProjectedKm), InvalidInput);
  CHECK_NOTHROW(PointSet({{0, 0}, {1, 1}}, Crs::ProjectedKm));
}

TEST_CASE("triangle inequality on random triples") {
  std::mt19937_64 g(7);
  for (Crs crs : {Crs::ProjectedKm, Crs::LonLatDeg}) {
    const auto pts = crs == Crs::ProjectedKm ? oracle::random_points(g, 300, 1000, 1000) : oracle::random_lonlat(g, 300);
    for (std::size_t k = 0; k + 2 < pts.size(); k += 3) {
      const double ab = distance(pts[k], pts[k + 1], crs);
      const double bc = distance(pts[k + 1], pts[k + 2], crs);
      const double ac = distance(pts[k], pts[k + 2], crs);
      CHECK(ac <= (ab + bc) * (1 + 1e-9));
    }
  }
}

TEST_CASE("haversine is close to the local tangent-plane distance for short hops") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> lat(30, 55), lon(-120, -70), step(-0.3, 0.3);
  for (int k = 0; k < 500; ++k) {
    const Point a{lon(g), lat(g)};
    const Point b{a.c1 + step(g), a.c2 + step(g)};
    const double d = distance(a, b, Crs::LonLatDeg);
    if (d >= 50.0 || d == 0.0) continue;
    const double rad = M_PI / 180.0;
    const double mid = (a.c2 + b.c2) / 2 * rad;
    const double dx = (b.c1 - a.c1) * rad * std::cos(mid) * kEarthRadiusKm;
    const double dy = (b.c2 - a.c2) * rad * kEarthRadiusKm;
    CHECK(std::abs(d - std::hypot(dx, dy)) / d < 0.005);
  }
}

namespace {
void check_against_brute_force(const PointSet& ps, double r) {
  const NeighborList nl = neighbors_within(ps, r);
  const auto ref = oracle::pairs_within(ps, r);
  REQUIRE(nl.pairs.size() == ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    CHECK(nl.pairs[k].i == ref[k].i);
    CHECK(nl.pairs[k].j == ref[k].j);
    CHECK(nl.pairs[k].d == ps.distance(ref[k].i, ref[k].j));
  }
}
}  // namespace

TEST_CASE("neighbors_within equals brute-force pair scan") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> ur(0, 400);
  for (int rep = 0; rep < 25; ++rep) {
    const PointSet pp(oracle::random_points(g, 60, 1000, 700), Crs::ProjectedKm);
    check_against_brute_force(pp, ur(g));
    const PointSet pl(oracle::random_lonlat(g, 60), Crs::LonLatDeg);
    check_against_brute_force(pl, 5 * ur(g));
  }
}

TEST_CASE("neighbors_within handles lattice ties at the radius") {
  const PointSet ps = make_lattice(10, {0, 0, 100, 100});
  check_against_brute_force(ps, 10.0);
  check_against_brute_force(ps, 10.0 * std::sqrt(2.0));
  check_against_brute_force(ps, 0.0);
}

TEST_CASE("neighbors_within with duplicate points and near the antimeridian") {
  const PointSet dup({{1, 1}, {1, 1}, {2, 1}, {1, 1}}, Crs::ProjectedKm);
  check_against_brute_force(dup, 0.0);
  check_against_brute_force(dup, 1.0);
  const PointSet am({{179.9, 10}, {-179.9, 10}, {0, 89.9}, {180, 89.95}, {-10, -89.9}}, Crs::LonLatDeg);
  check_against_brute_force(am, 30.0);
  check_against_brute_force(am, 20000.0);
}

TEST_CASE("neighbour sets are nested in the radius") {
  std::mt19937_64 g(5);
  const PointSet ps(oracle::random_points(g, 200, 500, 500), Crs::ProjectedKm);
  const auto small = neighbors_within(ps, 40);
  const auto large = neighbors_within(ps, 90);
  std::size_t k = 0;
  for (const auto& p : small.pairs) {
    while (k < large.pairs.size() && (large.pairs[k].i != p.i || large.pairs[k].j != p.j)) ++k;
    CHECK(k < large.pairs.size());
  }
}

TEST_CASE("neighbors_within rejects a negative radius") {
  const PointSet ps({{0, 0}, {1, 1}}, Crs::ProjectedKm);
  CHECK_THROWS_AS(neighbors_within(ps, -1), InvalidInput);
}

TEST_CASE("lattice sizes") {
  CHECK(make_lattice(10, {0, 0, 100, 100}).size() == 100);
  const auto us = make_lattice(70, {0, 0, 4600, 2800});
  CHECK(us.size() >= 2600 * 0.85);
  CHECK(us.size() <= 2600 * 1.15);
  CHECK(lattice_points(500, {0, 0, 100, 100}).size() == 1);
  CHECK_THROWS_AS(make_lattice(500, {0, 0, 100, 100}), InvalidInput);
  CHECK_THROWS_AS(make_lattice(10, {0, 0, 0, 100}), InvalidInput);
  CHECK_THROWS_AS(make_lattice(0, {0, 0, 100, 100}), InvalidInput);
  const auto desk = make_lattice(70, {0, 0, 2800, 1750});
  CHECK(desk.size() == 1000);
  CHECK(desk[0].c1 == 35.0);
  CHECK(desk[1].c1 == 105.0);
}

TEST_CASE("irregular sample is reproducible, inside the box, and denser in the east") {
  const BoundingBox box{0, 0, 2800, 1750};
  const auto a = make_irregular(1000, box, 1908);
  const auto b = make_irregular(1000, box, 1908);
  REQUIRE(a.size() == 1000);
  std::size_t east = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].c1 == b[i].c1);
    CHECK(a[i].c2 == b[i].c2);
    CHECK(a[i].c1 >= 0);
    CHECK(a[i].c1 <= 2800);
    CHECK(a[i].c2 >= 0);
    CHECK(a[i].c2 <= 1750);
    east += a[i].c1 > 1400;
  }
  // density 1 + 3t gives 5/8 of the mass in the eastern half
  CHECK(east > 560);
  CHECK(east < 690);
  const auto c = make_irregular(1000, box, 1909);
  CHECK(c[0].c1 != a[0].c1);
}

TEST_CASE("load_points reads columns and preserves order") {
  std::istringstream in("id,x,y\n1,0,0\n2,3,4\n");
  const PointSet ps = load_points(read_csv(in), {"x", "y"}, Crs::ProjectedKm);
  REQUIRE(ps.size() == 2);
  CHECK(ps.crs() == Crs::ProjectedKm);
  CHECK(ps.distance(0, 1) == 5.0);
}

TEST_CASE("load_points errors") {
  std::istringstream bad_lon("lon,lat\n10,10\n200,10\n");
  try {
    load_points(read_csv(bad_lon), {"lon", "lat"}, Crs::LonLatDeg);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::istringstream missing("a,b\n1,2\n3,4\n");
  CHECK_THROWS_AS(load_points(read_csv(missing), {"x", "y"}, Crs::ProjectedKm), InvalidInput);
  std::istringstream text("x,y\n1,2\nfoo,4\n");
  CHECK_THROWS_AS(load_points(read_csv(text), {"x", "y"}, Crs::ProjectedKm), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), InvalidInput);
  std::istringstream header_only("x,y\n");
  CHECK_THROWS_AS(load_points(read_csv(header_only), {"x", "y"}, Crs::ProjectedKm), InvalidInput);
}
