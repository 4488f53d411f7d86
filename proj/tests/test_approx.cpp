#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spoc/approx.hpp"
#include "spoc/refine.hpp"
#include "spoc/scene.hpp"

using namespace spoc;

TEST_CASE("clustering hand traces") {
  const SampleSet one = SampleSet::from_points({{0, 0, 0}});
  const PlaneDeployment plane = PlaneDeployment::for_samples(one, 2.0);
  const CandidateSet c1 = farthest_point_clustering(one, 1, plane);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0] == Vec3{0, 0, 2});

  const SampleSet line = SampleSet::from_points({{0, 0, 0}, {10, 0, 0}, {5, 0, 0}});
  const CandidateSet c2 = farthest_point_clustering(line, 2, PlaneDeployment::for_samples(line, 2.0));
  REQUIRE(c2.size() == 2);
  CHECK(c2[0] == Vec3{0, 0, 2});
  CHECK(c2[1] == Vec3{10, 0, 2});
  CHECK(coverage_radius(c2, line) == doctest::Approx(std::sqrt(29.0)));
}

TEST_CASE("duplicate samples are never both chosen") {
  const SampleSet dup = SampleSet::from_points({{0, 0, 0}, {3, 0, 0}, {3, 0, 0}, {0, 0, 0}});
  const CandidateSet c = farthest_point_clustering(dup, 3, PlaneDeployment::for_samples(dup, 1.0));
  CHECK(c.size() == 2);
  CHECK(c[0] != c[1]);
}

TEST_CASE("coverage radius") {
  const SampleSet s = SampleSet::from_points({{0, 0, 0}, {3, 0, 0}});
  CHECK(coverage_radius(std::vector<Vec3>{{0, 0, 2}}, s) == doctest::Approx(std::sqrt(13.0)));
  // Centers over every sample of a flat patch: the radius is the clearance.
  const SampleSet flat = SampleSet::from_points({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}});
  std::vector<Vec3> over;
  for (const auto& p : flat.samples) over.push_back({p.position.x, p.position.y, 1.5});
  CHECK(coverage_radius(over, flat) == 1.5);
  CHECK(PlaneDeployment::for_samples(flat, 1.5).clearance == 1.5);
}

TEST_CASE("radius bound formula") {
  CHECK(clustering_radius_bound(3.0, 3.0) == doctest::Approx(3.0));
  CHECK(clustering_radius_bound(2.5, 0.0) == doctest::Approx(5.0));
  CHECK(clustering_radius_bound(5.0, 3.0) == doctest::Approx(std::sqrt(73.0)));
  CHECK(clustering_radius_bound(5.0, 3.0) == doctest::Approx(8.544).epsilon(1e-4));
  CHECK_THROWS_AS(clustering_radius_bound(1.0, 2.0), std::invalid_argument);
  // The certified factor lives in [1, 2].
  CHECK(clustering_certified_factor(3.0, 3.0) == doctest::Approx(1.0));
  CHECK(clustering_certified_factor(4.0, 0.0) == doctest::Approx(2.0));
  const double f = clustering_certified_factor(8.544, 3.0);
  CHECK(f >= 1.0);
  CHECK(f <= 2.0);
}

TEST_CASE("clustering radius shrinks with k and obeys the bound") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const TriangleMesh terrain = gen_terrain({rng(), 6, 6, 6, 0.1});
    const SampleSet s = sample_surface(terrain, 1.2);
    const PlaneDeployment plane = PlaneDeployment::for_samples(s, 3.0);
    double prev = INFINITY;
    for (std::size_t k = 1; k <= 5; ++k) {
      const double r = coverage_radius(farthest_point_clustering(s, k, plane), s);
      CHECK(r <= prev);
      prev = r;
    }
    std::vector<Vec3> pts;
    for (const auto& p : s.samples) pts.push_back(p.position);
    const double r1 = min_sphere_fixed_plane(pts, plane.height).radius;
    const double fpc = coverage_radius(farthest_point_clustering(s, 1, plane), s);
    CHECK(fpc <= clustering_radius_bound(r1, plane.clearance) + 1e-9);
  }
}
