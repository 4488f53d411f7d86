#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spoc/errors.hpp"
#include "spoc/model.hpp"

using namespace spoc;

TEST_CASE("inverse distance quality") {
  CHECK(phi_inverse_distance({0, 0, 0}, {0, 0, 2}) == doctest::Approx(0.5));
  CHECK(phi_inverse_distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(phi_inverse_distance({1, 2, 3}, {1, 2, 3}), InconsistentInputError);
}

TEST_CASE("lambert quality") {
  const Vec3 up{0, 0, 1};
  CHECK(phi_lambert({0, 0, 0}, up, {0, 0, 2}) == doctest::Approx(0.25));
  CHECK(phi_lambert({0, 0, 0}, up, {2, 0, 2}) == doctest::Approx(std::sqrt(0.5) / 8.0));
  CHECK(phi_lambert({0, 0, 0}, up, {2, 0, 2}) == doctest::Approx(0.088388).epsilon(1e-5));
  CHECK(phi_lambert({0, 0, 0}, up, {0, 0, -2}) == 0.0);
  CHECK_THROWS_AS(phi_lambert({0, 0, 0}, up, {0, 0, 0}), InconsistentInputError);
}

TEST_CASE("build_instance masks quality with visibility") {
  const std::vector<Vec3> samples{{0, 0, 0}, {1, 0, 0}};
  const std::vector<Vec3> cands{{0, 0, 2}, {3, 0, 4}};
  const std::vector<std::vector<int>> table{{1, 0}, {1, 1}};

  const CoverageInstance vis = make_instance(samples, cands, QualityKind::Visibility, table);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) CHECK(vis.phi(i, j) == table[i][j]);
  }

  const CoverageInstance none =
      make_instance(samples, cands, QualityKind::InverseDistance, {{0, 0}, {0, 0}});
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) CHECK(none.phi(i, j) == 0.0);
  }

  const CoverageInstance inv = make_instance(samples, cands, QualityKind::InverseDistance, table);
  CHECK(inv.phi(0, 0) == doctest::Approx(0.5));
  CHECK(inv.phi(0, 1) == 0.0);
  CHECK(inv.phi(1, 0) == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(inv.phi(1, 1) == doctest::Approx(1.0 / std::sqrt(20.0)));

  const CoverageInstance lam = make_instance(samples, cands, QualityKind::LambertInverseSquare, table);
  // cos = dz / d, so phi = dz / d^3.
  CHECK(lam.phi(0, 0) == doctest::Approx(0.25));
  CHECK(lam.phi(1, 0) == doctest::Approx(2.0 / std::pow(5.0, 1.5)));
  CHECK(lam.phi(1, 1) == doctest::Approx(4.0 / std::pow(20.0, 1.5)));
}

TEST_CASE("build_instance rejects inconsistent inputs") {
  SampleSet s = SampleSet::from_points({{0, 0, 0}});
  CandidateSet c = CandidateSet::from_positions({{0, 0, 1}});
  VisibilityMatrix wrong(1, 1, 0, 0);
  CHECK_THROWS_AS(build_instance(s, c, wrong, QualityKind::Visibility), InconsistentInputError);
  CHECK_THROWS_AS(make_instance({{0, 0, 0}}, {{0, 0, 0}}, QualityKind::InverseDistance), InconsistentInputError);
  CHECK_THROWS_AS(make_instance({{0, 0, 0}}, {{0, 0, 0}}, QualityKind::LambertInverseSquare),
                  InconsistentInputError);
  CHECK_NOTHROW(make_instance({{0, 0, 0}}, {{0, 0, 0}}, QualityKind::Visibility));
  // A coincident but occluded pair is harmless.
  CHECK_NOTHROW(make_instance({{0, 0, 0}}, {{0, 0, 0}}, QualityKind::InverseDistance, {{0}}));
}

TEST_CASE("evaluate examples") {
  const std::vector<Vec3> samples{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const std::vector<Vec3> cands{{0, 0, 1}, {2, 0, 1}};
  const std::vector<std::vector<int>> table{{1, 0}, {1, 1}, {0, 1}};

  const CoverageInstance vis = make_instance(samples, cands, QualityKind::Visibility, table);
  const CoverageReport empty = evaluate(vis, {});
  CHECK(empty.covered_ids.empty());
  CHECK(empty.objective == 0.0);
  const CoverageReport one = evaluate(vis, pick({1}));
  CHECK(one.covered_ids == std::vector<std::size_t>{1, 2});
  CHECK(one.objective == 2.0);

  const CoverageInstance inv = make_instance(samples, cands, QualityKind::InverseDistance, table);
  CHECK(evaluate(inv, {}).objective == 0.0);
  CHECK(evaluate(inv, pick({0, 1})).objective == doctest::Approx(1.0 / std::sqrt(2.0)));

  const CoverageInstance lam = make_instance(samples, cands, QualityKind::LambertInverseSquare, table);
  CHECK_THROWS_AS(evaluate(lam, pick({0})), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(vis, pick({2})), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(vis, pick({0, 0})), std::invalid_argument);
}

TEST_CASE("cumulative sum against a threshold") {
  // Two sensors whose qualities at the sample are 0.2 and 0.15: directly
  // overhead at heights with 1/h^2 equal to those values.
  const std::vector<Vec3> samples{{0, 0, 0}};
  const std::vector<Vec3> cands{{0, 0, 1.0 / std::sqrt(0.2)}, {0, 0, 1.0 / std::sqrt(0.15)}};
  const CoverageInstance lam = make_instance(samples, cands, QualityKind::LambertInverseSquare);
  CHECK(lam.phi(0, 0) == doctest::Approx(0.2));
  CHECK(lam.phi(0, 1) == doctest::Approx(0.15));
  const CoverageReport r = evaluate(lam, pick({0, 1}), 0.3);
  CHECK(r.per_sample_f[0] == doctest::Approx(0.35));
  CHECK(r.covered_ids == std::vector<std::size_t>{0});
  CHECK(evaluate(lam, pick({0}), 0.3).covered_ids.empty());
}

TEST_CASE("strict and inclusive threshold rules differ only at equality") {
  const CoverageInstance lam = make_instance({{0, 0, 0}}, {{0, 0, 2}}, QualityKind::LambertInverseSquare);
  CHECK(evaluate(lam, pick({0}), 0.25, ThresholdRule::Strict).covered_ids.empty());
  CHECK(evaluate(lam, pick({0}), 0.25, ThresholdRule::Inclusive).covered_ids.size() == 1);
}

TEST_CASE("evaluate properties on random instances") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = oracle::random_instance(rng, 25, 8, 0.4);
    const CoverageInstance lam =
        build_instance(inst.samples, inst.candidates, inst.vis, QualityKind::LambertInverseSquare);
    const CoverageInstance vis = build_instance(inst.samples, inst.candidates, inst.vis, QualityKind::Visibility);
    std::vector<std::size_t> order{0, 3, 5, 6};
    const CoverageReport sum = evaluate(lam, pick(order), 0.05);
    std::vector<double> best(lam.n(), 0.0);
    for (std::size_t i = 0; i < lam.n(); ++i) {
      for (std::size_t j : order) best[i] = std::max(best[i], lam.phi(i, j));
      CHECK(sum.per_sample_f[i] >= best[i]);
    }
    // Adding a sensor never lowers any sample.
    std::vector<std::size_t> more = order;
    more.push_back(7);
    const CoverageReport bigger = evaluate(lam, pick(more), 0.05);
    for (std::size_t i = 0; i < lam.n(); ++i) CHECK(bigger.per_sample_f[i] >= sum.per_sample_f[i]);
    // Order of the placement does not matter, bit for bit.
    std::vector<std::size_t> shuffled = order;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const CoverageReport again = evaluate(lam, pick(shuffled), 0.05);
    CHECK(again.per_sample_f == sum.per_sample_f);
    CHECK(again.covered_ids == sum.covered_ids);
    // Visibility objective matches the raw bit oracle.
    CHECK(evaluate(vis, pick(order)).objective == oracle::subset_visibility(inst.vis, order));
  }
}

TEST_CASE("radius helpers") {
  CHECK(required_count(10, 0.8) == 8);
  CHECK(required_count(3, 0.7) == 3);
  CHECK(required_count(10, 0.0) == 0);
  CHECK(required_count(10, 0.3) == 3);  // 10 * 0.3 is 3.0000000000000004
  const std::vector<double> d{3.0, 1.0, 2.0, std::numeric_limits<double>::infinity()};
  CHECK(radius_at_ratio(d, 0.5) == 2.0);
  CHECK(radius_at_ratio(d, 0.75) == 3.0);
  CHECK(std::isinf(radius_at_ratio(d, 1.0)));
  CHECK(radius_at_ratio(d, 0.0) == 0.0);
}
