#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spoc/driver.hpp"
#include "spoc/errors.hpp"
#include "spoc/scene.hpp"

using namespace spoc;

namespace {

CoverageInstance line_instance() {
  return make_instance({{0, 0, 0}, {4, 0, 0}, {8, 0, 0}}, {{0, 0, 0}, {8, 0, 0}}, QualityKind::Visibility);
}

struct Room {
  TriangleMesh mesh = gen_room(default_room());
  Bvh bvh = build_bvh(mesh);
  SceneInput scene{&mesh, &bvh, 0.0, PlaneRegion{2.3, 0.2, 0.3, 3.8, 2.3}, std::nullopt, 0};
};

}  // namespace

TEST_CASE("problem 1 driver") {
  Room room;
  const CoverageInstance inst = discretize(room.scene, 0.5, 0.9, QualityKind::Visibility);
  CHECK(solve_problem1(inst, 0).report.coverage_ratio() == 0.0);
  const CoverageSolution all = solve_problem1(inst, inst.m());
  CHECK(all.report.covered_ids.size() == oracle::column_or_count(inst.vis()));
  double prev = -1.0;
  for (std::size_t k = 1; k <= 6; ++k) {
    const CoverageSolution s = solve_problem1(inst, k);
    CHECK(s.solve.status == SolveStatus::Optimal);
    CHECK(s.report.coverage_ratio() >= prev);
    CHECK(s.report.coverage_ratio() <= 1.0);
    prev = s.report.coverage_ratio();
  }
  CHECK_THROWS_AS(solve_problem1(build_instance(inst.samples(), inst.candidates(), inst.vis(),
                                                QualityKind::InverseDistance),
                                 1),
                  std::invalid_argument);
}

TEST_CASE("problem 2 on the line") {
  const CoverageInstance line = line_instance();
  const RadiusSolution two = solve_problem2(line, 2, 1.0);
  CHECK(two.radius == 4.0);
  CHECK(two.min_quality == 0.25);
  CHECK(two.placement.size() == 2);
  CHECK(solve_problem2(line, 1, 1.0).radius == 8.0);
  CHECK(solve_problem2(line, 1, 0.0).radius == candidate_radii(line).front());
  CHECK(candidate_radii(line) == std::vector<double>{0.0, 4.0, 8.0});
  CHECK_THROWS_AS(solve_problem2(line, 0, 1.0), InfeasibleError);
  CHECK_THROWS_AS(solve_problem2(line, 1, 1.5), std::invalid_argument);
}

TEST_CASE("problem 2 radius is the smallest feasible one") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto raw = oracle::random_instance(rng, 20, 6, 0.6);
    const CoverageInstance inst = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::InverseDistance);
    const std::size_t k = 1 + trial % 3;
    const double rho = 0.5;
    RadiusSolution s;
    try {
      s = solve_problem2(inst, k, rho);
    } catch (const InfeasibleError&) {
      // Then even the largest radius must fail.
      const auto radii = candidate_radii(inst);
      CHECK(solve(build_feasibility_model(inst, k, radii.back(), rho)).status == SolveStatus::Infeasible);
      continue;
    }
    CHECK(s.proven);
    CHECK(count_within_radius(inst, s.placement, s.radius) >= required_count(inst.n(), rho));
    const auto radii = candidate_radii(inst);
    const auto it = std::find(radii.begin(), radii.end(), s.radius);
    REQUIRE(it != radii.end());
    if (it != radii.begin()) {
      OracleQuery q{ModelKind::FeasibilityCover};
      q.radius = *(it - 1);
      q.rho = rho;
      CHECK(brute_force_solve(inst, k, q).status == SolveStatus::Infeasible);
    }
  }
}

TEST_CASE("problem 3 driver") {
  std::mt19937_64 rng(6);
  auto raw = oracle::random_instance(rng, 30, 6, 0.4);
  const CoverageInstance lam = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::LambertInverseSquare);
  const CoverageInstance vis = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::Visibility);
  CHECK(solve_problem3(lam, 3, 1e9).report.objective == 0.0);
  CHECK(solve_problem3(lam, 3, 1e-12).report.objective == solve_problem1(vis, 3).report.objective);
  OracleQuery q{ModelKind::ThresholdCoverage};
  q.threshold = 0.05;
  CHECK(solve_problem3(lam, 2, 0.05).report.objective == brute_force_solve(lam, 2, q).primal);
  double prev = -1;
  for (std::size_t k = 0; k <= 6; ++k) {
    const double obj = solve_problem3(lam, k, 0.05).report.objective;
    CHECK(obj >= prev);
    prev = obj;
  }
}

TEST_CASE("two-phase pipeline") {
  Room room;
  SUBCASE("equal pitches change nothing for the worse") {
    TwoPhaseParams p;
    p.goal = {Problem::Visibility};
    p.k = 2;
    p.coarse_sample_pitch = p.fine_sample_pitch = 0.5;
    p.coarse_candidate_pitch = p.fine_candidate_pitch = 0.9;
    const PipelineReport r = two_phase(room.scene, p);
    CHECK(r.phase2.objective >= r.phase1.objective);
    CHECK(r.phase1.gap == 0.0);
    CHECK(r.phase1.positions.size() == 2);
  }
  SUBCASE("cumulative quality") {
    TwoPhaseParams p;
    p.goal = {Problem::CumulativeQuality, 0.12};
    p.k = 3;
    p.coarse_sample_pitch = 0.6;
    p.fine_sample_pitch = 0.4;
    p.coarse_candidate_pitch = 0.9;
    p.fine_candidate_pitch = 0.3;
    const PipelineReport r = two_phase(room.scene, p);
    CHECK(r.phase2.objective >= r.phase1.objective);
    CHECK(r.certified_factor <= r.phase1_factor + 1e-12);
  }
  SUBCASE("relaxed problem 2 with clustering") {
    TwoPhaseParams p;
    p.goal = {Problem::BestQuality};
    p.k = 3;
    p.relaxed = true;
    p.coarse_sample_pitch = p.fine_sample_pitch = 0.4;
    p.coarse_candidate_pitch = p.fine_candidate_pitch = 0.4;
    const PipelineReport r = two_phase(room.scene, p);
    CHECK(r.phase2.objective <= r.phase1.objective);
    CHECK(r.phase1_factor >= 1.0);
    CHECK(r.phase1_factor <= 2.0);
    CHECK(r.certified_factor <= r.phase1_factor);
  }
  SUBCASE("problem 2 with the radius search") {
    TwoPhaseParams p;
    p.goal = {Problem::BestQuality, 0.0, 0.6};
    p.k = 2;
    p.coarse_sample_pitch = 0.6;
    p.fine_sample_pitch = 0.5;
    p.coarse_candidate_pitch = 0.9;
    p.fine_candidate_pitch = 0.45;
    const PipelineReport r = two_phase(room.scene, p);
    CHECK(r.phase2.objective <= r.phase1.objective);
  }
  SUBCASE("coarse finer than fine is rejected") {
    TwoPhaseParams p;
    p.goal = {Problem::Visibility};
    p.k = 1;
    p.coarse_sample_pitch = 0.3;
    p.fine_sample_pitch = 0.5;
    p.coarse_candidate_pitch = p.fine_candidate_pitch = 0.9;
    CHECK_THROWS_AS(two_phase(room.scene, p), std::invalid_argument);
  }
}
