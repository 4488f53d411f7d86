#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spoc/ilp.hpp"

using namespace spoc;

namespace {

// c1 -> {o1, o2}, c2 -> {o2, o3, o4}, c3 -> {o1}.
CoverageInstance three_columns() {
  const std::vector<Vec3> samples{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  const std::vector<Vec3> cands{{0, 0, 1}, {2, 0, 1}, {-1, 0, 1}};
  const std::vector<std::vector<int>> table{{1, 0, 1}, {1, 1, 0}, {0, 1, 0}, {0, 1, 0}};
  return make_instance(samples, cands, QualityKind::Visibility, table);
}

// Samples at x = 0, 4, 8 and candidates at x = 0, 8, everything visible.
CoverageInstance line_instance() {
  return make_instance({{0, 0, 0}, {4, 0, 0}, {8, 0, 0}}, {{0, 0, 0}, {8, 0, 0}}, QualityKind::Visibility);
}

bool subset_of(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::all_of(a.begin(), a.end(), [&](std::size_t x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

}  // namespace

TEST_CASE("visibility model rows") {
  const CoverageInstance inst = three_columns();
  const IlpModel model = build_visibility_model(inst, 1);
  CHECK(model.rows.size() == 5);
  CHECK(model.n_y + model.n_z == 7);
  CHECK(model.cardinality_row().rhs == 1.0);
  CHECK(model.cardinality_row().terms.size() == 3);

  const CoverageInstance lonely =
      make_instance({{0, 0, 0}, {1, 0, 0}}, {{0, 0, 1}}, QualityKind::Visibility, {{1}, {0}});
  const IlpModel m2 = build_visibility_model(lonely, 1);
  CHECK(m2.rows[1].terms.size() == 1);  // y1 <= 0
  const SolveResult r = solve(m2);
  CHECK(r.primal == 1.0);
}

TEST_CASE("solver examples") {
  const CoverageInstance inst = three_columns();
  const SolveResult one = solve(build_visibility_model(inst, 1));
  CHECK(one.status == SolveStatus::Optimal);
  CHECK(one.primal == 3.0);
  REQUIRE(one.placement);
  CHECK(one.placement->selected == std::vector<std::size_t>{1});

  const SolveResult two = solve(build_visibility_model(inst, 2));
  CHECK(two.primal == 4.0);
  CHECK(two.placement->sorted().selected == std::vector<std::size_t>{0, 1});
  CHECK(two.gap == 0.0);
  CHECK(two.dual_bound == two.primal);

  const SolveResult all = solve(build_visibility_model(inst, 5));
  CHECK(all.primal == static_cast<double>(oracle::column_or_count(inst.vis())));
}

TEST_CASE("cumulative model") {
  // Sample 1 can never reach the threshold; sample 0 needs both sensors.
  const std::vector<Vec3> samples{{0, 0, 0}, {50, 0, 0}};
  const std::vector<Vec3> cands{{0, 0, 2}, {0, 0, 3}};
  const CoverageInstance lam = make_instance(samples, cands, QualityKind::LambertInverseSquare);
  const double phi = lam.phi(0, 0) + lam.phi(0, 1) * 0.5;
  CHECK(solve(build_cumulative_model(lam, 1, phi)).primal == 0.0);
  CHECK(solve(build_cumulative_model(lam, 2, phi)).primal == 1.0);

  // Equality with the threshold is enough.
  const CoverageInstance single = make_instance({{0, 0, 0}}, {{0, 0, 2}}, QualityKind::LambertInverseSquare);
  CHECK(solve(build_cumulative_model(single, 1, single.phi(0, 0))).primal == 1.0);

  CHECK_THROWS_AS(build_cumulative_model(single, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_cumulative_model(three_columns(), 1, 0.1), std::invalid_argument);
}

TEST_CASE("tiny threshold reduces to the visibility model") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto raw = oracle::random_instance(rng, 20, 7, 0.3);
    const CoverageInstance vis = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::Visibility);
    const CoverageInstance lam =
        build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::LambertInverseSquare);
    for (std::size_t k = 1; k <= 3; ++k) {
      CHECK(solve(build_cumulative_model(lam, k, 1e-12)).primal == solve(build_visibility_model(vis, k)).primal);
    }
  }
}

TEST_CASE("feasibility model on the line") {
  const CoverageInstance line = line_instance();
  CHECK(solve(build_feasibility_model(line, 1, 8.0, 1.0)).status == SolveStatus::Optimal);
  CHECK(solve(build_feasibility_model(line, 1, 7.9, 1.0)).status == SolveStatus::Infeasible);
  CHECK(solve(build_feasibility_model(line, 2, 4.0, 1.0)).status == SolveStatus::Optimal);
  CHECK_FALSE(solve(build_feasibility_model(line, 1, 7.9, 1.0)).placement);
  const IlpModel m = build_feasibility_model(line, 2, 4.0, 0.5);
  CHECK(m.rows.size() == 3 + 2);
  CHECK(m.ratio_rhs == 2);
  CHECK(m.rows.back().sense == Sense::GreaterEqual);
}

TEST_CASE("feasibility is monotone in the radius") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto raw = oracle::random_instance(rng, 15, 6, 0.5);
    const CoverageInstance inst = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::InverseDistance);
    bool seen_feasible = false;
    for (double r = 1.0; r <= 15.0; r += 0.5) {
      const bool ok = solve(build_feasibility_model(inst, 2, r, 0.6)).status == SolveStatus::Optimal;
      if (seen_feasible) CHECK(ok);
      seen_feasible = seen_feasible || ok;
    }
  }
}

TEST_CASE("exactness against enumeration") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 5 + rng() % 30;
    const std::size_t m = 3 + rng() % 8;
    const std::size_t k = rng() % 5;
    auto raw = oracle::random_instance(rng, n, m, 0.25);
    const CoverageInstance vis = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::Visibility);
    const CoverageInstance lam = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::LambertInverseSquare);
    const CoverageInstance inv = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::InverseDistance);
    CAPTURE(trial);

    const SolveResult a = solve(build_visibility_model(vis, k));
    const SolveResult b = brute_force_solve(vis, k, {ModelKind::MaxVisibilityCoverage});
    CHECK(a.primal == b.primal);
    CHECK(a.status == SolveStatus::Optimal);
    CHECK(evaluate(vis, *a.placement).objective == a.primal);

    const SolveResult aw = solve(build_visibility_model(vis, k, Weighting::Area));
    OracleQuery qw{ModelKind::MaxVisibilityCoverage};
    qw.weighting = Weighting::Area;
    CHECK(aw.primal == doctest::Approx(brute_force_solve(vis, k, qw).primal).epsilon(1e-12));

    const double phi = 0.02 + 0.1 * static_cast<double>(rng() % 5);
    const SolveResult c = solve(build_cumulative_model(lam, k, phi));
    OracleQuery q3{ModelKind::ThresholdCoverage};
    q3.threshold = phi;
    CHECK(c.primal == brute_force_solve(lam, k, q3).primal);
    CHECK(c.primal == oracle::subset_threshold(raw.samples, raw.candidates, raw.vis, c.placement->selected, phi));

    const double r = 3.0 + static_cast<double>(rng() % 8);
    OracleQuery qf{ModelKind::FeasibilityCover};
    qf.radius = r;
    qf.rho = 0.5;
    const SolveResult d = solve(build_feasibility_model(inv, k, r, 0.5));
    const SolveResult e = brute_force_solve(inv, k, qf);
    CHECK((d.status == SolveStatus::Infeasible) == (e.status == SolveStatus::Infeasible));
  }
}

TEST_CASE("node bounds never cut off a better completion") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 15; ++trial) {
    auto raw = oracle::random_instance(rng, 18, 7, 0.3);
    const CoverageInstance vis = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::Visibility);
    const std::size_t k = 3;
    std::vector<NodeInfo> seen;
    SolveLimits limits;
    limits.observer = [&](const NodeInfo& info) { seen.push_back(info); };
    const SolveResult res = solve(build_visibility_model(vis, k), limits);
    CHECK(res.status == SolveStatus::Optimal);
    for (const NodeInfo& info : seen) {
      // Best objective over every k-subset consistent with the node.
      double best = 0.0;
      std::vector<std::size_t> set;
      std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (set.size() == k || from == vis.m()) {
          if (subset_of(info.fixed_in, set)) best = std::max(best, oracle::subset_visibility(vis.vis(), set));
          return;
        }
        for (std::size_t j = from; j < vis.m(); ++j) {
          if (std::find(info.fixed_out.begin(), info.fixed_out.end(), j) != info.fixed_out.end()) continue;
          set.push_back(j);
          rec(j + 1);
          set.pop_back();
        }
        if (subset_of(info.fixed_in, set)) best = std::max(best, oracle::subset_visibility(vis.vis(), set));
      };
      rec(0);
      CHECK(info.bound >= best);
    }
  }
}

TEST_CASE("monotone in k and deterministic") {
  std::mt19937_64 rng(3);
  auto raw = oracle::random_instance(rng, 40, 10, 0.2);
  const CoverageInstance lam = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::LambertInverseSquare);
  double prev = -1.0;
  for (std::size_t k = 0; k <= 6; ++k) {
    const SolveResult r = solve(build_cumulative_model(lam, k, 0.08));
    CHECK(r.primal >= prev);
    prev = r.primal;
    const SolveResult again = solve(build_cumulative_model(lam, k, 0.08));
    CHECK(again.primal == r.primal);
    CHECK(again.nodes == r.nodes);
    CHECK(again.placement->selected == r.placement->selected);
  }
}

TEST_CASE("limits stop the search with a valid bound") {
  std::mt19937_64 rng(99);
  auto raw = oracle::random_instance(rng, 300, 40, 0.08);
  const CoverageInstance vis = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::Visibility);
  const SolveResult exact = solve(build_visibility_model(vis, 5));
  SolveLimits limits;
  limits.node_limit = 3;
  const SolveResult cut = solve(build_visibility_model(vis, 5), limits);
  CHECK(cut.primal <= exact.primal);
  CHECK(cut.dual_bound >= exact.primal);
  if (cut.status == SolveStatus::TimeLimit) CHECK(cut.gap > 0.0);
  CHECK(cut.placement);

  SolveLimits loose;
  loose.gap_tol = 0.5;
  const SolveResult rough = solve(build_visibility_model(vis, 5), loose);
  CHECK(rough.primal * 1.5 >= exact.primal);
}

TEST_CASE("brute force oracle") {
  const CoverageInstance inst = three_columns();
  const SolveResult b = brute_force_solve(inst, 1, {ModelKind::MaxVisibilityCoverage});
  CHECK(b.primal == solve(build_visibility_model(inst, 1)).primal);
  CHECK(brute_force_solve(inst, 0, {ModelKind::MaxVisibilityCoverage}).primal == 0.0);

  std::mt19937_64 rng(4);
  auto raw = oracle::random_instance(rng, 12, 6, 0.3);
  const CoverageInstance vis = build_instance(raw.samples, raw.candidates, raw.vis, QualityKind::Visibility);
  const double best = brute_force_solve(vis, 3, {ModelKind::MaxVisibilityCoverage}).primal;
  CHECK(best >= evaluate(vis, pick({0, 2, 4})).objective);
  CHECK(best >= evaluate(vis, pick({1, 3, 5})).objective);

  CHECK(binomial(6, 3) == 20);
  CHECK(binomial(60, 30) > kBruteForceCap);
  auto big = oracle::random_instance(rng, 3, 60, 0.3);
  const CoverageInstance wide = build_instance(big.samples, big.candidates, big.vis, QualityKind::Visibility);
  CHECK_THROWS_AS(brute_force_solve(wide, 10, {ModelKind::MaxVisibilityCoverage}), std::length_error);
}

TEST_CASE("LP export") {
  const CoverageInstance one = make_instance({{0, 0, 0}}, {{0, 0, 1}}, QualityKind::Visibility);
  std::ostringstream out;
  write_lp(out, build_visibility_model(one, 1));
  const std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Binary") != std::string::npos);
  CHECK(text.find("y0 - z0 <= 0") != std::string::npos);
  CHECK(text.find("z0 <= 1") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);

  std::ostringstream feas;
  write_lp(feas, build_feasibility_model(line_instance(), 1, 8.0, 1.0));
  CHECK(feas.str().find("y0 + y1 + y2 >= 3") != std::string::npos);

  const CoverageInstance lam = make_instance({{0, 0, 0}}, {{0, 0, 3}}, QualityKind::LambertInverseSquare);
  std::ostringstream cum;
  write_lp(cum, build_cumulative_model(lam, 1, 0.1));
  CHECK(cum.str().find("0.1 y0 - 0.111111111111 z0 <= 0") != std::string::npos);
}
