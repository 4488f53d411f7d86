#include "spoc/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include "spoc/approx.hpp"
#include "spoc/errors.hpp"

namespace spoc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Placement placement_of(const SolveResult& result) {
  return result.placement ? *result.placement : Placement{};
}

}  // namespace

CoverageSolution solve_problem1(const CoverageInstance& instance, std::size_t k,
                                const SolveLimits& limits, Weighting weighting) {
  if (instance.kind() != QualityKind::Visibility) {
    throw std::invalid_argument("problem 1 needs a visibility instance");
  }
  CoverageSolution out;
  out.solve = solve(build_visibility_model(instance, k, weighting), limits);
  out.placement = placement_of(out.solve);
  out.report = evaluate(instance, out.placement);
  return out;
}

CoverageSolution solve_problem3(const CoverageInstance& instance, std::size_t k, double threshold,
                                const SolveLimits& limits, Weighting weighting) {
  CoverageSolution out;
  out.solve = solve(build_cumulative_model(instance, k, threshold, weighting), limits);
  out.placement = placement_of(out.solve);
  out.report = evaluate(instance, out.placement, threshold, ThresholdRule::Inclusive);
  return out;
}

std::vector<double> candidate_radii(const CoverageInstance& instance) {
  std::vector<double> radii;
  for (std::size_t i = 0; i < instance.n(); ++i) {
    for (std::size_t j = 0; j < instance.m(); ++j) {
      if (instance.visible(i, j)) radii.push_back(instance.distance(i, j));
    }
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  return radii;
}

RadiusSolution solve_problem2(const CoverageInstance& instance, std::size_t k, double rho,
                              const SolveLimits& limits) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (instance.kind() == QualityKind::LambertInverseSquare) {
    throw std::invalid_argument("problem 2 needs an inverse-distance or visibility instance");
  }
  const std::vector<double> radii = candidate_radii(instance);
  RadiusSolution out;
  if (radii.empty()) {
    if (required_count(instance.n(), rho) > 0) {
      throw InfeasibleError("no sample is visible from any candidate");
    }
    out.min_quality = std::numeric_limits<double>::infinity();
    return out;
  }

  // Returns the solve if the model at radii[idx] is feasible.
  auto probe = [&](std::size_t idx) -> std::optional<SolveResult> {
    ++out.feasibility_solves;
    SolveResult r = solve(build_feasibility_model(instance, k, radii[idx], rho), limits);
    if (r.status == SolveStatus::TimeLimit) out.proven = false;
    if (r.status == SolveStatus::Optimal || r.status == SolveStatus::Feasible) return r;
    return std::nullopt;
  };

  std::size_t hi = radii.size() - 1;
  std::optional<SolveResult> witness = probe(hi);
  if (!witness) {
    throw InfeasibleError("coverage ratio " + std::to_string(rho) + " is out of reach for " +
                          std::to_string(k) + " sensors at any radius");
  }
  std::size_t lo = 0;  // invariant: radii[hi] feasible, everything below lo infeasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (auto r = probe(mid)) {
      hi = mid;
      witness = std::move(r);
    } else {
      lo = mid + 1;
    }
  }
  out.radius = radii[hi];
  out.min_quality = 1.0 / out.radius;
  out.solve = *witness;
  out.placement = placement_of(out.solve);
  return out;
}

CoverageInstance discretize(const SceneInput& scene, double sample_pitch, double candidate_pitch,
                            QualityKind kind) {
  if (!scene.mesh || !scene.bvh) throw std::invalid_argument("scene input needs a mesh and a BVH");
  SampleSet samples = sample_surface(*scene.mesh, sample_pitch, scene.downward_threshold);
  CandidateSet candidates = generate_candidates(scene.region, candidate_pitch);
  VisibilityMatrix vis = visibility_matrix(*scene.bvh, samples, candidates, scene.eps, scene.threads);
  return build_instance(std::move(samples), std::move(candidates), std::move(vis), kind);
}

namespace {

double fine_objective(const RefineContext& ctx, const CoverageGoal& goal, const std::vector<Vec3>& pos) {
  const double score = placement_score(ctx, goal, pos);
  return goal.problem == Problem::BestQuality ? -score : score;
}

PipelineReport relaxed_two_phase(const SceneInput& scene, const TwoPhaseParams& params,
                                 const SampleSet& fine) {
  const auto* plane_region = std::get_if<PlaneRegion>(&scene.region);
  if (!plane_region) throw std::invalid_argument("relaxed problem 2 needs a plane candidate region");
  PipelineReport out;
  out.problem = Problem::BestQuality;
  out.k = params.k;
  out.fine_samples = fine.size();

  auto t0 = Clock::now();
  const PlaneDeployment plane = PlaneDeployment::for_samples(fine, plane_region->z);
  const CandidateSet centers = farthest_point_clustering(fine, params.k, plane);
  out.phase1.method = "farthest-point-clustering";
  out.phase1.positions = centers.positions;
  out.phase1.objective = coverage_radius(centers, fine);
  out.phase1.elapsed = seconds_since(t0);
  out.phase1_factor = clustering_certified_factor(out.phase1.objective, plane.clearance);

  t0 = Clock::now();
  QualityImprovement improved = improve_quality_max(fine, centers.positions, plane.height);
  out.phase2.method = "one-center";
  out.phase2.positions = std::move(improved.centers);
  out.phase2.objective = improved.radius;
  out.phase2.elapsed = seconds_since(t0);
  out.certified_factor = certified_factor(out.phase1_factor, out.phase1.objective, out.phase2.objective);
  return out;
}

}  // namespace

PipelineReport two_phase(const SceneInput& scene, const TwoPhaseParams& params) {
  if (!scene.mesh || !scene.bvh) throw std::invalid_argument("scene input needs a mesh and a BVH");
  if (params.coarse_sample_pitch < params.fine_sample_pitch ||
      params.coarse_candidate_pitch < params.fine_candidate_pitch) {
    throw std::invalid_argument("coarse pitch must not be smaller than fine pitch");
  }
  const CoverageGoal& goal = params.goal;
  const SampleSet fine = sample_surface(*scene.mesh, params.fine_sample_pitch, scene.downward_threshold);
  if (params.relaxed) {
    if (goal.problem != Problem::BestQuality) {
      throw std::invalid_argument("the relaxed pipeline only applies to problem 2");
    }
    return relaxed_two_phase(scene, params, fine);
  }

  PipelineReport out;
  out.problem = goal.problem;
  out.k = params.k;
  out.fine_samples = fine.size();
  const RefineContext ctx{scene.bvh, &fine, scene.region, scene.eps};

  auto t0 = Clock::now();
  const CoverageInstance coarse = discretize(scene, params.coarse_sample_pitch,
                                             params.coarse_candidate_pitch, quality_kind_for(goal.problem));
  const Weighting weighting = goal.weighted ? Weighting::Area : Weighting::Uniform;
  SolveResult phase1;
  switch (goal.problem) {
    case Problem::Visibility:
      phase1 = solve_problem1(coarse, params.k, params.limits, weighting).solve;
      out.phase1.method = "ilp";
      break;
    case Problem::CumulativeQuality:
      phase1 = solve_problem3(coarse, params.k, goal.threshold, params.limits, weighting).solve;
      out.phase1.method = "ilp";
      break;
    case Problem::BestQuality:
      phase1 = solve_problem2(coarse, params.k, goal.rho, params.limits).solve;
      out.phase1.method = "ilp-radius-search";
      break;
  }
  for (std::size_t j : placement_of(phase1).selected) out.phase1.positions.push_back(coarse.candidates()[j]);
  out.phase1.bound = phase1.dual_bound;
  out.phase1.gap = goal.problem == Problem::BestQuality ? 0.0 : phase1.gap;
  out.phase1.elapsed = seconds_since(t0);
  out.phase1.objective = fine_objective(ctx, goal, out.phase1.positions);
  out.phase1_factor = 1.0 + out.phase1.gap;

  t0 = Clock::now();
  GridRefineOptions options;
  options.fine_pitch = params.fine_candidate_pitch;
  options.rounds = params.rounds;
  options.neighborhood = params.coarse_candidate_pitch;
  RefineResult refined = refine_grid(ctx, goal, out.phase1.positions, options);
  out.phase2.method = "grid";
  out.phase2.positions = std::move(refined.positions);
  out.phase2.objective = goal.problem == Problem::BestQuality ? -refined.objective_after : refined.objective_after;
  out.phase2.elapsed = seconds_since(t0);

  const double a = out.phase1.objective;
  const double b = out.phase2.objective;
  double ratio = 1.0;
  if (goal.problem == Problem::BestQuality) {
    if (std::isfinite(a) && a > 0.0) ratio = b / a;
  } else if (b > 0.0) {
    ratio = a / b;
  }
  out.certified_factor = out.phase1_factor * ratio;
  return out;
}

}  // namespace spoc
