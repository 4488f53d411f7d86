#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spoc/ilp.hpp"
#include "spoc/mesh.hpp"
#include "spoc/model.hpp"
#include "spoc/refine.hpp"
#include "spoc/visibility.hpp"

namespace spoc {

struct CoverageSolution {
  Placement placement;
  CoverageReport report;
  SolveResult solve;
};

// Maximize the number (or area) of samples seen by at least one sensor.
// Requires a Visibility instance. k == 0 returns the empty placement.
CoverageSolution solve_problem1(const CoverageInstance& instance, std::size_t k,
                                const SolveLimits& limits = {}, Weighting weighting = Weighting::Uniform);

// Maximize the number (or area) of samples whose summed Lambert quality
// reaches `threshold`. Requires a LambertInverseSquare instance.
CoverageSolution solve_problem3(const CoverageInstance& instance, std::size_t k, double threshold,
                                const SolveLimits& limits = {}, Weighting weighting = Weighting::Uniform);

struct RadiusSolution {
  double radius{};
  double min_quality{};  // 1 / radius
  Placement placement;
  SolveResult solve;     // the feasibility solve that produced the placement
  std::size_t feasibility_solves{};
  bool proven = true;    // false if some probe hit a limit without a verdict
};

// Sorted distinct sample-candidate distances over visible pairs.
std::vector<double> candidate_radii(const CoverageInstance& instance);

// Smallest radius in candidate_radii() for which k sensors reach
// ceil(N * rho) samples (rho counts against all samples). Only visibility
// and distances are used, so a Visibility instance works as well as an
// InverseDistance one. Throws
// InfeasibleError when even the largest radius fails. A probe that stops on a
// limit counts as infeasible and clears `proven`.
RadiusSolution solve_problem2(const CoverageInstance& instance, std::size_t k, double rho,
                              const SolveLimits& limits = {});

// Handles to the scene shared by both phases of the pipeline.
struct SceneInput {
  const TriangleMesh* mesh = nullptr;
  const Bvh* bvh = nullptr;
  double downward_threshold = 0.0;
  CandidateRegion region;
  std::optional<double> eps;
  unsigned threads = 0;
};

// Samples, lattice candidates and visibility for one discretization.
CoverageInstance discretize(const SceneInput& scene, double sample_pitch, double candidate_pitch,
                            QualityKind kind);

struct TwoPhaseParams {
  CoverageGoal goal;
  std::size_t k{};
  double coarse_sample_pitch{};
  double coarse_candidate_pitch{};
  double fine_sample_pitch{};
  double fine_candidate_pitch{};
  std::size_t rounds = 1;
  // Problem 2 only: ignore occlusion, run farthest point clustering on the
  // fine samples and improve with plane-constrained 1-centers. Needs a plane
  // region.
  bool relaxed = false;
  SolveLimits limits;
};

struct PhaseReport {
  std::string method;
  // Problems 1/3: covered count (area if weighted) on the fine samples.
  // Problem 2: coverage radius on the fine samples (smaller is better).
  double objective{};
  double bound{};  // phase 1 solver bound on its own discretization, if any
  double gap{};
  double elapsed{};
  std::vector<Vec3> positions;
};

struct PipelineReport {
  Problem problem{Problem::Visibility};
  std::size_t k{};
  PhaseReport phase1;
  PhaseReport phase2;
  double phase1_factor{1.0};
  double certified_factor{1.0};
  std::size_t fine_samples{};
};

// Phase 1: the exact model on the coarse discretization (farthest point
// clustering for relaxed Problem 2). Phase 2: grid refinement on the fine
// lattice, or 1-center improvement for relaxed Problem 2. Both phases are
// scored on the fine samples. Throws std::invalid_argument when a coarse
// pitch is smaller than the matching fine pitch.
PipelineReport two_phase(const SceneInput& scene, const TwoPhaseParams& params);

}  // namespace spoc
