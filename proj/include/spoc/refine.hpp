#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "spoc/geometry.hpp"
#include "spoc/mesh.hpp"
#include "spoc/model.hpp"
#include "spoc/visibility.hpp"

namespace spoc {

// Smallest sphere centered on the plane z = height that encloses a point set.
struct ConstrainedSphere {
  Vec3 center;
  double radius{};
  std::vector<std::size_t> support;  // indices into the input, at most 3
};

// Randomized incremental (Welzl-style) solver with a fixed shuffle seed, so
// results are reproducible. Boundary cases are closed form in the plane:
// one point projects vertically; two or three points use the linear
// equal-distance conditions |q - a_i|^2 + dz_i^2 = R^2.
ConstrainedSphere min_sphere_fixed_plane(const std::vector<Vec3>& points, double height);

struct QualityImprovement {
  std::vector<Vec3> centers;
  double initial_radius{};
  double radius{};
  std::size_t iterations{};
};

// Alternates nearest-center assignment (lowest index on ties) and replacing
// each center by the plane-constrained 1-center of its cluster, until the
// coverage radius stops dropping by more than 1e-9. Never returns a larger
// radius than it started with.
QualityImprovement improve_quality_max(const SampleSet& samples, std::vector<Vec3> centers,
                                       double height);

// Global factor after local improvement: phase-1 factor times r_new / r_old.
inline double certified_factor(double phase1_factor, double initial_radius, double improved_radius) {
  return initial_radius > 0.0 ? phase1_factor * (improved_radius / initial_radius) : phase1_factor;
}

// What refine_grid needs from the scene: occluders, the (fine) samples the
// objective is measured on, and the region sensors may move in.
struct RefineContext {
  const Bvh* bvh = nullptr;
  const SampleSet* samples = nullptr;
  CandidateRegion region;
  std::optional<double> eps;
};

struct GridRefineOptions {
  double fine_pitch{};
  std::size_t rounds = 1;
  double neighborhood{};  // half-width of the search window around a sensor
};

struct RefineResult {
  std::vector<Vec3> positions;
  double objective_before{};
  double objective_after{};
  std::size_t moves{};
  std::size_t rounds_run{};
};

// Objective used by refinement, larger is better: covered count (or area) for
// Visibility / CumulativeQuality (threshold compared inclusively), minus the
// coverage radius at ratio rho for BestQuality.
double placement_score(const RefineContext& context, const CoverageGoal& goal,
                       const std::vector<Vec3>& positions);

// Visits sensors in index order; each may jump to the fine-lattice point in
// its neighborhood that most improves the global objective (others fixed).
// A move happens only on strict improvement; stops after `rounds` passes or
// a pass without moves.
RefineResult refine_grid(const RefineContext& context, const CoverageGoal& goal,
                         std::vector<Vec3> start, const GridRefineOptions& options);

RefineResult refine_grid(const CoverageInstance& coarse, const Placement& placement,
                         const RefineContext& context, const CoverageGoal& goal,
                         GridRefineOptions options);

}  // namespace spoc
