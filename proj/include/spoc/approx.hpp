#pragma once

#include <cstddef>
#include <vector>

#include "spoc/geometry.hpp"
#include "spoc/mesh.hpp"

namespace spoc {

// Sensors restricted to the horizontal plane z = height. `clearance` is the
// smallest vertical distance from a sample to that plane.
struct PlaneDeployment {
  double height{};
  double clearance{};

  static PlaneDeployment for_samples(const SampleSet& samples, double height);
  Vec3 project(const Vec3& p) const { return {p.x, p.y, height}; }
};

// Gonzalez-style farthest point clustering with centers projected onto the
// deployment plane: seed with the projection of sample 0, then k - 1 times add
// the projection of the sample farthest from the current centers (lowest id on
// ties). Returns k positions, fewer only when the farthest sample already
// lies under a center (its clearance then bounds every placement from below).
CandidateSet farthest_point_clustering(const SampleSet& samples, std::size_t k,
                                       const PlaneDeployment& plane);

// max over samples of the distance to the nearest center.
double coverage_radius(const std::vector<Vec3>& centers, const SampleSet& samples);
double coverage_radius(const CandidateSet& centers, const SampleSet& samples);

// Radius guarantee of the clustering against an optimum radius r_opt at
// clearance h: sqrt(4 r_opt^2 - 3 h^2). Throws std::invalid_argument when
// r_opt < h beyond rounding noise.
double clustering_radius_bound(double r_opt, double clearance);

// Worst-case ratio of the clustering radius to the optimum, certified from
// the clustering's own radius r: r / max(h, sqrt((r^2 + 3 h^2) / 4)), in [1, 2].
double clustering_certified_factor(double fpc_radius, double clearance);

}  // namespace spoc
