#pragma once

// Independent reference implementations used only by the tests. None of
// these call into the code they check.

#include <cstdint>
#include <random>
#include <vector>

#include "spoc/geometry.hpp"
#include "spoc/mesh.hpp"
#include "spoc/model.hpp"
#include "spoc/visibility.hpp"

namespace oracle {

using spoc::Vec3;

// Moller-Trumbore against every triangle, on the segment shrunk by eps at
// both ends. `margin` receives the smallest distance (in barycentric units)
// of any hit or near miss from an edge, so callers can skip grazing cases.
bool segment_blocked(const std::vector<spoc::Triangle>& tris, const Vec3& a, const Vec3& b, double eps,
                     double* margin = nullptr);

// Plane-constrained 1-center by shrinking grid search over the plane.
double min_sphere_radius_grid(const std::vector<Vec3>& points, double height);

// Plane-constrained 1-center by enumerating every support set of size <= 3.
double min_sphere_radius(const std::vector<Vec3>& points, double height);

// Best coverage radius with k centers chosen among the vertical projections
// of the samples onto z = height (exhaustive).
double discrete_k_center(const std::vector<Vec3>& samples, std::size_t k, double height);

// Samples on z = 0 (normal +z, ids in order), candidates above, random
// visibility bits with the given density.
struct RandomInstance {
  spoc::SampleSet samples;
  spoc::CandidateSet candidates;
  spoc::VisibilityMatrix vis;
};
RandomInstance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t m, double density);

// Samples seen by at least one candidate.
std::size_t column_or_count(const spoc::VisibilityMatrix& vis);

// Evaluates one subset directly from the raw data, without the model module.
double subset_visibility(const spoc::VisibilityMatrix& vis, const std::vector<std::size_t>& set);
double subset_threshold(const spoc::SampleSet& samples, const spoc::CandidateSet& candidates,
                        const spoc::VisibilityMatrix& vis, const std::vector<std::size_t>& set, double phi);

}  // namespace oracle
