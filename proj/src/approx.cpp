#include "spoc/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spoc {

PlaneDeployment PlaneDeployment::for_samples(const SampleSet& samples, double height) {
  double clearance = std::numeric_limits<double>::infinity();
  for (const auto& s : samples.samples) clearance = std::min(clearance, std::fabs(height - s.position.z));
  return {height, samples.samples.empty() ? 0.0 : clearance};
}

CandidateSet farthest_point_clustering(const SampleSet& samples, std::size_t k,
                                       const PlaneDeployment& plane) {
  if (k == 0) throw std::invalid_argument("clustering needs k >= 1");
  if (samples.size() == 0) throw std::invalid_argument("clustering needs at least one sample");

  std::vector<Vec3> centers;
  centers.reserve(k);
  centers.push_back(plane.project(samples[0].position));
  std::vector<double> nearest(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    nearest[i] = distance(samples[i].position, centers.back());
  }
  while (centers.size() < k) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (nearest[i] > nearest[far]) far = i;
    }
    // The farthest sample already sits under a center: its clearance is a
    // lower bound for any placement, so the current centers are optimal.
    const Vec3 next = plane.project(samples[far].position);
    if (std::find(centers.begin(), centers.end(), next) != centers.end()) break;
    centers.push_back(next);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      nearest[i] = std::min(nearest[i], distance(samples[i].position, centers.back()));
    }
  }
  CandidateSet set;
  set.positions = std::move(centers);
  set.region_kind = RegionKind::PlaneAtHeight;
  return set;
}

double coverage_radius(const std::vector<Vec3>& centers, const SampleSet& samples) {
  if (centers.empty()) throw std::invalid_argument("coverage radius needs at least one center");
  double radius = 0.0;
  for (const auto& s : samples.samples) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& c : centers) best = std::min(best, distance(s.position, c));
    radius = std::max(radius, best);
  }
  return radius;
}

double coverage_radius(const CandidateSet& centers, const SampleSet& samples) {
  return coverage_radius(centers.positions, samples);
}

double clustering_radius_bound(double r_opt, double clearance) {
  if (!(clearance >= 0.0)) throw std::invalid_argument("clearance must be non-negative");
  const double slack = 1e-12 * std::max(1.0, clearance);
  if (r_opt < clearance - slack) {
    throw std::invalid_argument("optimum radius below the clearance is inconsistent");
  }
  return std::sqrt(std::max(0.0, 4.0 * r_opt * r_opt - 3.0 * clearance * clearance));
}

double clustering_certified_factor(double fpc_radius, double clearance) {
  if (!(fpc_radius > 0.0)) return 1.0;
  // fpc^2 <= 4 r_opt^2 - 3 h^2 and r_opt >= h both bound r_opt from below.
  const double lower = std::max(
      clearance, std::sqrt((fpc_radius * fpc_radius + 3.0 * clearance * clearance) / 4.0));
  return std::max(1.0, fpc_radius / lower);
}

}  // namespace spoc
