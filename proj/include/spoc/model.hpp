#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spoc/geometry.hpp"
#include "spoc/mesh.hpp"
#include "spoc/visibility.hpp"

namespace spoc {

enum class QualityKind { Visibility, InverseDistance, LambertInverseSquare };

std::string to_string(QualityKind kind);
QualityKind quality_kind_from_string(const std::string& s);

// 1 / |p - c| in 1/m. Throws InconsistentInputError when p == c.
double phi_inverse_distance(const Vec3& p, const Vec3& c);

// max(0, <n, (c - p)/|c - p|>) / |c - p|^2 in 1/m^2. Sensors behind the
// surface tangent plane contribute nothing. Throws when p == c.
double phi_lambert(const Vec3& p, const Vec3& n, const Vec3& c);

// k distinct candidate indices.
struct Placement {
  std::vector<std::size_t> selected;

  std::size_t size() const { return selected.size(); }
  bool empty() const { return selected.empty(); }
  // Throws std::invalid_argument on an index >= m or a duplicate.
  void validate(std::size_t m) const;
  Placement sorted() const;
};

// Samples, candidates, visibility and the dense quality matrix phi, with
// phi(i, j) == 0 wherever the pair is not visible.
class CoverageInstance {
 public:
  const SampleSet& samples() const { return samples_; }
  const CandidateSet& candidates() const { return candidates_; }
  const VisibilityMatrix& vis() const { return vis_; }
  QualityKind kind() const { return kind_; }
  std::size_t n() const { return samples_.size(); }
  std::size_t m() const { return candidates_.size(); }

  double phi(std::size_t i, std::size_t j) const { return phi_[i * m() + j]; }
  bool visible(std::size_t i, std::size_t j) const { return vis_.get(i, j); }
  double distance(std::size_t i, std::size_t j) const {
    return spoc::distance(samples_[i].position, candidates_[j]);
  }

  friend CoverageInstance build_instance(SampleSet samples, CandidateSet candidates,
                                         VisibilityMatrix vis, QualityKind kind);

 private:
  SampleSet samples_;
  CandidateSet candidates_;
  VisibilityMatrix vis_;
  std::vector<double> phi_;
  QualityKind kind_{QualityKind::Visibility};
};

// Computes phi per kind and masks it with visibility. Visibility kind stores
// the 0/1 bits. Throws InconsistentInputError if `vis` was not built from
// these samples and candidates, or (for the distance-based kinds) if a sample
// coincides with a visible candidate.
CoverageInstance build_instance(SampleSet samples, CandidateSet candidates, VisibilityMatrix vis,
                                QualityKind kind);

// How a cumulative threshold is compared: Strict counts f > threshold,
// Inclusive counts f >= threshold (the form the integer model uses).
enum class ThresholdRule { Strict, Inclusive };

struct CoverageReport {
  std::vector<std::size_t> covered_ids;  // sorted
  double objective{};
  std::vector<double> per_sample_f;
  double covered_weight{};  // sum of covered sample areas
  std::size_t n_samples{};

  double coverage_ratio() const {
    return n_samples == 0 ? 0.0 : static_cast<double>(covered_ids.size()) / static_cast<double>(n_samples);
  }
};

// Per-sample f is the best single sensor (Visibility, InverseDistance) or the
// sum over sensors (LambertInverseSquare). Objective: covered count for
// Visibility / LambertInverseSquare, min_i f_i for InverseDistance.
// LambertInverseSquare requires a threshold.
CoverageReport evaluate(const CoverageInstance& instance, const Placement& placement,
                        std::optional<double> threshold = std::nullopt,
                        ThresholdRule rule = ThresholdRule::Strict);

// Number of samples with a visible selected sensor within distance r.
std::size_t count_within_radius(const CoverageInstance& instance, const Placement& placement,
                                double radius);

// Distance from each sample to its nearest visible selected sensor
// (+infinity when no selected sensor sees it).
std::vector<double> nearest_visible_distance(const CoverageInstance& instance,
                                             const Placement& placement);

// Smallest r such that at least ceil(N * rho) samples have a visible selected
// sensor within r; +infinity when unreachable, 0 when rho demands nothing.
double radius_at_ratio(const std::vector<double>& nearest, double rho);

// ceil(N * rho) with a guard against floating noise in N * rho.
std::size_t required_count(std::size_t n, double rho);

// The three coverage problems: maximize visible support, maximize the worst
// best-sensor quality (equivalently minimize the coverage radius), maximize
// the area whose cumulative quality reaches a threshold.
enum class Problem { Visibility = 1, BestQuality = 2, CumulativeQuality = 3 };

QualityKind quality_kind_for(Problem problem);

struct CoverageGoal {
  Problem problem{Problem::Visibility};
  double threshold{};  // CumulativeQuality, 1/m^2
  double rho{1.0};     // BestQuality: fraction of all samples that must be covered
  bool weighted = false;  // count sample area instead of samples (Visibility, CumulativeQuality)
};

}  // namespace spoc
