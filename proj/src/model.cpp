#include "spoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spoc/errors.hpp"

namespace spoc {

std::string to_string(QualityKind kind) {
  switch (kind) {
    case QualityKind::Visibility:
      return "visibility";
    case QualityKind::InverseDistance:
      return "inverse-distance";
    case QualityKind::LambertInverseSquare:
      return "lambert-inverse-square";
  }
  return "visibility";
}

QualityKind quality_kind_from_string(const std::string& s) {
  if (s == "visibility") return QualityKind::Visibility;
  if (s == "inverse-distance") return QualityKind::InverseDistance;
  if (s == "lambert-inverse-square") return QualityKind::LambertInverseSquare;
  throw ParseError("unknown quality kind '" + s + "'");
}

QualityKind quality_kind_for(Problem problem) {
  switch (problem) {
    case Problem::Visibility:
      return QualityKind::Visibility;
    case Problem::BestQuality:
      return QualityKind::InverseDistance;
    case Problem::CumulativeQuality:
      return QualityKind::LambertInverseSquare;
  }
  return QualityKind::Visibility;
}

double phi_inverse_distance(const Vec3& p, const Vec3& c) {
  const double d = distance(p, c);
  if (!(d > 0.0)) throw InconsistentInputError("quality undefined: sample and sensor coincide");
  return 1.0 / d;
}

double phi_lambert(const Vec3& p, const Vec3& n, const Vec3& c) {
  const Vec3 pc = c - p;
  const double d2 = squared_norm(pc);
  if (!(d2 > 0.0)) throw InconsistentInputError("quality undefined: sample and sensor coincide");
  const double cosine = dot(n, pc) / std::sqrt(d2);
  return std::max(0.0, cosine) / d2;
}

void Placement::validate(std::size_t m) const {
  std::vector<std::size_t> s = selected;
  std::sort(s.begin(), s.end());
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (s[t] >= m) {
      throw std::invalid_argument("placement index " + std::to_string(s[t]) +
                                  " out of range for " + std::to_string(m) + " candidates");
    }
    if (t > 0 && s[t] == s[t - 1]) {
      throw std::invalid_argument("placement selects candidate " + std::to_string(s[t]) + " twice");
    }
  }
}

Placement Placement::sorted() const {
  Placement p = *this;
  std::sort(p.selected.begin(), p.selected.end());
  return p;
}

CoverageInstance build_instance(SampleSet samples, CandidateSet candidates, VisibilityMatrix vis,
                                QualityKind kind) {
  if (!vis.matches(samples, candidates)) {
    throw InconsistentInputError(
        "visibility matrix does not match the sample/candidate sets (dimension or content hash)");
  }
  CoverageInstance inst;
  const std::size_t n = samples.size();
  const std::size_t m = candidates.size();
  inst.phi_.assign(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const SurfaceSample& s = samples[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (!vis.get(i, j)) continue;
      // Pure visibility is well defined for a sensor sitting on the sample;
      // the distance-based qualities are not.
      if (kind != QualityKind::Visibility && s.position == candidates[j]) {
        throw InconsistentInputError("sample " + std::to_string(i) +
                                     " coincides with visible candidate " + std::to_string(j));
      }
      double value = 1.0;
      if (kind == QualityKind::InverseDistance) {
        value = phi_inverse_distance(s.position, candidates[j]);
      } else if (kind == QualityKind::LambertInverseSquare) {
        value = phi_lambert(s.position, s.normal, candidates[j]);
      }
      inst.phi_[i * m + j] = value;
    }
  }
  inst.samples_ = std::move(samples);
  inst.candidates_ = std::move(candidates);
  inst.vis_ = std::move(vis);
  inst.kind_ = kind;
  return inst;
}

CoverageReport evaluate(const CoverageInstance& instance, const Placement& placement,
                        std::optional<double> threshold, ThresholdRule rule) {
  placement.validate(instance.m());
  const bool cumulative = instance.kind() == QualityKind::LambertInverseSquare;
  if (cumulative && !threshold) {
    throw std::invalid_argument("cumulative coverage needs a threshold");
  }
  // Fixed summation order makes the result independent of placement order.
  const Placement sorted = placement.sorted();

  CoverageReport report;
  report.n_samples = instance.n();
  report.per_sample_f.assign(instance.n(), 0.0);
  for (std::size_t i = 0; i < instance.n(); ++i) {
    double f = 0.0;
    for (std::size_t j : sorted.selected) {
      const double q = instance.phi(i, j);
      f = cumulative ? f + q : std::max(f, q);
    }
    report.per_sample_f[i] = f;
    bool covered = f > 0.0;
    if (threshold) covered = rule == ThresholdRule::Strict ? f > *threshold : f >= *threshold;
    if (covered) {
      report.covered_ids.push_back(i);
      report.covered_weight += instance.samples()[i].weight;
    }
  }
  if (instance.kind() == QualityKind::InverseDistance) {
    report.objective = report.per_sample_f.empty()
                           ? 0.0
                           : *std::min_element(report.per_sample_f.begin(), report.per_sample_f.end());
  } else {
    report.objective = static_cast<double>(report.covered_ids.size());
  }
  return report;
}

std::size_t count_within_radius(const CoverageInstance& instance, const Placement& placement,
                                double radius) {
  placement.validate(instance.m());
  std::size_t count = 0;
  for (std::size_t i = 0; i < instance.n(); ++i) {
    for (std::size_t j : placement.selected) {
      if (instance.visible(i, j) && instance.distance(i, j) <= radius) {
        ++count;
        break;
      }
    }
  }
  return count;
}

std::vector<double> nearest_visible_distance(const CoverageInstance& instance,
                                             const Placement& placement) {
  placement.validate(instance.m());
  std::vector<double> nearest(instance.n(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < instance.n(); ++i) {
    for (std::size_t j : placement.selected) {
      if (instance.visible(i, j)) nearest[i] = std::min(nearest[i], instance.distance(i, j));
    }
  }
  return nearest;
}

std::size_t required_count(std::size_t n, double rho) {
  const double demand = static_cast<double>(n) * rho;
  const double rounded = std::round(demand);
  // N * rho that is an integer up to rounding noise must not round up.
  if (std::fabs(demand - rounded) <= 1e-9 * std::max(1.0, demand)) {
    return static_cast<std::size_t>(rounded);
  }
  return static_cast<std::size_t>(std::ceil(demand));
}

double radius_at_ratio(const std::vector<double>& nearest, double rho) {
  const std::size_t need = required_count(nearest.size(), rho);
  if (need == 0) return 0.0;
  if (need > nearest.size()) return std::numeric_limits<double>::infinity();
  std::vector<double> sorted = nearest;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(need - 1), sorted.end());
  return sorted[need - 1];
}

}  // namespace spoc
