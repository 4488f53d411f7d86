#include "spoc/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spoc {

namespace {

// A point reduced to the plane problem: horizontal position and squared
// vertical offset to the plane.
struct Lifted {
  double x, y, w;
};

struct PlaneBall {
  double x = 0.0, y = 0.0;
  double r2 = -1.0;  // empty
  std::vector<std::size_t> support;

  bool contains(const Lifted& p) const {
    const double dx = p.x - x;
    const double dy = p.y - y;
    return dx * dx + dy * dy + p.w <= r2 + 1e-12 * std::max(1.0, r2);
  }
};

PlaneBall ball_1(const std::vector<Lifted>& pts, std::size_t a) {
  return {pts[a].x, pts[a].y, pts[a].w, {a}};
}

PlaneBall ball_2(const std::vector<Lifted>& pts, std::size_t a, std::size_t b) {
  const Lifted& p = pts[a];
  const Lifted& q = pts[b];
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  const double d2 = dx * dx + dy * dy;
  const double scale = std::max({1.0, std::fabs(p.x), std::fabs(p.y), std::fabs(q.x), std::fabs(q.y)});
  if (d2 <= 1e-24 * scale * scale) {
    // Same vertical line: only the point farther from the plane can be on
    // the boundary.
    return p.w >= q.w ? ball_1(pts, a) : ball_1(pts, b);
  }
  const double t = (d2 + q.w - p.w) / (2.0 * d2);
  const double cx = p.x + t * dx;
  const double cy = p.y + t * dy;
  const double ex = cx - p.x;
  const double ey = cy - p.y;
  return {cx, cy, ex * ex + ey * ey + p.w, {a, b}};
}

PlaneBall ball_3(const std::vector<Lifted>& pts, std::size_t a, std::size_t b, std::size_t c) {
  const Lifted& p = pts[a];
  const double bx = pts[b].x - p.x, by = pts[b].y - p.y;
  const double cx = pts[c].x - p.x, cy = pts[c].y - p.y;
  // 2 (q - p) . (b - p) = |b - p|^2 + w_b - w_p, same for c.
  const double rb = bx * bx + by * by + pts[b].w - p.w;
  const double rc = cx * cx + cy * cy + pts[c].w - p.w;
  const double det = 2.0 * (bx * cy - by * cx);
  const double len = std::sqrt((bx * bx + by * by) * (cx * cx + cy * cy));
  if (std::fabs(det) > 1e-12 * len) {
    const double qx = (rb * cy - rc * by) / det;
    const double qy = (bx * rc - cx * rb) / det;
    return {p.x + qx, p.y + qy, qx * qx + qy * qy + p.w, {a, b, c}};
  }
  // Collinear footprints: the answer is one of the pairwise balls.
  PlaneBall best;
  PlaneBall largest;
  const std::size_t ids[3] = {a, b, c};
  for (int s = 0; s < 3; ++s) {
    const std::size_t u = ids[s];
    const std::size_t v = ids[(s + 1) % 3];
    const std::size_t third = ids[(s + 2) % 3];
    PlaneBall cand = ball_2(pts, u, v);
    if (cand.r2 > largest.r2) largest = cand;
    if (cand.contains(pts[third]) && (best.r2 < 0.0 || cand.r2 < best.r2)) best = cand;
  }
  return best.r2 >= 0.0 ? best : largest;
}

}  // namespace

ConstrainedSphere min_sphere_fixed_plane(const std::vector<Vec3>& points, double height) {
  if (points.empty()) throw std::invalid_argument("min sphere needs at least one point");
  std::vector<Lifted> pts(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dz = points[i].z - height;
    pts[i] = {points[i].x, points[i].y, dz * dz};
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(0x5be1c0deULL);
  std::shuffle(order.begin(), order.end(), rng);

  PlaneBall ball = ball_1(pts, order[0]);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (ball.contains(pts[order[i]])) continue;
    ball = ball_1(pts, order[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (ball.contains(pts[order[j]])) continue;
      ball = ball_2(pts, order[j], order[i]);
      for (std::size_t l = 0; l < j; ++l) {
        if (ball.contains(pts[order[l]])) continue;
        ball = ball_3(pts, order[l], order[j], order[i]);
      }
    }
  }
  ConstrainedSphere sphere;
  sphere.center = {ball.x, ball.y, height};
  sphere.radius = std::sqrt(std::max(0.0, ball.r2));
  sphere.support = ball.support;
  std::sort(sphere.support.begin(), sphere.support.end());
  return sphere;
}

namespace {

double max_nearest_distance(const SampleSet& samples, const std::vector<Vec3>& centers,
                            std::vector<std::size_t>* assignment) {
  double radius = 0.0;
  if (assignment) assignment->assign(samples.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t owner = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = distance(samples[i].position, centers[c]);
      if (d < best) {
        best = d;
        owner = c;
      }
    }
    if (assignment) (*assignment)[i] = owner;
    radius = std::max(radius, best);
  }
  return radius;
}

}  // namespace

QualityImprovement improve_quality_max(const SampleSet& samples, std::vector<Vec3> centers,
                                       double height) {
  if (centers.empty()) throw std::invalid_argument("need at least one sensor");
  QualityImprovement out;
  std::vector<std::size_t> assignment;
  double radius = max_nearest_distance(samples, centers, &assignment);
  out.initial_radius = radius;
  while (true) {
    std::vector<std::vector<Vec3>> clusters(centers.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      clusters[assignment[i]].push_back(samples[i].position);
    }
    std::vector<Vec3> next = centers;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      // A sensor nobody is assigned to stays where it is.
      if (!clusters[c].empty()) next[c] = min_sphere_fixed_plane(clusters[c], height).center;
    }
    std::vector<std::size_t> next_assignment;
    const double next_radius = max_nearest_distance(samples, next, &next_assignment);
    ++out.iterations;
    if (!(next_radius <= radius)) break;
    const bool progressed = next_radius < radius - 1e-9;
    centers = std::move(next);
    assignment = std::move(next_assignment);
    radius = next_radius;
    if (!progressed) break;
  }
  out.centers = std::move(centers);
  out.radius = radius;
  return out;
}

namespace {

// Per-sensor contribution to each sample: 1/0 visibility, Lambert quality,
// or distance (infinite when occluded), depending on the problem.
std::vector<double> sensor_column(const RefineContext& ctx, Problem problem, const Vec3& sensor) {
  const SampleSet& samples = *ctx.samples;
  std::vector<double> col(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SurfaceSample& s = samples[i];
    const bool visible = s.position != sensor && !segment_occluded(*ctx.bvh, s.position, sensor, ctx.eps);
    switch (problem) {
      case Problem::Visibility:
        col[i] = visible ? 1.0 : 0.0;
        break;
      case Problem::CumulativeQuality:
        col[i] = visible ? phi_lambert(s.position, s.normal, sensor) : 0.0;
        break;
      case Problem::BestQuality:
        col[i] = visible ? distance(s.position, sensor) : std::numeric_limits<double>::infinity();
        break;
    }
  }
  return col;
}

double empty_value(Problem problem) {
  return problem == Problem::BestQuality ? std::numeric_limits<double>::infinity() : 0.0;
}

double combine(Problem problem, double acc, double v) {
  switch (problem) {
    case Problem::Visibility:
      return std::max(acc, v);
    case Problem::CumulativeQuality:
      return acc + v;
    case Problem::BestQuality:
      return std::min(acc, v);
  }
  return acc;
}

double score_from_aggregate(const SampleSet& samples, const CoverageGoal& goal,
                            const std::vector<double>& f) {
  if (goal.problem == Problem::BestQuality) return -radius_at_ratio(f, goal.rho);
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const bool covered = goal.problem == Problem::Visibility ? f[i] > 0.0 : f[i] >= goal.threshold;
    if (covered) total += goal.weighted ? samples[i].weight : 1.0;
  }
  return total;
}

std::vector<double> aggregate(const CoverageGoal& goal, const std::vector<std::vector<double>>& cols,
                              std::size_t n, std::size_t skip) {
  std::vector<double> f(n, empty_value(goal.problem));
  for (std::size_t s = 0; s < cols.size(); ++s) {
    if (s == skip) continue;
    for (std::size_t i = 0; i < n; ++i) f[i] = combine(goal.problem, f[i], cols[s][i]);
  }
  return f;
}

void check_context(const RefineContext& ctx) {
  if (!ctx.bvh || !ctx.samples) throw std::invalid_argument("refine context needs a BVH and samples");
}

}  // namespace

double placement_score(const RefineContext& context, const CoverageGoal& goal,
                       const std::vector<Vec3>& positions) {
  check_context(context);
  std::vector<std::vector<double>> cols;
  cols.reserve(positions.size());
  for (const Vec3& p : positions) cols.push_back(sensor_column(context, goal.problem, p));
  const auto f = aggregate(goal, cols, context.samples->size(), cols.size());
  return score_from_aggregate(*context.samples, goal, f);
}

RefineResult refine_grid(const RefineContext& context, const CoverageGoal& goal,
                         std::vector<Vec3> start, const GridRefineOptions& options) {
  check_context(context);
  if (!(options.fine_pitch > 0.0)) throw std::invalid_argument("fine pitch must be positive");
  const SampleSet& samples = *context.samples;
  const std::size_t n = samples.size();
  const double reach = options.neighborhood > 0.0 ? options.neighborhood : 2.0 * options.fine_pitch;

  RefineResult out;
  out.positions = std::move(start);
  std::vector<std::vector<double>> cols;
  for (const Vec3& p : out.positions) cols.push_back(sensor_column(context, goal.problem, p));
  double current = score_from_aggregate(samples, goal, aggregate(goal, cols, n, cols.size()));
  out.objective_before = current;

  for (std::size_t round = 0; round < options.rounds; ++round) {
    bool moved = false;
    for (std::size_t s = 0; s < out.positions.size(); ++s) {
      const std::vector<double> others = aggregate(goal, cols, n, s);
      const Vec3 c = out.positions[s];
      Aabb window;
      window.extend(c - Vec3{reach, reach, reach});
      window.extend(c + Vec3{reach, reach, reach});

      double best = current;
      std::optional<std::pair<Vec3, std::vector<double>>> choice;
      std::vector<double> f(n);
      for (const Vec3& p : lattice_points_in(context.region, options.fine_pitch, window)) {
        if (std::find(out.positions.begin(), out.positions.end(), p) != out.positions.end()) continue;
        std::vector<double> col = sensor_column(context, goal.problem, p);
        for (std::size_t i = 0; i < n; ++i) f[i] = combine(goal.problem, others[i], col[i]);
        const double score = score_from_aggregate(samples, goal, f);
        if (score > best) {
          best = score;
          choice.emplace(p, std::move(col));
        }
      }
      if (!choice) continue;
      // Confirm with the slot-ordered evaluation before committing.
      std::vector<std::vector<double>> trial = cols;
      trial[s] = choice->second;
      const double confirmed = score_from_aggregate(samples, goal, aggregate(goal, trial, n, trial.size()));
      if (confirmed > current) {
        out.positions[s] = choice->first;
        cols = std::move(trial);
        current = confirmed;
        ++out.moves;
        moved = true;
      }
    }
    ++out.rounds_run;
    if (!moved) break;
  }
  out.objective_after = current;
  return out;
}

RefineResult refine_grid(const CoverageInstance& coarse, const Placement& placement,
                         const RefineContext& context, const CoverageGoal& goal,
                         GridRefineOptions options) {
  placement.validate(coarse.m());
  std::vector<Vec3> start;
  for (std::size_t j : placement.selected) start.push_back(coarse.candidates()[j]);
  if (!(options.neighborhood > 0.0) && coarse.candidates().pitch > 0.0) {
    options.neighborhood = coarse.candidates().pitch;
  }
  return refine_grid(context, goal, std::move(start), options);
}

}  // namespace spoc
