#include "spoc/ilp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "spoc/errors.hpp"

namespace spoc {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MaxVisibilityCoverage:
      return "MaxVisibilityCoverage";
    case ModelKind::ThresholdCoverage:
      return "ThresholdCoverage";
    case ModelKind::FeasibilityCover:
      return "FeasibilityCover";
  }
  return "MaxVisibilityCoverage";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Feasible:
      return "Feasible";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::TimeLimit:
      return "TimeLimit";
  }
  return "Infeasible";
}

double relative_gap(double dual, double primal) {
  return std::max(0.0, dual - primal) / std::max(1.0, std::fabs(primal));
}

namespace {

VarRef y_var(std::size_t i) { return {VarRef::Kind::Y, static_cast<std::uint32_t>(i)}; }
VarRef z_var(std::size_t j) { return {VarRef::Kind::Z, static_cast<std::uint32_t>(j)}; }

std::vector<double> objective_weights(const CoverageInstance& instance, Weighting weighting) {
  std::vector<double> w(instance.n(), 1.0);
  if (weighting == Weighting::Area) {
    for (std::size_t i = 0; i < instance.n(); ++i) w[i] = instance.samples()[i].weight;
  }
  return w;
}

LinearRow cardinality_row(std::size_t m, std::size_t k) {
  LinearRow row{"card", {}, Sense::LessEqual, static_cast<double>(k)};
  row.terms.reserve(m);
  for (std::size_t j = 0; j < m; ++j) row.terms.push_back({z_var(j), 1.0});
  return row;
}

}  // namespace

IlpModel build_visibility_model(const CoverageInstance& instance, std::size_t k,
                                Weighting weighting) {
  IlpModel model;
  model.kind = ModelKind::MaxVisibilityCoverage;
  model.n_y = instance.n();
  model.n_z = instance.m();
  model.k = k;
  model.rows.reserve(instance.n() + 1);
  for (std::size_t i = 0; i < instance.n(); ++i) {
    LinearRow row{"cov" + std::to_string(i), {{y_var(i), 1.0}}, Sense::LessEqual, 0.0};
    for (std::size_t j = 0; j < instance.m(); ++j) {
      if (instance.visible(i, j)) row.terms.push_back({z_var(j), -1.0});
    }
    model.rows.push_back(std::move(row));
  }
  model.rows.push_back(cardinality_row(instance.m(), k));
  model.objective = objective_weights(instance, weighting);
  return model;
}

IlpModel build_cumulative_model(const CoverageInstance& instance, std::size_t k, double threshold,
                                Weighting weighting) {
  if (instance.kind() != QualityKind::LambertInverseSquare) {
    throw std::invalid_argument("cumulative model needs a lambert-inverse-square instance");
  }
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  IlpModel model;
  model.kind = ModelKind::ThresholdCoverage;
  model.n_y = instance.n();
  model.n_z = instance.m();
  model.k = k;
  model.threshold = threshold;
  model.rows.reserve(instance.n() + 1);
  for (std::size_t i = 0; i < instance.n(); ++i) {
    LinearRow row{"cov" + std::to_string(i), {{y_var(i), threshold}}, Sense::LessEqual, 0.0};
    for (std::size_t j = 0; j < instance.m(); ++j) {
      const double q = instance.phi(i, j);
      if (q > 0.0) row.terms.push_back({z_var(j), -q});
    }
    model.rows.push_back(std::move(row));
  }
  model.rows.push_back(cardinality_row(instance.m(), k));
  model.objective = objective_weights(instance, weighting);
  return model;
}

IlpModel build_feasibility_model(const CoverageInstance& instance, std::size_t k, double radius,
                                 double rho) {
  if (!(radius >= 0.0)) throw std::invalid_argument("radius must be non-negative");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("ratio must lie in [0, 1]");
  IlpModel model;
  model.kind = ModelKind::FeasibilityCover;
  model.n_y = instance.n();
  model.n_z = instance.m();
  model.k = k;
  model.radius = radius;
  model.rho = rho;
  model.ratio_rhs = required_count(instance.n(), rho);
  model.rows.reserve(instance.n() + 2);
  for (std::size_t i = 0; i < instance.n(); ++i) {
    LinearRow row{"cov" + std::to_string(i), {{y_var(i), 1.0}}, Sense::LessEqual, 0.0};
    for (std::size_t j = 0; j < instance.m(); ++j) {
      if (instance.visible(i, j) && instance.distance(i, j) <= radius) {
        row.terms.push_back({z_var(j), -1.0});
      }
    }
    model.rows.push_back(std::move(row));
  }
  model.rows.push_back(cardinality_row(instance.m(), k));
  LinearRow ratio{"ratio", {}, Sense::GreaterEqual, static_cast<double>(model.ratio_rhs)};
  for (std::size_t i = 0; i < instance.n(); ++i) ratio.terms.push_back({y_var(i), 1.0});
  model.rows.push_back(std::move(ratio));
  return model;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step.
    const std::uint64_t factor = n - k + i;
    if (result > std::numeric_limits<std::uint64_t>::max() / factor) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * factor / i;
  }
  return result;
}

namespace {

struct Entry {
  std::uint32_t i;
  double a;
};

// The covering structure every model kind shares: sample i is covered once
// the selected columns' entries reach need_i.
struct CoverStructure {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::vector<double> need;
  std::vector<double> weight;
  std::vector<std::vector<Entry>> cols;
  bool feasibility = false;
  double target = 0.0;
  bool integral = true;
  double total_weight = 0.0;
};

CoverStructure extract_structure(const IlpModel& model) {
  const std::size_t expected_rows = model.n_y + (model.kind == ModelKind::FeasibilityCover ? 2 : 1);
  if (model.rows.size() != expected_rows) {
    throw std::invalid_argument("model has " + std::to_string(model.rows.size()) +
                                " rows, expected " + std::to_string(expected_rows));
  }
  CoverStructure s;
  s.n = model.n_y;
  s.m = model.n_z;
  s.k = model.k;
  s.need.assign(s.n, 0.0);
  s.cols.assign(s.m, {});
  for (std::size_t i = 0; i < s.n; ++i) {
    const LinearRow& row = model.rows[i];
    if (row.sense != Sense::LessEqual || row.rhs != 0.0) {
      throw std::invalid_argument("coverage row " + row.name + " must read '... <= 0'");
    }
    for (const Term& t : row.terms) {
      if (t.var.kind == VarRef::Kind::Y) {
        if (t.var.index != i || !(t.coef > 0.0)) {
          throw std::invalid_argument("coverage row " + row.name + " has a malformed y term");
        }
        s.need[i] = t.coef;
      } else {
        if (t.var.index >= s.m || !(t.coef < 0.0)) {
          throw std::invalid_argument("coverage row " + row.name + " has a malformed z term");
        }
        s.cols[t.var.index].push_back({static_cast<std::uint32_t>(i), -t.coef});
      }
    }
    if (!(s.need[i] > 0.0)) {
      throw std::invalid_argument("coverage row " + row.name + " lacks its y variable");
    }
  }
  const LinearRow& card = model.rows[s.n];
  if (card.sense != Sense::LessEqual || card.terms.size() != s.m ||
      card.rhs != static_cast<double>(model.k)) {
    throw std::invalid_argument("malformed cardinality row");
  }
  if (model.kind == ModelKind::FeasibilityCover) {
    s.feasibility = true;
    s.target = model.rows[s.n + 1].rhs;
    s.weight.assign(s.n, 1.0);
  } else {
    if (model.objective.size() != s.n) throw std::invalid_argument("objective size mismatch");
    s.weight = model.objective;
  }
  for (double w : s.weight) {
    if (w < 0.0) throw std::invalid_argument("negative objective weight");
    s.integral = s.integral && w == std::floor(w);
    s.total_weight += w;
  }
  return s;
}

using Clock = std::chrono::steady_clock;

class BranchAndBound {
 public:
  BranchAndBound(const CoverStructure& s, const SolveLimits& limits)
      : s_(s),
        limits_(limits),
        start_(Clock::now()),
        sum_(s.n, 0.0),
        covered_(s.n, 0),
        state_(s.m, 0),
        scratch_sum_(s.n, 0.0),
        stamp_(s.n, 0) {}

  SolveResult run() {
    incumbent_value_ = exact_value({});
    path_bounds_.push_back(s_.total_weight);
    greedy_start();
    if (!done()) node(0);

    SolveResult result;
    result.nodes = nodes_;
    result.primal = incumbent_value_;
    double dual = std::max(incumbent_value_, max_pruned_);
    if (aborted_) {
      for (double b : path_bounds_) dual = std::max(dual, b);
    }
    if (s_.feasibility && found_) {
      result.status = SolveStatus::Optimal;
      dual = incumbent_value_;
    } else if (aborted_) {
      result.status = SolveStatus::TimeLimit;
    } else if (s_.feasibility) {
      result.status = SolveStatus::Infeasible;
    } else {
      result.status = dual > incumbent_value_ ? SolveStatus::Feasible : SolveStatus::Optimal;
    }
    result.dual_bound = dual;
    result.gap = relative_gap(dual, incumbent_value_);
    if (result.status != SolveStatus::Infeasible) result.placement = Placement{incumbent_};
    result.elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
    return result;
  }

 private:
  bool done() const { return aborted_ || found_; }

  bool out_of_budget() {
    if (nodes_ >= limits_.node_limit) return true;
    if ((nodes_ & 63U) == 0 && std::isfinite(limits_.time_limit)) {
      const double elapsed = std::chrono::duration<double>(Clock::now() - start_).count();
      if (elapsed >= limits_.time_limit) return true;
    }
    return false;
  }

  // Objective of `set`, summing each sample's entries in increasing column
  // order (the order the model module uses).
  double exact_value(std::vector<std::size_t> set) {
    std::sort(set.begin(), set.end());
    ++epoch_;
    touched_.clear();
    for (std::size_t j : set) {
      for (const Entry& e : s_.cols[j]) {
        if (stamp_[e.i] != epoch_) {
          stamp_[e.i] = epoch_;
          scratch_sum_[e.i] = 0.0;
          touched_.push_back(e.i);
        }
        scratch_sum_[e.i] += e.a;
      }
    }
    double value = 0.0;
    for (std::uint32_t i : touched_) {
      if (scratch_sum_[i] >= s_.need[i]) value += s_.weight[i];
    }
    return value;
  }

  void consider(std::vector<std::size_t> set) {
    const double value = exact_value(set);
    if (value > incumbent_value_) {
      std::sort(set.begin(), set.end());
      incumbent_value_ = value;
      incumbent_ = std::move(set);
    }
    if (s_.feasibility && incumbent_value_ >= s_.target) found_ = true;
  }

  // Scores of free columns against the current partial selection; also
  // returns the weight of uncovered samples that some free column touches.
  double compute_scores(std::vector<double>& score) {
    score.assign(s_.m, 0.0);
    ++epoch_;
    double reachable = 0.0;
    for (std::size_t j = 0; j < s_.m; ++j) {
      if (state_[j] != 0) continue;
      double total = 0.0;
      for (const Entry& e : s_.cols[j]) {
        if (covered_[e.i]) continue;
        const double deficit = s_.need[e.i] - sum_[e.i];
        total += s_.weight[e.i] * std::min(1.0, e.a / deficit);
        if (stamp_[e.i] != epoch_) {
          stamp_[e.i] = epoch_;
          reachable += s_.weight[e.i];
        }
      }
      score[j] = total;
    }
    return reachable;
  }

  void add(std::size_t j) {
    for (const Entry& e : s_.cols[j]) {
      log_.push_back({e.i, sum_[e.i], covered_[e.i]});
      sum_[e.i] += e.a;
      if (!covered_[e.i] && sum_[e.i] >= s_.need[e.i]) {
        covered_[e.i] = 1;
        current_ += s_.weight[e.i];
      }
    }
    state_[j] = 1;
    selected_.push_back(j);
  }

  void undo(std::size_t mark, double saved_current) {
    while (log_.size() > mark) {
      const auto& u = log_.back();
      sum_[u.i] = u.sum;
      covered_[u.i] = u.covered;
      log_.pop_back();
    }
    current_ = saved_current;
    state_[selected_.back()] = 0;
    selected_.pop_back();
  }

  // Greedy by score, then first-improvement 1-swaps.
  void greedy_start() {
    std::vector<double> score;
    const std::size_t budget = std::min(s_.k, s_.m);
    std::vector<std::size_t> set;
    const std::size_t mark = log_.size();
    const double saved = current_;
    while (set.size() < budget) {
      compute_scores(score);
      std::size_t best = s_.m;
      for (std::size_t j = 0; j < s_.m; ++j) {
        if (state_[j] == 0 && score[j] > 0.0 && (best == s_.m || score[j] > score[best])) best = j;
      }
      if (best == s_.m) break;
      add(best);
      set.push_back(best);
    }
    while (!selected_.empty()) undo(mark, saved);
    // Pad with lowest unused indices so the start uses the whole budget.
    for (std::size_t j = 0; j < s_.m && set.size() < budget; ++j) {
      if (std::find(set.begin(), set.end(), j) == set.end()) set.push_back(j);
    }
    consider(set);
    if (done()) return;

    double value = exact_value(set);
    bool improved = true;
    while (improved && !done()) {
      improved = false;
      for (std::size_t pos = 0; pos < set.size() && !improved; ++pos) {
        const std::size_t out = set[pos];
        for (std::size_t j = 0; j < s_.m && !improved; ++j) {
          if (std::find(set.begin(), set.end(), j) != set.end()) continue;
          set[pos] = j;
          const double v = exact_value(set);
          if (v > value) {
            value = v;
            improved = true;
            consider(set);
          } else {
            set[pos] = out;
          }
        }
        if (std::isfinite(limits_.time_limit) &&
            std::chrono::duration<double>(Clock::now() - start_).count() >= limits_.time_limit) {
          aborted_ = true;
        }
      }
    }
  }

  double rounded_bound(double bound) const {
    return s_.integral ? std::floor(bound + 1e-9) : bound;
  }

  bool prunable(double bound) const {
    if (s_.feasibility) return bound < s_.target;
    const double scale = std::max(1.0, std::fabs(incumbent_value_));
    return bound <= incumbent_value_ + limits_.gap_tol * scale + (s_.integral ? 0.0 : 1e-12 * scale);
  }

  void node(std::size_t depth) {
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    ++nodes_;
    const std::size_t r = s_.k > selected_.size() ? s_.k - selected_.size() : 0;

    std::vector<double> score;
    const double reachable = compute_scores(score);
    std::vector<std::size_t> positive;
    for (std::size_t j = 0; j < s_.m; ++j) {
      if (state_[j] == 0 && score[j] > 0.0) positive.push_back(j);
    }
    const std::size_t take = std::min(r, positive.size());
    std::partial_sort(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(take),
                      positive.end(), [&](std::size_t a, std::size_t b) {
                        return score[a] != score[b] ? score[a] > score[b] : a < b;
                      });
    double top = 0.0;
    for (std::size_t t = 0; t < take; ++t) top += score[positive[t]];
    const double bound = rounded_bound(current_ + std::min(top, reachable));

    if (limits_.observer) {
      NodeInfo info;
      info.fixed_in = selected_;
      for (std::size_t j = 0; j < s_.m; ++j) {
        if (state_[j] < 0) info.fixed_out.push_back(j);
      }
      info.bound = bound;
      info.incumbent = incumbent_value_;
      limits_.observer(info);
    }

    if (prunable(bound)) {
      max_pruned_ = std::max(max_pruned_, bound);
      return;
    }

    // Every useful free column fits in the budget: taking them all is optimal
    // for this subtree.
    std::vector<std::size_t> rounding = selected_;
    rounding.insert(rounding.end(), positive.begin(),
                    positive.begin() + static_cast<std::ptrdiff_t>(take));
    consider(rounding);
    if (r == 0 || take == positive.size() || done()) return;
    if (!s_.feasibility && incumbent_value_ >= bound) return;

    const std::size_t branch = positive.front();
    // The root replaces the placeholder bound; deeper nodes stack theirs.
    if (depth == 0) {
      path_bounds_.front() = bound;
    } else {
      path_bounds_.push_back(bound);
    }

    const std::size_t mark = log_.size();
    const double saved = current_;
    add(branch);
    node(depth + 1);
    undo(mark, saved);
    if (done()) return;

    state_[branch] = -1;
    node(depth + 1);
    state_[branch] = 0;
    if (done()) return;
    if (depth > 0) path_bounds_.pop_back();
  }

  struct Undo {
    std::uint32_t i;
    double sum;
    char covered;
  };

  const CoverStructure& s_;
  const SolveLimits& limits_;
  Clock::time_point start_;

  std::vector<double> sum_;
  std::vector<char> covered_;
  std::vector<signed char> state_;  // 0 free, 1 selected, -1 excluded
  std::vector<std::size_t> selected_;
  std::vector<Undo> log_;
  double current_ = 0.0;

  std::vector<double> scratch_sum_;
  std::vector<std::uint64_t> stamp_;
  std::vector<std::uint32_t> touched_;
  std::uint64_t epoch_ = 0;

  double incumbent_value_ = 0.0;
  std::vector<std::size_t> incumbent_;
  double max_pruned_ = -std::numeric_limits<double>::infinity();
  std::vector<double> path_bounds_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  bool found_ = false;
};

}  // namespace

SolveResult solve(const IlpModel& model, const SolveLimits& limits) {
  const CoverStructure structure = extract_structure(model);
  BranchAndBound search(structure, limits);
  return search.run();
}

SolveResult brute_force_solve(const CoverageInstance& instance, std::size_t k,
                              const OracleQuery& query) {
  const auto start = Clock::now();
  const std::size_t m = instance.m();
  const std::size_t kk = std::min(k, m);
  if (binomial(m, kk) > kBruteForceCap) {
    throw std::length_error("brute force over C(" + std::to_string(m) + ", " + std::to_string(kk) +
                            ") subsets exceeds the enumeration cap");
  }
  const bool area = query.weighting == Weighting::Area;
  auto value_of = [&](const Placement& p) -> double {
    switch (query.kind) {
      case ModelKind::MaxVisibilityCoverage: {
        const auto nearest = nearest_visible_distance(instance, p);
        double v = 0.0;
        for (std::size_t i = 0; i < nearest.size(); ++i) {
          if (std::isfinite(nearest[i])) v += area ? instance.samples()[i].weight : 1.0;
        }
        return v;
      }
      case ModelKind::ThresholdCoverage: {
        const auto report = evaluate(instance, p, query.threshold, ThresholdRule::Inclusive);
        return area ? report.covered_weight : report.objective;
      }
      case ModelKind::FeasibilityCover:
        return static_cast<double>(count_within_radius(instance, p, query.radius));
    }
    return 0.0;
  };

  Placement current;
  current.selected.resize(kk);
  std::iota(current.selected.begin(), current.selected.end(), std::size_t{0});
  Placement best = current;
  double best_value = value_of(current);
  std::uint64_t count = 1;
  // Lexicographic successor of a k-combination.
  while (kk > 0) {
    std::size_t pos = kk;
    while (pos > 0 && current.selected[pos - 1] == m - kk + pos - 1) --pos;
    if (pos == 0) break;
    ++current.selected[pos - 1];
    for (std::size_t t = pos; t < kk; ++t) current.selected[t] = current.selected[t - 1] + 1;
    ++count;
    const double v = value_of(current);
    if (v > best_value) {
      best_value = v;
      best = current;
    }
  }

  SolveResult result;
  result.nodes = count;
  result.primal = best_value;
  result.dual_bound = best_value;
  result.gap = 0.0;
  result.status = SolveStatus::Optimal;
  if (query.kind == ModelKind::FeasibilityCover &&
      best_value < static_cast<double>(required_count(instance.n(), query.rho))) {
    result.status = SolveStatus::Infeasible;
  } else {
    result.placement = best;
  }
  result.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

namespace {

std::string format_coef(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string var_name(const VarRef& v) {
  return (v.kind == VarRef::Kind::Y ? "y" : "z") + std::to_string(v.index);
}

// Writes "a x + b y - c z" with at most 8 terms per physical line.
void write_expression(std::ostream& out, const std::vector<Term>& terms) {
  bool first = true;
  std::size_t on_line = 0;
  for (const Term& t : terms) {
    if (on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
    const double mag = std::fabs(t.coef);
    if (first) {
      if (t.coef < 0) out << "- ";
    } else {
      out << (t.coef < 0 ? " - " : " + ");
    }
    if (mag != 1.0) out << format_coef(mag) << ' ';
    out << var_name(t.var);
    first = false;
    ++on_line;
  }
  if (first) out << "0 z0";
}

}  // namespace

void write_lp(std::ostream& out, const IlpModel& model) {
  out << "\\ " << to_string(model.kind) << ": " << model.n_y << " samples, " << model.n_z
      << " candidates, k = " << model.k << '\n';
  out << "Maximize\n obj: ";
  std::vector<Term> objective;
  for (std::size_t i = 0; i < model.objective.size(); ++i) {
    if (model.objective[i] != 0.0) objective.push_back({y_var(i), model.objective[i]});
  }
  write_expression(out, objective);
  out << "\nSubject To\n";
  for (const LinearRow& row : model.rows) {
    out << ' ' << row.name << ": ";
    write_expression(out, row.terms);
    out << (row.sense == Sense::LessEqual ? " <= " : " >= ") << format_coef(row.rhs) << '\n';
  }
  out << "Binary\n";
  for (std::size_t i = 0; i < model.n_y; ++i) out << " y" << i << '\n';
  for (std::size_t j = 0; j < model.n_z; ++j) out << " z" << j << '\n';
  out << "End\n";
}

void export_lp(const IlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_lp(out, model);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace spoc
