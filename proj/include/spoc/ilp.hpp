#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spoc/model.hpp"

namespace spoc {

enum class ModelKind { MaxVisibilityCoverage, ThresholdCoverage, FeasibilityCover };
std::string to_string(ModelKind kind);

// Which per-sample weight multiplies y_i in the objective. Uniform counts
// samples; Area uses the sample's surface weight.
enum class Weighting { Uniform, Area };

struct VarRef {
  enum class Kind : std::uint8_t { Y, Z };
  Kind kind;
  std::uint32_t index;
};

struct Term {
  VarRef var;
  double coef;
};

enum class Sense { LessEqual, GreaterEqual };

struct LinearRow {
  std::string name;
  std::vector<Term> terms;
  Sense sense{Sense::LessEqual};
  double rhs{};
};

// 0/1 model over coverage variables y_0..y_{N-1} and selection variables
// z_0..z_{M-1}. Row layout: N coverage rows, one cardinality row, and (for
// FeasibilityCover) one ratio row.
struct IlpModel {
  ModelKind kind{ModelKind::MaxVisibilityCoverage};
  std::size_t n_y{};
  std::size_t n_z{};
  std::vector<LinearRow> rows;
  std::vector<double> objective;  // per-y coefficients; empty for FeasibilityCover
  std::size_t k{};
  double threshold{};  // ThresholdCoverage
  double radius{};     // FeasibilityCover
  double rho{};        // FeasibilityCover
  std::size_t ratio_rhs{};

  const LinearRow& cardinality_row() const { return rows.at(n_y); }
};

// y_i <= sum_{j visible} z_j;  sum z_j <= k;  max sum w_i y_i.
IlpModel build_visibility_model(const CoverageInstance& instance, std::size_t k,
                                Weighting weighting = Weighting::Uniform);

// threshold * y_i - sum_j phi_ij z_j <= 0;  sum z_j <= k;  max sum w_i y_i.
// Requires a LambertInverseSquare instance and threshold > 0.
IlpModel build_cumulative_model(const CoverageInstance& instance, std::size_t k, double threshold,
                                Weighting weighting = Weighting::Uniform);

// y_i <= sum_{j visible, |c_j - o_i| <= r} z_j;  sum z_j <= k;
// sum y_i >= ceil(N * rho).  Requires r >= 0 and 0 < rho <= 1 (rho == 0 is
// accepted as the vacuous demand).
IlpModel build_feasibility_model(const CoverageInstance& instance, std::size_t k, double radius,
                                 double rho);

enum class SolveStatus { Optimal, Feasible, Infeasible, TimeLimit };
std::string to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status{SolveStatus::Infeasible};
  std::optional<Placement> placement;
  double primal{};
  double dual_bound{};
  double gap{};
  std::uint64_t nodes{};
  double elapsed{};  // seconds
};

// Snapshot handed to SolveLimits::observer at every node, after its bound has
// been computed.
struct NodeInfo {
  std::vector<std::size_t> fixed_in;
  std::vector<std::size_t> fixed_out;
  double bound{};
  double incumbent{};
};

struct SolveLimits {
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  double gap_tol = 0.0;
  std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();
  std::function<void(const NodeInfo&)> observer;
};

double relative_gap(double dual, double primal);

// Depth-first branch-and-bound over the z variables; y is implied by z. Node
// bound: covered weight so far plus the r = k - |fixed_in| largest free
// candidate scores, a candidate's score being the sum over uncovered samples
// of w_i * min(1, a_ij / deficit_i). Incumbents come from a greedy + 1-swap
// start and a rounding of every node's top-r candidates.
SolveResult solve(const IlpModel& model, const SolveLimits& limits = {});

struct OracleQuery {
  ModelKind kind{ModelKind::MaxVisibilityCoverage};
  double threshold{};
  double radius{};
  double rho{1.0};
  Weighting weighting{Weighting::Uniform};
};

inline constexpr std::uint64_t kBruteForceCap = 1'000'000;

// Enumerates every k-subset (k clamped to M) and evaluates it through the
// model module. Throws std::length_error when C(M, k) exceeds kBruteForceCap.
SolveResult brute_force_solve(const CoverageInstance& instance, std::size_t k,
                              const OracleQuery& query);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// CPLEX-LP text (Maximize / Subject To / Binary / End); variables y<i>, z<j>;
// coefficients printed with 12 significant digits.
void write_lp(std::ostream& out, const IlpModel& model);
void export_lp(const IlpModel& model, const std::filesystem::path& path);

}  // namespace spoc
