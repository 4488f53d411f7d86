// spoc: command-line front end for sensor placement.
//
// Exit codes: 0 success, 1 other error, 2 usage error, 3 infeasible,
// 4 time limit reached with the gap above tolerance.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spoc/approx.hpp"
#include "spoc/driver.hpp"
#include "spoc/errors.hpp"
#include "spoc/ilp.hpp"
#include "spoc/io.hpp"
#include "spoc/mesh.hpp"
#include "spoc/model.hpp"
#include "spoc/refine.hpp"
#include "spoc/scene.hpp"
#include "spoc/visibility.hpp"

namespace fs = std::filesystem;
using namespace spoc;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitTimeLimit = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json positions_json(const std::vector<Vec3>& positions) {
  Json out = Json::array();
  for (const Vec3& p : positions) out.push_back(vec_to_json(p));
  return out;
}

std::vector<Vec3> positions_from(const Json& j) {
  std::vector<Vec3> out;
  for (const Json& p : j) out.push_back(vec_from_json(p));
  return out;
}

Problem problem_from_int(int p) {
  if (p < 1 || p > 3) throw UsageError("--problem must be 1, 2 or 3");
  return static_cast<Problem>(p);
}

// Rejects flags that make no sense for the chosen problem.
void check_goal_flags(const CoverageGoal& goal, bool has_phi, bool has_rho) {
  const std::string p = "--problem " + std::to_string(static_cast<int>(goal.problem));
  if (has_phi && goal.problem != Problem::CumulativeQuality) throw UsageError("--phi conflicts with " + p);
  if (has_rho && goal.problem != Problem::BestQuality) throw UsageError("--rho conflicts with " + p);
  if (goal.weighted && goal.problem == Problem::BestQuality) throw UsageError("--weighted conflicts with " + p);
  if (goal.problem == Problem::CumulativeQuality && !has_phi) throw UsageError("--problem 3 needs --phi");
  if (goal.problem == Problem::CumulativeQuality && !(goal.threshold > 0.0)) {
    throw UsageError("--phi must be positive");
  }
  if (goal.problem == Problem::BestQuality && !(goal.rho >= 0.0 && goal.rho <= 1.0)) {
    throw UsageError("--rho must lie in [0, 1]");
  }
}

Json goal_json(const CoverageGoal& goal) {
  Json out;
  out["problem"] = static_cast<int>(goal.problem);
  if (goal.problem == Problem::CumulativeQuality) out["phi"] = goal.threshold;
  if (goal.problem == Problem::BestQuality) out["rho"] = goal.rho;
  out["weighted"] = goal.weighted;
  return out;
}

CoverageGoal goal_from_json(const Json& j) {
  CoverageGoal goal;
  goal.problem = problem_from_int(j.at("problem").get<int>());
  goal.threshold = j.value("phi", 0.0);
  goal.rho = j.value("rho", 1.0);
  goal.weighted = j.value("weighted", false);
  return goal;
}

// Samples counted as covered under the goal, for reporting and coloring.
std::vector<std::size_t> covered_samples(const CoverageInstance& instance, const Placement& placement,
                                         const CoverageGoal& goal) {
  if (goal.problem == Problem::BestQuality) {
    const auto nearest = nearest_visible_distance(instance, placement);
    const double r = radius_at_ratio(nearest, goal.rho);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nearest.size(); ++i) {
      if (nearest[i] <= r) out.push_back(i);
    }
    return out;
  }
  const auto threshold = goal.problem == Problem::CumulativeQuality ? std::optional<double>(goal.threshold)
                                                                     : std::nullopt;
  return evaluate(instance, placement, threshold, ThresholdRule::Inclusive).covered_ids;
}

SampleSet load_samples(const std::string& path) { return samples_from_json(load_json(path)); }
CandidateSet load_candidates(const std::string& path) { return candidates_from_json(load_json(path)); }

fs::path key_path(const fs::path& vis) { return fs::path(vis.string() + ".key"); }

struct LoadedInstance {
  SampleSet samples;
  CandidateSet candidates;
  VisibilityMatrix vis;
  std::optional<std::string> mesh;
};

LoadedInstance load_inputs(const std::string& samples_path, const std::string& candidates_path,
                           const std::string& vis_path) {
  LoadedInstance in;
  in.samples = load_samples(samples_path);
  in.candidates = load_candidates(candidates_path);
  in.vis = load_spvm(vis_path);
  const fs::path key = key_path(vis_path);
  if (fs::exists(key)) {
    const Json k = load_json(key);
    if (k.contains("mesh")) in.mesh = k["mesh"].get<std::string>();
  }
  if (!in.vis.matches(in.samples, in.candidates)) {
    throw Error("visibility matrix " + vis_path + " was computed for different samples or candidates; re-run `spoc visibility --mesh " +
                in.mesh.value_or("<mesh.obj>") + " --samples " + samples_path + " --candidates " +
                candidates_path + " --out " + vis_path + "`");
  }
  return in;
}

SolveLimits make_limits(double time_limit, double gap) {
  SolveLimits limits;
  limits.time_limit = time_limit;
  limits.gap_tol = gap;
  return limits;
}

// Outcome of one solver call on a loaded instance.
struct SolveOutcome {
  Placement placement;
  SolveResult solve;
  std::vector<std::size_t> covered;
  double objective{};
  std::optional<double> radius;
  bool hit_limit = false;
};

SolveOutcome run_solver(const LoadedInstance& in, const CoverageGoal& goal, std::size_t k,
                        const SolveLimits& limits) {
  const CoverageInstance inst =
      build_instance(in.samples, in.candidates, in.vis, quality_kind_for(goal.problem));
  const Weighting weighting = goal.weighted ? Weighting::Area : Weighting::Uniform;
  SolveOutcome out;
  switch (goal.problem) {
    case Problem::Visibility: {
      CoverageSolution s = solve_problem1(inst, k, limits, weighting);
      out.placement = s.placement;
      out.solve = s.solve;
      out.objective = goal.weighted ? s.report.covered_weight : s.report.objective;
      break;
    }
    case Problem::CumulativeQuality: {
      CoverageSolution s = solve_problem3(inst, k, goal.threshold, limits, weighting);
      out.placement = s.placement;
      out.solve = s.solve;
      out.objective = goal.weighted ? s.report.covered_weight : s.report.objective;
      break;
    }
    case Problem::BestQuality: {
      RadiusSolution s = solve_problem2(inst, k, goal.rho, limits);
      out.placement = s.placement;
      out.solve = s.solve;
      out.radius = s.radius;
      out.objective = s.radius;
      out.hit_limit = !s.proven;
      break;
    }
  }
  if (out.solve.status == SolveStatus::TimeLimit && out.solve.gap > limits.gap_tol) out.hit_limit = true;
  out.covered = covered_samples(inst, out.placement, goal);
  return out;
}

Json coverage_json(const std::vector<std::size_t>& covered, const SampleSet& samples) {
  double weight = 0.0;
  for (std::size_t i : covered) weight += samples[i].weight;
  Json out;
  out["covered_count"] = covered.size();
  out["n_samples"] = samples.size();
  out["coverage_ratio"] = samples.size() == 0 ? 0.0 : static_cast<double>(covered.size()) / samples.size();
  out["covered_weight"] = weight;
  out["covered_ids"] = covered;
  return out;
}

void finish_result(Json& result, bool deterministic) {
  if (!deterministic) result["timestamp"] = utc_timestamp();
}

// ---- subcommands ----

struct GenSceneArgs {
  std::string kind;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<double> size{10.0, 10.0};
  std::size_t cells = 16;
  double amplitude = 0.5;
  bool empty_room = false;
};

int run_gen_scene(const GenSceneArgs& a, const CLI::App& cmd) {
  TriangleMesh mesh;
  if (a.kind == "terrain") {
    if (a.empty_room) throw UsageError("--empty conflicts with --kind terrain");
    mesh = gen_terrain({a.seed, a.size[0], a.size[1], a.cells, a.amplitude});
  } else {
    for (const char* opt : {"--size", "--cells", "--amplitude"}) {
      if (cmd.count(opt) > 0) throw UsageError(std::string(opt) + " conflicts with --kind room");
    }
    RoomSpec spec = a.empty_room ? RoomSpec{} : default_room();
    mesh = gen_room(spec);
  }
  save_obj(a.out, mesh);
  std::cout << a.out << ": " << mesh.num_vertices() << " vertices, " << mesh.num_faces() << " triangles\n";
  return 0;
}

struct SampleArgs {
  std::string mesh;
  double pitch{};
  double tau = 0.0;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  const TriangleMesh mesh = load_obj(a.mesh);
  const SampleSet samples = sample_surface(mesh, a.pitch, a.tau);
  Json j = samples_to_json(samples);
  j["mesh"] = a.mesh;
  j["mesh_hash"] = hash_hex(mesh_hash(mesh));
  j["tau"] = a.tau;
  save_json(a.out, j);
  std::cout << a.out << ": " << samples.size() << " samples, total area " << samples.total_weight() << " m^2\n";
  return 0;
}

struct CandidatesArgs {
  std::optional<double> plane_z;
  std::vector<double> rect;
  std::vector<double> box;
  double pitch{};
  std::string out;
};

int run_candidates(const CandidatesArgs& a) {
  CandidateRegion region;
  if (a.plane_z) {
    if (a.rect.size() != 4) throw UsageError("--plane-z needs --rect X0 Y0 X1 Y1");
    region = PlaneRegion{*a.plane_z, a.rect[0], a.rect[1], a.rect[2], a.rect[3]};
  } else if (a.box.size() == 6) {
    region = BoxRegion{{a.box[0], a.box[1], a.box[2]}, {a.box[3], a.box[4], a.box[5]}};
  } else {
    throw UsageError("give either --plane-z with --rect or --box");
  }
  const CandidateSet candidates = generate_candidates(region, a.pitch);
  save_json(a.out, candidates_to_json(candidates));
  std::cout << a.out << ": " << candidates.size() << " candidates\n";
  return 0;
}

struct VisibilityArgs {
  std::string mesh, samples, candidates, out;
  std::optional<double> eps;
  unsigned threads = 0;
};

int run_visibility(const VisibilityArgs& a) {
  const TriangleMesh mesh = load_obj(a.mesh);
  const SampleSet samples = load_samples(a.samples);
  const CandidateSet candidates = load_candidates(a.candidates);
  Json key;
  key["mesh"] = a.mesh;
  key["mesh_hash"] = hash_hex(mesh_hash(mesh));
  key["sample_hash"] = hash_hex(samples.content_hash());
  key["candidate_hash"] = hash_hex(candidates.content_hash());
  key["eps"] = a.eps ? Json(*a.eps) : Json("relative");

  const fs::path keyfile = key_path(a.out);
  if (fs::exists(a.out) && fs::exists(keyfile)) {
    bool reusable = false;
    try {
      const Json old = load_json(keyfile);
      const VisibilityMatrix cached = load_spvm(a.out);
      reusable = old.value("mesh_hash", "") == key["mesh_hash"] && old.value("eps", Json()) == key["eps"] &&
                 cached.matches(samples, candidates);
    } catch (const Error&) {
      reusable = false;
    }
    if (reusable) {
      std::cout << a.out << ": up to date, reusing cached matrix\n";
      return 0;
    }
    std::cout << a.out << ": inputs changed, recomputing\n";
  }
  const Bvh bvh = build_bvh(mesh);
  const VisibilityMatrix vis = visibility_matrix(bvh, samples, candidates, a.eps, a.threads);
  save_spvm(a.out, vis);
  save_json(keyfile, key);
  std::cout << a.out << ": " << vis.n_samples() << " x " << vis.n_candidates() << ", " << vis.count()
            << " visible pairs\n";
  return 0;
}

struct SolveArgs {
  std::string samples, candidates, vis, out;
  int problem = 1;
  std::size_t k = 1;
  std::optional<double> phi;
  std::optional<double> rho;
  double time_limit = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  bool weighted = false;
  bool deterministic = false;
};

CoverageGoal goal_from_args(int problem, const std::optional<double>& phi, const std::optional<double>& rho,
                            bool weighted) {
  CoverageGoal goal;
  goal.problem = problem_from_int(problem);
  goal.threshold = phi.value_or(0.0);
  goal.rho = rho.value_or(1.0);
  goal.weighted = weighted;
  check_goal_flags(goal, phi.has_value(), rho.has_value());
  return goal;
}

int run_solve(const SolveArgs& a) {
  const CoverageGoal goal = goal_from_args(a.problem, a.phi, a.rho, a.weighted);
  const LoadedInstance in = load_inputs(a.samples, a.candidates, a.vis);
  const SolveOutcome r = run_solver(in, goal, a.k, make_limits(a.time_limit, a.gap));

  Json result;
  result["format_version"] = kFormatVersion;
  result["type"] = "result";
  result["command"] = "solve";
  result["goal"] = goal_json(goal);
  result["k"] = a.k;
  Json inputs{{"samples", a.samples}, {"candidates", a.candidates}, {"vis", a.vis}};
  if (in.mesh) inputs["mesh"] = *in.mesh;
  result["inputs"] = inputs;
  result["solver"] = solve_to_json(r.solve, !a.deterministic);
  result["objective"] = r.objective;
  if (r.radius) {
    result["radius"] = *r.radius;
    result["min_quality"] = *r.radius > 0.0 ? 1.0 / *r.radius : std::numeric_limits<double>::max();
  }
  const Placement sorted = r.placement.sorted();
  std::vector<Vec3> positions;
  for (std::size_t j : sorted.selected) positions.push_back(in.candidates[j]);
  result["placement"] = sorted.selected;
  result["positions"] = positions_json(positions);
  result["coverage"] = coverage_json(r.covered, in.samples);
  {
    const CoverageInstance inst =
        build_instance(in.samples, in.candidates, in.vis, quality_kind_for(goal.problem));
    result["assignment"] = assign_samples(inst, sorted, r.covered);
  }
  finish_result(result, a.deterministic);
  save_json(a.out, result);
  std::cout << a.out << ": status " << to_string(r.solve.status) << ", objective " << r.objective << ", "
            << r.covered.size() << "/" << in.samples.size() << " samples covered\n";
  if (r.hit_limit) {
    std::cerr << "stopped on the time limit with gap " << r.solve.gap << " above tolerance " << a.gap << "\n";
    return kExitTimeLimit;
  }
  return 0;
}

struct ApproxArgs {
  std::string samples, out;
  std::size_t k = 1;
  double plane_z{};
  bool deterministic = false;
};

int run_approx(const ApproxArgs& a) {
  const SampleSet samples = load_samples(a.samples);
  const PlaneDeployment plane = PlaneDeployment::for_samples(samples, a.plane_z);
  const CandidateSet centers = farthest_point_clustering(samples, a.k, plane);
  const double radius = coverage_radius(centers, samples);

  Json result;
  result["format_version"] = kFormatVersion;
  result["type"] = "result";
  result["command"] = "approx";
  result["goal"] = goal_json({Problem::BestQuality, 0.0, 1.0, false});
  result["k"] = a.k;
  result["inputs"] = {{"samples", a.samples}};
  result["plane_z"] = a.plane_z;
  result["clearance"] = plane.clearance;
  result["radius"] = radius;
  result["objective"] = radius;
  result["certified_factor"] = clustering_certified_factor(radius, plane.clearance);
  result["positions"] = positions_json(centers.positions);
  std::vector<std::size_t> all(samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  result["coverage"] = coverage_json(all, samples);
  result["assignment"] = assign_nearest(samples, centers.positions);
  finish_result(result, a.deterministic);
  save_json(a.out, result);
  std::cout << a.out << ": radius " << radius << " with " << centers.size() << " sensors\n";
  return 0;
}

struct RefineArgs {
  std::string method = "grid";
  std::size_t rounds = 1;
  std::optional<double> fine_pitch;
  std::optional<double> neighborhood;
  std::string in, out;
  std::optional<std::string> mesh;
  std::optional<std::string> samples;
  bool deterministic = false;
};

int run_refine(const RefineArgs& a) {
  const Json prev = load_json(a.in);
  if (prev.value("type", "") != "result") throw ParseError(a.in + " is not a result document");
  const Json& inputs = prev.at("inputs");
  const std::string samples_path = a.samples.value_or(inputs.at("samples").get<std::string>());
  const SampleSet samples = load_samples(samples_path);
  const std::vector<Vec3> start = positions_from(prev.at("positions"));
  CoverageGoal goal = goal_from_json(prev.at("goal"));

  Json result;
  result["format_version"] = kFormatVersion;
  result["type"] = "result";
  result["command"] = "refine";
  result["method"] = a.method;
  result["goal"] = goal_json(goal);
  result["k"] = start.size();
  Json in_json{{"in", a.in}, {"samples", samples_path}};

  if (a.method == "onecenter") {
    if (a.fine_pitch) throw UsageError("--fine-pitch conflicts with --method onecenter");
    if (goal.problem != Problem::BestQuality) throw UsageError("--method onecenter only refines problem 2 results");
    double height{};
    if (prev.contains("plane_z")) {
      height = prev["plane_z"].get<double>();
    } else if (inputs.contains("candidates")) {
      const CandidateSet c = load_candidates(inputs["candidates"].get<std::string>());
      const auto* plane = c.region ? std::get_if<PlaneRegion>(&*c.region) : nullptr;
      if (!plane) throw UsageError("--method onecenter needs sensors on a plane region");
      height = plane->z;
    } else {
      throw UsageError("cannot tell the deployment plane height from " + a.in);
    }
    const QualityImprovement q = improve_quality_max(samples, start, height);
    const double h = PlaneDeployment::for_samples(samples, height).clearance;
    result["inputs"] = in_json;
    result["plane_z"] = height;
    result["objective_before"] = q.initial_radius;
    result["objective_after"] = q.radius;
    result["objective"] = q.radius;
    result["radius"] = q.radius;
    result["iterations"] = q.iterations;
    const double phase1 = prev.contains("certified_factor") ? prev["certified_factor"].get<double>()
                                                             : clustering_certified_factor(q.initial_radius, h);
    result["certified_factor"] = certified_factor(phase1, q.initial_radius, q.radius);
    result["positions"] = positions_json(q.centers);
    std::vector<std::size_t> all(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    result["coverage"] = coverage_json(all, samples);
    result["assignment"] = assign_nearest(samples, q.centers);
    finish_result(result, a.deterministic);
    save_json(a.out, result);
    std::cout << a.out << ": radius " << q.initial_radius << " -> " << q.radius << "\n";
    return 0;
  }

  if (!a.fine_pitch) throw UsageError("--method grid needs --fine-pitch");
  std::string mesh_path;
  if (a.mesh) {
    mesh_path = *a.mesh;
  } else if (inputs.contains("mesh")) {
    mesh_path = inputs["mesh"].get<std::string>();
  } else {
    throw UsageError("--method grid needs --mesh (not recorded in " + a.in + ")");
  }
  if (!inputs.contains("candidates")) throw UsageError(a.in + " records no candidate region");
  const std::string cand_path = inputs["candidates"].get<std::string>();
  const CandidateSet coarse = load_candidates(cand_path);
  if (!coarse.region) throw UsageError(cand_path + " has no lattice region to refine in");

  const TriangleMesh mesh = load_obj(mesh_path);
  const Bvh bvh = build_bvh(mesh);
  const RefineContext ctx{&bvh, &samples, *coarse.region, std::nullopt};
  GridRefineOptions options;
  options.fine_pitch = *a.fine_pitch;
  options.rounds = a.rounds;
  options.neighborhood = a.neighborhood.value_or(coarse.pitch > 0.0 ? coarse.pitch : 2.0 * *a.fine_pitch);
  const RefineResult r = refine_grid(ctx, goal, start, options);

  in_json["mesh"] = mesh_path;
  in_json["candidates"] = cand_path;
  result["inputs"] = in_json;
  const bool radius_goal = goal.problem == Problem::BestQuality;
  result["objective_before"] = radius_goal ? -r.objective_before : r.objective_before;
  result["objective_after"] = radius_goal ? -r.objective_after : r.objective_after;
  result["objective"] = result["objective_after"];
  result["moves"] = r.moves;
  result["rounds_run"] = r.rounds_run;
  result["positions"] = positions_json(r.positions);

  // Score the refined sensors as an explicit candidate list for coverage and colors.
  CandidateSet placed;
  placed.positions = r.positions;
  const VisibilityMatrix vis = visibility_matrix(bvh, samples, placed);
  const CoverageInstance inst = build_instance(samples, placed, vis, quality_kind_for(goal.problem));
  Placement all;
  for (std::size_t s = 0; s < r.positions.size(); ++s) all.selected.push_back(s);
  const auto covered = covered_samples(inst, all, goal);
  result["coverage"] = coverage_json(covered, samples);
  result["assignment"] = assign_samples(inst, all, covered);
  finish_result(result, a.deterministic);
  save_json(a.out, result);
  std::cout << a.out << ": objective " << result["objective_before"].get<double>() << " -> "
            << result["objective_after"].get<double>() << " after " << r.moves << " moves\n";
  return 0;
}

struct SweepArgs {
  std::string samples, candidates, vis, out;
  std::string k_range;
  int problem = 1;
  std::optional<double> phi;
  std::optional<double> rho;
  double time_limit = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  bool weighted = false;
  bool deterministic = false;
};

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const std::string lo_text = s.substr(0, dots);
    const std::string hi_text = s.substr(dots + 2);
    const unsigned long lo = std::stoul(lo_text, &used);
    if (used != lo_text.size()) throw std::invalid_argument(s);
    const unsigned long hi = std::stoul(hi_text, &used);
    if (used != hi_text.size() || hi < lo) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("--k-range expects A..B with A <= B, got '" + s + "'");
  }
}

int run_sweep(const SweepArgs& a) {
  const auto [k_lo, k_hi] = parse_range(a.k_range);
  const CoverageGoal goal = goal_from_args(a.problem, a.phi, a.rho, a.weighted);
  const LoadedInstance in = load_inputs(a.samples, a.candidates, a.vis);
  const SolveLimits limits = make_limits(a.time_limit, a.gap);

  std::ofstream csv(a.out);
  if (!csv) throw Error("cannot write " + a.out);
  csv << "k,status,objective,dual_bound,gap,covered" << (a.deterministic ? "" : ",elapsed") << "\n";
  bool hit_limit = false;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    std::optional<SolveOutcome> r;
    try {
      r = run_solver(in, goal, k, limits);
    } catch (const InfeasibleError&) {
      csv << k << ",Infeasible,,,," << (a.deterministic ? "" : ",") << "\n";
      continue;
    }
    hit_limit = hit_limit || r->hit_limit;
    const double bound = r->radius ? *r->radius : r->solve.dual_bound;
    const double gap = r->radius ? 0.0 : r->solve.gap;
    char line[256];
    std::snprintf(line, sizeof line, "%zu,%s,%.12g,%.12g,%.6g,%zu", k, to_string(r->solve.status).c_str(),
                  r->objective, bound, gap, r->covered.size());
    csv << line;
    if (!a.deterministic) csv << "," << r->solve.elapsed;
    csv << "\n";
    std::cout << "k=" << k << " objective " << r->objective << "\n";
  }
  return hit_limit ? kExitTimeLimit : 0;
}

struct PipelineArgs {
  std::string mesh, out;
  int problem = 1;
  std::size_t k = 1;
  std::optional<double> phi;
  std::optional<double> rho;
  bool weighted = false;
  double tau = 0.0;
  double plane_z{};
  std::vector<double> rect;
  double coarse_sample_pitch{}, coarse_candidate_pitch{}, fine_sample_pitch{}, fine_candidate_pitch{};
  std::size_t rounds = 1;
  bool relaxed = false;
  double time_limit = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  bool deterministic = false;
};

int run_pipeline(const PipelineArgs& a) {
  const CoverageGoal goal = goal_from_args(a.problem, a.phi, a.rho, a.weighted);
  if (a.relaxed && goal.problem != Problem::BestQuality) throw UsageError("--relaxed conflicts with --problem " + std::to_string(a.problem));
  const TriangleMesh mesh = load_obj(a.mesh);
  const Bvh bvh = build_bvh(mesh);
  SceneInput scene;
  scene.mesh = &mesh;
  scene.bvh = &bvh;
  scene.downward_threshold = a.tau;
  scene.region = PlaneRegion{a.plane_z, a.rect[0], a.rect[1], a.rect[2], a.rect[3]};
  TwoPhaseParams params;
  params.goal = goal;
  params.k = a.k;
  params.coarse_sample_pitch = a.coarse_sample_pitch;
  params.coarse_candidate_pitch = a.coarse_candidate_pitch;
  params.fine_sample_pitch = a.fine_sample_pitch;
  params.fine_candidate_pitch = a.fine_candidate_pitch;
  params.rounds = a.rounds;
  params.relaxed = a.relaxed;
  params.limits = make_limits(a.time_limit, a.gap);
  const PipelineReport report = two_phase(scene, params);
  Json j = pipeline_to_json(report, !a.deterministic);
  j["goal"] = goal_json(goal);
  j["inputs"] = {{"mesh", a.mesh}};
  finish_result(j, a.deterministic);
  save_json(a.out, j);
  std::cout << a.out << ": phase 1 " << report.phase1.objective << ", phase 2 " << report.phase2.objective
            << ", certified factor " << report.certified_factor << "\n";
  return 0;
}

struct ExportArgs {
  std::string coloring = "per-sensor";
  std::string in, out;
  std::optional<std::string> samples;
};

int run_export(const ExportArgs& a) {
  const Json result = load_json(a.in);
  if (result.value("type", "") != "result") throw ParseError(a.in + " is not a result document");
  const std::string samples_path = a.samples.value_or(result.at("inputs").at("samples").get<std::string>());
  const SampleSet samples = load_samples(samples_path);
  if (!result.contains("assignment")) throw ParseError(a.in + " has no per-sample assignment");
  const auto assignment = result["assignment"].get<std::vector<int>>();
  std::ofstream out(a.out);
  if (!out) throw Error("cannot write " + a.out);
  write_colored_ply(out, samples, assignment);
  std::cout << a.out << ": " << samples.size() << " colored samples\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor placement for surface coverage"};
  app.require_subcommand(1);
  std::function<int()> action;

  GenSceneArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-scene", "Write a synthetic terrain or room mesh as OBJ");
  gen_cmd->add_option("--kind", gen.kind, "terrain or room")->required()->check(CLI::IsMember({"terrain", "room"}));
  gen_cmd->add_option("--seed", gen.seed, "terrain seed");
  gen_cmd->add_option("--out", gen.out, "output OBJ")->required();
  gen_cmd->add_option("--size", gen.size, "terrain extent in x and y (m)")->expected(2);
  gen_cmd->add_option("--cells", gen.cells, "terrain grid cells per side")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--amplitude", gen.amplitude, "terrain amplitude (m)");
  gen_cmd->add_flag("--empty", gen.empty_room, "room without furniture");
  gen_cmd->callback([&] { action = [&] { return run_gen_scene(gen, *gen_cmd); }; });

  SampleArgs smp;
  auto* smp_cmd = app.add_subcommand("sample", "Grid-sample a mesh surface");
  smp_cmd->add_option("--mesh", smp.mesh)->required();
  smp_cmd->add_option("--pitch", smp.pitch, "sample spacing (m)")->required();
  smp_cmd->add_option("--tau", smp.tau, "drop samples whose normal z is below -tau");
  smp_cmd->add_option("--out", smp.out)->required();
  smp_cmd->callback([&] { action = [&] { return run_sample(smp); }; });

  CandidatesArgs cand;
  auto* cand_cmd = app.add_subcommand("candidates", "Lattice of candidate sensor positions");
  auto* plane_opt = cand_cmd->add_option("--plane-z", cand.plane_z, "height of the deployment plane");
  auto* rect_opt = cand_cmd->add_option("--rect", cand.rect, "X0 Y0 X1 Y1")->expected(4);
  auto* box_opt = cand_cmd->add_option("--box", cand.box, "X0 Y0 Z0 X1 Y1 Z1")->expected(6);
  plane_opt->excludes(box_opt);
  rect_opt->excludes(box_opt);
  plane_opt->needs(rect_opt);
  rect_opt->needs(plane_opt);
  cand_cmd->add_option("--pitch", cand.pitch)->required();
  cand_cmd->add_option("--out", cand.out)->required();
  cand_cmd->callback([&] { action = [&] { return run_candidates(cand); }; });

  VisibilityArgs vis;
  auto* vis_cmd = app.add_subcommand("visibility", "Sample x candidate visibility matrix (cached)");
  vis_cmd->add_option("--mesh", vis.mesh)->required();
  vis_cmd->add_option("--samples", vis.samples)->required();
  vis_cmd->add_option("--candidates", vis.candidates)->required();
  vis_cmd->add_option("--out", vis.out)->required();
  vis_cmd->add_option("--eps", vis.eps, "absolute endpoint shrinkage (m)");
  vis_cmd->add_option("--threads", vis.threads, "worker threads, 0 = all cores");
  vis_cmd->callback([&] { action = [&] { return run_visibility(vis); }; });

  SolveArgs sol;
  auto* sol_cmd = app.add_subcommand("solve", "Solve problem 1, 2 or 3 exactly");
  sol_cmd->add_option("--samples", sol.samples)->required();
  sol_cmd->add_option("--candidates", sol.candidates)->required();
  sol_cmd->add_option("--vis", sol.vis)->required();
  sol_cmd->add_option("--problem", sol.problem)->required();
  sol_cmd->add_option("--k", sol.k)->required();
  sol_cmd->add_option("--phi", sol.phi, "cumulative quality threshold (1/m^2)");
  sol_cmd->add_option("--rho", sol.rho, "required coverage ratio for problem 2");
  sol_cmd->add_option("--time-limit", sol.time_limit, "seconds per solve");
  sol_cmd->add_option("--gap", sol.gap, "relative gap tolerance");
  sol_cmd->add_flag("--weighted", sol.weighted, "weight samples by area");
  sol_cmd->add_flag("--deterministic", sol.deterministic, "omit timestamp and timings");
  sol_cmd->add_option("--out", sol.out)->required();
  sol_cmd->callback([&] { action = [&] { return run_solve(sol); }; });

  ApproxArgs apx;
  auto* apx_cmd = app.add_subcommand("approx", "Farthest point clustering on a deployment plane");
  apx_cmd->add_option("--samples", apx.samples)->required();
  apx_cmd->add_option("--k", apx.k)->required();
  apx_cmd->add_option("--plane-z", apx.plane_z)->required();
  apx_cmd->add_flag("--deterministic", apx.deterministic);
  apx_cmd->add_option("--out", apx.out)->required();
  apx_cmd->callback([&] { action = [&] { return run_approx(apx); }; });

  RefineArgs ref;
  auto* ref_cmd = app.add_subcommand("refine", "Local improvement of a result");
  ref_cmd->add_option("--method", ref.method)->check(CLI::IsMember({"grid", "onecenter"}));
  ref_cmd->add_option("--rounds", ref.rounds);
  ref_cmd->add_option("--fine-pitch", ref.fine_pitch);
  ref_cmd->add_option("--neighborhood", ref.neighborhood, "search half-width (default: coarse pitch)");
  ref_cmd->add_option("--in", ref.in)->required();
  ref_cmd->add_option("--mesh", ref.mesh);
  ref_cmd->add_option("--samples", ref.samples, "samples to score on (default: the input's)");
  ref_cmd->add_flag("--deterministic", ref.deterministic);
  ref_cmd->add_option("--out", ref.out)->required();
  ref_cmd->callback([&] { action = [&] { return run_refine(ref); }; });

  SweepArgs swp;
  auto* swp_cmd = app.add_subcommand("sweep", "Solve for a range of k and write CSV");
  swp_cmd->add_option("--samples", swp.samples)->required();
  swp_cmd->add_option("--candidates", swp.candidates)->required();
  swp_cmd->add_option("--vis", swp.vis)->required();
  swp_cmd->add_option("--problem", swp.problem);
  swp_cmd->add_option("--k-range", swp.k_range, "A..B")->required();
  swp_cmd->add_option("--phi", swp.phi);
  swp_cmd->add_option("--rho", swp.rho);
  swp_cmd->add_option("--time-limit", swp.time_limit);
  swp_cmd->add_option("--gap", swp.gap);
  swp_cmd->add_flag("--weighted", swp.weighted);
  swp_cmd->add_flag("--deterministic", swp.deterministic);
  swp_cmd->add_option("--out", swp.out)->required();
  swp_cmd->callback([&] { action = [&] { return run_sweep(swp); }; });

  PipelineArgs pip;
  auto* pip_cmd = app.add_subcommand("pipeline", "Coarse global solve followed by local improvement");
  pip_cmd->add_option("--mesh", pip.mesh)->required();
  pip_cmd->add_option("--problem", pip.problem)->required();
  pip_cmd->add_option("--k", pip.k)->required();
  pip_cmd->add_option("--phi", pip.phi);
  pip_cmd->add_option("--rho", pip.rho);
  pip_cmd->add_flag("--weighted", pip.weighted);
  pip_cmd->add_option("--tau", pip.tau);
  pip_cmd->add_option("--plane-z", pip.plane_z)->required();
  pip_cmd->add_option("--rect", pip.rect)->expected(4)->required();
  pip_cmd->add_option("--coarse-sample-pitch", pip.coarse_sample_pitch)->required();
  pip_cmd->add_option("--coarse-candidate-pitch", pip.coarse_candidate_pitch)->required();
  pip_cmd->add_option("--fine-sample-pitch", pip.fine_sample_pitch)->required();
  pip_cmd->add_option("--fine-candidate-pitch", pip.fine_candidate_pitch)->required();
  pip_cmd->add_option("--rounds", pip.rounds);
  pip_cmd->add_flag("--relaxed", pip.relaxed, "problem 2 without occlusion: clustering + 1-center");
  pip_cmd->add_option("--time-limit", pip.time_limit);
  pip_cmd->add_option("--gap", pip.gap);
  pip_cmd->add_flag("--deterministic", pip.deterministic);
  pip_cmd->add_option("--out", pip.out)->required();
  pip_cmd->callback([&] { action = [&] { return run_pipeline(pip); }; });

  ExportArgs exp;
  auto* exp_cmd = app.add_subcommand("export", "Color samples by covering sensor (PLY)");
  exp_cmd->add_option("--coloring", exp.coloring)->check(CLI::IsMember({"per-sensor"}));
  exp_cmd->add_option("--in", exp.in)->required();
  exp_cmd->add_option("--samples", exp.samples);
  exp_cmd->add_option("--out", exp.out)->required();
  exp_cmd->callback([&] { action = [&] { return run_export(exp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
