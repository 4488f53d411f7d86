#include "spoc/io.hpp"

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "spoc/errors.hpp"

namespace spoc {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::uint64_t mesh_hash(const TriangleMesh& mesh) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(mesh.num_vertices()));
  for (const Vec3& v : mesh.vertices()) h.add(v);
  h.add(static_cast<std::uint64_t>(mesh.num_faces()));
  for (const auto& f : mesh.faces()) {
    for (std::uint32_t v : f) h.add(static_cast<std::uint64_t>(v));
  }
  return h.value();
}

Json vec_to_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

namespace {

void expect_type(const Json& j, const char* type) {
  if (!j.is_object() || j.value("type", std::string{}) != type) {
    throw ParseError(std::string("expected a '") + type + "' document");
  }
  if (j.value("format_version", 0) != kFormatVersion) {
    throw ParseError(std::string("unsupported format_version in '") + type + "' document");
  }
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed ") + what + ": " + e.what());
  }
}

// JSON has no infinity; unbounded values are written as null.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json samples_to_json(const SampleSet& samples) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = "samples";
  out["grid_pitch"] = samples.grid_pitch;
  out["count"] = samples.size();
  out["content_hash"] = hash_hex(samples.content_hash());
  Json list = Json::array();
  for (const SurfaceSample& s : samples.samples) {
    list.push_back({{"id", s.id},
                    {"face", s.face},
                    {"position", vec_to_json(s.position)},
                    {"normal", vec_to_json(s.normal)},
                    {"weight", s.weight}});
  }
  out["samples"] = std::move(list);
  return out;
}

SampleSet samples_from_json(const Json& j) {
  expect_type(j, "samples");
  return guarded("samples", [&] {
    SampleSet set;
    set.grid_pitch = j.at("grid_pitch").get<double>();
    for (const Json& s : j.at("samples")) {
      set.samples.push_back({vec_from_json(s.at("position")), vec_from_json(s.at("normal")),
                             s.at("weight").get<double>(), s.at("id").get<std::uint32_t>(),
                             s.at("face").get<std::uint32_t>()});
    }
    return set;
  });
}

Json region_to_json(const CandidateRegion& region) {
  if (const auto* p = std::get_if<PlaneRegion>(&region)) {
    return {{"z", p->z}, {"rect", {p->x0, p->y0, p->x1, p->y1}}};
  }
  const auto& b = std::get<BoxRegion>(region);
  return {{"lo", vec_to_json(b.lo)}, {"hi", vec_to_json(b.hi)}};
}

CandidateRegion region_from_json(const Json& j) {
  return guarded("region", [&]() -> CandidateRegion {
    if (j.contains("z")) {
      const Json& r = j.at("rect");
      return PlaneRegion{j.at("z").get<double>(), r.at(0).get<double>(), r.at(1).get<double>(),
                         r.at(2).get<double>(), r.at(3).get<double>()};
    }
    return BoxRegion{vec_from_json(j.at("lo")), vec_from_json(j.at("hi"))};
  });
}

Json candidates_to_json(const CandidateSet& candidates) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = "candidates";
  out["region_kind"] = to_string(candidates.region_kind);
  out["region"] = candidates.region ? region_to_json(*candidates.region) : Json(nullptr);
  out["pitch"] = candidates.pitch;
  out["count"] = candidates.size();
  out["content_hash"] = hash_hex(candidates.content_hash());
  Json list = Json::array();
  for (const Vec3& p : candidates.positions) list.push_back(vec_to_json(p));
  out["positions"] = std::move(list);
  return out;
}

CandidateSet candidates_from_json(const Json& j) {
  expect_type(j, "candidates");
  return guarded("candidates", [&] {
    CandidateSet set;
    for (const Json& p : j.at("positions")) set.positions.push_back(vec_from_json(p));
    set.region_kind = region_kind_from_string(j.at("region_kind").get<std::string>());
    if (!j.at("region").is_null()) set.region = region_from_json(j.at("region"));
    set.pitch = j.at("pitch").get<double>();
    return set;
  });
}

Json report_to_json(const CoverageReport& report) {
  return {{"objective", number_or_null(report.objective)},
          {"covered_count", report.covered_ids.size()},
          {"n_samples", report.n_samples},
          {"coverage_ratio", report.coverage_ratio()},
          {"covered_weight", report.covered_weight},
          {"covered_ids", report.covered_ids}};
}

Json solve_to_json(const SolveResult& result, bool with_timing) {
  Json out;
  out["status"] = to_string(result.status);
  out["primal"] = result.primal;
  out["dual_bound"] = number_or_null(result.dual_bound);
  out["gap"] = result.gap;
  out["nodes"] = result.nodes;
  if (with_timing) out["elapsed"] = result.elapsed;
  return out;
}

namespace {

Json phase_to_json(const PhaseReport& phase, bool with_timing) {
  Json out;
  out["method"] = phase.method;
  out["objective"] = number_or_null(phase.objective);
  out["bound"] = number_or_null(phase.bound);
  out["gap"] = phase.gap;
  if (with_timing) out["elapsed"] = phase.elapsed;
  Json pos = Json::array();
  for (const Vec3& p : phase.positions) pos.push_back(vec_to_json(p));
  out["positions"] = std::move(pos);
  return out;
}

}  // namespace

Json pipeline_to_json(const PipelineReport& report, bool with_timing) {
  Json out;
  out["format_version"] = kFormatVersion;
  out["type"] = "pipeline";
  out["problem"] = static_cast<int>(report.problem);
  out["k"] = report.k;
  out["fine_samples"] = report.fine_samples;
  out["phase1"] = phase_to_json(report.phase1, with_timing);
  out["phase2"] = phase_to_json(report.phase2, with_timing);
  out["phase1_factor"] = report.phase1_factor;
  out["certified_factor"] = report.certified_factor;
  return out;
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<int> assign_samples(const CoverageInstance& instance, const Placement& placement,
                                const std::vector<std::size_t>& covered) {
  std::vector<int> out(instance.n(), -1);
  for (std::size_t i : covered) {
    int best = -1;
    double best_phi = 0.0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < placement.size(); ++s) {
      const std::size_t j = placement.selected[s];
      if (!instance.visible(i, j)) continue;
      const double phi = instance.kind() == QualityKind::Visibility ? 1.0 : instance.phi(i, j);
      const double d = instance.distance(i, j);
      if (best < 0 || phi > best_phi || (phi == best_phi && d < best_d)) {
        best = static_cast<int>(s);
        best_phi = phi;
        best_d = d;
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<int> assign_nearest(const SampleSet& samples, const std::vector<Vec3>& sensors) {
  std::vector<int> out(samples.size(), -1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < sensors.size(); ++s) {
      const double d = distance(samples[i].position, sensors[s]);
      if (d < best) {
        best = d;
        out[i] = static_cast<int>(s);
      }
    }
  }
  return out;
}

Rgb sensor_color(std::size_t slot) {
  static constexpr std::array<Rgb, 12> palette{{
      {230, 25, 75},
      {60, 180, 75},
      {0, 130, 200},
      {245, 130, 48},
      {145, 30, 180},
      {70, 240, 240},
      {240, 50, 230},
      {210, 245, 60},
      {0, 128, 128},
      {170, 110, 40},
      {128, 0, 0},
      {0, 0, 128},
  }};
  return palette[slot % palette.size()];
}

void write_colored_ply(std::ostream& out, const SampleSet& samples, const std::vector<int>& assignment) {
  if (assignment.size() != samples.size()) {
    throw InconsistentInputError("assignment has " + std::to_string(assignment.size()) +
                                 " entries for " + std::to_string(samples.size()) + " samples");
  }
  out << "ply\nformat ascii 1.0\nelement vertex " << samples.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  char buf[160];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vec3& p = samples[i].position;
    const Rgb c = assignment[i] < 0 ? kUncovered : sensor_color(static_cast<std::size_t>(assignment[i]));
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %u %u %u\n", p.x, p.y, p.z, unsigned{c.r},
                  unsigned{c.g}, unsigned{c.b});
    out << buf;
  }
}

}  // namespace spoc
