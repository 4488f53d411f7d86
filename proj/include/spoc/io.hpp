#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "spoc/driver.hpp"
#include "spoc/ilp.hpp"
#include "spoc/mesh.hpp"
#include "spoc/model.hpp"

namespace spoc {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

std::string hash_hex(std::uint64_t h);
std::uint64_t mesh_hash(const TriangleMesh& mesh);

Json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const Json& j);

Json samples_to_json(const SampleSet& samples);
SampleSet samples_from_json(const Json& j);

Json candidates_to_json(const CandidateSet& candidates);
CandidateSet candidates_from_json(const Json& j);

Json region_to_json(const CandidateRegion& region);
CandidateRegion region_from_json(const Json& j);

Json report_to_json(const CoverageReport& report);
Json solve_to_json(const SolveResult& result, bool with_timing);
Json pipeline_to_json(const PipelineReport& report, bool with_timing);

// Reads a JSON document; ParseError names the file on failure.
Json load_json(const std::filesystem::path& path);
// Two-space indented, trailing newline.
void save_json(const std::filesystem::path& path, const Json& j);

// For every sample, the slot (index into `sensors`) of the sensor that
// covers it best, or -1. `covered` must be sorted. Best means largest phi,
// ties and the 0/1 visibility kind broken by smaller distance, then slot.
std::vector<int> assign_samples(const CoverageInstance& instance, const Placement& placement,
                                const std::vector<std::size_t>& covered);

// Slot of the nearest position per sample (lowest slot on ties); used where
// occlusion is ignored.
std::vector<int> assign_nearest(const SampleSet& samples, const std::vector<Vec3>& sensors);

struct Rgb {
  std::uint8_t r, g, b;
};
inline constexpr Rgb kUncovered{255, 255, 255};
// Fixed 12-color cycle by sensor slot.
Rgb sensor_color(std::size_t slot);

// ASCII PLY with one colored vertex per sample; assignment -1 is white.
void write_colored_ply(std::ostream& out, const SampleSet& samples, const std::vector<int>& assignment);

}  // namespace spoc
