#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spoc/geometry.hpp"

namespace spoc {

// Indexed triangle mesh. Construction through `TriangleMesh::create` validates
// indices, coordinates and face areas.
class TriangleMesh {
 public:
  using Face = std::array<std::uint32_t, 3>;

  static constexpr double kMinFaceArea = 1e-12;

  TriangleMesh() = default;

  // Throws ParseError on out-of-range indices or non-finite coordinates and
  // DegenerateFaceError listing every face with area <= kMinFaceArea.
  static TriangleMesh create(std::vector<Vec3> vertices, std::vector<Face> faces,
                             std::string name = {});

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::string& name() const { return name_; }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  std::array<Vec3, 3> triangle(std::size_t f) const {
    const Face& t = faces_[f];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
  }
  // Unit normal oriented by winding (right-hand rule).
  Vec3 face_normal(std::size_t f) const;
  double face_area(std::size_t f) const;
  Aabb bounds() const;

  // Concatenates two meshes (vertex indices of `other` are shifted).
  TriangleMesh merged(const TriangleMesh& other) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::string name_;
};

// Wavefront OBJ: `v` and `f` records are read, `vn`/`vt`/groups are ignored,
// polygons are fan-triangulated. Face index errors name the 0-based face.
TriangleMesh parse_obj(std::istream& in, std::string name = {});
TriangleMesh load_obj(const std::filesystem::path& path);
void write_obj(std::ostream& out, const TriangleMesh& mesh);
void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh);

struct SurfaceSample {
  Vec3 position;
  Vec3 normal;     // unit
  double weight{}; // m^2 of surface represented
  std::uint32_t id{};
  std::uint32_t face{};  // source triangle
};

struct SampleSet {
  std::vector<SurfaceSample> samples;
  double grid_pitch{};

  std::size_t size() const { return samples.size(); }
  const SurfaceSample& operator[](std::size_t i) const { return samples[i]; }
  double total_weight() const;
  std::uint64_t content_hash() const;

  // Builds a set from bare points (unit weight, +z normal); used by the
  // clustering routines and tests that only need positions.
  static SampleSet from_points(const std::vector<Vec3>& points);
};

// Rasterizes every triangle on a barycentric lattice: a face of area A is
// split into n^2 congruent sub-triangles with n = max(1, ceil(sqrt(A) / pitch)),
// one sample at each sub-triangle centroid, weight A / n^2.
// Samples whose normal has z < -downward_threshold are dropped.
SampleSet sample_surface(const TriangleMesh& mesh, double pitch, double downward_threshold = 0.0);

struct PlaneRegion {
  double z{};
  double x0{}, y0{}, x1{}, y1{};
};

struct BoxRegion {
  Vec3 lo, hi;
};

using CandidateRegion = std::variant<PlaneRegion, BoxRegion>;

enum class RegionKind { PlaneAtHeight, Box, ExplicitList };

std::string to_string(RegionKind kind);
RegionKind region_kind_from_string(const std::string& s);

struct CandidateSet {
  std::vector<Vec3> positions;
  RegionKind region_kind{RegionKind::ExplicitList};
  std::optional<CandidateRegion> region;
  double pitch{};

  std::size_t size() const { return positions.size(); }
  const Vec3& operator[](std::size_t j) const { return positions[j]; }
  std::uint64_t content_hash() const;

  // Drops exact duplicates, keeping first-occurrence order.
  static CandidateSet from_positions(std::vector<Vec3> positions);
};

// Regular lattice at `pitch` anchored at the region's lower corner. Plane
// regions give positions at exactly the plane height.
CandidateSet generate_candidates(const CandidateRegion& region, double pitch);

// Lattice points of `region` at `pitch` that fall inside the axis-aligned box
// `window` (used by local refinement to enumerate a neighborhood).
std::vector<Vec3> lattice_points_in(const CandidateRegion& region, double pitch, const Aabb& window);

}  // namespace spoc
