#include "spoc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "spoc/errors.hpp"

namespace spoc {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

// Parses one OBJ face token ("7", "7/1", "7//3", "-1") into a 0-based index.
long parse_face_index(const std::string& token, std::size_t vertex_count, std::size_t line_no) {
  const std::string head = token.substr(0, token.find('/'));
  long value = 0;
  try {
    std::size_t used = 0;
    value = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed face index '" + token + "'");
  }
  if (value == 0) {
    throw ParseError("line " + std::to_string(line_no) + ": face index 0 is invalid in OBJ");
  }
  // Negative indices are relative to the vertices read so far.
  return value > 0 ? value - 1 : static_cast<long>(vertex_count) + value;
}

}  // namespace

TriangleMesh TriangleMesh::create(std::vector<Vec3> vertices, std::vector<Face> faces,
                                  std::string name) {
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    if (!is_finite(vertices[v])) {
      throw ParseError("vertex " + std::to_string(v) + " has a non-finite coordinate");
    }
  }
  std::vector<std::size_t> degenerate;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (std::uint32_t idx : faces[f]) {
      if (idx >= vertices.size()) {
        throw ParseError("face " + std::to_string(f) + " references vertex " +
                         std::to_string(idx + 1) + " but the mesh has only " +
                         std::to_string(vertices.size()) + " vertices");
      }
    }
    const auto& t = faces[f];
    if (!(triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) > kMinFaceArea)) {
      degenerate.push_back(f);
    }
  }
  if (!degenerate.empty()) {
    std::ostringstream msg;
    msg << "degenerate face(s) with area <= " << kMinFaceArea << ":";
    for (std::size_t i = 0; i < degenerate.size() && i < 20; ++i) msg << ' ' << degenerate[i];
    if (degenerate.size() > 20) msg << " ... (" << degenerate.size() << " total)";
    throw DegenerateFaceError(msg.str(), std::move(degenerate));
  }
  TriangleMesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.faces_ = std::move(faces);
  mesh.name_ = std::move(name);
  return mesh;
}

Vec3 TriangleMesh::face_normal(std::size_t f) const {
  const auto [a, b, c] = triangle(f);
  return normalized(cross(b - a, c - a));
}

double TriangleMesh::face_area(std::size_t f) const {
  const auto [a, b, c] = triangle(f);
  return triangle_area(a, b, c);
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices_) box.extend(v);
  return box;
}

TriangleMesh TriangleMesh::merged(const TriangleMesh& other) const {
  std::vector<Vec3> verts = vertices_;
  verts.insert(verts.end(), other.vertices_.begin(), other.vertices_.end());
  std::vector<Face> faces = faces_;
  const auto offset = static_cast<std::uint32_t>(vertices_.size());
  for (Face f : other.faces_) faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
  return create(std::move(verts), std::move(faces), name_);
}

TriangleMesh parse_obj(std::istream& in, std::string name) {
  std::vector<Vec3> vertices;
  std::vector<TriangleMesh::Face> faces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed vertex record");
      }
      vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ls >> tok) idx.push_back(parse_face_index(tok, vertices.size(), line_no));
      if (idx.size() < 3) {
        throw ParseError("line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
      }
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
        for (long v : {idx[0], idx[i], idx[i + 1]}) {
          if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
            throw ParseError("face " + std::to_string(faces.size()) +
                             " references a vertex index out of range");
          }
        }
        faces.push_back({static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[i]),
                         static_cast<std::uint32_t>(idx[i + 1])});
      }
    } else if (tag == "o" && name.empty()) {
      std::getline(ls >> std::ws, name);
    }
    // vn, vt, g, s, usemtl, mtllib: ignored.
  }
  return TriangleMesh::create(std::move(vertices), std::move(faces), std::move(name));
}

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  return parse_obj(in, path.stem().string());
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  out << std::setprecision(17);
  if (!mesh.name().empty()) out << "o " << mesh.name() << '\n';
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void save_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mesh file " + path.string());
  write_obj(out, mesh);
}

double SampleSet::total_weight() const {
  double total = 0.0;
  for (const auto& s : samples) total += s.weight;
  return total;
}

std::uint64_t SampleSet::content_hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(samples.size()));
  for (const auto& s : samples) {
    h.add(s.position);
    h.add(s.normal);
    h.add(s.weight);
  }
  return h.value();
}

SampleSet SampleSet::from_points(const std::vector<Vec3>& points) {
  SampleSet set;
  set.samples.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    set.samples.push_back({points[i], {0, 0, 1}, 1.0, static_cast<std::uint32_t>(i), 0});
  }
  return set;
}

SampleSet sample_surface(const TriangleMesh& mesh, double pitch, double downward_threshold) {
  if (!(pitch > 0.0)) throw std::invalid_argument("sampling pitch must be positive");
  if (!(downward_threshold >= -1.0 && downward_threshold <= 1.0)) {
    throw std::invalid_argument("downward threshold must lie in [-1, 1]");
  }
  SampleSet set;
  set.grid_pitch = pitch;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 normal = mesh.face_normal(f);
    if (normal.z < -downward_threshold) continue;
    const auto [a, b, c] = mesh.triangle(f);
    const double area = mesh.face_area(f);
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(std::sqrt(area) / pitch)));
    const double weight = area / static_cast<double>(n * n);
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const double inv_n = 1.0 / static_cast<double>(n);
    auto emit = [&](double u, double v) {
      set.samples.push_back({a + ab * (u * inv_n) + ac * (v * inv_n), normal, weight,
                             static_cast<std::uint32_t>(set.samples.size()),
                             static_cast<std::uint32_t>(f)});
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; i + j < n; ++j) {
        emit(static_cast<double>(i) + 1.0 / 3.0, static_cast<double>(j) + 1.0 / 3.0);
        if (i + j + 2 <= n) {
          emit(static_cast<double>(i) + 2.0 / 3.0, static_cast<double>(j) + 2.0 / 3.0);
        }
      }
    }
  }
  if (set.samples.empty()) {
    throw EmptySurfaceError("no surface samples remain after the downward-facing filter");
  }
  return set;
}

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::PlaneAtHeight:
      return "plane-at-height";
    case RegionKind::Box:
      return "box";
    case RegionKind::ExplicitList:
      return "explicit-list";
  }
  return "explicit-list";
}

RegionKind region_kind_from_string(const std::string& s) {
  if (s == "plane-at-height") return RegionKind::PlaneAtHeight;
  if (s == "box") return RegionKind::Box;
  if (s == "explicit-list") return RegionKind::ExplicitList;
  throw ParseError("unknown region kind '" + s + "'");
}

std::uint64_t CandidateSet::content_hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(positions.size()));
  for (const Vec3& p : positions) h.add(p);
  return h.value();
}

CandidateSet CandidateSet::from_positions(std::vector<Vec3> positions) {
  struct Hash {
    std::size_t operator()(const Vec3& v) const {
      Fnv1a h;
      h.add(v);
      return static_cast<std::size_t>(h.value());
    }
  };
  CandidateSet set;
  std::unordered_set<Vec3, Hash> seen;
  for (const Vec3& p : positions) {
    if (seen.insert(p).second) set.positions.push_back(p);
  }
  return set;
}

namespace {

std::size_t lattice_count(double lo, double hi, double pitch) {
  return static_cast<std::size_t>(std::floor((hi - lo) / pitch + 1e-9)) + 1;
}

// Inclusive lattice index range [first, last] of lo + i*pitch inside [wlo, whi].
// Returns false when the range is empty.
bool lattice_window(double lo, double pitch, std::size_t count, double wlo, double whi,
                    std::size_t& first, std::size_t& last) {
  const double f = std::ceil((wlo - lo) / pitch - 1e-9);
  const double l = std::floor((whi - lo) / pitch + 1e-9);
  const double fc = std::max(f, 0.0);
  const double lc = std::min(l, static_cast<double>(count) - 1.0);
  if (fc > lc) return false;
  first = static_cast<std::size_t>(fc);
  last = static_cast<std::size_t>(lc);
  return true;
}

void check_region(const CandidateRegion& region, double pitch) {
  if (!(pitch > 0.0)) throw std::invalid_argument("candidate pitch must be positive");
  const bool ok = std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, PlaneRegion>) {
          return r.x1 >= r.x0 && r.y1 >= r.y0 && std::isfinite(r.z);
        } else {
          return r.hi.x >= r.lo.x && r.hi.y >= r.lo.y && r.hi.z >= r.lo.z;
        }
      },
      region);
  if (!ok) throw std::invalid_argument("candidate region is empty");
}

}  // namespace

CandidateSet generate_candidates(const CandidateRegion& region, double pitch) {
  check_region(region, pitch);
  std::vector<Vec3> positions;
  RegionKind kind{};
  if (const auto* plane = std::get_if<PlaneRegion>(&region)) {
    kind = RegionKind::PlaneAtHeight;
    const std::size_t nx = lattice_count(plane->x0, plane->x1, pitch);
    const std::size_t ny = lattice_count(plane->y0, plane->y1, pitch);
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        positions.push_back({plane->x0 + static_cast<double>(ix) * pitch,
                             plane->y0 + static_cast<double>(iy) * pitch, plane->z});
      }
    }
  } else {
    const auto& box = std::get<BoxRegion>(region);
    kind = RegionKind::Box;
    const std::size_t nx = lattice_count(box.lo.x, box.hi.x, pitch);
    const std::size_t ny = lattice_count(box.lo.y, box.hi.y, pitch);
    const std::size_t nz = lattice_count(box.lo.z, box.hi.z, pitch);
    for (std::size_t iz = 0; iz < nz; ++iz) {
      for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
          positions.push_back({box.lo.x + static_cast<double>(ix) * pitch,
                               box.lo.y + static_cast<double>(iy) * pitch,
                               box.lo.z + static_cast<double>(iz) * pitch});
        }
      }
    }
  }
  CandidateSet set = CandidateSet::from_positions(std::move(positions));
  set.region_kind = kind;
  set.region = region;
  set.pitch = pitch;
  return set;
}

std::vector<Vec3> lattice_points_in(const CandidateRegion& region, double pitch, const Aabb& window) {
  check_region(region, pitch);
  std::vector<Vec3> out;
  if (const auto* plane = std::get_if<PlaneRegion>(&region)) {
    if (window.lo.z > plane->z || window.hi.z < plane->z) return out;
    std::size_t fx, lx, fy, ly;
    if (!lattice_window(plane->x0, pitch, lattice_count(plane->x0, plane->x1, pitch), window.lo.x,
                        window.hi.x, fx, lx) ||
        !lattice_window(plane->y0, pitch, lattice_count(plane->y0, plane->y1, pitch), window.lo.y,
                        window.hi.y, fy, ly)) {
      return out;
    }
    for (std::size_t iy = fy; iy <= ly; ++iy) {
      for (std::size_t ix = fx; ix <= lx; ++ix) {
        out.push_back({plane->x0 + static_cast<double>(ix) * pitch,
                       plane->y0 + static_cast<double>(iy) * pitch, plane->z});
      }
    }
    return out;
  }
  const auto& box = std::get<BoxRegion>(region);
  std::size_t f[3], l[3];
  for (int axis = 0; axis < 3; ++axis) {
    if (!lattice_window(box.lo[axis], pitch, lattice_count(box.lo[axis], box.hi[axis], pitch),
                        window.lo[axis], window.hi[axis], f[axis], l[axis])) {
      return out;
    }
  }
  for (std::size_t iz = f[2]; iz <= l[2]; ++iz) {
    for (std::size_t iy = f[1]; iy <= l[1]; ++iy) {
      for (std::size_t ix = f[0]; ix <= l[0]; ++ix) {
        out.push_back({box.lo.x + static_cast<double>(ix) * pitch,
                       box.lo.y + static_cast<double>(iy) * pitch,
                       box.lo.z + static_cast<double>(iz) * pitch});
      }
    }
  }
  return out;
}

}  // namespace spoc
