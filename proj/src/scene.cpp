#include "spoc/scene.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "spoc/errors.hpp"

namespace spoc {

TriangleMesh gen_terrain(const TerrainSpec& spec) {
  if (spec.cells == 0) throw std::invalid_argument("terrain needs at least one cell");
  if (!(spec.size_x > 0.0 && spec.size_y > 0.0)) throw std::invalid_argument("terrain extent must be positive");

  struct Wave {
    double fx, fy, phase;
  };
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<Wave, 4> waves{};
  const double two_pi = 2.0 * std::numbers::pi;
  for (Wave& w : waves) {
    // Wavelengths between half and twice the extent keep the surface gentle.
    const double cycles_x = 0.5 + 1.5 * unit(rng);
    const double cycles_y = 0.5 + 1.5 * unit(rng);
    w.fx = two_pi * cycles_x / spec.size_x;
    w.fy = two_pi * cycles_y / spec.size_y;
    w.phase = two_pi * unit(rng);
  }

  const std::size_t n = spec.cells;
  std::vector<Vec3> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (std::size_t iy = 0; iy <= n; ++iy) {
    const double y = spec.size_y * static_cast<double>(iy) / static_cast<double>(n);
    for (std::size_t ix = 0; ix <= n; ++ix) {
      const double x = spec.size_x * static_cast<double>(ix) / static_cast<double>(n);
      double z = 0.0;
      if (spec.amplitude != 0.0) {
        for (const Wave& w : waves) z += std::sin(w.fx * x + w.fy * y + w.phase);
        z *= spec.amplitude;
      }
      vertices.push_back({x, y, z});
    }
  }
  std::vector<TriangleMesh::Face> faces;
  faces.reserve(2 * n * n);
  auto at = [n](std::size_t ix, std::size_t iy) { return static_cast<std::uint32_t>(iy * (n + 1) + ix); };
  for (std::size_t iy = 0; iy < n; ++iy) {
    for (std::size_t ix = 0; ix < n; ++ix) {
      faces.push_back({at(ix, iy), at(ix + 1, iy), at(ix + 1, iy + 1)});
      faces.push_back({at(ix, iy), at(ix + 1, iy + 1), at(ix, iy + 1)});
    }
  }
  return TriangleMesh::create(std::move(vertices), std::move(faces),
                              "terrain-" + std::to_string(spec.seed));
}

namespace {

// Appends the 12 triangles of box [lo, hi]; normals face out, or in when
// `inward` is set.
void add_box(std::vector<Vec3>& vertices, std::vector<TriangleMesh::Face>& faces,
             const Vec3& lo, const Vec3& hi, bool inward) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  for (int c = 0; c < 8; ++c) {
    vertices.push_back({(c & 1) ? hi.x : lo.x, (c & 2) ? hi.y : lo.y, (c & 4) ? hi.z : lo.z});
  }
  // Quads listed counter-clockwise seen from outside.
  static constexpr std::array<std::array<std::uint32_t, 4>, 6> quads{{
      {0, 2, 3, 1},  // z = lo
      {4, 5, 7, 6},  // z = hi
      {0, 1, 5, 4},  // y = lo
      {2, 6, 7, 3},  // y = hi
      {0, 4, 6, 2},  // x = lo
      {1, 3, 7, 5},  // x = hi
  }};
  for (const auto& q : quads) {
    TriangleMesh::Face a{base + q[0], base + q[1], base + q[2]};
    TriangleMesh::Face b{base + q[0], base + q[2], base + q[3]};
    if (inward) {
      std::swap(a[1], a[2]);
      std::swap(b[1], b[2]);
    }
    faces.push_back(a);
    faces.push_back(b);
  }
}

bool overlaps(const BoxObstacle& a, const BoxObstacle& b) {
  for (int d = 0; d < 3; ++d) {
    if (a.hi[d] <= b.lo[d] || b.hi[d] <= a.lo[d]) return false;
  }
  return true;
}

}  // namespace

TriangleMesh gen_room(const RoomSpec& spec) {
  if (!(spec.width > 0.0 && spec.depth > 0.0 && spec.height > 0.0)) {
    throw InconsistentInputError("room extent must be positive");
  }
  const Vec3 room_hi{spec.width, spec.depth, spec.height};
  for (std::size_t b = 0; b < spec.boxes.size(); ++b) {
    const BoxObstacle& box = spec.boxes[b];
    for (int d = 0; d < 3; ++d) {
      if (!(box.lo[d] < box.hi[d])) {
        throw InconsistentInputError("obstacle " + std::to_string(b) + " is empty");
      }
      if (box.lo[d] < 0.0 || box.hi[d] > room_hi[d]) {
        throw InconsistentInputError("obstacle " + std::to_string(b) + " is not inside the room");
      }
    }
    for (std::size_t c = 0; c < b; ++c) {
      if (overlaps(spec.boxes[c], box)) {
        throw InconsistentInputError("obstacles " + std::to_string(c) + " and " + std::to_string(b) +
                                     " overlap");
      }
    }
  }
  std::vector<Vec3> vertices;
  std::vector<TriangleMesh::Face> faces;
  add_box(vertices, faces, {0.0, 0.0, 0.0}, room_hi, true);
  for (const BoxObstacle& box : spec.boxes) add_box(vertices, faces, box.lo, box.hi, false);
  return TriangleMesh::create(std::move(vertices), std::move(faces), "room");
}

RoomSpec default_room() {
  RoomSpec room;
  room.boxes.push_back({{0.4, 0.8, 0.0}, {2.4, 1.8, 0.7}});  // bed
  room.boxes.push_back({{3.3, 0.2, 0.0}, {3.9, 2.6, 1.0}});  // counter
  return room;
}

}  // namespace spoc
