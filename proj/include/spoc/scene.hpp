#pragma once

#include <cstdint>
#include <vector>

#include "spoc/geometry.hpp"
#include "spoc/mesh.hpp"

namespace spoc {

struct TerrainSpec {
  std::uint64_t seed{};
  double size_x = 10.0;
  double size_y = 10.0;
  std::size_t cells = 16;
  double amplitude = 0.5;
};

// Height field over [0, size_x] x [0, size_y]: amplitude times a sum of four
// seeded sinusoids (so |z| <= 4 * amplitude), two triangles per grid cell,
// normals pointing up. Bit-identical for equal specs.
TriangleMesh gen_terrain(const TerrainSpec& spec);

struct BoxObstacle {
  Vec3 lo;
  Vec3 hi;
};

struct RoomSpec {
  double width = 4.0;   // x
  double depth = 3.0;   // y
  double height = 2.5;  // z
  std::vector<BoxObstacle> boxes;
};

// Room [0, width] x [0, depth] x [0, height] whose six sides face inward,
// plus closed boxes facing outward (12 triangles each). Throws
// InconsistentInputError for a box that is empty, leaves the room, or
// overlaps another box with positive volume.
TriangleMesh gen_room(const RoomSpec& spec);

// The furnished room used by the examples and the trend checks: 4 x 3 x 2.5 m
// with a bed and a counter.
RoomSpec default_room();

}  // namespace spoc
