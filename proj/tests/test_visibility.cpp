#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "spoc/errors.hpp"
#include "spoc/scene.hpp"
#include "spoc/visibility.hpp"

using namespace spoc;

namespace {

TriangleMesh single_triangle() {
  return TriangleMesh::create({{-1, -1, 1}, {1, -1, 1}, {0, 1, 1}}, {{0, 1, 2}});
}

std::vector<Triangle> all_triangles(const TriangleMesh& mesh) {
  std::vector<Triangle> out;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) out.push_back(mesh.triangle(f));
  return out;
}

void check_node_containment(const Bvh& bvh, std::uint32_t id, std::vector<int>& seen) {
  const auto& node = bvh.nodes()[id];
  if (node.is_leaf()) {
    for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
      const std::uint32_t t = bvh.triangle_order()[k];
      seen[t]++;
      for (const Vec3& v : bvh.triangles()[t]) CHECK(node.box.contains(v));
    }
    return;
  }
  for (std::uint32_t child : {node.first, node.second}) {
    const Aabb& b = bvh.nodes()[child].box;
    CHECK(node.box.contains(b.lo));
    CHECK(node.box.contains(b.hi));
    check_node_containment(bvh, child, seen);
  }
}

}  // namespace

TEST_CASE("bvh structure") {
  SUBCASE("single triangle is one leaf") {
    const Bvh bvh = build_bvh(single_triangle());
    REQUIRE(bvh.nodes().size() == 1);
    CHECK(bvh.nodes()[0].is_leaf());
  }
  SUBCASE("disjoint triangles are partitioned") {
    std::vector<Vec3> v;
    std::vector<TriangleMesh::Face> f;
    for (std::uint32_t i = 0; i < 8; ++i) {
      const double x = 3.0 * i;
      v.insert(v.end(), {{x, 0, 0}, {x + 1, 0, 0}, {x, 1, 0}});
      f.push_back({3 * i, 3 * i + 1, 3 * i + 2});
    }
    const TriangleMesh mesh = TriangleMesh::create(v, f);
    const Bvh bvh = build_bvh(mesh);
    CHECK(bvh.depth() >= 1);
    std::vector<int> seen(8, 0);
    check_node_containment(bvh, 0, seen);
    for (int s : seen) CHECK(s == 1);
    CHECK(bvh.bounds().lo == mesh.bounds().lo);
    CHECK(bvh.bounds().hi == mesh.bounds().hi);
  }
  SUBCASE("room scene containment and root box") {
    const TriangleMesh mesh = gen_room(default_room());
    const Bvh bvh = build_bvh(mesh);
    std::vector<int> seen(mesh.num_faces(), 0);
    check_node_containment(bvh, 0, seen);
    for (int s : seen) CHECK(s == 1);
    CHECK(bvh.bounds().lo == mesh.bounds().lo);
    CHECK(bvh.bounds().hi == mesh.bounds().hi);
  }
  SUBCASE("construction is deterministic") {
    const TriangleMesh mesh = gen_terrain({3, 5, 5, 6, 0.3});
    const Bvh a = build_bvh(mesh);
    const Bvh b = build_bvh(mesh);
    CHECK(a.triangle_order() == b.triangle_order());
    CHECK(a.nodes().size() == b.nodes().size());
  }
}

TEST_CASE("segment occlusion examples") {
  const Bvh bvh = build_bvh(single_triangle());
  CHECK(segment_occluded(bvh, {0, 0, 0}, {0, 0, 2}));
  CHECK_FALSE(segment_occluded(bvh, {5, 5, 0}, {5, 5, 2}));
  // Leaving a vertex along the face normal only touches at the endpoint.
  CHECK_FALSE(segment_occluded(bvh, {-1, -1, 1}, {-1, -1, 3}));
  CHECK_FALSE(segment_occluded(bvh, {-1, -1, 3}, {-1, -1, 1}));
  // Sample on the face itself, sensor above.
  CHECK_FALSE(segment_occluded(bvh, {0, 0, 1}, {0.3, 0.2, 4}));
  // Segment ending short of the face.
  CHECK_FALSE(segment_occluded(bvh, {0, 0, 0}, {0, 0, 0.9}));
}

TEST_CASE("shared edges count once and block") {
  // Two triangles sharing the edge x = 0; a segment through the edge hits.
  const TriangleMesh mesh =
      TriangleMesh::create({{0, -1, 1}, {0, 1, 1}, {-1, 0, 1}, {1, 0, 1}}, {{0, 1, 2}, {0, 3, 1}});
  const Bvh bvh = build_bvh(mesh);
  CHECK(segment_occluded(bvh, {0, 0.25, 0}, {0, 0.25, 2}));
  CHECK(segment_occluded(bvh, {0, 0, 0}, {0, 0, 2}));
}

TEST_CASE("bvh agrees with linear scan and an independent oracle") {
  std::mt19937_64 rng(11);
  const std::vector<TriangleMesh> scenes{gen_room(default_room()), gen_terrain({7, 8, 8, 10, 0.6})};
  for (const TriangleMesh& mesh : scenes) {
    const Bvh bvh = build_bvh(mesh);
    const auto tris = all_triangles(mesh);
    const Aabb box = mesh.bounds();
    std::uniform_real_distribution<double> ux(box.lo.x - 0.5, box.hi.x + 0.5);
    std::uniform_real_distribution<double> uy(box.lo.y - 0.5, box.hi.y + 0.5);
    std::uniform_real_distribution<double> uz(box.lo.z - 0.5, box.hi.z + 0.5);
    int compared = 0;
    for (int s = 0; s < 1000; ++s) {
      const Vec3 a{ux(rng), uy(rng), uz(rng)};
      const Vec3 b{ux(rng), uy(rng), uz(rng)};
      const double eps = 1e-6 * distance(a, b);
      const bool fast = segment_occluded(bvh, a, b);
      CHECK(fast == segment_occluded_linear(tris, a, b));
      CHECK(fast == segment_occluded(bvh, b, a));
      double margin = 0.0;
      const bool ref = oracle::segment_blocked(tris, a, b, eps, &margin);
      if (margin > 1e-9) {
        CHECK(fast == ref);
        ++compared;
      }
    }
    CHECK(compared > 900);
  }
}

TEST_CASE("visibility matrix") {
  SUBCASE("no obstacles gives all ones") {
    const TriangleMesh floor = gen_terrain({0, 2, 2, 2, 0.0});
    const SampleSet samples = sample_surface(floor, 0.5);
    const CandidateSet cands = generate_candidates(PlaneRegion{1.5, 0, 0, 2, 2}, 1.0);
    const VisibilityMatrix vis = visibility_matrix(build_bvh(floor), samples, cands);
    CHECK(vis.count() == samples.size() * cands.size());
  }
  SUBCASE("a separating wall gives all zeros") {
    const TriangleMesh floor = gen_terrain({0, 2, 2, 2, 0.0});
    const TriangleMesh wall = TriangleMesh::create(
        {{-10, -10, 1}, {10, -10, 1}, {10, 10, 1}, {-10, 10, 1}}, {{0, 1, 2}, {0, 2, 3}});
    const SampleSet samples = sample_surface(floor, 0.5);
    const CandidateSet cands = generate_candidates(PlaneRegion{1.5, 0, 0, 2, 2}, 1.0);
    const VisibilityMatrix vis = visibility_matrix(build_bvh(floor.merged(wall)), samples, cands);
    CHECK(vis.count() == 0);
  }
  SUBCASE("room scene matches the brute force checker, any thread count") {
    const TriangleMesh room = gen_room(default_room());
    const Bvh bvh = build_bvh(room);
    const SampleSet samples = sample_surface(room, 0.5);
    const CandidateSet cands = generate_candidates(PlaneRegion{2.3, 0.2, 0.3, 3.8, 2.3}, 0.8);
    const VisibilityMatrix one = visibility_matrix(bvh, samples, cands, std::nullopt, 1);
    const VisibilityMatrix many = visibility_matrix(bvh, samples, cands, std::nullopt, 7);
    CHECK(one == many);
    const auto tris = all_triangles(room);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::size_t j = 0; j < cands.size(); ++j) {
        REQUIRE(one.get(i, j) == !segment_occluded_linear(tris, samples[i].position, cands[j]));
      }
    }
    CHECK(one.count() > 0);
    CHECK(one.count() < samples.size() * cands.size());
  }
}

TEST_CASE("one box hides the floor behind it from a corner sensor") {
  RoomSpec spec;
  spec.boxes.push_back({{1.5, 1.0, 0.0}, {2.5, 2.0, 1.5}});
  const TriangleMesh room = gen_room(spec);
  const Bvh bvh = build_bvh(room);
  const CandidateSet corner = CandidateSet::from_positions({{0.1, 0.1, 2.0}});
  // Floor points just past the box on the line from the corner.
  const SampleSet behind = SampleSet::from_points({{3.0, 2.4, 0.0}, {2.8, 2.2, 0.0}});
  const SampleSet front = SampleSet::from_points({{1.0, 0.5, 0.0}});
  const auto tris = all_triangles(room);
  const VisibilityMatrix vb = visibility_matrix(bvh, behind, corner);
  const VisibilityMatrix vf = visibility_matrix(bvh, front, corner);
  for (std::size_t i = 0; i < behind.size(); ++i) {
    CHECK_FALSE(vb.get(i, 0));
    CHECK(oracle::segment_blocked(tris, behind[i].position, corner[0], 1e-9));
  }
  CHECK(vf.get(0, 0));
}

TEST_CASE("spvm round trip and validation") {
  const TriangleMesh room = gen_room(default_room());
  const SampleSet samples = sample_surface(room, 0.7);
  const CandidateSet cands = generate_candidates(PlaneRegion{2.3, 0.2, 0.3, 3.8, 2.3}, 1.1);
  const VisibilityMatrix vis = visibility_matrix(build_bvh(room), samples, cands);
  std::stringstream buf;
  write_spvm(buf, vis);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "SPVM");
  CHECK(bytes.size() == 4 + 4 + 8 * 4 + (samples.size() * cands.size() + 7) / 8);
  std::istringstream in(bytes);
  const VisibilityMatrix back = read_spvm(in);
  CHECK(back == vis);
  CHECK(back.matches(samples, cands));

  // Packed bit layout: bit i*M+j, LSB first.
  const std::size_t m = cands.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t bit = i * m + j;
      const auto byte = static_cast<unsigned char>(bytes[40 + bit / 8]);
      REQUIRE(((byte >> (bit % 8)) & 1U) == (vis.get(i, j) ? 1U : 0U));
    }
  }

  std::istringstream bad_magic("SPVX" + bytes.substr(4));
  CHECK_THROWS_AS(read_spvm(bad_magic), ParseError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_spvm(truncated), ParseError);

  const CandidateSet other = generate_candidates(PlaneRegion{2.2, 0.2, 0.3, 3.8, 2.3}, 1.1);
  CHECK_FALSE(vis.matches(samples, other));
}
