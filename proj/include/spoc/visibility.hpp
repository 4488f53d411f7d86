#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "spoc/geometry.hpp"
#include "spoc/mesh.hpp"

namespace spoc {

using Triangle = std::array<Vec3, 3>;

// Watertight segment/triangle test (Woop, Benthin & Wald style shear
// transform). Returns true iff the segment origin + t * dir hits the closed
// triangle for some t strictly inside (t_min, t_max). Coplanar segments miss.
bool segment_hits_triangle(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                           const Triangle& tri);

// Axis-aligned bounding volume hierarchy over mesh triangles. Immutable after
// construction; safe to share across threads.
class Bvh {
 public:
  static constexpr std::size_t kLeafSize = 4;

  struct Node {
    Aabb box;
    // Leaf: [first, first + count) into triangle_order(). Interior: children
    // at `first` (left) and `second` (right).
    std::uint32_t first{};
    std::uint32_t second{};
    std::uint32_t count{};
    bool is_leaf() const { return count > 0; }
  };

  Bvh() = default;
  explicit Bvh(const TriangleMesh& mesh);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& triangle_order() const { return order_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t depth() const { return depth_; }
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_.front().box; }

  // Any hit with t in (t_min, t_max) along origin + t * dir.
  bool any_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const;

 private:
  std::uint32_t build(std::vector<std::uint32_t>& ids, std::vector<Vec3>& centroids,
                      std::size_t begin, std::size_t end, std::size_t depth);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Triangle> triangles_;
  std::size_t depth_ = 0;
  double pad_ = 0.0;
};

Bvh build_bvh(const TriangleMesh& mesh);

// Default endpoint shrinkage is this fraction of the segment length.
inline constexpr double kDefaultRelativeEps = 1e-6;

// True iff the open segment from a + eps*u to b - eps*u (u the unit direction)
// crosses a mesh triangle. `eps` defaults to kDefaultRelativeEps * |b - a|.
// The result is symmetric in (a, b) by construction.
bool segment_occluded(const Bvh& bvh, const Vec3& a, const Vec3& b,
                      std::optional<double> eps = std::nullopt);

// Same contract as segment_occluded, scanning every triangle.
bool segment_occluded_linear(std::span<const Triangle> triangles, const Vec3& a, const Vec3& b,
                             std::optional<double> eps = std::nullopt);

// N x M bit matrix, bit (i, j) = sample i sees candidate j. Rows are padded to
// 64-bit words in memory; the file form packs bits contiguously.
class VisibilityMatrix {
 public:
  VisibilityMatrix() = default;
  VisibilityMatrix(std::size_t n_samples, std::size_t n_candidates, std::uint64_t sample_hash,
                   std::uint64_t candidate_hash);

  std::size_t n_samples() const { return n_; }
  std::size_t n_candidates() const { return m_; }
  std::uint64_t sample_hash() const { return sample_hash_; }
  std::uint64_t candidate_hash() const { return candidate_hash_; }

  bool get(std::size_t i, std::size_t j) const {
    return (bits_[i * stride_ + (j >> 6)] >> (j & 63)) & 1U;
  }
  void set(std::size_t i, std::size_t j, bool value) {
    auto& word = bits_[i * stride_ + (j >> 6)];
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    word = value ? (word | mask) : (word & ~mask);
  }
  std::size_t count() const;
  std::size_t row_count(std::size_t i) const;

  // True when this matrix was computed from exactly these inputs.
  bool matches(const SampleSet& samples, const CandidateSet& candidates) const;

  friend bool operator==(const VisibilityMatrix&, const VisibilityMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t stride_ = 0;
  std::uint64_t sample_hash_ = 0;
  std::uint64_t candidate_hash_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Rows are split across `threads` workers (0 = hardware concurrency); the
// output is bit-identical for every thread count.
VisibilityMatrix visibility_matrix(const Bvh& bvh, const SampleSet& samples,
                                   const CandidateSet& candidates,
                                   std::optional<double> eps = std::nullopt,
                                   unsigned threads = 0);

// SPVM binary form: "SPVM", u32 version, u64 N, u64 M, u64 sample hash,
// u64 candidate hash, then ceil(N*M/8) bytes; bit i*M+j lives in byte
// (i*M+j)/8 at position (i*M+j)%8 (LSB first). All integers little-endian.
inline constexpr std::uint32_t kSpvmVersion = 1;
void write_spvm(std::ostream& out, const VisibilityMatrix& vis);
VisibilityMatrix read_spvm(std::istream& in);
void save_spvm(const std::filesystem::path& path, const VisibilityMatrix& vis);
VisibilityMatrix load_spvm(const std::filesystem::path& path);

}  // namespace spoc
