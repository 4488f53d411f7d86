#include "spoc/visibility.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "spoc/errors.hpp"

namespace spoc {

bool segment_hits_triangle(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                           const Triangle& tri) {
  const Vec3 ad{std::fabs(dir.x), std::fabs(dir.y), std::fabs(dir.z)};
  int kz = 0;
  if (ad.y > ad[kz]) kz = 1;
  if (ad.z > ad[kz]) kz = 2;
  if (dir[kz] == 0.0) return false;
  int kx = (kz + 1) % 3;
  int ky = (kx + 1) % 3;
  if (dir[kz] < 0.0) std::swap(kx, ky);

  const double sx = dir[kx] / dir[kz];
  const double sy = dir[ky] / dir[kz];
  const double sz = 1.0 / dir[kz];

  const Vec3 a = tri[0] - origin;
  const Vec3 b = tri[1] - origin;
  const Vec3 c = tri[2] - origin;
  const double ax = a[kx] - sx * a[kz];
  const double ay = a[ky] - sy * a[kz];
  const double bx = b[kx] - sx * b[kz];
  const double by = b[ky] - sy * b[kz];
  const double cx = c[kx] - sx * c[kz];
  const double cy = c[ky] - sy * c[kz];

  const double u = cx * by - cy * bx;
  const double v = ax * cy - ay * cx;
  const double w = bx * ay - by * ax;
  // Mixed signs: outside. Zeros are edge/vertex contacts and count as hits,
  // so a segment through a shared edge cannot slip between two faces.
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return false;
  const double det = u + v + w;
  if (det == 0.0) return false;

  const double t_num = u * (sz * a[kz]) + v * (sz * b[kz]) + w * (sz * c[kz]);
  const double t = t_num / det;
  return t > t_min && t < t_max;
}

namespace {

Aabb triangle_box(const Triangle& t) {
  Aabb box;
  for (const Vec3& p : t) box.extend(p);
  return box;
}

bool box_overlaps_segment(const Aabb& box, double pad, const Vec3& origin, const Vec3& dir,
                          double t_min, double t_max) {
  double t_near = t_min;
  double t_far = t_max;
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = box.lo[axis] - pad;
    const double hi = box.hi[axis] + pad;
    if (dir[axis] == 0.0) {
      if (origin[axis] < lo || origin[axis] > hi) return false;
      continue;
    }
    const double inv = 1.0 / dir[axis];
    double t0 = (lo - origin[axis]) * inv;
    double t1 = (hi - origin[axis]) * inv;
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  return true;
}

struct Segment {
  Vec3 origin;
  Vec3 dir;
  double t_min;
  double t_max;
};

// Orders the endpoints lexicographically so that (a, b) and (b, a) run the
// exact same floating-point computation. Returns nullopt for an empty segment.
std::optional<Segment> canonical_segment(Vec3 a, Vec3 b, std::optional<double> eps) {
  if (lex_less(b, a)) std::swap(a, b);
  const Vec3 dir = b - a;
  const double length = norm(dir);
  if (!(length > 0.0)) return std::nullopt;
  const double shrink = eps.value_or(kDefaultRelativeEps * length);
  const double t_min = shrink / length;
  const double t_max = 1.0 - t_min;
  if (!(t_min < t_max)) return std::nullopt;
  return Segment{a, dir, t_min, t_max};
}

}  // namespace

Bvh::Bvh(const TriangleMesh& mesh) {
  triangles_.reserve(mesh.num_faces());
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) triangles_.push_back(mesh.triangle(f));
  if (triangles_.empty()) return;

  std::vector<std::uint32_t> ids(triangles_.size());
  std::iota(ids.begin(), ids.end(), 0U);
  std::vector<Vec3> centroids(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    centroids[t] = (triangles_[t][0] + triangles_[t][1] + triangles_[t][2]) / 3.0;
  }
  nodes_.reserve(2 * triangles_.size());
  build(ids, centroids, 0, ids.size(), 0);
  order_ = std::move(ids);

  const Aabb root = nodes_.front().box;
  double scale = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    scale = std::max({scale, std::fabs(root.lo[axis]), std::fabs(root.hi[axis])});
  }
  pad_ = 1e-9 * scale;
}

std::uint32_t Bvh::build(std::vector<std::uint32_t>& ids, std::vector<Vec3>& centroids,
                         std::size_t begin, std::size_t end, std::size_t depth) {
  depth_ = std::max(depth_, depth);
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (std::size_t i = begin; i < end; ++i) {
    box.extend(triangle_box(triangles_[ids[i]]));
    centroid_box.extend(centroids[ids[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= kLeafSize) {
    nodes_[index].first = static_cast<std::uint32_t>(begin);
    nodes_[index].count = static_cast<std::uint32_t>(end - begin);
    return index;
  }
  // Median split along the longest axis of the centroid box; triangle index
  // breaks ties so the build is fully deterministic.
  const int axis = centroid_box.longest_axis();
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(ids.begin() + static_cast<std::ptrdiff_t>(begin),
                   ids.begin() + static_cast<std::ptrdiff_t>(mid),
                   ids.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::uint32_t l, std::uint32_t r) {
                     const double cl = centroids[l][axis];
                     const double cr = centroids[r][axis];
                     return cl != cr ? cl < cr : l < r;
                   });
  const std::uint32_t left = build(ids, centroids, begin, mid, depth + 1);
  const std::uint32_t right = build(ids, centroids, mid, end, depth + 1);
  nodes_[index].first = left;
  nodes_[index].second = right;
  return index;
}

bool Bvh::any_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
  if (nodes_.empty()) return false;
  std::uint32_t stack[128];
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!box_overlaps_segment(node.box, pad_, origin, dir, t_min, t_max)) continue;
    if (node.is_leaf()) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (segment_hits_triangle(origin, dir, t_min, t_max, triangles_[order_[i]])) return true;
      }
    } else {
      stack[top++] = node.second;
      stack[top++] = node.first;
    }
  }
  return false;
}

Bvh build_bvh(const TriangleMesh& mesh) { return Bvh(mesh); }

bool segment_occluded(const Bvh& bvh, const Vec3& a, const Vec3& b, std::optional<double> eps) {
  const auto seg = canonical_segment(a, b, eps);
  return seg && bvh.any_hit(seg->origin, seg->dir, seg->t_min, seg->t_max);
}

bool segment_occluded_linear(std::span<const Triangle> triangles, const Vec3& a, const Vec3& b,
                             std::optional<double> eps) {
  const auto seg = canonical_segment(a, b, eps);
  if (!seg) return false;
  return std::any_of(triangles.begin(), triangles.end(), [&](const Triangle& t) {
    return segment_hits_triangle(seg->origin, seg->dir, seg->t_min, seg->t_max, t);
  });
}

VisibilityMatrix::VisibilityMatrix(std::size_t n_samples, std::size_t n_candidates,
                                   std::uint64_t sample_hash, std::uint64_t candidate_hash)
    : n_(n_samples),
      m_(n_candidates),
      stride_((n_candidates + 63) / 64),
      sample_hash_(sample_hash),
      candidate_hash_(candidate_hash),
      bits_(n_samples * ((n_candidates + 63) / 64), 0) {}

std::size_t VisibilityMatrix::count() const {
  std::size_t total = 0;
  for (std::uint64_t w : bits_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::size_t VisibilityMatrix::row_count(std::size_t i) const {
  std::size_t total = 0;
  for (std::size_t w = 0; w < stride_; ++w) {
    total += static_cast<std::size_t>(std::popcount(bits_[i * stride_ + w]));
  }
  return total;
}

bool VisibilityMatrix::matches(const SampleSet& samples, const CandidateSet& candidates) const {
  return n_ == samples.size() && m_ == candidates.size() &&
         sample_hash_ == samples.content_hash() && candidate_hash_ == candidates.content_hash();
}

VisibilityMatrix visibility_matrix(const Bvh& bvh, const SampleSet& samples,
                                   const CandidateSet& candidates, std::optional<double> eps,
                                   unsigned threads) {
  VisibilityMatrix vis(samples.size(), candidates.size(), samples.content_hash(),
                       candidates.content_hash());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, samples.size())));

  // Each row touches only its own words, so workers never share a write.
  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    for (std::size_t i = next_row++; i < samples.size(); i = next_row++) {
      const Vec3& p = samples[i].position;
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        vis.set(i, j, !segment_occluded(bvh, p, candidates[j], eps));
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return vis;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(value) >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw ParseError("truncated SPVM header");
  }
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void write_spvm(std::ostream& out, const VisibilityMatrix& vis) {
  out.write("SPVM", 4);
  put_le<std::uint32_t>(out, kSpvmVersion);
  put_le<std::uint64_t>(out, vis.n_samples());
  put_le<std::uint64_t>(out, vis.n_candidates());
  put_le<std::uint64_t>(out, vis.sample_hash());
  put_le<std::uint64_t>(out, vis.candidate_hash());
  const std::size_t total_bits = vis.n_samples() * vis.n_candidates();
  std::vector<unsigned char> bytes((total_bits + 7) / 8, 0);
  std::size_t b = 0;
  for (std::size_t i = 0; i < vis.n_samples(); ++i) {
    for (std::size_t j = 0; j < vis.n_candidates(); ++j, ++b) {
      if (vis.get(i, j)) bytes[b >> 3] |= static_cast<unsigned char>(1U << (b & 7));
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

VisibilityMatrix read_spvm(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != "SPVM") {
    throw ParseError("not an SPVM file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSpvmVersion) {
    throw ParseError("unsupported SPVM version " + std::to_string(version));
  }
  const auto n = get_le<std::uint64_t>(in);
  const auto m = get_le<std::uint64_t>(in);
  const auto sample_hash = get_le<std::uint64_t>(in);
  const auto candidate_hash = get_le<std::uint64_t>(in);
  VisibilityMatrix vis(n, m, sample_hash, candidate_hash);
  std::vector<unsigned char> bytes((n * m + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw ParseError("truncated SPVM bit payload");
  }
  std::size_t b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j, ++b) vis.set(i, j, (bytes[b >> 3] >> (b & 7)) & 1U);
  }
  return vis;
}

void save_spvm(const std::filesystem::path& path, const VisibilityMatrix& vis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_spvm(out, vis);
}

VisibilityMatrix load_spvm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_spvm(in);
}

}  // namespace spoc
