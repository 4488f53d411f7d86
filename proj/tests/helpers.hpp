#pragma once

#include <vector>

#include "spoc/model.hpp"

// Instance from bare points with an explicit visibility table (rows =
// samples). An empty table means everything is visible.
inline spoc::CoverageInstance make_instance(const std::vector<spoc::Vec3>& samples,
                                            const std::vector<spoc::Vec3>& candidates,
                                            spoc::QualityKind kind,
                                            const std::vector<std::vector<int>>& table = {}) {
  spoc::SampleSet s = spoc::SampleSet::from_points(samples);
  spoc::CandidateSet c = spoc::CandidateSet::from_positions(candidates);
  spoc::VisibilityMatrix vis(s.size(), c.size(), s.content_hash(), c.content_hash());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) vis.set(i, j, table.empty() ? true : table[i][j] != 0);
  }
  return spoc::build_instance(std::move(s), std::move(c), std::move(vis), kind);
}

inline spoc::Placement pick(std::vector<std::size_t> ids) { return spoc::Placement{std::move(ids)}; }
