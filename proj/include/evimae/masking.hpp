// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Seedable masking strategies over token / node index sets. Plans are
// immutable and JSON-serializable so a specific pretraining step can be
// reproduced exactly.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace evimae {

enum class MaskStrategy { random, time, freq, time_freq, tube, node };

std::string mask_strategy_name(MaskStrategy s);
MaskStrategy mask_strategy_from_name(const std::string& name);

struct MaskPlan {
  int total = 0;
  std::vector<int> masked;  // sorted, disjoint from the implied visible set
  double ratio_requested = 0.0;
  std::uint64_t seed = 0;
  MaskStrategy strategy = MaskStrategy::random;

  std::vector<int> visible() const;
  bool is_masked(int index) const;
  std::string to_json_string() const;
  static MaskPlan from_json_string(const std::string& text);
};

// Uniform subset without replacement of size round(ratio * total),
// ties-to-even.
MaskPlan random_mask(int total, double ratio, std::uint64_t seed);

// Whole time columns / frequency rows of one device's patch grid. The
// time_freq mode masks the union of independently drawn columns and rows,
// with counts chosen so the achieved ratio is as close as attainable to the
// request.
MaskPlan structured_mask(int time_cells, int freq_cells, MaskStrategy mode, double ratio,
                         std::uint64_t seed);

// Draws round(ratio * spatial_cells) spatial positions and masks them in
// every temporal slice; token index = t * spatial_cells + s.
MaskPlan tube_mask(int spatial_cells, int temporal_cells, double ratio, std::uint64_t seed);

MaskPlan node_mask(int n_nodes, double ratio, std::uint64_t seed);

// Visible rows in original relative order plus their original indices.
std::pair<Eigen::MatrixXd, std::vector<int>> apply_mask(const Eigen::MatrixXd& tokens,
                                                        const MaskPlan& plan);

// round() with ties to even, as used for every mask count.
int round_half_even(double v);

}  // namespace evimae
