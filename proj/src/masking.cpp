// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/masking.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <set>

#include <json.hpp>

#include "evimae/errors.hpp"
#include "evimae/rng.hpp"

namespace evimae {

int round_half_even(double v) {
  const double floor_v = std::floor(v);
  const double frac = v - floor_v;
  if (frac > 0.5) return static_cast<int>(floor_v) + 1;
  if (frac < 0.5) return static_cast<int>(floor_v);
  const auto f = static_cast<long long>(floor_v);
  return static_cast<int>(f % 2 == 0 ? f : f + 1);
}

std::string mask_strategy_name(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::random: return "random";
    case MaskStrategy::time: return "time";
    case MaskStrategy::freq: return "freq";
    case MaskStrategy::time_freq: return "time_freq";
    case MaskStrategy::tube: return "tube";
    case MaskStrategy::node: return "node";
  }
  throw InvalidParam("unknown mask strategy");
}

MaskStrategy mask_strategy_from_name(const std::string& name) {
  for (MaskStrategy s : {MaskStrategy::random, MaskStrategy::time, MaskStrategy::freq,
                         MaskStrategy::time_freq, MaskStrategy::tube, MaskStrategy::node})
    if (mask_strategy_name(s) == name) return s;
  throw InvalidParam("unknown mask strategy: " + name);
}

std::vector<int> MaskPlan::visible() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(total) - masked.size());
  std::size_t m = 0;
  for (int i = 0; i < total; ++i) {
    if (m < masked.size() && masked[m] == i) {
      ++m;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

bool MaskPlan::is_masked(int index) const {
  return std::binary_search(masked.begin(), masked.end(), index);
}

std::string MaskPlan::to_json_string() const {
  nlohmann::json j;
  j["total"] = total;
  j["masked"] = masked;
  j["ratio_requested"] = ratio_requested;
  j["seed"] = seed;
  j["strategy"] = mask_strategy_name(strategy);
  return j.dump();
}

MaskPlan MaskPlan::from_json_string(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MaskPlan p;
    p.total = j.at("total").get<int>();
    p.masked = j.at("masked").get<std::vector<int>>();
    p.ratio_requested = j.at("ratio_requested").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.strategy = mask_strategy_from_name(j.at("strategy").get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("MaskPlan: ") + e.what());
  }
}

namespace {

void check_ratio(double ratio) {
  if (ratio < 0.0 || ratio > 1.0) throw InvalidParam("mask ratio must lie in [0,1]");
}

}  // namespace

MaskPlan random_mask(int total, double ratio, std::uint64_t seed) {
  check_ratio(ratio);
  if (total < 0) throw InvalidParam("random_mask: total must be >= 0");
  MaskPlan plan;
  plan.total = total;
  plan.ratio_requested = ratio;
  plan.seed = seed;
  plan.strategy = MaskStrategy::random;
  Rng rng(seed);
  plan.masked = rng.sample_without_replacement(total, round_half_even(ratio * total));
  return plan;
}

MaskPlan structured_mask(int time_cells, int freq_cells, MaskStrategy mode, double ratio,
                         std::uint64_t seed) {
  check_ratio(ratio);
  if (time_cells < 1 || freq_cells < 1)
    throw InvalidParam("structured_mask: grid dimensions must be positive");
  if (mode != MaskStrategy::time && mode != MaskStrategy::freq &&
      mode != MaskStrategy::time_freq)
    throw InvalidParam("structured_mask: mode must be time, freq or time_freq");

  Rng rng(seed);
  int k_time = 0, k_freq = 0;
  if (mode == MaskStrategy::time) {
    k_time = round_half_even(ratio * time_cells);
  } else if (mode == MaskStrategy::freq) {
    k_freq = round_half_even(ratio * freq_cells);
  } else {
    // Independent unions overshoot the per-axis rate, so search the integer
    // neighborhood of 1-sqrt(1-ratio) per axis for the closest achievable
    // overall ratio.
    const double r_axis = 1.0 - std::sqrt(std::max(0.0, 1.0 - ratio));
    const double t_star = r_axis * time_cells;
    const double f_star = r_axis * freq_cells;
    double best = 2.0;
    for (int kt : {static_cast<int>(std::floor(t_star)), static_cast<int>(std::ceil(t_star))}) {
      for (int kf : {static_cast<int>(std::floor(f_star)), static_cast<int>(std::ceil(f_star))}) {
        const int ct = std::clamp(kt, 0, time_cells);
        const int cf = std::clamp(kf, 0, freq_cells);
        const double achieved =
            static_cast<double>(ct * freq_cells + cf * time_cells - ct * cf) /
            (static_cast<double>(time_cells) * freq_cells);
        const double err = std::abs(achieved - ratio);
        if (err < best - 1e-12 ||
            (std::abs(err - best) <= 1e-12 && ct + cf < k_time + k_freq)) {
          best = err;
          k_time = ct;
          k_freq = cf;
        }
      }
    }
  }

  const auto cols = rng.sample_without_replacement(time_cells, k_time);
  const auto rows = rng.sample_without_replacement(freq_cells, k_freq);

  std::set<int> masked;
  for (int t : cols)
    for (int f = 0; f < freq_cells; ++f) masked.insert(t * freq_cells + f);
  for (int f : rows)
    for (int t = 0; t < time_cells; ++t) masked.insert(t * freq_cells + f);

  MaskPlan plan;
  plan.total = time_cells * freq_cells;
  plan.ratio_requested = ratio;
  plan.seed = seed;
  plan.strategy = mode;
  plan.masked.assign(masked.begin(), masked.end());
  return plan;
}

MaskPlan tube_mask(int spatial_cells, int temporal_cells, double ratio, std::uint64_t seed) {
  check_ratio(ratio);
  if (spatial_cells < 1 || temporal_cells < 1)
    throw InvalidParam("tube_mask: cell counts must be positive");
  Rng rng(seed);
  const auto spatial =
      rng.sample_without_replacement(spatial_cells, round_half_even(ratio * spatial_cells));
  MaskPlan plan;
  plan.total = spatial_cells * temporal_cells;
  plan.ratio_requested = ratio;
  plan.seed = seed;
  plan.strategy = MaskStrategy::tube;
  plan.masked.reserve(spatial.size() * static_cast<std::size_t>(temporal_cells));
  for (int t = 0; t < temporal_cells; ++t)
    for (int s : spatial) plan.masked.push_back(t * spatial_cells + s);
  std::sort(plan.masked.begin(), plan.masked.end());
  return plan;
}

MaskPlan node_mask(int n_nodes, double ratio, std::uint64_t seed) {
  check_ratio(ratio);
  if (n_nodes < 1) throw InvalidParam("node_mask: node count must be positive");
  MaskPlan plan = random_mask(n_nodes, ratio, seed);
  plan.strategy = MaskStrategy::node;
  return plan;
}

std::pair<Eigen::MatrixXd, std::vector<int>> apply_mask(const Eigen::MatrixXd& tokens,
                                                        const MaskPlan& plan) {
  if (tokens.rows() != plan.total)
    throw ShapeError("apply_mask: token count " + std::to_string(tokens.rows()) +
                     " != plan total " + std::to_string(plan.total));
  const auto vis = plan.visible();
  Eigen::MatrixXd out(static_cast<long>(vis.size()), tokens.cols());
  for (std::size_t k = 0; k < vis.size(); ++k)
    out.row(static_cast<long>(k)) = tokens.row(vis[k]);
  return {out, vis};
}

}  // namespace evimae
