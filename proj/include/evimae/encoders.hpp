// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Token embedding and the three transformer encoders (IMU, video with joint
// space-time attention, modality-unified).
#pragma once

#include <string>
#include <vector>

#include "evimae/imu_pipeline.hpp"
#include "evimae/nn.hpp"
#include "evimae/video_pipeline.hpp"

namespace evimae {

enum class Modality { imu, video, both };
std::string modality_name(Modality m);
Modality modality_from_name(const std::string& name);

struct EncoderConfig {
  int embed_dim = 64;
  int depth_video = 2;
  int depth_imu = 2;
  int heads = 4;
  double mlp_ratio = 4.0;
  int unified_depth = 1;
};

// Per-sample token set flowing through the encoders: row k of `tokens`
// belongs to modality `modality[k]` and original grid slot
// `original_index[k]` of that modality.
struct TokenBatch {
  nn::Var tokens;
  std::vector<int> original_index;
  std::vector<Modality> modality;

  long count() const { return tokens.valid() ? tokens.rows() : 0; }
};

// Patch projection + 2-D sinusoidal position + learned device embedding +
// modality type embedding.
class ImuEmbedder {
 public:
  ImuEmbedder() = default;
  ImuEmbedder(nn::ParamStore& store, const std::string& prefix, int patch_dim, int embed_dim,
              int n_devices, int time_blocks, int freq_blocks, Rng& rng);

  // One embedded row per patch of the full grid, in grid order.
  nn::Var embed_all(nn::Graph& g, const ImuPatchGrid& grid) const;

  const nn::Mat& position_table() const { return pos_; }

 private:
  nn::Linear proj_;
  nn::Parameter* device_embed_ = nullptr;  // n_devices x d
  nn::Parameter* type_embed_ = nullptr;    // 1 x d
  nn::Mat pos_;                            // (time_blocks*freq_blocks) x d
  int n_devices_ = 0;
  int cells_per_device_ = 0;
};

// Tubelet projection + factorized 3-D sinusoidal position + type embedding.
class VideoEmbedder {
 public:
  VideoEmbedder() = default;
  VideoEmbedder(nn::ParamStore& store, const std::string& prefix, int patch_dim, int embed_dim,
                int t_blocks, int h_blocks, int w_blocks, Rng& rng);

  nn::Var embed_all(nn::Graph& g, const VideoPatchGrid& grid) const;

  const nn::Mat& position_table() const { return pos_; }

 private:
  nn::Linear proj_;
  nn::Parameter* type_embed_ = nullptr;
  nn::Mat pos_;
};

// Concatenates IMU tokens first, then video, and runs the unified encoder.
// Either side may be absent (single-modality mode).
TokenBatch encode_unified(nn::Graph& g, const nn::TransformerEncoder& unified,
                          const TokenBatch* imu, const TokenBatch* video);

enum class PoolGroup { all, per_device, per_modality };

// Arithmetic mean over a row subset. Throws EmptyGroup on an empty subset.
nn::Var pool_rows(nn::Graph& g, nn::Var tokens, const std::vector<int>& rows);
nn::Var pool_all(nn::Graph& g, nn::Var tokens);

}  // namespace evimae
