// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Reassembles the full token sequence (IMU block then video block) with a
// shared mask token, decodes with a transformer trunk, and projects to
// per-modality pixel patches.
#pragma once

#include <vector>

#include "evimae/encoders.hpp"
#include "evimae/nn.hpp"

namespace evimae {

struct DecoderConfig {
  int dim = 32;
  int depth = 2;
  int heads = 4;
  double mlp_ratio = 4.0;
};

struct Reconstruction {
  nn::Var imu_patches;    // P_imu x imu_patch_dim (invalid when IMU absent)
  nn::Var video_patches;  // P_v x video_patch_dim (invalid when video absent)
};

class PixelDecoder {
 public:
  PixelDecoder() = default;
  // Decoder-side positional tables are fixed sin/cos over (device, time,
  // freq) for IMU and (t, h, w) for video, at decoder width.
  PixelDecoder(nn::ParamStore& store, const DecoderConfig& cfg, int encoder_dim,
               int imu_patch_dim, int video_patch_dim, int n_devices, int imu_time_blocks,
               int imu_freq_blocks, int video_t_blocks, int video_h_blocks, int video_w_blocks,
               Rng& rng);

  // Full-length sequence: encoded tokens (projected to decoder width) placed
  // at their original indices, the shared mask token elsewhere, plus decoder
  // modality and positional embeddings. Either block may be absent (total 0).
  nn::Var assemble(nn::Graph& g, const TokenBatch& encoded, int imu_total, int video_total) const;

  Reconstruction decode(nn::Graph& g, nn::Var sequence, int imu_total, int video_total) const;

  const DecoderConfig& config() const { return cfg_; }

 private:
  DecoderConfig cfg_;
  nn::Linear proj_in_;
  nn::Parameter* mask_token_ = nullptr;
  nn::Parameter* type_imu_ = nullptr;
  nn::Parameter* type_video_ = nullptr;
  nn::TransformerEncoder trunk_;
  nn::Linear head_imu_;
  nn::Linear head_video_;
  nn::Mat pos_imu_;
  nn::Mat pos_video_;
};

}  // namespace evimae
