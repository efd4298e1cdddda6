// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/pixel_decoder.hpp"

#include "evimae/errors.hpp"

namespace evimae {

PixelDecoder::PixelDecoder(nn::ParamStore& store, const DecoderConfig& cfg, int encoder_dim,
                           int imu_patch_dim, int video_patch_dim, int n_devices,
                           int imu_time_blocks, int imu_freq_blocks, int video_t_blocks,
                           int video_h_blocks, int video_w_blocks, Rng& rng)
    : cfg_(cfg) {
  proj_in_ = nn::Linear(store, "decoder.proj_in", encoder_dim, cfg.dim, rng);
  mask_token_ = &store.create("decoder.mask_token", 1, cfg.dim);
  type_imu_ = &store.create("decoder.type_imu", 1, cfg.dim);
  type_video_ = &store.create("decoder.type_video", 1, cfg.dim);
  nn::init_normal(*mask_token_, rng);
  nn::init_normal(*type_imu_, rng);
  nn::init_normal(*type_video_, rng);
  trunk_ = nn::TransformerEncoder(store, "decoder.trunk", cfg.depth, cfg.dim, cfg.heads,
                                  cfg.mlp_ratio, rng);
  head_imu_ = nn::Linear(store, "decoder.head_imu", cfg.dim, imu_patch_dim, rng);
  head_video_ = nn::Linear(store, "decoder.head_video", cfg.dim, video_patch_dim, rng);
  pos_imu_ = nn::sincos_table({n_devices, imu_time_blocks, imu_freq_blocks},
                              nn::split_embed_dims(cfg.dim, 3));
  pos_video_ = nn::sincos_table({video_t_blocks, video_h_blocks, video_w_blocks},
                                nn::split_embed_dims(cfg.dim, 3));
}

nn::Var PixelDecoder::assemble(nn::Graph& g, const TokenBatch& encoded, int imu_total,
                               int video_total) const {
  if (imu_total > 0 && pos_imu_.rows() != imu_total)
    throw ShapeError("assemble: IMU grid does not match decoder position table");
  if (video_total > 0 && pos_video_.rows() != video_total)
    throw ShapeError("assemble: video grid does not match decoder position table");

  // Split the encoded rows by modality, preserving original indices.
  std::vector<int> imu_rows, video_rows, imu_orig, video_orig;
  for (long r = 0; r < encoded.count(); ++r) {
    const auto k = static_cast<std::size_t>(r);
    const int orig = encoded.original_index[k];
    if (encoded.modality[k] == Modality::imu) {
      if (orig < 0 || orig >= imu_total) throw IndexError("assemble: IMU index out of range");
      imu_rows.push_back(static_cast<int>(r));
      imu_orig.push_back(orig);
    } else {
      if (orig < 0 || orig >= video_total) throw IndexError("assemble: video index out of range");
      video_rows.push_back(static_cast<int>(r));
      video_orig.push_back(orig);
    }
  }
  if (imu_total == 0 && !imu_rows.empty())
    throw ShapeError("assemble: IMU tokens supplied but imu_total is 0");
  if (video_total == 0 && !video_rows.empty())
    throw ShapeError("assemble: video tokens supplied but video_total is 0");

  nn::Var projected = proj_in_.forward(g, encoded.tokens);
  nn::Var mask = g.param(*mask_token_);

  std::vector<nn::Var> blocks;
  if (imu_total > 0) {
    nn::Var block = g.scatter_rows(g.gather_rows(projected, imu_rows), imu_orig, imu_total, mask);
    block = g.add_rowvec(block, g.param(*type_imu_));
    block = g.add(block, g.input(pos_imu_));
    blocks.push_back(block);
  }
  if (video_total > 0) {
    nn::Var block =
        g.scatter_rows(g.gather_rows(projected, video_rows), video_orig, video_total, mask);
    block = g.add_rowvec(block, g.param(*type_video_));
    block = g.add(block, g.input(pos_video_));
    blocks.push_back(block);
  }
  if (blocks.empty()) throw ShapeError("assemble: nothing to decode");
  return blocks.size() == 1 ? blocks[0] : g.concat_rows(blocks);
}

Reconstruction PixelDecoder::decode(nn::Graph& g, nn::Var sequence, int imu_total,
                                    int video_total) const {
  if (sequence.rows() != imu_total + video_total)
    throw ShapeError("decode: sequence length != imu_total + video_total");
  nn::Var hidden = trunk_.forward(g, sequence);
  Reconstruction out;
  if (imu_total > 0) {
    out.imu_patches = head_imu_.forward(
        g, g.gather_rows(hidden, [&] {
          std::vector<int> rows(static_cast<std::size_t>(imu_total));
          for (int i = 0; i < imu_total; ++i) rows[static_cast<std::size_t>(i)] = i;
          return rows;
        }()));
  }
  if (video_total > 0) {
    out.video_patches = head_video_.forward(
        g, g.gather_rows(hidden, [&] {
          std::vector<int> rows(static_cast<std::size_t>(video_total));
          for (int i = 0; i < video_total; ++i)
            rows[static_cast<std::size_t>(i)] = imu_total + i;
          return rows;
        }()));
  }
  return out;
}

}  // namespace evimae
