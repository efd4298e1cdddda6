// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/encoders.hpp"

#include "evimae/errors.hpp"

namespace evimae {

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::imu: return "imu";
    case Modality::video: return "video";
    case Modality::both: return "both";
  }
  throw InvalidParam("unknown modality");
}

Modality modality_from_name(const std::string& name) {
  if (name == "imu") return Modality::imu;
  if (name == "video") return Modality::video;
  if (name == "both") return Modality::both;
  throw InvalidParam("unknown modality: " + name);
}

ImuEmbedder::ImuEmbedder(nn::ParamStore& store, const std::string& prefix, int patch_dim,
                         int embed_dim, int n_devices, int time_blocks, int freq_blocks,
                         Rng& rng)
    : n_devices_(n_devices), cells_per_device_(time_blocks * freq_blocks) {
  proj_ = nn::Linear(store, prefix + ".proj", patch_dim, embed_dim, rng);
  device_embed_ = &store.create(prefix + ".device_embed", n_devices, embed_dim);
  type_embed_ = &store.create(prefix + ".type_embed", 1, embed_dim);
  nn::init_normal(*device_embed_, rng);
  nn::init_normal(*type_embed_, rng);
  const auto dims = nn::split_embed_dims(embed_dim, 2);
  pos_ = nn::sincos_table({time_blocks, freq_blocks}, dims);
}

nn::Var ImuEmbedder::embed_all(nn::Graph& g, const ImuPatchGrid& grid) const {
  if (grid.patches.cols() != proj_.w->value.rows())
    throw ShapeError("ImuEmbedder: patch dimension mismatch");
  if (grid.n_devices != n_devices_ || grid.patches_per_device() != cells_per_device_)
    throw ShapeError("ImuEmbedder: grid layout mismatch");
  nn::Var x = proj_.forward(g, g.input(grid.patches));
  // Position rows repeat per device; device rows come from the learned table.
  nn::Mat pos(grid.patches.rows(), pos_.cols());
  std::vector<int> dev_rows(static_cast<std::size_t>(grid.patches.rows()));
  for (long p = 0; p < grid.patches.rows(); ++p) {
    const auto [tb, fb] = grid.grid_pos[static_cast<std::size_t>(p)];
    pos.row(p) = pos_.row(static_cast<long>(tb) * grid.freq_blocks + fb);
    dev_rows[static_cast<std::size_t>(p)] = grid.device_index[static_cast<std::size_t>(p)];
  }
  x = g.add(x, g.input(std::move(pos)));
  x = g.add(x, g.gather_rows(g.param(*device_embed_), dev_rows));
  return g.add_rowvec(x, g.param(*type_embed_));
}

VideoEmbedder::VideoEmbedder(nn::ParamStore& store, const std::string& prefix, int patch_dim,
                             int embed_dim, int t_blocks, int h_blocks, int w_blocks, Rng& rng) {
  proj_ = nn::Linear(store, prefix + ".proj", patch_dim, embed_dim, rng);
  type_embed_ = &store.create(prefix + ".type_embed", 1, embed_dim);
  nn::init_normal(*type_embed_, rng);
  const auto dims = nn::split_embed_dims(embed_dim, 3);
  pos_ = nn::sincos_table({t_blocks, h_blocks, w_blocks}, dims);
}

nn::Var VideoEmbedder::embed_all(nn::Graph& g, const VideoPatchGrid& grid) const {
  if (grid.patches.cols() != proj_.w->value.rows())
    throw ShapeError("VideoEmbedder: patch dimension mismatch");
  if (grid.patches.rows() != pos_.rows())
    throw ShapeError("VideoEmbedder: grid layout mismatch");
  nn::Var x = proj_.forward(g, g.input(grid.patches));
  x = g.add(x, g.input(pos_));
  return g.add_rowvec(x, g.param(*type_embed_));
}

TokenBatch encode_unified(nn::Graph& g, const nn::TransformerEncoder& unified,
                          const TokenBatch* imu, const TokenBatch* video) {
  std::vector<nn::Var> parts;
  TokenBatch out;
  auto append = [&](const TokenBatch* tb, Modality m) {
    if (!tb || !tb->tokens.valid() || tb->tokens.rows() == 0) return;
    parts.push_back(tb->tokens);
    out.original_index.insert(out.original_index.end(), tb->original_index.begin(),
                              tb->original_index.end());
    out.modality.insert(out.modality.end(), static_cast<std::size_t>(tb->tokens.rows()), m);
  };
  append(imu, Modality::imu);
  append(video, Modality::video);
  if (parts.empty()) throw ShapeError("encode_unified: no tokens from either modality");
  nn::Var x = parts.size() == 1 ? parts[0] : g.concat_rows(parts);
  out.tokens = unified.forward(g, x);
  return out;
}

nn::Var pool_rows(nn::Graph& g, nn::Var tokens, const std::vector<int>& rows) {
  if (rows.empty()) throw EmptyGroup("pool: empty token group");
  return g.mean_rows(g.gather_rows(tokens, rows));
}

nn::Var pool_all(nn::Graph& g, nn::Var tokens) {
  if (tokens.rows() == 0) throw EmptyGroup("pool: no tokens");
  return g.mean_rows(tokens);
}

}  // namespace evimae
