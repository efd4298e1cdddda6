// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "evimae/errors.hpp"
#include "evimae/masking.hpp"
#include "evimae/pixel_decoder.hpp"
#include "test_util.hpp"

using namespace evimae;
using nn::Graph;
using nn::Mat;
using nn::Var;

namespace {

// Tiny layout: 2 devices x 2x2 IMU grid = 8 IMU slots, 2x2x2 video grid = 8
// video slots.
PixelDecoder make_decoder(nn::ParamStore& store, Rng& rng, int enc_dim = 12, int dec_dim = 8,
                          int imu_patch_dim = 10, int video_patch_dim = 14) {
  DecoderConfig cfg;
  cfg.dim = dec_dim;
  cfg.depth = 1;
  cfg.heads = 2;
  cfg.mlp_ratio = 2.0;
  return PixelDecoder(store, cfg, enc_dim, imu_patch_dim, video_patch_dim, 2, 2, 2, 2, 2, 2,
                      rng);
}

TokenBatch tokens_for(Graph& g, const Mat& values, const std::vector<int>& imu_idx,
                      const std::vector<int>& video_idx) {
  TokenBatch tb;
  tb.tokens = g.input(values);
  for (int i : imu_idx) {
    tb.original_index.push_back(i);
    tb.modality.push_back(Modality::imu);
  }
  for (int i : video_idx) {
    tb.original_index.push_back(i);
    tb.modality.push_back(Modality::video);
  }
  return tb;
}

Mat random_mat(Rng& rng, long r, long c) {
  Mat m(r, c);
  for (long j = 0; j < c; ++j)
    for (long i = 0; i < r; ++i) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("assemble places every token at its original slot and fills the rest with mask tokens") {
  Rng rng(1);
  nn::ParamStore store;
  PixelDecoder dec = make_decoder(store, rng);
  // A recognizable mask token makes mask slots identifiable after the linear
  // projection and additive embeddings.
  store.at("decoder.mask_token").value.setConstant(1000.0);

  Graph g;
  const Mat enc = random_mat(rng, 5, 12);
  TokenBatch tb = tokens_for(g, enc, {0, 3, 7}, {2, 5});
  Var seq = dec.assemble(g, tb, 8, 8);
  REQUIRE(seq.rows() == 16);

  int mask_slots = 0;
  for (long r = 0; r < 16; ++r)
    if (seq.value().row(r).cwiseAbs().maxCoeff() > 500.0) ++mask_slots;
  CHECK(mask_slots == 16 - 5);

  // Placement: rerunning with one token changed must alter exactly its slot,
  // by exactly the projected difference (embeddings cancel).
  Mat enc2 = enc;
  enc2.row(1).array() += 2.0;  // IMU token with original index 3
  Graph g2;
  TokenBatch tb2 = tokens_for(g2, enc2, {0, 3, 7}, {2, 5});
  const Mat seq2 = dec.assemble(g2, tb2, 8, 8).value();
  const Mat delta_expected =
      (enc2.row(1) - enc.row(1)) * store.at("decoder.proj_in.w").value;
  for (long r = 0; r < 16; ++r) {
    const Mat delta = seq2.row(r) - seq.value().row(r);
    if (r == 3) {
      CHECK((delta - delta_expected).cwiseAbs().maxCoeff() < 1e-10);
    } else {
      CHECK(delta.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("assemble rejects duplicate and out-of-range original indices") {
  Rng rng(2);
  nn::ParamStore store;
  PixelDecoder dec = make_decoder(store, rng);
  Graph g;
  TokenBatch dup = tokens_for(g, Mat::Zero(2, 12), {3, 3}, {});
  CHECK_THROWS_AS((void)dec.assemble(g, dup, 8, 8), IndexError);
  Graph g2;
  TokenBatch oob = tokens_for(g2, Mat::Zero(1, 12), {9}, {});
  CHECK_THROWS_AS((void)dec.assemble(g2, oob, 8, 8), IndexError);
}

TEST_CASE("paper-scale mask token counts: 240 IMU + 1408 video filled slots") {
  // Layout bookkeeping only; uses the real mask plans at the full scale.
  const auto imu_plan = random_mask(320, 0.75, 5);
  const auto video_plan = tube_mask(196, 8, 0.9, 6);
  CHECK(imu_plan.masked.size() == 240);
  CHECK(video_plan.masked.size() == 1408);
  CHECK(320 - imu_plan.visible().size() + 1568 - video_plan.visible().size() == 240 + 1408);
}

TEST_CASE("decode returns per-modality patch matrices of the original shapes") {
  Rng rng(3);
  nn::ParamStore store;
  PixelDecoder dec = make_decoder(store, rng);
  Graph g;
  TokenBatch tb = tokens_for(g, random_mat(rng, 4, 12), {0, 4}, {1, 6});
  Var seq = dec.assemble(g, tb, 8, 8);
  const auto recon = dec.decode(g, seq, 8, 8);
  REQUIRE(recon.imu_patches.valid());
  REQUIRE(recon.video_patches.valid());
  CHECK(recon.imu_patches.rows() == 8);
  CHECK(recon.imu_patches.cols() == 10);
  CHECK(recon.video_patches.rows() == 8);
  CHECK(recon.video_patches.cols() == 14);
}

TEST_CASE("single-modality assembly and decode work without video") {
  Rng rng(4);
  nn::ParamStore store;
  PixelDecoder dec = make_decoder(store, rng);
  Graph g;
  TokenBatch tb = tokens_for(g, random_mat(rng, 3, 12), {0, 2, 5}, {});
  Var seq = dec.assemble(g, tb, 8, 0);
  CHECK(seq.rows() == 8);
  const auto recon = dec.decode(g, seq, 8, 0);
  CHECK(recon.imu_patches.valid());
  CHECK(!recon.video_patches.valid());
}

TEST_CASE("decoder gradients match finite differences") {
  Rng rng(5);
  nn::ParamStore store;
  PixelDecoder dec = make_decoder(store, rng);
  const Mat enc = random_mat(rng, 4, 12);
  auto run = [&]() {
    Graph g;
    TokenBatch tb = tokens_for(g, enc, {0, 4}, {1, 6});
    Var seq = dec.assemble(g, tb, 8, 8);
    const auto recon = dec.decode(g, seq, 8, 8);
    Var loss = g.add(g.mean(g.square(recon.imu_patches)), g.mean(g.square(recon.video_patches)));
    g.backward(loss);
    return g.value(loss)(0, 0);
  };
  const auto res = testutil::gradient_check(store, run, 1e-5);
  CHECK_MESSAGE(res.max_rel_err < 1e-4, res.worst_param << " err " << res.max_rel_err);
}

TEST_CASE("with an identity decoder and pseudo-inverse head, visible slots round-trip") {
  // The trunk is bypassed ("decoder replaced by identity"): tokens are crafted
  // as patch * W_e with the additive embeddings cancelled, the input
  // projection is the identity, and the head is pinv(W_e).
  Rng rng(6);
  nn::ParamStore store;
  const int enc_dim = 8, patch_dim = 6;
  PixelDecoder dec = make_decoder(store, rng, enc_dim, enc_dim, patch_dim, patch_dim);

  store.at("decoder.proj_in.w").value = Mat::Identity(enc_dim, enc_dim);
  store.at("decoder.proj_in.b").value.setZero();
  store.at("decoder.type_imu").value.setZero();
  store.at("decoder.mask_token").value.setZero();

  const Mat w_embed = random_mat(rng, patch_dim, enc_dim);  // rank 6 w.p. 1
  const Mat pinv = w_embed.completeOrthogonalDecomposition().pseudoInverse();
  store.at("decoder.head_imu.w").value = pinv;
  store.at("decoder.head_imu.b").value.setZero();

  const Mat patches = random_mat(rng, 3, patch_dim);
  const std::vector<int> slots = {1, 4, 6};

  Graph g;
  // Cancel the fixed positional table so slot content is exactly patch*W_e.
  Mat tokens = patches * w_embed;
  Graph gp;
  TokenBatch zero_tb = tokens_for(gp, Mat::Zero(3, enc_dim), slots, {});
  const Mat pos_rows = dec.assemble(gp, zero_tb, 8, 0).value();
  for (std::size_t k = 0; k < slots.size(); ++k)
    tokens.row(static_cast<long>(k)) -= pos_rows.row(slots[k]);

  TokenBatch tb = tokens_for(g, tokens, slots, {});
  Var seq = dec.assemble(g, tb, 8, 0);
  // Identity decoder: apply the head directly to the assembled sequence.
  Var out = g.add_rowvec(g.matmul(seq, g.param(store.at("decoder.head_imu.w"))),
                         g.param(store.at("decoder.head_imu.b")));
  for (std::size_t k = 0; k < slots.size(); ++k)
    CHECK((out.value().row(slots[k]) - patches.row(static_cast<long>(k)))
              .cwiseAbs()
              .maxCoeff() < 1e-4);
}
