// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// The three pretraining losses and their weighted total.
#pragma once

#include <vector>

#include "evimae/nn.hpp"

namespace evimae {

struct LossWeights {
  double alpha = 1.0;   // pixel MSE
  double beta = 10.0;   // graph cosine
  double gamma = 0.01;  // contrastive
  double tau = 0.05;    // temperature
};

struct LossReport {
  double l_mse_video = 0.0;
  double l_mse_imu = 0.0;
  double l_cos = 0.0;
  double l_con = 0.0;
  double total = 0.0;
};

// Per-element mean squared error over the selected patch rows (the masked
// set by default; pass every index for the all-positions ablation).
nn::Var pixel_mse(nn::Graph& g, nn::Var recon, const nn::Mat& target,
                  const std::vector<int>& loss_rows);

// Mean over masked nodes of 1 - cos(f_hat, f_target). Rows with norm below
// 1e-12 raise ZeroNorm; an empty node set raises EmptyMask.
nn::Var graph_cosine_loss(nn::Graph& g, nn::Var f_hat, nn::Var f_target,
                          const std::vector<int>& masked_nodes);

// Symmetric InfoNCE over pooled per-sample features; rows are L2-normalized
// before the similarity product.
nn::Var contrastive_loss(nn::Graph& g, nn::Var video_pooled, nn::Var imu_pooled, double tau);

// total = alpha*(mse_video + mse_imu) + beta*cos + gamma*con.
LossReport total_loss(double l_mse_video, double l_mse_imu, double l_cos, double l_con,
                      const LossWeights& weights);

}  // namespace evimae
