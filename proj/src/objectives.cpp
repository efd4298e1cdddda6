// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/objectives.hpp"

#include "evimae/errors.hpp"

namespace evimae {

nn::Var pixel_mse(nn::Graph& g, nn::Var recon, const nn::Mat& target,
                  const std::vector<int>& loss_rows) {
  if (recon.rows() != target.rows() || recon.cols() != target.cols())
    throw ShapeError("pixel_mse: reconstruction/target shape mismatch");
  if (loss_rows.empty()) throw EmptyMask("pixel_mse: no rows selected for the loss");
  nn::Mat target_sel(static_cast<long>(loss_rows.size()), target.cols());
  for (std::size_t k = 0; k < loss_rows.size(); ++k) {
    if (loss_rows[k] < 0 || loss_rows[k] >= target.rows())
      throw IndexError("pixel_mse: loss row out of range");
    target_sel.row(static_cast<long>(k)) = target.row(loss_rows[k]);
  }
  nn::Var diff = g.sub(g.gather_rows(recon, loss_rows), g.input(std::move(target_sel)));
  return g.mean(g.square(diff));
}

nn::Var graph_cosine_loss(nn::Graph& g, nn::Var f_hat, nn::Var f_target,
                          const std::vector<int>& masked_nodes) {
  if (f_hat.rows() != f_target.rows() || f_hat.cols() != f_target.cols())
    throw ShapeError("graph_cosine_loss: shape mismatch");
  if (masked_nodes.empty()) throw EmptyMask("graph_cosine_loss: empty masked node set");
  nn::Var a = g.l2_normalize_rows(g.gather_rows(f_hat, masked_nodes));
  nn::Var b = g.l2_normalize_rows(g.gather_rows(f_target, masked_nodes));
  nn::Var cos = g.rowwise_sum(g.hadamard(a, b));  // |V_c| x 1
  return g.mean(g.add_const(g.scale(cos, -1.0), 1.0));
}

nn::Var contrastive_loss(nn::Graph& g, nn::Var video_pooled, nn::Var imu_pooled, double tau) {
  if (tau <= 0.0) throw InvalidParam("contrastive_loss: tau must be positive");
  if (video_pooled.rows() != imu_pooled.rows() || video_pooled.cols() != imu_pooled.cols())
    throw ShapeError("contrastive_loss: batch shapes differ");
  if (video_pooled.rows() < 1) throw ShapeError("contrastive_loss: empty batch");
  nn::Var v = g.l2_normalize_rows(video_pooled);
  nn::Var i = g.l2_normalize_rows(imu_pooled);
  nn::Var sim = g.scale(g.matmul_nt(v, i), 1.0 / tau);  // sim(k, j) = s(v_k, i_j)/tau
  nn::Var by_video = g.trace_mean(g.log_softmax_rows(sim));
  nn::Var by_imu = g.trace_mean(g.log_softmax_rows(g.transpose(sim)));
  return g.scale(g.add(by_video, by_imu), -0.5);
}

LossReport total_loss(double l_mse_video, double l_mse_imu, double l_cos, double l_con,
                      const LossWeights& w) {
  if (w.tau <= 0.0) throw InvalidParam("LossWeights: tau must be positive");
  LossReport r;
  r.l_mse_video = l_mse_video;
  r.l_mse_imu = l_mse_imu;
  r.l_cos = l_cos;
  r.l_con = l_con;
  r.total = w.alpha * (l_mse_video + l_mse_imu) + w.beta * l_cos + w.gamma * l_con;
  return r;
}

}  // namespace evimae
