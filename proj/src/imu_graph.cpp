// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/imu_graph.hpp"

#include "evimae/errors.hpp"

namespace evimae {

Eigen::MatrixXd fully_connected_adjacency(int n_nodes) {
  if (n_nodes < 1) throw InvalidParam("adjacency: need at least one node");
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(n_nodes, n_nodes);
  a.diagonal().setZero();
  return a;
}

ImuGraphData build_graph(const Eigen::MatrixXd& per_device_features,
                         const std::vector<std::string>& node_ids) {
  if (static_cast<long>(node_ids.size()) != per_device_features.rows())
    throw ShapeError("build_graph: feature row count != node count");
  ImuGraphData g;
  g.node_ids = node_ids;
  g.adjacency = fully_connected_adjacency(static_cast<int>(node_ids.size()));
  g.features = per_device_features;
  return g;
}

GinLayer::GinLayer(nn::ParamStore& store, const std::string& prefix, int in, int hidden, int out,
                   bool learnable_epsilon, Rng& rng)
    : learnable(learnable_epsilon) {
  eps = &store.create(prefix + ".eps", 1, 1);  // init 0
  mlp = nn::Mlp(store, prefix + ".mlp", in, hidden, out, rng);
}

nn::Var GinLayer::forward(nn::Graph& g, nn::Var adjacency, nn::Var h) const {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() != h.rows())
    throw ShapeError("gin_layer: adjacency/features shape mismatch");
  nn::Var eps_v = learnable ? g.param(*eps) : g.input(eps->value);
  nn::Var self = g.add(h, g.scale_by(h, eps_v));  // (1 + eps) h
  nn::Var agg = g.matmul(adjacency, h);
  return mlp.forward(g, g.add(self, agg));
}

GraphBranch::GraphBranch(nn::ParamStore& store, const GinConfig& cfg, int feature_dim, Rng& rng) {
  if (cfg.layers < 1) throw InvalidParam("GinConfig: layers must be >= 1");
  auto build = [&](const std::string& stack_prefix, std::vector<GinLayer>& stack) {
    for (int l = 0; l < cfg.layers; ++l) {
      const int in = (l == 0) ? feature_dim : cfg.hidden_dim;
      const int out = (l == cfg.layers - 1) ? feature_dim : cfg.hidden_dim;
      stack.emplace_back(store, stack_prefix + std::to_string(l), in, cfg.hidden_dim, out,
                         cfg.learnable_epsilon, rng);
    }
  };
  build("graph.encoder.layer", enc_layers_);
  build("graph.decoder.layer", dec_layers_);
  enc_mask_ = &store.create("graph.encoder_mask_token", 1, feature_dim);
  dec_mask_ = &store.create("graph.decoder_mask_token", 1, feature_dim);
  nn::init_normal(*enc_mask_, rng);
  nn::init_normal(*dec_mask_, rng);
}

nn::Var GraphBranch::substitute(nn::Graph& g, nn::Var rows, const MaskPlan& plan,
                                nn::Parameter& token) const {
  if (plan.total != rows.rows()) throw ShapeError("graph mask: plan does not match node count");
  const auto visible = plan.visible();
  return g.scatter_rows(g.gather_rows(rows, visible), visible, plan.total, g.param(token));
}

nn::Var GraphBranch::corrupt(nn::Graph& g, nn::Var f_d, const MaskPlan& plan) const {
  return substitute(g, f_d, plan, *enc_mask_);
}

nn::Var GraphBranch::remask(nn::Graph& g, nn::Var f_g, const MaskPlan& plan) const {
  return substitute(g, f_g, plan, *dec_mask_);
}

nn::Var GraphBranch::run_stack(nn::Graph& g, const std::vector<GinLayer>& stack, nn::Var adjacency,
                               nn::Var h) const {
  for (const auto& layer : stack) h = layer.forward(g, adjacency, h);
  return h;
}

nn::Var GraphBranch::encode(nn::Graph& g, nn::Var adjacency, nn::Var f_dc) const {
  return run_stack(g, enc_layers_, adjacency, f_dc);
}

nn::Var GraphBranch::decode(nn::Graph& g, nn::Var adjacency, nn::Var f_g_masked) const {
  return run_stack(g, dec_layers_, adjacency, f_g_masked);
}

}  // namespace evimae
