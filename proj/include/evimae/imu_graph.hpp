// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// IMU feature graph: fully-connected device nodes with pooled per-device
// features, plus the masked GIN encode / remask / decode branch.
#pragma once

#include <string>
#include <vector>

#include "evimae/masking.hpp"
#include "evimae/nn.hpp"

namespace evimae {

struct GinConfig {
  int layers = 2;
  int hidden_dim = 64;
  bool learnable_epsilon = true;
};

struct ImuGraphData {
  std::vector<std::string> node_ids;  // canonical device order
  Eigen::MatrixXd adjacency;          // symmetric, zero diagonal
  Eigen::MatrixXd features;           // n_nodes x feature_dim (f_d)
};

// Fully-connected adjacency (no self loops; the GIN (1+eps) term carries
// self information).
Eigen::MatrixXd fully_connected_adjacency(int n_nodes);

ImuGraphData build_graph(const Eigen::MatrixXd& per_device_features,
                         const std::vector<std::string>& node_ids);

// h' = MLP((1+eps) h + A h), MLP = linear -> GELU -> linear.
struct GinLayer {
  nn::Parameter* eps = nullptr;
  nn::Mlp mlp;
  bool learnable = true;
  GinLayer() = default;
  GinLayer(nn::ParamStore& store, const std::string& prefix, int in, int hidden, int out,
           bool learnable_epsilon, Rng& rng);
  nn::Var forward(nn::Graph& g, nn::Var adjacency, nn::Var h) const;
};

// Encoder + decoder GIN stacks with their two distinct mask tokens; all
// parameters live under the "graph." namespace.
class GraphBranch {
 public:
  GraphBranch() = default;
  GraphBranch(nn::ParamStore& store, const GinConfig& cfg, int feature_dim, Rng& rng);

  // Masked rows of f_d are replaced by the encoder mask token.
  nn::Var corrupt(nn::Graph& g, nn::Var f_d, const MaskPlan& plan) const;
  nn::Var encode(nn::Graph& g, nn::Var adjacency, nn::Var f_dc) const;
  // Masked rows of f_g are replaced by the decoder mask embedding.
  nn::Var remask(nn::Graph& g, nn::Var f_g, const MaskPlan& plan) const;
  nn::Var decode(nn::Graph& g, nn::Var adjacency, nn::Var f_g_masked) const;

  nn::Parameter& encoder_mask_token() const { return *enc_mask_; }
  nn::Parameter& decoder_mask_token() const { return *dec_mask_; }

 private:
  nn::Var run_stack(nn::Graph& g, const std::vector<GinLayer>& stack, nn::Var adjacency,
                    nn::Var h) const;
  nn::Var substitute(nn::Graph& g, nn::Var rows, const MaskPlan& plan,
                     nn::Parameter& token) const;

  std::vector<GinLayer> enc_layers_;
  std::vector<GinLayer> dec_layers_;
  nn::Parameter* enc_mask_ = nullptr;
  nn::Parameter* dec_mask_ = nullptr;
};

}  // namespace evimae
