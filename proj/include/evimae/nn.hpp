// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "evimae/autodiff.hpp"
#include "evimae/rng.hpp"

namespace evimae::nn {

using ad::Graph;
using ad::Mat;
using ad::Parameter;
using ad::Var;

// Owns every trainable array of a model, keyed by a dotted name
// ("imu_encoder.block0.attn.wq"). Iteration order is the sorted name order,
// which keeps optimizer updates and checkpoint layout deterministic.
class ParamStore {
 public:
  Parameter& create(const std::string& name, int rows, int cols);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& at(const std::string& name);

  void zero_grad();
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t count() const { return params_.size(); }

 private:
  std::map<std::string, std::unique_ptr<Parameter>> params_;
};

// Gaussian init with std 0.02 for weights; biases stay zero.
void init_normal(Parameter& p, Rng& rng, double std_dev = 0.02);

struct Linear {
  Parameter* w = nullptr;  // in x out
  Parameter* b = nullptr;  // 1 x out
  Linear() = default;
  Linear(ParamStore& store, const std::string& prefix, int in, int out, Rng& rng);
  Var forward(Graph& g, Var x) const;
};

struct LayerNorm {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& prefix, int dim);
  Var forward(Graph& g, Var x) const;
};

struct MultiHeadSelfAttention {
  Linear wq, wk, wv, wo;
  int heads = 1;
  int dim = 0;
  MultiHeadSelfAttention() = default;
  MultiHeadSelfAttention(ParamStore& store, const std::string& prefix, int dim, int heads,
                         Rng& rng);
  Var forward(Graph& g, Var x) const;
};

struct Mlp {
  Linear fc1, fc2;
  Mlp() = default;
  Mlp(ParamStore& store, const std::string& prefix, int in, int hidden, int out, Rng& rng);
  Var forward(Graph& g, Var x) const;
};

// Pre-norm transformer layer: x' = x + MSA(LN1(x)); y = x' + MLP(LN2(x')).
struct TransformerBlock {
  LayerNorm ln1, ln2;
  MultiHeadSelfAttention attn;
  Mlp mlp;
  TransformerBlock() = default;
  TransformerBlock(ParamStore& store, const std::string& prefix, int dim, int heads,
                   double mlp_ratio, Rng& rng);
  Var forward(Graph& g, Var x) const;
};

// Block stack with a closing LayerNorm.
struct TransformerEncoder {
  std::vector<TransformerBlock> blocks;
  LayerNorm norm;
  TransformerEncoder() = default;
  TransformerEncoder(ParamStore& store, const std::string& prefix, int depth, int dim, int heads,
                     double mlp_ratio, Rng& rng);
  Var forward(Graph& g, Var x) const;
};

// Fixed sin/cos table for one positional axis: row p = [sin(p*w_0), cos(p*w_0),
// sin(p*w_1), ...] with w_i = 10000^{-2i/dim}. dim must be even.
Mat sincos_table_1d(int positions, int dim);

// Factorized multi-axis table: each row concatenates the per-axis encodings of
// one grid point; axes vary row-major (first axis slowest). dims must sum to
// the embedding width and each entry must be even.
Mat sincos_table(const std::vector<int>& axis_sizes, const std::vector<int>& dims);

// Splits an embedding width across n axes in even chunks (first axes absorb
// the remainder, keeping every chunk even).
std::vector<int> split_embed_dims(int embed_dim, int axes);

// Adam with step-decay learning rate supplied per call. The per-parameter
// rate hook lets finetuning give the classifier head its own multiplier.
class AdamOptimizer {
 public:
  struct Config {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };
  AdamOptimizer() = default;
  explicit AdamOptimizer(Config cfg) : cfg_(cfg) {}

  void step(ParamStore& store, const std::function<double(const Parameter&)>& lr_of);
  void step(ParamStore& store, double lr);

  std::int64_t t() const { return t_; }
  void set_t(std::int64_t t) { t_ = t; }

 private:
  Config cfg_;
  std::int64_t t_ = 0;
};

// lr(epoch) = base * decay^floor(epoch / every).
double step_decay_lr(double base_lr, double decay, int every_epochs, int epoch);

}  // namespace evimae::nn
