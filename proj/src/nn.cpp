// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/nn.hpp"

#include <cmath>

#include "evimae/errors.hpp"

namespace evimae::nn {

Parameter& ParamStore::create(const std::string& name, int rows, int cols) {
  if (params_.count(name)) throw InvalidParam("parameter already exists: " + name);
  auto p = std::make_unique<Parameter>(name, rows, cols);
  Parameter& ref = *p;
  params_.emplace(name, std::move(p));
  return ref;
}

Parameter* ParamStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

const Parameter* ParamStore::find(const std::string& name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

Parameter& ParamStore::at(const std::string& name) {
  Parameter* p = find(name);
  if (!p) throw InvalidParam("no such parameter: " + name);
  return *p;
}

void ParamStore::zero_grad() {
  for (auto& [_, p] : params_) p->grad.setZero();
}

std::vector<Parameter*> ParamStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& [_, p] : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& [_, p] : params_) out.push_back(p.get());
  return out;
}

void init_normal(Parameter& p, Rng& rng, double std_dev) {
  for (long c = 0; c < p.value.cols(); ++c)
    for (long r = 0; r < p.value.rows(); ++r) p.value(r, c) = rng.normal() * std_dev;
}

Linear::Linear(ParamStore& store, const std::string& prefix, int in, int out, Rng& rng) {
  w = &store.create(prefix + ".w", in, out);
  b = &store.create(prefix + ".b", 1, out);
  // Xavier scaling keeps activations O(1) through stacked layers; constant
  // 0.02 collapses small networks toward zero output, which the cosine loss
  // cannot tolerate (1/norm gradient terms).
  init_normal(*w, rng, std::sqrt(2.0 / (in + out)));
}

Var Linear::forward(Graph& g, Var x) const {
  return g.add_rowvec(g.matmul(x, g.param(*w)), g.param(*b));
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& prefix, int dim) {
  gamma = &store.create(prefix + ".gamma", 1, dim);
  beta = &store.create(prefix + ".beta", 1, dim);
  gamma->value.setOnes();
}

Var LayerNorm::forward(Graph& g, Var x) const {
  return g.layernorm_rows(x, g.param(*gamma), g.param(*beta));
}

MultiHeadSelfAttention::MultiHeadSelfAttention(ParamStore& store, const std::string& prefix,
                                               int dim_, int heads_, Rng& rng)
    : heads(heads_), dim(dim_) {
  if (dim % heads != 0) throw InvalidParam("attention dim must be divisible by heads");
  wq = Linear(store, prefix + ".wq", dim, dim, rng);
  wk = Linear(store, prefix + ".wk", dim, dim, rng);
  wv = Linear(store, prefix + ".wv", dim, dim, rng);
  wo = Linear(store, prefix + ".wo", dim, dim, rng);
}

Var MultiHeadSelfAttention::forward(Graph& g, Var x) const {
  const int head_dim = dim / heads;
  Var q = wq.forward(g, x);
  Var k = wk.forward(g, x);
  Var v = wv.forward(g, x);
  std::vector<Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (int h = 0; h < heads; ++h) {
    Var qh = g.slice_cols(q, h * head_dim, head_dim);
    Var kh = g.slice_cols(k, h * head_dim, head_dim);
    Var vh = g.slice_cols(v, h * head_dim, head_dim);
    Var scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt);
    Var attn = g.softmax_rows(scores);
    outs.push_back(g.matmul(attn, vh));
  }
  return wo.forward(g, g.concat_cols(outs));
}

Mlp::Mlp(ParamStore& store, const std::string& prefix, int in, int hidden, int out, Rng& rng) {
  fc1 = Linear(store, prefix + ".fc1", in, hidden, rng);
  fc2 = Linear(store, prefix + ".fc2", hidden, out, rng);
}

Var Mlp::forward(Graph& g, Var x) const { return fc2.forward(g, g.gelu(fc1.forward(g, x))); }

TransformerBlock::TransformerBlock(ParamStore& store, const std::string& prefix, int dim,
                                   int heads, double mlp_ratio, Rng& rng) {
  ln1 = LayerNorm(store, prefix + ".ln1", dim);
  ln2 = LayerNorm(store, prefix + ".ln2", dim);
  attn = MultiHeadSelfAttention(store, prefix + ".attn", dim, heads, rng);
  const int hidden = static_cast<int>(std::lround(dim * mlp_ratio));
  mlp = Mlp(store, prefix + ".mlp", dim, hidden, dim, rng);
}

Var TransformerBlock::forward(Graph& g, Var x) const {
  Var h = g.add(x, attn.forward(g, ln1.forward(g, x)));
  return g.add(h, mlp.forward(g, ln2.forward(g, h)));
}

TransformerEncoder::TransformerEncoder(ParamStore& store, const std::string& prefix, int depth,
                                       int dim, int heads, double mlp_ratio, Rng& rng) {
  for (int i = 0; i < depth; ++i)
    blocks.emplace_back(store, prefix + ".block" + std::to_string(i), dim, heads, mlp_ratio, rng);
  norm = LayerNorm(store, prefix + ".norm", dim);
}

Var TransformerEncoder::forward(Graph& g, Var x) const {
  for (const auto& b : blocks) x = b.forward(g, x);
  return norm.forward(g, x);
}

Mat sincos_table_1d(int positions, int dim) {
  if (dim % 2 != 0 || dim <= 0) throw InvalidParam("sincos dim must be positive and even");
  Mat out(positions, dim);
  for (int p = 0; p < positions; ++p) {
    for (int i = 0; i < dim / 2; ++i) {
      const double omega = std::pow(10000.0, -2.0 * i / dim);
      out(p, 2 * i) = std::sin(p * omega);
      out(p, 2 * i + 1) = std::cos(p * omega);
    }
  }
  return out;
}

Mat sincos_table(const std::vector<int>& axis_sizes, const std::vector<int>& dims) {
  if (axis_sizes.size() != dims.size() || axis_sizes.empty())
    throw InvalidParam("sincos_table: axis/dim count mismatch");
  std::vector<Mat> per_axis;
  long total = 1;
  int width = 0;
  for (std::size_t a = 0; a < axis_sizes.size(); ++a) {
    per_axis.push_back(sincos_table_1d(axis_sizes[a], dims[a]));
    total *= axis_sizes[a];
    width += dims[a];
  }
  Mat out(total, width);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    // Row-major flattening: last axis fastest.
    std::vector<int> coord(axis_sizes.size());
    for (int a = static_cast<int>(axis_sizes.size()) - 1; a >= 0; --a) {
      coord[static_cast<std::size_t>(a)] = static_cast<int>(rem % axis_sizes[static_cast<std::size_t>(a)]);
      rem /= axis_sizes[static_cast<std::size_t>(a)];
    }
    int at = 0;
    for (std::size_t a = 0; a < axis_sizes.size(); ++a) {
      out.block(flat, at, 1, dims[a]) = per_axis[a].row(coord[a]);
      at += dims[a];
    }
  }
  return out;
}

std::vector<int> split_embed_dims(int embed_dim, int axes) {
  if (axes <= 0 || embed_dim < 2 * axes || embed_dim % 2 != 0)
    throw InvalidParam("split_embed_dims: width too small for axis count");
  std::vector<int> dims(static_cast<std::size_t>(axes));
  int base = embed_dim / axes;
  if (base % 2 != 0) --base;
  int used = 0;
  for (int a = 0; a < axes; ++a) {
    dims[static_cast<std::size_t>(a)] = base;
    used += base;
  }
  // Remainder (even by construction) goes to the first axis.
  dims[0] += embed_dim - used;
  return dims;
}

void AdamOptimizer::step(ParamStore& store, const std::function<double(const Parameter&)>& lr_of) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Parameter* p : store.all()) {
    p->m = cfg_.beta1 * p->m + (1.0 - cfg_.beta1) * p->grad;
    p->v = cfg_.beta2 * p->v.array() + (1.0 - cfg_.beta2) * p->grad.array().square();
    const double lr = lr_of(*p);
    p->value.array() -=
        lr * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + cfg_.eps);
  }
}

void AdamOptimizer::step(ParamStore& store, double lr) {
  step(store, [lr](const Parameter&) { return lr; });
}

double step_decay_lr(double base_lr, double decay, int every_epochs, int epoch) {
  if (every_epochs <= 0) throw InvalidParam("step_decay_lr: decay interval must be positive");
  return base_lr * std::pow(decay, static_cast<double>(epoch / every_epochs));
}

}  // namespace evimae::nn
