// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace evimae::ad {

using Mat = Eigen::MatrixXd;

// A trainable matrix with its gradient accumulator and Adam moments.
// Parameters are owned by a ParamStore (see nn.hpp) and bound into Graphs
// by pointer, so addresses must stay stable for the model's lifetime.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;
  Mat v;

  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Mat::Zero(rows, cols)),
        grad(Mat::Zero(rows, cols)),
        m(Mat::Zero(rows, cols)),
        v(Mat::Zero(rows, cols)) {}
};

class Graph;

// Lightweight handle into a Graph's node arena.
struct Var {
  Graph* g = nullptr;
  int idx = -1;
  bool valid() const { return g != nullptr && idx >= 0; }
  const Mat& value() const;
  long rows() const { return value().rows(); }
  long cols() const { return value().cols(); }
};

// Reverse-mode tape over dense double matrices. One Graph instance records
// one forward pass; backward() walks the tape in reverse creation order and
// accumulates into bound Parameters. All math is float64 so the
// finite-difference gradient gates hold at 1e-4 relative error.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var input(Mat v);                 // constant leaf, no gradient
  Var param(Parameter& p);          // differentiable leaf bound to p

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var scale(Var a, double c);
  Var add_const(Var a, double c);
  Var square(Var a);
  // out = a * s(0,0) where s is a 1x1 Var (used by the GIN (1+eps) term).
  Var scale_by(Var a, Var s);

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);      // a * b^T
  Var transpose(Var a);
  Var add_rowvec(Var a, Var r);     // broadcast a 1xC row over all rows of a

  Var gelu(Var a);                  // exact erf form
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);
  Var layernorm_rows(Var x, Var gamma, Var beta, double eps = 1e-6);
  Var l2_normalize_rows(Var a);     // rows must have norm >= 1e-12

  Var slice_cols(Var a, int c0, int n);
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var gather_rows(Var a, std::vector<int> idx);
  // out has `total` rows; out[idx[k]] = src.row(k), remaining rows = fill (1xC).
  Var scatter_rows(Var src, std::vector<int> idx, int total, Var fill);

  Var mean_rows(Var a);             // 1xC column means
  Var rowwise_sum(Var a);           // Nx1
  Var sum(Var a);                   // 1x1
  Var mean(Var a);                  // 1x1
  Var trace_mean(Var a);            // 1x1, mean of the diagonal (square input)
  Var pick(Var a, int i, int j);    // 1x1

  // Seeds d(root)=1 and accumulates gradients into every bound Parameter.
  // root must be 1x1. May be called once per recorded tape.
  void backward(Var root);

  const Mat& value(Var v) const;
  // Gradient of the last backward() w.r.t. any node (zero matrix if the node
  // was never reached). Only meaningful after backward().
  Mat gradient(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;                       // lazily sized
    bool needs_grad = false;
    bool touched = false;           // received a nonzero upstream gradient
    Parameter* bound = nullptr;
    std::function<void()> back;     // pulls this->grad into parents
  };

  friend struct Var;

  int push(Mat val, bool needs_grad);
  Node& node(Var v);
  const Node& node(Var v) const;
  Mat& grad_buf(int idx);           // allocates zeros on first touch
  void touch(int idx);
  void check_same_graph(Var a) const;

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace evimae::ad
