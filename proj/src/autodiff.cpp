// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/autodiff.hpp"

#include <cmath>
#include <memory>

#include "evimae/errors.hpp"

namespace evimae::ad {

namespace {
void require(bool cond, const char* what) {
  if (!cond) throw ShapeError(what);
}
}  // namespace

const Mat& Var::value() const { return g->value(*this); }

int Graph::push(Mat val, bool needs_grad) {
  Node n;
  n.val = std::move(val);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Graph::Node& Graph::node(Var v) { return nodes_[static_cast<std::size_t>(v.idx)]; }
const Graph::Node& Graph::node(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)]; }

Mat& Graph::grad_buf(int idx) {
  Node& n = nodes_[static_cast<std::size_t>(idx)];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.val.rows(), n.val.cols());
  return n.grad;
}

void Graph::touch(int idx) { nodes_[static_cast<std::size_t>(idx)].touched = true; }

void Graph::check_same_graph(Var a) const {
  if (a.g != this || a.idx < 0 || a.idx >= static_cast<int>(nodes_.size()))
    throw IndexError("autodiff: Var does not belong to this graph");
}

const Mat& Graph::value(Var v) const {
  check_same_graph(v);
  return node(v).val;
}

Mat Graph::gradient(Var v) const {
  check_same_graph(v);
  const Node& n = node(v);
  if (n.grad.size() == 0) return Mat::Zero(n.val.rows(), n.val.cols());
  return n.grad;
}

Var Graph::input(Mat v) { return Var{this, push(std::move(v), false)}; }

Var Graph::param(Parameter& p) {
  const int i = push(p.value, true);
  Parameter* bound = &p;
  nodes_[static_cast<std::size_t>(i)].bound = bound;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, bound]() {
    bound->grad += nodes_[static_cast<std::size_t>(i)].grad;
  };
  return Var{this, i};
}

// Shared helper: accumulate `delta` into node `dst` if it participates in
// the gradient computation.
#define ACCUM(dst, delta)                          \
  do {                                             \
    if (nodes_[static_cast<std::size_t>(dst)].needs_grad) { \
      grad_buf(dst) += (delta);                    \
      touch(dst);                                  \
    }                                              \
  } while (0)

Var Graph::add(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  const int i = push(node(a).val + node(b).val, node(a).needs_grad || node(b).needs_grad);
  const int ia = a.idx, ib = b.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, ib]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, g);
    ACCUM(ib, g);
  };
  return Var{this, i};
}

Var Graph::sub(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  const int i = push(node(a).val - node(b).val, node(a).needs_grad || node(b).needs_grad);
  const int ia = a.idx, ib = b.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, ib]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, g);
    ACCUM(ib, -g);
  };
  return Var{this, i};
}

Var Graph::hadamard(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shape mismatch");
  const int i = push(node(a).val.cwiseProduct(node(b).val),
                     node(a).needs_grad || node(b).needs_grad);
  const int ia = a.idx, ib = b.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, ib]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, g.cwiseProduct(nodes_[static_cast<std::size_t>(ib)].val));
    ACCUM(ib, g.cwiseProduct(nodes_[static_cast<std::size_t>(ia)].val));
  };
  return Var{this, i};
}

Var Graph::scale(Var a, double c) {
  check_same_graph(a);
  const int i = push(node(a).val * c, node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, c]() {
    ACCUM(ia, nodes_[static_cast<std::size_t>(i)].grad * c);
  };
  return Var{this, i};
}

Var Graph::add_const(Var a, double c) {
  check_same_graph(a);
  const int i = push(node(a).val.array() + c, node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    ACCUM(ia, nodes_[static_cast<std::size_t>(i)].grad);
  };
  return Var{this, i};
}

Var Graph::square(Var a) {
  check_same_graph(a);
  const int i = push(node(a).val.cwiseProduct(node(a).val), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, 2.0 * g.cwiseProduct(nodes_[static_cast<std::size_t>(ia)].val));
  };
  return Var{this, i};
}

Var Graph::scale_by(Var a, Var s) {
  check_same_graph(a);
  check_same_graph(s);
  require(s.rows() == 1 && s.cols() == 1, "scale_by: scale must be 1x1");
  const double sv = node(s).val(0, 0);
  const int i = push(node(a).val * sv, node(a).needs_grad || node(s).needs_grad);
  const int ia = a.idx, is = s.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, is]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const double scale_val = nodes_[static_cast<std::size_t>(is)].val(0, 0);
    ACCUM(ia, g * scale_val);
    if (nodes_[static_cast<std::size_t>(is)].needs_grad) {
      grad_buf(is)(0, 0) += g.cwiseProduct(nodes_[static_cast<std::size_t>(ia)].val).sum();
      touch(is);
    }
  };
  return Var{this, i};
}

Var Graph::matmul(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
  const int i = push(node(a).val * node(b).val, node(a).needs_grad || node(b).needs_grad);
  const int ia = a.idx, ib = b.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, ib]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, g * nodes_[static_cast<std::size_t>(ib)].val.transpose());
    ACCUM(ib, nodes_[static_cast<std::size_t>(ia)].val.transpose() * g);
  };
  return Var{this, i};
}

Var Graph::matmul_nt(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  require(a.cols() == b.cols(), "matmul_nt: trailing dimension mismatch");
  const int i = push(node(a).val * node(b).val.transpose(),
                     node(a).needs_grad || node(b).needs_grad);
  const int ia = a.idx, ib = b.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, ib]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, g * nodes_[static_cast<std::size_t>(ib)].val);
    ACCUM(ib, g.transpose() * nodes_[static_cast<std::size_t>(ia)].val);
  };
  return Var{this, i};
}

Var Graph::transpose(Var a) {
  check_same_graph(a);
  const int i = push(node(a).val.transpose(), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    ACCUM(ia, nodes_[static_cast<std::size_t>(i)].grad.transpose());
  };
  return Var{this, i};
}

Var Graph::add_rowvec(Var a, Var r) {
  check_same_graph(a);
  check_same_graph(r);
  require(r.rows() == 1 && r.cols() == a.cols(), "add_rowvec: row vector shape mismatch");
  Mat out = node(a).val;
  out.rowwise() += node(r).val.row(0);
  const int i = push(std::move(out), node(a).needs_grad || node(r).needs_grad);
  const int ia = a.idx, ir = r.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, ir]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    ACCUM(ia, g);
    ACCUM(ir, g.colwise().sum());
  };
  return Var{this, i};
}

Var Graph::gelu(Var a) {
  check_same_graph(a);
  const Mat& x = node(a).val;
  Mat out = x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); });
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const Mat d = nodes_[static_cast<std::size_t>(ia)].val.unaryExpr([](double v) {
      return 0.5 * (1.0 + std::erf(v / std::sqrt(2.0))) +
             v * std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
    });
    ACCUM(ia, g.cwiseProduct(d));
  };
  return Var{this, i};
}

Var Graph::softmax_rows(Var a) {
  check_same_graph(a);
  const Mat& x = node(a).val;
  Mat out(x.rows(), x.cols());
  for (long r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    Eigen::ArrayXd e = (x.row(r).array() - mx).exp();
    out.row(r) = (e / e.sum()).matrix();
  }
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const Mat& p = nodes_[static_cast<std::size_t>(i)].val;
    Mat gp = g.cwiseProduct(p);
    Eigen::VectorXd rowdot = gp.rowwise().sum();
    Mat dx = gp - p.cwiseProduct(rowdot.replicate(1, p.cols()));
    ACCUM(ia, dx);
  };
  return Var{this, i};
}

Var Graph::log_softmax_rows(Var a) {
  check_same_graph(a);
  const Mat& x = node(a).val;
  Mat out(x.rows(), x.cols());
  for (long r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    const double lse = std::log((x.row(r).array() - mx).exp().sum()) + mx;
    out.row(r) = x.row(r).array() - lse;
  }
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const Mat p = nodes_[static_cast<std::size_t>(i)].val.array().exp().matrix();
    Eigen::VectorXd rowsum = g.rowwise().sum();
    Mat dx = g - p.cwiseProduct(rowsum.replicate(1, p.cols()));
    ACCUM(ia, dx);
  };
  return Var{this, i};
}

Var Graph::layernorm_rows(Var x, Var gamma, Var beta, double eps) {
  check_same_graph(x);
  check_same_graph(gamma);
  check_same_graph(beta);
  require(gamma.rows() == 1 && gamma.cols() == x.cols(), "layernorm: gamma shape");
  require(beta.rows() == 1 && beta.cols() == x.cols(), "layernorm: beta shape");
  const Mat& xv = node(x).val;
  const long n = xv.rows(), d = xv.cols();
  Mat xhat(n, d);
  Eigen::VectorXd inv_std(n);
  for (long r = 0; r < n; ++r) {
    const double mu = xv.row(r).mean();
    const double var = (xv.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std(r) = is;
    xhat.row(r) = (xv.row(r).array() - mu) * is;
  }
  Mat out = xhat;
  out.array().rowwise() *= node(gamma).val.row(0).array();
  out.rowwise() += node(beta).val.row(0);
  const int i = push(std::move(out), node(x).needs_grad || node(gamma).needs_grad ||
                                         node(beta).needs_grad);
  const int ix = x.idx, ig = gamma.idx, ib = beta.idx;
  // Keep xhat / inv_std alive for the backward pass.
  auto xhat_p = std::make_shared<Mat>(std::move(xhat));
  auto istd_p = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ix, ig, ib, xhat_p, istd_p]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const Mat& xh = *xhat_p;
    const long dd = xh.cols();
    Mat ghat = g;
    ghat.array().rowwise() *= nodes_[static_cast<std::size_t>(ig)].val.row(0).array();
    Eigen::VectorXd mean_ghat = ghat.rowwise().mean();
    Eigen::VectorXd mean_gx = ghat.cwiseProduct(xh).rowwise().mean();
    Mat dx = ghat - mean_ghat.replicate(1, dd) - xh.cwiseProduct(mean_gx.replicate(1, dd));
    dx.array().colwise() *= istd_p->array();
    ACCUM(ix, dx);
    ACCUM(ig, g.cwiseProduct(xh).colwise().sum());
    ACCUM(ib, g.colwise().sum());
  };
  return Var{this, i};
}

Var Graph::l2_normalize_rows(Var a) {
  check_same_graph(a);
  const Mat& x = node(a).val;
  Eigen::VectorXd norms = x.rowwise().norm();
  for (long r = 0; r < norms.size(); ++r) {
    if (norms(r) < 1e-12) throw ZeroNorm("l2_normalize_rows: row norm below 1e-12");
  }
  Mat out = x.array().colwise() / norms.array();
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  auto norms_p = std::make_shared<Eigen::VectorXd>(std::move(norms));
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, norms_p]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const Mat& y = nodes_[static_cast<std::size_t>(i)].val;  // x / n
    Eigen::VectorXd ydotg = y.cwiseProduct(g).rowwise().sum();
    Mat dx = g - y.cwiseProduct(ydotg.replicate(1, y.cols()));
    dx.array().colwise() /= norms_p->array();
    ACCUM(ia, dx);
  };
  return Var{this, i};
}

Var Graph::slice_cols(Var a, int c0, int n) {
  check_same_graph(a);
  require(c0 >= 0 && n >= 0 && c0 + n <= a.cols(), "slice_cols: range out of bounds");
  const int i = push(node(a).val.middleCols(c0, n), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, c0, n]() {
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad) {
      grad_buf(ia).middleCols(c0, n) += nodes_[static_cast<std::size_t>(i)].grad;
      touch(ia);
    }
  };
  return Var{this, i};
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no parts");
  long rows = parts[0].rows(), cols = 0;
  bool needs = false;
  for (Var p : parts) {
    check_same_graph(p);
    require(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
    needs = needs || node(p).needs_grad;
  }
  Mat out(rows, cols);
  long at = 0;
  std::vector<int> idxs;
  std::vector<long> offsets;
  for (Var p : parts) {
    out.middleCols(at, p.cols()) = node(p).val;
    idxs.push_back(p.idx);
    offsets.push_back(at);
    at += p.cols();
  }
  const int i = push(std::move(out), needs);
  nodes_[static_cast<std::size_t>(i)].back = [this, i, idxs, offsets]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    for (std::size_t k = 0; k < idxs.size(); ++k) {
      Node& p = nodes_[static_cast<std::size_t>(idxs[k])];
      if (p.needs_grad) {
        grad_buf(idxs[k]) += g.middleCols(offsets[k], p.val.cols());
        touch(idxs[k]);
      }
    }
  };
  return Var{this, i};
}

Var Graph::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no parts");
  long cols = parts[0].cols(), rows = 0;
  bool needs = false;
  for (Var p : parts) {
    check_same_graph(p);
    require(p.cols() == cols, "concat_rows: column mismatch");
    rows += p.rows();
    needs = needs || node(p).needs_grad;
  }
  Mat out(rows, cols);
  long at = 0;
  std::vector<int> idxs;
  std::vector<long> offsets;
  for (Var p : parts) {
    out.middleRows(at, p.rows()) = node(p).val;
    idxs.push_back(p.idx);
    offsets.push_back(at);
    at += p.rows();
  }
  const int i = push(std::move(out), needs);
  nodes_[static_cast<std::size_t>(i)].back = [this, i, idxs, offsets]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    for (std::size_t k = 0; k < idxs.size(); ++k) {
      Node& p = nodes_[static_cast<std::size_t>(idxs[k])];
      if (p.needs_grad) {
        grad_buf(idxs[k]) += g.middleRows(offsets[k], p.val.rows());
        touch(idxs[k]);
      }
    }
  };
  return Var{this, i};
}

Var Graph::gather_rows(Var a, std::vector<int> idx) {
  check_same_graph(a);
  Mat out(static_cast<long>(idx.size()), a.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= a.rows()) throw IndexError("gather_rows: index out of range");
    out.row(static_cast<long>(k)) = node(a).val.row(idx[k]);
  }
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, idx = std::move(idx)]() {
    if (!nodes_[static_cast<std::size_t>(ia)].needs_grad) return;
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    Mat& ga = grad_buf(ia);
    for (std::size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += g.row(static_cast<long>(k));
    touch(ia);
  };
  return Var{this, i};
}

Var Graph::scatter_rows(Var src, std::vector<int> idx, int total, Var fill) {
  check_same_graph(src);
  check_same_graph(fill);
  require(static_cast<long>(idx.size()) == src.rows(), "scatter_rows: index count mismatch");
  require(fill.rows() == 1 && fill.cols() == src.cols(), "scatter_rows: fill shape");
  std::vector<char> used(static_cast<std::size_t>(total), 0);
  Mat out = node(fill).val.row(0).replicate(total, 1);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= total) throw IndexError("scatter_rows: index out of range");
    if (used[static_cast<std::size_t>(idx[k])]) throw IndexError("scatter_rows: duplicate index");
    used[static_cast<std::size_t>(idx[k])] = 1;
    out.row(idx[k]) = node(src).val.row(static_cast<long>(k));
  }
  const int i = push(std::move(out), node(src).needs_grad || node(fill).needs_grad);
  const int is = src.idx, ifill = fill.idx;
  nodes_[static_cast<std::size_t>(i)].back =
      [this, i, is, ifill, idx = std::move(idx), used = std::move(used)]() {
        const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
        if (nodes_[static_cast<std::size_t>(is)].needs_grad) {
          Mat& gs = grad_buf(is);
          for (std::size_t k = 0; k < idx.size(); ++k)
            gs.row(static_cast<long>(k)) += g.row(idx[k]);
          touch(is);
        }
        if (nodes_[static_cast<std::size_t>(ifill)].needs_grad) {
          Mat acc = Mat::Zero(1, g.cols());
          for (long r = 0; r < g.rows(); ++r)
            if (!used[static_cast<std::size_t>(r)]) acc += g.row(r);
          grad_buf(ifill) += acc;
          touch(ifill);
        }
      };
  return Var{this, i};
}

Var Graph::mean_rows(Var a) {
  check_same_graph(a);
  require(a.rows() > 0, "mean_rows: empty input");
  const int i = push(node(a).val.colwise().mean(), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const long n = nodes_[static_cast<std::size_t>(ia)].val.rows();
    ACCUM(ia, g.replicate(n, 1) / static_cast<double>(n));
  };
  return Var{this, i};
}

Var Graph::rowwise_sum(Var a) {
  check_same_graph(a);
  const int i = push(node(a).val.rowwise().sum(), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const Mat& g = nodes_[static_cast<std::size_t>(i)].grad;
    const long c = nodes_[static_cast<std::size_t>(ia)].val.cols();
    ACCUM(ia, g.replicate(1, c));
  };
  return Var{this, i};
}

Var Graph::sum(Var a) {
  check_same_graph(a);
  Mat out(1, 1);
  out(0, 0) = node(a).val.sum();
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const double g = nodes_[static_cast<std::size_t>(i)].grad(0, 0);
    const Node& pa = nodes_[static_cast<std::size_t>(ia)];
    ACCUM(ia, Mat::Constant(pa.val.rows(), pa.val.cols(), g));
  };
  return Var{this, i};
}

Var Graph::mean(Var a) {
  check_same_graph(a);
  require(a.rows() > 0 && a.cols() > 0, "mean: empty input");
  Mat out(1, 1);
  out(0, 0) = node(a).val.mean();
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    const double g = nodes_[static_cast<std::size_t>(i)].grad(0, 0);
    const Node& pa = nodes_[static_cast<std::size_t>(ia)];
    const double n = static_cast<double>(pa.val.size());
    ACCUM(ia, Mat::Constant(pa.val.rows(), pa.val.cols(), g / n));
  };
  return Var{this, i};
}

Var Graph::trace_mean(Var a) {
  check_same_graph(a);
  require(a.rows() == a.cols() && a.rows() > 0, "trace_mean: square input required");
  Mat out(1, 1);
  out(0, 0) = node(a).val.trace() / static_cast<double>(a.rows());
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia]() {
    if (!nodes_[static_cast<std::size_t>(ia)].needs_grad) return;
    const double g = nodes_[static_cast<std::size_t>(i)].grad(0, 0);
    Mat& ga = grad_buf(ia);
    const double n = static_cast<double>(ga.rows());
    for (long r = 0; r < ga.rows(); ++r) ga(r, r) += g / n;
    touch(ia);
  };
  return Var{this, i};
}

Var Graph::pick(Var a, int r, int c) {
  check_same_graph(a);
  require(r >= 0 && r < a.rows() && c >= 0 && c < a.cols(), "pick: index out of range");
  Mat out(1, 1);
  out(0, 0) = node(a).val(r, c);
  const int i = push(std::move(out), node(a).needs_grad);
  const int ia = a.idx;
  nodes_[static_cast<std::size_t>(i)].back = [this, i, ia, r, c]() {
    if (!nodes_[static_cast<std::size_t>(ia)].needs_grad) return;
    grad_buf(ia)(r, c) += nodes_[static_cast<std::size_t>(i)].grad(0, 0);
    touch(ia);
  };
  return Var{this, i};
}

void Graph::backward(Var root) {
  check_same_graph(root);
  if (ran_backward_) throw IndexError("autodiff: backward() already ran on this graph");
  require(root.rows() == 1 && root.cols() == 1, "backward: root must be scalar");
  ran_backward_ = true;
  grad_buf(root.idx)(0, 0) = 1.0;
  touch(root.idx);
  for (int i = root.idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.touched && n.back) n.back();
  }
}

#undef ACCUM

}  // namespace evimae::ad
