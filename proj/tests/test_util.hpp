// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared helpers for the unit and acceptance suites.
#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "evimae/autodiff.hpp"
#include "evimae/nn.hpp"

namespace evimae::testutil {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
};

// Compares analytic gradients against central finite differences for every
// entry of every parameter in the store. `run_backward` must rebuild the
// forward pass from current parameter values, call Graph::backward, and
// return the loss; analytic gradients are read from the parameter grad
// buffers it filled. The relative error is norm-wise per parameter,
// ||fd - analytic|| / max(||fd||, ||analytic||), which keeps individual
// near-zero entries from drowning the comparison in truncation noise.
inline GradCheckResult gradient_check(nn::ParamStore& store,
                                      const std::function<double()>& run_backward,
                                      double h = 1e-5) {
  store.zero_grad();
  (void)run_backward();
  std::vector<ad::Mat> grads;
  auto params = store.all();
  grads.reserve(params.size());
  for (auto* p : params) grads.push_back(p->grad);

  GradCheckResult res;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    ad::Parameter& p = *params[pi];
    ad::Mat fd(p.value.rows(), p.value.cols());
    for (long c = 0; c < p.value.cols(); ++c) {
      for (long r = 0; r < p.value.rows(); ++r) {
        const double orig = p.value(r, c);
        p.value(r, c) = orig + h;
        store.zero_grad();
        const double up = run_backward();
        p.value(r, c) = orig - h;
        store.zero_grad();
        const double dn = run_backward();
        p.value(r, c) = orig;
        fd(r, c) = (up - dn) / (2.0 * h);
      }
    }
    // Parameters with (near-)zero true gradient — e.g. the attention key
    // bias, which row-softmax cancels exactly — compare as noise over noise;
    // the absolute floor treats them as matching.
    const double denom = std::max({fd.norm(), grads[pi].norm(), 1e-6});
    const double rel = (fd - grads[pi]).norm() / denom;
    if (rel > res.max_rel_err) {
      res.max_rel_err = rel;
      res.worst_param = p.name;
    }
  }
  // Leave the analytic gradients in place for callers that inspect them.
  store.zero_grad();
  (void)run_backward();
  return res;
}

}  // namespace evimae::testutil
