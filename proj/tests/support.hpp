// Shared test helpers: finite-difference gradient checking and small
// reference implementations that the unit tests compare against.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "relsem/tensor.hpp"

namespace testsup {

// Central finite differences against the analytic gradient, one parameter
// element at a time.  `loss_fn` must be a pure function of the current
// parameter values (no dropout, no RNG).  Returns the worst relative error
// over all elements of all `params`; the denominator is floored so that
// near-zero gradients are compared absolutely.
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  int worst_index = -1;
};

inline GradCheckResult grad_check(const std::function<relsem::Tensor()>& loss_fn,
                                  const std::vector<relsem::Tensor>& params,
                                  double step = 1e-5, double floor = 1e-4) {
  for (const relsem::Tensor& p : params) {
    relsem::Tensor handle = p;
    handle.zero_grad();
  }
  relsem::Tensor loss = loss_fn();
  loss.backward();

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const relsem::Tensor& p : params) analytic.push_back(p.grad());

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    relsem::Tensor handle = params[pi];
    std::vector<double>& v = handle.values();
    for (size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + step;
      const double up = loss_fn().item();
      v[i] = saved - step;
      const double down = loss_fn().item();
      v[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), floor});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = handle.name().empty() ? "(unnamed)" : handle.name();
        result.worst_index = static_cast<int>(i);
      }
    }
  }
  return result;
}

// Plain triple-loop matrix product, used as the oracle for matmul.
inline std::vector<double> matmul_ref(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      int n, int k, int m) {
  std::vector<double> out(static_cast<size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += a[i * k + t] * b[t * m + j];
      out[i * m + j] = acc;
    }
  return out;
}

// Log-sum-exp cross entropy for one row, written independently of the
// library implementation (no max trick needed at test scale is itself a
// hazard, so this version keeps the shift for numeric honesty).
inline double cross_entropy_row_ref(const std::vector<double>& logits, int target) {
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return -(logits[static_cast<size_t>(target)] - mx - std::log(sum));
}

}  // namespace testsup
