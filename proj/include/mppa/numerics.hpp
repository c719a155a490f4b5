#pragma once

#include <functional>

#include "mppa/tensor.hpp"

namespace mppa {

// a[m x k] * b[k x p], fixed left-to-right summation over k.
TensorF matmul(const TensorF& a, const TensorF& b);
// a[m x k] * b[p x k]^T
TensorF matmul_nt(const TensorF& a, const TensorF& b);
// a[k x m]^T * b[k x p]
TensorF matmul_tn(const TensorF& a, const TensorF& b);

// Row-wise softmax with max-subtraction. -inf entries are mask sentinels
// and map to exactly 0; a row that is entirely -inf is an error.
TensorF softmax_rows(const TensorF& scores);

double sigmoid(double x);

// Max over coordinates of |analytic - central_difference| / max(1, |analytic|).
// loss must be finite at every probe point.
double grad_check(const std::function<double(const TensorF&)>& loss,
                  const TensorF& analytic_grad, const TensorF& params, double h);

}  // namespace mppa
