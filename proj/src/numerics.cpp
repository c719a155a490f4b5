#include "mppa/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mppa {

TensorF matmul(const TensorF& a, const TensorF& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.cols() != b.rows())
        throw std::invalid_argument("matmul: shape mismatch " + shape_str(a.shape) +
                                    " vs " + shape_str(b.shape));
    const std::size_t m = a.rows(), k = a.cols(), p = b.cols();
    TensorF out({m, p});
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = &a.data[i * k];
        double* orow = &out.data[i * p];
        for (std::size_t t = 0; t < k; ++t) {
            const double av = arow[t];
            const double* brow = &b.data[t * p];
            for (std::size_t j = 0; j < p; ++j) orow[j] += av * brow[j];
        }
    }
    require_finite(out, "matmul");
    return out;
}

TensorF matmul_nt(const TensorF& a, const TensorF& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.cols() != b.cols())
        throw std::invalid_argument("matmul_nt: shape mismatch " + shape_str(a.shape) +
                                    " vs " + shape_str(b.shape));
    const std::size_t m = a.rows(), k = a.cols(), p = b.rows();
    TensorF out({m, p});
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = &a.data[i * k];
        for (std::size_t j = 0; j < p; ++j) {
            const double* brow = &b.data[j * k];
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
            out.at(i, j) = acc;
        }
    }
    require_finite(out, "matmul_nt");
    return out;
}

TensorF matmul_tn(const TensorF& a, const TensorF& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.rows() != b.rows())
        throw std::invalid_argument("matmul_tn: shape mismatch " + shape_str(a.shape) +
                                    " vs " + shape_str(b.shape));
    const std::size_t k = a.rows(), m = a.cols(), p = b.cols();
    TensorF out({m, p});
    for (std::size_t t = 0; t < k; ++t) {
        const double* arow = &a.data[t * m];
        const double* brow = &b.data[t * p];
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            double* orow = &out.data[i * p];
            for (std::size_t j = 0; j < p; ++j) orow[j] += av * brow[j];
        }
    }
    require_finite(out, "matmul_tn");
    return out;
}

TensorF softmax_rows(const TensorF& scores) {
    const std::size_t n = scores.rows(), m = scores.cols();
    TensorF out({n, m});
    const double kNegInf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < m; ++j) {
            const double v = scores.at(i, j);
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
                throw std::runtime_error("softmax_rows: non-finite score (not a mask sentinel)");
            if (v > mx) mx = v;
        }
        if (mx == kNegInf)
            throw std::runtime_error("softmax_rows: row " + std::to_string(i) +
                                     " is entirely -inf, cannot normalize");
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double v = scores.at(i, j);
            const double e = (v == kNegInf) ? 0.0 : std::exp(v - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < m; ++j) out.at(i, j) /= sum;
    }
    return out;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        const double z = std::exp(-x);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

double grad_check(const std::function<double(const TensorF&)>& loss,
                  const TensorF& analytic_grad, const TensorF& params, double h) {
    require_same_shape(analytic_grad, params, "grad_check");
    TensorF probe = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double p0 = probe.data[i];
        probe.data[i] = p0 + h;
        const double lp = loss(probe);
        probe.data[i] = p0 - h;
        const double lm = loss(probe);
        probe.data[i] = p0;
        if (!std::isfinite(lp) || !std::isfinite(lm))
            throw std::runtime_error("grad_check: non-finite loss at probe point");
        const double numeric = (lp - lm) / (2.0 * h);
        const double analytic = analytic_grad.data[i];
        const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
        if (rel > worst) worst = rel;
    }
    return worst;
}

}  // namespace mppa
