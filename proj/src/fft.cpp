#include "mppa/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace mppa {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void transform_inplace(std::vector<double>& re, std::vector<double>& im, bool inverse) {
    const std::size_t n = re.size();
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTwoPi : -kTwoPi) / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const double wr = std::cos(ang * static_cast<double>(k));
                const double wi = std::sin(ang * static_cast<double>(k));
                const std::size_t a = i + k;
                const std::size_t b = i + k + len / 2;
                const double tr = re[b] * wr - im[b] * wi;
                const double ti = re[b] * wi + im[b] * wr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            re[i] *= inv;
            im[i] *= inv;
        }
    }
}
}  // namespace

ComplexVec::ComplexVec(std::vector<double> r, std::vector<double> i)
    : re(std::move(r)), im(std::move(i)) {
    if (re.size() != im.size())
        throw std::invalid_argument("ComplexVec: re/im length mismatch");
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

ComplexVec fft_forward(const ComplexVec& x) {
    if (!is_power_of_two(x.size()))
        throw std::invalid_argument("fft_forward: length " + std::to_string(x.size()) +
                                    " is not a power of two");
    ComplexVec out = x;
    transform_inplace(out.re, out.im, /*inverse=*/false);
    return out;
}

ComplexVec fft_inverse(const ComplexVec& x) {
    if (!is_power_of_two(x.size()))
        throw std::invalid_argument("fft_inverse: length " + std::to_string(x.size()) +
                                    " is not a power of two");
    ComplexVec out = x;
    transform_inplace(out.re, out.im, /*inverse=*/true);
    return out;
}

TensorF magnitude_spectrum_cols(const TensorF& chunk) {
    const std::size_t c = chunk.rows();
    const std::size_t d = chunk.cols();
    if (!is_power_of_two(c))
        throw std::invalid_argument("magnitude_spectrum_cols: chunk length " +
                                    std::to_string(c) + " is not a power of two");
    TensorF out({c, d});
    ComplexVec col(c);
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t t = 0; t < c; ++t) {
            col.re[t] = chunk.at(t, f);
            col.im[t] = 0.0;
        }
        ComplexVec spec = fft_forward(col);
        for (std::size_t k = 0; k < c; ++k)
            out.at(k, f) = std::hypot(spec.re[k], spec.im[k]);
    }
    return out;
}

void magnitude_spectrum_cols_backward(const TensorF& chunk, const TensorF& grad_mag,
                                      TensorF& grad_chunk) {
    const std::size_t c = chunk.rows();
    const std::size_t d = chunk.cols();
    ComplexVec col(c);
    // grad wrt x[t] = sum_k gr[k]*cos(2pi k t/C) - gi[k]*sin(2pi k t/C),
    // where (gr, gi) is the magnitude gradient pushed onto (re, im).
    for (std::size_t f = 0; f < d; ++f) {
        for (std::size_t t = 0; t < c; ++t) {
            col.re[t] = chunk.at(t, f);
            col.im[t] = 0.0;
        }
        ComplexVec spec = fft_forward(col);
        for (std::size_t t = 0; t < c; ++t) {
            double acc = 0.0;
            for (std::size_t k = 0; k < c; ++k) {
                const double mag = std::hypot(spec.re[k], spec.im[k]);
                if (mag == 0.0) continue;  // subgradient choice at |F| = 0
                const double gr = grad_mag.at(k, f) * spec.re[k] / mag;
                const double gi = grad_mag.at(k, f) * spec.im[k] / mag;
                const double theta = kTwoPi * static_cast<double>(k) *
                                     static_cast<double>(t) / static_cast<double>(c);
                acc += gr * std::cos(theta) - gi * std::sin(theta);
            }
            grad_chunk.at(t, f) += acc;
        }
    }
}

}  // namespace mppa
