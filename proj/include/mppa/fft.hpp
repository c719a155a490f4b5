#pragma once

#include <cstddef>
#include <vector>

#include "mppa/tensor.hpp"

namespace mppa {

// Split real/imaginary complex vector. Lengths must agree; the radix-2
// transform additionally requires a power-of-two length.
struct ComplexVec {
    std::vector<double> re;
    std::vector<double> im;

    ComplexVec() = default;
    explicit ComplexVec(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
    ComplexVec(std::vector<double> r, std::vector<double> i);

    std::size_t size() const { return re.size(); }
};

bool is_power_of_two(std::size_t n);

// Unnormalized forward DFT, X[k] = sum_t x[t] * exp(-2*pi*i*k*t/C),
// iterative radix-2 Cooley-Tukey. Length must be a power of two.
ComplexVec fft_forward(const ComplexVec& x);

// Inverse transform: fft_inverse(fft_forward(x)) == x up to rounding.
ComplexVec fft_inverse(const ComplexVec& x);

// Per-column magnitude spectrum of a CxD chunk: column f of the result is
// |FFT(chunk[., f])|. C must be a power of two.
TensorF magnitude_spectrum_cols(const TensorF& chunk);

// Gradient of magnitude_spectrum_cols: given d(loss)/d(magnitudes),
// accumulate d(loss)/d(chunk). Zero-magnitude bins get zero gradient.
void magnitude_spectrum_cols_backward(const TensorF& chunk, const TensorF& grad_mag,
                                      TensorF& grad_chunk);

}  // namespace mppa
