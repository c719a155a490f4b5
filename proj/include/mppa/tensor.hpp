#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace mppa {

// Dense row-major float64 tensor. The carrier of all activations,
// parameters and gradients in this project.
struct TensorF {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    TensorF() = default;
    explicit TensorF(std::vector<std::size_t> s) : shape(std::move(s)) {
        data.assign(numel(shape), 0.0);
    }
    TensorF(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (numel(shape) != data.size())
            throw std::invalid_argument("TensorF: shape/data size mismatch");
    }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t dim : s) n *= dim;
        return n;
    }
    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const TensorF& o) const { return shape == o.shape; }

    static TensorF zeros(std::size_t r, std::size_t c) { return TensorF({r, c}); }
    static TensorF zeros_like(const TensorF& o) { return TensorF(o.shape); }
    static TensorF scalar(double v) { return TensorF({1}, {v}); }
    static TensorF identity(std::size_t n) {
        TensorF t({n, n});
        for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
        return t;
    }
};

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// NaN/Inf anywhere is a hard error; -inf sentinels from the causal mask
// are handled before values reach this check.
inline void require_finite(const TensorF& t, const char* where) {
    for (double v : t.data)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("non-finite value in ") + where);
}

inline void require_same_shape(const TensorF& a, const TensorF& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape) + " vs " + shape_str(b.shape));
}

}  // namespace mppa
