#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "mppa/fft.hpp"
#include "mppa/numerics.hpp"
#include "mppa/rng.hpp"

using namespace mppa;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

TensorF naive_matmul(const TensorF& a, const TensorF& b) {
    TensorF c({a.rows(), b.cols()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
            c.at(i, j) = acc;
        }
    return c;
}

ComplexVec naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    ComplexVec out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * kPi * static_cast<double>(k * t) /
                               static_cast<double>(n);
            re += x[t] * std::cos(ang);
            im += x[t] * std::sin(ang);
        }
        out.re[k] = re;
        out.im[k] = im;
    }
    return out;
}
}  // namespace

TEST_CASE("matmul: identity times vector returns the vector") {
    const TensorF b({3, 1}, {1.5, -2.0, 0.25});
    const TensorF c = matmul(TensorF::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(c.at(i, 0) == b.at(i, 0));
}

TEST_CASE("matmul: hand arithmetic 2x2 by 2x1") {
    const TensorF a({2, 2}, {1, 2, 3, 4});
    const TensorF b({2, 1}, {0, 1});
    const TensorF c = matmul(a, b);
    CHECK(c.at(0, 0) == 2.0);
    CHECK(c.at(1, 0) == 4.0);
}

TEST_CASE("matmul: random 5x7 * 7x3 equals the triple-loop oracle exactly") {
    Rng rng(1);
    const TensorF a = rng.normal_tensor({5, 7}, 1.0);
    const TensorF b = rng.normal_tensor({7, 3}, 1.0);
    const TensorF got = matmul(a, b);
    const TensorF want = naive_matmul(a, b);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == want[i]);
}

TEST_CASE("matmul_nt / matmul_tn agree with explicit transposition") {
    Rng rng(2);
    const TensorF a = rng.normal_tensor({4, 6}, 1.0);
    const TensorF b = rng.normal_tensor({5, 6}, 1.0);
    TensorF bt({6, 5});
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 6; ++j) bt.at(j, i) = b.at(i, j);
    const TensorF got = matmul_nt(a, b);
    const TensorF want = naive_matmul(a, bt);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-15));

    const TensorF c = rng.normal_tensor({4, 2}, 1.0);
    TensorF ct({2, 4});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j) ct.at(j, i) = c.at(i, j);
    const TensorF got2 = matmul_tn(c, a);  // c[4x2]^T * a[4x6]
    const TensorF want2 = naive_matmul(ct, a);
    REQUIRE(got2.rows() == want2.rows());
    for (std::size_t i = 0; i < got2.size(); ++i)
        CHECK(got2[i] == doctest::Approx(want2[i]).epsilon(1e-15));
}

TEST_CASE("softmax: all-zero row is uniform") {
    const TensorF s({1, 3}, {0, 0, 0});
    const TensorF p = softmax_rows(s);
    for (std::size_t j = 0; j < 3; ++j) CHECK(p.at(0, j) == doctest::Approx(1.0 / 3));
}

TEST_CASE("softmax: -inf entries map to exactly zero") {
    const TensorF s({1, 3}, {0, -kInf, -kInf});
    const TensorF p = softmax_rows(s);
    CHECK(p.at(0, 0) == 1.0);
    CHECK(p.at(0, 1) == 0.0);
    CHECK(p.at(0, 2) == 0.0);
}

TEST_CASE("softmax: matches the direct exp/sum formula") {
    const TensorF s({1, 3}, {1, 2, 3});
    const TensorF p = softmax_rows(s);
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(p.at(0, j) - std::exp(1.0 + static_cast<double>(j)) / z) < 1e-15);
}

TEST_CASE("softmax: an all-masked row is an error") {
    const TensorF s({1, 2}, {-kInf, -kInf});
    CHECK_THROWS(softmax_rows(s));
}

TEST_CASE("fft: constant signal concentrates in the DC bin") {
    const double c = 1.75;
    ComplexVec x(8);
    for (double& v : x.re) v = c;
    const ComplexVec f = fft_forward(x);
    CHECK(f.re[0] == doctest::Approx(8 * c).epsilon(1e-14));
    for (std::size_t k = 1; k < 8; ++k) {
        CHECK(std::abs(f.re[k]) < 1e-12);
        CHECK(std::abs(f.im[k]) < 1e-12);
    }
}

TEST_CASE("fft: single tone cos(2*pi*2t/8) lands in bins 2 and 6") {
    ComplexVec x(8);
    for (std::size_t t = 0; t < 8; ++t)
        x.re[t] = std::cos(2.0 * kPi * 2.0 * static_cast<double>(t) / 8.0);
    const ComplexVec f = fft_forward(x);
    for (std::size_t k = 0; k < 8; ++k) {
        const double mag = std::hypot(f.re[k], f.im[k]);
        const double want = (k == 2 || k == 6) ? 4.0 : 0.0;
        CHECK(std::abs(mag - want) < 1e-12);
    }
}

TEST_CASE("fft: matches the naive DFT oracle on random input") {
    Rng rng(7);
    std::vector<double> x(16);
    for (double& v : x) v = rng.normal();
    ComplexVec cx(16);
    cx.re = x;
    const ComplexVec fast = fft_forward(cx);
    const ComplexVec slow = naive_dft(x);
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(std::abs(fast.re[k] - slow.re[k]) < 1e-9);
        CHECK(std::abs(fast.im[k] - slow.im[k]) < 1e-9);
    }
}

TEST_CASE("fft: inverse round-trips") {
    Rng rng(17);
    ComplexVec x(32);
    for (double& v : x.re) v = rng.normal();
    for (double& v : x.im) v = rng.normal();
    const ComplexVec back = fft_inverse(fft_forward(x));
    for (std::size_t k = 0; k < 32; ++k) {
        CHECK(std::abs(back.re[k] - x.re[k]) < 1e-12);
        CHECK(std::abs(back.im[k] - x.im[k]) < 1e-12);
    }
}

TEST_CASE("fft: non-power-of-two length is rejected") {
    ComplexVec x(6);
    CHECK_THROWS(fft_forward(x));
}

TEST_CASE("grad_check: quadratic loss with known gradient") {
    const TensorF p({2}, {1, 2});
    const TensorF analytic({2}, {2, 4});
    auto loss = [](const TensorF& q) {
        double s = 0.0;
        for (double v : q.data) s += v * v;
        return s;
    };
    // central differences at h=1e-6 round at roughly eps*|f|/(2h) ~ 1e-9
    CHECK(grad_check(loss, analytic, p, 1e-6) < 1e-9);
}

TEST_CASE("grad_check: sigmoid at zero has derivative 1/4") {
    const TensorF p({1}, {0.0});
    const TensorF analytic({1}, {0.25});
    auto loss = [](const TensorF& q) { return sigmoid(q[0]); };
    CHECK(grad_check(loss, analytic, p, 1e-6) < 1e-8);
}

TEST_CASE("grad_check: reports a deliberately wrong gradient") {
    const TensorF p({1}, {1.0});
    const TensorF analytic({1}, {5.0});  // true derivative is 2
    auto loss = [](const TensorF& q) { return q[0] * q[0]; };
    CHECK(grad_check(loss, analytic, p, 1e-6) > 0.5);  // |5-2|/max(1,5) = 0.6
}
