#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mppa/tensor.hpp"

namespace mppa {

// Reverse-mode tape over the fixed operation set the model needs.
// Nodes are created in topological order; backward() replays the tape in
// reverse with fixed summation order, so gradients are deterministic.
class Graph {
 public:
    using Var = int;

    Var input(TensorF value);

    const TensorF& val(Var v) const { return nodes_[v].value; }
    const TensorF& grad(Var v) const { return nodes_[v].grad; }

    void backward(Var loss);

    // Binary, same shape.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);

    // Matrix products.
    Var matmul(Var a, Var b);     // a[m x k] * b[k x p]
    Var matmul_nt(Var a, Var b);  // a[m x k] * b[p x k]^T

    // Broadcasts over rows of x[n x d].
    Var add_rowvec(Var x, Var b);  // b: [d]
    Var mul_rowvec(Var x, Var v);  // v: [d]
    Var mul_rows(Var x, Var r);    // r: [n], scales row i by r[i]
    Var mul_scalar(Var x, Var s);  // s: [1]

    // Elementwise unaries.
    Var uexp(Var x);
    Var ulog(Var x);
    Var ulog1p(Var x);
    Var usigmoid(Var x);
    Var usilu(Var x);
    Var usquare(Var x);
    Var scale_const(Var x, double c);
    Var add_const(Var x, double c);
    Var sub_from_const(double c, Var x);  // c - x

    // Reductions / reshaping over rows.
    Var sum_all(Var x);
    Var mean_all(Var x);
    Var matvec(Var x, Var w);  // x[n x d] * w[d] -> [n]
    Var dot(Var a, Var b);     // [k] . [k] -> [1]
    Var slice_rows(Var x, std::size_t r0, std::size_t r1);
    Var concat_rows(const std::vector<Var>& parts);
    Var pad_rows(Var x, std::size_t total_rows);
    Var mean_rows(Var x);         // [n x d] -> [d]
    Var prefix_mean_rows(Var x);  // row t = mean of rows 0..t
    Var broadcast_scalar(Var s, std::size_t n);  // [1] -> [n]

    Var layernorm_rows(Var x, Var gain, Var bias, double eps);

    // softmax(S + M) with the lower-triangular causal mask baked in.
    Var causal_softmax_rows(Var scores);

    // Per-column FFT magnitude spectrum of a [C x d] chunk.
    Var spectrum_cols(Var chunk);

    Var embedding_rows(Var table, const std::vector<int>& ids);

    // Mean next-token NLL; targets[i] is the label for logits row i.
    Var cross_entropy_mean(Var logits, const std::vector<int>& targets);

    std::size_t num_nodes() const { return nodes_.size(); }

 private:
    struct Node {
        TensorF value;
        TensorF grad;
        std::function<void(Graph&)> back;  // null for leaves
    };

    Var make(TensorF value, std::function<void(Graph&)> back);
    TensorF& g(Var v) { return nodes_[v].grad; }

    std::vector<Node> nodes_;
};

}  // namespace mppa
