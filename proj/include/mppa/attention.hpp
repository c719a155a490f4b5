#pragma once

#include <vector>

#include "mppa/autograd.hpp"
#include "mppa/rng.hpp"
#include "mppa/tensor.hpp"

namespace mppa {

// Multi-head causal self-attention. The output projection is stored as one
// [d_k x d] block per head; summing the per-head projections is identical to
// concatenating heads and applying a single [(heads*d_k) x d] matrix.
struct AttentionParams {
    std::vector<TensorF> w_q, w_k, w_v;  // per head, [d x d_k]
    std::vector<TensorF> w_o;            // per head, [d_k x d]
    std::size_t heads = 1;

    std::size_t d() const { return w_q.empty() ? 0 : w_q[0].rows(); }
    std::size_t d_k() const { return w_q.empty() ? 0 : w_q[0].cols(); }
};

AttentionParams init_attention(std::size_t d, std::size_t heads, Rng& rng);

// n x n matrix with 0 where j <= i and -inf otherwise.
TensorF build_causal_mask(std::size_t n);

TensorF causal_attention(const TensorF& h, const AttentionParams& p);

struct AttentionVars {
    std::vector<Graph::Var> w_q, w_k, w_v, w_o;
    std::size_t heads = 1;
};

AttentionVars lift(Graph& g, const AttentionParams& p);
Graph::Var causal_attention_g(Graph& g, Graph::Var h, const AttentionVars& p);

}  // namespace mppa
