#include "mppa/attention.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mppa {

AttentionParams init_attention(std::size_t d, std::size_t heads, Rng& rng) {
    if (heads == 0 || d % heads != 0)
        throw std::invalid_argument("init_attention: d must be divisible by heads");
    const std::size_t d_k = d / heads;
    AttentionParams p;
    p.heads = heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t h = 0; h < heads; ++h) {
        p.w_q.push_back(rng.normal_tensor({d, d_k}, scale));
        p.w_k.push_back(rng.normal_tensor({d, d_k}, scale));
        p.w_v.push_back(rng.normal_tensor({d, d_k}, scale));
        p.w_o.push_back(rng.normal_tensor({d_k, d}, 1.0 / std::sqrt(static_cast<double>(d_k))));
    }
    return p;
}

TensorF build_causal_mask(std::size_t n) {
    if (n == 0) throw std::invalid_argument("build_causal_mask: n must be >= 1");
    TensorF m({n, n});
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.at(i, j) = neg_inf;
    return m;
}

AttentionVars lift(Graph& g, const AttentionParams& p) {
    AttentionVars v;
    v.heads = p.heads;
    for (std::size_t h = 0; h < p.heads; ++h) {
        v.w_q.push_back(g.input(p.w_q[h]));
        v.w_k.push_back(g.input(p.w_k[h]));
        v.w_v.push_back(g.input(p.w_v[h]));
        v.w_o.push_back(g.input(p.w_o[h]));
    }
    return v;
}

Graph::Var causal_attention_g(Graph& g, Graph::Var h, const AttentionVars& p) {
    const std::size_t d_k = g.val(p.w_q[0]).cols();
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(d_k));
    Graph::Var z = -1;
    for (std::size_t head = 0; head < p.heads; ++head) {
        Graph::Var q = g.matmul(h, p.w_q[head]);
        Graph::Var k = g.matmul(h, p.w_k[head]);
        Graph::Var v = g.matmul(h, p.w_v[head]);
        Graph::Var scores = g.scale_const(g.matmul_nt(q, k), inv_sqrt_dk);
        Graph::Var attn = g.causal_softmax_rows(scores);
        Graph::Var z_head = g.matmul(g.matmul(attn, v), p.w_o[head]);
        z = (z < 0) ? z_head : g.add(z, z_head);
    }
    return z;
}

TensorF causal_attention(const TensorF& h, const AttentionParams& p) {
    require_finite(h, "causal_attention input");
    if (h.rows() == 0) throw std::invalid_argument("causal_attention: empty sequence");
    Graph g;
    Graph::Var hv = g.input(h);
    AttentionVars pv = lift(g, p);
    return g.val(causal_attention_g(g, hv, pv));
}

}  // namespace mppa
