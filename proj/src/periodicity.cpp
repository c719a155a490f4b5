#include "mppa/periodicity.hpp"

#include <cmath>
#include <stdexcept>

#include "mppa/energy.hpp"
#include "mppa/fft.hpp"
#include "mppa/numerics.hpp"

namespace mppa {

PeriodicityParams init_periodicity(std::size_t d, std::size_t d_hidden) {
    PeriodicityParams p;
    p.alpha_raw = TensorF({d});
    p.mlp_w1 = TensorF({d, d_hidden});
    p.mlp_b1 = TensorF({d_hidden});
    p.mlp_w2 = TensorF({d_hidden, d});
    p.mlp_b2 = TensorF({d});
    return p;
}

TensorF effective_alpha(const TensorF& alpha_raw) {
    TensorF out = alpha_raw;
    for (double& v : out.data) v = sigmoid(v) * 0.8 + 0.1;
    return out;
}

TensorF chunk_spectrum(const TensorF& chunk) { return magnitude_spectrum_cols(chunk); }

TensorF ema_update(const TensorF& s_prev, const TensorF& a, const TensorF& alpha) {
    require_same_shape(s_prev, a, "ema_update");
    if (alpha.size() != s_prev.cols())
        throw std::invalid_argument("ema_update: alpha length mismatch");
    TensorF out = s_prev;
    const std::size_t rows = s_prev.rows(), d = s_prev.cols();
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t f = 0; f < d; ++f)
            out.at(k, f) = s_prev.at(k, f) * alpha.data[f] +
                           a.at(k, f) * (1.0 - alpha.data[f]);
    return out;
}

TensorF modulation_map(const TensorF& s_prev, const PeriodicityParams& p) {
    require_finite(s_prev, "modulation_map input");
    TensorF hidden = matmul(s_prev, p.mlp_w1);
    const std::size_t rows = hidden.rows(), d_h = hidden.cols();
    for (std::size_t k = 0; k < rows; ++k)
        for (std::size_t j = 0; j < d_h; ++j) {
            const double v = hidden.at(k, j) + p.mlp_b1.data[j];
            hidden.at(k, j) = v * sigmoid(v);
        }
    TensorF out = matmul(hidden, p.mlp_w2);
    const std::size_t d = out.cols();
    for (std::size_t k = 0; k < out.rows(); ++k)
        for (std::size_t f = 0; f < d; ++f)
            out.at(k, f) = sigmoid(out.at(k, f) + p.mlp_b2.data[f]) * 2.0;
    return out;
}

TensorF periodicity_step(PeriodicityState& state, const TensorF& chunk,
                         const PeriodicityParams& p) {
    const std::size_t c = chunk.rows(), d = chunk.cols();
    if (state.chunks_seen == 0) state.spectrum_ema = TensorF({c, d});
    TensorF out = chunk;
    if (state.chunks_seen > 0) {
        const TensorF mod = modulation_map(state.spectrum_ema, p);
        for (std::size_t k = 0; k < c; ++k)
            for (std::size_t f = 0; f < d; ++f) out.at(k, f) *= mod.at(k, f);
    }
    const TensorF spectrum = chunk_spectrum(chunk);
    state.spectrum_ema =
        ema_update(state.spectrum_ema, spectrum, effective_alpha(p.alpha_raw));
    ++state.chunks_seen;
    return out;
}

TensorF periodicity_encode(const TensorF& h, const PeriodicityParams& p,
                           std::size_t chunk_size) {
    require_finite(h, "periodicity_encode input");
    Graph g;
    Graph::Var hv = g.input(h);
    PeriodicityVars pv = lift(g, p);
    return g.val(periodicity_encode_g(g, hv, pv, chunk_size));
}

PeriodicityVars lift(Graph& g, const PeriodicityParams& p) {
    PeriodicityVars v;
    v.alpha_raw = g.input(p.alpha_raw);
    v.mlp_w1 = g.input(p.mlp_w1);
    v.mlp_b1 = g.input(p.mlp_b1);
    v.mlp_w2 = g.input(p.mlp_w2);
    v.mlp_b2 = g.input(p.mlp_b2);
    return v;
}

Graph::Var periodicity_encode_g(Graph& g, Graph::Var h, const PeriodicityVars& p,
                                std::size_t chunk_size) {
    const std::size_t n = g.val(h).rows();
    const std::size_t d = g.val(h).cols();
    if (!is_power_of_two(chunk_size))
        throw std::invalid_argument("periodicity_encode: chunk size must be a power of two");
    const ChunkLayout layout = make_chunk_layout(n, chunk_size);

    Graph::Var alpha =
        g.add_const(g.scale_const(g.usigmoid(p.alpha_raw), 0.8), 0.1);
    Graph::Var one_minus_alpha = g.sub_from_const(1.0, alpha);

    std::vector<Graph::Var> out_chunks;
    Graph::Var ema = g.input(TensorF({chunk_size, d}));  // S_0 = 0
    for (std::size_t i = 0; i < layout.num_chunks; ++i) {
        const std::size_t start = i * chunk_size;
        const std::size_t valid = layout.valid_len[i];
        Graph::Var chunk = g.slice_rows(h, start, start + valid);
        Graph::Var padded = (valid < chunk_size) ? g.pad_rows(chunk, chunk_size) : chunk;

        if (i == 0) {
            out_chunks.push_back(chunk);
        } else {
            Graph::Var hidden =
                g.usilu(g.add_rowvec(g.matmul(ema, p.mlp_w1), p.mlp_b1));
            Graph::Var mod = g.scale_const(
                g.usigmoid(g.add_rowvec(g.matmul(hidden, p.mlp_w2), p.mlp_b2)), 2.0);
            Graph::Var mod_valid =
                (valid < chunk_size) ? g.slice_rows(mod, 0, valid) : mod;
            out_chunks.push_back(g.mul(chunk, mod_valid));
        }

        Graph::Var spectrum = g.spectrum_cols(padded);
        ema = g.add(g.mul_rowvec(ema, alpha),
                    g.mul_rowvec(spectrum, one_minus_alpha));
    }
    return (out_chunks.size() == 1) ? out_chunks[0] : g.concat_rows(out_chunks);
}

}  // namespace mppa
