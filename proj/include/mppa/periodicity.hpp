#pragma once

#include <vector>

#include "mppa/autograd.hpp"
#include "mppa/rng.hpp"
#include "mppa/tensor.hpp"

namespace mppa {

// Per-feature EMA decay logits plus the shared frequency-row MLP. The MLP is
// applied independently to each of the C frequency rows, so parameter shapes
// are independent of the chunk size.
struct PeriodicityParams {
    TensorF alpha_raw;  // [d] decay logits; effective decay in (0.1, 0.9)
    TensorF mlp_w1;     // [d x d_h]
    TensorF mlp_b1;     // [d_h]
    TensorF mlp_w2;     // [d_h x d]
    TensorF mlp_b2;     // [d]
};

// Zero MLP weights make the module an exact identity; alpha starts mid-range.
PeriodicityParams init_periodicity(std::size_t d, std::size_t d_hidden);

// alpha = 0.1 + 0.8 * sigmoid(alpha_raw), elementwise.
TensorF effective_alpha(const TensorF& alpha_raw);

// Per-column FFT magnitude spectrum of one chunk (C power of two).
TensorF chunk_spectrum(const TensorF& chunk);

// S[k,f] = alpha[f] * S_prev[k,f] + (1 - alpha[f]) * A[k,f].
TensorF ema_update(const TensorF& s_prev, const TensorF& a, const TensorF& alpha);

// 2*sigmoid(MLP(row)) per frequency row; entries in (0, 2), neutral at 1.
TensorF modulation_map(const TensorF& s_prev, const PeriodicityParams& p);

struct PeriodicityState {
    TensorF spectrum_ema;  // [C x d]; all-zero before the first chunk
    std::size_t chunks_seen = 0;
};

TensorF periodicity_encode(const TensorF& h, const PeriodicityParams& p,
                           std::size_t chunk_size);

// One zero-padded chunk through the stateful stream; bit-identical to the
// batch pipeline on the valid rows.
TensorF periodicity_step(PeriodicityState& state, const TensorF& chunk,
                         const PeriodicityParams& p);

struct PeriodicityVars {
    Graph::Var alpha_raw, mlp_w1, mlp_b1, mlp_w2, mlp_b2;
};

PeriodicityVars lift(Graph& g, const PeriodicityParams& p);
Graph::Var periodicity_encode_g(Graph& g, Graph::Var h, const PeriodicityVars& p,
                                std::size_t chunk_size);

}  // namespace mppa
