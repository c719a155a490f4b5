#pragma once

#include <optional>
#include <vector>

#include "mppa/autograd.hpp"
#include "mppa/tensor.hpp"

namespace mppa {

struct ChunkLayout {
    std::size_t chunk_size = 0;  // C
    std::size_t num_chunks = 0;  // N = ceil(n / C)
    std::size_t seq_len = 0;     // n
    std::vector<std::size_t> valid_len;  // per chunk; only the last may be short
};

ChunkLayout make_chunk_layout(std::size_t n, std::size_t chunk_size);

// Partitions the rows of h into N chunks of C rows, the last zero-padded.
std::vector<TensorF> chunk_sequence(const TensorF& h, std::size_t chunk_size,
                                    ChunkLayout* layout = nullptr);

struct EnergyParams {
    double intensity = 0.0;  // learnable; 0 makes the module an identity map
    double eps = 1e-6;
};

// Streaming state: running log-energy sum, chunk counter, debt queue.
struct EnergyState {
    double log_energy_sum = 0.0;
    std::size_t chunks_seen = 0;
    std::vector<double> debt_queue;  // most recent last; size == chunks_seen
};

// Mean over the valid rows of log(1 + ||h_t||^2).
double chunk_energy(const TensorF& chunk, std::size_t valid_len);

// exp(L / chunks_seen); requires at least one chunk of history.
double geometric_mean_energy(const EnergyState& state, double eps);

double compute_debt(double e_current, double e_mean);

// Scales the chunk by exp(sigmoid(debt) * intensity); identity when the
// 2-step-delayed debt does not exist yet.
TensorF apply_compensation(const TensorF& chunk, std::optional<double> debt_two_back,
                           double intensity);

// Full batch pipeline over a sequence.
TensorF energy_encode(const TensorF& h, const EnergyParams& p, std::size_t chunk_size);

// One chunk through the stateful stream; bit-identical to the batch pipeline.
TensorF energy_step(EnergyState& state, const TensorF& chunk, std::size_t valid_len,
                    const EnergyParams& p);

Graph::Var energy_encode_g(Graph& g, Graph::Var h, Graph::Var intensity, double eps,
                           std::size_t chunk_size);

}  // namespace mppa
