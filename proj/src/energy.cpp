#include "mppa/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "mppa/numerics.hpp"

namespace mppa {

ChunkLayout make_chunk_layout(std::size_t n, std::size_t chunk_size) {
    if (n == 0 || chunk_size == 0)
        throw std::invalid_argument("make_chunk_layout: n and C must be >= 1");
    ChunkLayout layout;
    layout.chunk_size = chunk_size;
    layout.seq_len = n;
    layout.num_chunks = (n + chunk_size - 1) / chunk_size;
    for (std::size_t i = 0; i < layout.num_chunks; ++i) {
        const std::size_t start = i * chunk_size;
        layout.valid_len.push_back(std::min(chunk_size, n - start));
    }
    return layout;
}

std::vector<TensorF> chunk_sequence(const TensorF& h, std::size_t chunk_size,
                                    ChunkLayout* layout_out) {
    const std::size_t n = h.rows(), d = h.cols();
    ChunkLayout layout = make_chunk_layout(n, chunk_size);
    std::vector<TensorF> chunks;
    for (std::size_t i = 0; i < layout.num_chunks; ++i) {
        TensorF chunk({chunk_size, d});
        const std::size_t start = i * chunk_size;
        for (std::size_t t = 0; t < layout.valid_len[i]; ++t)
            for (std::size_t f = 0; f < d; ++f) chunk.at(t, f) = h.at(start + t, f);
        chunks.push_back(std::move(chunk));
    }
    if (layout_out) *layout_out = std::move(layout);
    return chunks;
}

double chunk_energy(const TensorF& chunk, std::size_t valid_len) {
    if (valid_len == 0) throw std::invalid_argument("chunk_energy: valid_len must be >= 1");
    if (valid_len > chunk.rows())
        throw std::invalid_argument("chunk_energy: valid_len exceeds chunk rows");
    const std::size_t d = chunk.cols();
    double total = 0.0;
    for (std::size_t t = 0; t < valid_len; ++t) {
        double sq = 0.0;
        for (std::size_t f = 0; f < d; ++f) sq += chunk.at(t, f) * chunk.at(t, f);
        total += std::log1p(sq);
    }
    return total * (1.0 / static_cast<double>(valid_len));
}

double geometric_mean_energy(const EnergyState& state, double eps) {
    (void)eps;  // already folded into log_energy_sum at accumulation time
    if (state.chunks_seen == 0)
        throw std::logic_error("geometric_mean_energy: no history");
    return std::exp(state.log_energy_sum * (1.0 / static_cast<double>(state.chunks_seen)));
}

double compute_debt(double e_current, double e_mean) { return e_current - e_mean; }

TensorF apply_compensation(const TensorF& chunk, std::optional<double> debt_two_back,
                           double intensity) {
    if (!debt_two_back) return chunk;
    const double factor = std::exp(sigmoid(*debt_two_back) * intensity);
    if (!std::isfinite(factor))
        throw std::runtime_error("apply_compensation: non-finite factor");
    TensorF out = chunk;
    for (double& v : out.data) v *= factor;
    return out;
}

TensorF energy_step(EnergyState& state, const TensorF& chunk, std::size_t valid_len,
                    const EnergyParams& p) {
    const std::size_t i = state.chunks_seen + 1;  // 1-indexed chunk number
    std::optional<double> debt_two_back;
    if (i >= 3) debt_two_back = state.debt_queue[i - 3];
    TensorF out = apply_compensation(chunk, debt_two_back, p.intensity);
    // Energy is always measured on the original, uncompensated content.
    const double energy = chunk_energy(chunk, valid_len);
    double debt = 0.0;
    if (i >= 2) debt = compute_debt(energy, geometric_mean_energy(state, p.eps));
    state.debt_queue.push_back(debt);
    state.log_energy_sum += std::log(energy + p.eps);
    state.chunks_seen = i;
    return out;
}

TensorF energy_encode(const TensorF& h, const EnergyParams& p, std::size_t chunk_size) {
    require_finite(h, "energy_encode input");
    Graph g;
    Graph::Var hv = g.input(h);
    Graph::Var iv = g.input(TensorF::scalar(p.intensity));
    return g.val(energy_encode_g(g, hv, iv, p.eps, chunk_size));
}

Graph::Var energy_encode_g(Graph& g, Graph::Var h, Graph::Var intensity, double eps,
                           std::size_t chunk_size) {
    const std::size_t n = g.val(h).rows();
    const std::size_t d = g.val(h).cols();
    const ChunkLayout layout = make_chunk_layout(n, chunk_size);

    TensorF ones({d});
    for (double& v : ones.data) v = 1.0;
    const Graph::Var ones_v = g.input(ones);

    std::vector<Graph::Var> out_chunks;
    std::vector<Graph::Var> debts;   // D_1, D_2, ... as scalar vars
    Graph::Var log_sum = -1;         // L = sum_j log(E_j + eps)
    for (std::size_t i = 0; i < layout.num_chunks; ++i) {
        const std::size_t start = i * chunk_size;
        Graph::Var chunk = g.slice_rows(h, start, start + layout.valid_len[i]);

        // (1) compensate with the debt from two chunks back, if it exists
        if (i >= 2) {
            Graph::Var factor = g.uexp(g.mul(g.usigmoid(debts[i - 2]), intensity));
            out_chunks.push_back(g.mul_scalar(chunk, factor));
        } else {
            out_chunks.push_back(chunk);
        }

        // (2) chunk energy from the original content over valid positions
        Graph::Var row_sq = g.matvec(g.usquare(chunk), ones_v);
        Graph::Var energy = g.mean_all(g.ulog1p(row_sq));

        // (3) debt against the geometric mean of the history
        if (i == 0) {
            debts.push_back(g.input(TensorF::scalar(0.0)));
        } else {
            Graph::Var mean =
                g.uexp(g.scale_const(log_sum, 1.0 / static_cast<double>(i)));
            debts.push_back(g.sub(energy, mean));
        }

        // (4) accumulate the log-domain energy sum
        Graph::Var log_e = g.ulog(g.add_const(energy, eps));
        log_sum = (log_sum < 0) ? log_e : g.add(log_sum, log_e);
    }
    return (out_chunks.size() == 1) ? out_chunks[0] : g.concat_rows(out_chunks);
}

}  // namespace mppa
