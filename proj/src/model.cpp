#include "mppa/model.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mppa/fft.hpp"
#include "mppa/numerics.hpp"

namespace mppa {

void ModelConfig::validate() const {
    if (vocab_size < 2) throw std::invalid_argument("config: vocab_size must be >= 2");
    if (heads == 0 || d % heads != 0)
        throw std::invalid_argument("config: d must be divisible by heads");
    if (!is_power_of_two(chunk_size))
        throw std::invalid_argument("config: chunk_size must be a power of two");
    if (n_max < chunk_size) throw std::invalid_argument("config: n_max must be >= chunk_size");
    if (layers == 0) throw std::invalid_argument("config: layers must be >= 1");
    // All components disabled is allowed: the block degenerates to the
    // feedforward residual path, which some tests rely on.
}

std::vector<std::pair<std::string, std::string>> ModelConfig::to_kv() const {
    auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {
        {"vocab_size", std::to_string(vocab_size)},
        {"d", std::to_string(d)},
        {"layers", std::to_string(layers)},
        {"heads", std::to_string(heads)},
        {"chunk_size", std::to_string(chunk_size)},
        {"n_max", std::to_string(n_max)},
        {"d_ff", std::to_string(d_ff)},
        {"d_spec", std::to_string(d_spec)},
        {"enable_gravitator", b(enable_gravitator)},
        {"enable_energy", b(enable_energy)},
        {"enable_periodicity", b(enable_periodicity)},
        {"gating", gating == GatingMode::kCausalPrefix ? "causal_prefix" : "sequence_mean"},
    };
}

ModelConfig ModelConfig::from_kv(
    const std::vector<std::pair<std::string, std::string>>& kv) {
    ModelConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "vocab_size") cfg.vocab_size = std::stoul(value);
        else if (key == "d") cfg.d = std::stoul(value);
        else if (key == "layers") cfg.layers = std::stoul(value);
        else if (key == "heads") cfg.heads = std::stoul(value);
        else if (key == "chunk_size") cfg.chunk_size = std::stoul(value);
        else if (key == "n_max") cfg.n_max = std::stoul(value);
        else if (key == "d_ff") cfg.d_ff = std::stoul(value);
        else if (key == "d_spec") cfg.d_spec = std::stoul(value);
        else if (key == "enable_gravitator") cfg.enable_gravitator = (value == "true");
        else if (key == "enable_energy") cfg.enable_energy = (value == "true");
        else if (key == "enable_periodicity") cfg.enable_periodicity = (value == "true");
        else if (key == "gating")
            cfg.gating = (value == "sequence_mean") ? GatingMode::kSequenceMean
                                                    : GatingMode::kCausalPrefix;
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return cfg;
}

ModelParams init_model(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    ModelParams p;
    p.tok_emb = rng.normal_tensor({cfg.vocab_size, cfg.d}, 0.02);
    p.pos_emb = rng.normal_tensor({cfg.n_max, cfg.d}, 0.02);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        BlockParams blk;
        blk.attention = init_attention(cfg.d, cfg.heads, rng);
        // Intensity 0: the energy module starts as an identity map.
        blk.energy_intensity = TensorF::scalar(0.0);
        // Zero MLP: the periodicity module starts as an identity map.
        blk.periodicity = init_periodicity(cfg.d, cfg.spec_width());
        blk.gates.w_g = TensorF({cfg.d});
        blk.gates.w_e = TensorF({cfg.d});
        blk.gates.w_p = TensorF({cfg.d});
        blk.gates.b_g = TensorF::scalar(0.0);
        blk.gates.b_e = TensorF::scalar(0.0);
        blk.gates.b_p = TensorF::scalar(0.0);
        blk.ln1_gain = TensorF({cfg.d});
        blk.ln2_gain = TensorF({cfg.d});
        for (double& v : blk.ln1_gain.data) v = 1.0;
        for (double& v : blk.ln2_gain.data) v = 1.0;
        blk.ln1_bias = TensorF({cfg.d});
        blk.ln2_bias = TensorF({cfg.d});
        const std::size_t dff = cfg.ff_width();
        blk.ff_w1 = rng.normal_tensor({cfg.d, dff}, 1.0 / std::sqrt(static_cast<double>(cfg.d)));
        blk.ff_b1 = TensorF({dff});
        blk.ff_w2 = rng.normal_tensor({dff, cfg.d}, 1.0 / std::sqrt(static_cast<double>(dff)));
        blk.ff_b2 = TensorF({cfg.d});
        p.blocks.push_back(std::move(blk));
    }
    p.lnf_gain = TensorF({cfg.d});
    for (double& v : p.lnf_gain.data) v = 1.0;
    p.lnf_bias = TensorF({cfg.d});
    return p;
}

namespace {
template <typename Params, typename Fn>
void walk_params(Params& p, const Fn& fn) {
    fn("tok_emb", p.tok_emb);
    fn("pos_emb", p.pos_emb);
    for (std::size_t l = 0; l < p.blocks.size(); ++l) {
        auto& blk = p.blocks[l];
        const std::string pre = "block" + std::to_string(l) + ".";
        for (std::size_t h = 0; h < blk.attention.heads; ++h) {
            const std::string hp = pre + "attn.h" + std::to_string(h) + ".";
            fn(hp + "wq", blk.attention.w_q[h]);
            fn(hp + "wk", blk.attention.w_k[h]);
            fn(hp + "wv", blk.attention.w_v[h]);
            fn(hp + "wo", blk.attention.w_o[h]);
        }
        fn(pre + "energy.intensity", blk.energy_intensity);
        fn(pre + "per.alpha_raw", blk.periodicity.alpha_raw);
        fn(pre + "per.mlp_w1", blk.periodicity.mlp_w1);
        fn(pre + "per.mlp_b1", blk.periodicity.mlp_b1);
        fn(pre + "per.mlp_w2", blk.periodicity.mlp_w2);
        fn(pre + "per.mlp_b2", blk.periodicity.mlp_b2);
        fn(pre + "gate.w_g", blk.gates.w_g);
        fn(pre + "gate.b_g", blk.gates.b_g);
        fn(pre + "gate.w_e", blk.gates.w_e);
        fn(pre + "gate.b_e", blk.gates.b_e);
        fn(pre + "gate.w_p", blk.gates.w_p);
        fn(pre + "gate.b_p", blk.gates.b_p);
        fn(pre + "ln1_gain", blk.ln1_gain);
        fn(pre + "ln1_bias", blk.ln1_bias);
        fn(pre + "ln2_gain", blk.ln2_gain);
        fn(pre + "ln2_bias", blk.ln2_bias);
        fn(pre + "ff_w1", blk.ff_w1);
        fn(pre + "ff_b1", blk.ff_b1);
        fn(pre + "ff_w2", blk.ff_w2);
        fn(pre + "ff_b2", blk.ff_b2);
    }
    fn("lnf_gain", p.lnf_gain);
    fn("lnf_bias", p.lnf_bias);
}
}  // namespace

void for_each_param(ModelParams& p,
                    const std::function<void(const std::string&, TensorF&)>& fn) {
    walk_params(p, fn);
}
void for_each_param(const ModelParams& p,
                    const std::function<void(const std::string&, const TensorF&)>& fn) {
    walk_params(p, fn);
}

ModelVars lift(Graph& g, const ModelParams& p) {
    ModelVars v;
    v.tok_emb = g.input(p.tok_emb);
    v.pos_emb = g.input(p.pos_emb);
    for (const BlockParams& blk : p.blocks) {
        BlockVars bv;
        bv.attention = lift(g, blk.attention);
        bv.energy_intensity = g.input(blk.energy_intensity);
        bv.periodicity = lift(g, blk.periodicity);
        bv.gates.w_g = g.input(blk.gates.w_g);
        bv.gates.b_g = g.input(blk.gates.b_g);
        bv.gates.w_e = g.input(blk.gates.w_e);
        bv.gates.b_e = g.input(blk.gates.b_e);
        bv.gates.w_p = g.input(blk.gates.w_p);
        bv.gates.b_p = g.input(blk.gates.b_p);
        bv.ln1_gain = g.input(blk.ln1_gain);
        bv.ln1_bias = g.input(blk.ln1_bias);
        bv.ln2_gain = g.input(blk.ln2_gain);
        bv.ln2_bias = g.input(blk.ln2_bias);
        bv.ff_w1 = g.input(blk.ff_w1);
        bv.ff_b1 = g.input(blk.ff_b1);
        bv.ff_w2 = g.input(blk.ff_w2);
        bv.ff_b2 = g.input(blk.ff_b2);
        v.blocks.push_back(std::move(bv));
    }
    v.lnf_gain = g.input(p.lnf_gain);
    v.lnf_bias = g.input(p.lnf_bias);
    return v;
}

std::vector<Graph::Var> flatten(const ModelVars& v) {
    std::vector<Graph::Var> flat;
    flat.push_back(v.tok_emb);
    flat.push_back(v.pos_emb);
    for (const BlockVars& bv : v.blocks) {
        for (std::size_t h = 0; h < bv.attention.w_q.size(); ++h) {
            flat.push_back(bv.attention.w_q[h]);
            flat.push_back(bv.attention.w_k[h]);
            flat.push_back(bv.attention.w_v[h]);
            flat.push_back(bv.attention.w_o[h]);
        }
        flat.push_back(bv.energy_intensity);
        flat.push_back(bv.periodicity.alpha_raw);
        flat.push_back(bv.periodicity.mlp_w1);
        flat.push_back(bv.periodicity.mlp_b1);
        flat.push_back(bv.periodicity.mlp_w2);
        flat.push_back(bv.periodicity.mlp_b2);
        flat.push_back(bv.gates.w_g);
        flat.push_back(bv.gates.b_g);
        flat.push_back(bv.gates.w_e);
        flat.push_back(bv.gates.b_e);
        flat.push_back(bv.gates.w_p);
        flat.push_back(bv.gates.b_p);
        flat.push_back(bv.ln1_gain);
        flat.push_back(bv.ln1_bias);
        flat.push_back(bv.ln2_gain);
        flat.push_back(bv.ln2_bias);
        flat.push_back(bv.ff_w1);
        flat.push_back(bv.ff_b1);
        flat.push_back(bv.ff_w2);
        flat.push_back(bv.ff_b2);
    }
    flat.push_back(v.lnf_gain);
    flat.push_back(v.lnf_bias);
    return flat;
}

std::vector<Graph::Var> gate_values_g(Graph& g, Graph::Var h, const GateVars& gates,
                                      GatingMode mode) {
    const std::size_t n = g.val(h).rows();
    std::vector<Graph::Var> out;
    if (mode == GatingMode::kCausalPrefix) {
        Graph::Var hbar = g.prefix_mean_rows(h);
        for (auto [w, b] : {std::pair{gates.w_g, gates.b_g},
                            std::pair{gates.w_e, gates.b_e},
                            std::pair{gates.w_p, gates.b_p}})
            out.push_back(
                g.usigmoid(g.add(g.matvec(hbar, w), g.broadcast_scalar(b, n))));
    } else {
        // Gates from the whole-sequence mean; breaks the causality audit by
        // construction (kept as a study switch).
        Graph::Var hbar = g.mean_rows(h);
        for (auto [w, b] : {std::pair{gates.w_g, gates.b_g},
                            std::pair{gates.w_e, gates.b_e},
                            std::pair{gates.w_p, gates.b_p}})
            out.push_back(
                g.broadcast_scalar(g.usigmoid(g.add(g.dot(hbar, w), b)), n));
    }
    return out;
}

std::vector<TensorF> gate_values(const TensorF& h, const GateParams& gates,
                                 GatingMode mode) {
    Graph g;
    Graph::Var hv = g.input(h);
    GateVars gv{g.input(gates.w_g), g.input(gates.w_e), g.input(gates.w_p),
                g.input(gates.b_g), g.input(gates.b_e), g.input(gates.b_p)};
    auto vars = gate_values_g(g, hv, gv, mode);
    return {g.val(vars[0]), g.val(vars[1]), g.val(vars[2])};
}

Graph::Var block_forward_g(Graph& g, Graph::Var x, const BlockVars& blk,
                           const ModelConfig& cfg, const Ablation& abl) {
    const std::size_t n = g.val(x).rows();
    const std::size_t d = g.val(x).cols();
    Graph::Var h = g.layernorm_rows(x, blk.ln1_gain, blk.ln1_bias, kLayerNormEps);

    const Graph::Var zero = g.input(TensorF({n, d}));
    const Graph::Var z = (cfg.enable_gravitator && abl.gravitator)
                             ? causal_attention_g(g, h, blk.attention)
                             : zero;
    const Graph::Var e = (cfg.enable_energy && abl.energy)
                             ? energy_encode_g(g, h, blk.energy_intensity,
                                               cfg.energy_eps, cfg.chunk_size)
                             : zero;
    const Graph::Var t = (cfg.enable_periodicity && abl.periodicity)
                             ? periodicity_encode_g(g, h, blk.periodicity, cfg.chunk_size)
                             : zero;

    const auto gates = gate_values_g(g, h, blk.gates, cfg.gating);
    Graph::Var fuse = g.add(x, g.mul_rows(z, gates[0]));
    fuse = g.add(fuse, g.mul_rows(e, gates[1]));
    fuse = g.add(fuse, g.mul_rows(t, gates[2]));

    Graph::Var h2 = g.layernorm_rows(fuse, blk.ln2_gain, blk.ln2_bias, kLayerNormEps);
    Graph::Var ff = g.add_rowvec(
        g.matmul(g.usilu(g.add_rowvec(g.matmul(h2, blk.ff_w1), blk.ff_b1)), blk.ff_w2),
        blk.ff_b2);
    return g.add(fuse, ff);
}

TensorF block_forward(const TensorF& x, const BlockParams& blk, const ModelConfig& cfg,
                      const Ablation& abl) {
    Graph gg;
    Graph::Var xvv = gg.input(x);
    BlockVars bv;
    bv.attention = lift(gg, blk.attention);
    bv.energy_intensity = gg.input(blk.energy_intensity);
    bv.periodicity = lift(gg, blk.periodicity);
    bv.gates.w_g = gg.input(blk.gates.w_g);
    bv.gates.b_g = gg.input(blk.gates.b_g);
    bv.gates.w_e = gg.input(blk.gates.w_e);
    bv.gates.b_e = gg.input(blk.gates.b_e);
    bv.gates.w_p = gg.input(blk.gates.w_p);
    bv.gates.b_p = gg.input(blk.gates.b_p);
    bv.ln1_gain = gg.input(blk.ln1_gain);
    bv.ln1_bias = gg.input(blk.ln1_bias);
    bv.ln2_gain = gg.input(blk.ln2_gain);
    bv.ln2_bias = gg.input(blk.ln2_bias);
    bv.ff_w1 = gg.input(blk.ff_w1);
    bv.ff_b1 = gg.input(blk.ff_b1);
    bv.ff_w2 = gg.input(blk.ff_w2);
    bv.ff_b2 = gg.input(blk.ff_b2);
    return gg.val(block_forward_g(gg, xvv, bv, cfg, abl));
}

Graph::Var model_logits_g(Graph& g, const ModelVars& v, const ModelConfig& cfg,
                          const std::vector<int>& tokens, const Ablation& abl) {
    const std::size_t n = tokens.size();
    if (n == 0) throw std::invalid_argument("model_forward: empty token sequence");
    if (n > cfg.n_max)
        throw std::invalid_argument("model_forward: sequence length " + std::to_string(n) +
                                    " exceeds n_max " + std::to_string(cfg.n_max));
    Graph::Var x = g.add(g.embedding_rows(v.tok_emb, tokens), g.slice_rows(v.pos_emb, 0, n));
    for (const BlockVars& blk : v.blocks) x = block_forward_g(g, x, blk, cfg, abl);
    Graph::Var xf = g.layernorm_rows(x, v.lnf_gain, v.lnf_bias, kLayerNormEps);
    return g.matmul_nt(xf, v.tok_emb);  // tied output head
}

TensorF model_forward(const ModelParams& p, const ModelConfig& cfg,
                      const std::vector<int>& tokens, const Ablation& abl) {
    Graph g;
    ModelVars v = lift(g, p);
    return g.val(model_logits_g(g, v, cfg, tokens, abl));
}

LossResult cross_entropy_loss(const TensorF& logits, const std::vector<int>& targets) {
    const std::size_t n = targets.size();
    const std::size_t vocab = logits.cols();
    if (logits.rows() < n)
        throw std::invalid_argument("cross_entropy_loss: fewer logit rows than targets");
    LossResult res;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= vocab)
            throw std::out_of_range("cross_entropy_loss: target out of range at position " +
                                    std::to_string(i));
        double mx = logits.at(i, 0);
        for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, logits.at(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) lse += std::exp(logits.at(i, j) - mx);
        const double nll =
            mx + std::log(lse) - logits.at(i, static_cast<std::size_t>(targets[i]));
        res.per_token.push_back(nll);
        total += nll;
    }
    res.loss = total / static_cast<double>(n);
    res.perplexity = std::exp(res.loss);
    return res;
}

LossResult sequence_loss(const ModelParams& p, const ModelConfig& cfg,
                         const std::vector<int>& tokens, const Ablation& abl) {
    if (tokens.size() < 2)
        throw std::invalid_argument("sequence_loss: need at least 2 tokens");
    TensorF logits = model_forward(p, cfg, tokens, abl);
    TensorF shifted({tokens.size() - 1, cfg.vocab_size});
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        for (std::size_t j = 0; j < cfg.vocab_size; ++j)
            shifted.at(i, j) = logits.at(i, j);
    std::vector<int> targets(tokens.begin() + 1, tokens.end());
    return cross_entropy_loss(shifted, targets);
}

std::vector<int> greedy_decode(const ModelParams& p, const ModelConfig& cfg,
                               std::vector<int> prompt, std::size_t total_len,
                               const Ablation& abl) {
    while (prompt.size() < total_len) {
        TensorF logits = model_forward(p, cfg, prompt, abl);
        const std::size_t last = logits.rows() - 1;
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols(); ++j)
            if (logits.at(last, j) > logits.at(last, best)) best = j;
        prompt.push_back(static_cast<int>(best));
    }
    return prompt;
}

namespace {
constexpr char kMagic[8] = {'M', 'P', 'P', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& p,
                     const ModelConfig& cfg) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kVersion);
    std::string cfg_text;
    for (const auto& [k, vstr] : cfg.to_kv()) cfg_text += k + " = " + vstr + "\n";
    const std::uint64_t cfg_len = cfg_text.size();
    write_pod(os, cfg_len);
    os.write(cfg_text.data(), static_cast<std::streamsize>(cfg_text.size()));

    std::uint32_t count = 0;
    for_each_param(p, [&](const std::string&, const TensorF&) { ++count; });
    write_pod(os, count);
    for_each_param(p, [&](const std::string& name, const TensorF& t) {
        const std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
        write_pod(os, name_len);
        os.write(name.data(), name_len);
        const std::uint32_t ndim = static_cast<std::uint32_t>(t.shape.size());
        write_pod(os, ndim);
        for (std::size_t dim : t.shape) write_pod(os, static_cast<std::uint64_t>(dim));
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    });
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ModelConfig load_checkpoint(const std::string& path, ModelParams& p_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    read_pod(is, version);
    if (version != kVersion)
        throw std::runtime_error("load_checkpoint: unsupported version " +
                                 std::to_string(version));
    std::uint64_t cfg_len = 0;
    read_pod(is, cfg_len);
    std::string cfg_text(cfg_len, '\0');
    is.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));

    std::vector<std::pair<std::string, std::string>> kv;
    std::istringstream lines(cfg_text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    ModelConfig cfg = ModelConfig::from_kv(kv);
    cfg.validate();

    Rng rng(0);
    p_out = init_model(cfg, rng);
    std::uint32_t count = 0;
    read_pod(is, count);
    std::size_t expected = 0;
    for_each_param(p_out, [&](const std::string&, TensorF&) { ++expected; });
    if (count != expected)
        throw std::runtime_error("load_checkpoint: parameter count mismatch");
    for_each_param(p_out, [&](const std::string& name, TensorF& t) {
        std::uint32_t name_len = 0;
        read_pod(is, name_len);
        std::string stored(name_len, '\0');
        is.read(stored.data(), name_len);
        if (stored != name)
            throw std::runtime_error("load_checkpoint: expected parameter '" + name +
                                     "', found '" + stored + "'");
        std::uint32_t ndim = 0;
        read_pod(is, ndim);
        std::vector<std::size_t> shape;
        for (std::uint32_t i = 0; i < ndim; ++i) {
            std::uint64_t dim = 0;
            read_pod(is, dim);
            shape.push_back(static_cast<std::size_t>(dim));
        }
        if (shape != t.shape)
            throw std::runtime_error("load_checkpoint: shape mismatch for '" + name + "'");
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    });
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return cfg;
}

}  // namespace mppa
