#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "mppa/model.hpp"
#include "mppa/numerics.hpp"

using namespace mppa;

namespace {
ModelConfig small_config() {
    ModelConfig cfg;
    cfg.vocab_size = 16;
    cfg.d = 8;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.chunk_size = 4;
    cfg.n_max = 24;
    cfg.validate();
    return cfg;
}

std::vector<int> random_tokens(std::size_t n, std::size_t vocab, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> tokens(n);
    for (int& t : tokens) t = static_cast<int>(rng.next_below(vocab));
    return tokens;
}

// Make the data-dependent paths (gates, modulation, compensation) live.
void perturb(ModelParams& params, std::uint64_t seed) {
    Rng rng(seed);
    for (BlockParams& blk : params.blocks) {
        blk.energy_intensity.data[0] = 0.3;
        for (double& v : blk.periodicity.mlp_w1.data) v = 0.2 * rng.normal();
        for (double& v : blk.periodicity.mlp_w2.data) v = 0.2 * rng.normal();
        for (double& v : blk.gates.w_g.data) v = 0.1 * rng.normal();
        for (double& v : blk.gates.w_e.data) v = 0.1 * rng.normal();
        for (double& v : blk.gates.w_p.data) v = 0.1 * rng.normal();
    }
}
}  // namespace

TEST_CASE("gates: zero weights and biases give exactly 0.5 everywhere") {
    const ModelConfig cfg = small_config();
    Rng rng(50);
    const ModelParams params = init_model(cfg, rng);
    const TensorF h = rng.normal_tensor({5, cfg.d}, 1.0);
    const std::vector<TensorF> gates =
        gate_values(h, params.blocks[0].gates, GatingMode::kCausalPrefix);
    REQUIRE(gates.size() == 3);
    for (const TensorF& track : gates)
        for (double v : track.data) CHECK(v == 0.5);
}

TEST_CASE("gates: large positive bias saturates toward 1") {
    const ModelConfig cfg = small_config();
    Rng rng(51);
    ModelParams params = init_model(cfg, rng);
    params.blocks[0].gates.b_g.data[0] = 40.0;
    const TensorF h = rng.normal_tensor({5, cfg.d}, 1.0);
    const std::vector<TensorF> gates =
        gate_values(h, params.blocks[0].gates, GatingMode::kCausalPrefix);
    for (double v : gates[0].data) CHECK(v > 1.0 - 1e-12);
}

TEST_CASE("gates: match a prefix-mean plus sigmoid oracle") {
    const ModelConfig cfg = small_config();
    Rng rng(2);
    ModelParams params = init_model(cfg, rng);
    GateParams& gp = params.blocks[0].gates;
    for (double& v : gp.w_g.data) v = rng.normal();
    gp.b_g.data[0] = 0.3;
    const std::size_t n = 5, d = 4;
    TensorF w({d});
    for (std::size_t f = 0; f < d; ++f) w[f] = gp.w_g[f];
    GateParams small;
    small.w_g = w;
    small.w_e = TensorF({d});
    small.w_p = TensorF({d});
    small.b_g = TensorF::scalar(0.3);
    small.b_e = TensorF::scalar(0.0);
    small.b_p = TensorF::scalar(0.0);
    const TensorF h = rng.normal_tensor({n, d}, 1.0);
    const std::vector<TensorF> gates = gate_values(h, small, GatingMode::kCausalPrefix);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t f = 0; f < d; ++f) {
            double col = 0.0;
            for (std::size_t j = 0; j <= t; ++j) col += h.at(j, f);
            acc += (col * (1.0 / static_cast<double>(t + 1))) * w[f];
        }
        CHECK(std::abs(gates[0][t] - sigmoid(acc + 0.3)) < 1e-15);
    }
}

TEST_CASE("block: disabling all components leaves x plus the feedforward path") {
    ModelConfig cfg = small_config();
    cfg.enable_gravitator = false;
    cfg.enable_energy = false;
    cfg.enable_periodicity = false;
    Rng rng(52);
    ModelParams params = init_model(cfg, rng);
    perturb(params, 99);
    const TensorF x = rng.normal_tensor({10, cfg.d}, 1.0);
    const TensorF out = block_forward(x, params.blocks[0], cfg);

    // oracle: fuse == x, then the feedforward residual on top
    ModelConfig ff_only = cfg;
    const TensorF expect = block_forward(x, params.blocks[0], ff_only);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == expect[i]);

    // and the fusion really contributed nothing: flipping gate weights is inert
    ModelParams params2 = params;
    for (double& v : params2.blocks[0].gates.w_g.data) v += 1.0;
    const TensorF out2 = block_forward(x, params2.blocks[0], cfg);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == out2[i]);
}

TEST_CASE("block: config disable flags equal ablation zero-forcing bit for bit") {
    const ModelConfig cfg = small_config();
    Rng rng(53);
    ModelParams params = init_model(cfg, rng);
    perturb(params, 54);
    const TensorF x = rng.normal_tensor({12, cfg.d}, 1.0);

    const char* names[3] = {"gravitator", "energy", "periodicity"};
    for (int which = 0; which < 3; ++which) {
        CAPTURE(names[which]);
        ModelConfig disabled = cfg;
        Ablation abl;
        if (which == 0) { disabled.enable_gravitator = false; abl.gravitator = false; }
        if (which == 1) { disabled.enable_energy = false; abl.energy = false; }
        if (which == 2) { disabled.enable_periodicity = false; abl.periodicity = false; }
        const TensorF via_config = block_forward(x, params.blocks[0], disabled);
        const TensorF via_ablation = block_forward(x, params.blocks[0], cfg, abl);
        for (std::size_t i = 0; i < via_config.size(); ++i)
            CHECK(via_config[i] == via_ablation[i]);
    }
}

TEST_CASE("block: each row equals a from-scratch prefix recomputation") {
    const ModelConfig cfg = small_config();
    Rng rng(13);
    ModelParams params = init_model(cfg, rng);
    perturb(params, 13);
    const std::size_t n = 16;
    const TensorF x = rng.normal_tensor({n, cfg.d}, 1.0);
    const TensorF full = block_forward(x, params.blocks[0], cfg);
    for (std::size_t t = 0; t < n; ++t) {
        TensorF prefix({t + 1, cfg.d});
        for (std::size_t r = 0; r <= t; ++r)
            for (std::size_t f = 0; f < cfg.d; ++f) prefix.at(r, f) = x.at(r, f);
        const TensorF part = block_forward(prefix, params.blocks[0], cfg);
        for (std::size_t f = 0; f < cfg.d; ++f)
            CHECK(full.at(t, f) == part.at(t, f));
    }
}

TEST_CASE("model: single token yields a 1 x vocab logits row") {
    const ModelConfig cfg = small_config();
    Rng rng(55);
    const ModelParams params = init_model(cfg, rng);
    const TensorF logits = model_forward(params, cfg, {3});
    CHECK(logits.rows() == 1);
    CHECK(logits.cols() == cfg.vocab_size);
}

TEST_CASE("model: appending a token leaves earlier logit rows bit-identical") {
    const ModelConfig cfg = small_config();
    Rng seeds(64);
    for (int trial = 0; trial < 100; ++trial) {
        Rng rng(seeds.next_u64());
        ModelParams params = init_model(cfg, rng);
        perturb(params, seeds.next_u64());
        std::vector<int> tokens =
            random_tokens(1 + rng.next_below(cfg.n_max - 1), cfg.vocab_size,
                          seeds.next_u64());
        std::vector<int> longer = tokens;
        longer.push_back(static_cast<int>(rng.next_below(cfg.vocab_size)));
        const TensorF base = model_forward(params, cfg, tokens);
        const TensorF ext = model_forward(params, cfg, longer);
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i] == ext[i]);
    }
}

TEST_CASE("model: fresh init predicts near-uniformly") {
    const ModelConfig cfg = small_config();
    Rng rng(56);
    const ModelParams params = init_model(cfg, rng);
    const std::vector<int> tokens = random_tokens(20, cfg.vocab_size, 57);
    const LossResult res = sequence_loss(params, cfg, tokens);
    CHECK(std::isfinite(res.loss));
    CHECK(std::abs(res.loss - std::log(static_cast<double>(cfg.vocab_size))) < 0.05);
}

TEST_CASE("loss: uniform logits give ln(vocab) and perplexity vocab") {
    const std::size_t v = 16;
    const TensorF logits = TensorF::zeros(5, v);
    const LossResult res = cross_entropy_loss(logits, {1, 5, 9, 0, 15});
    CHECK(res.loss == doctest::Approx(std::log(static_cast<double>(v))).epsilon(1e-14));
    CHECK(res.perplexity == doctest::Approx(static_cast<double>(v)).epsilon(1e-12));
}

TEST_CASE("loss: confident correct logits drive the loss to zero") {
    TensorF logits = TensorF::zeros(3, 8);
    const std::vector<int> targets = {2, 4, 6};
    for (std::size_t t = 0; t < 3; ++t)
        logits.at(t, static_cast<std::size_t>(targets[t])) = 60.0;
    const LossResult res = cross_entropy_loss(logits, targets);
    CHECK(res.loss < 1e-12);
}

TEST_CASE("loss: matches a log-softmax oracle") {
    Rng rng(8);
    const std::size_t n = 6, v = 10;
    const TensorF logits = rng.normal_tensor({n, v}, 1.5);
    std::vector<int> targets(n);
    for (int& t : targets) t = static_cast<int>(rng.next_below(v));
    const LossResult res = cross_entropy_loss(logits, targets);
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double mx = logits.at(t, 0);
        for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, logits.at(t, j));
        double z = 0.0;
        for (std::size_t j = 0; j < v; ++j) z += std::exp(logits.at(t, j) - mx);
        total += -(logits.at(t, static_cast<std::size_t>(targets[t])) - mx - std::log(z));
    }
    CHECK(std::abs(res.loss - total / static_cast<double>(n)) < 1e-12);
    CHECK(res.perplexity == doctest::Approx(std::exp(res.loss)).epsilon(1e-14));
}

TEST_CASE("loss: out-of-range target is rejected with its position") {
    const TensorF logits = TensorF::zeros(2, 4);
    CHECK_THROWS(cross_entropy_loss(logits, {1, 7}));
}

TEST_CASE("params: flatten order matches the canonical enumeration") {
    const ModelConfig cfg = small_config();
    Rng rng(58);
    ModelParams params = init_model(cfg, rng);
    std::vector<const TensorF*> canonical;
    for_each_param(static_cast<const ModelParams&>(params),
                   [&](const std::string&, const TensorF& t) { canonical.push_back(&t); });
    Graph g;
    const ModelVars vars = lift(g, params);
    const std::vector<Graph::Var> flat = flatten(vars);
    REQUIRE(flat.size() == canonical.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const TensorF& lifted = g.val(flat[i]);
        REQUIRE(lifted.shape == canonical[i]->shape);
        for (std::size_t j = 0; j < lifted.size(); ++j)
            CHECK(lifted[j] == (*canonical[i])[j]);
    }
}

TEST_CASE("checkpoint: save/load round-trip is bit-exact") {
    const ModelConfig cfg = small_config();
    Rng rng(59);
    ModelParams params = init_model(cfg, rng);
    perturb(params, 60);
    const std::string path = "test_model_ckpt.bin";
    save_checkpoint(path, params, cfg);
    ModelParams loaded;
    const ModelConfig cfg2 = load_checkpoint(path, loaded);
    CHECK(cfg2.d == cfg.d);
    CHECK(cfg2.layers == cfg.layers);
    CHECK(cfg2.vocab_size == cfg.vocab_size);

    std::vector<const TensorF*> a, b;
    for_each_param(static_cast<const ModelParams&>(params),
                   [&](const std::string&, const TensorF& t) { a.push_back(&t); });
    for_each_param(static_cast<const ModelParams&>(loaded),
                   [&](const std::string&, const TensorF& t) { b.push_back(&t); });
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i]->shape == b[i]->shape);
        for (std::size_t j = 0; j < a[i]->size(); ++j)
            CHECK((*a[i])[j] == (*b[i])[j]);
    }

    // and the loaded model evaluates identically
    const std::vector<int> tokens = random_tokens(12, cfg.vocab_size, 61);
    const TensorF l1 = model_forward(params, cfg, tokens);
    const TensorF l2 = model_forward(loaded, cfg2, tokens);
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1[i] == l2[i]);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint: truncated file is rejected") {
    const ModelConfig cfg = small_config();
    Rng rng(62);
    ModelParams params = init_model(cfg, rng);
    const std::string path = "test_model_ckpt_trunc.bin";
    save_checkpoint(path, params, cfg);
    {
        std::FILE* f = std::fopen(path.c_str(), "r+b");
        REQUIRE(f != nullptr);
        std::fseek(f, 0, SEEK_END);
        const long size = std::ftell(f);
        std::fclose(f);
        REQUIRE(truncate(path.c_str(), size / 2) == 0);
    }
    ModelParams loaded;
    CHECK_THROWS(load_checkpoint(path, loaded));
    std::remove(path.c_str());
}

TEST_CASE("decode: greedy continuation extends the prompt deterministically") {
    const ModelConfig cfg = small_config();
    Rng rng(63);
    ModelParams params = init_model(cfg, rng);
    perturb(params, 63);
    const std::vector<int> prompt = random_tokens(4, cfg.vocab_size, 63);
    const std::vector<int> a = greedy_decode(params, cfg, prompt, 12);
    const std::vector<int> b = greedy_decode(params, cfg, prompt, 12);
    REQUIRE(a.size() == 12);
    CHECK(a == b);
    for (std::size_t i = 0; i < prompt.size(); ++i) CHECK(a[i] == prompt[i]);
}
