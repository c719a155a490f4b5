#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mppa/attention.hpp"
#include "mppa/autograd.hpp"
#include "mppa/energy.hpp"
#include "mppa/periodicity.hpp"
#include "mppa/rng.hpp"
#include "mppa/tensor.hpp"

namespace mppa {

enum class GatingMode { kCausalPrefix, kSequenceMean };

struct ModelConfig {
    std::size_t vocab_size = 64;
    std::size_t d = 32;
    std::size_t layers = 2;
    std::size_t heads = 4;
    std::size_t chunk_size = 8;  // C, power of two
    std::size_t n_max = 128;
    std::size_t d_ff = 0;        // 0 -> 4*d
    std::size_t d_spec = 0;      // periodicity MLP hidden width, 0 -> 2*d
    bool enable_gravitator = true;
    bool enable_energy = true;
    bool enable_periodicity = true;
    GatingMode gating = GatingMode::kCausalPrefix;
    double energy_eps = 1e-6;

    std::size_t ff_width() const { return d_ff ? d_ff : 4 * d; }
    std::size_t spec_width() const { return d_spec ? d_spec : 2 * d; }
    void validate() const;

    std::vector<std::pair<std::string, std::string>> to_kv() const;
    static ModelConfig from_kv(const std::vector<std::pair<std::string, std::string>>& kv);
};

struct GateParams {
    TensorF w_g, w_e, w_p;  // [d] each
    TensorF b_g, b_e, b_p;  // scalars
};

struct BlockParams {
    AttentionParams attention;
    TensorF energy_intensity;  // scalar, learnable compensation intensity
    PeriodicityParams periodicity;
    GateParams gates;
    TensorF ln1_gain, ln1_bias, ln2_gain, ln2_bias;
    TensorF ff_w1, ff_b1, ff_w2, ff_b2;
};

struct ModelParams {
    TensorF tok_emb;  // [vocab x d]; also the tied output head
    TensorF pos_emb;  // [n_max x d]
    std::vector<BlockParams> blocks;
    TensorF lnf_gain, lnf_bias;
};

ModelParams init_model(const ModelConfig& cfg, Rng& rng);

// Canonical parameter enumeration: fixed names, fixed order. The optimizer,
// checkpoint format and gradient checks all walk parameters through this.
void for_each_param(ModelParams& p,
                    const std::function<void(const std::string&, TensorF&)>& fn);
void for_each_param(const ModelParams& p,
                    const std::function<void(const std::string&, const TensorF&)>& fn);

// Ablation switches: false forces that component's output tensor to zero.
struct Ablation {
    bool gravitator = true;
    bool energy = true;
    bool periodicity = true;
};

struct GateVars {
    Graph::Var w_g, w_e, w_p, b_g, b_e, b_p;
};

struct BlockVars {
    AttentionVars attention;
    Graph::Var energy_intensity;
    PeriodicityVars periodicity;
    GateVars gates;
    Graph::Var ln1_gain, ln1_bias, ln2_gain, ln2_bias;
    Graph::Var ff_w1, ff_b1, ff_w2, ff_b2;
};

struct ModelVars {
    Graph::Var tok_emb, pos_emb;
    std::vector<BlockVars> blocks;
    Graph::Var lnf_gain, lnf_bias;
};

ModelVars lift(Graph& g, const ModelParams& p);
// Same order as for_each_param.
std::vector<Graph::Var> flatten(const ModelVars& v);

// Three per-position gate tracks in (0,1): {g_g, g_e, g_p}, each [n].
std::vector<Graph::Var> gate_values_g(Graph& g, Graph::Var h, const GateVars& gates,
                                      GatingMode mode);
std::vector<TensorF> gate_values(const TensorF& h, const GateParams& gates,
                                 GatingMode mode);

Graph::Var block_forward_g(Graph& g, Graph::Var x, const BlockVars& blk,
                           const ModelConfig& cfg, const Ablation& abl);
TensorF block_forward(const TensorF& x, const BlockParams& blk, const ModelConfig& cfg,
                      const Ablation& abl = {});

Graph::Var model_logits_g(Graph& g, const ModelVars& v, const ModelConfig& cfg,
                          const std::vector<int>& tokens, const Ablation& abl);
TensorF model_forward(const ModelParams& p, const ModelConfig& cfg,
                      const std::vector<int>& tokens, const Ablation& abl = {});

struct LossResult {
    double loss = 0.0;
    double perplexity = 0.0;
    std::vector<double> per_token;
};

// Mean next-token NLL of logits rows 0..n-2 against tokens 1..n-1.
LossResult cross_entropy_loss(const TensorF& logits, const std::vector<int>& targets);

// Convenience: full forward + shifted loss for one token sequence.
LossResult sequence_loss(const ModelParams& p, const ModelConfig& cfg,
                         const std::vector<int>& tokens, const Ablation& abl = {});

std::vector<int> greedy_decode(const ModelParams& p, const ModelConfig& cfg,
                               std::vector<int> prompt, std::size_t total_len,
                               const Ablation& abl = {});

// Flat binary checkpoint: magic, version, length-prefixed config text, then
// each named parameter as (name, shape, float64 little-endian payload).
void save_checkpoint(const std::string& path, const ModelParams& p,
                     const ModelConfig& cfg);
ModelConfig load_checkpoint(const std::string& path, ModelParams& p_out);

constexpr double kLayerNormEps = 1e-5;

}  // namespace mppa
