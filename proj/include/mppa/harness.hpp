#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mppa/datagen.hpp"
#include "mppa/model.hpp"
#include "mppa/optimizer.hpp"

namespace mppa {

struct RunConfig {
    ModelConfig model;
    OptimizerConfig optimizer;
    std::string train_data;
    std::string val_data;
    std::string metrics_path;
    std::string checkpoint_path;

    void validate() const;
};

// Sectioned key/value text: [model], [optimizer], [data], [output].
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

struct MetricsRecord {
    std::size_t step = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_perplexity = 0.0;
    std::map<std::string, double> per_kind_ppl;
    std::optional<double> traj_mse;
    std::optional<double> energy_err;
    Ablation ablation;
};

// One self-describing "key=value" line per record, deterministic formatting.
std::string format_metrics(const MetricsRecord& rec);

struct TrainResult {
    MetricsRecord final_metrics;
    ModelParams params;
};

TrainResult train(const RunConfig& cfg);

struct EvalOptions {
    std::size_t max_sequences = 0;  // 0 -> all
    std::size_t decode_sequences = 0;
    Ablation ablation;
};

MetricsRecord evaluate(const ModelParams& params, const ModelConfig& cfg,
                       const std::string& dataset_path, const EvalOptions& opts = {});

// Full model plus each single-component-disabled variant: exactly 4 rows.
std::vector<MetricsRecord> ablate(const ModelParams& params, const ModelConfig& cfg,
                                  const std::string& dataset_path,
                                  const EvalOptions& opts = {});

std::string format_ablation_table(const std::vector<MetricsRecord>& rows);

struct AuditReport {
    std::size_t trials = 0;
    std::size_t passes = 0;
    double max_deviation = 0.0;
    std::optional<std::uint64_t> first_failure_seed;

    bool ok() const { return passes == trials; }
};

// Full-stack audit: perturbing token t must leave logit rows < t unchanged.
AuditReport audit_causality(const ModelConfig& cfg, std::size_t trials,
                            std::uint64_t seed, std::size_t seq_len,
                            double tolerance = 1e-10);

// Module-level delay audits on random hidden states.
AuditReport audit_energy_delay(std::size_t trials, std::uint64_t seed, std::size_t n,
                               std::size_t d, std::size_t chunk_size,
                               double tolerance = 1e-10);
AuditReport audit_periodicity_delay(std::size_t trials, std::uint64_t seed, std::size_t n,
                                    std::size_t d, std::size_t chunk_size,
                                    double tolerance = 1e-10);

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> tensors;
    double worst = 0.0;

    bool ok(double threshold = 1e-5) const { return worst < threshold; }
};

// Central differences (h = 1e-6) against the analytic gradients of the mean
// next-token loss on a seeded token sequence, over every parameter tensor.
GradCheckReport check_gradients(const ModelConfig& cfg, std::uint64_t seed,
                                std::size_t seq_len = 32, double h = 1e-6);

// Analytic gradients of the shifted cross-entropy loss for one sequence, in
// for_each_param order; returns the loss.
double loss_and_gradients(const ModelParams& params, const ModelConfig& cfg,
                          const std::vector<int>& tokens, const Ablation& abl,
                          std::vector<TensorF>& grads_out);

}  // namespace mppa
