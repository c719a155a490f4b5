// Command-line front end: dataset generation, training, evaluation,
// ablation sweeps, causality audits and gradient checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mppa/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAuditFailure = 1;
constexpr int kExitUsage = 2;

std::vector<mppa::SystemKind> parse_kinds(const std::string& csv) {
    std::vector<mppa::SystemKind> kinds;
    std::istringstream is(csv);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) kinds.push_back(mppa::kind_from_name(item));
    if (kinds.empty()) throw std::invalid_argument("no system kinds given");
    return kinds;
}

void apply_gating(mppa::ModelConfig& cfg, const std::string& gating) {
    if (gating.empty()) return;
    if (gating == "causal_prefix") cfg.gating = mppa::GatingMode::kCausalPrefix;
    else if (gating == "sequence_mean") cfg.gating = mppa::GatingMode::kSequenceMean;
    else throw std::invalid_argument("unknown gating mode '" + gating + "'");
}

mppa::Ablation parse_disable(const std::vector<std::string>& disable) {
    mppa::Ablation abl;
    for (const std::string& name : disable) {
        if (name == "gravitator") abl.gravitator = false;
        else if (name == "energy") abl.energy = false;
        else if (name == "periodicity") abl.periodicity = false;
        else throw std::invalid_argument("unknown component '" + name + "'");
    }
    return abl;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
}

void print_audit(const char* name, const mppa::AuditReport& rep) {
    std::printf("%s: %zu/%zu trials passed, max deviation %.3e\n", name, rep.passes,
                rep.trials, rep.max_deviation);
    if (rep.first_failure_seed)
        std::printf("%s: first failing trial seed %llu\n", name,
                    static_cast<unsigned long long>(*rep.first_failure_seed));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-principle sequence model harness"};
    app.require_subcommand(1);

    // datagen
    auto* datagen = app.add_subcommand("datagen", "generate a synthetic physics dataset");
    std::string dg_out;
    std::uint64_t dg_seed = 42;
    mppa::DatasetConfig dg_cfg;
    std::string dg_kinds = "harmonic,damped";
    datagen->add_option("--out", dg_out, "output dataset path")->required();
    datagen->add_option("--seed", dg_seed, "generator seed");
    datagen->add_option("--count", dg_cfg.count, "number of sequences");
    datagen->add_option("--kinds", dg_kinds, "comma-separated system kinds");
    datagen->add_option("--seq-len", dg_cfg.tokenizer.seq_len, "token sequence length");
    datagen->add_option("--bins", dg_cfg.tokenizer.bins, "quantization bins");
    datagen->add_option("--value-min", dg_cfg.tokenizer.value_min, "clip range lower edge");
    datagen->add_option("--value-max", dg_cfg.tokenizer.value_max, "clip range upper edge");
    datagen->add_option("--dt", dg_cfg.dt, "integration step");
    datagen->add_option("--sim-steps", dg_cfg.sim_steps, "integration steps per trajectory");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model from a run config");
    std::string tr_config, tr_out, tr_gating;
    std::optional<std::uint64_t> tr_seed;
    std::vector<std::string> tr_disable;
    train_cmd->add_option("--config", tr_config, "run config file")->required();
    train_cmd->add_option("--seed", tr_seed, "override optimizer seed");
    train_cmd->add_option("--out", tr_out, "override metrics output path");
    train_cmd->add_option("--gating", tr_gating, "causal_prefix|sequence_mean");
    train_cmd->add_option("--disable", tr_disable, "disable a component (repeatable)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ev_ckpt, ev_data, ev_out;
    std::vector<std::string> ev_disable;
    std::size_t ev_decode = 4;
    eval_cmd->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
    eval_cmd->add_option("--data", ev_data, "dataset path")->required();
    eval_cmd->add_option("--out", ev_out, "metrics output path (default stdout)");
    eval_cmd->add_option("--disable", ev_disable, "disable a component (repeatable)");
    eval_cmd->add_option("--decode-sequences", ev_decode,
                         "sequences to score by greedy decode");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "component ablation sweep");
    std::string ab_ckpt, ab_data, ab_out;
    ablate_cmd->add_option("--checkpoint", ab_ckpt, "model checkpoint")->required();
    ablate_cmd->add_option("--data", ab_data, "dataset path")->required();
    ablate_cmd->add_option("--out", ab_out, "table output path (default stdout)");

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "causality and delay-granularity audit");
    std::string au_config, au_gating;
    std::size_t au_trials = 100, au_seq_len = 64;
    std::uint64_t au_seed = 7;
    audit_cmd->add_option("--config", au_config, "run config file (model section)");
    audit_cmd->add_option("--trials", au_trials, "trials per audit");
    audit_cmd->add_option("--seed", au_seed, "audit seed");
    audit_cmd->add_option("--seq-len", au_seq_len, "audited sequence length");
    audit_cmd->add_option("--gating", au_gating, "causal_prefix|sequence_mean");

    // gradcheck
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
    std::string gc_config, gc_gating;
    std::uint64_t gc_seed = 5;
    std::vector<std::string> gc_disable;
    grad_cmd->add_option("--config", gc_config, "run config file (model section)");
    grad_cmd->add_option("--seed", gc_seed, "init seed");
    grad_cmd->add_option("--gating", gc_gating, "causal_prefix|sequence_mean");
    grad_cmd->add_option("--disable", gc_disable, "disable a component (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (datagen->parsed()) {
            dg_cfg.kinds = parse_kinds(dg_kinds);
            mppa::generate_dataset(dg_cfg, dg_seed, dg_out);
            std::printf("wrote %zu sequences to %s\n", dg_cfg.count, dg_out.c_str());
            return kExitOk;
        }
        if (train_cmd->parsed()) {
            mppa::RunConfig cfg = mppa::load_run_config(tr_config);
            if (tr_seed) cfg.optimizer.seed = *tr_seed;
            if (!tr_out.empty()) cfg.metrics_path = tr_out;
            apply_gating(cfg.model, tr_gating);
            const mppa::Ablation abl = parse_disable(tr_disable);
            cfg.model.enable_gravitator &= abl.gravitator;
            cfg.model.enable_energy &= abl.energy;
            cfg.model.enable_periodicity &= abl.periodicity;
            const mppa::TrainResult result = mppa::train(cfg);
            std::printf("final: %s\n", mppa::format_metrics(result.final_metrics).c_str());
            return kExitOk;
        }
        if (eval_cmd->parsed()) {
            mppa::ModelParams params;
            const mppa::ModelConfig cfg = mppa::load_checkpoint(ev_ckpt, params);
            mppa::EvalOptions opts;
            opts.ablation = parse_disable(ev_disable);
            opts.decode_sequences = ev_decode;
            const mppa::MetricsRecord rec = mppa::evaluate(params, cfg, ev_data, opts);
            write_text(ev_out, mppa::format_metrics(rec) + "\n");
            return kExitOk;
        }
        if (ablate_cmd->parsed()) {
            mppa::ModelParams params;
            const mppa::ModelConfig cfg = mppa::load_checkpoint(ab_ckpt, params);
            const auto rows = mppa::ablate(params, cfg, ab_data);
            write_text(ab_out, mppa::format_ablation_table(rows));
            return kExitOk;
        }
        if (audit_cmd->parsed()) {
            mppa::ModelConfig cfg;
            if (!au_config.empty()) cfg = mppa::load_run_config(au_config).model;
            apply_gating(cfg, au_gating);
            cfg.validate();
            const auto full = mppa::audit_causality(cfg, au_trials, au_seed, au_seq_len);
            const auto energy =
                mppa::audit_energy_delay(au_trials, au_seed, au_seq_len, cfg.d,
                                         cfg.chunk_size);
            const auto periodicity = mppa::audit_periodicity_delay(
                au_trials, au_seed, au_seq_len, cfg.d, cfg.chunk_size);
            print_audit("full-stack", full);
            print_audit("energy-delay", energy);
            print_audit("periodicity-delay", periodicity);
            const bool ok = full.ok() && energy.ok() && periodicity.ok();
            std::printf("audit %s\n", ok ? "PASS" : "FAIL");
            return ok ? kExitOk : kExitAuditFailure;
        }
        if (grad_cmd->parsed()) {
            mppa::ModelConfig cfg;
            if (!gc_config.empty()) {
                cfg = mppa::load_run_config(gc_config).model;
            } else {
                cfg.vocab_size = 32;
                cfg.d = 16;
                cfg.heads = 2;
                cfg.layers = 2;
                cfg.chunk_size = 8;
                cfg.n_max = 32;  // >= 3 chunks so delayed compensation is live
            }
            apply_gating(cfg, gc_gating);
            const mppa::Ablation abl = parse_disable(gc_disable);
            cfg.enable_gravitator &= abl.gravitator;
            cfg.enable_energy &= abl.energy;
            cfg.enable_periodicity &= abl.periodicity;
            cfg.validate();
            const auto report = mppa::check_gradients(cfg, gc_seed);
            for (const auto& entry : report.tensors)
                std::printf("%-24s max rel err %.3e\n", entry.name.c_str(),
                            entry.max_rel_err);
            std::printf("worst %.3e -> %s\n", report.worst,
                        report.ok() ? "PASS" : "FAIL");
            return report.ok() ? kExitOk : kExitAuditFailure;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAuditFailure;
    }
    return kExitUsage;
}
