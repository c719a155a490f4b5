#include "mppa/harness.hpp"

#include "mppa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace mppa {

namespace {
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void RunConfig::validate() const {
    model.validate();
    optimizer.validate();
    if (train_data.empty()) throw std::invalid_argument("config: data.train is required");
    if (val_data.empty()) throw std::invalid_argument("config: data.val is required");
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::vector<std::pair<std::string, std::string>> model_kv;
    std::istringstream is(text);
    std::string line, section;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: bad line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section == "model") {
            model_kv.emplace_back(key, value);
        } else if (section == "optimizer") {
            auto& o = cfg.optimizer;
            if (key == "lr") o.lr = std::stod(value);
            else if (key == "lr_min") o.lr_min = std::stod(value);
            else if (key == "weight_decay") o.weight_decay = std::stod(value);
            else if (key == "warmup_steps") o.warmup_steps = std::stoul(value);
            else if (key == "steps") o.steps = std::stoul(value);
            else if (key == "batch_size") o.batch_size = std::stoul(value);
            else if (key == "seed") o.seed = std::stoull(value);
            else if (key == "eval_interval") o.eval_interval = std::stoul(value);
            else if (key == "eval_max_sequences") o.eval_max_sequences = std::stoul(value);
            else if (key == "eval_decode_sequences")
                o.eval_decode_sequences = std::stoul(value);
            else throw std::invalid_argument("config: unknown optimizer key '" + key + "'");
        } else if (section == "data") {
            if (key == "train") cfg.train_data = value;
            else if (key == "val") cfg.val_data = value;
            else throw std::invalid_argument("config: unknown data key '" + key + "'");
        } else if (section == "output") {
            if (key == "metrics") cfg.metrics_path = value;
            else if (key == "checkpoint") cfg.checkpoint_path = value;
            else throw std::invalid_argument("config: unknown output key '" + key + "'");
        } else {
            throw std::invalid_argument("config: key '" + key + "' outside a known section");
        }
    }
    cfg.model = ModelConfig::from_kv(model_kv);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_run_config(buf.str());
}

std::string format_metrics(const MetricsRecord& rec) {
    std::string out = "step=" + std::to_string(rec.step);
    out += " train_loss=" + fmt(rec.train_loss);
    out += " val_loss=" + fmt(rec.val_loss);
    out += " val_perplexity=" + fmt(rec.val_perplexity);
    for (const auto& [kind, ppl] : rec.per_kind_ppl)
        out += " ppl." + kind + "=" + fmt(ppl);
    if (rec.traj_mse) out += " traj_mse=" + fmt(*rec.traj_mse);
    if (rec.energy_err) out += " energy_err=" + fmt(*rec.energy_err);
    out += std::string(" gravitator=") + (rec.ablation.gravitator ? "1" : "0");
    out += std::string(" energy=") + (rec.ablation.energy ? "1" : "0");
    out += std::string(" periodicity=") + (rec.ablation.periodicity ? "1" : "0");
    return out;
}

double loss_and_gradients(const ModelParams& params, const ModelConfig& cfg,
                          const std::vector<int>& tokens, const Ablation& abl,
                          std::vector<TensorF>& grads_out) {
    Graph g;
    ModelVars vars = lift(g, params);
    Graph::Var logits = model_logits_g(g, vars, cfg, tokens, abl);
    const std::size_t n = tokens.size();
    Graph::Var shifted = g.slice_rows(logits, 0, n - 1);
    std::vector<int> targets(tokens.begin() + 1, tokens.end());
    Graph::Var loss = g.cross_entropy_mean(shifted, targets);
    g.backward(loss);
    const std::vector<Graph::Var> flat = flatten(vars);
    if (grads_out.empty())
        for (Graph::Var v : flat) grads_out.emplace_back(g.val(v).shape);
    for (std::size_t i = 0; i < flat.size(); ++i)
        for (std::size_t j = 0; j < grads_out[i].size(); ++j)
            grads_out[i].data[j] += g.grad(flat[i]).data[j];
    return g.val(loss).data[0];
}

namespace {

struct EvalAccumulator {
    double total_nll = 0.0;
    std::size_t total_tokens = 0;
    std::map<std::string, std::pair<double, std::size_t>> per_kind;

    void add(const std::string& kind, const LossResult& res) {
        for (double nll : res.per_token) total_nll += nll;
        total_tokens += res.per_token.size();
        auto& slot = per_kind[kind];
        for (double nll : res.per_token) slot.first += nll;
        slot.second += res.per_token.size();
    }
};

}  // namespace

MetricsRecord evaluate(const ModelParams& params, const ModelConfig& cfg,
                       const std::string& dataset_path, const EvalOptions& opts) {
    const auto sequences = load_dataset(dataset_path);
    if (sequences.empty()) throw std::runtime_error("evaluate: empty dataset " + dataset_path);
    DatasetMeta meta;
    bool have_meta = false;
    try {
        meta = load_manifest(dataset_path + ".manifest");
        have_meta = meta.systems.size() == sequences.size();
    } catch (const std::exception&) {
        have_meta = false;
    }

    const std::size_t limit =
        opts.max_sequences ? std::min(opts.max_sequences, sequences.size())
                           : sequences.size();
    EvalAccumulator acc;
    for (std::size_t i = 0; i < limit; ++i) {
        const std::string kind =
            have_meta ? kind_name(meta.systems[i].kind) : "unknown";
        acc.add(kind, sequence_loss(params, cfg, sequences[i], opts.ablation));
    }

    MetricsRecord rec;
    rec.ablation = opts.ablation;
    rec.val_loss = acc.total_nll / static_cast<double>(acc.total_tokens);
    rec.val_perplexity = std::exp(rec.val_loss);
    for (const auto& [kind, slot] : acc.per_kind)
        rec.per_kind_ppl[kind] = std::exp(slot.first / static_cast<double>(slot.second));

    if (opts.decode_sequences > 0 && have_meta) {
        double mse_sum = 0.0, energy_sum = 0.0;
        std::size_t mse_count = 0, energy_count = 0;
        const std::size_t decode_n = std::min(opts.decode_sequences, limit);
        for (std::size_t i = 0; i < decode_n; ++i) {
            const auto& truth = sequences[i];
            const SystemSpec& spec = meta.systems[i];
            std::vector<int> prompt(truth.begin(),
                                    truth.begin() + static_cast<long>(truth.size() / 2));
            const auto decoded =
                greedy_decode(params, cfg, prompt, truth.size(), opts.ablation);
            const auto dec_states = detokenize(decoded, meta.tokenizer, spec.state_dim());
            const auto true_states = detokenize(truth, meta.tokenizer, spec.state_dim());
            const std::size_t first =
                detokenize(prompt, meta.tokenizer, spec.state_dim()).size();
            const std::size_t last = std::min(dec_states.size(), true_states.size());
            double se = 0.0;
            std::size_t count = 0;
            for (std::size_t s = first; s < last; ++s) {
                for (std::size_t ch = 0; ch < spec.state_dim(); ++ch) {
                    const double diff = dec_states[s][ch] - true_states[s][ch];
                    se += diff * diff;
                    ++count;
                }
            }
            if (count) {
                mse_sum += se / static_cast<double>(count);
                ++mse_count;
            }
            if (spec.kind != SystemKind::kLorenz && last > first + 1) {
                const double e0 = mechanical_energy(dec_states[first][0],
                                                    dec_states[first][1], spec.omega);
                const double denom = std::max(std::abs(e0), 1e-12);
                double worst = 0.0;
                for (std::size_t s = first; s < last; ++s) {
                    const double e = mechanical_energy(dec_states[s][0], dec_states[s][1],
                                                       spec.omega);
                    worst = std::max(worst, std::abs(e - e0) / denom);
                }
                energy_sum += worst;
                ++energy_count;
            }
        }
        if (mse_count) rec.traj_mse = mse_sum / static_cast<double>(mse_count);
        if (energy_count) rec.energy_err = energy_sum / static_cast<double>(energy_count);
    }
    return rec;
}

std::vector<MetricsRecord> ablate(const ModelParams& params, const ModelConfig& cfg,
                                  const std::string& dataset_path,
                                  const EvalOptions& opts) {
    std::vector<MetricsRecord> rows;
    std::vector<Ablation> variants = {
        {},                        // full model
        {false, true, true},       // gravitator disabled
        {true, false, true},       // energy disabled
        {true, true, false},       // periodicity disabled
    };
    for (const Ablation& abl : variants) {
        EvalOptions sub = opts;
        sub.ablation = abl;
        rows.push_back(evaluate(params, cfg, dataset_path, sub));
    }
    return rows;
}

std::string format_ablation_table(const std::vector<MetricsRecord>& rows) {
    auto label = [](const Ablation& a) -> std::string {
        if (a.gravitator && a.energy && a.periodicity) return "full";
        if (!a.gravitator) return "no_gravitator";
        if (!a.energy) return "no_energy";
        return "no_periodicity";
    };
    std::string out = "configuration val_loss val_perplexity delta_vs_full\n";
    const double base = rows.empty() ? 0.0 : rows[0].val_loss;
    for (const auto& rec : rows) {
        out += label(rec.ablation) + " " + fmt(rec.val_loss) + " " +
               fmt(rec.val_perplexity) + " " + fmt(rec.val_loss - base) + "\n";
    }
    return out;
}

TrainResult train(const RunConfig& cfg) {
    cfg.validate();
    const auto train_seqs = load_dataset(cfg.train_data);
    if (train_seqs.empty()) throw std::runtime_error("train: empty dataset " + cfg.train_data);

    Rng init_rng(cfg.optimizer.seed);
    ModelParams params = init_model(cfg.model, init_rng);
    Rng batch_rng = init_rng.fork(0x7261696eULL);

    std::vector<TensorF*> param_ptrs;
    for_each_param(params, [&](const std::string&, TensorF& t) { param_ptrs.push_back(&t); });
    AdamW opt(cfg.optimizer);

    std::ostringstream metrics_text;
    MetricsRecord last;

    auto run_eval = [&](std::size_t step, double train_loss, bool final_step) {
        EvalOptions opts;
        opts.max_sequences = cfg.optimizer.eval_max_sequences;
        opts.decode_sequences = final_step ? cfg.optimizer.eval_decode_sequences : 0;
        MetricsRecord rec = evaluate(params, cfg.model, cfg.val_data, opts);
        rec.step = step;
        rec.train_loss = train_loss;
        metrics_text << format_metrics(rec) << "\n";
        last = rec;
    };

    for (std::size_t step = 0; step < cfg.optimizer.steps; ++step) {
        std::vector<TensorF> grads;
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < cfg.optimizer.batch_size; ++b) {
            const std::size_t idx =
                static_cast<std::size_t>(batch_rng.next_below(train_seqs.size()));
            batch_loss +=
                loss_and_gradients(params, cfg.model, train_seqs[idx], {}, grads);
        }
        const double inv_batch = 1.0 / static_cast<double>(cfg.optimizer.batch_size);
        batch_loss *= inv_batch;
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("train: non-finite loss at step " +
                                     std::to_string(step));
        for (TensorF& g : grads)
            for (double& v : g.data) v *= inv_batch;
        opt.step(param_ptrs, grads, step);

        const bool final_step = step + 1 == cfg.optimizer.steps;
        if (final_step || (cfg.optimizer.eval_interval > 0 &&
                           (step + 1) % cfg.optimizer.eval_interval == 0))
            run_eval(step + 1, batch_loss, final_step);
    }

    if (!cfg.metrics_path.empty()) {
        std::ofstream os(cfg.metrics_path);
        if (!os) throw std::runtime_error("train: cannot write " + cfg.metrics_path);
        os << metrics_text.str();
    }
    if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, params, cfg.model);
    return {last, std::move(params)};
}

AuditReport audit_causality(const ModelConfig& cfg, std::size_t trials,
                            std::uint64_t seed, std::size_t seq_len, double tolerance) {
    if (trials == 0) throw std::invalid_argument("audit_causality: trials must be >= 1");
    Rng init_rng(seed);
    ModelParams params = init_model(cfg, init_rng);
    // Make every data-dependent path live: zero-initialized gate weights and
    // modulation MLPs would otherwise hide leaks (e.g. a gate computed over the
    // whole sequence has no effect while its weights are zero).
    Rng prng = init_rng.fork(0x61756469ULL);
    for (BlockParams& blk : params.blocks) {
        blk.energy_intensity.data[0] = 0.3;
        for (double& v : blk.periodicity.mlp_w1.data) v = 0.2 * prng.normal();
        for (double& v : blk.periodicity.mlp_w2.data) v = 0.2 * prng.normal();
        for (double& v : blk.gates.w_g.data) v = 0.1 * prng.normal();
        for (double& v : blk.gates.w_e.data) v = 0.1 * prng.normal();
        for (double& v : blk.gates.w_p.data) v = 0.1 * prng.normal();
    }
    AuditReport report;
    report.trials = trials;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = seed + 1 + trial;
        Rng rng(trial_seed);
        std::vector<int> tokens(seq_len);
        for (int& t : tokens)
            t = static_cast<int>(rng.next_below(cfg.vocab_size));
        // Perturb position t >= 1 and require rows < t unchanged.
        const std::size_t t = 1 + static_cast<std::size_t>(rng.next_below(seq_len - 1));
        std::vector<int> perturbed = tokens;
        perturbed[t] =
            (perturbed[t] + 1 + static_cast<int>(rng.next_below(cfg.vocab_size - 1))) %
            static_cast<int>(cfg.vocab_size);
        const TensorF base = model_forward(params, cfg, tokens);
        const TensorF poked = model_forward(params, cfg, perturbed);
        double dev = 0.0;
        for (std::size_t row = 0; row < t; ++row)
            for (std::size_t j = 0; j < cfg.vocab_size; ++j)
                dev = std::max(dev, std::abs(base.at(row, j) - poked.at(row, j)));
        report.max_deviation = std::max(report.max_deviation, dev);
        if (dev <= tolerance) ++report.passes;
        else if (!report.first_failure_seed) report.first_failure_seed = trial_seed;
    }
    return report;
}

namespace {
AuditReport audit_module_delay(std::size_t trials, std::uint64_t seed, std::size_t n,
                               std::size_t d, std::size_t chunk_size, double tolerance,
                               bool energy_path) {
    if (trials == 0) throw std::invalid_argument("delay audit: trials must be >= 1");
    AuditReport report;
    report.trials = trials;
    EnergyParams ep;
    ep.intensity = 0.7;
    PeriodicityParams pp = init_periodicity(d, 2 * d);
    Rng prng(seed ^ 0xabcdef12u);
    // Non-trivial MLP so the modulation actually depends on the spectrum.
    pp.mlp_w1 = prng.normal_tensor({d, 2 * d}, 0.3);
    pp.mlp_b1 = prng.normal_tensor({2 * d}, 0.1);
    pp.mlp_w2 = prng.normal_tensor({2 * d, d}, 0.3);
    pp.mlp_b2 = prng.normal_tensor({d}, 0.1);

    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = seed + 1 + trial;
        Rng rng(trial_seed);
        TensorF h = rng.normal_tensor({n, d}, 1.0);
        const std::size_t t = static_cast<std::size_t>(rng.next_below(n));
        TensorF poked = h;
        poked.at(t, rng.next_below(d)) += 1.0 + rng.uniform();

        const TensorF base = energy_path ? energy_encode(h, ep, chunk_size)
                                         : periodicity_encode(h, pp, chunk_size);
        const TensorF out = energy_path ? energy_encode(poked, ep, chunk_size)
                                        : periodicity_encode(poked, pp, chunk_size);
        const std::size_t chunk_of_t = t / chunk_size;
        double dev = 0.0;
        for (std::size_t row = 0; row < n; ++row) {
            if (row == t) continue;
            const std::size_t chunk_of_row = row / chunk_size;
            // Energy: a perturbation may act from chunk(t)+2 onward.
            // Periodicity: from chunk(t)+1 onward.
            const std::size_t first_affected =
                chunk_of_t + (energy_path ? 2 : 1);
            if (chunk_of_row >= first_affected) continue;
            for (std::size_t j = 0; j < d; ++j)
                dev = std::max(dev, std::abs(base.at(row, j) - out.at(row, j)));
        }
        report.max_deviation = std::max(report.max_deviation, dev);
        if (dev <= tolerance) ++report.passes;
        else if (!report.first_failure_seed) report.first_failure_seed = trial_seed;
    }
    return report;
}
}  // namespace

AuditReport audit_energy_delay(std::size_t trials, std::uint64_t seed, std::size_t n,
                               std::size_t d, std::size_t chunk_size, double tolerance) {
    return audit_module_delay(trials, seed, n, d, chunk_size, tolerance, true);
}

AuditReport audit_periodicity_delay(std::size_t trials, std::uint64_t seed, std::size_t n,
                                    std::size_t d, std::size_t chunk_size,
                                    double tolerance) {
    return audit_module_delay(trials, seed, n, d, chunk_size, tolerance, false);
}

GradCheckReport check_gradients(const ModelConfig& cfg, std::uint64_t seed,
                                std::size_t seq_len, double h) {
    Rng init_rng(seed);
    ModelParams params = init_model(cfg, init_rng);
    // Perturb the identity-at-init parameters so their gradient paths are live.
    Rng prng = init_rng.fork(0x67726164ULL);
    for (BlockParams& blk : params.blocks) {
        blk.energy_intensity.data[0] = 0.3;
        for (double& v : blk.periodicity.mlp_w1.data) v = 0.2 * prng.normal();
        for (double& v : blk.periodicity.mlp_w2.data) v = 0.2 * prng.normal();
        for (double& v : blk.gates.w_g.data) v = 0.1 * prng.normal();
        for (double& v : blk.gates.w_e.data) v = 0.1 * prng.normal();
        for (double& v : blk.gates.w_p.data) v = 0.1 * prng.normal();
    }
    Rng tok_rng(seed ^ 0x746f6b65u);
    std::vector<int> tokens(std::min(seq_len, cfg.n_max));
    for (int& t : tokens) t = static_cast<int>(tok_rng.next_below(cfg.vocab_size));

    std::vector<TensorF> grads;
    loss_and_gradients(params, cfg, tokens, {}, grads);

    std::vector<std::string> names;
    for_each_param(params, [&](const std::string& name, TensorF&) { names.push_back(name); });

    GradCheckReport report;
    std::size_t index = 0;
    for_each_param(params, [&](const std::string& name, TensorF& tensor) {
        const std::size_t i = index++;
        auto loss_fn = [&](const TensorF& probe) {
            TensorF saved = tensor;
            tensor = probe;
            const double loss = sequence_loss(params, cfg, tokens).loss;
            tensor = saved;
            return loss;
        };
        GradCheckEntry entry;
        entry.name = name;
        entry.max_rel_err = grad_check(loss_fn, grads[i], tensor, h);
        report.worst = std::max(report.worst, entry.max_rel_err);
        report.tensors.push_back(std::move(entry));
    });
    return report;
}

}  // namespace mppa
