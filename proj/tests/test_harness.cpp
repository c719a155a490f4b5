#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mppa/harness.hpp"

using namespace mppa;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::stringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

struct TempFiles {
    std::vector<std::string> paths;
    ~TempFiles() {
        for (const std::string& p : paths) std::remove(p.c_str());
    }
    const char* add(std::string p) {
        paths.push_back(std::move(p));
        return paths.back().c_str();
    }
};

RunConfig tiny_run(TempFiles& tmp, const std::string& tag) {
    DatasetConfig ds;
    ds.count = 12;
    const std::string train = "hrun_" + tag + "_train.txt";
    const std::string val = "hrun_" + tag + "_val.txt";
    generate_dataset(ds, 100, train);
    ds.count = 6;
    generate_dataset(ds, 200, val);
    tmp.add(train);
    tmp.add(train + ".manifest");
    tmp.add(val);
    tmp.add(val + ".manifest");

    RunConfig cfg;
    cfg.model.vocab_size = 64;
    cfg.model.d = 16;
    cfg.model.layers = 1;
    cfg.model.heads = 2;
    cfg.model.chunk_size = 8;
    cfg.model.n_max = 64;
    cfg.optimizer.steps = 4;
    cfg.optimizer.warmup_steps = 2;
    cfg.optimizer.batch_size = 2;
    cfg.optimizer.eval_interval = 2;
    cfg.optimizer.eval_max_sequences = 4;
    cfg.optimizer.eval_decode_sequences = 1;
    cfg.train_data = train;
    cfg.val_data = val;
    cfg.metrics_path = tmp.add("hrun_" + tag + "_metrics.txt");
    cfg.checkpoint_path = tmp.add("hrun_" + tag + "_model.ckpt");
    return cfg;
}
}  // namespace

TEST_CASE("config: sections and keys parse with strict validation") {
    const char* text =
        "# comment\n"
        "[model]\n"
        "d = 16\n"
        "layers = 1\n"
        "heads = 2\n"
        "gating = sequence_mean\n"
        "[optimizer]\n"
        "lr = 0.001\n"
        "steps = 7\n"
        "[data]\n"
        "train = a.txt\n"
        "val = b.txt\n"
        "[output]\n"
        "metrics = m.txt\n";
    const RunConfig cfg = parse_run_config(text);
    CHECK(cfg.model.d == 16);
    CHECK(cfg.model.layers == 1);
    CHECK(cfg.model.gating == GatingMode::kSequenceMean);
    CHECK(cfg.optimizer.lr == 0.001);
    CHECK(cfg.optimizer.steps == 7);
    CHECK(cfg.train_data == "a.txt");
    CHECK(cfg.metrics_path == "m.txt");

    CHECK_THROWS(parse_run_config("[model]\nnot_a_key = 3\n"));
    CHECK_THROWS(parse_run_config("[nonsense]\nd = 2\n"));
}

TEST_CASE("lr schedule: warmup rises linearly, cosine decays to the floor") {
    OptimizerConfig cfg;
    cfg.lr = 1.0;
    cfg.lr_min = 0.1;
    cfg.warmup_steps = 10;
    cfg.steps = 110;
    CHECK(lr_at(cfg, 0) < lr_at(cfg, 5));
    CHECK(lr_at(cfg, 5) == doctest::Approx(0.6).epsilon(1e-12));  // (5+1)/10 into warmup
    CHECK(lr_at(cfg, 10) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t s = 11; s < 110; ++s) CHECK(lr_at(cfg, s) <= lr_at(cfg, s - 1));
    CHECK(lr_at(cfg, 109) == doctest::Approx(0.1).epsilon(1e-3));
}

TEST_CASE("adamw: zero learning rate leaves parameters untouched") {
    OptimizerConfig cfg;
    cfg.lr = 0.0;
    cfg.lr_min = 0.0;
    cfg.warmup_steps = 0;
    AdamW opt(cfg);
    TensorF p({2, 2}, {1, 2, 3, 4});
    const TensorF before = p;
    std::vector<TensorF*> params = {&p};
    const std::vector<TensorF> grads = {TensorF({2, 2}, {1, 1, 1, 1})};
    opt.step(params, grads, 0);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == before[i]);
}

TEST_CASE("adamw: descends a simple quadratic") {
    OptimizerConfig cfg;
    cfg.lr = 0.1;
    cfg.lr_min = 0.1;
    cfg.warmup_steps = 0;
    cfg.steps = 200;
    cfg.weight_decay = 0.0;
    AdamW opt(cfg);
    TensorF p({1}, {5.0});
    std::vector<TensorF*> params = {&p};
    for (std::size_t s = 0; s < 200; ++s) {
        const std::vector<TensorF> grads = {TensorF({1}, {2.0 * p[0]})};
        opt.step(params, grads, s);
    }
    CHECK(std::abs(p[0]) < 0.05);
}

TEST_CASE("metrics: formatting is deterministic and self-describing") {
    MetricsRecord rec;
    rec.step = 3;
    rec.train_loss = 1.5;
    rec.val_loss = 2.0;
    rec.val_perplexity = std::exp(2.0);
    rec.per_kind_ppl["harmonic"] = 7.0;
    rec.ablation.energy = false;
    const std::string line = format_metrics(rec);
    CHECK(line.find("step=3") != std::string::npos);
    CHECK(line.find("train_loss=1.5") != std::string::npos);
    CHECK(line.find("ppl.harmonic=7") != std::string::npos);
    CHECK(line.find("energy=0") != std::string::npos);
    CHECK(line.find("gravitator=1") != std::string::npos);
    CHECK(line == format_metrics(rec));
}

TEST_CASE("train: two runs with the same seed write identical metrics bytes") {
    TempFiles tmp;
    RunConfig a = tiny_run(tmp, "det_a");
    RunConfig b = tiny_run(tmp, "det_b");
    train(a);
    train(b);
    CHECK(slurp(a.metrics_path) == slurp(b.metrics_path));
    CHECK(slurp(a.checkpoint_path) == slurp(b.checkpoint_path));
}

TEST_CASE("evaluate: untrained perplexity is near the vocabulary size") {
    TempFiles tmp;
    RunConfig cfg = tiny_run(tmp, "fresh");
    Rng rng(cfg.optimizer.seed);
    const ModelParams params = init_model(cfg.model, rng);
    const MetricsRecord rec = evaluate(params, cfg.model, cfg.val_data);
    CHECK(std::abs(rec.val_perplexity - static_cast<double>(cfg.model.vocab_size)) <
          0.05 * static_cast<double>(cfg.model.vocab_size));
    CHECK(rec.val_perplexity == doctest::Approx(std::exp(rec.val_loss)).epsilon(1e-12));
}

TEST_CASE("evaluate: per-kind losses aggregate to the overall loss") {
    TempFiles tmp;
    RunConfig cfg = tiny_run(tmp, "agg");
    Rng rng(9);
    const ModelParams params = init_model(cfg.model, rng);
    const MetricsRecord rec = evaluate(params, cfg.model, cfg.val_data);
    // token-weighted mean of per-kind mean NLLs must reproduce the overall NLL
    const auto data = load_dataset(cfg.val_data);
    const DatasetMeta meta = load_manifest(cfg.val_data + ".manifest");
    std::map<std::string, std::size_t> kind_tokens;
    std::size_t total_tokens = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        kind_tokens[kind_name(meta.systems[i].kind)] += data[i].size() - 1;
        total_tokens += data[i].size() - 1;
    }
    double weighted = 0.0;
    for (const auto& [kind, ppl] : rec.per_kind_ppl)
        weighted += std::log(ppl) * static_cast<double>(kind_tokens.at(kind));
    weighted /= static_cast<double>(total_tokens);
    CHECK(std::abs(weighted - rec.val_loss) < 1e-9);
}

TEST_CASE("ablate: exactly four rows and a bit-identical baseline") {
    TempFiles tmp;
    RunConfig cfg = tiny_run(tmp, "abl");
    Rng rng(11);
    const ModelParams params = init_model(cfg.model, rng);
    const auto rows = ablate(params, cfg.model, cfg.val_data);
    REQUIRE(rows.size() == 4);
    const MetricsRecord plain = evaluate(params, cfg.model, cfg.val_data);
    CHECK(rows[0].val_loss == plain.val_loss);
    CHECK(rows[0].val_perplexity == plain.val_perplexity);
    CHECK(rows[0].ablation.gravitator);
    CHECK(!rows[1].ablation.gravitator);
    CHECK(!rows[2].ablation.energy);
    CHECK(!rows[3].ablation.periodicity);
    const std::string table = format_ablation_table(rows);
    CHECK(table.find("no_gravitator") != std::string::npos);
    CHECK(table.find("delta_vs_full") != std::string::npos);
}

TEST_CASE("audit: causal gating passes, sequence-mean gating is caught") {
    ModelConfig cfg;
    cfg.vocab_size = 16;
    cfg.d = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.chunk_size = 4;
    cfg.n_max = 32;
    const AuditReport causal = audit_causality(cfg, 10, 7, 24);
    CHECK(causal.ok());
    CHECK(causal.max_deviation == 0.0);

    ModelConfig leaky = cfg;
    leaky.gating = GatingMode::kSequenceMean;
    const AuditReport seq = audit_causality(leaky, 10, 7, 24);
    CHECK(!seq.ok());
    CHECK(seq.first_failure_seed.has_value());
}

TEST_CASE("audit: single-chunk inputs trivially pass") {
    ModelConfig cfg;
    cfg.vocab_size = 16;
    cfg.d = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.chunk_size = 8;
    cfg.n_max = 8;
    const AuditReport rep = audit_causality(cfg, 10, 3, 8);
    CHECK(rep.ok());
}

TEST_CASE("audit: module delay windows hold on random hidden states") {
    const AuditReport energy = audit_energy_delay(10, 5, 40, 6, 8);
    CHECK(energy.ok());
    const AuditReport periodicity = audit_periodicity_delay(10, 5, 40, 6, 8);
    CHECK(periodicity.ok());
}

TEST_CASE("gradcheck: toy full model and attention-only baseline pass") {
    ModelConfig cfg;
    cfg.vocab_size = 12;
    cfg.d = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.chunk_size = 4;
    cfg.n_max = 16;
    const GradCheckReport full = check_gradients(cfg, 5, 12);
    CHECK(full.ok());

    ModelConfig baseline = cfg;
    baseline.enable_energy = false;
    baseline.enable_periodicity = false;
    const GradCheckReport attn = check_gradients(baseline, 5, 12);
    CHECK(attn.ok());
}

TEST_CASE("train: one step at lr=0 leaves the initial parameters in place") {
    TempFiles tmp;
    RunConfig cfg = tiny_run(tmp, "lr0");
    cfg.optimizer.lr = 0.0;
    cfg.optimizer.lr_min = 0.0;
    cfg.optimizer.warmup_steps = 0;
    cfg.optimizer.steps = 1;
    cfg.optimizer.weight_decay = 0.0;
    const TrainResult result = train(cfg);
    Rng rng(cfg.optimizer.seed);
    const ModelParams fresh = init_model(cfg.model, rng);
    std::vector<const TensorF*> a, b;
    for_each_param(static_cast<const ModelParams&>(result.params),
                   [&](const std::string&, const TensorF& t) { a.push_back(&t); });
    for_each_param(static_cast<const ModelParams&>(fresh),
                   [&](const std::string&, const TensorF& t) { b.push_back(&t); });
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i]->size(); ++j)
            CHECK((*a[i])[j] == (*b[i])[j]);
}
