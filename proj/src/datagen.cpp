#include "mppa/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mppa {

std::string kind_name(SystemKind kind) {
    switch (kind) {
        case SystemKind::kHarmonic: return "harmonic";
        case SystemKind::kDamped: return "damped";
        case SystemKind::kVanDerPol: return "van_der_pol";
        case SystemKind::kLorenz: return "lorenz";
    }
    throw std::logic_error("kind_name: bad kind");
}

SystemKind kind_from_name(const std::string& name) {
    if (name == "harmonic") return SystemKind::kHarmonic;
    if (name == "damped") return SystemKind::kDamped;
    if (name == "van_der_pol") return SystemKind::kVanDerPol;
    if (name == "lorenz") return SystemKind::kLorenz;
    throw std::invalid_argument("unknown system kind '" + name + "'");
}

void SystemSpec::validate() const {
    if (dt <= 0.0) throw std::invalid_argument("system spec: dt must be > 0");
    if (steps < 2) throw std::invalid_argument("system spec: steps must be >= 2");
    if (initial_state.size() != state_dim())
        throw std::invalid_argument("system spec: initial state must have dimension " +
                                    std::to_string(state_dim()));
    if (kind == SystemKind::kHarmonic || kind == SystemKind::kDamped) {
        if (omega <= 0.0 || omega > 50.0)
            throw std::invalid_argument("system spec: omega out of stable range");
        if (gamma < 0.0 || gamma > 10.0)
            throw std::invalid_argument("system spec: gamma out of stable range");
    }
    if (kind == SystemKind::kVanDerPol && (mu <= 0.0 || mu > 10.0))
        throw std::invalid_argument("system spec: mu out of stable range");
    if (kind == SystemKind::kLorenz && (sigma <= 0.0 || rho <= 0.0 || beta <= 0.0))
        throw std::invalid_argument("system spec: lorenz parameters must be positive");
}

namespace {
void derivative(const SystemSpec& spec, const std::vector<double>& s,
                std::vector<double>& ds) {
    switch (spec.kind) {
        case SystemKind::kHarmonic:
            ds[0] = s[1];
            ds[1] = -spec.omega * spec.omega * s[0];
            break;
        case SystemKind::kDamped:
            ds[0] = s[1];
            ds[1] = -spec.omega * spec.omega * s[0] - spec.gamma * s[1];
            break;
        case SystemKind::kVanDerPol:
            ds[0] = s[1];
            ds[1] = spec.mu * (1.0 - s[0] * s[0]) * s[1] - s[0];
            break;
        case SystemKind::kLorenz:
            ds[0] = spec.sigma * (s[1] - s[0]);
            ds[1] = s[0] * (spec.rho - s[2]) - s[1];
            ds[2] = s[0] * s[1] - spec.beta * s[2];
            break;
    }
}
}  // namespace

Trajectory simulate(const SystemSpec& spec) {
    spec.validate();
    const std::size_t dim = spec.state_dim();
    Trajectory traj;
    std::vector<double> s = spec.initial_state;
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    traj.times.push_back(0.0);
    traj.states.push_back(s);
    for (std::size_t step = 1; step <= spec.steps; ++step) {
        derivative(spec, s, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * spec.dt * k1[i];
        derivative(spec, tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * spec.dt * k2[i];
        derivative(spec, tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = s[i] + spec.dt * k3[i];
        derivative(spec, tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            s[i] += spec.dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        for (double v : s)
            if (!std::isfinite(v))
                throw std::runtime_error("simulate: state blew up at step " +
                                         std::to_string(step));
        traj.times.push_back(static_cast<double>(step) * spec.dt);
        traj.states.push_back(s);
    }
    return traj;
}

double mechanical_energy(double x, double v, double omega) {
    return 0.5 * v * v + 0.5 * omega * omega * x * x;
}

double energy_conservation_error(const Trajectory& traj, const SystemSpec& spec) {
    if (spec.kind == SystemKind::kLorenz)
        throw std::invalid_argument(
            "energy_conservation_error: lorenz has no defined energy function");
    if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
    const double e0 =
        mechanical_energy(traj.states[0][0], traj.states[0][1], spec.omega);
    const double denom = std::max(std::abs(e0), 1e-12);
    double worst = 0.0;
    for (const auto& s : traj.states) {
        const double e = mechanical_energy(s[0], s[1], spec.omega);
        worst = std::max(worst, std::abs(e - e0) / denom);
    }
    return worst;
}

void TokenizerSpec::validate() const {
    if (bins < 2) throw std::invalid_argument("tokenizer: bins must be >= 2");
    if (!(value_min < value_max))
        throw std::invalid_argument("tokenizer: value_min must be < value_max");
    if (seq_len < 2) throw std::invalid_argument("tokenizer: seq_len must be >= 2");
}

std::vector<int> tokenize(const Trajectory& traj, const TokenizerSpec& tok) {
    tok.validate();
    std::vector<int> tokens;
    tokens.push_back(static_cast<int>(tok.bos_token()));
    const double span = tok.value_max - tok.value_min;
    for (const auto& state : traj.states) {
        for (double v : state) {
            double clipped = std::min(std::max(v, tok.value_min), tok.value_max);
            auto idx = static_cast<std::size_t>(
                std::floor(static_cast<double>(tok.bins) * (clipped - tok.value_min) / span));
            if (idx >= tok.bins) idx = tok.bins - 1;  // top edge
            tokens.push_back(static_cast<int>(idx));
            if (tokens.size() == tok.seq_len) return tokens;
        }
    }
    while (tokens.size() < tok.seq_len)
        tokens.push_back(static_cast<int>(tok.sep_token()));
    return tokens;
}

std::vector<std::vector<double>> detokenize(const std::vector<int>& tokens,
                                            const TokenizerSpec& tok,
                                            std::size_t channels) {
    const double width = (tok.value_max - tok.value_min) / static_cast<double>(tok.bins);
    std::vector<double> values;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const int t = tokens[i];
        if (i == 0 && t == static_cast<int>(tok.bos_token())) continue;
        if (t < 0 || t >= static_cast<int>(tok.bins)) break;  // SEP or reserved ends decode
        values.push_back(tok.value_min + (static_cast<double>(t) + 0.5) * width);
    }
    std::vector<std::vector<double>> states;
    for (std::size_t i = 0; i + channels <= values.size(); i += channels)
        states.emplace_back(values.begin() + static_cast<long>(i),
                            values.begin() + static_cast<long>(i + channels));
    return states;
}

SystemSpec sample_system(SystemKind kind, Rng& rng, double dt, std::size_t steps) {
    SystemSpec spec;
    spec.kind = kind;
    spec.dt = dt;
    spec.steps = steps;
    switch (kind) {
        case SystemKind::kHarmonic:
            spec.omega = rng.uniform(0.5, 2.0);
            spec.initial_state = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
            break;
        case SystemKind::kDamped:
            spec.omega = rng.uniform(0.5, 2.0);
            spec.gamma = rng.uniform(0.05, 0.5);
            spec.initial_state = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
            break;
        case SystemKind::kVanDerPol:
            spec.mu = rng.uniform(0.5, 2.0);
            spec.initial_state = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            break;
        case SystemKind::kLorenz:
            spec.initial_state = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                                  rng.uniform(10.0, 30.0)};
            break;
    }
    return spec;
}

namespace {
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void generate_dataset(const DatasetConfig& cfg, std::uint64_t seed,
                      const std::string& out_path) {
    cfg.tokenizer.validate();
    if (cfg.kinds.empty()) throw std::invalid_argument("generate_dataset: no kinds");
    Rng base(seed);
    std::ofstream data(out_path);
    if (!data) throw std::runtime_error("generate_dataset: cannot write " + out_path);
    const std::string manifest_path = out_path + ".manifest";
    std::ofstream manifest(manifest_path);
    if (!manifest)
        throw std::runtime_error("generate_dataset: cannot write " + manifest_path);

    std::map<std::string, std::size_t> tally;
    std::ostringstream per_seq;
    for (std::size_t i = 0; i < cfg.count; ++i) {
        Rng rng = base.fork(i);
        const SystemKind kind = cfg.kinds[i % cfg.kinds.size()];
        const SystemSpec spec = sample_system(kind, rng, cfg.dt, cfg.sim_steps);
        const Trajectory traj = simulate(spec);
        const std::vector<int> tokens = tokenize(traj, cfg.tokenizer);
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (t) data << ' ';
            data << tokens[t];
        }
        data << '\n';
        ++tally[kind_name(kind)];
        const std::string pre = "seq" + std::to_string(i) + ".";
        per_seq << pre << "kind = " << kind_name(kind) << "\n";
        per_seq << pre << "params = " << fmt_double(spec.omega) << ' '
                << fmt_double(spec.gamma) << ' ' << fmt_double(spec.mu) << ' '
                << fmt_double(spec.sigma) << ' ' << fmt_double(spec.rho) << ' '
                << fmt_double(spec.beta) << "\n";
        per_seq << pre << "init =";
        for (double v : spec.initial_state) per_seq << ' ' << fmt_double(v);
        per_seq << "\n";
    }

    manifest << "seed = " << seed << "\n";
    manifest << "count = " << cfg.count << "\n";
    manifest << "seq_len = " << cfg.tokenizer.seq_len << "\n";
    manifest << "bins = " << cfg.tokenizer.bins << "\n";
    manifest << "value_min = " << fmt_double(cfg.tokenizer.value_min) << "\n";
    manifest << "value_max = " << fmt_double(cfg.tokenizer.value_max) << "\n";
    manifest << "dt = " << fmt_double(cfg.dt) << "\n";
    manifest << "sim_steps = " << cfg.sim_steps << "\n";
    manifest << "kinds =";
    for (SystemKind k : cfg.kinds) manifest << ' ' << kind_name(k);
    manifest << "\n";
    for (const auto& [name, n] : tally) manifest << "tally." << name << " = " << n << "\n";
    manifest << per_seq.str();
    if (!data || !manifest)
        throw std::runtime_error("generate_dataset: write failure for " + out_path);
}

std::vector<std::vector<int>> load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    std::vector<std::vector<int>> sequences;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<int> tokens;
        int t;
        while (ls >> t) tokens.push_back(t);
        sequences.push_back(std::move(tokens));
    }
    return sequences;
}

DatasetMeta load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_manifest: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    DatasetMeta meta;
    meta.seed = std::stoull(kv.at("seed"));
    meta.tokenizer.seq_len = std::stoul(kv.at("seq_len"));
    meta.tokenizer.bins = std::stoul(kv.at("bins"));
    meta.tokenizer.value_min = std::stod(kv.at("value_min"));
    meta.tokenizer.value_max = std::stod(kv.at("value_max"));
    const double dt = std::stod(kv.at("dt"));
    const std::size_t sim_steps = std::stoul(kv.at("sim_steps"));
    const std::size_t count = std::stoul(kv.at("count"));
    for (std::size_t i = 0; i < count; ++i) {
        const std::string pre = "seq" + std::to_string(i) + ".";
        SystemSpec spec;
        spec.kind = kind_from_name(kv.at(pre + "kind"));
        spec.dt = dt;
        spec.steps = sim_steps;
        std::istringstream ps(kv.at(pre + "params"));
        ps >> spec.omega >> spec.gamma >> spec.mu >> spec.sigma >> spec.rho >> spec.beta;
        std::istringstream ini(kv.at(pre + "init"));
        double v;
        while (ini >> v) spec.initial_state.push_back(v);
        meta.systems.push_back(std::move(spec));
    }
    return meta;
}

}  // namespace mppa
