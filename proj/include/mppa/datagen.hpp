#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mppa/rng.hpp"

namespace mppa {

enum class SystemKind { kHarmonic, kDamped, kVanDerPol, kLorenz };

std::string kind_name(SystemKind kind);
SystemKind kind_from_name(const std::string& name);

struct SystemSpec {
    SystemKind kind = SystemKind::kHarmonic;
    // harmonic/damped: omega (and gamma for damped); van_der_pol: mu;
    // lorenz: sigma/rho/beta.
    double omega = 1.0;
    double gamma = 0.0;
    double mu = 1.0;
    double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
    std::vector<double> initial_state;  // dimension per kind (2 or 3)
    double dt = 1e-3;
    std::size_t steps = 1000;

    std::size_t state_dim() const { return kind == SystemKind::kLorenz ? 3 : 2; }
    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // one state vector per step
};

// Classical 4th-order Runge-Kutta at fixed dt.
Trajectory simulate(const SystemSpec& spec);

// max_t |E(t) - E(0)| / max(|E(0)|, eps) with the kind's mechanical energy
// (0.5*v^2 + 0.5*omega^2*x^2). Lorenz has no defined energy -> error.
double energy_conservation_error(const Trajectory& traj, const SystemSpec& spec);
double mechanical_energy(double x, double v, double omega);

struct TokenizerSpec {
    double value_min = -4.0;
    double value_max = 4.0;
    std::size_t bins = 62;
    std::size_t seq_len = 64;  // output length incl. BOS, padded/truncated

    std::size_t bos_token() const { return bins; }
    std::size_t sep_token() const { return bins + 1; }
    std::size_t vocab_size() const { return bins + 2; }
    void validate() const;
};

// Clip each channel value to [min,max], quantize to a bin index, interleave
// channels per step, prepend BOS, pad with SEP to seq_len.
std::vector<int> tokenize(const Trajectory& traj, const TokenizerSpec& tok);

// Inverse map: bin index -> bin center. BOS/SEP end the decode.
std::vector<std::vector<double>> detokenize(const std::vector<int>& tokens,
                                            const TokenizerSpec& tok,
                                            std::size_t channels);

struct DatasetConfig {
    std::size_t count = 100;
    std::vector<SystemKind> kinds = {SystemKind::kHarmonic, SystemKind::kDamped};
    TokenizerSpec tokenizer;
    double dt = 0.05;
    std::size_t sim_steps = 256;
};

// Writes <out_path> (one line of space-separated token ids per sequence) and
// <out_path>.manifest (key/value text incl. per-sequence system metadata).
// Byte-identical output for identical (config, seed).
void generate_dataset(const DatasetConfig& cfg, std::uint64_t seed,
                      const std::string& out_path);

SystemSpec sample_system(SystemKind kind, Rng& rng, double dt, std::size_t steps);

struct DatasetMeta {
    std::uint64_t seed = 0;
    TokenizerSpec tokenizer;
    std::vector<SystemSpec> systems;  // per sequence
};

std::vector<std::vector<int>> load_dataset(const std::string& path);
DatasetMeta load_manifest(const std::string& path);

}  // namespace mppa
