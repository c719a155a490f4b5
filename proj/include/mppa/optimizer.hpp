#pragma once

#include <cstdint>
#include <vector>

#include "mppa/tensor.hpp"

namespace mppa {

struct OptimizerConfig {
    double lr = 3e-3;
    double lr_min = 1e-5;  // cosine decay floor
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.01;
    std::size_t warmup_steps = 50;
    std::size_t steps = 500;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    std::size_t eval_interval = 100;
    std::size_t eval_max_sequences = 64;
    std::size_t eval_decode_sequences = 4;

    void validate() const;
};

// Linear warmup to lr, then cosine decay to lr_min. step is 0-based.
double lr_at(const OptimizerConfig& cfg, std::size_t step);

// Decoupled-weight-decay Adam over a flat list of parameter tensors.
class AdamW {
 public:
    explicit AdamW(const OptimizerConfig& cfg) : cfg_(cfg) {}

    // params[i] and grads[i] must keep the same shapes across calls.
    void step(std::vector<TensorF*>& params, const std::vector<TensorF>& grads,
              std::size_t step_index);

 private:
    OptimizerConfig cfg_;
    std::vector<TensorF> m_, v_;
};

}  // namespace mppa
