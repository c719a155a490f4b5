#include "mppa/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace mppa {

void OptimizerConfig::validate() const {
    if (steps == 0) throw std::invalid_argument("optimizer: steps must be >= 1");
    if (lr < 0.0) throw std::invalid_argument("optimizer: learning rate must be >= 0");
    if (batch_size == 0) throw std::invalid_argument("optimizer: batch_size must be >= 1");
}

double lr_at(const OptimizerConfig& cfg, std::size_t step) {
    if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
        return cfg.lr * static_cast<double>(step + 1) /
               static_cast<double>(cfg.warmup_steps);
    const std::size_t decay_steps =
        cfg.steps > cfg.warmup_steps ? cfg.steps - cfg.warmup_steps : 1;
    const double progress = std::min(
        1.0, static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(decay_steps));
    const double cosine = 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
    return cfg.lr_min + (cfg.lr - cfg.lr_min) * cosine;
}

void AdamW::step(std::vector<TensorF*>& params, const std::vector<TensorF>& grads,
                 std::size_t step_index) {
    if (params.size() != grads.size())
        throw std::invalid_argument("AdamW::step: param/grad count mismatch");
    if (m_.empty()) {
        for (TensorF* p : params) {
            m_.emplace_back(p->shape);
            v_.emplace_back(p->shape);
        }
    }
    const double lr = lr_at(cfg_, step_index);
    const double t = static_cast<double>(step_index + 1);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        TensorF& p = *params[i];
        const TensorF& g = grads[i];
        require_same_shape(p, g, "AdamW::step");
        for (std::size_t j = 0; j < p.size(); ++j) {
            m_[i].data[j] = cfg_.beta1 * m_[i].data[j] + (1.0 - cfg_.beta1) * g.data[j];
            v_[i].data[j] =
                cfg_.beta2 * v_[i].data[j] + (1.0 - cfg_.beta2) * g.data[j] * g.data[j];
            const double mhat = m_[i].data[j] / bc1;
            const double vhat = v_[i].data[j] / bc2;
            p.data[j] -= lr * (mhat / (std::sqrt(vhat) + cfg_.adam_eps) +
                               cfg_.weight_decay * p.data[j]);
        }
    }
}

}  // namespace mppa
