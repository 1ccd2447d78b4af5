#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsig/errors.hpp"

namespace wsig {

/// Adam with bias-corrected moments.
struct AdamState {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;

    AdamState() = default;
    AdamState(std::size_t n_params, double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8)
        : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps),
          first_moment(n_params, 0.0), second_moment(n_params, 0.0) {}

    void update(std::span<double> params, std::span<const double> grad) {
        if (params.size() != first_moment.size() || grad.size() != first_moment.size()) {
            throw DimensionError("adam: parameter/gradient size does not match optimizer state");
        }
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.size(); ++i) {
            first_moment[i] = beta1 * first_moment[i] + (1.0 - beta1) * grad[i];
            second_moment[i] = beta2 * second_moment[i] + (1.0 - beta2) * grad[i] * grad[i];
            const double m_hat = first_moment[i] / bc1;
            const double v_hat = second_moment[i] / bc2;
            params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
        }
    }
};

/// Minibatch optimizer settings shared by both model families.
struct TrainConfig {
    std::size_t epochs = 4000;
    double learning_rate = 1e-5;
    std::size_t batch_size = 500;
    /// Test loss is evaluated after every `test_period`-th epoch (0: never).
    std::size_t test_period = 200;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-epoch training loss (mean of the minibatch losses seen during the
/// epoch, each taken before its update) and periodic test loss.
struct LossCurve {
    std::vector<double> train_loss;
    std::vector<std::size_t> test_epochs;
    std::vector<double> test_loss;

    /// `epoch,train_loss,test_loss`; test_loss is empty on epochs without a
    /// test evaluation. Epochs are numbered from 1.
    std::string to_csv() const;
};

}  // namespace wsig
