#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsig/adam.hpp"
#include "wsig/weighted_paths.hpp"

namespace wsig {

/// One-hidden-layer ReLU network R -> R used as a density in time:
/// φ(t) = Σ_h v_h ReLU(w_h t + u_h) + v0.
struct InnerNet {
    std::vector<double> w;
    std::vector<double> u;
    std::vector<double> v;
    double v0 = 0.0;

    std::size_t width() const noexcept { return w.size(); }
    double operator()(double t) const;
};

/// Non-anticipative functional input network
///   φ(t_k, x) = Σ_n y_n ReLU(a_n t_k + Σ_i ∫_0^{t_k} φ_{n,i}(s) x_i(s) ds + [Σ_i c_{n,i} x_i(t_k)] + b_n)
/// with the integral taken as a left Riemann sum over grid indices j < k.
struct FnnParams {
    std::size_t input_dim = 1;
    bool use_spatial = false;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;  // neurons × input_dim, zero-length when !use_spatial
    std::vector<double> y;
    std::vector<InnerNet> inner;  // neurons × input_dim, inner[n * input_dim + i]

    std::size_t neurons() const noexcept { return a.size(); }
    std::size_t parameter_count() const;

    /// Fixed order: a, b, c, y, then each inner net as w, u, v, v0.
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    /// Human readable path of a flat index, e.g. "inner[3][0].w[7]".
    std::string parameter_name(std::size_t flat_index) const;

    /// Same shape, all zero.
    FnnParams zeros_like() const;

    void validate() const;

    /// a, b, c ~ U(-1,1); y ~ U(-s,s), s = 1/sqrt(neurons); inner input
    /// weights and biases ~ U(-1,1), inner output weights and bias
    /// ~ U(-1/sqrt(width), 1/sqrt(width)).
    static FnnParams initialize(std::size_t neurons, std::size_t inner_width, std::size_t input_dim,
                                bool use_spatial, std::uint64_t seed);

    std::string to_json(const std::optional<WeightSpec>& weight = std::nullopt) const;
    static FnnParams from_json(const std::string& text);
};

using FnnGradient = FnnParams;

/// Single evaluation at grid index k.
double fnn_forward(const FnnParams& theta, std::size_t k, const DiscretePath& x);

/// Predictions at every grid index of x; entry k equals fnn_forward(θ, k, x).
std::vector<double> fnn_predict_path(const FnnParams& theta, const DiscretePath& x);

/// (1/(M K)) Σ_m Σ_k ((f_{m,k} - φ(t_k, x_m)) / ψ_m)². `targets` is M×K
/// row-major; the batch must carry cached weights.
double weighted_mse(const FnnParams& theta, const PathBatch& batch, std::span<const double> targets);
double weighted_mse(const FnnParams& theta, const PathBatch& batch, const PathFunctional& target);

struct FnnLossGrad {
    double loss = 0.0;
    FnnGradient grad;
};

/// Weighted MSE over the paths `indices` of `batch` and its exact gradient.
/// ReLU'(0) = 0. Throws NumericError naming the first non-finite entry.
FnnLossGrad fnn_grad(const FnnParams& theta, const PathBatch& batch, std::span<const double> targets,
                     std::span<const std::size_t> indices);

struct FnnTrainResult {
    FnnParams params;
    LossCurve curve;
};

/// Adam over epoch-wise shuffled minibatches of paths. The test set is only
/// evaluated, never differentiated. Throws TrainingError on a non-finite loss.
FnnTrainResult train_fnn(const TrainConfig& config, FnnParams init, const PathBatch& train,
                         std::span<const double> train_targets, const PathBatch* test = nullptr,
                         std::span<const double> test_targets = {});

}  // namespace wsig
