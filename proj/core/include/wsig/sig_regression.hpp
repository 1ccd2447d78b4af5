#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsig/adam.hpp"
#include "wsig/signature.hpp"
#include "wsig/weighted_paths.hpp"

namespace wsig {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Signature coordinates <e_I, S^(m)_k> with rows ordered (sample, grid index)
/// and columns ordered as the level-major word layout of TruncatedTensor.
struct FeatureMatrix {
    std::size_t alphabet = 0;
    std::size_t level = 0;
    std::size_t rows_per_sample = 0;
    RowMatrix values;
    /// 1/ψ of the sample each row belongs to.
    Eigen::VectorXd row_weights;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    std::size_t samples() const { return rows_per_sample == 0 ? 0 : rows() / rows_per_sample; }

    /// Rows of the given samples, in order.
    FeatureMatrix select_samples(std::span<const std::size_t> samples) const;
};

/// Builds the feature table from per-sample streams (level >= `level`).
/// `path_weights` holds ψ per sample; empty means ψ ≡ 1.
FeatureMatrix sig_features(const std::vector<SignatureStream>& streams, std::size_t level,
                           std::span<const double> path_weights = {});

/// ℓ(S) = Σ_{|I| <= N} a_I <e_I, S>.
struct SigLinearModel {
    std::size_t alphabet = 0;
    std::size_t level = 0;
    Eigen::VectorXd coeffs;

    static SigLinearModel zeros(std::size_t alphabet, std::size_t level);

    /// {"type":"sig","alphabet":m,"level":N,"coefficients":{"<word digits>":a_I},"weight":{...}}
    std::string to_json(const std::optional<WeightSpec>& weight = std::nullopt) const;
    static SigLinearModel from_json(const std::string& text);
};

Eigen::VectorXd predict_sig(const SigLinearModel& model, const FeatureMatrix& features);

/// (1/n) Σ_r (row_weight_r (target_r - prediction_r))².
double sig_weighted_mse(const SigLinearModel& model, const FeatureMatrix& features,
                        std::span<const double> targets);

/// Gradient of sig_weighted_mse over the given samples (all rows of each).
Eigen::VectorXd sig_gradient(const SigLinearModel& model, const FeatureMatrix& features,
                             std::span<const double> targets, std::span<const std::size_t> samples,
                             double* loss_out = nullptr);

struct SigTrainResult {
    SigLinearModel model;
    LossCurve curve;
};

/// Adam on the weighted MSE, minibatches of whole samples, zero initial
/// coefficients unless `init` is given.
SigTrainResult fit_sig_sgd(const FeatureMatrix& features, std::span<const double> targets,
                           const TrainConfig& config, const FeatureMatrix* test = nullptr,
                           std::span<const double> test_targets = {},
                           const SigLinearModel* init = nullptr);

/// Minimizes (1/n) Σ w²(f - Fa)² + λ‖a‖² through the normal equations and a
/// Cholesky factorization. At λ = 0 a failed factorization is retried once
/// with λ = 1e-10·trace/dim before throwing NumericError.
SigLinearModel fit_sig_ridge(const FeatureMatrix& features, std::span<const double> targets, double lambda);

}  // namespace wsig
