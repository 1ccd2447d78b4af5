#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsig/sig_regression.hpp"
#include "wsig/signature.hpp"
#include "wsig/tensor_algebra.hpp"

namespace wsig {

/// Level coefficients a_0..a_N of the signature kernel
/// k(X,Y) = Σ_{|I| <= N} a_{|I|}² <e_I, S(X)> <e_I, S(Y)>.
struct KernelSpec {
    std::vector<double> level_coeffs{1.0};
    /// Growth bound a_k <= M (k!)^δ, enforced by validate() when enabled.
    double growth_m = 1.0;
    double growth_delta = 0.0;
    bool check_growth = true;
    /// Observation noise σ² used by GP regression.
    double noise = 1e-6;

    std::size_t level() const noexcept { return level_coeffs.size() - 1; }
    void validate() const;

    static KernelSpec constant(std::size_t level, double a = 1.0);

    std::string to_json() const;
    static KernelSpec from_json(const std::string& text);
};

double truncated_kernel(const TruncatedTensor& sx, const TruncatedTensor& sy, const KernelSpec& spec);

/// Untruncated signature kernel <S(x), S(y)> of two piecewise-linear paths by
/// the Goursat PDE ∂²K/∂s∂t = <x'(s), y'(t)> K with K(0,·) = K(·,0) = 1,
/// stepped cell by cell with the second-order explicit scheme
///   K11 = (K10 + K01)(1 + c/2 + c²/12) - K00 (1 - c²/12),  c = <Δx_i, Δy_j>,
/// on the given grid and on its midpoint refinement, combined as (4 K_fine - K)/3.
double goursat_kernel(const DiscretePath& x, const DiscretePath& y);

/// Terminal signatures as one-row-per-path features (row weights 1).
FeatureMatrix terminal_features(const std::vector<TruncatedTensor>& signatures, std::size_t level);

/// Gram matrix X D Yᵀ with D = diag(a_{|I|}²).
Eigen::MatrixXd kernel_gram(const KernelSpec& spec, const FeatureMatrix& x, const FeatureMatrix& y);

/// Draws of the random series Σ_I a_{|I|} Z_I <e_I, ·> at the rows of
/// `points`; column s is sample s, with Z for sample s drawn from
/// std::mt19937_64 seeded by std::seed_seq{seed_lo, seed_hi, s_lo, s_hi}.
Eigen::MatrixXd gp_sample_prior(const KernelSpec& spec, const FeatureMatrix& points, std::size_t n_samples,
                                std::uint64_t seed);

struct GpPrediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

class GpPosterior {
public:
    /// Factorizes K + σ² I; on failure retries with jitter 1e-12, 1e-10, 1e-8
    /// times the mean diagonal, then throws NumericError.
    GpPosterior(KernelSpec spec, FeatureMatrix train, const Eigen::VectorXd& targets, double noise);

    GpPrediction predict(const FeatureMatrix& test) const;

    double noise() const noexcept { return noise_; }
    double jitter() const noexcept { return jitter_; }
    const Eigen::VectorXd& dual_weights() const noexcept { return dual_; }

private:
    KernelSpec spec_;
    FeatureMatrix train_;
    double noise_;
    double jitter_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd dual_;
};

GpPrediction gp_fit_predict(const FeatureMatrix& train, const Eigen::VectorXd& targets, const KernelSpec& spec,
                            double noise, const FeatureMatrix& test);

/// Matrix CSV, header `index,c0,...,c{cols-1}`.
std::string matrix_to_csv(const Eigen::MatrixXd& m);
/// `index,mean,variance[,target]`.
std::string posterior_to_csv(const GpPrediction& p, const Eigen::VectorXd* targets = nullptr);

}  // namespace wsig
