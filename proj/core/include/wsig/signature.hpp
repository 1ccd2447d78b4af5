#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wsig/tensor_algebra.hpp"

namespace wsig {

/// A path sampled at K grid times, interpreted as piecewise linear in between.
/// Values are stored row-major: K rows of `dim()` coordinates.
class DiscretePath {
public:
    DiscretePath(std::vector<double> times, std::vector<double> values, std::size_t dim);

    /// Equidistant grid on [0, horizon] with `values.size() / dim` points.
    static DiscretePath equidistant(double horizon, std::vector<double> values, std::size_t dim);

    std::size_t size() const noexcept { return times_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    double horizon() const noexcept { return times_.back(); }

    std::span<const double> times() const noexcept { return times_; }
    double time(std::size_t k) const { return times_[k]; }
    std::span<const double> point(std::size_t k) const {
        return std::span<const double>(values_).subspan(k * dim_, dim_);
    }
    std::span<double> point(std::size_t k) { return std::span<double>(values_).subspan(k * dim_, dim_); }
    double value(std::size_t k, std::size_t i) const { return values_[k * dim_ + i]; }
    std::span<const double> values() const noexcept { return values_; }

    /// True when grid spacing is uniform to 1e-12 relative tolerance.
    bool is_equidistant() const;

    /// Grid points first..last (inclusive), times shifted to start at 0.
    DiscretePath slice(std::size_t first, std::size_t last) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    std::size_t dim_;
};

/// Prefix signatures S_k of a path on [0, t_k] for every grid index k.
struct SignatureStream {
    std::size_t level = 0;
    std::vector<double> times;
    std::vector<TruncatedTensor> terms;

    std::size_t size() const noexcept { return terms.size(); }
    std::size_t alphabet() const { return terms.front().alphabet(); }
    const TruncatedTensor& operator[](std::size_t k) const { return terms[k]; }
    const TruncatedTensor& terminal() const { return terms.back(); }
};

/// (t, x(t)): prepends time as coordinate 0.
DiscretePath time_augment(const DiscretePath& x);

/// Truncated signature of the piecewise-linear interpolation,
/// exp(Δ_1) ⊗ ... ⊗ exp(Δ_{K-1}).
TruncatedTensor signature(const DiscretePath& x, std::size_t level);

/// S_0 = 1, S_k = S_{k-1} ⊗ exp(Δ_k).
SignatureStream signature_stream(const DiscretePath& x, std::size_t level);

/// Pairwise grid distances d(j,k) = homogeneous_norm(S_j^{-1} ⊗ S_k), stored
/// as a dense K×K row-major matrix (upper triangle filled, lower mirrored).
std::vector<double> stream_distances(const SignatureStream& s);

/// Grid-restricted (p,α)-norm of the lifted path:
///   sup_{j<k} d(j,k)/(t_k - t_j)^α + (max over grid partitions Σ d^p)^{1/p}.
double pvar_alpha_norm(const SignatureStream& s, double p, double alpha);

/// Maximal Σ dist(t_i, t_{i+1})^p over partitions of {0..K-1} containing both
/// endpoints; `dist` is a dense K×K row-major matrix. Returns the sum, not its
/// p-th root.
double max_partition_power_sum(std::span<const double> dist, std::size_t k_points, double p);

}  // namespace wsig
