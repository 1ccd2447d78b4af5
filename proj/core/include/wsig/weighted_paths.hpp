#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "wsig/signature.hpp"

namespace wsig {

enum class NormKind {
    /// r = ‖x(0)‖ + α-Hölder seminorm of the raw path (FNN loss).
    holder_path,
    /// r = (p,α)-norm of the time-augmented lifted path (signature loss).
    cc_pvar_alpha,
};

const char* to_string(NormKind k);
NormKind norm_kind_from_string(const std::string& s);

/// Admissible weight ψ(x) = exp(β r(x)^γ) with r one of the path norms above.
struct WeightSpec {
    double alpha = 0.4;
    double p = 2.1;
    double beta = 0.01;
    double gamma = 3.0;
    NormKind norm_kind = NormKind::holder_path;

    /// Throws DomainError on a violated invariant.
    void validate() const;

    /// Truncation level of the lift used for the (p,α)-norm: ⌊p⌋, the level
    /// at which a p-variation rough path lives.
    std::size_t lift_level() const;
};

/// M paths on one shared grid, with an optional per-path weight cache.
struct PathBatch {
    std::vector<DiscretePath> paths;
    std::vector<double> weights;

    std::size_t size() const noexcept { return paths.size(); }
    std::size_t grid_size() const { return paths.front().size(); }
    std::size_t dim() const { return paths.front().dim(); }
    std::span<const double> times() const { return paths.front().times(); }
    bool has_weights() const noexcept { return weights.size() == paths.size() && !paths.empty(); }

    /// Throws unless every path shares the first path's grid and dimension
    /// and cached weights (if any) are strictly positive.
    void validate() const;

    PathBatch subset(std::span<const std::size_t> indices) const;
};

/// M Brownian paths of dimension `dim` on an equidistant K-point grid over
/// [0, T]. Path m draws its increments from std::mt19937_64 seeded through
/// std::seed_seq{seed_lo, seed_hi, m_lo, m_hi}, transformed by
/// std::normal_distribution, so each path depends only on (seed, m).
PathBatch sample_bm(std::size_t n_paths, std::size_t k_points, double horizon, std::uint64_t seed,
                    std::size_t dim = 1);

/// Grid-restricted α-Hölder seminorm max_{j<k} ‖x_k - x_j‖ / (t_k - t_j)^α.
double holder_seminorm(const DiscretePath& x, double alpha);

/// Grid-restricted p-variation (max over grid partitions Σ‖Δx‖^p)^{1/p}.
double p_variation(const DiscretePath& x, double p);

/// ψ as a function of the already evaluated norm r.
double weight_from_norm(double r, const WeightSpec& w);

/// The norm r(x) entering the weight. For cc_pvar_alpha, `stream` must be
/// the signature stream of the time-augmented path at level >= lift_level().
double weight_norm(const DiscretePath& x, const WeightSpec& w, const SignatureStream* stream = nullptr);

double weight_of(const DiscretePath& x, const WeightSpec& w, const SignatureStream* stream = nullptr);

/// Fills batch.weights. For cc_pvar_alpha the lift is computed here at
/// lift_level() unless streams are supplied.
void cache_weights(PathBatch& batch, const WeightSpec& w,
                   const std::vector<SignatureStream>* streams = nullptr);

/// A non-anticipative path functional f(t_k, x) evaluated at grid index k.
using PathFunctional = std::function<double(std::size_t k, const DiscretePath& x)>;

/// Target table (M×K row-major) of `f` on every path and grid index.
std::vector<double> evaluate_targets(const PathBatch& batch, const PathFunctional& f);

/// CSV with header `sample,t,x1,...,xd`, one row per (sample, grid point).
void save_paths_csv(const PathBatch& batch, const std::filesystem::path& path);
PathBatch load_paths_csv(const std::filesystem::path& path);

}  // namespace wsig
