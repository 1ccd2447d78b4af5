#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsig/sig_kernel.hpp"
#include "wsig/weighted_paths.hpp"

namespace wsig {

enum class TargetId { f1, f2 };
enum class ModelId { fnn, sig };

const char* to_string(TargetId t);
const char* to_string(ModelId m);
TargetId target_from_string(const std::string& s);
ModelId model_from_string(const std::string& s);

/// Everything a run depends on. Defaults are the desk-scale profile; the
/// full-size data set is `n_paths = 50000` (see full_scale()).
struct ExperimentConfig {
    std::size_t n_paths = 2000;
    std::size_t grid_size = 100;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    /// alpha, p, beta, gamma; the norm kind is implied by the model.
    WeightSpec weight;
    std::size_t sig_level = 7;
    std::size_t fnn_neurons = 40;
    std::size_t fnn_width = 30;
    double learning_rate = 1e-5;
    std::size_t batch_size = 500;
    std::size_t epochs = 4000;
    std::size_t test_period = 200;
    TargetId target = TargetId::f1;
    ModelId model = ModelId::fnn;
    std::filesystem::path out_dir = "run";
    /// Optional paths CSV (from `generate`) used instead of sampling.
    std::filesystem::path paths_file;

    static ExperimentConfig full_scale();

    /// Throws DomainError on an invalid field.
    void validate() const;

    /// Weight spec with the norm kind used by `model`.
    WeightSpec resolved_weight() const;

    std::string to_json() const;
    /// Overlays the keys present in `text` on `base`; unknown keys are rejected.
    static ExperimentConfig from_json(const std::string& text, const ExperimentConfig& base);
    static ExperimentConfig from_json(const std::string& text);
};

/// f1(t_k, x) = max_{j<=k} x(t_j).
double target_running_max(std::size_t k, const DiscretePath& x);

/// f2(t_k, x) = max((1/t_k) Σ_{j<k} Δt_j x(t_j), -0.3); at k = 0 the
/// continuity limit max(x(0), -0.3).
double target_clipped_average(std::size_t k, const DiscretePath& x);

PathFunctional target_functional(TargetId t);

/// Independent stream seed derived from the run seed and a tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag);

struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1; the first ⌊0.8 n⌋ entries are training.
DataSplit split_indices(std::size_t n, std::uint64_t seed);

struct ExperimentMetrics {
    bool ok = true;
    std::string error;
    std::optional<std::size_t> failed_epoch;
    std::size_t epochs_completed = 0;
    double initial_train_wmse = 0.0;
    double initial_test_wmse = 0.0;
    std::optional<double> final_train_wmse;
    std::optional<double> final_test_wmse;
    double baseline_train_wmse = 0.0;
    double baseline_test_wmse = 0.0;
    double runtime_seconds = 0.0;

    std::string to_json(const ExperimentConfig& cfg, std::size_t n_train, std::size_t n_test) const;
};

/// Generates (or loads) data, trains the configured model and writes the
/// bundle: config.json, paths.csv, split.json, loss_curve.csv, model.json,
/// predictions.csv, metrics.json. A training divergence is recorded in
/// metrics.json (ok = false) and returned rather than thrown.
ExperimentMetrics run_experiment(const ExperimentConfig& cfg);

/// Samples the configured Brownian paths and writes them as CSV.
PathBatch generate_paths(const ExperimentConfig& cfg);

struct Evaluation {
    std::size_t n_paths = 0;
    double wmse = 0.0;
    double baseline_wmse = 0.0;
};

/// Re-evaluates a bundle's model on `paths_file` (or on the bundle's own test
/// split when empty) and returns the weighted MSE against the configured target.
Evaluation evaluate_bundle(const std::filesystem::path& bundle, const std::filesystem::path& paths_file = {});

/// figure_a.csv (model,series,epoch,loss) and figure_b.csv
/// (sample,k,t,path,target,prediction_<model>...) for three fixed test samples,
/// from one or more bundles built on the same data.
void emit_figure_data(const std::vector<std::filesystem::path>& bundles, const std::filesystem::path& out_dir);

enum class KernelMethod { truncated, goursat };
KernelMethod kernel_method_from_string(const std::string& s);

/// Gram matrix between two path sets, optionally time-augmenting both.
/// `goursat` requires a ≡ 1 (it solves for the untruncated kernel).
Eigen::MatrixXd path_gram(const PathBatch& x, const PathBatch& y, const KernelSpec& spec, KernelMethod method,
                          bool augment_time);

struct GpRunConfig {
    ExperimentConfig data;
    KernelSpec kernel = KernelSpec::constant(4);
    std::size_t prior_samples = 0;
};

struct GpRunSummary {
    double test_mse = 0.0;
    double mean_variance = 0.0;
    double jitter = 0.0;
};

/// GP regression of the terminal target f(T, x) on terminal signatures of the
/// time-augmented paths, with the experiment's split. Writes kernel.json,
/// gram.csv, posterior.csv, gp_metrics.json and, if requested, prior_samples.csv.
GpRunSummary run_gp(const GpRunConfig& cfg);

}  // namespace wsig
