// wsig command line: data generation, training, evaluation, kernels, GP and figure data.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsig/errors.hpp"
#include "wsig/experiment.hpp"
#include "wsig/io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kNumeric = 1;
constexpr int kConfig = 2;

/// Flags mirroring ExperimentConfig. Only flags given on the command line
/// override the JSON config file.
struct ExperimentFlags {
    std::string config_file;
    bool full_scale = false;
    std::optional<std::size_t> n_paths, grid_size, sig_level, fnn_neurons, fnn_width, batch_size, epochs,
        test_period;
    std::optional<double> horizon, alpha, p, beta, gamma, lr;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> target, model, out, paths_file;

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "JSON file supplying any of the options below")
            ->check(CLI::ExistingFile);
        app.add_flag("--full-scale", full_scale, "Start from the full-size profile (50000 paths)");
        app.add_option("--n-paths,-M", n_paths, "Number of sample paths");
        app.add_option("--grid-size,-K", grid_size, "Grid points per path");
        app.add_option("--horizon,-T", horizon, "Time horizon");
        app.add_option("--seed", seed, "Run seed (64-bit unsigned)");
        app.add_option("--alpha", alpha, "Hoelder exponent of the weight norm");
        app.add_option("--p", p, "Variation exponent of the weight norm");
        app.add_option("--beta", beta, "Weight scale");
        app.add_option("--gamma", gamma, "Weight exponent");
        app.add_option("--sig-level", sig_level, "Signature truncation level");
        app.add_option("--fnn-neurons", fnn_neurons, "Hidden neurons of the functional input network");
        app.add_option("--fnn-width", fnn_width, "Hidden width of each inner network");
        app.add_option("--lr", lr, "Adam learning rate");
        app.add_option("--batch-size", batch_size, "Minibatch size in paths");
        app.add_option("--epochs", epochs, "Training epochs");
        app.add_option("--test-period", test_period, "Evaluate the test loss every this many epochs");
        app.add_option("--target", target, "f1 (running maximum) or f2 (clipped running average)");
        app.add_option("--model", model, "fnn or sig");
        app.add_option("--out,-o", out, "Output directory");
        app.add_option("--paths-file", paths_file, "Paths CSV to use instead of sampling");
    }

    wsig::ExperimentConfig resolve(const wsig::ExperimentConfig& defaults) const {
        wsig::ExperimentConfig c = defaults;
        if (full_scale) c.n_paths = wsig::ExperimentConfig::full_scale().n_paths;
        if (!config_file.empty()) c = wsig::ExperimentConfig::from_json(wsig::io::read_text_file(config_file), c);
        if (n_paths) c.n_paths = *n_paths;
        if (grid_size) c.grid_size = *grid_size;
        if (horizon) c.horizon = *horizon;
        if (seed) c.seed = *seed;
        if (alpha) c.weight.alpha = *alpha;
        if (p) c.weight.p = *p;
        if (beta) c.weight.beta = *beta;
        if (gamma) c.weight.gamma = *gamma;
        if (sig_level) c.sig_level = *sig_level;
        if (fnn_neurons) c.fnn_neurons = *fnn_neurons;
        if (fnn_width) c.fnn_width = *fnn_width;
        if (lr) c.learning_rate = *lr;
        if (batch_size) c.batch_size = *batch_size;
        if (epochs) c.epochs = *epochs;
        if (test_period) c.test_period = *test_period;
        if (target) c.target = wsig::target_from_string(*target);
        if (model) c.model = wsig::model_from_string(*model);
        if (out) c.out_dir = *out;
        if (paths_file) c.paths_file = *paths_file;
        c.validate();
        return c;
    }
};

struct KernelFlags {
    std::string kernel_file;
    std::optional<std::size_t> level;
    std::optional<double> coeff;
    std::optional<double> noise;

    void attach(CLI::App& app) {
        app.add_option("--kernel-config", kernel_file, "KernelSpec JSON (coefficients, level, M, delta, noise)")
            ->check(CLI::ExistingFile);
        app.add_option("--level", level, "Truncation level for constant coefficients");
        app.add_option("--coeff", coeff, "Constant level coefficient a_k");
        app.add_option("--noise", noise, "Observation noise variance");
    }

    wsig::KernelSpec resolve(std::size_t default_level) const {
        wsig::KernelSpec k = kernel_file.empty() ? wsig::KernelSpec::constant(default_level)
                                                 : wsig::KernelSpec::from_json(wsig::io::read_text_file(kernel_file));
        if (level || coeff) {
            if (!kernel_file.empty()) throw wsig::DomainError("--level/--coeff conflict with --kernel-config");
            const double noise_keep = k.noise;
            k = wsig::KernelSpec::constant(level.value_or(default_level), coeff.value_or(1.0));
            k.noise = noise_keep;
        }
        if (noise) k.noise = *noise;
        k.validate();
        return k;
    }
};

void print_metrics(const fs::path& dir) { std::cout << wsig::io::read_text_file(dir / "metrics.json") << '\n'; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted signature and functional input network experiments"};
    app.require_subcommand(1);

    ExperimentFlags gen_flags, train_flags, gp_flags;
    KernelFlags kernel_flags, gp_kernel_flags;

    auto* gen = app.add_subcommand("generate", "Sample Brownian paths and write paths.csv");
    gen_flags.attach(*gen);

    auto* train = app.add_subcommand("train", "Run one experiment and write its artifact bundle");
    train_flags.attach(*train);

    std::string eval_bundle, eval_paths;
    auto* evaluate = app.add_subcommand("evaluate", "Weighted MSE of a trained bundle");
    evaluate->add_option("--bundle", eval_bundle, "Experiment output directory")->required();
    evaluate->add_option("--paths-file", eval_paths, "Evaluate on these paths instead of the bundle's test split");

    std::string kernel_x, kernel_y, kernel_out = "gram.csv", kernel_method = "truncated";
    bool no_time = false;
    auto* kernel = app.add_subcommand("kernel", "Signature kernel Gram matrix between path sets");
    kernel->add_option("--paths-file", kernel_x, "Paths CSV")->required();
    kernel->add_option("--other", kernel_y, "Second paths CSV (default: the first)");
    kernel->add_option("--method", kernel_method, "truncated or goursat");
    kernel->add_flag("--no-time-augment", no_time, "Use the raw paths instead of (t, x)");
    kernel->add_option("--out,-o", kernel_out, "Output CSV");
    kernel_flags.attach(*kernel);

    std::size_t prior_samples = 0;
    auto* gp = app.add_subcommand("gp", "GP regression of the terminal target on signatures");
    gp_flags.attach(*gp);
    gp_kernel_flags.attach(*gp);
    gp->add_option("--prior-samples", prior_samples, "Also draw this many prior samples at all paths");

    std::vector<std::string> fig_bundles;
    std::string fig_out;
    auto* figures = app.add_subcommand("figures", "Emit figure_a.csv and figure_b.csv from bundles");
    figures->add_option("--bundle", fig_bundles, "Experiment output directories (same data)")->required();
    figures->add_option("--out,-o", fig_out, "Output directory (default: the first bundle)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*gen) {
            const auto cfg = gen_flags.resolve({});
            const auto batch = wsig::generate_paths(cfg);
            std::error_code ec;
            fs::create_directories(cfg.out_dir, ec);
            if (ec) throw wsig::IoError("cannot create directory '" + cfg.out_dir.string() + "'");
            wsig::save_paths_csv(batch, cfg.out_dir / "paths.csv");
            wsig::io::write_text_file(cfg.out_dir / "config.json", cfg.to_json());
            std::cout << "wrote " << (cfg.out_dir / "paths.csv").string() << '\n';
        } else if (*train) {
            const auto cfg = train_flags.resolve({});
            const auto m = wsig::run_experiment(cfg);
            print_metrics(cfg.out_dir);
            if (!m.ok) {
                std::cerr << "training failed: " << m.error << '\n';
                return kNumeric;
            }
        } else if (*evaluate) {
            const auto e = wsig::evaluate_bundle(eval_bundle, eval_paths);
            nlohmann::json j{{"n_paths", e.n_paths}, {"wmse", e.wmse}, {"baseline_wmse", e.baseline_wmse}};
            std::cout << j.dump(2) << '\n';
        } else if (*kernel) {
            const auto spec = kernel_flags.resolve(4);
            const auto x = wsig::load_paths_csv(kernel_x);
            const auto y = kernel_y.empty() ? x : wsig::load_paths_csv(kernel_y);
            const auto g = wsig::path_gram(x, y, spec, wsig::kernel_method_from_string(kernel_method), !no_time);
            wsig::io::write_text_file(kernel_out, wsig::matrix_to_csv(g));
            std::cout << "wrote " << kernel_out << '\n';
        } else if (*gp) {
            wsig::ExperimentConfig defaults;
            defaults.n_paths = 200;
            defaults.out_dir = "gp_run";
            wsig::GpRunConfig cfg{gp_flags.resolve(defaults), gp_kernel_flags.resolve(4), prior_samples};
            const auto s = wsig::run_gp(cfg);
            std::cout << wsig::io::read_text_file(cfg.data.out_dir / "gp_metrics.json") << '\n';
            (void)s;
        } else if (*figures) {
            std::vector<fs::path> bundles(fig_bundles.begin(), fig_bundles.end());
            const fs::path out = fig_out.empty() ? bundles.front() : fs::path(fig_out);
            wsig::emit_figure_data(bundles, out);
            std::cout << "wrote " << (out / "figure_a.csv").string() << " and figure_b.csv\n";
        }
    } catch (const wsig::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    } catch (const wsig::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kOk;
}
