#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include <json.hpp>

#include "test_util.hpp"
#include "wsig/errors.hpp"
#include "wsig/experiment.hpp"
#include "wsig/fnn.hpp"
#include "wsig/io.hpp"

using namespace wsig;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wsig_test_" + name);
    fs::remove_all(p);
    return p;
}

ExperimentConfig tiny(ModelId model, TargetId target, const fs::path& out) {
    ExperimentConfig c;
    c.n_paths = 30;
    c.grid_size = 12;
    c.sig_level = 3;
    c.fnn_neurons = 3;
    c.fnn_width = 4;
    c.learning_rate = 1e-3;
    c.batch_size = 8;
    c.epochs = 6;
    c.test_period = 3;
    c.model = model;
    c.target = target;
    c.out_dir = out;
    return c;
}

json without_runtime(const fs::path& metrics) {
    auto j = json::parse(io::read_text_file(metrics));
    j.erase("runtime_seconds");
    return j;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + WSIG_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Targets, WorkedExamples) {
    const auto x = DiscretePath::equidistant(1.0, {0.0, 1.0, 0.5}, 1);
    EXPECT_EQ(target_running_max(0, x), 0.0);
    EXPECT_EQ(target_running_max(1, x), 1.0);
    EXPECT_EQ(target_running_max(2, x), 1.0);

    const auto neg = DiscretePath::equidistant(1.0, std::vector<double>(5, -1.0), 1);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(target_clipped_average(k, neg), -0.3);

    // x(t) = t: left sum (1/t_k) Σ_{j<k} Δt t_j = (t_k - Δt)/2.
    std::vector<double> v(11);
    for (std::size_t j = 0; j < 11; ++j) v[j] = 0.1 * static_cast<double>(j);
    const auto lin = DiscretePath::equidistant(1.0, v, 1);
    for (std::size_t k = 1; k < 11; ++k) {
        EXPECT_NEAR(target_clipped_average(k, lin), (lin.time(k) - 0.1) / 2.0, 1e-14);
    }
    EXPECT_EQ(target_clipped_average(0, lin), 0.0);
}

TEST(Targets, Properties) {
    std::mt19937_64 gen(51);
    for (int rep = 0; rep < 30; ++rep) {
        const auto x = wsig::testing::random_walk(gen, 40, 1);
        double prev = -1e300;
        for (std::size_t k = 0; k < 40; ++k) {
            const double f1 = target_running_max(k, x);
            EXPECT_GE(f1, prev);
            EXPECT_GE(f1, x.value(k, 0));
            prev = f1;
            EXPECT_GE(target_clipped_average(k, x), -0.3);
        }
    }
}

TEST(Split, IsDisjointExhaustiveAndSeeded) {
    const auto s = split_indices(103, 7);
    EXPECT_EQ(s.train.size(), 82u);
    EXPECT_EQ(s.test.size(), 21u);
    std::set<std::size_t> seen(s.train.begin(), s.train.end());
    for (auto i : s.test) EXPECT_TRUE(seen.insert(i).second);
    EXPECT_EQ(seen.size(), 103u);
    EXPECT_EQ(*seen.rbegin(), 102u);
    EXPECT_EQ(s.train, split_indices(103, 7).train);
    EXPECT_NE(s.train, split_indices(103, 8).train);
    EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
}

TEST(Config, JsonRoundTripAndOverlay) {
    ExperimentConfig c;
    c.n_paths = 123;
    c.seed = 0xFFFFFFFFFFFFull;
    c.weight.beta = 0.02;
    c.learning_rate = 3e-4;
    c.target = TargetId::f2;
    c.model = ModelId::sig;
    c.out_dir = "somewhere";
    const auto r = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(r.to_json(), c.to_json());
    EXPECT_EQ(r.seed, c.seed);
    EXPECT_EQ(r.weight.beta, 0.02);

    const auto o = ExperimentConfig::from_json("{\"epochs\": 5}", c);
    EXPECT_EQ(o.epochs, 5u);
    EXPECT_EQ(o.n_paths, 123u);
    EXPECT_THROW(ExperimentConfig::from_json("{\"epoch\": 5}"), DomainError);
    EXPECT_EQ(ExperimentConfig::full_scale().n_paths, 50000u);

    ExperimentConfig bad;
    bad.batch_size = 0;
    EXPECT_THROW(bad.validate(), DomainError);
    EXPECT_EQ(target_from_string("f2"), TargetId::f2);
    EXPECT_THROW(model_from_string("lstm"), DomainError);
}

class RunBundle : public ::testing::TestWithParam<ModelId> {};

TEST_P(RunBundle, ArtifactsAreConsistent) {
    const auto out = scratch(std::string("bundle_") + to_string(GetParam()));
    const auto cfg = tiny(GetParam(), TargetId::f2, out);
    const auto m = run_experiment(cfg);
    ASSERT_TRUE(m.ok) << m.error;
    for (const char* f : {"config.json", "paths.csv", "split.json", "loss_curve.csv", "model.json",
                          "predictions.csv", "metrics.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    // Metrics recompute from the prediction table.
    const auto pred = io::read_csv(out / "predictions.csv");
    ASSERT_EQ(pred.rows.size(), 30u * 12u);
    const auto split = split_indices(30, 0);
    const PathBatch paths = load_paths_csv(out / "paths.csv");
    auto w = cfg.resolved_weight();
    std::vector<double> row_sq(pred.rows.size());
    for (std::size_t r = 0; r < pred.rows.size(); ++r) {
        const auto& row = pred.rows[r];
        const std::size_t s = std::stoul(row[pred.column("sample")]);
        const std::size_t k = std::stoul(row[pred.column("k")]);
        const double wt = io::parse_double(row[pred.column("weight")]);
        const double y = io::parse_double(row[pred.column("target")]);
        EXPECT_EQ(y, target_clipped_average(k, paths.paths[s]));
        if (k == 0) {
            const SignatureStream st = signature_stream(time_augment(paths.paths[s]), w.lift_level());
            const double expect = GetParam() == ModelId::fnn ? weight_of(paths.paths[s], w)
                                                             : weight_of(paths.paths[s], w, &st);
            EXPECT_NEAR(wt, expect, 1e-15 * expect);
        }
        const double e = (y - io::parse_double(row[pred.column("prediction")])) / wt;
        row_sq[r] = e * e;
    }
    auto mean_over = [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto m_idx : idx) {
            for (std::size_t k = 0; k < 12; ++k) s += row_sq[m_idx * 12 + k];
        }
        return s / static_cast<double>(idx.size() * 12);
    };
    EXPECT_NEAR(*m.final_train_wmse, mean_over(split.train), 1e-10 * mean_over(split.train));
    EXPECT_NEAR(*m.final_test_wmse, mean_over(split.test), 1e-10 * mean_over(split.test));

    const auto j = json::parse(io::read_text_file(out / "split.json"));
    EXPECT_EQ(j["train"].get<std::vector<std::size_t>>(), split.train);
    const auto curve = io::read_csv(out / "loss_curve.csv");
    EXPECT_EQ(curve.rows.size(), 6u);

    // Same config, same bytes (apart from the wall clock).
    const auto again = scratch(std::string("bundle_again_") + to_string(GetParam()));
    auto cfg2 = cfg;
    cfg2.out_dir = again;
    run_experiment(cfg2);
    EXPECT_EQ(without_runtime(out / "metrics.json"), without_runtime(again / "metrics.json"));
    EXPECT_EQ(io::read_text_file(out / "model.json"), io::read_text_file(again / "model.json"));
    EXPECT_EQ(io::read_text_file(out / "predictions.csv"), io::read_text_file(again / "predictions.csv"));

    // Re-evaluation of the stored model reproduces the test metric.
    const auto ev = evaluate_bundle(out);
    EXPECT_EQ(ev.n_paths, split.test.size());
    EXPECT_NEAR(ev.wmse, *m.final_test_wmse, 1e-10 * *m.final_test_wmse);
    EXPECT_NEAR(ev.baseline_wmse, m.baseline_test_wmse, 1e-12 * m.baseline_test_wmse);
    fs::remove_all(out);
    fs::remove_all(again);
}

TEST_P(RunBundle, ZeroEpochsKeepsInitialization) {
    const auto out = scratch(std::string("zero_") + to_string(GetParam()));
    auto cfg = tiny(GetParam(), TargetId::f1, out);
    cfg.epochs = 0;
    const auto m = run_experiment(cfg);
    ASSERT_TRUE(m.ok);
    EXPECT_FALSE(m.final_train_wmse.has_value());
    const auto j = json::parse(io::read_text_file(out / "metrics.json"));
    EXPECT_FALSE(j.contains("final_train_wmse"));
    EXPECT_TRUE(j.contains("initial_train_wmse"));
    if (GetParam() == ModelId::fnn) {
        const auto init = FnnParams::initialize(3, 4, 1, true, derive_seed(0, 2));
        EXPECT_EQ(io::read_text_file(out / "model.json"), init.to_json(cfg.resolved_weight()));
    } else {
        EXPECT_EQ(m.initial_train_wmse, m.baseline_train_wmse);
    }
    fs::remove_all(out);
}

INSTANTIATE_TEST_SUITE_P(Models, RunBundle, ::testing::Values(ModelId::fnn, ModelId::sig),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(RunExperiment, DivergenceIsReportedNotThrown) {
    const auto out = scratch("diverge");
    auto cfg = tiny(ModelId::sig, TargetId::f1, out);
    cfg.learning_rate = 1e300;
    const auto m = run_experiment(cfg);
    EXPECT_FALSE(m.ok);
    ASSERT_TRUE(m.failed_epoch.has_value());
    const auto j = json::parse(io::read_text_file(out / "metrics.json"));
    EXPECT_EQ(j["status"], "diverged");
    fs::remove_all(out);
}

TEST(Figures, RowCountsSamplesAndDeterminism) {
    const auto a = scratch("fig_fnn");
    const auto b = scratch("fig_sig");
    run_experiment(tiny(ModelId::fnn, TargetId::f1, a));
    run_experiment(tiny(ModelId::sig, TargetId::f1, b));
    const auto out = scratch("fig_out");
    emit_figure_data({a, b}, out);
    const auto fa = io::read_csv(out / "figure_a.csv");
    EXPECT_EQ(fa.header, (std::vector<std::string>{"model", "series", "epoch", "loss"}));
    EXPECT_EQ(fa.rows.size(), 2u * (6 + 6 / 3));
    const auto fb = io::read_csv(out / "figure_b.csv");
    EXPECT_EQ(fb.header.back(), "prediction_sig");
    std::set<std::string> samples;
    for (const auto& r : fb.rows) samples.insert(r[0]);
    EXPECT_EQ(samples.size(), 3u);
    EXPECT_EQ(fb.rows.size(), 3u * 12u);

    const auto out2 = scratch("fig_out2");
    emit_figure_data({a, b}, out2);
    EXPECT_EQ(io::read_text_file(out / "figure_a.csv"), io::read_text_file(out2 / "figure_a.csv"));
    EXPECT_EQ(io::read_text_file(out / "figure_b.csv"), io::read_text_file(out2 / "figure_b.csv"));

    const auto c = scratch("fig_other");
    run_experiment(tiny(ModelId::fnn, TargetId::f2, c));
    EXPECT_THROW(emit_figure_data({a, c}, scratch("fig_bad")), DomainError);
    for (const auto& p : {a, b, c, out, out2}) fs::remove_all(p);
}

TEST(Gp, RunWritesArtifacts) {
    const auto out = scratch("gp");
    GpRunConfig g;
    g.data.n_paths = 25;
    g.data.grid_size = 15;
    g.data.out_dir = out;
    g.kernel = KernelSpec::constant(3);
    g.prior_samples = 4;
    const auto s = run_gp(g);
    EXPECT_GE(s.test_mse, 0.0);
    for (const char* f : {"kernel.json", "gram.csv", "posterior.csv", "split.json", "gp_metrics.json",
                          "prior_samples.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    EXPECT_EQ(io::read_csv(out / "gram.csv").rows.size(), 20u);
    EXPECT_EQ(io::read_csv(out / "posterior.csv").rows.size(), 5u);
    fs::remove_all(out);
}

TEST(PathGram, MethodsAgreeForUnitCoefficients) {
    auto x = sample_bm(3, 120, 1.0, 1);
    auto y = sample_bm(2, 100, 1.0, 2);
    for (auto* b : {&x, &y}) {
        for (auto& p : b->paths) {
            std::vector<double> v(p.values().begin(), p.values().end());
            for (auto& e : v) e *= 0.2;
            p = DiscretePath(std::vector<double>(p.times().begin(), p.times().end()), std::move(v), 1);
        }
    }
    const auto t = path_gram(x, y, KernelSpec::constant(12), KernelMethod::truncated, true);
    const auto g = path_gram(x, y, KernelSpec::constant(12), KernelMethod::goursat, true);
    ASSERT_EQ(t.rows(), 3);
    ASSERT_EQ(t.cols(), 2);
    EXPECT_LT(((t - g).array().abs() / t.array().abs()).maxCoeff(), 1e-5);
    KernelSpec half = KernelSpec::constant(2, 0.5);
    EXPECT_THROW(path_gram(x, y, half, KernelMethod::goursat, true), DomainError);
    EXPECT_EQ(kernel_method_from_string("goursat"), KernelMethod::goursat);
}

TEST(Cli, ExitCodes) {
    const auto out = scratch("cli");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("bogus-subcommand"), 2);
    EXPECT_EQ(run_cli("train --epochs notanumber"), 2);
    EXPECT_EQ(run_cli("train --config /nonexistent/cfg.json"), 2);
    EXPECT_EQ(run_cli("train -M 10 -K 8 --epochs 2 --batch-size 0 -o " + out.string()), 2);
    EXPECT_EQ(run_cli("train -M 20 -K 8 --epochs 2 --test-period 1 --fnn-neurons 2 --fnn-width 3 -o " +
                      out.string()),
              0);
    EXPECT_TRUE(fs::exists(out / "metrics.json"));
    EXPECT_EQ(run_cli("evaluate --bundle " + out.string()), 0);
    EXPECT_EQ(run_cli("evaluate --bundle " + (out / "missing").string()), 2);
    EXPECT_EQ(run_cli("train --model sig --sig-level 2 -M 20 -K 8 --epochs 3 --lr 1e300 -o " +
                      (out / "div").string()),
              1);

    // A config file supplies values; flags override it.
    const auto cfg = out / "cfg.json";
    io::write_text_file(cfg, "{\"n_paths\": 15, \"grid_size\": 6, \"epochs\": 1, \"model\": \"sig\", \"sig_level\": 2}");
    EXPECT_EQ(run_cli("train --config " + cfg.string() + " --epochs 2 -o " + (out / "c").string()), 0);
    const auto written = ExperimentConfig::from_json(io::read_text_file(out / "c" / "config.json"));
    EXPECT_EQ(written.n_paths, 15u);
    EXPECT_EQ(written.epochs, 2u);
    EXPECT_EQ(written.model, ModelId::sig);
    fs::remove_all(out);
}
