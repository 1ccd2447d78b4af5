#include "wsig/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "wsig/errors.hpp"
#include "wsig/fnn.hpp"
#include "wsig/io.hpp"
#include "wsig/sig_regression.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wsig {

const char* to_string(TargetId t) { return t == TargetId::f1 ? "f1" : "f2"; }
const char* to_string(ModelId m) { return m == ModelId::fnn ? "fnn" : "sig"; }

TargetId target_from_string(const std::string& s) {
    if (s == "f1") return TargetId::f1;
    if (s == "f2") return TargetId::f2;
    throw DomainError("unknown target '" + s + "' (expected f1 or f2)");
}

ModelId model_from_string(const std::string& s) {
    if (s == "fnn") return ModelId::fnn;
    if (s == "sig") return ModelId::sig;
    throw DomainError("unknown model '" + s + "' (expected fnn or sig)");
}

ExperimentConfig ExperimentConfig::full_scale() {
    ExperimentConfig c;
    c.n_paths = 50000;
    return c;
}

void ExperimentConfig::validate() const {
    if (paths_file.empty()) {
        if (n_paths < 2) throw DomainError("config: n_paths must be >= 2");
        if (grid_size < 2) throw DomainError("config: grid_size must be >= 2");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("config: horizon must be > 0");
    }
    weight.validate();
    if (sig_level < 1) throw DomainError("config: sig_level must be >= 1");
    if (fnn_neurons < 1 || fnn_width < 1) throw DomainError("config: fnn sizes must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw DomainError("config: learning rate must be finite and >= 0");
    }
    if (batch_size < 1) throw DomainError("config: batch_size must be >= 1");
    if (out_dir.empty()) throw DomainError("config: output directory is empty");
}

WeightSpec ExperimentConfig::resolved_weight() const {
    WeightSpec w = weight;
    w.norm_kind = model == ModelId::fnn ? NormKind::holder_path : NormKind::cc_pvar_alpha;
    return w;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["n_paths"] = n_paths;
    j["grid_size"] = grid_size;
    j["horizon"] = horizon;
    j["seed"] = seed;
    j["alpha"] = weight.alpha;
    j["p"] = weight.p;
    j["beta"] = weight.beta;
    j["gamma"] = weight.gamma;
    j["norm_kind"] = wsig::to_string(resolved_weight().norm_kind);
    j["sig_level"] = sig_level;
    j["fnn_neurons"] = fnn_neurons;
    j["fnn_width"] = fnn_width;
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["test_period"] = test_period;
    j["target"] = wsig::to_string(target);
    j["model"] = wsig::to_string(model);
    j["out_dir"] = out_dir.generic_string();
    j["paths_file"] = paths_file.generic_string();
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const ExperimentConfig& base) {
    ExperimentConfig c = base;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("config json: ") + e.what());
    }
    if (!j.is_object()) throw DomainError("config json: top level must be an object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "n_paths") c.n_paths = v.get<std::size_t>();
            else if (key == "grid_size") c.grid_size = v.get<std::size_t>();
            else if (key == "horizon") c.horizon = v.get<double>();
            else if (key == "seed") c.seed = v.is_string() ? std::stoull(v.get<std::string>()) : v.get<std::uint64_t>();
            else if (key == "alpha") c.weight.alpha = v.get<double>();
            else if (key == "p") c.weight.p = v.get<double>();
            else if (key == "beta") c.weight.beta = v.get<double>();
            else if (key == "gamma") c.weight.gamma = v.get<double>();
            else if (key == "norm_kind") continue;  // implied by the model
            else if (key == "sig_level") c.sig_level = v.get<std::size_t>();
            else if (key == "fnn_neurons") c.fnn_neurons = v.get<std::size_t>();
            else if (key == "fnn_width") c.fnn_width = v.get<std::size_t>();
            else if (key == "learning_rate") c.learning_rate = v.get<double>();
            else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
            else if (key == "epochs") c.epochs = v.get<std::size_t>();
            else if (key == "test_period") c.test_period = v.get<std::size_t>();
            else if (key == "target") c.target = target_from_string(v.get<std::string>());
            else if (key == "model") c.model = model_from_string(v.get<std::string>());
            else if (key == "out_dir") c.out_dir = v.get<std::string>();
            else if (key == "paths_file") c.paths_file = v.get<std::string>();
            else throw DomainError("config json: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string("config json: ") + e.what());
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const DomainError*>(&e) != nullptr) throw;
        throw DomainError(std::string("config json: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) { return from_json(text, ExperimentConfig{}); }

double target_running_max(std::size_t k, const DiscretePath& x) {
    if (x.dim() != 1) throw DomainError("f1 is defined for one-dimensional paths");
    if (k >= x.size()) throw DomainError("f1: grid index out of range");
    double m = x.value(0, 0);
    for (std::size_t j = 1; j <= k; ++j) m = std::max(m, x.value(j, 0));
    return m;
}

double target_clipped_average(std::size_t k, const DiscretePath& x) {
    if (x.dim() != 1) throw DomainError("f2 is defined for one-dimensional paths");
    if (k >= x.size()) throw DomainError("f2: grid index out of range");
    if (k == 0) return std::max(x.value(0, 0), -0.3);
    double integral = 0.0;
    for (std::size_t j = 0; j < k; ++j) integral += (x.time(j + 1) - x.time(j)) * x.value(j, 0);
    return std::max(integral / x.time(k), -0.3);
}

PathFunctional target_functional(TargetId t) {
    if (t == TargetId::f1) return target_running_max;
    return target_clipped_average;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
    std::mt19937_64 gen(seq);
    return gen();
}

DataSplit split_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 gen(derive_seed(seed, 1));
    std::shuffle(order.begin(), order.end(), gen);
    const std::size_t n_train = n * 4 / 5;
    DataSplit s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return s;
}

namespace {

constexpr std::uint32_t kInitTag = 2;
constexpr std::uint32_t kShuffleTag = 3;

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

PathBatch load_or_sample(ExperimentConfig& cfg) {
    PathBatch batch;
    if (!cfg.paths_file.empty()) {
        batch = load_paths_csv(cfg.paths_file);
        cfg.n_paths = batch.size();
        cfg.grid_size = batch.grid_size();
        cfg.horizon = batch.paths.front().horizon();
        if (batch.size() < 2) throw DomainError("paths file must contain at least two paths");
    } else {
        batch = sample_bm(cfg.n_paths, cfg.grid_size, cfg.horizon, cfg.seed);
    }
    if (batch.dim() != 1) throw DomainError("the targets are defined for one-dimensional paths only");
    return batch;
}

/// Rows of an M×K table for the given samples.
std::vector<double> gather(std::span<const double> table, std::span<const std::size_t> idx, std::size_t k) {
    std::vector<double> out;
    out.reserve(idx.size() * k);
    for (std::size_t m : idx) out.insert(out.end(), table.begin() + m * k, table.begin() + (m + 1) * k);
    return out;
}

/// mean over (m in idx, k) of ((target - prediction) / ψ_m)².
double table_wmse(std::span<const double> targets, std::span<const double> preds, std::span<const double> weights,
                  std::span<const std::size_t> idx, std::size_t k_points) {
    double sum = 0.0;
    for (std::size_t m : idx) {
        for (std::size_t k = 0; k < k_points; ++k) {
            const double r = (targets[m * k_points + k] - preds[m * k_points + k]) / weights[m];
            sum += r * r;
        }
    }
    return sum / static_cast<double>(idx.size() * k_points);
}

/// Features of the time-augmented prefix signatures at `level`, one block of K
/// rows per path, together with the (p,α)-weights read off the same streams.
FeatureMatrix sig_data(const PathBatch& batch, std::size_t level, const WeightSpec& w, std::vector<double>& weights) {
    const std::size_t k_points = batch.grid_size();
    const std::size_t m_alpha = batch.dim() + 1;
    const std::size_t cols = tensor_dimension(m_alpha, level);
    FeatureMatrix f;
    f.alphabet = m_alpha;
    f.level = level;
    f.rows_per_sample = k_points;
    f.values.resize(static_cast<Eigen::Index>(batch.size() * k_points), static_cast<Eigen::Index>(cols));
    f.row_weights.resize(f.values.rows());
    weights.resize(batch.size());
    const std::size_t weight_level = std::max(level, w.lift_level());
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const auto stream = signature_stream(time_augment(batch.paths[m]), weight_level);
        weights[m] = weight_of(batch.paths[m], w, &stream);
        for (std::size_t k = 0; k < k_points; ++k) {
            const auto row = static_cast<Eigen::Index>(m * k_points + k);
            f.values.row(row) =
                Eigen::Map<const Eigen::RowVectorXd>(stream[k].coeffs().data(), static_cast<Eigen::Index>(cols));
            f.row_weights[row] = 1.0 / weights[m];
        }
    }
    return f;
}

std::vector<double> fnn_table(const FnnParams& theta, const PathBatch& batch) {
    std::vector<double> out;
    out.reserve(batch.size() * batch.grid_size());
    for (const auto& x : batch.paths) {
        const auto p = fnn_predict_path(theta, x);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string predictions_csv(const PathBatch& batch, std::span<const double> targets, std::span<const double> preds) {
    const std::size_t k_points = batch.grid_size();
    std::string out = "sample,k,t,target,prediction,weight\n";
    out.reserve(batch.size() * k_points * 80);
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const std::string ms = std::to_string(m) + ',';
        const std::string ws = io::format_double(batch.weights[m]);
        for (std::size_t k = 0; k < k_points; ++k) {
            out += ms;
            out += std::to_string(k);
            out += ',';
            out += io::format_double(batch.paths[m].time(k));
            out += ',';
            out += io::format_double(targets[m * k_points + k]);
            out += ',';
            out += io::format_double(preds[m * k_points + k]);
            out += ',';
            out += ws;
            out += '\n';
        }
    }
    return out;
}

json read_json(const fs::path& p) {
    try {
        return json::parse(io::read_text_file(p));
    } catch (const json::exception& e) {
        throw IoError("'" + p.string() + "': " + e.what());
    }
}

DataSplit read_split(const fs::path& bundle) {
    const auto j = read_json(bundle / "split.json");
    try {
        return {j.at("train").get<std::vector<std::size_t>>(), j.at("test").get<std::vector<std::size_t>>()};
    } catch (const json::exception& e) {
        throw IoError("'" + (bundle / "split.json").string() + "': " + e.what());
    }
}

ExperimentConfig read_config(const fs::path& bundle) {
    return ExperimentConfig::from_json(io::read_text_file(bundle / "config.json"));
}

}  // namespace

std::string ExperimentMetrics::to_json(const ExperimentConfig& cfg, std::size_t n_train, std::size_t n_test) const {
    json j;
    j["status"] = ok ? "ok" : "diverged";
    if (!ok) {
        j["error"] = error;
        if (failed_epoch) j["failed_epoch"] = *failed_epoch;
    }
    j["model"] = wsig::to_string(cfg.model);
    j["target"] = wsig::to_string(cfg.target);
    j["seed"] = cfg.seed;
    j["n_train"] = n_train;
    j["n_test"] = n_test;
    j["epochs_completed"] = epochs_completed;
    j["initial_train_wmse"] = initial_train_wmse;
    j["initial_test_wmse"] = initial_test_wmse;
    if (final_train_wmse) j["final_train_wmse"] = *final_train_wmse;
    if (final_test_wmse) j["final_test_wmse"] = *final_test_wmse;
    j["baseline_train_wmse"] = baseline_train_wmse;
    j["baseline_test_wmse"] = baseline_test_wmse;
    j["runtime_seconds"] = runtime_seconds;
    return j.dump(2);
}

PathBatch generate_paths(const ExperimentConfig& cfg) {
    cfg.validate();
    return sample_bm(cfg.n_paths, cfg.grid_size, cfg.horizon, cfg.seed);
}

ExperimentMetrics run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    ExperimentConfig cfg = config;
    PathBatch batch = load_or_sample(cfg);
    ensure_dir(cfg.out_dir);

    const std::size_t k_points = batch.grid_size();
    const auto targets = evaluate_targets(batch, target_functional(cfg.target));
    const DataSplit split = split_indices(batch.size(), cfg.seed);
    const WeightSpec w = cfg.resolved_weight();

    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.test_period = cfg.test_period;
    tc.seed = derive_seed(cfg.seed, kShuffleTag);

    const auto train_targets = gather(targets, split.train, k_points);
    const auto test_targets = gather(targets, split.test, k_points);

    ExperimentMetrics metrics;
    std::vector<double> initial_preds;
    std::vector<double> final_preds;
    std::string model_json;
    LossCurve curve;

    io::write_text_file(cfg.out_dir / "config.json", cfg.to_json());
    save_paths_csv(batch, cfg.out_dir / "paths.csv");
    io::write_text_file(cfg.out_dir / "split.json", json{{"train", split.train}, {"test", split.test}}.dump());

    try {
        if (cfg.model == ModelId::fnn) {
            cache_weights(batch, w);
            const PathBatch train = batch.subset(split.train);
            const PathBatch test = batch.subset(split.test);
            const FnnParams init = FnnParams::initialize(cfg.fnn_neurons, cfg.fnn_width, 1,
                                                         cfg.target == TargetId::f1, derive_seed(cfg.seed, kInitTag));
            initial_preds = fnn_table(init, batch);
            auto result = train_fnn(tc, init, train, train_targets, &test, test_targets);
            final_preds = fnn_table(result.params, batch);
            model_json = result.params.to_json(w);
            curve = std::move(result.curve);
        } else {
            const FeatureMatrix all = sig_data(batch, cfg.sig_level, w, batch.weights);
            const FeatureMatrix train = all.select_samples(split.train);
            const FeatureMatrix test = all.select_samples(split.test);
            const auto init = SigLinearModel::zeros(all.alphabet, all.level);
            initial_preds = to_std(predict_sig(init, all));
            auto result = fit_sig_sgd(train, train_targets, tc, &test, test_targets, &init);
            final_preds = to_std(predict_sig(result.model, all));
            model_json = result.model.to_json(w);
            curve = std::move(result.curve);
        }
    } catch (const TrainingError& e) {
        metrics.ok = false;
        metrics.error = e.what();
        metrics.failed_epoch = e.epoch();
    }

    const std::vector<double> zeros(targets.size(), 0.0);
    metrics.baseline_train_wmse = table_wmse(targets, zeros, batch.weights, split.train, k_points);
    metrics.baseline_test_wmse = table_wmse(targets, zeros, batch.weights, split.test, k_points);
    if (!initial_preds.empty()) {
        metrics.initial_train_wmse = table_wmse(targets, initial_preds, batch.weights, split.train, k_points);
        metrics.initial_test_wmse = table_wmse(targets, initial_preds, batch.weights, split.test, k_points);
    }
    if (metrics.ok) {
        metrics.epochs_completed = cfg.epochs;
        if (cfg.epochs > 0) {
            metrics.final_train_wmse = table_wmse(targets, final_preds, batch.weights, split.train, k_points);
            metrics.final_test_wmse = table_wmse(targets, final_preds, batch.weights, split.test, k_points);
        }
        io::write_text_file(cfg.out_dir / "loss_curve.csv", curve.to_csv());
        io::write_text_file(cfg.out_dir / "model.json", model_json);
        io::write_text_file(cfg.out_dir / "predictions.csv", predictions_csv(batch, targets, final_preds));
    } else if (metrics.failed_epoch) {
        metrics.epochs_completed = *metrics.failed_epoch - 1;
    }

    metrics.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_text_file(cfg.out_dir / "metrics.json", metrics.to_json(cfg, split.train.size(), split.test.size()));
    return metrics;
}

Evaluation evaluate_bundle(const fs::path& bundle, const fs::path& paths_file) {
    const ExperimentConfig cfg = read_config(bundle);
    const WeightSpec w = cfg.resolved_weight();
    PathBatch batch;
    std::vector<std::size_t> idx;
    if (paths_file.empty()) {
        batch = load_paths_csv(bundle / "paths.csv");
        idx = read_split(bundle).test;
        for (std::size_t m : idx) {
            if (m >= batch.size()) throw IoError("split.json refers to a sample missing from paths.csv");
        }
    } else {
        batch = load_paths_csv(paths_file);
        idx.resize(batch.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    if (batch.dim() != 1) throw DomainError("the targets are defined for one-dimensional paths only");
    const auto targets = evaluate_targets(batch, target_functional(cfg.target));
    const std::string model_text = io::read_text_file(bundle / "model.json");

    std::vector<double> preds;
    if (cfg.model == ModelId::fnn) {
        cache_weights(batch, w);
        preds = fnn_table(FnnParams::from_json(model_text), batch);
    } else {
        const auto model = SigLinearModel::from_json(model_text);
        const FeatureMatrix f = sig_data(batch, model.level, w, batch.weights);
        preds = to_std(predict_sig(model, f));
    }
    const std::vector<double> zeros(targets.size(), 0.0);
    Evaluation e;
    e.n_paths = idx.size();
    e.wmse = table_wmse(targets, preds, batch.weights, idx, batch.grid_size());
    e.baseline_wmse = table_wmse(targets, zeros, batch.weights, idx, batch.grid_size());
    return e;
}

void emit_figure_data(const std::vector<fs::path>& bundles, const fs::path& out_dir) {
    if (bundles.empty()) throw DomainError("figures: no bundle given");
    struct Loaded {
        ExperimentConfig cfg;
        io::CsvTable curve;
        io::CsvTable preds;
    };
    std::vector<Loaded> loaded;
    DataSplit split;
    for (std::size_t b = 0; b < bundles.size(); ++b) {
        Loaded l{read_config(bundles[b]), io::read_csv(bundles[b] / "loss_curve.csv"),
                 io::read_csv(bundles[b] / "predictions.csv")};
        const DataSplit s = read_split(bundles[b]);
        if (b == 0) {
            split = s;
        } else if (s.test != split.test || l.cfg.target != loaded.front().cfg.target) {
            throw DomainError("figures: bundles differ in target or data split");
        }
        loaded.push_back(std::move(l));
    }
    if (split.test.size() < 3) throw DomainError("figures: fewer than three test samples");
    const PathBatch paths = load_paths_csv(bundles.front() / "paths.csv");
    ensure_dir(out_dir);

    std::string a = "model,series,epoch,loss\n";
    for (const auto& l : loaded) {
        const std::string model = wsig::to_string(l.cfg.model);
        const std::size_t ce = l.curve.column("epoch");
        const std::size_t ctr = l.curve.column("train_loss");
        const std::size_t cte = l.curve.column("test_loss");
        for (const auto& row : l.curve.rows) a += model + ",train," + row[ce] + ',' + row[ctr] + '\n';
        for (const auto& row : l.curve.rows) {
            if (!row[cte].empty()) a += model + ",test," + row[ce] + ',' + row[cte] + '\n';
        }
    }
    io::write_text_file(out_dir / "figure_a.csv", a);

    const std::vector<std::size_t> chosen(split.test.begin(), split.test.begin() + 3);
    const std::size_t k_points = paths.grid_size();
    std::string header = "sample,k,t,path,target";
    // prediction[b][(chosen index, k)]
    std::vector<std::vector<std::string>> pred(loaded.size());
    std::vector<std::string> target(chosen.size() * k_points);
    for (std::size_t b = 0; b < loaded.size(); ++b) {
        header += ",prediction_" + std::string(wsig::to_string(loaded[b].cfg.model));
        pred[b].resize(chosen.size() * k_points);
        const auto& t = loaded[b].preds;
        const std::size_t cs = t.column("sample"), ck = t.column("k"), ct = t.column("target"),
                          cp = t.column("prediction");
        for (const auto& row : t.rows) {
            const std::size_t m = std::stoul(row[cs]);
            const auto it = std::find(chosen.begin(), chosen.end(), m);
            if (it == chosen.end()) continue;
            const std::size_t k = std::stoul(row[ck]);
            if (k >= k_points) throw IoError("predictions.csv: grid index out of range");
            const std::size_t slot = static_cast<std::size_t>(it - chosen.begin()) * k_points + k;
            pred[b][slot] = row[cp];
            target[slot] = row[ct];
        }
    }
    std::string fb = header + '\n';
    for (std::size_t c = 0; c < chosen.size(); ++c) {
        const auto& x = paths.paths.at(chosen[c]);
        for (std::size_t k = 0; k < k_points; ++k) {
            const std::size_t slot = c * k_points + k;
            if (target[slot].empty()) throw IoError("predictions.csv lacks a row for a figure sample");
            fb += std::to_string(chosen[c]) + ',' + std::to_string(k) + ',' + io::format_double(x.time(k)) + ',' +
                  io::format_double(x.value(k, 0)) + ',' + target[slot];
            for (std::size_t b = 0; b < loaded.size(); ++b) fb += ',' + pred[b][slot];
            fb += '\n';
        }
    }
    io::write_text_file(out_dir / "figure_b.csv", fb);
}

KernelMethod kernel_method_from_string(const std::string& s) {
    if (s == "truncated") return KernelMethod::truncated;
    if (s == "goursat") return KernelMethod::goursat;
    throw DomainError("unknown kernel method '" + s + "' (expected truncated or goursat)");
}

Eigen::MatrixXd path_gram(const PathBatch& x, const PathBatch& y, const KernelSpec& spec, KernelMethod method,
                          bool augment_time) {
    spec.validate();
    auto prep = [&](const PathBatch& b) {
        std::vector<DiscretePath> out;
        out.reserve(b.size());
        for (const auto& p : b.paths) out.push_back(augment_time ? time_augment(p) : p);
        return out;
    };
    const auto px = prep(x);
    const auto py = prep(y);
    if (method == KernelMethod::goursat) {
        for (double a : spec.level_coeffs) {
            if (a != 1.0) throw DomainError("goursat kernel requires unit level coefficients");
        }
        Eigen::MatrixXd g(static_cast<Eigen::Index>(px.size()), static_cast<Eigen::Index>(py.size()));
        for (std::size_t i = 0; i < px.size(); ++i) {
            for (std::size_t j = 0; j < py.size(); ++j) {
                g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = goursat_kernel(px[i], py[j]);
            }
        }
        return g;
    }
    auto sigs = [&](const std::vector<DiscretePath>& ps) {
        std::vector<TruncatedTensor> s;
        s.reserve(ps.size());
        for (const auto& p : ps) s.push_back(signature(p, spec.level()));
        return terminal_features(s, spec.level());
    };
    return kernel_gram(spec, sigs(px), sigs(py));
}

GpRunSummary run_gp(const GpRunConfig& config) {
    config.data.validate();
    config.kernel.validate();
    ExperimentConfig cfg = config.data;
    const PathBatch batch = load_or_sample(cfg);
    ensure_dir(cfg.out_dir);
    const auto f = target_functional(cfg.target);
    const std::size_t last = batch.grid_size() - 1;

    std::vector<TruncatedTensor> sigs;
    sigs.reserve(batch.size());
    Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t m = 0; m < batch.size(); ++m) {
        sigs.push_back(signature(time_augment(batch.paths[m]), config.kernel.level()));
        y[static_cast<Eigen::Index>(m)] = f(last, batch.paths[m]);
    }
    const FeatureMatrix all = terminal_features(sigs, config.kernel.level());
    const DataSplit split = split_indices(batch.size(), cfg.seed);
    const FeatureMatrix train = all.select_samples(split.train);
    const FeatureMatrix test = all.select_samples(split.test);
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(split.train.size()));
    Eigen::VectorXd y_test(static_cast<Eigen::Index>(split.test.size()));
    for (std::size_t i = 0; i < split.train.size(); ++i) y_train[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(split.train[i])];
    for (std::size_t i = 0; i < split.test.size(); ++i) y_test[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(split.test[i])];

    const GpPosterior post(config.kernel, train, y_train, config.kernel.noise);
    const GpPrediction pred = post.predict(test);

    GpRunSummary s;
    s.test_mse = (pred.mean - y_test).squaredNorm() / static_cast<double>(y_test.size());
    s.mean_variance = pred.variance.mean();
    s.jitter = post.jitter();

    io::write_text_file(cfg.out_dir / "kernel.json", config.kernel.to_json());
    io::write_text_file(cfg.out_dir / "gram.csv", matrix_to_csv(kernel_gram(config.kernel, train, train)));
    io::write_text_file(cfg.out_dir / "posterior.csv", posterior_to_csv(pred, &y_test));
    io::write_text_file(cfg.out_dir / "split.json", json{{"train", split.train}, {"test", split.test}}.dump());
    if (config.prior_samples > 0) {
        io::write_text_file(cfg.out_dir / "prior_samples.csv",
                            matrix_to_csv(gp_sample_prior(config.kernel, all, config.prior_samples, cfg.seed)));
    }
    json j;
    j["target"] = wsig::to_string(cfg.target);
    j["seed"] = cfg.seed;
    j["n_train"] = split.train.size();
    j["n_test"] = split.test.size();
    j["test_mse"] = s.test_mse;
    j["mean_variance"] = s.mean_variance;
    j["jitter"] = s.jitter;
    io::write_text_file(cfg.out_dir / "gp_metrics.json", j.dump(2));
    return s;
}

}  // namespace wsig
