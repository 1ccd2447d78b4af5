#include "wsig/sig_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "wsig/errors.hpp"

namespace wsig {

namespace {

void check_shapes(const FeatureMatrix& f, std::span<const double> targets, std::size_t coeffs) {
    if (targets.size() != f.rows()) throw DimensionError("sig: target count does not match feature rows");
    if (coeffs != f.cols()) {
        throw DimensionError("sig: model has " + std::to_string(coeffs) + " coefficients, features have " +
                             std::to_string(f.cols()) + " columns");
    }
    if (f.row_weights.size() != f.values.rows()) throw DimensionError("sig: row weight count mismatch");
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s) {
    return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace

FeatureMatrix FeatureMatrix::select_samples(std::span<const std::size_t> samples) const {
    FeatureMatrix out;
    out.alphabet = alphabet;
    out.level = level;
    out.rows_per_sample = rows_per_sample;
    const auto k = static_cast<Eigen::Index>(rows_per_sample);
    out.values.resize(static_cast<Eigen::Index>(samples.size()) * k, values.cols());
    out.row_weights.resize(out.values.rows());
    Eigen::Index r = 0;
    for (std::size_t s : samples) {
        if (s >= this->samples()) throw DimensionError("select_samples: sample index out of range");
        out.values.middleRows(r, k) = values.middleRows(static_cast<Eigen::Index>(s) * k, k);
        out.row_weights.segment(r, k) = row_weights.segment(static_cast<Eigen::Index>(s) * k, k);
        r += k;
    }
    return out;
}

FeatureMatrix sig_features(const std::vector<SignatureStream>& streams, std::size_t level,
                           std::span<const double> path_weights) {
    if (streams.empty()) throw DomainError("sig_features: no streams");
    if (!path_weights.empty() && path_weights.size() != streams.size()) {
        throw DimensionError("sig_features: one weight per stream required");
    }
    const std::size_t k_points = streams.front().size();
    const std::size_t m = streams.front().alphabet();
    FeatureMatrix f;
    f.alphabet = m;
    f.level = level;
    f.rows_per_sample = k_points;
    const std::size_t cols = tensor_dimension(m, level);
    f.values.resize(static_cast<Eigen::Index>(streams.size() * k_points), static_cast<Eigen::Index>(cols));
    f.row_weights.resize(f.values.rows());
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& st = streams[s];
        if (st.level < level) {
            throw DomainError("sig_features: stream level " + std::to_string(st.level) + " below " +
                              std::to_string(level));
        }
        if (st.size() != k_points || st.alphabet() != m) throw DimensionError("sig_features: stream shape mismatch");
        const double inv_w = path_weights.empty() ? 1.0 : 1.0 / path_weights[s];
        for (std::size_t k = 0; k < k_points; ++k) {
            const auto row = static_cast<Eigen::Index>(s * k_points + k);
            const auto c = st[k].coeffs();
            // Level-major layout: the first `cols` coefficients are exactly the words |I| <= level.
            f.values.row(row) = Eigen::Map<const Eigen::RowVectorXd>(c.data(), static_cast<Eigen::Index>(cols));
            f.row_weights[row] = inv_w;
        }
    }
    return f;
}

SigLinearModel SigLinearModel::zeros(std::size_t alphabet, std::size_t level) {
    return {alphabet, level, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tensor_dimension(alphabet, level)))};
}

std::string SigLinearModel::to_json(const std::optional<WeightSpec>& weight) const {
    nlohmann::json j;
    j["type"] = "sig";
    j["alphabet"] = alphabet;
    j["level"] = level;
    const TruncatedTensor layout(alphabet, level);
    auto& c = j["coefficients"] = nlohmann::json::object();
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        c[layout.word_at(static_cast<std::size_t>(i)).to_string()] = coeffs[i];
    }
    if (weight) {
        j["weight"] = {{"alpha", weight->alpha},
                       {"p", weight->p},
                       {"beta", weight->beta},
                       {"gamma", weight->gamma},
                       {"norm_kind", wsig::to_string(weight->norm_kind)}};
    }
    return j.dump(2);
}

SigLinearModel SigLinearModel::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        auto model = zeros(j.at("alphabet").get<std::size_t>(), j.at("level").get<std::size_t>());
        const TruncatedTensor layout(model.alphabet, model.level);
        for (const auto& [key, value] : j.at("coefficients").items()) {
            model.coeffs[static_cast<Eigen::Index>(layout.index_of(Word::from_string(key)))] = value.get<double>();
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("sig model json: ") + e.what());
    }
}

Eigen::VectorXd predict_sig(const SigLinearModel& model, const FeatureMatrix& features) {
    if (static_cast<std::size_t>(model.coeffs.size()) != features.cols()) {
        throw DimensionError("predict_sig: column count does not match the model");
    }
    return features.values * model.coeffs;
}

double sig_weighted_mse(const SigLinearModel& model, const FeatureMatrix& features,
                        std::span<const double> targets) {
    check_shapes(features, targets, static_cast<std::size_t>(model.coeffs.size()));
    if (features.rows() == 0) throw DomainError("sig_weighted_mse: empty feature matrix");
    const Eigen::VectorXd r =
        (as_vector(targets) - features.values * model.coeffs).cwiseProduct(features.row_weights);
    return r.squaredNorm() / static_cast<double>(features.rows());
}

Eigen::VectorXd sig_gradient(const SigLinearModel& model, const FeatureMatrix& features,
                             std::span<const double> targets, std::span<const std::size_t> samples,
                             double* loss_out) {
    check_shapes(features, targets, static_cast<std::size_t>(model.coeffs.size()));
    if (samples.empty()) throw DomainError("sig_gradient: empty minibatch");
    const auto k = static_cast<Eigen::Index>(features.rows_per_sample);
    const auto y = as_vector(targets);
    const double scale = 1.0 / static_cast<double>(samples.size() * features.rows_per_sample);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.coeffs.size());
    Eigen::VectorXd r(k);
    double loss = 0.0;
    for (std::size_t s : samples) {
        const Eigen::Index first = static_cast<Eigen::Index>(s) * k;
        const auto block = features.values.middleRows(first, k);
        const auto w = features.row_weights.segment(first, k);
        r.noalias() = block * model.coeffs;
        r -= y.segment(first, k);
        const Eigen::ArrayXd w2 = w.array().square();
        loss += (r.array().square() * w2).sum();
        r.array() *= w2;
        grad.noalias() += block.transpose() * r;
    }
    if (loss_out != nullptr) *loss_out = loss * scale;
    return grad * (2.0 * scale);
}

SigTrainResult fit_sig_sgd(const FeatureMatrix& features, std::span<const double> targets,
                           const TrainConfig& config, const FeatureMatrix* test,
                           std::span<const double> test_targets, const SigLinearModel* init) {
    SigTrainResult result{init ? *init : SigLinearModel::zeros(features.alphabet, features.level), {}};
    check_shapes(features, targets, static_cast<std::size_t>(result.model.coeffs.size()));
    if (test != nullptr) check_shapes(*test, test_targets, static_cast<std::size_t>(result.model.coeffs.size()));
    if (config.batch_size == 0) throw DomainError("fit_sig_sgd: batch size must be positive");

    auto& a = result.model.coeffs;
    AdamState adam(static_cast<std::size_t>(a.size()), config.learning_rate, config.beta1, config.beta2,
                   config.epsilon);
    std::mt19937_64 shuffler(config.seed);
    std::vector<std::size_t> order(features.samples());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffler);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            double loss = 0.0;
            const Eigen::VectorXd g = sig_gradient(result.model, features, targets, idx, &loss);
            if (!std::isfinite(loss) || !g.allFinite()) throw TrainingError("signature model diverged", epoch);
            epoch_sum += loss * static_cast<double>(idx.size());
            adam.update(std::span<double>(a.data(), static_cast<std::size_t>(a.size())),
                        std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
        }
        result.curve.train_loss.push_back(epoch_sum / static_cast<double>(order.size()));

        if (test != nullptr && config.test_period > 0 && epoch % config.test_period == 0) {
            const double tl = sig_weighted_mse(result.model, *test, test_targets);
            if (!std::isfinite(tl)) throw TrainingError("signature model test loss is not finite", epoch);
            result.curve.test_epochs.push_back(epoch);
            result.curve.test_loss.push_back(tl);
        }
    }
    return result;
}

SigLinearModel fit_sig_ridge(const FeatureMatrix& features, std::span<const double> targets, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("fit_sig_ridge: lambda must be >= 0");
    check_shapes(features, targets, features.cols());
    const double n = static_cast<double>(features.rows());
    const RowMatrix weighted = features.row_weights.asDiagonal() * features.values;
    const Eigen::VectorXd wy = features.row_weights.cwiseProduct(as_vector(targets));

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(weighted.cols(), weighted.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(weighted.transpose(), 1.0 / n);
    gram = gram.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd rhs = weighted.transpose() * wy / n;

    auto solve = [&](double lam) -> std::optional<Eigen::VectorXd> {
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += lam;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) return std::nullopt;
        Eigen::VectorXd x = llt.solve(rhs);
        if (!x.allFinite()) return std::nullopt;
        return x;
    };

    auto sol = solve(lambda);
    if (!sol && lambda == 0.0) sol = solve(1e-10 * gram.trace() / static_cast<double>(gram.rows()));
    if (!sol) {
        throw NumericError("fit_sig_ridge: normal equations are rank deficient; use lambda > 0");
    }
    return {features.alphabet, features.level, *sol};
}

}  // namespace wsig
