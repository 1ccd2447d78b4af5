#include "wsig/fnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "wsig/errors.hpp"
#include "wsig/io.hpp"

namespace wsig {

namespace {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in " + what);
}

/// φ_{n,i}(t_j) for j < K-1 (the last grid point never enters a left sum).
struct DensityTable {
    std::size_t k_points = 0;
    std::vector<double> values;  // [(n * dim + i) * k_points + j]

    double at(std::size_t ni, std::size_t j) const { return values[ni * k_points + j]; }
};

DensityTable make_densities(const FnnParams& theta, std::span<const double> times) {
    DensityTable table;
    table.k_points = times.size();
    table.values.assign(theta.inner.size() * times.size(), 0.0);
    for (std::size_t ni = 0; ni < theta.inner.size(); ++ni) {
        for (std::size_t j = 0; j + 1 < times.size(); ++j) {
            table.values[ni * times.size() + j] = theta.inner[ni](times[j]);
        }
    }
    return table;
}

/// z[n * K + k] for k <= last.
void preactivations(const FnnParams& theta, const DensityTable& table, const DiscretePath& x,
                    std::size_t last, std::vector<double>& z) {
    const std::size_t k_points = x.size();
    const std::size_t dim = theta.input_dim;
    z.assign(theta.neurons() * k_points, 0.0);
    for (std::size_t n = 0; n < theta.neurons(); ++n) {
        double integral = 0.0;
        for (std::size_t k = 0; k <= last; ++k) {
            double zk = theta.a[n] * x.time(k) + integral;
            if (theta.use_spatial) {
                double spatial = 0.0;
                for (std::size_t i = 0; i < dim; ++i) spatial += theta.c[n * dim + i] * x.value(k, i);
                zk += spatial;
            }
            zk += theta.b[n];
            z[n * k_points + k] = zk;
            if (k + 1 < k_points) {
                const double dt = x.time(k + 1) - x.time(k);
                double inc = 0.0;
                for (std::size_t i = 0; i < dim; ++i) inc += table.at(n * dim + i, k) * x.value(k, i);
                integral += dt * inc;
            }
        }
    }
}

double readout(const FnnParams& theta, const std::vector<double>& z, std::size_t k_points, std::size_t k) {
    double out = 0.0;
    for (std::size_t n = 0; n < theta.neurons(); ++n) out += theta.y[n] * relu(z[n * k_points + k]);
    return out;
}

void check_path(const FnnParams& theta, const DiscretePath& x) {
    if (x.dim() != theta.input_dim) {
        throw DimensionError("fnn: path dimension " + std::to_string(x.dim()) + " but network expects " +
                             std::to_string(theta.input_dim));
    }
}

void check_targets(const PathBatch& batch, std::span<const double> targets) {
    batch.validate();
    if (!batch.has_weights()) throw DomainError("weighted_mse: batch weights are not cached");
    if (targets.size() != batch.size() * batch.grid_size()) {
        throw DimensionError("weighted_mse: target table must be M x K");
    }
}

}  // namespace

double InnerNet::operator()(double t) const {
    double out = v0;
    for (std::size_t h = 0; h < w.size(); ++h) out += v[h] * relu(w[h] * t + u[h]);
    return out;
}

std::size_t FnnParams::parameter_count() const {
    std::size_t count = a.size() + b.size() + c.size() + y.size();
    for (const auto& net : inner) count += 3 * net.width() + 1;
    return count;
}

std::vector<double> FnnParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto* v : {&a, &b, &c, &y}) flat.insert(flat.end(), v->begin(), v->end());
    for (const auto& net : inner) {
        flat.insert(flat.end(), net.w.begin(), net.w.end());
        flat.insert(flat.end(), net.u.begin(), net.u.end());
        flat.insert(flat.end(), net.v.begin(), net.v.end());
        flat.push_back(net.v0);
    }
    return flat;
}

void FnnParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw DimensionError("fnn: flat parameter size mismatch");
    auto it = flat.begin();
    auto take = [&it](std::vector<double>& dst) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
        it += static_cast<std::ptrdiff_t>(dst.size());
    };
    take(a);
    take(b);
    take(c);
    take(y);
    for (auto& net : inner) {
        take(net.w);
        take(net.u);
        take(net.v);
        net.v0 = *it++;
    }
}

std::string FnnParams::parameter_name(std::size_t idx) const {
    const std::pair<const char*, const std::vector<double>*> heads[] = {{"a", &a}, {"b", &b}, {"c", &c}, {"y", &y}};
    for (const auto& [name, vec] : heads) {
        if (idx < vec->size()) return std::string(name) + "[" + std::to_string(idx) + "]";
        idx -= vec->size();
    }
    for (std::size_t ni = 0; ni < inner.size(); ++ni) {
        const auto& net = inner[ni];
        const std::string prefix = "inner[" + std::to_string(ni / input_dim) + "][" + std::to_string(ni % input_dim) + "].";
        const std::size_t w = net.width();
        if (idx < w) return prefix + "w[" + std::to_string(idx) + "]";
        if (idx < 2 * w) return prefix + "u[" + std::to_string(idx - w) + "]";
        if (idx < 3 * w) return prefix + "v[" + std::to_string(idx - 2 * w) + "]";
        if (idx == 3 * w) return prefix + "v0";
        idx -= 3 * w + 1;
    }
    return "<out of range>";
}

FnnParams FnnParams::zeros_like() const {
    FnnParams z = *this;
    std::vector<double> flat(parameter_count(), 0.0);
    z.assign(flat);
    return z;
}

void FnnParams::validate() const {
    const std::size_t n = neurons();
    if (n == 0) throw DomainError("fnn: at least one neuron required");
    if (input_dim == 0) throw DomainError("fnn: input dimension must be positive");
    if (b.size() != n || y.size() != n) throw DimensionError("fnn: a, b, y must have equal length");
    if (c.size() != (use_spatial ? n * input_dim : 0)) throw DimensionError("fnn: spatial weights shape");
    if (inner.size() != n * input_dim) throw DimensionError("fnn: one inner net per neuron and coordinate");
    for (const auto& net : inner) {
        if (net.width() == 0 || net.u.size() != net.width() || net.v.size() != net.width()) {
            throw DimensionError("fnn: malformed inner network");
        }
    }
    const auto flat = flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (!std::isfinite(flat[i])) throw NumericError("fnn: non-finite parameter " + parameter_name(i));
    }
}

FnnParams FnnParams::initialize(std::size_t neurons, std::size_t inner_width, std::size_t input_dim,
                                bool use_spatial, std::uint64_t seed) {
    if (neurons == 0 || inner_width == 0 || input_dim == 0) throw DomainError("fnn: sizes must be positive");
    std::mt19937_64 gen(seed);
    auto uniform = [&gen](double s) { return std::uniform_real_distribution<double>(-s, s)(gen); };

    FnnParams p;
    p.input_dim = input_dim;
    p.use_spatial = use_spatial;
    p.a.resize(neurons);
    p.b.resize(neurons);
    p.y.resize(neurons);
    if (use_spatial) p.c.resize(neurons * input_dim);
    const double ys = 1.0 / std::sqrt(static_cast<double>(neurons));
    const double vs = 1.0 / std::sqrt(static_cast<double>(inner_width));
    for (std::size_t n = 0; n < neurons; ++n) {
        p.a[n] = uniform(1.0);
        p.b[n] = uniform(1.0);
        p.y[n] = uniform(ys);
        for (std::size_t i = 0; i < input_dim && use_spatial; ++i) p.c[n * input_dim + i] = uniform(1.0);
    }
    p.inner.resize(neurons * input_dim);
    for (auto& net : p.inner) {
        net.w.resize(inner_width);
        net.u.resize(inner_width);
        net.v.resize(inner_width);
        for (std::size_t h = 0; h < inner_width; ++h) {
            net.w[h] = uniform(1.0);
            net.u[h] = uniform(1.0);
            net.v[h] = uniform(vs);
        }
        net.v0 = uniform(vs);
    }
    return p;
}

std::string FnnParams::to_json(const std::optional<WeightSpec>& weight) const {
    nlohmann::json j;
    j["type"] = "fnn";
    j["input_dim"] = input_dim;
    j["use_spatial"] = use_spatial;
    j["neurons"] = neurons();
    j["a"] = a;
    j["b"] = b;
    j["c"] = c;
    j["y"] = y;
    auto& nets = j["inner"] = nlohmann::json::array();
    for (const auto& net : inner) nets.push_back({{"w", net.w}, {"u", net.u}, {"v", net.v}, {"v0", net.v0}});
    if (weight) {
        j["weight"] = {{"alpha", weight->alpha},
                       {"p", weight->p},
                       {"beta", weight->beta},
                       {"gamma", weight->gamma},
                       {"norm_kind", wsig::to_string(weight->norm_kind)}};
    }
    return j.dump(2);
}

FnnParams FnnParams::from_json(const std::string& text) {
    FnnParams p;
    try {
        const auto j = nlohmann::json::parse(text);
        p.input_dim = j.at("input_dim").get<std::size_t>();
        p.use_spatial = j.at("use_spatial").get<bool>();
        p.a = j.at("a").get<std::vector<double>>();
        p.b = j.at("b").get<std::vector<double>>();
        p.c = j.at("c").get<std::vector<double>>();
        p.y = j.at("y").get<std::vector<double>>();
        for (const auto& net : j.at("inner")) {
            InnerNet in;
            in.w = net.at("w").get<std::vector<double>>();
            in.u = net.at("u").get<std::vector<double>>();
            in.v = net.at("v").get<std::vector<double>>();
            in.v0 = net.at("v0").get<double>();
            p.inner.push_back(std::move(in));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("fnn model json: ") + e.what());
    }
    p.validate();
    return p;
}

double fnn_forward(const FnnParams& theta, std::size_t k, const DiscretePath& x) {
    check_path(theta, x);
    if (k >= x.size()) {
        throw DomainError("fnn_forward: grid index " + std::to_string(k) + " out of range");
    }
    const auto table = make_densities(theta, x.times());
    std::vector<double> z;
    preactivations(theta, table, x, k, z);
    return readout(theta, z, x.size(), k);
}

std::vector<double> fnn_predict_path(const FnnParams& theta, const DiscretePath& x) {
    check_path(theta, x);
    const auto table = make_densities(theta, x.times());
    std::vector<double> z;
    preactivations(theta, table, x, x.size() - 1, z);
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = readout(theta, z, x.size(), k);
    return out;
}

double weighted_mse(const FnnParams& theta, const PathBatch& batch, std::span<const double> targets) {
    check_targets(batch, targets);
    const std::size_t k_points = batch.grid_size();
    const auto table = make_densities(theta, batch.times());
    std::vector<double> z;
    double total = 0.0;
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const auto& x = batch.paths[m];
        check_path(theta, x);
        preactivations(theta, table, x, k_points - 1, z);
        const double inv_w = 1.0 / batch.weights[m];
        double path_sum = 0.0;
        for (std::size_t k = 0; k < k_points; ++k) {
            const double r = (targets[m * k_points + k] - readout(theta, z, k_points, k)) * inv_w;
            path_sum += r * r;
        }
        total += path_sum;
    }
    return total / static_cast<double>(batch.size() * k_points);
}

double weighted_mse(const FnnParams& theta, const PathBatch& batch, const PathFunctional& target) {
    return weighted_mse(theta, batch, evaluate_targets(batch, target));
}

FnnLossGrad fnn_grad(const FnnParams& theta, const PathBatch& batch, std::span<const double> targets,
                     std::span<const std::size_t> indices) {
    check_targets(batch, targets);
    if (indices.empty()) throw DomainError("fnn_grad: empty minibatch");

    const std::size_t k_points = batch.grid_size();
    const std::size_t neurons = theta.neurons();
    const std::size_t dim = theta.input_dim;
    const auto times = batch.times();
    const auto table = make_densities(theta, times);
    const double scale = 1.0 / static_cast<double>(indices.size() * k_points);

    FnnLossGrad out;
    out.grad = theta.zeros_like();
    auto& g = out.grad;
    // ∂loss/∂φ_{n,i}(t_j), accumulated over the minibatch.
    std::vector<double> d_density(theta.inner.size() * k_points, 0.0);

    std::vector<double> z;
    std::vector<double> resid(k_points);
    double total = 0.0;
    for (std::size_t m : indices) {
        const auto& x = batch.paths.at(m);
        check_path(theta, x);
        preactivations(theta, table, x, k_points - 1, z);
        const double inv_w2 = 1.0 / (batch.weights[m] * batch.weights[m]);
        for (std::size_t k = 0; k < k_points; ++k) {
            const double r = readout(theta, z, k_points, k) - targets[m * k_points + k];
            total += r * r * inv_w2;
            resid[k] = 2.0 * r * inv_w2 * scale;
        }
        for (std::size_t n = 0; n < neurons; ++n) {
            const double* zn = &z[n * k_points];
            double da = 0.0;
            double db = 0.0;
            double dy = 0.0;
            double tail = 0.0;  // Σ_{k' > k} ∂loss/∂z_{n,k'}
            for (std::size_t k = k_points; k-- > 0;) {
                double dz = 0.0;
                if (zn[k] > 0.0) {
                    dy += resid[k] * zn[k];
                    dz = resid[k] * theta.y[n];
                }
                if (k + 1 < k_points && tail != 0.0) {
                    const double dt = times[k + 1] - times[k];
                    for (std::size_t i = 0; i < dim; ++i) {
                        d_density[(n * dim + i) * k_points + k] += tail * dt * x.value(k, i);
                    }
                }
                if (dz != 0.0) {
                    da += dz * times[k];
                    db += dz;
                    if (theta.use_spatial) {
                        for (std::size_t i = 0; i < dim; ++i) g.c[n * dim + i] += dz * x.value(k, i);
                    }
                    tail += dz;
                }
            }
            g.a[n] += da;
            g.b[n] += db;
            g.y[n] += dy;
        }
    }
    out.loss = total * scale;

    for (std::size_t ni = 0; ni < theta.inner.size(); ++ni) {
        const auto& net = theta.inner[ni];
        auto& gn = g.inner[ni];
        for (std::size_t j = 0; j + 1 < k_points; ++j) {
            const double dphi = d_density[ni * k_points + j];
            if (dphi == 0.0) continue;
            gn.v0 += dphi;
            for (std::size_t h = 0; h < net.width(); ++h) {
                const double pre = net.w[h] * times[j] + net.u[h];
                if (pre > 0.0) {
                    gn.v[h] += dphi * pre;
                    gn.w[h] += dphi * net.v[h] * times[j];
                    gn.u[h] += dphi * net.v[h];
                }
            }
        }
    }

    require_finite(out.loss, "fnn loss");
    const auto flat = g.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (!std::isfinite(flat[i])) throw NumericError("fnn_grad: non-finite gradient at " + g.parameter_name(i));
    }
    return out;
}

FnnTrainResult train_fnn(const TrainConfig& config, FnnParams init, const PathBatch& train,
                         std::span<const double> train_targets, const PathBatch* test,
                         std::span<const double> test_targets) {
    init.validate();
    check_targets(train, train_targets);
    if (test != nullptr) check_targets(*test, test_targets);
    if (config.batch_size == 0) throw DomainError("train_fnn: batch size must be positive");

    FnnTrainResult result{std::move(init), {}};
    auto flat = result.params.flatten();
    AdamState adam(flat.size(), config.learning_rate, config.beta1, config.beta2, config.epsilon);

    std::mt19937_64 shuffler(config.seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffler);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            FnnLossGrad lg;
            try {
                lg = fnn_grad(result.params, train, train_targets, idx);
            } catch (const NumericError& e) {
                throw TrainingError(std::string("fnn training diverged: ") + e.what(), epoch);
            }
            epoch_sum += lg.loss * static_cast<double>(idx.size());
            adam.update(flat, lg.grad.flatten());
            result.params.assign(flat);
        }
        const double train_loss = epoch_sum / static_cast<double>(order.size());
        if (!std::isfinite(train_loss)) throw TrainingError("fnn training loss is not finite", epoch);
        result.curve.train_loss.push_back(train_loss);

        if (test != nullptr && config.test_period > 0 && epoch % config.test_period == 0) {
            const double tl = weighted_mse(result.params, *test, test_targets);
            if (!std::isfinite(tl)) throw TrainingError("fnn test loss is not finite", epoch);
            result.curve.test_epochs.push_back(epoch);
            result.curve.test_loss.push_back(tl);
        }
    }
    return result;
}

std::string LossCurve::to_csv() const {
    std::string out = "epoch,train_loss,test_loss\n";
    std::size_t t = 0;
    for (std::size_t e = 0; e < train_loss.size(); ++e) {
        out += std::to_string(e + 1) + ',' + io::format_double(train_loss[e]) + ',';
        if (t < test_epochs.size() && test_epochs[t] == e + 1) out += io::format_double(test_loss[t++]);
        out += '\n';
    }
    return out;
}

}  // namespace wsig
