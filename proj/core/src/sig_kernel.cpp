#include "wsig/sig_kernel.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "wsig/errors.hpp"
#include "wsig/io.hpp"

namespace wsig {

void KernelSpec::validate() const {
    if (level_coeffs.empty()) throw DomainError("kernel: at least the level-0 coefficient is required");
    if (!(noise >= 0.0)) throw DomainError("kernel: noise variance must be >= 0");
    double factorial = 1.0;
    for (std::size_t k = 0; k < level_coeffs.size(); ++k) {
        if (k > 0) factorial *= static_cast<double>(k);
        const double a = level_coeffs[k];
        if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("kernel: level coefficients must be finite and >= 0");
        if (check_growth && a > growth_m * std::pow(factorial, growth_delta) * (1.0 + 1e-12)) {
            throw DomainError("kernel: a_" + std::to_string(k) + " = " + std::to_string(a) +
                              " violates a_k <= M (k!)^delta");
        }
    }
}

KernelSpec KernelSpec::constant(std::size_t level, double a) {
    KernelSpec spec;
    spec.level_coeffs.assign(level + 1, a);
    spec.growth_m = std::max(1.0, a);
    return spec;
}

std::string KernelSpec::to_json() const {
    nlohmann::json j;
    j["coefficients"] = level_coeffs;
    j["level"] = level();
    j["growth_m"] = growth_m;
    j["growth_delta"] = growth_delta;
    j["check_growth"] = check_growth;
    j["noise"] = noise;
    return j.dump(2);
}

KernelSpec KernelSpec::from_json(const std::string& text) {
    KernelSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        spec.level_coeffs = j.at("coefficients").get<std::vector<double>>();
        if (j.contains("level") && j["level"].get<std::size_t>() + 1 != spec.level_coeffs.size()) {
            throw DomainError("kernel json: level does not match the coefficient count");
        }
        spec.growth_m = j.value("growth_m", spec.growth_m);
        spec.growth_delta = j.value("growth_delta", spec.growth_delta);
        spec.check_growth = j.value("check_growth", spec.check_growth);
        spec.noise = j.value("noise", spec.noise);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("kernel json: ") + e.what());
    }
    spec.validate();
    return spec;
}

double truncated_kernel(const TruncatedTensor& sx, const TruncatedTensor& sy, const KernelSpec& spec) {
    if (sx.alphabet() != sy.alphabet()) throw DimensionError("truncated_kernel: alphabet mismatch");
    if (sx.level() < spec.level() || sy.level() < spec.level()) {
        throw DomainError("truncated_kernel: signatures truncated below the kernel level");
    }
    double total = 0.0;
    for (std::size_t n = 0; n <= spec.level(); ++n) {
        const auto lx = sx.level_coeffs(n);
        const auto ly = sy.level_coeffs(n);
        double dot = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) dot += lx[i] * ly[i];
        total += spec.level_coeffs[n] * spec.level_coeffs[n] * dot;
    }
    return total;
}

namespace {

/// Explicit second-order sweep with every segment split into `r` equal pieces.
double goursat_sweep(const std::vector<double>& dx, const std::vector<double>& dy, std::size_t d, std::size_t r) {
    const std::size_t nx = dx.size() / d;
    const std::size_t ny = dy.size() / d;
    const double inv_r2 = 1.0 / static_cast<double>(r * r);
    std::vector<double> cell(ny);
    // Two rows of the solution grid.
    std::vector<double> prev(ny * r + 1, 1.0);
    std::vector<double> cur(ny * r + 1, 1.0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            double c = 0.0;
            for (std::size_t k = 0; k < d; ++k) c += dx[i * d + k] * dy[j * d + k];
            cell[j] = c * inv_r2;
        }
        for (std::size_t si = 0; si < r; ++si) {
            cur[0] = 1.0;
            for (std::size_t jj = 0; jj < ny * r; ++jj) {
                const double c = cell[jj / r];
                const double c2 = c * c / 12.0;
                cur[jj + 1] = (cur[jj] + prev[jj + 1]) * (1.0 + 0.5 * c + c2) - prev[jj] * (1.0 - c2);
            }
            std::swap(prev, cur);
        }
    }
    return prev[ny * r];
}

}  // namespace

double goursat_kernel(const DiscretePath& x, const DiscretePath& y) {
    if (x.dim() != y.dim()) throw DimensionError("goursat_kernel: paths differ in dimension");
    const std::size_t nx = x.size() - 1;
    const std::size_t ny = y.size() - 1;
    const std::size_t d = x.dim();

    std::vector<double> dx(nx * d);
    std::vector<double> dy(ny * d);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t c = 0; c < d; ++c) dx[i * d + c] = x.value(i + 1, c) - x.value(i, c);
    }
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t c = 0; c < d; ++c) dy[j * d + c] = y.value(j + 1, c) - y.value(j, c);
    }
    // Richardson step on the O(h²) grid error: solve on the grid and its midpoint refinement.
    const double coarse = goursat_sweep(dx, dy, d, 1);
    const double fine = goursat_sweep(dx, dy, d, 2);
    return (4.0 * fine - coarse) / 3.0;
}

FeatureMatrix terminal_features(const std::vector<TruncatedTensor>& signatures, std::size_t level) {
    if (signatures.empty()) throw DomainError("terminal_features: no signatures");
    const std::size_t m = signatures.front().alphabet();
    const std::size_t cols = tensor_dimension(m, level);
    FeatureMatrix f;
    f.alphabet = m;
    f.level = level;
    f.rows_per_sample = 1;
    f.values.resize(static_cast<Eigen::Index>(signatures.size()), static_cast<Eigen::Index>(cols));
    f.row_weights = Eigen::VectorXd::Ones(f.values.rows());
    for (std::size_t s = 0; s < signatures.size(); ++s) {
        const auto& sig = signatures[s];
        if (sig.alphabet() != m) throw DimensionError("terminal_features: alphabet mismatch");
        if (sig.level() < level) throw DomainError("terminal_features: signature level too low");
        f.values.row(static_cast<Eigen::Index>(s)) =
            Eigen::Map<const Eigen::RowVectorXd>(sig.coeffs().data(), static_cast<Eigen::Index>(cols));
    }
    return f;
}

namespace {

/// a_{|I|} for every feature column.
Eigen::VectorXd column_scales(const KernelSpec& spec, const FeatureMatrix& f) {
    if (f.level < spec.level()) throw DomainError("kernel: features truncated below the kernel level");
    const std::size_t cols = tensor_dimension(f.alphabet, spec.level());
    Eigen::VectorXd scale(static_cast<Eigen::Index>(cols));
    for (std::size_t n = 0; n <= spec.level(); ++n) {
        const auto off = static_cast<Eigen::Index>(level_offset(f.alphabet, n));
        const auto len = static_cast<Eigen::Index>(level_offset(f.alphabet, n + 1) - level_offset(f.alphabet, n));
        scale.segment(off, len).setConstant(spec.level_coeffs[n]);
    }
    return scale;
}

auto kernel_columns(const KernelSpec& spec, const FeatureMatrix& f) {
    return f.values.leftCols(static_cast<Eigen::Index>(tensor_dimension(f.alphabet, spec.level())));
}

}  // namespace

Eigen::MatrixXd kernel_gram(const KernelSpec& spec, const FeatureMatrix& x, const FeatureMatrix& y) {
    if (x.alphabet != y.alphabet) throw DimensionError("kernel_gram: alphabet mismatch");
    const Eigen::VectorXd s2 = column_scales(spec, x).array().square();
    column_scales(spec, y);
    return kernel_columns(spec, x) * s2.asDiagonal() * kernel_columns(spec, y).transpose();
}

Eigen::MatrixXd gp_sample_prior(const KernelSpec& spec, const FeatureMatrix& points, std::size_t n_samples,
                                std::uint64_t seed) {
    spec.validate();
    const Eigen::VectorXd scale = column_scales(spec, points);
    Eigen::MatrixXd z(scale.size(), static_cast<Eigen::Index>(n_samples));
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(std::uint64_t{s} >> 32)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, static_cast<Eigen::Index>(s)) = normal(gen);
    }
    return kernel_columns(spec, points) * (scale.asDiagonal() * z);
}

GpPosterior::GpPosterior(KernelSpec spec, FeatureMatrix train, const Eigen::VectorXd& targets, double noise)
    : spec_(std::move(spec)), train_(std::move(train)), noise_(noise) {
    spec_.validate();
    if (!(noise >= 0.0)) throw DomainError("gp: noise variance must be >= 0");
    if (targets.size() != train_.values.rows()) throw DimensionError("gp: one target per training point");

    Eigen::MatrixXd gram = kernel_gram(spec_, train_, train_);
    gram.diagonal().array() += noise_;
    const double mean_diag = gram.diagonal().mean();

    const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8};
    bool ok = false;
    for (double j : ladder) {
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += j * mean_diag;
        chol_.compute(a);
        if (chol_.info() == Eigen::Success) {
            jitter_ = j * mean_diag;
            ok = true;
            break;
        }
    }
    if (!ok) throw NumericError("gp: Gram matrix is not positive definite even after jitter");
    dual_ = chol_.solve(targets);
}

GpPrediction GpPosterior::predict(const FeatureMatrix& test) const {
    const Eigen::MatrixXd cross = kernel_gram(spec_, train_, test);  // n_train × n_test
    GpPrediction p;
    p.mean = cross.transpose() * dual_;
    const Eigen::MatrixXd v = chol_.matrixL().solve(cross);
    const Eigen::VectorXd prior = kernel_gram(spec_, test, test).diagonal();
    p.variance = (prior - v.colwise().squaredNorm().transpose()).cwiseMax(0.0);
    return p;
}

GpPrediction gp_fit_predict(const FeatureMatrix& train, const Eigen::VectorXd& targets, const KernelSpec& spec,
                            double noise, const FeatureMatrix& test) {
    return GpPosterior(spec, train, targets, noise).predict(test);
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out = "index";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += ",c" + std::to_string(j);
    out += '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out += std::to_string(i);
        for (Eigen::Index j = 0; j < m.cols(); ++j) out += ',' + io::format_double(m(i, j));
        out += '\n';
    }
    return out;
}

std::string posterior_to_csv(const GpPrediction& p, const Eigen::VectorXd* targets) {
    std::string out = targets ? "index,mean,variance,target\n" : "index,mean,variance\n";
    for (Eigen::Index i = 0; i < p.mean.size(); ++i) {
        out += std::to_string(i) + ',' + io::format_double(p.mean[i]) + ',' + io::format_double(p.variance[i]);
        if (targets) out += ',' + io::format_double((*targets)[i]);
        out += '\n';
    }
    return out;
}

}  // namespace wsig
