#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "test_util.hpp"
#include "wsig/errors.hpp"
#include "wsig/sig_kernel.hpp"

using namespace wsig;

namespace {

/// Short random path with total variation (sum of increment norms) <= tv.
DiscretePath short_path(std::mt19937_64& gen, std::size_t k, std::size_t d, double tv) {
    auto x = wsig::testing::random_walk(gen, k, d);
    double total = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += std::pow(x.value(j, i) - x.value(j - 1, i), 2);
        total += std::sqrt(s);
    }
    std::vector<double> v(x.values().begin(), x.values().end());
    for (auto& e : v) e *= tv / total;
    return DiscretePath::equidistant(1.0, std::move(v), d);
}

double linear_series(double c, std::size_t n_max) {
    double s = 0.0, term = 1.0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        if (n > 0) term *= c / static_cast<double>(n * n);
        s += term;
    }
    return s;
}

DiscretePath linear(double slope, std::size_t k) {
    std::vector<double> v(k);
    for (std::size_t j = 0; j < k; ++j) v[j] = slope * static_cast<double>(j) / static_cast<double>(k - 1);
    return time_augment(DiscretePath::equidistant(1.0, std::move(v), 1));
}

FeatureMatrix features_of(const std::vector<DiscretePath>& ps, std::size_t level) {
    std::vector<TruncatedTensor> s;
    for (const auto& p : ps) s.push_back(signature(p, level));
    return terminal_features(s, level);
}

}  // namespace

TEST(KernelSpec, GrowthCheckAndJson) {
    KernelSpec k = KernelSpec::constant(5);
    EXPECT_NO_THROW(k.validate());
    k.level_coeffs = {1.0, 1.0, 3.0};
    EXPECT_THROW(k.validate(), DomainError);  // 3 > 1 · (2!)^0
    k.growth_delta = 2.0;                      // bound 4 at k = 2
    EXPECT_NO_THROW(k.validate());
    k.check_growth = false;
    k.level_coeffs = {1.0, 100.0};
    EXPECT_NO_THROW(k.validate());
    k.level_coeffs = {1.0, -1.0};
    EXPECT_THROW(k.validate(), DomainError);

    KernelSpec j = KernelSpec::constant(3, 0.5);
    j.noise = 0.01;
    const auto r = KernelSpec::from_json(j.to_json());
    EXPECT_EQ(r.level_coeffs, j.level_coeffs);
    EXPECT_EQ(r.noise, 0.01);
    EXPECT_THROW(KernelSpec::from_json("{\"coefficients\": [1, 5], \"growth_m\": 1}"), DomainError);
    EXPECT_THROW(KernelSpec::from_json("not json"), IoError);
}

TEST(TruncatedKernel, UnitSignaturesAndSymmetry) {
    const auto one = TruncatedTensor::unit(2, 4);
    EXPECT_EQ(truncated_kernel(one, one, KernelSpec::constant(4)), 1.0);
    std::mt19937_64 gen(41);
    const auto x = signature(time_augment(wsig::testing::random_walk(gen, 20, 1)), 4);
    const auto y = signature(time_augment(wsig::testing::random_walk(gen, 20, 1)), 4);
    KernelSpec spec;
    spec.level_coeffs = {0.5, 1.0, 0.7, 0.3, 0.1};
    spec.growth_m = 2.0;
    EXPECT_EQ(truncated_kernel(x, y, spec), truncated_kernel(y, x, spec));
    EXPECT_GE(truncated_kernel(x, x, spec), 0.25);
    EXPECT_THROW(truncated_kernel(x.truncate(3), y, spec), DomainError);
}

TEST(TruncatedKernel, LinearPathsClosedForm) {
    for (auto [a, b] : {std::pair{0.5, -1.0}, std::pair{2.0, 1.5}, std::pair{0.0, 3.0}}) {
        const auto sx = signature(linear(a, 2), 8);
        const auto sy = signature(linear(b, 2), 8);
        const double c = 1.0 + a * b;
        EXPECT_NEAR(truncated_kernel(sx, sy, KernelSpec::constant(8)), linear_series(c, 8), 1e-10);
    }
}

TEST(GoursatKernel, ConstantPathGivesOne) {
    std::mt19937_64 gen(42);
    const auto x = wsig::testing::random_walk(gen, 30, 2);
    const auto c = DiscretePath::equidistant(1.0, std::vector<double>(40, 0.7), 2);
    EXPECT_EQ(goursat_kernel(x, c), 1.0);
    EXPECT_THROW(goursat_kernel(x, DiscretePath::equidistant(1.0, {0, 1}, 1)), DimensionError);
}

TEST(GoursatKernel, LinearPathsClosedForm) {
    // <S(x), S(y)> = Σ_n c^n/(n!)² for single segments; the 200-point grid subdivides them.
    for (auto [a, b] : {std::pair{0.5, -1.0}, std::pair{0.3, 0.2}, std::pair{1.0, 1.0}, std::pair{2.0, 1.5}}) {
        const double c = 1.0 + a * b;
        EXPECT_NEAR(goursat_kernel(linear(a, 200), linear(b, 200)), linear_series(c, 40), 1e-6);
    }
}

TEST(GoursatKernel, SymmetricAndAgreesWithTruncation) {
    std::mt19937_64 gen(43);
    for (int rep = 0; rep < 5; ++rep) {
        const auto x = short_path(gen, 40, 2, 1.0);
        const auto y = short_path(gen, 60, 2, 1.0);
        const double g = goursat_kernel(x, y);
        EXPECT_NEAR(g, goursat_kernel(y, x), 1e-10);
        const double t = truncated_kernel(signature(x, 12), signature(y, 12), KernelSpec::constant(12));
        EXPECT_LE(wsig::testing::rel_err(g, t), 1e-6);
    }
}

TEST(KernelGram, IsSymmetricPsdAndMatchesPairwise) {
    std::mt19937_64 gen(44);
    std::vector<DiscretePath> ps;
    for (int i = 0; i < 12; ++i) ps.push_back(time_augment(wsig::testing::random_walk(gen, 25, 1)));
    KernelSpec spec;
    spec.level_coeffs = {1.0, 0.8, 0.6, 0.4, 0.2};
    const auto f = features_of(ps, 4);
    const Eigen::MatrixXd g = kernel_gram(spec, f, f);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 12; ++j) {
            EXPECT_NEAR(g(i, j), g(j, i), 1e-14 * std::abs(g(i, j)));
            EXPECT_NEAR(g(i, j),
                        truncated_kernel(signature(ps[static_cast<std::size_t>(i)], 4),
                                         signature(ps[static_cast<std::size_t>(j)], 4), spec),
                        1e-12 * std::abs(g(i, j)) + 1e-14);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * g.trace());
}

TEST(GpPrior, ConstantSeriesAndSpanProperty) {
    std::mt19937_64 gen(45);
    std::vector<DiscretePath> ps;
    for (int i = 0; i < 6; ++i) ps.push_back(time_augment(wsig::testing::random_walk(gen, 20, 1)));
    const auto f = features_of(ps, 3);

    KernelSpec only0;
    only0.level_coeffs = {0.7, 0.0, 0.0, 0.0};
    const auto s0 = gp_sample_prior(only0, f, 5, 1);
    for (int s = 0; s < 5; ++s) {
        for (int i = 1; i < 6; ++i) EXPECT_EQ(s0(i, s), s0(0, s));
    }

    KernelSpec spec = KernelSpec::constant(3);
    const auto samples = gp_sample_prior(spec, f, 20, 3);
    EXPECT_EQ(samples, gp_sample_prior(spec, f, 20, 3));
    EXPECT_NE(samples, gp_sample_prior(spec, f, 20, 4));
    // Each sample is F z: residual of projecting onto the column space of F vanishes.
    const Eigen::MatrixXd fm = f.values;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fm);
    for (int s = 0; s < 20; ++s) {
        const Eigen::VectorXd col = samples.col(s);
        const Eigen::VectorXd proj = fm * qr.solve(col);
        EXPECT_LE((col - proj).norm(), 1e-10 * std::max(1.0, col.norm()));
    }
}

TEST(GpPrior, EmpiricalMomentsMatchKernel) {
    std::mt19937_64 gen(46);
    std::vector<DiscretePath> ps;
    for (int i = 0; i < 4; ++i) ps.push_back(time_augment(wsig::testing::random_walk(gen, 20, 1)));
    const auto f = features_of(ps, 3);
    const KernelSpec spec = KernelSpec::constant(3);
    const int n = 20000;
    const auto s = gp_sample_prior(spec, f, n, 11);
    const Eigen::MatrixXd k = kernel_gram(spec, f, f);
    for (int i = 0; i < 4; ++i) {
        const double mean = s.row(i).mean();
        EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(k(i, i) / n));
        for (int j = 0; j < 4; ++j) {
            const Eigen::ArrayXd prod = s.row(i).array() * s.row(j).array();
            const double cov = prod.mean();
            const double se = std::sqrt((prod - cov).square().sum() / (n - 1) / n);
            EXPECT_LT(std::abs(cov - k(i, j)), 3.5 * se);
        }
    }
}

TEST(GpPosterior, TwoPointClosedForm) {
    // Alphabet 1, level 1: features (1, x), kernel a0² + a1² x x'.
    FeatureMatrix train;
    train.alphabet = 1;
    train.level = 1;
    train.rows_per_sample = 1;
    train.values.resize(2, 2);
    train.values << 1.0, 0.5, 1.0, -1.0;
    train.row_weights = Eigen::VectorXd::Ones(2);
    FeatureMatrix test = train;
    test.values.resize(1, 2);
    test.values << 1.0, 2.0;
    test.row_weights = Eigen::VectorXd::Ones(1);
    KernelSpec spec;
    spec.level_coeffs = {1.0, 0.8};
    const double s2 = 0.1;
    Eigen::VectorXd y(2);
    y << 0.3, -0.7;

    auto kf = [](double a, double b) { return 1.0 + 0.64 * a * b; };
    const double k11 = kf(0.5, 0.5) + s2, k12 = kf(0.5, -1.0), k22 = kf(-1.0, -1.0) + s2;
    const double det = k11 * k22 - k12 * k12;
    const double i11 = k22 / det, i12 = -k12 / det, i22 = k11 / det;
    const double ks1 = kf(2.0, 0.5), ks2 = kf(2.0, -1.0);
    const double mean = ks1 * (i11 * 0.3 + i12 * -0.7) + ks2 * (i12 * 0.3 + i22 * -0.7);
    const double var = kf(2.0, 2.0) - (ks1 * (i11 * ks1 + i12 * ks2) + ks2 * (i12 * ks1 + i22 * ks2));

    const auto p = gp_fit_predict(train, y, spec, s2, test);
    EXPECT_NEAR(p.mean[0], mean, 1e-10);
    EXPECT_NEAR(p.variance[0], var, 1e-10);
}

TEST(GpPosterior, InterpolationZeroTargetsAndVarianceBound) {
    std::mt19937_64 gen(47);
    std::vector<DiscretePath> ps;
    for (int i = 0; i < 10; ++i) ps.push_back(time_augment(wsig::testing::random_walk(gen, 20, 1)));
    const auto f = features_of(ps, 4);
    const KernelSpec spec = KernelSpec::constant(4);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y[i] = std::sin(static_cast<double>(i));

    const auto self = gp_fit_predict(f, y, spec, 1e-12, f);
    for (int i = 0; i < 10; ++i) {
        EXPECT_NEAR(self.mean[i], y[i], 1e-5);
        EXPECT_LE(self.variance[i], 1e-6);
        EXPECT_GE(self.variance[i], 0.0);
    }

    std::vector<DiscretePath> qs;
    for (int i = 0; i < 5; ++i) qs.push_back(time_augment(wsig::testing::random_walk(gen, 20, 1)));
    const auto ft = features_of(qs, 4);
    const auto zero = gp_fit_predict(f, Eigen::VectorXd::Zero(10), spec, 0.1, ft);
    const Eigen::VectorXd prior = kernel_gram(spec, ft, ft).diagonal();
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(zero.mean[i], 0.0);
        EXPECT_LE(zero.variance[i], prior[i] + 1e-8);
    }
    EXPECT_THROW(gp_fit_predict(f, Eigen::VectorXd::Zero(3), spec, 0.1, ft), DimensionError);
}

TEST(GpPosterior, JitterRescuesSingularGram) {
    std::mt19937_64 gen(48);
    const auto p = time_augment(wsig::testing::random_walk(gen, 20, 1));
    const auto f = features_of({p, p, p}, 3);
    Eigen::VectorXd y(3);
    y << 1.0, 1.0, 1.0;
    const GpPosterior post(KernelSpec::constant(3), f, y, 0.0);
    EXPECT_GT(post.jitter(), 0.0);
    const auto pred = post.predict(f);
    EXPECT_NEAR(pred.mean[0], 1.0, 1e-4);
}

TEST(KernelCsv, Formats) {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.5, 0.5, 2.0;
    EXPECT_EQ(matrix_to_csv(m), "index,c0,c1\n0,1,0.5\n1,0.5,2\n");
    GpPrediction p{Eigen::VectorXd::Constant(1, 0.25), Eigen::VectorXd::Constant(1, 0.0)};
    EXPECT_EQ(posterior_to_csv(p), "index,mean,variance\n0,0.25,0\n");
}
