#include "wsig/signature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsig/errors.hpp"

namespace wsig {

DiscretePath::DiscretePath(std::vector<double> times, std::vector<double> values, std::size_t dim)
    : times_(std::move(times)), values_(std::move(values)), dim_(dim) {
    if (dim_ == 0) throw DomainError("path dimension must be positive");
    if (times_.size() < 2) throw DomainError("a path needs at least two grid points");
    if (values_.size() != times_.size() * dim_) {
        throw DimensionError("path has " + std::to_string(values_.size()) + " values for " +
                             std::to_string(times_.size()) + " times of dimension " +
                             std::to_string(dim_));
    }
    if (times_[0] != 0.0) throw DomainError("path grid must start at t = 0");
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) throw DomainError("path grid must be strictly increasing");
    }
}

DiscretePath DiscretePath::equidistant(double horizon, std::vector<double> values, std::size_t dim) {
    if (dim == 0 || values.size() % dim != 0) throw DimensionError("values not a multiple of dim");
    const std::size_t k_points = values.size() / dim;
    if (k_points < 2) throw DomainError("a path needs at least two grid points");
    std::vector<double> t(k_points);
    for (std::size_t k = 0; k < k_points; ++k) {
        t[k] = horizon * static_cast<double>(k) / static_cast<double>(k_points - 1);
    }
    return DiscretePath(std::move(t), std::move(values), dim);
}

bool DiscretePath::is_equidistant() const {
    const double h = times_.back() / static_cast<double>(times_.size() - 1);
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (std::abs((times_[k] - times_[k - 1]) - h) > 1e-12 * h) return false;
    }
    return true;
}

DiscretePath DiscretePath::slice(std::size_t first, std::size_t last) const {
    if (first >= last || last >= times_.size()) throw DomainError("invalid slice range");
    std::vector<double> t;
    std::vector<double> v;
    for (std::size_t k = first; k <= last; ++k) {
        t.push_back(times_[k] - times_[first]);
        auto p = point(k);
        v.insert(v.end(), p.begin(), p.end());
    }
    return DiscretePath(std::move(t), std::move(v), dim_);
}

DiscretePath time_augment(const DiscretePath& x) {
    const std::size_t d = x.dim();
    std::vector<double> v;
    v.reserve(x.size() * (d + 1));
    for (std::size_t k = 0; k < x.size(); ++k) {
        v.push_back(x.time(k));
        auto p = x.point(k);
        v.insert(v.end(), p.begin(), p.end());
    }
    return DiscretePath(std::vector<double>(x.times().begin(), x.times().end()), std::move(v), d + 1);
}

namespace {

void require_level(std::size_t level) {
    if (level < 1) throw DomainError("signature level must be at least 1");
}

TruncatedTensor increment_exp(const DiscretePath& x, std::size_t k, std::size_t level,
                              std::vector<double>& scratch) {
    const auto a = x.point(k);
    const auto b = x.point(k + 1);
    for (std::size_t i = 0; i < x.dim(); ++i) scratch[i] = b[i] - a[i];
    return exp_of_vector(scratch, level);
}

}  // namespace

TruncatedTensor signature(const DiscretePath& x, std::size_t level) {
    require_level(level);
    std::vector<double> delta(x.dim());
    TruncatedTensor s = increment_exp(x, 0, level, delta);
    for (std::size_t k = 1; k + 1 < x.size(); ++k) s = tensor_mul(s, increment_exp(x, k, level, delta));
    return s;
}

SignatureStream signature_stream(const DiscretePath& x, std::size_t level) {
    require_level(level);
    SignatureStream out;
    out.level = level;
    out.times.assign(x.times().begin(), x.times().end());
    out.terms.reserve(x.size());
    out.terms.push_back(TruncatedTensor::unit(x.dim(), level));
    std::vector<double> delta(x.dim());
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        out.terms.push_back(tensor_mul(out.terms.back(), increment_exp(x, k, level, delta)));
    }
    return out;
}

std::vector<double> stream_distances(const SignatureStream& s) {
    const std::size_t n = s.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const TruncatedTensor inv = tensor_inverse(s[j]);
        for (std::size_t k = j + 1; k < n; ++k) {
            const double d = homogeneous_norm(tensor_mul(inv, s[k]));
            dist[j * n + k] = d;
            dist[k * n + j] = d;
        }
    }
    return dist;
}

double max_partition_power_sum(std::span<const double> dist, std::size_t k_points, double p) {
    if (dist.size() != k_points * k_points) throw DimensionError("distance matrix has wrong size");
    // best[k]: maximal Σ d^p over partitions of {0..k} that contain 0 and k.
    std::vector<double> best(k_points, 0.0);
    for (std::size_t k = 1; k < k_points; ++k) {
        double b = 0.0;
        for (std::size_t j = 0; j < k; ++j) b = std::max(b, best[j] + std::pow(dist[j * k_points + k], p));
        best[k] = b;
    }
    return best.back();
}

double pvar_alpha_norm(const SignatureStream& s, double p, double alpha) {
    if (!(p >= 1.0)) throw DomainError("p-variation exponent must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("Hölder exponent must lie in (0,1)");
    const std::size_t n = s.size();
    const auto dist = stream_distances(s);

    double holder = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            holder = std::max(holder, dist[j * n + k] / std::pow(s.times[k] - s.times[j], alpha));
        }
    }
    const double variation = std::pow(max_partition_power_sum(dist, n, p), 1.0 / p);
    return holder + variation;
}

}  // namespace wsig
