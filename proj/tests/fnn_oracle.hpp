#pragma once

#include <cstddef>
#include <vector>

#include "wsig/fnn.hpp"

namespace wsig::testing {

inline double relu(double z) { return z > 0.0 ? z : 0.0; }

/// Straight transcription of the network formula, one (n, k) at a time.
struct Oracle {
    const FnnParams& th;

    double phi(std::size_t ni, double t) const {
        const auto& net = th.inner[ni];
        double s = net.v0;
        for (std::size_t h = 0; h < net.width(); ++h) s += net.v[h] * relu(net.w[h] * t + net.u[h]);
        return s;
    }

    double z(std::size_t n, std::size_t k, const DiscretePath& x) const {
        double s = th.a[n] * x.time(k) + th.b[n];
        for (std::size_t i = 0; i < th.input_dim; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                s += (x.time(j + 1) - x.time(j)) * phi(n * th.input_dim + i, x.time(j)) * x.value(j, i);
            }
            if (th.use_spatial) s += th.c[n * th.input_dim + i] * x.value(k, i);
        }
        return s;
    }

    double out(std::size_t k, const DiscretePath& x) const {
        double s = 0.0;
        for (std::size_t n = 0; n < th.neurons(); ++n) s += th.y[n] * relu(z(n, k, x));
        return s;
    }

    /// Sign pattern of every ReLU argument met on the batch.
    std::vector<int> pattern(const PathBatch& b) const {
        std::vector<int> p;
        for (std::size_t ni = 0; ni < th.inner.size(); ++ni) {
            const auto& net = th.inner[ni];
            for (std::size_t j = 0; j < b.grid_size(); ++j) {
                for (std::size_t h = 0; h < net.width(); ++h) p.push_back(net.w[h] * b.times()[j] + net.u[h] > 0.0);
            }
        }
        for (const auto& x : b.paths) {
            for (std::size_t n = 0; n < th.neurons(); ++n) {
                for (std::size_t k = 0; k < x.size(); ++k) p.push_back(z(n, k, x) > 0.0);
            }
        }
        return p;
    }
};

}  // namespace wsig::testing
