#include "wsig/weighted_paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "wsig/errors.hpp"
#include "wsig/io.hpp"

namespace wsig {

const char* to_string(NormKind k) {
    switch (k) {
        case NormKind::holder_path: return "holder_path";
        case NormKind::cc_pvar_alpha: return "cc_pvar_alpha";
    }
    return "unknown";
}

NormKind norm_kind_from_string(const std::string& s) {
    if (s == "holder_path") return NormKind::holder_path;
    if (s == "cc_pvar_alpha") return NormKind::cc_pvar_alpha;
    throw DomainError("unknown norm kind '" + s + "'");
}

void WeightSpec::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("weight: alpha must lie in (0,1)");
    if (!(p >= 1.0)) throw DomainError("weight: p must be >= 1");
    if (!(beta > 0.0)) throw DomainError("weight: beta must be > 0");
    if (!(gamma > 1.0)) throw DomainError("weight: gamma must be > 1");
    if (norm_kind == NormKind::cc_pvar_alpha && !(p * alpha < 1.0)) {
        throw DomainError("weight: p * alpha must be < 1 for the (p,alpha)-norm");
    }
}

std::size_t WeightSpec::lift_level() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(p)));
}

void PathBatch::validate() const {
    if (paths.empty()) throw DomainError("empty path batch");
    const auto t0 = paths.front().times();
    for (const auto& x : paths) {
        if (x.dim() != paths.front().dim()) throw DimensionError("batch paths differ in dimension");
        if (!std::equal(t0.begin(), t0.end(), x.times().begin(), x.times().end())) {
            throw DimensionError("batch paths do not share a time grid");
        }
    }
    if (!weights.empty()) {
        if (weights.size() != paths.size()) throw DimensionError("weight cache size mismatch");
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("cached weights must be positive");
        }
    }
}

PathBatch PathBatch::subset(std::span<const std::size_t> indices) const {
    PathBatch out;
    out.paths.reserve(indices.size());
    for (std::size_t i : indices) out.paths.push_back(paths.at(i));
    if (has_weights()) {
        for (std::size_t i : indices) out.weights.push_back(weights[i]);
    }
    return out;
}

PathBatch sample_bm(std::size_t n_paths, std::size_t k_points, double horizon, std::uint64_t seed,
                    std::size_t dim) {
    if (n_paths < 1) throw DomainError("sample_bm: need at least one path");
    if (k_points < 2) throw DomainError("sample_bm: need at least two grid points");
    if (!(horizon > 0.0)) throw DomainError("sample_bm: horizon must be positive");
    if (dim < 1) throw DomainError("sample_bm: dimension must be positive");

    const double step_sd = std::sqrt(horizon / static_cast<double>(k_points - 1));
    PathBatch batch;
    batch.paths.reserve(n_paths);
    for (std::size_t m = 0; m < n_paths; ++m) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(std::uint64_t{m} >> 32)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> normal(0.0, step_sd);
        std::vector<double> values(k_points * dim, 0.0);
        for (std::size_t k = 1; k < k_points; ++k) {
            for (std::size_t i = 0; i < dim; ++i) {
                values[k * dim + i] = values[(k - 1) * dim + i] + normal(gen);
            }
        }
        batch.paths.push_back(DiscretePath::equidistant(horizon, std::move(values), dim));
    }
    return batch;
}

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sq);
}

}  // namespace

double holder_seminorm(const DiscretePath& x, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("holder_seminorm: alpha must lie in (0,1]");
    double best = 0.0;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
        for (std::size_t k = j + 1; k < x.size(); ++k) {
            const double r = distance(x.point(k), x.point(j)) / std::pow(x.time(k) - x.time(j), alpha);
            best = std::max(best, r);
        }
    }
    return best;
}

double p_variation(const DiscretePath& x, double p) {
    if (!(p >= 1.0)) throw DomainError("p_variation: p must be >= 1");
    const std::size_t n = x.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) dist[j * n + k] = dist[k * n + j] = distance(x.point(j), x.point(k));
    }
    return std::pow(max_partition_power_sum(dist, n, p), 1.0 / p);
}

double weight_from_norm(double r, const WeightSpec& w) {
    return std::exp(w.beta * std::pow(r, w.gamma));
}

double weight_norm(const DiscretePath& x, const WeightSpec& w, const SignatureStream* stream) {
    switch (w.norm_kind) {
        case NormKind::holder_path: {
            double origin = 0.0;
            for (double v : x.point(0)) origin += v * v;
            return std::sqrt(origin) + holder_seminorm(x, w.alpha);
        }
        case NormKind::cc_pvar_alpha: {
            if (stream == nullptr) throw DomainError("weight_of: (p,alpha)-norm requires a signature stream");
            const std::size_t lift = w.lift_level();
            if (stream->level < lift) {
                throw DomainError("weight_of: stream level " + std::to_string(stream->level) +
                                  " below lift level " + std::to_string(lift));
            }
            if (stream->level == lift) return pvar_alpha_norm(*stream, w.p, w.alpha);
            SignatureStream lifted;
            lifted.level = lift;
            lifted.times = stream->times;
            lifted.terms.reserve(stream->size());
            for (const auto& s : stream->terms) lifted.terms.push_back(s.truncate(lift));
            return pvar_alpha_norm(lifted, w.p, w.alpha);
        }
    }
    throw DomainError("unknown norm kind");
}

double weight_of(const DiscretePath& x, const WeightSpec& w, const SignatureStream* stream) {
    return weight_from_norm(weight_norm(x, w, stream), w);
}

void cache_weights(PathBatch& batch, const WeightSpec& w, const std::vector<SignatureStream>* streams) {
    w.validate();
    batch.validate();
    if (streams != nullptr && streams->size() != batch.size()) {
        throw DimensionError("cache_weights: one stream per path required");
    }
    batch.weights.resize(batch.size());
    for (std::size_t m = 0; m < batch.size(); ++m) {
        if (w.norm_kind == NormKind::cc_pvar_alpha && streams == nullptr) {
            const auto s = signature_stream(time_augment(batch.paths[m]), w.lift_level());
            batch.weights[m] = weight_of(batch.paths[m], w, &s);
        } else {
            batch.weights[m] = weight_of(batch.paths[m], w, streams ? &(*streams)[m] : nullptr);
        }
    }
}

std::vector<double> evaluate_targets(const PathBatch& batch, const PathFunctional& f) {
    batch.validate();
    const std::size_t k_points = batch.grid_size();
    std::vector<double> out(batch.size() * k_points);
    for (std::size_t m = 0; m < batch.size(); ++m) {
        for (std::size_t k = 0; k < k_points; ++k) out[m * k_points + k] = f(k, batch.paths[m]);
    }
    return out;
}

void save_paths_csv(const PathBatch& batch, const std::filesystem::path& path) {
    batch.validate();
    std::string out = "sample,t";
    for (std::size_t i = 1; i <= batch.dim(); ++i) out += ",x" + std::to_string(i);
    out += '\n';
    for (std::size_t m = 0; m < batch.size(); ++m) {
        const auto& x = batch.paths[m];
        for (std::size_t k = 0; k < x.size(); ++k) {
            out += std::to_string(m);
            out += ',';
            out += io::format_double(x.time(k));
            for (double v : x.point(k)) {
                out += ',';
                out += io::format_double(v);
            }
            out += '\n';
        }
    }
    io::write_text_file(path, out);
}

PathBatch load_paths_csv(const std::filesystem::path& path) {
    const auto table = io::read_csv(path);
    if (table.header.size() < 3 || table.header[0] != "sample" || table.header[1] != "t") {
        throw IoError("'" + path.string() + "': expected header sample,t,x1,...");
    }
    const std::size_t dim = table.header.size() - 2;
    for (std::size_t i = 0; i < dim; ++i) {
        if (table.header[i + 2] != "x" + std::to_string(i + 1)) {
            throw IoError("'" + path.string() + "': unexpected column '" + table.header[i + 2] + "'");
        }
    }
    std::map<long, std::pair<std::vector<double>, std::vector<double>>> grouped;
    std::vector<long> order;
    for (const auto& row : table.rows) {
        const long id = std::stol(row[0]);
        auto [it, inserted] = grouped.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.first.push_back(io::parse_double(row[1]));
        for (std::size_t i = 0; i < dim; ++i) it->second.second.push_back(io::parse_double(row[2 + i]));
    }
    PathBatch batch;
    try {
        for (long id : order) {
            auto& [t, v] = grouped[id];
            batch.paths.emplace_back(std::move(t), std::move(v), dim);
        }
        batch.validate();
    } catch (const std::logic_error& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    } catch (const std::runtime_error& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
    return batch;
}

}  // namespace wsig
