#include "wsig/tensor_algebra.hpp"

#include <cmath>
#include <sstream>

#include "wsig/errors.hpp"

namespace wsig {

namespace {

constexpr double kUnitTolerance = 1e-12;

std::size_t ipow(std::size_t base, std::size_t e) {
    std::size_t r = 1;
    while (e-- > 0) r *= base;
    return r;
}

void require_scalar(const TruncatedTensor& a, double expected, const char* op) {
    if (std::abs(a.scalar() - expected) > kUnitTolerance) {
        std::ostringstream os;
        os << op << ": scalar component must be " << expected << ", got " << a.scalar();
        throw DomainError(os.str());
    }
}

void shuffle_into(const Word& i, const Word& j, long mult, WordSum& out) {
    if (i.empty()) {
        out[j] += mult;
        return;
    }
    if (j.empty()) {
        out[i] += mult;
        return;
    }
    // (I,a) ⧢ (J,b) = ((I ⧢ (J,b)), a) + (((I,a) ⧢ J), b)
    Word i_head(std::vector<int>(i.letters.begin(), i.letters.end() - 1));
    Word j_head(std::vector<int>(j.letters.begin(), j.letters.end() - 1));
    const int a = i.letters.back();
    const int b = j.letters.back();

    WordSum left;
    shuffle_into(i_head, j, 1, left);
    for (const auto& [w, c] : left) out[w.append(a)] += mult * c;

    WordSum right;
    shuffle_into(i, j_head, 1, right);
    for (const auto& [w, c] : right) out[w.append(b)] += mult * c;
}

}  // namespace

Word Word::append(int letter) const {
    Word w = *this;
    w.letters.push_back(letter);
    return w;
}

std::string Word::to_string() const {
    bool wide = false;
    for (int l : letters) wide |= l >= 10;
    std::string s;
    for (std::size_t k = 0; k < letters.size(); ++k) {
        if (wide && k > 0) s += '.';
        s += std::to_string(letters[k]);
    }
    return s;
}

Word Word::from_string(const std::string& s) {
    Word w;
    if (s.empty()) return w;
    if (s.find('.') != std::string::npos) {
        std::istringstream is(s);
        std::string part;
        while (std::getline(is, part, '.')) w.letters.push_back(std::stoi(part));
        return w;
    }
    for (char c : s) {
        if (c < '0' || c > '9') throw DomainError("invalid word string '" + s + "'");
        w.letters.push_back(c - '0');
    }
    return w;
}

std::size_t tensor_dimension(std::size_t alphabet, std::size_t level) {
    if (alphabet == 0) throw DomainError("alphabet size must be positive");
    if (alphabet == 1) return level + 1;
    return (ipow(alphabet, level + 1) - 1) / (alphabet - 1);
}

std::size_t level_offset(std::size_t alphabet, std::size_t n) {
    return n == 0 ? 0 : tensor_dimension(alphabet, n - 1);
}

TruncatedTensor::TruncatedTensor(std::size_t alphabet, std::size_t level)
    : alphabet_(alphabet), level_(level), coeffs_(tensor_dimension(alphabet, level), 0.0) {}

TruncatedTensor::TruncatedTensor(std::size_t alphabet, std::size_t level, std::vector<double> coeffs)
    : alphabet_(alphabet), level_(level), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != tensor_dimension(alphabet, level)) {
        throw DimensionError("coefficient count " + std::to_string(coeffs_.size()) +
                             " does not match T^" + std::to_string(level) + "(R^" +
                             std::to_string(alphabet) + ")");
    }
}

TruncatedTensor TruncatedTensor::unit(std::size_t alphabet, std::size_t level) {
    TruncatedTensor t(alphabet, level);
    t.coeffs_[0] = 1.0;
    return t;
}

TruncatedTensor TruncatedTensor::from_vector(std::span<const double> v, std::size_t level) {
    TruncatedTensor t(v.size(), level);
    if (level >= 1) {
        auto l1 = t.level_coeffs(1);
        std::copy(v.begin(), v.end(), l1.begin());
    }
    return t;
}

std::span<const double> TruncatedTensor::level_coeffs(std::size_t n) const {
    if (n > level_) throw DimensionError("level " + std::to_string(n) + " above truncation");
    return std::span<const double>(coeffs_).subspan(level_offset(alphabet_, n), ipow(alphabet_, n));
}

std::span<double> TruncatedTensor::level_coeffs(std::size_t n) {
    if (n > level_) throw DimensionError("level " + std::to_string(n) + " above truncation");
    return std::span<double>(coeffs_).subspan(level_offset(alphabet_, n), ipow(alphabet_, n));
}

std::size_t TruncatedTensor::index_of(const Word& w) const {
    if (w.size() > level_) {
        throw DimensionError("word of length " + std::to_string(w.size()) + " exceeds level " +
                             std::to_string(level_));
    }
    std::size_t idx = 0;
    for (int l : w.letters) {
        if (l < 0 || static_cast<std::size_t>(l) >= alphabet_) {
            throw DomainError("letter " + std::to_string(l) + " outside alphabet of size " +
                              std::to_string(alphabet_));
        }
        idx = idx * alphabet_ + static_cast<std::size_t>(l);
    }
    return level_offset(alphabet_, w.size()) + idx;
}

Word TruncatedTensor::word_at(std::size_t index) const {
    if (index >= coeffs_.size()) throw DimensionError("index out of range");
    std::size_t n = 0;
    while (index >= level_offset(alphabet_, n + 1)) ++n;
    std::size_t rem = index - level_offset(alphabet_, n);
    std::vector<int> letters(n);
    for (std::size_t k = n; k-- > 0;) {
        letters[k] = static_cast<int>(rem % alphabet_);
        rem /= alphabet_;
    }
    return Word(std::move(letters));
}

double TruncatedTensor::pair(const WordSum& s) const {
    double acc = 0.0;
    for (const auto& [w, c] : s) acc += static_cast<double>(c) * (*this)[w];
    return acc;
}

void TruncatedTensor::check_same_shape(const TruncatedTensor& o) const {
    if (alphabet_ != o.alphabet_ || level_ != o.level_) {
        throw DimensionError("tensor shape mismatch: T^" + std::to_string(level_) + "(R^" +
                             std::to_string(alphabet_) + ") vs T^" + std::to_string(o.level_) +
                             "(R^" + std::to_string(o.alphabet_) + ")");
    }
}

TruncatedTensor& TruncatedTensor::operator+=(const TruncatedTensor& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

TruncatedTensor& TruncatedTensor::operator-=(const TruncatedTensor& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

TruncatedTensor& TruncatedTensor::operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
}

TruncatedTensor TruncatedTensor::truncate(std::size_t level) const {
    if (level > level_) throw DimensionError("cannot truncate to a higher level");
    std::vector<double> c(coeffs_.begin(),
                          coeffs_.begin() + static_cast<std::ptrdiff_t>(tensor_dimension(alphabet_, level)));
    return TruncatedTensor(alphabet_, level, std::move(c));
}

TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b) {
    if (a.alphabet() != b.alphabet() || a.level() != b.level()) {
        throw DimensionError("tensor_mul: operands live in different truncated algebras");
    }
    const std::size_t m = a.alphabet();
    const std::size_t depth = a.level();
    TruncatedTensor c(m, depth);
    for (std::size_t n = 0; n <= depth; ++n) {
        auto out = c.level_coeffs(n);
        for (std::size_t k = 0; k <= n; ++k) {
            auto left = a.level_coeffs(n - k);
            auto right = b.level_coeffs(k);
            const std::size_t stride = right.size();
            for (std::size_t i = 0; i < left.size(); ++i) {
                const double li = left[i];
                if (li == 0.0) continue;
                double* dst = out.data() + i * stride;
                for (std::size_t j = 0; j < stride; ++j) dst[j] += li * right[j];
            }
        }
    }
    return c;
}

TruncatedTensor tensor_exp(const TruncatedTensor& b) {
    require_scalar(b, 0.0, "tensor_exp");
    TruncatedTensor result = TruncatedTensor::unit(b.alphabet(), b.level());
    TruncatedTensor power = b;
    for (std::size_t n = 1; n <= b.level(); ++n) {
        if (n > 1) power = tensor_mul(power, b) * (1.0 / static_cast<double>(n));
        result += power;
    }
    return result;
}

TruncatedTensor tensor_log(const TruncatedTensor& a) {
    require_scalar(a, 1.0, "tensor_log");
    TruncatedTensor x = a;
    x.coeffs()[0] = 0.0;
    TruncatedTensor result = TruncatedTensor::zero(a.alphabet(), a.level());
    TruncatedTensor power = x;
    for (std::size_t n = 1; n <= a.level(); ++n) {
        if (n > 1) power = tensor_mul(power, x);
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        result += power * (sign / static_cast<double>(n));
    }
    return result;
}

TruncatedTensor tensor_inverse(const TruncatedTensor& g) {
    return tensor_exp(-tensor_log(g));
}

TruncatedTensor exp_of_vector(std::span<const double> v, std::size_t level) {
    const std::size_t m = v.size();
    TruncatedTensor t = TruncatedTensor::unit(m, level);
    for (std::size_t n = 1; n <= level; ++n) {
        auto prev = t.level_coeffs(n - 1);
        auto cur = t.level_coeffs(n);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < prev.size(); ++i) {
            for (std::size_t j = 0; j < m; ++j) cur[i * m + j] = prev[i] * v[j] * inv_n;
        }
    }
    return t;
}

TruncatedTensor dilate(const TruncatedTensor& g, double lambda) {
    TruncatedTensor out = g;
    double scale = 1.0;
    for (std::size_t n = 1; n <= g.level(); ++n) {
        scale *= lambda;
        for (double& c : out.level_coeffs(n)) c *= scale;
    }
    return out;
}

WordSum shuffle(const Word& i, const Word& j) {
    WordSum out;
    shuffle_into(i, j, 1, out);
    return out;
}

double homogeneous_norm(const TruncatedTensor& g) {
    require_scalar(g, 1.0, "homogeneous_norm");
    double best = 0.0;
    double factorial = 1.0;
    for (std::size_t n = 1; n <= g.level(); ++n) {
        factorial *= static_cast<double>(n);
        double sq = 0.0;
        for (double c : g.level_coeffs(n)) sq += c * c;
        const double v = std::pow(factorial * std::sqrt(sq), 1.0 / static_cast<double>(n));
        best = std::max(best, v);
    }
    return best;
}

}  // namespace wsig
