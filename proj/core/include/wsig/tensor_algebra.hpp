#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wsig {

/// A multi-index (i_1, ..., i_n) over the alphabet {0, ..., m-1}. The empty word
/// indexes the scalar component.
struct Word {
    std::vector<int> letters;

    Word() = default;
    Word(std::initializer_list<int> l) : letters(l) {}
    explicit Word(std::vector<int> l) : letters(std::move(l)) {}

    std::size_t size() const noexcept { return letters.size(); }
    bool empty() const noexcept { return letters.empty(); }
    int operator[](std::size_t i) const { return letters[i]; }

    /// Concatenation (I, a).
    Word append(int letter) const;
    /// Letters as a digit string, e.g. (1,0) -> "10". Letters >= 10 are
    /// separated by '.'.
    std::string to_string() const;
    static Word from_string(const std::string& s);

    auto operator<=>(const Word&) const = default;
    bool operator==(const Word&) const = default;
};

/// Formal sum of words with positive integer multiplicities.
using WordSum = std::map<Word, long>;

/// Number of words of length <= level over an alphabet of the given size.
std::size_t tensor_dimension(std::size_t alphabet, std::size_t level);
/// Flat index of the first word of length n (level-major layout).
std::size_t level_offset(std::size_t alphabet, std::size_t n);

/// Element of the truncated tensor algebra T^N(R^m), stored densely level by
/// level. Within a level, words are ordered lexicographically (first letter
/// most significant).
class TruncatedTensor {
public:
    TruncatedTensor(std::size_t alphabet, std::size_t level);
    TruncatedTensor(std::size_t alphabet, std::size_t level, std::vector<double> coeffs);

    static TruncatedTensor zero(std::size_t alphabet, std::size_t level) {
        return TruncatedTensor(alphabet, level);
    }
    static TruncatedTensor unit(std::size_t alphabet, std::size_t level);
    /// The element with `v` at level one and zero elsewhere.
    static TruncatedTensor from_vector(std::span<const double> v, std::size_t level);

    std::size_t alphabet() const noexcept { return alphabet_; }
    std::size_t level() const noexcept { return level_; }
    std::size_t size() const noexcept { return coeffs_.size(); }

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::span<double> coeffs() noexcept { return coeffs_; }
    std::span<const double> level_coeffs(std::size_t n) const;
    std::span<double> level_coeffs(std::size_t n);

    double scalar() const noexcept { return coeffs_[0]; }

    std::size_t index_of(const Word& w) const;
    Word word_at(std::size_t index) const;

    /// <e_I, a>
    double operator[](const Word& w) const { return coeffs_[index_of(w)]; }
    double& operator[](const Word& w) { return coeffs_[index_of(w)]; }

    /// <e_I ⧢ e_J, a>, the linear extension of the coordinate map to word sums.
    double pair(const WordSum& s) const;

    TruncatedTensor& operator+=(const TruncatedTensor& o);
    TruncatedTensor& operator-=(const TruncatedTensor& o);
    TruncatedTensor& operator*=(double s);

    friend TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor& b) { return a += b; }
    friend TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor& b) { return a -= b; }
    friend TruncatedTensor operator*(TruncatedTensor a, double s) { return a *= s; }
    friend TruncatedTensor operator*(double s, TruncatedTensor a) { return a *= s; }
    friend TruncatedTensor operator-(TruncatedTensor a) { return a *= -1.0; }

    /// Copy truncated to a lower level (a prefix of the coefficient table).
    TruncatedTensor truncate(std::size_t level) const;

private:
    void check_same_shape(const TruncatedTensor& o) const;

    std::size_t alphabet_;
    std::size_t level_;
    std::vector<double> coeffs_;
};

/// c^(n) = sum_k a^(n-k) ⊗ b^(k), truncated at the common level.
TruncatedTensor tensor_mul(const TruncatedTensor& a, const TruncatedTensor& b);
/// 1 + sum_{n=1}^N b^{⊗n}/n!; b must have zero scalar part.
TruncatedTensor tensor_exp(const TruncatedTensor& b);
/// sum_{n=1}^N (-1)^{n+1}/n (a-1)^{⊗n}; a must have unit scalar part.
TruncatedTensor tensor_log(const TruncatedTensor& a);
/// Group inverse exp(-log(g)).
TruncatedTensor tensor_inverse(const TruncatedTensor& g);
/// exp of a level-one vector, computed directly as v^{⊗n}/n!.
TruncatedTensor exp_of_vector(std::span<const double> v, std::size_t level);

/// Dilation δ_λ: level n is multiplied by λ^n.
TruncatedTensor dilate(const TruncatedTensor& g, double lambda);

/// Shuffle product of two words; total multiplicity is binomial(|I|+|J|, |I|).
WordSum shuffle(const Word& i, const Word& j);

/// Homogeneous norm max_{1<=n<=N} (n! ‖g^(n)‖)^{1/n}, our stand-in for the
/// Carnot–Carathéodory norm on G^N. Requires a unit scalar component.
double homogeneous_norm(const TruncatedTensor& g);

}  // namespace wsig
