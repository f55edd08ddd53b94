#pragma once

#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "subset.hpp"

namespace wks {

// Exact C_S is stored for every S in [k]. C_S grows like alpha_{max S},
// which is doubly exponential in max S, so the full table stops fitting in
// memory well before the 2^k cell count matters.
inline constexpr int max_constant_table_k = 16;

// alpha_1..alpha_k from alpha_m = alpha_{m-1}^2 + 3 alpha_{m-1} + 1,
// alpha_0 = 0. Index 0 holds alpha_0.
inline std::vector<BigInt> alpha_sequence(int k)
{
    detail::require(k >= 0 && k <= max_servers, "alpha_sequence: k must be in [0, 20]");
    std::vector<BigInt> alpha(k + 1);
    alpha[0] = 0;
    for (int m = 1; m <= k; ++m)
        alpha[m] = alpha[m - 1] * alpha[m - 1] + 3 * alpha[m - 1] + 1;
    return alpha;
}

class ConstantTable {
public:
    ConstantTable() = default;
    ConstantTable(int k, std::vector<BigInt> c, std::vector<BigInt> alpha)
        : k_(k), c_(std::move(c)), alpha_(std::move(alpha))
    {
        detail::require(k_ >= 1 && k_ <= max_constant_table_k, "constant table: k out of range");
        detail::require(c_.size() == (std::size_t{1} << k_), "constant table: wrong number of cells");
        detail::require(alpha_.size() == static_cast<std::size_t>(k_) + 1,
                        "constant table: alpha must hold alpha_0..alpha_k");
    }

    int k() const noexcept { return k_; }

    const BigInt& c(mask_t s) const { return c_.at(s); }
    const std::vector<BigInt>& cells() const noexcept { return c_; }

    // alpha(0) = 0, alpha(1) = 1, alpha(2) = 5, ...
    const BigInt& alpha(int m) const { return alpha_.at(static_cast<std::size_t>(m)); }
    const std::vector<BigInt>& alphas() const noexcept { return alpha_; }

    template <class Real>
    Real c_as(mask_t s) const
    {
        return from_integer<Real>(c(s));
    }

    friend bool operator==(const ConstantTable&, const ConstantTable&) = default;

private:
    int k_ = 0;
    std::vector<BigInt> c_;
    std::vector<BigInt> alpha_;
};

// C_empty = 1, C_S = 1 + sum_{j in S} C_{S\{j} u [j-1]}. Each referenced set
// clears bit j and sets only lower bits, so it is numerically smaller than
// S and increasing mask order is a valid evaluation order.
inline ConstantTable build_constants(int k)
{
    if (k < 1 || k > max_constant_table_k)
        throw InvalidArgument("build_constants: k must be in [1, " +
                              std::to_string(max_constant_table_k) + "]");
    const mask_t n = mask_t{1} << k;
    std::vector<BigInt> c(n);
    c[0] = 1;
    for (mask_t s = 1; s < n; ++s) {
        BigInt sum = 1;
        for (int j = 1; j <= k; ++j) {
            if (has_element(s, j))
                sum += c[(s & ~element_bit(j)) | full_mask(j - 1)];
        }
        c[s] = std::move(sum);
    }
    return ConstantTable(k, std::move(c), alpha_sequence(k));
}

struct ConstantIdentityReport {
    bool product_rule = true;   // C_S = (alpha_{m-1}+2) C_{S\{m}}, m = max S
    bool alpha_sum = true;      // alpha_m = sum_j C_{[m]\{j}} = C_{[m]} - 1
    bool strict_decrease = true; // C_{[m]\{1}} > ... > C_{[m]\{m}}
    std::vector<std::string> failures;

    bool ok() const noexcept { return product_rule && alpha_sum && strict_decrease; }
};

inline ConstantIdentityReport check_constant_identities(const ConstantTable& t)
{
    ConstantIdentityReport r;
    const int k = t.k();
    for (mask_t s = 1; s < (mask_t{1} << k); ++s) {
        int m = highest_element(s);
        if (t.c(s) != (t.alpha(m - 1) + 2) * t.c(s & ~element_bit(m))) {
            r.product_rule = false;
            r.failures.push_back("product rule fails at S=" + to_string(s));
        }
    }
    for (int m = 1; m <= k; ++m) {
        const mask_t top = full_mask(m);
        BigInt sum = 0;
        for (int j = 1; j <= m; ++j)
            sum += t.c(top & ~element_bit(j));
        if (sum != t.alpha(m) || t.c(top) - 1 != t.alpha(m)) {
            r.alpha_sum = false;
            r.failures.push_back("alpha sum fails at m=" + std::to_string(m));
        }
        for (int j = 1; j < m; ++j) {
            if (!(t.c(top & ~element_bit(j)) > t.c(top & ~element_bit(j + 1)))) {
                r.strict_decrease = false;
                r.failures.push_back("C_[m]\\{j} not decreasing at m=" + std::to_string(m) +
                                     ", j=" + std::to_string(j));
            }
        }
    }
    return r;
}

// alpha_k < 1.6^(2^k), checked exactly as alpha_k * 5^(2^k) < 8^(2^k).
inline bool alpha_growth_bound(int k)
{
    detail::require(k >= 1 && k <= max_servers, "alpha_growth_bound: k must be in [1, 20]");
    const unsigned e = 1u << k;
    BigInt alpha = alpha_sequence(k).back();
    return alpha * mp::pow(BigInt(5), e) < mp::pow(BigInt(8), e);
}

} // namespace wks
