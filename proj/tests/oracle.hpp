#pragma once

// Independent reference computations used only by the tests.

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include <wks/numeric.hpp>
#include <wks/subset.hpp>

namespace oracle {

using wks::BigInt;
using wks::mask_t;

// C_S straight from its recursive definition on explicit sets, memoized.
inline BigInt constant(const std::set<int>& s, std::map<std::set<int>, BigInt>& memo)
{
    if (s.empty())
        return 1;
    if (auto it = memo.find(s); it != memo.end())
        return it->second;
    BigInt sum = 1;
    for (int j : s) {
        std::set<int> next = s;
        next.erase(j);
        for (int l = 1; l < j; ++l)
            next.insert(l);
        sum += constant(next, memo);
    }
    return memo[s] = sum;
}

inline std::set<int> as_set(mask_t m)
{
    std::set<int> s;
    for (int i = 1; i <= 20; ++i)
        if (m & (mask_t{1} << (i - 1)))
            s.insert(i);
    return s;
}

// Dense Gaussian elimination with partial pivoting; a is row-major n x n.
template <class Real>
std::vector<Real> dense_solve(std::vector<Real> a, std::vector<Real> b)
{
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (wks::abs_value(a[r * n + col]) > wks::abs_value(a[piv * n + col]))
                piv = r;
        if (a[piv * n + col] == Real(0))
            throw std::runtime_error("dense_solve: singular");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            Real factor = a[r * n + col] / a[col * n + col];
            if (factor == Real(0))
                continue;
            for (std::size_t c = col; c < n; ++c)
                a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<Real> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Real s = b[i];
        for (std::size_t c = i + 1; c < n; ++c)
            s -= a[i * n + c] * x[c];
        x[i] = s / a[i * n + i];
    }
    return x;
}

// phi for all 2^k sets from the single global system
//   p_i (phi_{S+i} - phi_S) = 1 + sum_{j in S} p_j (phi_S - phi_{S-j}),
// i the smallest server outside S, phi_{} = 0. Unknown index = mask - 1.
template <class Real>
std::vector<Real> global_phi(const std::vector<Real>& p)
{
    const int k = static_cast<int>(p.size());
    const mask_t all = (mask_t{1} << k) - 1;
    const std::size_t n = all;
    std::vector<Real> a(n * n, Real(0)), b(n, Real(1));
    auto add = [&](std::size_t row, mask_t set, const Real& v) {
        if (set != 0)
            a[row * n + (set - 1)] += v;
    };
    for (mask_t s = 0; s < all; ++s) {
        const std::size_t row = s;
        const int i = wks::lowest_missing(s);
        const Real& pi = p[static_cast<std::size_t>(i - 1)];
        add(row, s | wks::element_bit(i), pi);
        add(row, s, -pi);
        for (int j = 1; j <= k; ++j)
            if (wks::has_element(s, j)) {
                const Real& pj = p[static_cast<std::size_t>(j - 1)];
                add(row, s, -pj);
                add(row, s & ~wks::element_bit(j), pj);
            }
    }
    auto x = dense_solve(std::move(a), std::move(b));
    std::vector<Real> phi(n + 1, Real(0));
    for (std::size_t s = 1; s <= n; ++s)
        phi[s] = x[s - 1];
    return phi;
}

} // namespace oracle
