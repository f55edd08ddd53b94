#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "lattice_elimination.hpp"
#include "numeric.hpp"
#include "subset.hpp"

namespace wks {

// Unnormalized move rates p_1..p_k. The algorithm moves server i with
// probability p_i / sum_j p_j.
template <class Real = double>
class ProbVector {
public:
    ProbVector() = default;

    explicit ProbVector(std::vector<Real> p) : p_(std::move(p))
    {
        detail::require(!p_.empty() && p_.size() <= static_cast<std::size_t>(max_servers),
                        "probability vector must have 1..20 entries");
        for (const Real& x : p_)
            detail::require(x > 0, "probability entries must be strictly positive");
    }

    int k() const noexcept { return static_cast<int>(p_.size()); }

    // 1-based: rate(1) = p_1.
    const Real& rate(int i) const { return p_.at(static_cast<std::size_t>(i - 1)); }
    const std::vector<Real>& values() const noexcept { return p_; }

    // p_1 >= p_2 >= ... >= p_k
    bool monotone() const
    {
        return std::is_sorted(p_.begin(), p_.end(), [](const Real& a, const Real& b) { return a > b; });
    }

    Real total() const
    {
        Real s(0);
        for (const Real& x : p_)
            s += x;
        return s;
    }

    ProbVector scaled(const Real& c) const
    {
        std::vector<Real> out = p_;
        for (Real& x : out)
            x *= c;
        return ProbVector(std::move(out));
    }

    // Copy with p_k replaced.
    ProbVector with_last(const Real& pk) const
    {
        std::vector<Real> out = p_;
        out.back() = pk;
        return ProbVector(std::move(out));
    }

    friend bool operator==(const ProbVector&, const ProbVector&) = default;

private:
    std::vector<Real> p_;
};

enum class Backend { direct, gauss_seidel };

inline const char* to_string(Backend b) { return b == Backend::direct ? "direct" : "gauss_seidel"; }

// phi_S(p), f_S(p) and the derived currents for one (k, p).
//
// f is keyed by the full set S; f_S belongs to the level of max S. f[0] is
// unused and kept at zero.
template <class Real = double>
class PotentialTable {
public:
    PotentialTable(ProbVector<Real> p, std::vector<Real> phi, std::vector<Real> f, Backend backend)
        : p_(std::move(p)), phi_(std::move(phi)), f_(std::move(f)), backend_(backend)
    {
    }

    int k() const noexcept { return p_.k(); }
    const ProbVector<Real>& p() const noexcept { return p_; }
    Backend backend() const noexcept { return backend_; }

    const Real& phi(mask_t s) const { return phi_.at(s); }
    const Real& f(mask_t s) const { return f_.at(s); }
    const std::vector<Real>& phi_values() const noexcept { return phi_; }
    const std::vector<Real>& f_values() const noexcept { return f_; }

    // Max defect of the defining equations, relative to 1 + |f_S| per equation.
    const Real& residual() const noexcept { return residual_; }
    void set_residual(Real r) { residual_ = std::move(r); }

    // Total Gauss-Seidel sweeps over all levels (0 for the direct backend).
    long sweeps() const noexcept { return sweeps_; }
    void set_sweeps(long n) { sweeps_ = n; }

    // I(S\{i} -> S) = p_i (phi_S - phi_{S\{i}}).
    Real current(mask_t to, int i) const
    {
        if (i < 1 || i > k() || !has_element(to, i))
            throw InvalidArgument("current: server " + std::to_string(i) + " is not in " + wks::to_string(to));
        return p_.rate(i) * (phi_[to] - phi_[to & ~element_bit(i)]);
    }

    // I(S -> S u {i}) for i not in S.
    Real current_up(mask_t from, int i) const
    {
        if (i < 1 || i > k() || has_element(from, i))
            throw InvalidArgument("current_up: server " + std::to_string(i) + " is already in " +
                                  wks::to_string(from));
        return current(from | element_bit(i), i);
    }

private:
    ProbVector<Real> p_;
    std::vector<Real> phi_;
    std::vector<Real> f_;
    Backend backend_;
    Real residual_{0};
    long sweeps_ = 0;
};

namespace detail {

// f_[m] = 1 + sum_{j<m} I([m-1]\{j} -> [m-1]), from the phi values of the
// levels below m.
template <class Real>
Real level_top_value(const std::vector<Real>& phi, const ProbVector<Real>& p, int m)
{
    const mask_t below = full_mask(m - 1);
    Real v(1);
    for (int j = 1; j < m; ++j)
        v += p.rate(j) * (phi[below] - phi[below & ~element_bit(j)]);
    return v;
}

// Within a level, T ranges over subsets of {1..m-1} and stands for S = T u {m}.
template <class Real>
Real level_diagonal(const ProbVector<Real>& p, int m, mask_t t)
{
    Real d = p.rate(m) + p.rate(lowest_missing(t));
    for (int j = 1; j < m; ++j)
        if (has_element(t, j))
            d += p.rate(j);
    return d;
}

template <class Real>
Real level_offdiagonal(const ProbVector<Real>& p, int m, mask_t t, std::span<const Real> x)
{
    const int i = lowest_missing(t);
    Real r = p.rate(i) * x[t | element_bit(i)];
    for (int j = 1; j < m; ++j)
        if (has_element(t, j))
            r += p.rate(j) * x[t & ~element_bit(j)];
    return r;
}

template <class Real>
void store_level(std::vector<Real>& phi, std::vector<Real>& f, const ProbVector<Real>& p, int m,
                 std::span<const Real> x)
{
    const mask_t top = element_bit(m);
    for (mask_t t = 0; t < top; ++t) {
        const mask_t s = t | top;
        f[s] = x[t];
        phi[s] = phi[t] + x[t] / p.rate(m);
    }
}

// Max defect of the level equations (in f units) plus the top-value rule.
template <class Real>
Real table_residual(const std::vector<Real>& phi, const std::vector<Real>& f, const ProbVector<Real>& p)
{
    Real worst(0);
    for (int m = 1; m <= p.k(); ++m) {
        const mask_t top = element_bit(m);
        std::vector<Real> x(top);
        for (mask_t t = 0; t < top; ++t)
            x[t] = f[t | top];
        Real d = abs_value(x[top - 1] - level_top_value(phi, p, m)) / (Real(1) + abs_value(x[top - 1]));
        if (d > worst)
            worst = d;
        for (mask_t t = 0; t + 1 < top; ++t) {
            Real diag = level_diagonal(p, m, t);
            Real defect = abs_value(diag * x[t] - level_offdiagonal<Real>(p, m, t, x)) /
                          (diag * (Real(1) + abs_value(x[t])));
            if (defect > worst)
                worst = defect;
        }
    }
    return worst;
}

} // namespace detail

// Level-by-level exact solve. Works for any positive p; monotonicity is not
// needed for the system to be well posed.
template <class Real>
PotentialTable<Real> solve_direct(const ProbVector<Real>& p)
{
    const int k = p.k();
    const std::size_t n = std::size_t{1} << k;
    std::vector<Real> phi(n, Real(0)), f(n, Real(0));
    const std::vector<Real>& rates = p.values();
    detail::LatticeEliminator<Real> elim{std::span<const Real>(rates)};

    for (int m = 1; m <= k; ++m) {
        const std::size_t width = std::size_t{1} << (m - 1);
        std::vector<Real> boundary{detail::level_top_value(phi, p, m)};
        detail::Block<Real> rhs(width, 1);
        detail::Block<Real> sol = elim.solve_bounded(m - 1, p.rate(m), rhs, boundary);
        std::vector<Real> x(width);
        for (std::size_t t = 0; t < width; ++t)
            x[t] = sol(t, 0);
        detail::store_level<Real>(phi, f, p, m, x);
    }

    PotentialTable<Real> table(p, phi, f, Backend::direct);
    table.set_residual(detail::table_residual(phi, f, p));
    return table;
}

// State of one level after a Gauss-Seidel sweep. Vectors are indexed by
// T subset of {1..m-1}, standing for S = T u {m}.
template <class Real>
struct SweepEvent {
    int level;
    long sweep;
    std::span<const Real> previous;
    std::span<const Real> current;
    const ProbVector<Real>& p;
};

template <class Real>
using SweepObserver = std::function<void(const SweepEvent<Real>&)>;

struct GaussSeidelOptions {
    double tol = 1e-15;
    long max_sweeps = 2'000'000;
};

// Iterates each level from f = 0 (except the fixed top value), updating in
// decreasing |S| with ties broken by decreasing mask, until no entry moves
// by more than tol * (1 + |f_S|) in a sweep and the extrapolated remaining
// error is below the same bound. Within a level f spans many orders of
// magnitude, so the test is per entry.
template <class Real>
PotentialTable<Real> solve_gauss_seidel(const ProbVector<Real>& p, GaussSeidelOptions opts = {},
                                        const SweepObserver<Real>& observer = {})
{
    detail::require(opts.tol > 0, "solve_gauss_seidel: tol must be positive");
    const int k = p.k();
    const std::size_t n = std::size_t{1} << k;
    std::vector<Real> phi(n, Real(0)), f(n, Real(0));
    long total_sweeps = 0;

    for (int m = 1; m <= k; ++m) {
        const mask_t top = element_bit(m);
        std::vector<mask_t> order;
        std::vector<Real> diag(top);
        for (mask_t t = 0; t + 1 < top; ++t) {
            order.push_back(t);
            diag[t] = detail::level_diagonal(p, m, t);
        }
        std::sort(order.begin(), order.end(), [](mask_t a, mask_t b) {
            return cardinality(a) != cardinality(b) ? cardinality(a) > cardinality(b) : a > b;
        });

        std::vector<Real> x(top, Real(0)), prev;
        Real last_change(0);
        const Real floor = std::max(Real(opts.tol / 1000), Real(8 * std::numeric_limits<Real>::epsilon()));
        x[top - 1] = detail::level_top_value(phi, p, m);

        for (long sweep = 1;; ++sweep) {
            if (sweep > opts.max_sweeps)
                throw ConvergenceError("Gauss-Seidel did not converge at level " + std::to_string(m) +
                                       " within " + std::to_string(opts.max_sweeps) + " sweeps");
            if (observer)
                prev = x;
            Real change(0);
            for (mask_t t : order) {
                Real next = detail::level_offdiagonal<Real>(p, m, t, x) / diag[t];
                Real d = abs_value(next - x[t]) / (Real(1) + abs_value(next));
                if (d > change)
                    change = d;
                x[t] = std::move(next);
            }
            if (observer)
                observer(SweepEvent<Real>{m, sweep, prev, x, p});
            // The iteration contracts geometrically, so the distance to the
            // fixed point is about change * rate / (1 - rate). Changes far
            // below tol are round-off and end the run whatever the rate.
            const Real rate = last_change > 0 ? Real(change / last_change) : Real(1);
            last_change = change;
            const Real tol(opts.tol);
            if (change <= tol && (change * rate <= tol * (Real(1) - rate) || change <= floor)) {
                total_sweeps += sweep;
                break;
            }
        }
        detail::store_level<Real>(phi, f, p, m, x);
    }

    PotentialTable<Real> table(p, phi, f, Backend::gauss_seidel);
    table.set_residual(detail::table_residual(phi, f, p));
    table.set_sweeps(total_sweeps);
    return table;
}

template <class Real>
PotentialTable<Real> solve(const ProbVector<Real>& p, Backend backend, GaussSeidelOptions opts = {})
{
    return backend == Backend::direct ? solve_direct(p) : solve_gauss_seidel(p, opts);
}

} // namespace wks
