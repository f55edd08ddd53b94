#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "potentials.hpp"
#include "verify.hpp"

namespace wks {

// Server weights sorted ascending. order()[i-1] is the user-order position
// (0-based) of sorted server i.
template <class Real = double>
class WeightVector {
public:
    WeightVector() = default;

    // Takes already ascending weights.
    explicit WeightVector(std::vector<Real> beta) : beta_(std::move(beta)), order_(beta_.size())
    {
        validate();
        detail::require(std::is_sorted(beta_.begin(), beta_.end()), "weights must be sorted ascending");
        std::iota(order_.begin(), order_.end(), 0);
    }

    // Sorts user-order weights (stable, so equal weights keep their order).
    static WeightVector canonical(const std::vector<Real>& user)
    {
        WeightVector w;
        w.order_.resize(user.size());
        std::iota(w.order_.begin(), w.order_.end(), 0);
        std::stable_sort(w.order_.begin(), w.order_.end(),
                         [&](std::size_t a, std::size_t b) { return user[a] < user[b]; });
        for (std::size_t i : w.order_)
            w.beta_.push_back(user.at(i));
        w.validate();
        return w;
    }

    int k() const noexcept { return static_cast<int>(beta_.size()); }
    const Real& weight(int i) const { return beta_.at(static_cast<std::size_t>(i - 1)); }
    const std::vector<Real>& values() const noexcept { return beta_; }
    const std::vector<std::size_t>& order() const noexcept { return order_; }

    // Position in user order (1-based) of sorted server i.
    int user_index(int i) const { return static_cast<int>(order_.at(static_cast<std::size_t>(i - 1))) + 1; }

    // Reorders a per-server list from sorted to user order.
    template <class T>
    std::vector<T> to_user_order(const std::vector<T>& sorted) const
    {
        detail::require(sorted.size() == beta_.size(), "to_user_order: size mismatch");
        std::vector<T> out(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            out[order_[i]] = sorted[i];
        return out;
    }

    // s = max_i beta_i / beta_{i+1}; 0 for a single server.
    Real separation() const
    {
        Real s(0);
        for (std::size_t i = 0; i + 1 < beta_.size(); ++i)
            s = std::max(s, Real(beta_[i] / beta_[i + 1]));
        return s;
    }

    template <class Other>
    WeightVector<Other> convert() const
    {
        std::vector<Other> out;
        for (const Real& b : beta_)
            out.push_back(Other(b));
        return WeightVector<Other>::canonical(to_user_order(out));
    }

private:
    void validate() const
    {
        detail::require(!beta_.empty() && beta_.size() <= static_cast<std::size_t>(max_servers),
                        "weight vector must have 1..20 entries");
        for (const Real& b : beta_)
            detail::require(b > 0, "weights must be strictly positive");
    }

    std::vector<Real> beta_;
    std::vector<std::size_t> order_;
};

template <class Real = double>
struct RatioResult {
    Real alpha_tilde;
    int arg_t = 0; // sorted order, 1-based
    Real lower_bound;
    Real s;
    std::vector<Real> per_server; // I([k]\{i} -> [k]) / (p_i beta_i)
};

// alpha / (1 + s alpha). s = 0 (a single server) gives alpha itself.
template <class Real>
Real lower_bound_ratio(const Real& alpha, const Real& s)
{
    if (!(alpha > 0))
        throw InvalidArgument("lower_bound_ratio: alpha_tilde must be positive");
    if (s < 0 || s > 1)
        throw InvalidArgument("lower_bound_ratio: s must lie in [0, 1]");
    return alpha / (Real(1) + s * alpha);
}

// The ratio functional without the monotonicity requirement on p. The
// adversary construction needs only the maximizing index, which is defined
// for every positive p.
template <class Real>
RatioResult<Real> evaluate_ratio_functional(const WeightVector<Real>& beta, const PotentialTable<Real>& t)
{
    const auto& p = t.p();
    const int k = p.k();
    if (beta.k() != k)
        throw InvalidArgument("ratio: weights have " + std::to_string(beta.k()) + " entries, p has " +
                              std::to_string(k));
    const mask_t all = full_mask(k);
    RatioResult<Real> r;
    Real weighted(0);
    for (int i = 1; i <= k; ++i)
        weighted += p.rate(i) * beta.weight(i);
    Real best(0);
    for (int i = 1; i <= k; ++i) {
        r.per_server.push_back(t.current(all, i) / (p.rate(i) * beta.weight(i)));
        if (i == 1 || r.per_server.back() > best) {
            best = r.per_server.back();
            r.arg_t = i;
        }
    }
    r.alpha_tilde = weighted * best;
    r.s = beta.separation();
    r.lower_bound = lower_bound_ratio(r.alpha_tilde, r.s);
    return r;
}

template <class Real>
RatioResult<Real> alpha_tilde(const WeightVector<Real>& beta, const PotentialTable<Real>& t)
{
    if (!t.p().monotone())
        throw HypothesisViolation("alpha_tilde requires p_1 >= ... >= p_k");
    return evaluate_ratio_functional(beta, t);
}

template <class Real>
RatioResult<Real> alpha_tilde(const WeightVector<Real>& beta, const ProbVector<Real>& p,
                              Backend backend = Backend::direct)
{
    if (!p.monotone())
        throw HypothesisViolation("alpha_tilde requires p_1 >= ... >= p_k");
    return evaluate_ratio_functional(beta, solve(p, backend));
}

// p_i = C_{[k]\{i}} / beta_i
template <class Real>
ProbVector<Real> optimal_p(const WeightVector<Real>& beta, const ConstantTable& c)
{
    const int k = beta.k();
    detail::require(c.k() >= k, "optimal_p: constant table too small");
    std::vector<Real> p;
    for (int i = 1; i <= k; ++i)
        p.push_back(c.c_as<Real>(full_mask(k) & ~element_bit(i)) / beta.weight(i));
    return ProbVector<Real>(std::move(p));
}

// p_i = 1 / beta_i
template <class Real>
ProbVector<Real> harmonic_p(const WeightVector<Real>& beta)
{
    std::vector<Real> p;
    for (const Real& b : beta.values())
        p.push_back(Real(1) / b);
    return ProbVector<Real>(std::move(p));
}

// Decimal digits for solving at p without losing the currents to
// cancellation: the spread of p, the size of the largest constant, and a
// guard.
template <class Real>
unsigned working_digits(const ProbVector<Real>& p, int guard = 40)
{
    auto [lo, hi] = std::minmax_element(p.values().begin(), p.values().end());
    using std::log10;
    double spread = to_double(Real(log10(Real(*hi / *lo))));
    double constants = to_double(Real(log10(from_integer<Real>(alpha_sequence(p.k()).back()) + Real(1))));
    return static_cast<unsigned>(std::ceil(spread + constants)) + static_cast<unsigned>(guard);
}

struct LimitPoint {
    double r = 0;
    double alpha_tilde = 0;      // at optimal p
    double grid_min = 0;         // min over the perturbation grid
    std::vector<double> grid_argmin; // the multipliers 1 + delta_i at the minimum
    std::size_t grid_points = 0;
    std::vector<double> gaps;    // C_S - I(S -> S u {i}), indexed by S != [k]
};

struct LimitReport {
    int k = 0;
    double alpha_k = 0;
    std::vector<LimitPoint> points;
    Report gaps_nonnegative{"limit_gaps_nonnegative"};
    Report gaps_decreasing{"limit_gaps_decreasing"};
    Report gap_threshold{"limit_gap_threshold"};
    Report alpha_below{"limit_alpha_below"};
    Report alpha_near{"limit_alpha_near"};
    Report alpha_increasing{"limit_alpha_increasing"};
    Report grid_near_optimal{"limit_grid_near_optimal"};

    std::vector<const Report*> reports() const
    {
        return {&gaps_nonnegative, &gaps_decreasing, &gap_threshold,    &alpha_below,
                &alpha_near,       &alpha_increasing, &grid_near_optimal};
    }
    bool ok() const
    {
        for (const Report* r : reports())
            if (!r->ok())
                return false;
        return true;
    }
};

inline const std::vector<double>& limit_grid_deltas()
{
    static const std::vector<double> deltas{-0.1, -0.01, 0.0, 0.01, 0.1};
    return deltas;
}

// Multipliers for the perturbation grid: full cross product of
// limit_grid_deltas() for k <= 4, one coordinate at a time beyond that.
inline std::vector<std::vector<double>> limit_grid(int k)
{
    const auto& d = limit_grid_deltas();
    std::vector<std::vector<double>> grid;
    if (k <= 4) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
        for (;;) {
            std::vector<double> mult;
            for (std::size_t j : idx)
                mult.push_back(1.0 + d[j]);
            grid.push_back(std::move(mult));
            std::size_t pos = 0;
            while (pos < idx.size() && ++idx[pos] == d.size())
                idx[pos++] = 0;
            if (pos == idx.size())
                break;
        }
    } else {
        grid.emplace_back(static_cast<std::size_t>(k), 1.0);
        for (int i = 0; i < k; ++i)
            for (double delta : d)
                if (delta != 0.0) {
                    std::vector<double> mult(static_cast<std::size_t>(k), 1.0);
                    mult[static_cast<std::size_t>(i)] += delta;
                    grid.push_back(std::move(mult));
                }
    }
    return grid;
}

struct LimitOptions {
    double slack = 1e-9;
    double gap_threshold = 1e-3;      // max gap at the largest r
    double alpha_rel_threshold = 1e-3; // alpha_k - alpha_tilde <= this * alpha_k at the largest r
    double grid_rel_threshold = 1e-3;  // alpha_tilde(opt) - grid_min <= this * alpha_tilde(opt) at the largest r
    bool grid = true;
};

// beta_i = r^{i-1}, p = optimal. Evaluated in Real; with HighPrecision the
// working precision is raised per r to cover the spread of p.
template <class Real>
LimitReport limit_optimality_sweep(int k, const std::vector<double>& r_values, const ConstantTable& c,
                                   LimitOptions opts = {})
{
    detail::require(c.k() >= k, "limit sweep: constant table too small");
    for (std::size_t j = 0; j < r_values.size(); ++j) {
        detail::require(r_values[j] > 1, "limit sweep: r values must exceed 1");
        detail::require(j == 0 || r_values[j] > r_values[j - 1], "limit sweep: r values must increase");
    }
    VerifyOptions vopts{opts.slack};
    LimitReport rep;
    rep.k = k;
    rep.alpha_k = c.alpha(k).template convert_to<double>();
    rep.gaps_nonnegative = Report("limit_gaps_nonnegative", vopts);
    rep.gaps_decreasing = Report("limit_gaps_decreasing", vopts);
    rep.gap_threshold = Report("limit_gap_threshold", vopts);
    rep.alpha_below = Report("limit_alpha_below", vopts);
    rep.alpha_near = Report("limit_alpha_near", vopts);
    rep.alpha_increasing = Report("limit_alpha_increasing", vopts);
    rep.grid_near_optimal = Report("limit_grid_near_optimal", vopts);
    const mask_t all = full_mask(k);

    std::vector<Real> prev_gaps;
    Real prev_alpha(0);
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
        const double r = r_values[ri];
        auto geometric = [&] {
            std::vector<Real> beta;
            Real w(1);
            for (int i = 1; i <= k; ++i, w *= Real(r))
                beta.push_back(w);
            return WeightVector<Real>(std::move(beta));
        };
        std::optional<PrecisionScope> scope;
        if constexpr (std::is_same_v<Real, HighPrecision>)
            scope.emplace(std::max(working_digits(optimal_p(geometric(), c)), HighPrecision::default_precision()));
        // Built at the working precision so that p_i beta_i = C_{[k]\{i}}.
        {
            const auto wv = geometric();
            const auto popt = optimal_p(wv, c);
            const auto table = solve_direct(popt);
            const auto res = alpha_tilde(wv, table);

            LimitPoint pt;
            pt.r = r;
            pt.alpha_tilde = to_double(res.alpha_tilde);
            const Real alpha_k = from_integer<Real>(c.alpha(k));
            rep.alpha_below.expect_le("alpha_tilde_at_most_alpha_k", all, k, res.alpha_tilde, alpha_k);
            if (ri > 0)
                rep.alpha_increasing.expect_le("alpha_tilde_nondecreasing_in_r", all, k, prev_alpha,
                                               res.alpha_tilde);
            prev_alpha = res.alpha_tilde;

            std::vector<Real> gaps;
            for (mask_t s = 0; s < all; ++s) {
                const int i = lowest_missing(s);
                Real gap = c.c_as<Real>(s) - table.current_up(s, i);
                rep.gaps_nonnegative.expect_le("gap_nonnegative", s, i, Real(0), gap);
                if (ri > 0)
                    rep.gaps_decreasing.expect_le("gap_nonincreasing_in_r", s, i, gap, prev_gaps[s]);
                pt.gaps.push_back(to_double(gap));
                gaps.push_back(std::move(gap));
            }
            prev_gaps = std::move(gaps);

            if (ri + 1 == r_values.size()) {
                Real max_gap(0);
                for (const Real& g : prev_gaps)
                    max_gap = std::max(max_gap, g);
                rep.gap_threshold.expect_le("gap_below_threshold", all, 0, max_gap, Real(opts.gap_threshold));
                rep.alpha_near.expect_le("alpha_tilde_near_alpha_k", all, k, Real(alpha_k - res.alpha_tilde),
                                          Real(Real(opts.alpha_rel_threshold) * alpha_k));
            }

            pt.grid_min = pt.alpha_tilde;
            pt.grid_argmin.assign(static_cast<std::size_t>(k), 1.0);
            if (opts.grid) {
                Real best = res.alpha_tilde;
                for (const auto& mult : limit_grid(k)) {
                    std::vector<Real> q;
                    for (int i = 1; i <= k; ++i)
                        q.push_back(popt.rate(i) * Real(mult[static_cast<std::size_t>(i - 1)]));
                    ProbVector<Real> pq(std::move(q));
                    ++pt.grid_points;
                    if (!pq.monotone())
                        continue;
                    auto rq = alpha_tilde(wv, solve_direct(pq));
                    if (rq.alpha_tilde < best) {
                        best = rq.alpha_tilde;
                        pt.grid_argmin = mult;
                    }
                }
                pt.grid_min = to_double(best);
                if (ri + 1 == r_values.size())
                    rep.grid_near_optimal.expect_le("grid_min_near_optimal", all, k,
                                                    Real(res.alpha_tilde - best),
                                                    Real(Real(opts.grid_rel_threshold) * res.alpha_tilde));
            }
            rep.points.push_back(std::move(pt));
        }
    }
    return rep;
}

} // namespace wks
