#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "constants.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "potentials.hpp"
#include "subset.hpp"

namespace wks {

struct CheckRecord {
    std::string check;
    mask_t set = 0;
    int server = 0;
    double lhs = 0, rhs = 0;
    double defect = 0; // violation divided by 1 + max(|lhs|, |rhs|)
    bool pass = true;
};

struct VerifyOptions {
    double slack = 1e-9;
    bool keep_all = false;       // otherwise only failures and the worst record are kept
    std::size_t max_failures = 64;
};

// Outcome of one family of checks.
class Report {
public:
    explicit Report(std::string name = {}, VerifyOptions opts = {}) : name_(std::move(name)), opts_(opts) {}

    const std::string& name() const noexcept { return name_; }
    std::size_t evaluated() const noexcept { return evaluated_; }
    std::size_t failures() const noexcept { return failures_; }
    double max_defect() const noexcept { return max_defect_; }
    bool ok() const noexcept { return failures_ == 0; }
    const std::vector<CheckRecord>& records() const noexcept { return records_; }
    const std::optional<CheckRecord>& worst() const noexcept { return worst_; }

    // lhs <= rhs
    template <class Real>
    void expect_le(const std::string& check, mask_t s, int i, const Real& lhs, const Real& rhs)
    {
        Real scale = Real(1) + std::max(abs_value(lhs), abs_value(rhs));
        Real violation = lhs > rhs ? Real(lhs - rhs) : Real(0);
        add(check, s, i, to_double(lhs), to_double(rhs), to_double(Real(violation / scale)));
    }

    template <class Real>
    void expect_eq(const std::string& check, mask_t s, int i, const Real& lhs, const Real& rhs)
    {
        Real scale = Real(1) + std::max(abs_value(lhs), abs_value(rhs));
        add(check, s, i, to_double(lhs), to_double(rhs), to_double(Real(abs_value(Real(lhs - rhs)) / scale)));
    }

    void merge(const Report& other)
    {
        evaluated_ += other.evaluated_;
        failures_ += other.failures_;
        for (const auto& r : other.records_)
            if (opts_.keep_all || (!r.pass && kept_failures_++ < opts_.max_failures))
                records_.push_back(r);
        if (other.worst_ && (!worst_ || other.worst_->defect > worst_->defect))
            worst_ = other.worst_;
        max_defect_ = std::max(max_defect_, other.max_defect_);
    }

private:
    void add(const std::string& check, mask_t s, int i, double lhs, double rhs, double defect)
    {
        CheckRecord rec{check, s, i, lhs, rhs, defect, defect <= opts_.slack};
        ++evaluated_;
        if (!rec.pass)
            ++failures_;
        if (opts_.keep_all || (!rec.pass && kept_failures_++ < opts_.max_failures))
            records_.push_back(rec);
        if (!worst_ || defect > worst_->defect)
            worst_ = rec;
        max_defect_ = std::max(max_defect_, defect);
    }

    std::string name_;
    VerifyOptions opts_;
    std::size_t evaluated_ = 0, failures_ = 0, kept_failures_ = 0;
    double max_defect_ = 0;
    std::vector<CheckRecord> records_;
    std::optional<CheckRecord> worst_;
};

namespace detail {

template <class Real>
void require_monotone(const ProbVector<Real>& p, const char* check)
{
    if (!p.monotone())
        throw HypothesisViolation(std::string(check) + " requires p_1 >= ... >= p_k");
}

// 1 + sum_{j in S} I(S\{j} -> S)
template <class Real>
Real inflow_plus_one(const PotentialTable<Real>& t, mask_t s)
{
    Real v(1);
    for (int j = 1; j <= t.k(); ++j)
        if (has_element(s, j))
            v += t.current(s, j);
    return v;
}

} // namespace detail

// For every S != [k] with i the smallest server outside S:
//   I(S -> S u {i}) = 1 + sum_{j in S} I(S\{j} -> S).
// Holds for every positive p.
template <class Real>
Report verify_tight_system(const PotentialTable<Real>& t, VerifyOptions opts = {})
{
    Report r("tight_system", opts);
    const mask_t all = full_mask(t.k());
    for (mask_t s = 0; s < all; ++s) {
        int i = lowest_missing(s);
        r.expect_eq("tight_system", s, i, t.current_up(s, i), detail::inflow_plus_one(t, s));
    }
    return r;
}

// I(S -> S u {i}) >= 1 + sum_{j in S} I(S\{j} -> S) for every i outside S,
// with equality for the smallest such i.
template <class Real>
Report verify_feasibility(const PotentialTable<Real>& t, VerifyOptions opts = {})
{
    detail::require_monotone(t.p(), "verify_feasibility");
    Report r("feasibility", opts);
    const int k = t.k();
    for (mask_t s = 0; s < full_mask(k); ++s) {
        Real rhs = detail::inflow_plus_one(t, s);
        for (int i = 1; i <= k; ++i) {
            if (has_element(s, i))
                continue;
            Real lhs = t.current_up(s, i);
            r.expect_le("feasibility", s, i, rhs, lhs);
            if (i == lowest_missing(s))
                r.expect_eq("feasibility_tight", s, i, lhs, rhs);
        }
    }
    return r;
}

// I(S -> S u {i}) <= I(S -> S u {j}) for i < j outside S.
template <class Real>
Report verify_current_monotonicity(const PotentialTable<Real>& t, VerifyOptions opts = {})
{
    detail::require_monotone(t.p(), "verify_current_monotonicity");
    Report r("current_monotonicity", opts);
    const int k = t.k();
    for (mask_t s = 0; s < full_mask(k); ++s) {
        std::vector<std::pair<int, Real>> up;
        for (int i = 1; i <= k; ++i)
            if (!has_element(s, i))
                up.emplace_back(i, t.current_up(s, i));
        for (std::size_t a = 0; a + 1 < up.size(); ++a)
            for (std::size_t b = a + 1; b < up.size(); ++b)
                r.expect_le("current_monotonicity", s, up[a].first, up[a].second, up[b].second);
    }
    return r;
}

// phi_{S+i} + phi_{S+j} <= phi_{S+i+j} + phi_S, and the current form
// I(S' -> S'+i) <= I(S -> S+i) for S' subset of S, i outside S.
template <class Real>
Report verify_supermodularity(const PotentialTable<Real>& t, VerifyOptions opts = {})
{
    detail::require_monotone(t.p(), "verify_supermodularity");
    Report r("supermodularity", opts);
    const int k = t.k();
    const mask_t all = full_mask(k);
    for (mask_t s = 0; s <= all; ++s) {
        for (int i = 1; i <= k; ++i) {
            if (has_element(s, i))
                continue;
            const mask_t si = s | element_bit(i);
            for (int j = i + 1; j <= k; ++j) {
                if (has_element(s, j))
                    continue;
                const mask_t sj = s | element_bit(j);
                r.expect_le("supermodularity", s, i, Real(t.phi(si) + t.phi(sj)),
                            Real(t.phi(si | sj) + t.phi(s)));
            }
            const Real outer = t.current_up(s, i);
            // every proper subset of s
            for (mask_t sub = (s - 1) & s;; sub = (sub - 1) & s) {
                if (sub != s)
                    r.expect_le("supermodularity_current", sub, i, t.current_up(sub, i), outer);
                if (sub == 0)
                    break;
            }
        }
    }
    return r;
}

// 1 <= I(S -> S u {i}) <= C_S with i the smallest server outside S.
template <class Real>
Report verify_current_bounds(const PotentialTable<Real>& t, const ConstantTable& c, VerifyOptions opts = {})
{
    detail::require_monotone(t.p(), "verify_current_bounds");
    detail::require(c.k() >= t.k(), "verify_current_bounds: constant table too small");
    Report r("current_bounds", opts);
    for (mask_t s = 0; s < full_mask(t.k()); ++s) {
        int i = lowest_missing(s);
        Real cur = t.current_up(s, i);
        r.expect_le("current_lower_bound", s, i, Real(1), cur);
        r.expect_le("current_upper_bound", s, i, cur, c.c_as<Real>(s));
    }
    return r;
}

// For the converged f: within level m, for S containing m and i < i' < m
// both outside S, p_i (f_{S+i} - f_S) <= p_i' (f_{S+i'} - f_S).
template <class Real>
Report verify_f_ordering(const PotentialTable<Real>& t, VerifyOptions opts = {})
{
    detail::require_monotone(t.p(), "verify_f_ordering");
    Report r("f_ordering", opts);
    const auto& p = t.p();
    for (int m = 2; m <= t.k(); ++m) {
        for (mask_t low = 0; low < full_mask(m - 1); ++low) {
            const mask_t s = low | element_bit(m);
            std::vector<std::pair<int, Real>> gain;
            for (int i = 1; i < m; ++i)
                if (!has_element(s, i))
                    gain.emplace_back(i, p.rate(i) * (t.f(s | element_bit(i)) - t.f(s)));
            for (std::size_t a = 0; a + 1 < gain.size(); ++a)
                r.expect_le("f_ordering", s, gain[a].first, gain[a].second, gain[a + 1].second);
        }
    }
    return r;
}

// With p_k = p_{k-1}, swapping k-1 for k leaves f and phi unchanged for every
// S in [k-1] containing k-1.
template <class Real>
Report verify_symmetry(const PotentialTable<Real>& t, VerifyOptions opts = {})
{
    const int k = t.k();
    detail::require(k >= 2, "verify_symmetry needs k >= 2");
    if (!(t.p().rate(k) == t.p().rate(k - 1)))
        throw InvalidArgument("verify_symmetry requires p_k == p_{k-1}");
    Report r("symmetry", opts);
    for (mask_t s = 0; s <= full_mask(k - 1); ++s) {
        if (!has_element(s, k - 1))
            continue;
        const mask_t swapped = (s & ~element_bit(k - 1)) | element_bit(k);
        r.expect_eq("symmetry_f", s, k - 1, t.f(s), t.f(swapped));
        r.expect_eq("symmetry_phi", s, k - 1, t.phi(s), t.phi(swapped));
    }
    return r;
}

// Lowering p_k never lowers any f_S.
template <class Real>
Report verify_p_monotonicity(const ProbVector<Real>& p, const Real& pk_smaller, Backend backend = Backend::direct,
                             VerifyOptions opts = {})
{
    if (!(pk_smaller > 0) || pk_smaller > p.rate(p.k()))
        throw InvalidArgument("verify_p_monotonicity requires 0 < p'_k <= p_k");
    const auto base = solve(p, backend);
    const auto lowered = solve(p.with_last(pk_smaller), backend);
    Report r("p_monotonicity", opts);
    for (mask_t s = 1; s <= full_mask(p.k()); ++s)
        r.expect_le("p_monotonicity", s, p.k(), base.f(s), lowered.f(s));
    return r;
}

// Watches a Gauss-Seidel run and checks, after every sweep t of every level:
//   iteration monotonicity  f^{t-1}_S <= f^t_S
//   part 1                  f^t_{S+l} >= f^t_S for l outside S, l < m
//   part 2                  p_l (f^t_{S+l} - f^t_S) <= p_l' (f^t_{S+l'} - f^t_S)
//                           for consecutive missing l < l' < m.
// Part 2 needs non-increasing p. Without it, part 1 is only guaranteed for
// the smallest missing l; later positions can fail for unordered p.
template <class Real>
class SweepAudit {
public:
    explicit SweepAudit(VerifyOptions opts = {})
        : monotone_("iteration_monotonicity", opts), sweep_("sweep_inequalities", opts)
    {
    }

    void operator()(const SweepEvent<Real>& e)
    {
        const int m = e.level;
        const mask_t top = element_bit(m);
        for (mask_t t = 0; t + 1 < top; ++t) {
            const mask_t s = t | top;
            monotone_.expect_le("iteration_monotonicity", s, m, e.previous[t], e.current[t]);

            int prev_missing = 0;
            Real prev_gain(0);
            for (int l = 1; l < m; ++l) {
                if (has_element(t, l))
                    continue;
                const Real diff = e.current[t | element_bit(l)] - e.current[t];
                if (prev_missing == 0 || check_part2_)
                    sweep_.expect_le("sweep_part1", s, l, e.current[t], e.current[t | element_bit(l)]);
                Real gain = e.p.rate(l) * diff;
                if (prev_missing != 0 && check_part2_)
                    sweep_.expect_le("sweep_part2", s, prev_missing, prev_gain, gain);
                prev_missing = l;
                prev_gain = gain;
            }
        }
    }

    void set_part2(bool on) { check_part2_ = on; }

    const Report& iteration_monotonicity() const noexcept { return monotone_; }
    const Report& sweep_inequalities() const noexcept { return sweep_; }

private:
    Report monotone_;
    Report sweep_;
    bool check_part2_ = true;
};

// Runs every table-level check for one p. Lemma checks that need a
// non-increasing p are skipped (not failed) when p is not monotone.
template <class Real>
std::map<std::string, Report> run_lemma_suite(const ProbVector<Real>& p, const ConstantTable& c,
                                              VerifyOptions opts = {}, GaussSeidelOptions gs = {},
                                              double pk_factor = 0.5)
{
    std::map<std::string, Report> out;
    auto put = [&](const std::string& key, const Report& r) {
        auto [it, fresh] = out.try_emplace(key, key, opts);
        it->second.merge(r);
    };

    SweepAudit<Real> audit(opts);
    audit.set_part2(p.monotone());
    const auto direct = solve_direct(p);
    const auto iterated = solve_gauss_seidel<Real>(p, gs, std::ref(audit));
    put("iteration_monotonicity", audit.iteration_monotonicity());
    put("sweep_inequalities", audit.sweep_inequalities());

    for (const auto* t : {&direct, &iterated}) {
        put("tight_system", verify_tight_system(*t, opts));
        if (p.monotone()) {
            put("feasibility", verify_feasibility(*t, opts));
            put("current_monotonicity", verify_current_monotonicity(*t, opts));
            put("supermodularity", verify_supermodularity(*t, opts));
            put("current_bounds", verify_current_bounds(*t, c, opts));
            put("f_ordering", verify_f_ordering(*t, opts));
        }
    }

    Report agree("backend_agreement", opts);
    for (mask_t s = 0; s <= full_mask(p.k()); ++s)
        agree.expect_eq("backend_agreement", s, 0, iterated.phi(s), direct.phi(s));
    put("backend_agreement", agree);

    Report resid("residual", opts);
    resid.expect_le("residual_direct", full_mask(p.k()), 0, direct.residual(), Real(0));
    resid.expect_le("residual_gauss_seidel", full_mask(p.k()), 0, iterated.residual(), Real(0));
    put("residual", resid);

    if (p.k() >= 2) {
        std::vector<Real> tied = p.values();
        tied.back() = tied[tied.size() - 2];
        for (Backend b : {Backend::direct, Backend::gauss_seidel})
            put("symmetry", verify_symmetry(solve(ProbVector<Real>(tied), b, gs), opts));
    }
    for (Backend b : {Backend::direct, Backend::gauss_seidel})
        put("p_monotonicity", verify_p_monotonicity(p, Real(p.rate(p.k()) * Real(pk_factor)), b, opts));
    return out;
}

} // namespace wks
