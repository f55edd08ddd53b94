// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Run without arguments for all criteria, or --only N for one of them.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <wks/wks.hpp>

namespace {

using namespace wks;
using clock_type = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string summary;
    std::vector<std::string> details;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            details.push_back("violated: " + what);
        }
    }
    void note(const std::string& line) { details.push_back(line); }
};

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double x, int prec = 3)
{
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

double rel_diff(double a, double b)
{
    const double m = std::max(std::abs(a), std::abs(b));
    return m == 0 ? 0.0 : std::abs(a - b) / m;
}

std::vector<double> random_p(std::mt19937_64& rng, int k, bool monotone)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(static_cast<std::size_t>(k));
    for (double& x : p)
        x = 1.0 - u(rng); // (0, 1]
    if (monotone)
        std::sort(p.rbegin(), p.rend());
    return p;
}

// log-uniform on [1, 1000], ascending
std::vector<double> random_weights(std::mt19937_64& rng, int k)
{
    std::uniform_real_distribution<double> e(0.0, 3.0);
    std::vector<double> b(static_cast<std::size_t>(k));
    for (double& x : b)
        x = std::pow(10.0, e(rng));
    std::sort(b.begin(), b.end());
    return b;
}

// 1. Constants
Outcome constants_criterion()
{
    Outcome out;
    const auto t0 = clock_type::now();
    out.require(build_constants(2).alpha(2) == 5, "alpha_2 == 5");
    for (int k = 1; k <= 12; ++k) {
        const auto r = check_constant_identities(build_constants(k));
        out.require(r.product_rule, "product rule, k=" + std::to_string(k));
        out.require(r.alpha_sum, "alpha sum, k=" + std::to_string(k));
        out.require(r.strict_decrease, "strict decrease, k=" + std::to_string(k));
        out.require(alpha_growth_bound(k), "alpha_k < 1.6^(2^k), k=" + std::to_string(k));
    }
    const double secs = seconds_since(t0);
    out.require(secs < 1.0, "runtime < 1 s");
    out.summary = "alpha_2 = 5, identities exact and growth bound for k <= 12 (" + fmt(secs) + " s, limit 1 s)";
    return out;
}

// 2. Solver correctness
Outcome solver_criterion()
{
    Outcome out;
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(2002);
    double worst_agree = 0, worst_resid = 0, worst_tight_mono = 0, worst_tight_any = 0;
    for (int k = 1; k <= 10; ++k) {
        double agree_k = 0;
        for (bool monotone : {true, false}) {
            for (int n = 0; n < 100; ++n) {
                const ProbVector<double> p(random_p(rng, k, monotone));
                const auto d = solve_direct(p);
                const auto g = solve_gauss_seidel(p);
                for (mask_t s = 0; s <= full_mask(k); ++s)
                    agree_k = std::max(agree_k, rel_diff(d.phi(s), g.phi(s)));
                worst_resid = std::max({worst_resid, d.residual(), g.residual()});
                const double tight =
                    std::max(verify_tight_system(d).max_defect(), verify_tight_system(g).max_defect());
                (monotone ? worst_tight_mono : worst_tight_any) =
                    std::max(monotone ? worst_tight_mono : worst_tight_any, tight);
            }
        }
        out.note("k=" + std::to_string(k) + ": max relative phi disagreement " + fmt(agree_k));
        worst_agree = std::max(worst_agree, agree_k);
    }
    const double secs = seconds_since(t0);
    out.require(worst_agree <= 1e-9, "backends agree to 1e-9 relative");
    out.require(worst_resid <= 1e-10, "residual <= 1e-10");
    out.require(worst_tight_mono <= 1e-10, "tight-system defect <= 1e-10 (non-increasing p)");
    out.require(worst_tight_any <= 1e-10, "tight-system defect <= 1e-10 (unordered p)");
    out.require(secs < 120, "runtime < 2 min");
    out.summary = "k <= 10, 100 non-increasing + 100 unordered p each: agreement " + fmt(worst_agree) +
                  ", residual " + fmt(worst_resid) + ", tight-system defect " +
                  fmt(std::max(worst_tight_mono, worst_tight_any)) + " (" + fmt(secs) + " s, limit 120 s)";
    return out;
}

// 3. Lemma property suite
Outcome lemma_criterion()
{
    Outcome out;
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(3003);
    std::map<std::string, Report> total;
    VerifyOptions vo; // slack 1e-9
    for (int k = 1; k <= 8; ++k) {
        const auto c = build_constants(k);
        for (int n = 0; n < 1000; ++n) {
            const ProbVector<double> p(random_p(rng, k, true));
            for (const auto& [name, rep] : run_lemma_suite(p, c, vo)) {
                auto [it, fresh] = total.try_emplace(name, name, vo);
                it->second.merge(rep);
            }
        }
    }
    const double secs = seconds_since(t0);
    std::size_t checks = 0;
    for (const char* name : {"feasibility", "current_monotonicity", "supermodularity", "current_bounds", "symmetry",
                             "p_monotonicity", "iteration_monotonicity", "sweep_inequalities", "f_ordering",
                             "tight_system", "backend_agreement"}) {
        const auto it = total.find(name);
        if (it == total.end()) {
            out.require(false, std::string(name) + " was never evaluated");
            continue;
        }
        const Report& r = it->second;
        checks += r.evaluated();
        out.note(std::string(name) + ": " + std::to_string(r.evaluated()) + " checks, " +
                 std::to_string(r.failures()) + " violations, max defect " + fmt(r.max_defect()));
        out.require(r.ok() && r.evaluated() > 0, std::string(name) + " within slack 1e-9");
    }
    out.require(secs < 300, "runtime < 5 min");
    out.summary = "1000 non-increasing p for each k <= 8, both backends: " + std::to_string(checks) + " checks (" +
                  fmt(secs) + " s, limit 300 s)";
    return out;
}

// 4. Upper-bound functional at optimal and harmonic p
Outcome upper_bound_criterion()
{
    Outcome out;
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(4004);
    const auto c = build_constants(10);
    for (int k = 1; k <= 10; ++k) {
        const unsigned alpha_digits = static_cast<unsigned>(c.alpha(k).str().size());
        double worst_opt = 0, worst_harm = 0; // max of alpha_tilde / bound
        int fails = 0;
        for (int n = 0; n < 100; ++n) {
            const auto b = random_weights(rng, k);
            unsigned digits = 0;
            {
                PrecisionScope probe(40);
                const WeightVector<HighPrecision> w(std::vector<HighPrecision>(b.begin(), b.end()));
                digits = working_digits(optimal_p(w, c)) + alpha_digits + 20;
            }
            PrecisionScope scope(digits);
            const WeightVector<HighPrecision> w(std::vector<HighPrecision>(b.begin(), b.end()));
            const HighPrecision alpha_k(c.alpha(k));
            const HighPrecision eps("1e-9");

            const auto ropt = alpha_tilde(w, solve_direct(optimal_p(w, c)));
            const auto rharm = alpha_tilde(w, solve_direct(harmonic_p(w)));
            fails += !(ropt.alpha_tilde <= alpha_k + eps);
            fails += !(rharm.alpha_tilde <= HighPrecision(k) * alpha_k + eps);
            worst_opt = std::max(worst_opt, to_double(HighPrecision(ropt.alpha_tilde / alpha_k)));
            worst_harm = std::max(worst_harm, to_double(HighPrecision(rharm.alpha_tilde / (k * alpha_k))));
        }
        out.note("k=" + std::to_string(k) + ": max alpha_tilde/alpha_k at optimal p " + fmt(worst_opt, 12) +
                 ", max alpha_tilde/(k alpha_k) at harmonic p " + fmt(worst_harm, 6));
        out.require(fails == 0, "bounds hold for k=" + std::to_string(k));
    }
    out.summary = "100 random ascending weights per k <= 10: optimal p <= alpha_k + 1e-9, harmonic p <= k alpha_k "
                  "+ 1e-9 (" +
                  fmt(seconds_since(t0)) + " s)";
    return out;
}

// 5. Limit behaviour for beta_i = r^(i-1)
Outcome limit_criterion()
{
    Outcome out;
    const auto t0 = clock_type::now();
    const auto c = build_constants(6);
    const std::vector<double> r_values{10, 100, 1e4, 1e6};
    bool nonneg = true, decreasing = true, threshold = true, near = true;
    for (int k = 1; k <= 6; ++k) {
        const auto rep = limit_optimality_sweep<HighPrecision>(k, r_values, c);
        const auto& last = rep.points.back();
        double max_gap = 0, max_rel_gap = 0;
        for (mask_t s = 0; s < last.gaps.size(); ++s) {
            max_gap = std::max(max_gap, last.gaps[s]);
            max_rel_gap = std::max(max_rel_gap, last.gaps[s] / c.c_as<double>(s));
        }
        out.note("k=" + std::to_string(k) + ": at r=1e6 max gap " + fmt(max_gap) + " (max gap/C_S " +
                 fmt(max_rel_gap) + "), alpha_tilde/alpha_k " + fmt(last.alpha_tilde / rep.alpha_k, 12) +
                 ", grid min/alpha_tilde " + fmt(last.grid_min / last.alpha_tilde, 12) +
                 ", gaps nonnegative " + (rep.gaps_nonnegative.ok() ? "yes" : "no") + ", non-increasing " +
                 (rep.gaps_decreasing.ok() ? "yes" : "no"));
        nonneg = nonneg && rep.gaps_nonnegative.ok();
        decreasing = decreasing && rep.gaps_decreasing.ok();
        threshold = threshold && rep.gap_threshold.ok();
        near = near && rep.alpha_near.ok();
        if (!rep.gap_threshold.ok())
            out.note("  k=" + std::to_string(k) + ": gap " + fmt(max_gap) + " at r=1e6 exceeds 1e-3");
    }
    out.require(nonneg, "gaps nonnegative");
    out.require(decreasing, "gaps non-increasing in r");
    out.require(threshold, "gaps < 1e-3 at r = 1e6 for every k <= 6");
    out.require(near, "alpha_tilde within 1e-3 alpha_k of alpha_k at r = 1e6");
    out.summary = "beta_i = r^(i-1), optimal p, k <= 6, r in {10, 1e2, 1e4, 1e6} (" + fmt(seconds_since(t0)) + " s)";
    return out;
}

// 6. Exact per-step potential audit
Outcome audit_criterion()
{
    Outcome out;
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(6006);
    long adversary = 0, algorithm = 0, eviction = 0, failures = 0;
    double worst = 0;
    for (int k = 1; k <= 4; ++k) {
        const auto c = build_constants(k);
        const WeightVector<double> beta(random_weights(rng, k));
        const std::vector<std::pair<std::string, ProbVector<double>>> sources{
            {"optimal", optimal_p(beta, c)},
            {"harmonic", harmonic_p(beta)},
            {"unordered", ProbVector<double>(random_p(rng, k, false))}};
        for (const auto& [label, p] : sources) {
            const auto table = solve_direct(p);
            const auto l = run_game(beta, table, 100000, 6006, static_cast<std::uint64_t>(k));
            adversary += l.audit.adversary_checks;
            algorithm += l.audit.algorithm_checks;
            eviction += l.audit.eviction_checks;
            failures += l.audit.failures;
            worst = std::max(worst, l.audit.worst_defect);
            out.note("k=" + std::to_string(k) + " " + label + " p: " + std::to_string(l.audit.adversary_checks) +
                     " t-moves, " + std::to_string(l.audit.eviction_checks) + " evictions, " +
                     std::to_string(l.audit.failures) + " audit failures, worst defect " +
                     fmt(l.audit.worst_defect));
        }
    }
    out.require(failures == 0, "zero audit failures");
    out.require(adversary > 0 && algorithm > 0, "audit exercised");
    out.summary = "k <= 4, 1e5 steps each for optimal, harmonic and unordered p: " + std::to_string(adversary) +
                  " t-moves, " + std::to_string(algorithm) + " algorithm phases, " + std::to_string(eviction) +
                  " evictions, " + std::to_string(failures) + " failures, worst defect " + fmt(worst) + " (" +
                  fmt(seconds_since(t0)) + " s)";
    return out;
}

// 7. Statistical ratio
Outcome statistical_criterion()
{
    Outcome out;
    const auto c = build_constants(2);
    const WeightVector<double> beta({1.0, 1000.0});
    const auto table = solve_direct(optimal_p(beta, c));
    const auto ratio = alpha_tilde(beta, table);

    std::vector<CostLedger> trials;
    double slowest = 0;
    for (int r = 0; r < 8; ++r) {
        const auto t0 = clock_type::now();
        trials.push_back(run_game(beta, table, 1000000, 7007, static_cast<std::uint64_t>(r)));
        slowest = std::max(slowest, seconds_since(t0));
        out.note("trial " + std::to_string(r) + ": ALG/(ADV+ADV') " + fmt(trials.back().ratio(), 6) +
                 ", potential-adjusted ALG/ADV " + fmt(trials.back().ratio_adjusted(), 6));
    }
    const auto summary = summarize(trials);
    const double lo = ratio.lower_bound - 3 * summary.standard_error;
    const double hi = ratio.alpha_tilde + 3 * summary.standard_error;
    out.require(summary.pooled_ratio >= lo && summary.pooled_ratio <= hi, "pooled ratio inside the band");
    out.require(slowest < 60, "runtime < 1 min per trial");

    const WeightVector<double> single({1.0});
    const auto one = run_game(single, solve_direct(optimal_p(single, build_constants(1))), 100000, 7007);
    out.require(one.ratio() == 1.0, "k = 1 ratio exactly 1");

    out.summary = "k=2, beta=(1,1000), optimal p, 8 x 1e6 steps: pooled " + fmt(summary.pooled_ratio, 6) +
                  " in [" + fmt(lo, 6) + ", " + fmt(hi, 6) + "] (alpha_tilde " + fmt(ratio.alpha_tilde, 6) +
                  ", lower bound " + fmt(ratio.lower_bound, 6) + ", se " + fmt(summary.standard_error) +
                  "); k=1 ratio " + fmt(one.ratio()) + "; slowest trial " + fmt(slowest) + " s";
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "run a single criterion (1-7)")->check(CLI::Range(1, 7));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"constants", constants_criterion},        {"solver", solver_criterion},
        {"lemma properties", lemma_criterion},     {"upper-bound functional", upper_bound_criterion},
        {"limit behaviour", limit_criterion},      {"potential audit", audit_criterion},
        {"statistical ratio", statistical_criterion}};

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<std::size_t>(only) != i + 1)
            continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.summary = std::string("exception: ") + e.what();
        }
        all = all && o.pass;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "C" << i + 1 << " " << criteria[i].first << ": "
                  << o.summary << '\n';
        for (const auto& d : o.details)
            std::cout << "       " << d << '\n';
        std::cout.flush();
    }
    return all ? 0 : 1;
}
