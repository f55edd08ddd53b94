// Command-line front end: constants, potentials, ratio, verify, simulate, sweep.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <wks/wks.hpp>

namespace {

using namespace wks;

enum Exit { ok = 0, usage = 1, verification = 2, internal = 3 };

enum class Output { json, csv, human };

struct RunConfig {
    int k = 0;
    std::vector<std::string> beta;
    std::vector<std::string> p;
    bool optimal = false;
    bool harmonic = false;
    std::string backend = "direct";
    double tol = 1e-15;
    double slack = 1e-9;
    std::uint64_t seed = 1;
    long steps = 100000;
    int trials = 1;
    std::vector<double> r_values{10, 100, 1e4, 1e6};
    std::string out = "human";
    bool exact = false;
    unsigned digits = 0; // 0: sized from the spread of p
    bool grid = true;
    std::string transcript;
};

std::string num(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Output output_mode(const RunConfig& c)
{
    if (c.out == "json")
        return Output::json;
    if (c.out == "csv")
        return Output::csv;
    return Output::human;
}

Backend backend_of(const RunConfig& c) { return c.backend == "gs" ? Backend::gauss_seidel : Backend::direct; }

template <class Real>
Real parse_number(const std::string& text)
{
    if constexpr (std::is_same_v<Real, Rational>)
        return parse_rational(text);
    else if constexpr (std::is_same_v<Real, double>) {
        double v = 0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            return to_double(parse_rational(text));
        return v;
    } else {
        return Real(parse_rational(text));
    }
}

template <class Real>
std::vector<Real> parse_list(const std::vector<std::string>& items)
{
    std::vector<Real> out;
    for (const auto& s : items)
        out.push_back(parse_number<Real>(s));
    return out;
}

int infer_k(const RunConfig& c)
{
    int k = c.k;
    for (std::size_t n : {c.beta.size(), c.p.size()}) {
        if (n == 0)
            continue;
        if (k != 0 && k != static_cast<int>(n))
            throw InvalidArgument("--k, --beta and --p disagree on the number of servers");
        k = static_cast<int>(n);
    }
    if (k == 0)
        throw InvalidArgument("number of servers unknown: give --k, --beta or --p");
    return k;
}

// The probability vector in sorted server order.
template <class Real>
ProbVector<Real> resolve_p(const RunConfig& c, const WeightVector<Real>& beta, const ConstantTable* consts)
{
    const int sources = int(!c.p.empty()) + int(c.optimal) + int(c.harmonic);
    if (sources != 1)
        throw InvalidArgument("give exactly one of --p, --optimal, --harmonic");
    if (c.optimal)
        return optimal_p(beta, *consts);
    if (c.harmonic)
        return harmonic_p(beta);
    const auto user = parse_list<Real>(c.p);
    std::vector<Real> sorted;
    for (std::size_t i : beta.order())
        sorted.push_back(user.at(i));
    return ProbVector<Real>(std::move(sorted));
}

// --- constants ---------------------------------------------------------------

int cmd_constants(const RunConfig& c)
{
    const int k = infer_k(c);
    const auto table = build_constants(k);
    const auto identities = check_constant_identities(table);
    const bool growth = alpha_growth_bound(k);
    switch (output_mode(c)) {
    case Output::json: {
        auto j = to_json(table);
        j["identities"] = {{"product_rule", identities.product_rule},
                           {"alpha_sum", identities.alpha_sum},
                           {"strict_decrease", identities.strict_decrease},
                           {"failures", identities.failures}};
        j["alpha_below_1_6_pow_2k"] = growth;
        std::cout << j.dump(2) << '\n';
        break;
    }
    case Output::csv:
        std::cout << "mask,set,C\n";
        for (mask_t s = 0; s < table.cells().size(); ++s)
            std::cout << s << ",\"" << to_string(s) << "\"," << table.c(s) << '\n';
        break;
    case Output::human:
        std::cout << "k = " << k << '\n';
        for (int m = 1; m <= k; ++m)
            std::cout << "alpha_" << m << " = " << table.alpha(m) << '\n';
        for (mask_t s = 0; s < table.cells().size(); ++s)
            std::cout << "C" << to_string(s) << " = " << table.c(s) << '\n';
        std::cout << "identities: " << (identities.ok() ? "hold" : "FAIL") << '\n';
        for (const auto& f : identities.failures)
            std::cout << "  " << f << '\n';
        std::cout << "alpha_k < 1.6^(2^k): " << (growth ? "yes" : "no") << '\n';
        break;
    }
    return identities.ok() && growth ? Exit::ok : Exit::verification;
}

// --- potentials --------------------------------------------------------------

template <class Real>
int print_potentials(const RunConfig& c, const ProbVector<Real>& p)
{
    const Backend backend = backend_of(c);
    GaussSeidelOptions gs;
    gs.tol = c.tol;
    const auto table = solve(p, backend, gs);
    switch (output_mode(c)) {
    case Output::json:
        std::cout << to_json(table).dump(2) << '\n';
        break;
    case Output::csv:
        std::cout << "mask,set,phi,f\n";
        for (mask_t s = 0; s <= full_mask(p.k()); ++s)
            std::cout << s << ",\"" << to_string(s) << "\"," << number_to_json(table.phi(s)).dump() << ','
                      << number_to_json(table.f(s)).dump() << '\n';
        break;
    case Output::human:
        std::cout << "backend " << to_string(backend) << ", residual " << to_double(table.residual());
        if (backend == Backend::gauss_seidel)
            std::cout << ", sweeps " << table.sweeps();
        std::cout << '\n';
        for (mask_t s = 0; s <= full_mask(p.k()); ++s)
            std::cout << to_string(s) << "  phi " << num(to_double(table.phi(s))) << "  f "
                      << num(to_double(table.f(s))) << '\n';
        break;
    }
    return Exit::ok;
}

template <class Real>
int potentials_in(const RunConfig& c)
{
    const int k = infer_k(c);
    if (!c.p.empty() && c.beta.empty())
        return print_potentials(c, ProbVector<Real>(parse_list<Real>(c.p)));
    if (c.beta.empty())
        throw InvalidArgument("potentials needs --p, or --beta with a p source");
    const auto beta = WeightVector<Real>::canonical(parse_list<Real>(c.beta));
    const auto consts = build_constants(k);
    const auto sorted = resolve_p(c, beta, &consts);
    // back to the caller's order; potentials are indexed by the caller's servers
    return print_potentials(c, ProbVector<Real>(beta.to_user_order(sorted.values())));
}

int cmd_potentials(const RunConfig& c)
{
    if (c.exact) {
        if (backend_of(c) != Backend::direct)
            throw InvalidArgument("--exact needs --backend direct");
        return potentials_in<Rational>(c);
    }
    if (c.digits > 0) {
        PrecisionScope scope(c.digits);
        return potentials_in<HighPrecision>(c);
    }
    return potentials_in<double>(c);
}

// --- ratio -------------------------------------------------------------------

int cmd_ratio(const RunConfig& c)
{
    const int k = infer_k(c);
    if (c.beta.empty())
        throw InvalidArgument("ratio needs --beta");
    const auto consts = build_constants(k);

    unsigned digits = c.digits;
    if (digits == 0) {
        PrecisionScope probe(40);
        const auto beta = WeightVector<HighPrecision>::canonical(parse_list<HighPrecision>(c.beta));
        digits = working_digits(resolve_p(c, beta, &consts));
    }
    PrecisionScope scope(digits);
    const auto beta = WeightVector<HighPrecision>::canonical(parse_list<HighPrecision>(c.beta));
    const auto p = resolve_p(c, beta, &consts);
    GaussSeidelOptions gs;
    gs.tol = c.tol;
    const auto result = alpha_tilde(beta, solve(p, backend_of(c), gs));

    const auto per_server = to_doubles(beta.to_user_order(result.per_server));
    const auto p_user = to_doubles(beta.to_user_order(p.values()));
    switch (output_mode(c)) {
    case Output::json: {
        auto j = to_json(result, beta);
        j["p"] = p_user;
        j["alpha_k"] = consts.alpha(k).str();
        j["digits"] = digits;
        std::cout << j.dump(2) << '\n';
        break;
    }
    case Output::csv:
        std::cout << "server,p,per_server\n";
        for (int i = 0; i < k; ++i)
            std::cout << i + 1 << ',' << num(p_user[i]) << ',' << num(per_server[i]) << '\n';
        break;
    case Output::human:
        std::cout << "alpha_tilde  " << num(to_double(result.alpha_tilde)) << '\n'
                  << "arg_t        " << beta.user_index(result.arg_t) << '\n'
                  << "s            " << num(to_double(result.s)) << '\n'
                  << "lower_bound  " << num(to_double(result.lower_bound)) << '\n'
                  << "alpha_k      " << consts.alpha(k) << '\n';
        for (int i = 0; i < k; ++i)
            std::cout << "server " << i + 1 << "  p " << num(p_user[i]) << "  I/(p beta) " << num(per_server[i])
                      << '\n';
        break;
    }
    return Exit::ok;
}

// --- verify ------------------------------------------------------------------

int cmd_verify(const RunConfig& c)
{
    const int k = infer_k(c);
    const auto consts = build_constants(k);
    VerifyOptions vo;
    vo.slack = c.slack;
    GaussSeidelOptions gs;
    gs.tol = c.tol;

    std::map<std::string, Report> total;
    auto absorb = [&](const ProbVector<double>& p) {
        for (const auto& [name, rep] : run_lemma_suite(p, consts, vo, gs)) {
            auto [it, fresh] = total.try_emplace(name, name, vo);
            it->second.merge(rep);
        }
    };
    int runs = 0;
    if (!c.p.empty()) {
        absorb(ProbVector<double>(parse_list<double>(c.p)));
        runs = 1;
    } else {
        std::mt19937_64 rng = make_stream(c.seed, 0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (; runs < c.trials; ++runs) {
            std::vector<double> p(static_cast<std::size_t>(k));
            for (double& x : p)
                x = 1.0 - unit(rng); // (0, 1]
            std::sort(p.rbegin(), p.rend());
            absorb(ProbVector<double>(std::move(p)));
        }
    }

    bool all_ok = true;
    for (const auto& [name, rep] : total)
        all_ok = all_ok && rep.ok();
    switch (output_mode(c)) {
    case Output::json: {
        json checks = json::array();
        for (const auto& [name, rep] : total)
            checks.push_back(to_json(rep));
        std::cout << json{{"k", k}, {"trials", runs}, {"seed", c.seed}, {"ok", all_ok}, {"checks", checks}}.dump(2)
                  << '\n';
        break;
    }
    case Output::csv:
        std::cout << "check,evaluated,failures,max_defect\n";
        for (const auto& [name, rep] : total)
            std::cout << name << ',' << rep.evaluated() << ',' << rep.failures() << ',' << num(rep.max_defect())
                      << '\n';
        break;
    case Output::human:
        std::cout << "k = " << k << ", " << runs << " probability vectors\n";
        for (const auto& [name, rep] : total)
            std::cout << (rep.ok() ? "ok    " : "FAIL  ") << name << "  " << rep.evaluated() << " checks, "
                      << rep.failures() << " failures, max defect " << num(rep.max_defect()) << '\n';
        break;
    }
    return all_ok ? Exit::ok : Exit::verification;
}

// --- simulate ----------------------------------------------------------------

int cmd_simulate(const RunConfig& c)
{
    const int k = infer_k(c);
    if (c.beta.empty())
        throw InvalidArgument("simulate needs --beta");
    const auto consts = build_constants(k);
    const auto beta = WeightVector<double>::canonical(parse_list<double>(c.beta));
    const auto p = resolve_p(c, beta, &consts);
    GaussSeidelOptions gs;
    gs.tol = c.tol;
    const auto table = solve(p, backend_of(c), gs);
    const auto ratio = evaluate_ratio_functional(beta, table);

    std::ofstream transcript;
    SimulationOptions so;
    so.slack = c.slack;
    if (!c.transcript.empty()) {
        transcript.open(c.transcript);
        if (!transcript)
            throw InvalidArgument("cannot write transcript " + c.transcript);
        transcript << "trial," << transcript_header() << '\n';
    }
    std::vector<CostLedger> ledgers;
    for (int r = 0; r < c.trials; ++r) {
        std::ostringstream rows;
        if (transcript.is_open())
            so.transcript = &rows;
        Simulator sim(beta, table, ratio.arg_t, c.seed, static_cast<std::uint64_t>(r), so);
        ledgers.push_back(sim.run(c.steps));
        if (transcript.is_open()) {
            std::istringstream lines(rows.str());
            for (std::string line; std::getline(lines, line);)
                transcript << r << ',' << line << '\n';
        }
    }
    const auto summary = summarize(ledgers);
    const double lo = to_double(ratio.lower_bound) - 3 * summary.standard_error;
    const double hi = to_double(ratio.alpha_tilde) + 3 * summary.standard_error;
    const bool in_band = summary.pooled_ratio >= lo && summary.pooled_ratio <= hi;
    GameInputs in{beta, p, ratio.arg_t, c.steps, c.seed};

    switch (output_mode(c)) {
    case Output::json: {
        json trials = json::array();
        for (const auto& l : summary.trials)
            trials.push_back(to_json(l, in));
        json j{{"ratio", to_json(ratio, beta)},
               {"trials", trials},
               {"pooled_ratio", summary.pooled_ratio},
               {"mean_ratio", summary.mean_ratio},
               {"standard_error", summary.standard_error},
               {"band", {lo, hi}},
               {"in_band", in_band},
               {"audit_failures", summary.audit_failures}};
        std::cout << j.dump(2) << '\n';
        break;
    }
    case Output::csv:
        std::cout << "trial,alg,adv,adv_evict,ratio,ratio_adjusted,audit_failures\n";
        for (std::size_t r = 0; r < summary.trials.size(); ++r) {
            const auto& l = summary.trials[r];
            std::cout << r << ',' << num(l.alg) << ',' << num(l.adv) << ',' << num(l.adv_evict) << ','
                      << num(l.ratio()) << ',' << num(l.ratio_adjusted()) << ',' << l.audit.failures << '\n';
        }
        break;
    case Output::human:
        std::cout << "alpha_tilde " << num(to_double(ratio.alpha_tilde)) << " (t = " << beta.user_index(ratio.arg_t)
                  << "), lower bound " << num(to_double(ratio.lower_bound)) << '\n';
        for (std::size_t r = 0; r < summary.trials.size(); ++r) {
            const auto& l = summary.trials[r];
            std::cout << "trial " << r << "  ALG " << num(l.alg) << "  ADV " << num(l.adv) << "  ADV' "
                      << num(l.adv_evict) << "  ratio " << num(l.ratio()) << "  adjusted "
                      << num(l.ratio_adjusted()) << '\n';
        }
        std::cout << "pooled " << num(summary.pooled_ratio) << " +- " << num(summary.standard_error) << "  band ["
                  << num(lo) << ", " << num(hi) << "] " << (in_band ? "inside" : "outside") << '\n'
                  << "audit failures " << summary.audit_failures << '\n';
        break;
    }
    return summary.audit_failures == 0 ? Exit::ok : Exit::internal;
}

// --- sweep -------------------------------------------------------------------

int cmd_sweep(const RunConfig& c)
{
    const int k = infer_k(c);
    const auto consts = build_constants(k);
    LimitOptions lo;
    lo.slack = c.slack;
    lo.grid = c.grid;
    const auto rep = limit_optimality_sweep<HighPrecision>(k, c.r_values, consts, lo);
    switch (output_mode(c)) {
    case Output::json:
        std::cout << to_json(rep).dump(2) << '\n';
        break;
    case Output::csv:
        std::cout << "r,alpha_tilde,grid_min,max_gap\n";
        for (const auto& pt : rep.points)
            std::cout << num(pt.r) << ',' << num(pt.alpha_tilde) << ',' << num(pt.grid_min) << ','
                      << num(*std::max_element(pt.gaps.begin(), pt.gaps.end())) << '\n';
        break;
    case Output::human:
        std::cout << "k = " << k << ", alpha_k = " << num(rep.alpha_k) << '\n';
        for (const auto& pt : rep.points)
            std::cout << "r " << num(pt.r) << "  alpha_tilde " << num(pt.alpha_tilde) << "  grid min "
                      << num(pt.grid_min) << "  max gap " << num(*std::max_element(pt.gaps.begin(), pt.gaps.end()))
                      << '\n';
        for (const Report* r : rep.reports()) {
            std::cout << (r->ok() ? "ok    " : "FAIL  ") << r->name();
            if (!r->ok() && r->worst())
                std::cout << "  worst " << r->worst()->check << " at " << to_string(r->worst()->set) << ": "
                          << num(r->worst()->lhs) << " vs " << num(r->worst()->rhs);
            std::cout << '\n';
        }
        break;
    }
    return rep.ok() ? Exit::ok : Exit::verification;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Memoryless weighted k-server lab: constants, potentials, ratios, checks, simulation"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_k = [&](CLI::App* sub) { sub->add_option("--k", cfg.k, "number of servers")->check(CLI::Range(1, 20)); };
    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "json | csv | human")
            ->check(CLI::IsMember({"json", "csv", "human"}));
    };
    auto add_p = [&](CLI::App* sub) {
        sub->add_option("--beta", cfg.beta, "weights, comma separated")->delimiter(',');
        auto* p = sub->add_option("--p", cfg.p, "move rates, comma separated (user order)")->delimiter(',');
        auto* o = sub->add_flag("--optimal", cfg.optimal, "p_i = C_{[k]\\{i}} / beta_i");
        auto* h = sub->add_flag("--harmonic", cfg.harmonic, "p_i = 1 / beta_i");
        p->excludes(o, h);
        o->excludes(h);
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--backend", cfg.backend, "direct | gs")->check(CLI::IsMember({"direct", "gs"}));
        sub->add_option("--tol", cfg.tol, "Gauss-Seidel per-entry relative stop tolerance");
    };

    auto* constants = app.add_subcommand("constants", "C_S table, alpha_1..alpha_k and identity checks\n"
                                                      "csv columns: mask,set,C");
    add_k(constants);
    add_out(constants);

    auto* potentials = app.add_subcommand("potentials", "solve phi_S and f_S for one p\n"
                                                        "csv columns: mask,set,phi,f");
    add_k(potentials);
    add_p(potentials);
    add_solver(potentials);
    add_out(potentials);
    potentials->add_flag("--exact", cfg.exact, "exact rational arithmetic (direct backend)");
    potentials->add_option("--digits", cfg.digits, "decimal digits of working precision");

    auto* ratio = app.add_subcommand("ratio", "upper bound functional, maximizing server and lower bound\n"
                                              "csv columns: server,p,per_server");
    add_k(ratio);
    add_p(ratio);
    add_solver(ratio);
    add_out(ratio);
    ratio->add_option("--digits", cfg.digits, "decimal digits (default: sized from the spread of p)");

    auto* verify = app.add_subcommand("verify", "lemma checks over random non-increasing p on both backends\n"
                                                "csv columns: check,evaluated,failures,max_defect");
    add_k(verify);
    add_solver(verify);
    add_out(verify);
    verify->add_option("--p", cfg.p, "check this p instead of random ones")->delimiter(',');
    verify->add_option("--trials", cfg.trials, "number of random p")->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", cfg.seed, "random seed");
    verify->add_option("--slack", cfg.slack, "allowed normalized defect");

    auto* simulate = app.add_subcommand("simulate", "games against the adaptive adversary\n"
                                                    "csv columns: trial,alg,adv,adv_evict,ratio,ratio_adjusted,"
                                                    "audit_failures\n"
                                                    "transcript columns: trial,step,phase,request,mover,cost,"
                                                    "state_mask,phi");
    add_k(simulate);
    add_p(simulate);
    add_solver(simulate);
    add_out(simulate);
    simulate->add_option("--steps", cfg.steps, "requests per trial")->check(CLI::NonNegativeNumber);
    simulate->add_option("--trials", cfg.trials, "independent games")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", cfg.seed, "random seed");
    simulate->add_option("--slack", cfg.slack, "audit slack");
    simulate->add_option("--transcript", cfg.transcript, "write a per-move CSV transcript here");

    auto* sweep = app.add_subcommand("sweep", "beta_i = r^(i-1) at optimal p for growing r\n"
                                              "csv columns: r,alpha_tilde,grid_min,max_gap");
    add_k(sweep);
    add_out(sweep);
    sweep->add_option("--r", cfg.r_values, "r values, comma separated, increasing")->delimiter(',');
    sweep->add_option("--slack", cfg.slack, "allowed normalized defect");
    sweep->add_flag("--no-grid{false}", cfg.grid, "skip the perturbation grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::usage;
    }

    try {
        if (*constants)
            return cmd_constants(cfg);
        if (*potentials)
            return cmd_potentials(cfg);
        if (*ratio)
            return cmd_ratio(cfg);
        if (*verify)
            return cmd_verify(cfg);
        if (*simulate)
            return cmd_simulate(cfg);
        if (*sweep)
            return cmd_sweep(cfg);
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    } catch (const HypothesisViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    } catch (const InternalConsistency& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return Exit::internal;
    } catch (const ConvergenceError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return Exit::internal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return Exit::internal;
    }
    return Exit::usage;
}
