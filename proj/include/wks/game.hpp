#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "potentials.hpp"
#include "ratio.hpp"
#include "subset.hpp"

namespace wks {

using point_t = int;

// Positions of both server sets on the uniform metric with 2k points.
// Servers are 1-based, points 0..2k-1.
class GameState {
public:
    GameState() = default;

    // Full agreement: server i of both sides on point i-1.
    explicit GameState(int k) : k_(k), adversary_(static_cast<std::size_t>(k)), algorithm_(static_cast<std::size_t>(k))
    {
        detail::require(k >= 1 && k <= max_servers, "game: k must be in [1, 20]");
        for (int i = 0; i < k; ++i)
            adversary_[static_cast<std::size_t>(i)] = algorithm_[static_cast<std::size_t>(i)] = i;
    }

    int k() const noexcept { return k_; }
    int points() const noexcept { return 2 * k_; }
    point_t adversary(int i) const { return adversary_.at(static_cast<std::size_t>(i - 1)); }
    point_t algorithm(int i) const { return algorithm_.at(static_cast<std::size_t>(i - 1)); }
    const std::vector<point_t>& adversary_positions() const noexcept { return adversary_; }
    const std::vector<point_t>& algorithm_positions() const noexcept { return algorithm_; }

    void move_adversary(int i, point_t to) { adversary_.at(static_cast<std::size_t>(i - 1)) = checked(to); }
    void move_algorithm(int i, point_t to) { algorithm_.at(static_cast<std::size_t>(i - 1)) = checked(to); }

    // {i : a_i = s_i}, recomputed from positions.
    mask_t agreement() const
    {
        mask_t s = 0;
        for (int i = 1; i <= k_; ++i)
            if (adversary(i) == algorithm(i))
                s |= element_bit(i);
        return s;
    }

    bool occupied(point_t x) const
    {
        return std::find(adversary_.begin(), adversary_.end(), x) != adversary_.end() ||
               std::find(algorithm_.begin(), algorithm_.end(), x) != algorithm_.end();
    }

    bool algorithm_occupies(point_t x) const
    {
        return std::find(algorithm_.begin(), algorithm_.end(), x) != algorithm_.end();
    }

    // Lowest-indexed point with no server of either side.
    point_t lowest_free_point() const
    {
        for (point_t x = 0; x < points(); ++x)
            if (!occupied(x))
                return x;
        throw InternalConsistency("game: no free point on the metric");
    }

    // Algorithm servers distinct, adversary servers distinct, and
    // a_i != s_j whenever i < j.
    bool invariant_holds() const
    {
        auto distinct = [](std::vector<point_t> v) {
            std::sort(v.begin(), v.end());
            return std::adjacent_find(v.begin(), v.end()) == v.end();
        };
        if (!distinct(adversary_) || !distinct(algorithm_))
            return false;
        for (int i = 1; i <= k_; ++i)
            for (int j = i + 1; j <= k_; ++j)
                if (adversary(i) == algorithm(j))
                    return false;
        return true;
    }

    friend bool operator==(const GameState&, const GameState&) = default;

private:
    point_t checked(point_t x) const
    {
        if (x < 0 || x >= points())
            throw InvalidArgument("game: point " + std::to_string(x) + " is off the metric");
        return x;
    }

    int k_ = 0;
    std::vector<point_t> adversary_;
    std::vector<point_t> algorithm_;
};

enum class Phase { adversary, algorithm, eviction };

inline const char* to_string(Phase ph)
{
    switch (ph) {
    case Phase::adversary: return "adversary";
    case Phase::algorithm: return "algorithm";
    case Phase::eviction: return "eviction";
    }
    return "?";
}

struct AuditRecord {
    long step = 0;
    Phase phase = Phase::adversary;
    double delta_phi = 0; // exact change, or expected change for the algorithm phase
    double bound = 0;     // what delta_phi is compared with
    bool pass = true;
};

struct AuditSummary {
    long adversary_checks = 0, algorithm_checks = 0, eviction_checks = 0;
    long failures = 0;
    double worst_defect = 0;
    std::vector<AuditRecord> failed; // first few failures
    std::vector<AuditRecord> all;    // only with keep_all
};

struct CostLedger {
    double alg = 0;       // ALG
    double adv = 0;       // ADV: t-moves from full agreement
    double adv_evict = 0; // ADV': evictions keeping a_i != s_j for i < j
    long steps = 0;
    long t_moves = 0, evictions = 0;
    long prefix_violations = 0; // prefixes with ADV' > s ALG
    double phi_initial = 0, phi_final = 0;
    AuditSummary audit;

    // ALG / (ADV + ADV'); 0 when nothing was paid.
    double ratio() const { return adv + adv_evict > 0 ? alg / (adv + adv_evict) : 0.0; }
    double ratio_vs_adv() const { return adv > 0 ? alg / adv : 0.0; }
    double ratio_adjusted() const { return adv > 0 ? (alg + phi_final - phi_initial) / adv : 0.0; }
};

struct SimulationOptions {
    bool audit = true;
    bool keep_all_audit = false;
    double slack = 1e-9;
    std::size_t max_failed_records = 32;
    std::ostream* transcript = nullptr; // CSV rows when set
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (seed, run index).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t run_index)
{
    std::seed_seq seq{splitmix64(seed), splitmix64(seed ^ splitmix64(run_index + 1))};
    return std::mt19937_64(seq);
}

inline const char* transcript_header() { return "step,phase,request,mover,cost,state_mask,phi"; }

// One game of the memoryless algorithm against the adaptive adversary that
// always attacks with server t from full agreement.
class Simulator {
public:
    Simulator(WeightVector<double> beta, PotentialTable<double> table, int t, std::uint64_t seed,
              std::uint64_t run_index = 0, SimulationOptions opts = {})
        : beta_(std::move(beta)), table_(std::move(table)), t_(t), opts_(opts), state_(beta_.k()),
          rng_(make_stream(seed, run_index)), pick_(table_.p().values().begin(), table_.p().values().end())
    {
        const int k = beta_.k();
        if (table_.k() != k)
            throw InvalidArgument("simulate: weights and p differ in length");
        if (t < 1 || t > k)
            throw InvalidArgument("simulate: attacking server out of range");
        ratio_ = evaluate_ratio_functional(beta_, table_);
        for (int j = 1; j <= k; ++j)
            weighted_ += table_.p().rate(j) * beta_.weight(j);
        ledger_.phi_initial = ledger_.phi_final = potential(state_.agreement());
    }

    const GameState& state() const noexcept { return state_; }
    const CostLedger& ledger() const noexcept { return ledger_; }
    const RatioResult<double>& ratio() const noexcept { return ratio_; }

    // phi_S = -(sum_j p_j beta_j) phi_S(p)
    double potential(mask_t s) const { return -weighted_ * table_.phi(s); }

    struct Request {
        point_t point;
        double cost;
    };

    // The next request. Inside agreement: moves adversary server t to the
    // lowest free point and requests it. Otherwise requests a_i for the
    // smallest disagreeing i at no cost.
    Request adversary_turn()
    {
        const int k = state_.k();
        const mask_t before = state_.agreement();
        Request req{};
        if (before == full_mask(k)) {
            req.point = state_.lowest_free_point();
            req.cost = beta_.weight(t_);
            state_.move_adversary(t_, req.point);
            ledger_.adv += req.cost;
            ++ledger_.t_moves;
            if (opts_.audit)
                audit_t_move(before, state_.agreement());
            log(Phase::adversary, req.point, t_, req.cost);
        } else {
            req.point = state_.adversary(lowest_missing(before));
            req.cost = 0;
        }
        if (state_.algorithm_occupies(req.point))
            throw InternalConsistency("game: request lands on an algorithm server");
        return req;
    }

    // Moves server j with probability p_j / sum p to the request.
    int algorithm_turn(point_t request)
    {
        if (state_.algorithm_occupies(request))
            throw InvalidArgument("algorithm_turn: request is already covered");
        if (opts_.audit)
            audit_algorithm(request);
        const int j = pick_(rng_) + 1;
        state_.move_algorithm(j, request);
        ledger_.alg += beta_.weight(j);
        log(Phase::algorithm, request, j, beta_.weight(j));
        return j;
    }

    // Moves every adversary server i that an algorithm server j > i sits on
    // to the lowest free point, smallest i first. Returns the cost.
    double eviction_fixup()
    {
        double cost = 0;
        const int k = state_.k();
        for (int i = 1; i <= k; ++i) {
            bool hit = false;
            for (int j = i + 1; j <= k && !hit; ++j)
                hit = state_.algorithm(j) == state_.adversary(i);
            if (!hit)
                continue;
            const mask_t before = state_.agreement();
            const double phi_before = potential(before);
            const point_t to = state_.lowest_free_point();
            state_.move_adversary(i, to);
            cost += beta_.weight(i);
            ++ledger_.evictions;
            if (opts_.audit) {
                const mask_t after = state_.agreement();
                const double delta = potential(after) - phi_before;
                record(Phase::eviction, delta, 0.0, after == before && delta == 0.0, std::abs(delta));
            }
            log(Phase::eviction, to, i, beta_.weight(i));
        }
        ledger_.adv_evict += cost;
        if (!state_.invariant_holds())
            throw InternalConsistency("game: a_i != s_j (i < j) broken after eviction");
        return cost;
    }

    // One request: adversary, algorithm, evictions.
    void step()
    {
        ++ledger_.steps;
        const auto req = adversary_turn();
        algorithm_turn(req.point);
        eviction_fixup();
        if (ledger_.adv_evict > ratio_.s * ledger_.alg * (1 + 1e-12))
            ++ledger_.prefix_violations;
        ledger_.phi_final = potential(state_.agreement());
    }

    const CostLedger& run(long n_steps)
    {
        detail::require(n_steps >= 0, "simulate: step count must be nonnegative");
        for (long n = 0; n < n_steps; ++n)
            step();
        return ledger_;
    }

private:
    void audit_t_move(mask_t before, mask_t after)
    {
        const double delta = potential(after) - potential(before);
        const double bound = ratio_.alpha_tilde * beta_.weight(t_);
        const double scale = 1 + std::max(std::abs(delta), std::abs(bound));
        double defect = std::max(0.0, bound - delta) / scale;
        if (t_ == ratio_.arg_t)
            defect = std::abs(bound - delta) / scale;
        record(Phase::adversary, delta, bound, defect <= opts_.slack, defect);
    }

    // Expected potential change over the algorithm's choice, from copies of
    // the state, against the expected cost.
    void audit_algorithm(point_t request)
    {
        const auto& p = table_.p();
        const double phi_now = potential(state_.agreement());
        const double total = p.total();
        double expected_delta = 0, expected_cost = 0;
        for (int j = 1; j <= state_.k(); ++j) {
            GameState next = state_;
            next.move_algorithm(j, request);
            const double w = p.rate(j) / total;
            expected_delta += w * (potential(next.agreement()) - phi_now);
            expected_cost += w * beta_.weight(j);
        }
        const double defect = std::abs(expected_delta + expected_cost) /
                              (1 + std::max(std::abs(expected_delta), std::abs(expected_cost)));
        record(Phase::algorithm, expected_delta, -expected_cost, defect <= opts_.slack, defect);
    }

    void record(Phase phase, double delta, double bound, bool pass, double defect)
    {
        auto& a = ledger_.audit;
        switch (phase) {
        case Phase::adversary: ++a.adversary_checks; break;
        case Phase::algorithm: ++a.algorithm_checks; break;
        case Phase::eviction: ++a.eviction_checks; break;
        }
        a.worst_defect = std::max(a.worst_defect, defect);
        AuditRecord rec{ledger_.steps, phase, delta, bound, pass};
        if (!pass && a.failures++ < static_cast<long>(opts_.max_failed_records))
            a.failed.push_back(rec);
        if (opts_.keep_all_audit)
            a.all.push_back(rec);
    }

    void log(Phase phase, point_t request, int mover, double cost)
    {
        if (!opts_.transcript)
            return;
        const mask_t s = state_.agreement();
        *opts_.transcript << ledger_.steps << ',' << to_string(phase) << ',' << request << ','
                          << beta_.user_index(mover) << ',' << cost << ',' << s << ',' << potential(s) << '\n';
    }

    WeightVector<double> beta_;
    PotentialTable<double> table_;
    int t_;
    SimulationOptions opts_;
    GameState state_;
    std::mt19937_64 rng_;
    std::discrete_distribution<int> pick_;
    RatioResult<double> ratio_;
    double weighted_ = 0;
    CostLedger ledger_;
};

// Runs one game with t = the maximizing index of the ratio functional.
inline CostLedger run_game(const WeightVector<double>& beta, const PotentialTable<double>& table, long n_steps,
                           std::uint64_t seed, std::uint64_t run_index = 0, SimulationOptions opts = {})
{
    const int t = evaluate_ratio_functional(beta, table).arg_t;
    Simulator sim(beta, table, t, seed, run_index, opts);
    return sim.run(n_steps);
}

struct TrialSummary {
    std::vector<CostLedger> trials;
    double pooled_ratio = 0;   // sum ALG / sum (ADV + ADV')
    double mean_ratio = 0;     // mean of per-trial ratios
    double standard_error = 0; // across-trial standard error of the per-trial ratio
    long audit_failures = 0;
};

inline TrialSummary summarize(std::vector<CostLedger> trials)
{
    TrialSummary out;
    double alg = 0, paid = 0;
    for (const auto& l : trials) {
        alg += l.alg;
        paid += l.adv + l.adv_evict;
        out.mean_ratio += l.ratio();
        out.audit_failures += l.audit.failures;
    }
    const double n = static_cast<double>(trials.size());
    if (n > 0)
        out.mean_ratio /= n;
    out.pooled_ratio = paid > 0 ? alg / paid : 0.0;
    if (n > 1) {
        double ss = 0;
        for (const auto& l : trials)
            ss += (l.ratio() - out.mean_ratio) * (l.ratio() - out.mean_ratio);
        out.standard_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
    }
    out.trials = std::move(trials);
    return out;
}

inline TrialSummary run_trials(const WeightVector<double>& beta, const PotentialTable<double>& table, long n_steps,
                               int n_trials, std::uint64_t seed, SimulationOptions opts = {})
{
    std::vector<CostLedger> trials;
    for (int r = 0; r < n_trials; ++r)
        trials.push_back(run_game(beta, table, n_steps, seed, static_cast<std::uint64_t>(r), opts));
    return summarize(std::move(trials));
}

} // namespace wks
