// Three servers with weights 1, 10, 100: the rates that balance the
// potential currents, the resulting ratio, and a short game.

#include <iostream>

#include <wks/wks.hpp>

int main()
{
    using namespace wks;

    const auto constants = build_constants(3);
    const WeightVector<double> beta({1.0, 10.0, 100.0});
    const auto p = optimal_p(beta, constants);
    const auto table = solve_direct(p);
    const auto ratio = alpha_tilde(beta, table);

    std::cout << "alpha_3 = " << constants.alpha(3) << '\n';
    std::cout << "p = (" << p.rate(1) << ", " << p.rate(2) << ", " << p.rate(3) << ")\n";
    std::cout << "alpha_tilde = " << ratio.alpha_tilde << ", attacked server " << ratio.arg_t
              << ", lower bound " << ratio.lower_bound << '\n';

    const auto games = run_trials(beta, table, 200000, 4, 2024);
    std::cout << "pooled ALG/(ADV+ADV') over 4 games: " << games.pooled_ratio << " +- " << games.standard_error
              << ", audit failures " << games.audit_failures << '\n';
}
