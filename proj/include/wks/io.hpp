#pragma once

#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "constants.hpp"
#include "game.hpp"
#include "numeric.hpp"
#include "potentials.hpp"
#include "ratio.hpp"
#include "verify.hpp"

namespace wks {

using json = nlohmann::json;

// Doubles as JSON numbers (shortest round trip); multiprecision values as
// strings carrying every stored digit.
template <class Real>
json number_to_json(const Real& x)
{
    if constexpr (std::is_same_v<Real, double>)
        return x;
    else if constexpr (is_exact_v<Real>)
        return x.str();
    else
        return x.str(0, std::ios_base::scientific);
}

template <class Real>
Real number_from_json(const json& j)
{
    if constexpr (std::is_same_v<Real, double>) {
        if (j.is_string())
            return std::stod(j.get<std::string>());
        return j.get<double>();
    } else {
        if (j.is_number())
            return Real(j.get<double>());
        return Real(j.get<std::string>());
    }
}

template <class Real>
json numbers_to_json(const std::vector<Real>& xs)
{
    json out = json::array();
    for (const Real& x : xs)
        out.push_back(number_to_json(x));
    return out;
}

template <class Real>
std::vector<double> to_doubles(const std::vector<Real>& xs)
{
    std::vector<double> out;
    for (const Real& x : xs)
        out.push_back(to_double(x));
    return out;
}

inline json to_json(const ConstantTable& t)
{
    json alpha = json::array();
    for (const BigInt& a : t.alphas())
        alpha.push_back(a.str());
    json c = json::object();
    for (mask_t s = 0; s < t.cells().size(); ++s)
        c[std::to_string(s)] = t.c(s).str();
    return {{"k", t.k()}, {"alpha", alpha}, {"C", c}};
}

inline ConstantTable constants_from_json(const json& j)
{
    try {
        const int k = j.at("k").get<int>();
        detail::require(k >= 1 && k <= max_constant_table_k, "constant table JSON: k out of range");
        std::vector<BigInt> alpha;
        for (const auto& a : j.at("alpha"))
            alpha.emplace_back(a.get<std::string>());
        std::vector<BigInt> c(std::size_t{1} << k);
        std::vector<bool> seen(c.size(), false);
        for (const auto& [key, value] : j.at("C").items()) {
            const unsigned long s = std::stoul(key);
            detail::require(s < c.size(), "constant table JSON: mask " + key + " out of range");
            c[s] = BigInt(value.get<std::string>());
            seen[s] = true;
        }
        detail::require(std::find(seen.begin(), seen.end(), false) == seen.end(),
                        "constant table JSON: missing cells");
        return ConstantTable(k, std::move(c), std::move(alpha));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("constant table JSON: ") + e.what());
    }
}

template <class Real>
json to_json(const PotentialTable<Real>& t)
{
    json phi = json::object(), f = json::object();
    for (mask_t s = 0; s <= full_mask(t.k()); ++s) {
        phi[std::to_string(s)] = number_to_json(t.phi(s));
        if (s != 0)
            f[std::to_string(s)] = number_to_json(t.f(s));
    }
    return {{"k", t.k()},
            {"p", numbers_to_json(t.p().values())},
            {"backend", to_string(t.backend())},
            {"phi", phi},
            {"f", f},
            {"residual", number_to_json(t.residual())},
            {"sweeps", t.sweeps()}};
}

template <class Real = double>
PotentialTable<Real> potentials_from_json(const json& j)
{
    try {
        const int k = j.at("k").get<int>();
        std::vector<Real> p;
        for (const auto& x : j.at("p"))
            p.push_back(number_from_json<Real>(x));
        ProbVector<Real> pv(std::move(p));
        detail::require(pv.k() == k, "potential table JSON: k does not match p");
        const auto backend_name = j.at("backend").get<std::string>();
        detail::require(backend_name == "direct" || backend_name == "gauss_seidel",
                        "potential table JSON: unknown backend " + backend_name);
        const std::size_t n = std::size_t{1} << k;
        std::vector<Real> phi(n, Real(0)), f(n, Real(0));
        auto fill = [&](const json& obj, std::vector<Real>& out, mask_t first) {
            for (mask_t s = first; s < n; ++s)
                out[s] = number_from_json<Real>(obj.at(std::to_string(s)));
        };
        fill(j.at("phi"), phi, 0);
        fill(j.at("f"), f, 1);
        PotentialTable<Real> t(std::move(pv), std::move(phi), std::move(f),
                               backend_name == "direct" ? Backend::direct : Backend::gauss_seidel);
        t.set_residual(number_from_json<Real>(j.at("residual")));
        t.set_sweeps(j.value("sweeps", 0L));
        return t;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("potential table JSON: ") + e.what());
    }
}

// arg_t and per_server in the caller's server order.
template <class Real>
json to_json(const RatioResult<Real>& r, const WeightVector<Real>& beta)
{
    return {{"alpha_tilde", to_double(r.alpha_tilde)},
            {"arg_t", beta.user_index(r.arg_t)},
            {"lower_bound", to_double(r.lower_bound)},
            {"s", to_double(r.s)},
            {"per_server", to_doubles(beta.to_user_order(r.per_server))}};
}

inline json to_json(const CheckRecord& r)
{
    return {{"check", r.check}, {"S", r.set},         {"i", r.server},  {"lhs", r.lhs},
            {"rhs", r.rhs},     {"defect", r.defect}, {"pass", r.pass}};
}

inline json to_json(const Report& r)
{
    json records = json::array();
    for (const auto& rec : r.records())
        records.push_back(to_json(rec));
    json out{{"name", r.name()},
             {"evaluated", r.evaluated()},
             {"failures", r.failures()},
             {"max_defect", r.max_defect()},
             {"records", records}};
    if (r.worst())
        out["worst"] = to_json(*r.worst());
    return out;
}

inline json to_json(const LimitReport& r)
{
    json points = json::array();
    for (const auto& pt : r.points) {
        double max_gap = 0;
        for (double g : pt.gaps)
            max_gap = std::max(max_gap, g);
        points.push_back({{"r", pt.r},
                          {"alpha_tilde", pt.alpha_tilde},
                          {"grid_min", pt.grid_min},
                          {"grid_argmin", pt.grid_argmin},
                          {"grid_points", pt.grid_points},
                          {"max_gap", max_gap},
                          {"gaps", pt.gaps}});
    }
    json checks = json::array();
    for (const Report* rep : r.reports())
        checks.push_back(to_json(*rep));
    return {{"k", r.k}, {"alpha_k", r.alpha_k}, {"ok", r.ok()}, {"points", points}, {"checks", checks}};
}

struct GameInputs {
    const WeightVector<double>& beta;
    const ProbVector<double>& p;
    int t; // sorted order
    long n;
    std::uint64_t seed;
};

inline json to_json(const CostLedger& l, const GameInputs& in)
{
    return {{"k", in.beta.k()},
            {"beta", in.beta.to_user_order(in.beta.values())},
            {"p", in.beta.to_user_order(in.p.values())},
            {"t", in.beta.user_index(in.t)},
            {"n", in.n},
            {"seed", in.seed},
            {"alg", l.alg},
            {"adv", l.adv},
            {"adv_evict", l.adv_evict},
            {"ratio", l.ratio()},
            {"ratio_vs_adv", l.ratio_vs_adv()},
            {"ratio_adjusted", l.ratio_adjusted()},
            {"t_moves", l.t_moves},
            {"evictions", l.evictions},
            {"prefix_violations", l.prefix_violations},
            {"audit_failures", l.audit.failures},
            {"audit_worst_defect", l.audit.worst_defect}};
}

} // namespace wks
