#pragma once

#include <cmath>
#include <string>
#include <type_traits>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "error.hpp"

namespace wks {

namespace mp = boost::multiprecision;

using BigInt = mp::mpz_int;
using Rational = mp::number<mp::gmp_rational, mp::et_off>;
// Runtime-precision binary float; set the working precision with
// PrecisionScope before creating values.
using HighPrecision = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

template <class Real>
inline constexpr bool is_exact_v = std::is_same_v<Real, Rational>;

template <class Real>
double to_double(const Real& x)
{
    if constexpr (std::is_same_v<Real, double>)
        return x;
    else
        return x.template convert_to<double>();
}

template <class Real>
Real from_integer(const BigInt& n)
{
    if constexpr (std::is_same_v<Real, double>)
        return n.convert_to<double>();
    else
        return Real(n);
}

template <class Real>
Real abs_value(const Real& x)
{
    using std::abs;
    return abs(x);
}

// Sets the default decimal precision of HighPrecision for the lifetime of
// the scope and restores the previous one afterwards.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned digits10) : saved_(HighPrecision::default_precision())
    {
        HighPrecision::default_precision(digits10);
    }
    ~PrecisionScope() { HighPrecision::default_precision(saved_); }

    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

// Parses "12", "-0.125", "3e-4" or "7/9" exactly.
inline Rational parse_rational(const std::string& text)
{
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos)
            return Rational(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));

        std::string mantissa = text;
        long exponent = 0;
        if (auto e = mantissa.find_first_of("eE"); e != std::string::npos) {
            exponent = std::stol(mantissa.substr(e + 1));
            mantissa.resize(e);
        }
        if (auto dot = mantissa.find('.'); dot != std::string::npos) {
            exponent -= static_cast<long>(mantissa.size() - dot - 1);
            mantissa.erase(dot, 1);
        }
        if (mantissa.empty() || mantissa == "-" || mantissa == "+")
            throw InvalidArgument("not a number: '" + text + "'");
        if (mantissa.front() == '+')
            mantissa.erase(0, 1);
        BigInt num(mantissa);
        BigInt scale = mp::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
        return exponent >= 0 ? Rational(num * scale) : Rational(num, scale);
    } catch (const InvalidArgument&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidArgument("not a number: '" + text + "'");
    }
}

} // namespace wks
