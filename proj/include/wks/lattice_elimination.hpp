#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"

namespace wks::detail {

// Dense row-major block of right-hand sides / solutions.
template <class Real>
struct Block {
    std::size_t rows = 0, cols = 0;
    std::vector<Real> v;

    Block(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, Real(0)) {}

    Real& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    const Real& operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

// Solves the per-level system for the f values.
//
// Unknowns x_T are indexed by subsets T of {0..d-1} (0-based servers). Each
// equation has the shape
//
//   (c + q_i + sum_{e in T} q_e) x_T = b_T + q_i x_{T u {i}} + sum_{e in T} q_e x_{T \ {e}}
//
// with i the lowest bit missing from T. This is a killed random walk on the
// lattice, so splitting on the top bit d-1 decouples it: the half without
// bit d-1 only reaches the other half through one set, and the half with bit
// d-1 only sees the first half through removals of d-1. Recursing on both
// halves solves a level of 2^d unknowns in O(2^d d^2) operations instead of
// the O(8^d) of dense elimination, which matters at high precision.
template <class Real>
class LatticeEliminator {
public:
    explicit LatticeEliminator(std::span<const Real> rates) : q_(rates) {}

    // Q-type problem: every T except the full set {0..d-1} is unknown; the
    // full set is a boundary with value y[col].
    Block<Real> solve_bounded(int d, const Real& c, const Block<Real>& b, const std::vector<Real>& y) const
    {
        const std::size_t n = b.cols;
        if (d == 0) {
            Block<Real> x(1, n);
            for (std::size_t j = 0; j < n; ++j)
                x(0, j) = y[j];
            return x;
        }
        const std::size_t half = std::size_t{1} << (d - 1);
        const Real& qd = q_[static_cast<std::size_t>(d - 1)];

        Block<Real> lower = solve_open(d - 1, c, rows(b, 0, half), y, qd);

        Block<Real> upper_rhs = rows(b, half, half);
        for (std::size_t r = 0; r < half; ++r)
            for (std::size_t j = 0; j < n; ++j)
                upper_rhs(r, j) += qd * lower(r, j);
        Block<Real> upper = solve_bounded(d - 1, c + qd, upper_rhs, y);

        return stack(lower, upper);
    }

    // P-type problem: every T is unknown. The full set adds server d at rate
    // r_top and leaves the lattice into a boundary with value y[col].
    Block<Real> solve_open(int d, const Real& c, const Block<Real>& b, const std::vector<Real>& y,
                           const Real& r_top) const
    {
        const std::size_t n = b.cols;
        if (d == 0) {
            Block<Real> x(1, n);
            const Real denom = c + r_top;
            for (std::size_t j = 0; j < n; ++j)
                x(0, j) = (b(0, j) + r_top * y[j]) / denom;
            return x;
        }
        const std::size_t half = std::size_t{1} << (d - 1);
        const Real& qd = q_[static_cast<std::size_t>(d - 1)];

        // Lower half: its top feeds the (still unknown) value z at the full
        // set. Column n is the response to z = 1 with b = 0 and column n+1
        // is one minus that response; the constant 1 solves each half with
        // b = c and y = 1, so the complement has positive data and the
        // coupling below never subtracts nearly equal numbers.
        Block<Real> lower_rhs(half, n + 2);
        for (std::size_t r = 0; r < half; ++r) {
            for (std::size_t j = 0; j < n; ++j)
                lower_rhs(r, j) = b(r, j);
            lower_rhs(r, n + 1) = c;
        }
        std::vector<Real> lower_y(n + 2, Real(0));
        lower_y[n] = Real(1);
        Block<Real> lower = solve_open(d - 1, c, lower_rhs, lower_y, qd);

        Block<Real> upper_rhs(half, n + 2);
        for (std::size_t r = 0; r < half; ++r) {
            for (std::size_t j = 0; j < n; ++j)
                upper_rhs(r, j) = b(half + r, j) + qd * lower(r, j);
            upper_rhs(r, n) = qd * lower(r, n);
            upper_rhs(r, n + 1) = c + qd * lower(r, n + 1);
        }
        std::vector<Real> upper_y(y.begin(), y.end());
        upper_y.push_back(Real(0));
        upper_y.push_back(Real(1));
        Block<Real> upper = solve_open(d - 1, c + qd, upper_rhs, upper_y, r_top);

        const std::size_t top = half - 1;
        const Real& denom = upper(top, n + 1);
        if (!(denom > 0))
            throw InternalConsistency("level system lost diagonal dominance during elimination");

        Block<Real> x(2 * half, n);
        for (std::size_t j = 0; j < n; ++j) {
            const Real z = upper(top, j) / denom;
            for (std::size_t r = 0; r < half; ++r) {
                x(r, j) = lower(r, j) + z * lower(r, n);
                x(half + r, j) = upper(r, j) + z * upper(r, n);
            }
        }
        return x;
    }

private:
    static Block<Real> rows(const Block<Real>& b, std::size_t first, std::size_t count)
    {
        Block<Real> out(count, b.cols);
        for (std::size_t r = 0; r < count; ++r)
            for (std::size_t j = 0; j < b.cols; ++j)
                out(r, j) = b(first + r, j);
        return out;
    }

    static Block<Real> stack(const Block<Real>& top, const Block<Real>& bottom)
    {
        Block<Real> out(top.rows + bottom.rows, top.cols);
        for (std::size_t r = 0; r < top.rows; ++r)
            for (std::size_t j = 0; j < top.cols; ++j)
                out(r, j) = top(r, j);
        for (std::size_t r = 0; r < bottom.rows; ++r)
            for (std::size_t j = 0; j < top.cols; ++j)
                out(top.rows + r, j) = bottom(r, j);
        return out;
    }

    std::span<const Real> q_;
};

} // namespace wks::detail
