#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "singsl/errors.hpp"

namespace singsl {

using Complex = std::complex<double>;

inline constexpr Complex iunit{0.0, 1.0};

/// Samples of a possibly discontinuous function on a strictly increasing grid.
/// left[i] / right[i] hold the one-sided limits at node i; they differ only at
/// jump nodes. left[0] and right[n-1] duplicate their partners so that every
/// cell [x_i, x_{i+1}] is described by (right[i], left[i+1]).
struct GridFn {
    std::vector<Complex> left;
    std::vector<Complex> right;

    GridFn() = default;
    explicit GridFn(std::size_t n) : left(n), right(n) {}

    std::size_t size() const { return left.size(); }

    bool continuous() const {
        for (std::size_t i = 0; i < left.size(); ++i)
            if (left[i] != right[i]) return false;
        return true;
    }
};

inline double sup_norm(const std::vector<Complex>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

inline double sup_norm(const GridFn& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        m = std::max({m, std::abs(f.left[i]), std::abs(f.right[i])});
    return m;
}

inline bool all_finite(const std::vector<Complex>& v) {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

/// Running integral of a piecewise-linear integrand with one-sided node
/// values: out[j] = integral from grid[0] to grid[j].
inline std::vector<Complex> cumulative_trapezoid(const std::vector<double>& grid,
                                                 const GridFn& v) {
    const std::size_t n = grid.size();
    std::vector<Complex> out(n, Complex{0.0, 0.0});
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dt = grid[j + 1] - grid[j];
        acc += 0.5 * dt * (v.right[j] + v.left[j + 1]);
        out[j + 1] = acc;
    }
    return out;
}

/// Running integral from the right end: out[j] = integral from grid[j] to grid[n-1].
inline std::vector<Complex> cumulative_trapezoid_backward(const std::vector<double>& grid,
                                                          const GridFn& v) {
    const std::size_t n = grid.size();
    std::vector<Complex> out(n, Complex{0.0, 0.0});
    Complex acc{0.0, 0.0};
    for (std::size_t j = n; j-- > 1;) {
        const double dt = grid[j] - grid[j - 1];
        acc += 0.5 * dt * (v.right[j - 1] + v.left[j]);
        out[j - 1] = acc;
    }
    return out;
}

/// Running integral by per-cell Simpson with one-sided endpoint evaluation:
/// out[j+1] - out[j] = dt/6 * (fr(x_j) + 4*fm(x_mid) + fl(x_{j+1})), where fr
/// evaluates the right limit, fl the left limit, and fm the interior value.
template <class FRight, class FMid, class FLeft>
std::vector<Complex> cumulative_simpson(const std::vector<double>& grid, FRight fr,
                                        FMid fm, FLeft fl) {
    const std::size_t n = grid.size();
    std::vector<Complex> out(n, Complex{0.0, 0.0});
    Complex acc{0.0, 0.0};
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double dt = grid[j + 1] - grid[j];
        const double mid = 0.5 * (grid[j] + grid[j + 1]);
        acc += (dt / 6.0) * (fr(grid[j]) + 4.0 * fm(mid) + fl(grid[j + 1]));
        out[j + 1] = acc;
    }
    return out;
}

/// Builds a strictly increasing grid on [a,b]: `min_points` uniform nodes plus
/// every entry of `extra` that falls inside (a,b). Uniform nodes that land
/// within a snap distance of an extra node are dropped in its favor, so jump
/// locations are preserved exactly.
inline std::vector<double> make_grid(double a, double b, int min_points,
                                     const std::vector<double>& extra = {}) {
    if (min_points < 16) throw GridError("grid resolution below 16 points");
    const double snap = 1e-13 * (b - a);

    std::vector<double> marks;
    for (double e : extra)
        if (e > a + snap && e < b - snap) marks.push_back(e);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end(),
                            [snap](double u, double v) { return v - u <= snap; }),
                marks.end());

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(min_points) + marks.size());
    const int cells = min_points - 1;
    std::size_t next_mark = 0;
    for (int i = 0; i <= cells; ++i) {
        double v = (i == cells) ? b : a + (b - a) * (static_cast<double>(i) / cells);
        while (next_mark < marks.size() && marks[next_mark] < v - snap)
            out.push_back(marks[next_mark++]);
        if (next_mark < marks.size() && std::abs(marks[next_mark] - v) <= snap)
            v = marks[next_mark++];
        out.push_back(v);
    }
    while (next_mark < marks.size()) out.push_back(marks[next_mark++]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace singsl
