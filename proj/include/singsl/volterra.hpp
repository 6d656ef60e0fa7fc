#pragma once

// The Volterra machinery: oscillatory quadrature against e^{-2 mu (t-xi)}
// kernels, the forward operators (A, B), the backward operators (A1, B1),
// and the Picard fixed-point solver for z = (1,1)^T + A z + B z.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "singsl/errors.hpp"
#include "singsl/gridfn.hpp"
#include "singsl/liouville.hpp"

namespace singsl {

inline constexpr double kMuMin = 1.0;

enum class Halfplane { upper, lower };

/// lambda together with mu = -i lambda and the declared half-plane strip.
struct SpectralPoint {
    Complex lambda{};
    Complex mu{};  // always -i * lambda
    Halfplane halfplane = Halfplane::upper;
    double r = 0.0;
};

/// Validates |mu| >= 1 and membership in the declared half-plane.
inline SpectralPoint make_spectral_point(Complex lambda, double r,
                                         Halfplane hp = Halfplane::upper) {
    if (r < 0.0) throw HalfPlaneError("half-plane width r must be nonnegative");
    SpectralPoint sp;
    sp.lambda = lambda;
    sp.mu = Complex{0.0, -1.0} * lambda;
    sp.halfplane = hp;
    sp.r = r;
    if (std::abs(sp.mu) < kMuMin)
        throw HalfPlaneError("|mu| = |lambda| below the mu_min = 1 cutoff");
    if (hp == Halfplane::upper && lambda.imag() < -r)
        throw HalfPlaneError("lambda outside the upper half-plane Im lambda >= -r");
    if (hp == Halfplane::lower && lambda.imag() > r)
        throw HalfPlaneError("lambda outside the lower half-plane Im lambda <= r");
    return sp;
}

struct IterationConfig {
    double tol = 1e-10;  // relative sup-norm stopping tolerance
    int n_max = 200;     // iteration cap
    double kappa = 8.0;  // samples per oscillation wavelength
    int n_min = 512;     // minimum t-grid points

    void validate() const {
        if (!(tol > 0.0)) throw GridError("IterationConfig: tol must be positive");
        if (n_max < 1) throw GridError("IterationConfig: n_max must be >= 1");
        if (kappa < 4.0) throw GridError("IterationConfig: kappa must be >= 4");
        if (n_min < 16) throw GridError("IterationConfig: n_min must be >= 16");
    }

    /// Grid nodes needed to resolve e^{2 mu t} at this lambda.
    int required_points(Complex lambda, double h) const {
        const double need = kappa * (std::abs(lambda) * h / std::numbers::pi + 1.0);
        return std::max(n_min, static_cast<int>(std::ceil(need)));
    }
};

/// Pair of component vectors (z1, z2) on the t grid.
struct ZPair {
    std::vector<Complex> z1, z2;

    ZPair() = default;
    explicit ZPair(std::size_t n, Complex fill = Complex{0.0, 0.0})
        : z1(n, fill), z2(n, fill) {}
    std::size_t size() const { return z1.size(); }
};

inline double sup_norm(const ZPair& z) {
    return std::max(sup_norm(z.z1), sup_norm(z.z2));
}

enum class Direction { forward, backward };
enum class Branch { plus, minus };

/// The plus branch is anchored at t = h and solved by the backward system;
/// the minus branch is anchored at t = 0 and solved by the forward one.
inline Direction direction_of(Branch b) {
    return b == Branch::plus ? Direction::backward : Direction::forward;
}

namespace detail {

/// Exponential moments of one cell: m0 = int_0^d e^{-w s} ds,
/// m1 = int_0^d s e^{-w s} ds, E = e^{-w d}. Series branch keeps full
/// precision for small |w d|.
struct FilonCell {
    Complex E{1.0, 0.0};
    Complex m0{};
    Complex m1{};
    double dt = 0.0;
};

inline FilonCell make_filon_cell(Complex w, double dt) {
    FilonCell c;
    c.dt = dt;
    const Complex zeta = w * dt;
    c.E = std::exp(-zeta);
    if (std::abs(zeta) <= 0.5) {
        Complex pow{1.0, 0.0};  // (-zeta)^k / k!
        Complex s0{0.0, 0.0}, s1{0.0, 0.0};
        for (int k = 0; k < 18; ++k) {
            s0 += pow / static_cast<double>(k + 1);
            s1 += pow / static_cast<double>(k + 2);
            pow *= -zeta / static_cast<double>(k + 1);
        }
        c.m0 = dt * s0;
        c.m1 = dt * dt * s1;
    } else {
        c.m0 = (1.0 - c.E) / w;
        c.m1 = (1.0 - c.E * (1.0 + zeta)) / (w * w);
    }
    return c;
}

/// Integral over one cell of e^{-w (d - s)} * linear(A -> B), exact for the
/// linear interpolant.
inline Complex filon_cell_forward(const FilonCell& c, Complex A, Complex B) {
    return B * c.m0 + (A - B) * (c.m1 / c.dt);
}

/// Integral over one cell of e^{-w s} * linear(A -> B).
inline Complex filon_cell_backward(const FilonCell& c, Complex A, Complex B) {
    return A * c.m0 + (B - A) * (c.m1 / c.dt);
}

inline void check_kernel_exponent(Complex mu, double r, double h) {
    const double worst = std::max(0.0, -2.0 * mu.real()) * h;
    if (worst > 2.0 * r * h + 50.0)
        throw HalfPlaneError("kernel exponent " + std::to_string(worst) +
                             " beyond the declared half-plane budget");
    if (worst > 600.0) throw HalfPlaneError("kernel exponent too large for double range");
}

inline std::vector<FilonCell> make_cells(const std::vector<double>& t, Complex mu, double r,
                                         double h) {
    check_kernel_exponent(mu, r, h);
    std::vector<FilonCell> cells(t.size() > 0 ? t.size() - 1 : 0);
    for (std::size_t j = 0; j + 1 < t.size(); ++j)
        cells[j] = make_filon_cell(2.0 * mu, t[j + 1] - t[j]);
    return cells;
}

}  // namespace detail

/// out[j] = int_0^{t_j} e^{-2 mu (t_j - xi)} psi(xi) d xi  (forward), or
/// out[j] = int_{t_j}^{h} e^{ 2 mu (t_j - xi)} psi(xi) d xi  (backward),
/// with psi replaced by its piecewise-linear interpolant per cell.
inline std::vector<Complex> oscillatory_sweep(const std::vector<double>& t, const GridFn& psi,
                                              Complex mu, Direction dir, double r) {
    const std::size_t n = t.size();
    if (psi.size() != n) throw GridError("oscillatory_sweep: psi size mismatch");
    const auto cells = detail::make_cells(t, mu, r, n ? t.back() - t.front() : 0.0);
    std::vector<Complex> out(n, Complex{0.0, 0.0});
    if (dir == Direction::forward) {
        for (std::size_t j = 0; j + 1 < n; ++j)
            out[j + 1] = cells[j].E * out[j] +
                         detail::filon_cell_forward(cells[j], psi.right[j], psi.left[j + 1]);
    } else {
        for (std::size_t j = n; j-- > 1;)
            out[j - 1] = cells[j - 1].E * out[j] +
                         detail::filon_cell_backward(cells[j - 1], psi.right[j - 1], psi.left[j]);
    }
    return out;
}

/// Single-node convenience wrapper around oscillatory_sweep.
inline Complex oscillatory_integral(const std::vector<double>& t, const GridFn& psi, Complex mu,
                                    std::size_t node, Direction dir, double r = 0.0) {
    if (node >= t.size()) throw GridError("oscillatory_integral: node out of range");
    return oscillatory_sweep(t, psi, mu, dir, r)[node];
}

namespace detail {

/// Kernel coefficient rows shared by the four operators:
/// a = sigma + g/mu, b = f - sigma, c = sigma - g/mu, one-sided per node.
struct KernelRows {
    GridFn a, b, c;

    KernelRows(const TransformedSystem& ts, Complex mu) {
        const std::size_t n = ts.t.size();
        a = GridFn(n);
        b = GridFn(n);
        c = GridFn(n);
        const Complex inv_mu = 1.0 / mu;
        for (std::size_t i = 0; i < n; ++i) {
            a.left[i] = ts.sigma.left[i] + inv_mu * ts.g.left[i];
            a.right[i] = ts.sigma.right[i] + inv_mu * ts.g.right[i];
            b.left[i] = ts.f.left[i] - ts.sigma.left[i];
            b.right[i] = ts.f.right[i] - ts.sigma.right[i];
            c.left[i] = ts.sigma.left[i] - inv_mu * ts.g.left[i];
            c.right[i] = ts.sigma.right[i] - inv_mu * ts.g.right[i];
        }
    }
};

inline GridFn combine(const GridFn& w1, const std::vector<Complex>& z1, const GridFn& w2,
                      const std::vector<Complex>& z2, double s2) {
    const std::size_t n = z1.size();
    GridFn out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.left[i] = w1.left[i] * z1[i] + s2 * w2.left[i] * z2[i];
        out.right[i] = w1.right[i] * z1[i] + s2 * w2.right[i] * z2[i];
    }
    return out;
}

}  // namespace detail

/// One assembled application of A + B (forward) or A1 + B1 (backward),
/// with the per-cell exponential moments precomputed once per spectral point.
class VolterraOperator {
public:
    VolterraOperator(const TransformedSystem& ts, const SpectralPoint& sp, Direction dir)
        : ts_(&ts), dir_(dir), rows_(ts, sp.mu),
          cells_(detail::make_cells(ts.t, sp.mu, sp.r, ts.h)) {}

    Direction direction() const { return dir_; }

    /// z -> (A + B) z  or  z -> (A1 + B1) z.
    ZPair apply(const ZPair& z) const {
        const std::size_t n = ts_->t.size();
        ZPair out(n);
        if (dir_ == Direction::forward) {
            const GridFn smooth = detail::combine(rows_.a, z.z1, rows_.b, z.z2, +1.0);
            const GridFn osc = detail::combine(rows_.c, z.z1, rows_.b, z.z2, -1.0);
            const auto trap = cumulative_trapezoid(ts_->t, smooth);
            std::vector<Complex> sweep(n, Complex{0.0, 0.0});
            for (std::size_t j = 0; j + 1 < n; ++j)
                sweep[j + 1] =
                    cells_[j].E * sweep[j] +
                    detail::filon_cell_forward(cells_[j], osc.right[j], osc.left[j + 1]);
            for (std::size_t i = 0; i < n; ++i) {
                out.z1[i] = 0.5 * (trap[i] + sweep[i]);
                out.z2[i] = 0.5 * (trap[i] - sweep[i]);
            }
        } else {
            const GridFn smooth = detail::combine(rows_.c, z.z1, rows_.b, z.z2, +1.0);
            const GridFn osc = detail::combine(rows_.a, z.z1, rows_.b, z.z2, -1.0);
            const auto trap = cumulative_trapezoid_backward(ts_->t, smooth);
            std::vector<Complex> sweep(n, Complex{0.0, 0.0});
            for (std::size_t j = n; j-- > 1;)
                sweep[j - 1] =
                    cells_[j - 1].E * sweep[j] +
                    detail::filon_cell_backward(cells_[j - 1], osc.right[j - 1], osc.left[j]);
            for (std::size_t i = 0; i < n; ++i) {
                out.z1[i] = -0.5 * (trap[i] + sweep[i]);
                out.z2[i] = -0.5 * (trap[i] - sweep[i]);
            }
        }
        return out;
    }

private:
    const TransformedSystem* ts_;
    Direction dir_;
    detail::KernelRows rows_;
    std::vector<detail::FilonCell> cells_;
};

/// (A z): both rows equal (1/2) int_0^t [(sigma + g/mu) z1 + (f - sigma) z2].
inline ZPair apply_A(const TransformedSystem& ts, const SpectralPoint& sp, const ZPair& z) {
    const detail::KernelRows rows(ts, sp.mu);
    const auto trap = cumulative_trapezoid(ts.t, detail::combine(rows.a, z.z1, rows.b, z.z2, +1.0));
    ZPair out(ts.t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.z1[i] = 0.5 * trap[i];
        out.z2[i] = out.z1[i];
    }
    return out;
}

/// (B z): row 1 = (1/2) int_0^t e^{-2mu(t-xi)} [(sigma - g/mu) z1 - (f - sigma) z2],
/// row 2 = -(row 1).
inline ZPair apply_B(const TransformedSystem& ts, const SpectralPoint& sp, const ZPair& z) {
    const detail::KernelRows rows(ts, sp.mu);
    const auto sweep = oscillatory_sweep(
        ts.t, detail::combine(rows.c, z.z1, rows.b, z.z2, -1.0), sp.mu, Direction::forward, sp.r);
    ZPair out(ts.t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.z1[i] = 0.5 * sweep[i];
        out.z2[i] = -out.z1[i];
    }
    return out;
}

/// (A1 z): both rows equal -(1/2) int_t^h [(sigma - g/mu) z1 + (f - sigma) z2].
inline ZPair apply_A1(const TransformedSystem& ts, const SpectralPoint& sp, const ZPair& z) {
    const detail::KernelRows rows(ts, sp.mu);
    const auto trap =
        cumulative_trapezoid_backward(ts.t, detail::combine(rows.c, z.z1, rows.b, z.z2, +1.0));
    ZPair out(ts.t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.z1[i] = -0.5 * trap[i];
        out.z2[i] = out.z1[i];
    }
    return out;
}

/// (B1 z): row 1 = -(1/2) int_t^h e^{2mu(t-xi)} [(sigma + g/mu) z1 - (f - sigma) z2],
/// row 2 = -(row 1).
inline ZPair apply_B1(const TransformedSystem& ts, const SpectralPoint& sp, const ZPair& z) {
    const detail::KernelRows rows(ts, sp.mu);
    const auto sweep = oscillatory_sweep(
        ts.t, detail::combine(rows.a, z.z1, rows.b, z.z2, -1.0), sp.mu, Direction::backward, sp.r);
    ZPair out(ts.t.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.z1[i] = -0.5 * sweep[i];
        out.z2[i] = -out.z1[i];
    }
    return out;
}

/// Norm bound 2 (2C)^n F_h^n / n! on the n-fold product of operators whose
/// kernels are enveloped by C v(xi) with int_0^h v = F_h.
inline double apriori_bound(double C, double F_h, int n) {
    double val = 2.0;
    for (int k = 1; k <= n; ++k) val *= 2.0 * C * F_h / k;
    return val;
}

/// int_0^h (|f| + |g| + |sigma|), the Lemma-2 envelope mass.
inline double envelope_mass(const TransformedSystem& ts) {
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < ts.t.size(); ++j) {
        const double dt = ts.t[j + 1] - ts.t[j];
        const double vr =
            std::abs(ts.f.right[j]) + std::abs(ts.g.right[j]) + std::abs(ts.sigma.right[j]);
        const double vl = std::abs(ts.f.left[j + 1]) + std::abs(ts.g.left[j + 1]) +
                          std::abs(ts.sigma.left[j + 1]);
        acc += 0.5 * dt * (vr + vl);
    }
    return acc;
}

/// Kernel envelope constant of A + B over the declared strip.
inline double envelope_constant(const SpectralPoint& sp, double h) {
    return 0.5 * (1.0 + std::exp(2.0 * sp.r * h));
}

/// Guaranteed tail mass  sum_{k >= n} 2 (2C F_h)^k / k!  of the Neumann series.
inline double neumann_tail(double C, double F_h, int n) {
    double tail = 0.0;
    double term = apriori_bound(C, F_h, n);
    for (int k = n; k < n + 400 && term > 0.0; ++k) {
        tail += term;
        term *= 2.0 * C * F_h / (k + 1);
        if (!std::isfinite(tail)) return std::numeric_limits<double>::infinity();
    }
    return tail;
}

struct IterationState {
    std::vector<Complex> z1, z2;
    int iterations_used = 0;
    double final_increment = 0.0;
    double apriori_tail_bound = 0.0;
    Direction direction = Direction::forward;
};

/// Picard iteration z^{k+1} = (1,1)^T + T z^k from z^0 = (1,1)^T, where T is
/// A + B (minus branch) or A1 + B1 (plus branch). Convergence is guaranteed in
/// exact arithmetic: T is Volterra, so its spectral radius is zero.
inline IterationState picard_solve(const TransformedSystem& ts, const SpectralPoint& sp,
                                   Branch branch, const IterationConfig& cfg = {}) {
    cfg.validate();
    const std::size_t n = ts.t.size();
    const int required = cfg.required_points(sp.lambda, ts.h);
    if (static_cast<int>(n) < required)
        throw GridError("t grid has " + std::to_string(n) + " points but the oscillation policy needs " +
                        std::to_string(required));

    const VolterraOperator op(ts, sp, direction_of(branch));
    ZPair z(n, Complex{1.0, 0.0});
    IterationState st;
    st.direction = op.direction();
    for (int it = 1; it <= cfg.n_max; ++it) {
        const ZPair tz = op.apply(z);
        double inc = 0.0;
        double sup = 0.0;
        ZPair next(n);
        for (std::size_t i = 0; i < n; ++i) {
            next.z1[i] = 1.0 + tz.z1[i];
            next.z2[i] = 1.0 + tz.z2[i];
            inc = std::max({inc, std::abs(next.z1[i] - z.z1[i]), std::abs(next.z2[i] - z.z2[i])});
            sup = std::max({sup, std::abs(next.z1[i]), std::abs(next.z2[i])});
        }
        z = std::move(next);
        st.iterations_used = it;
        st.final_increment = inc;
        if (inc <= cfg.tol * (1.0 + sup)) {
            st.z1 = std::move(z.z1);
            st.z2 = std::move(z.z2);
            st.apriori_tail_bound =
                neumann_tail(envelope_constant(sp, ts.h), envelope_mass(ts), it);
            if (!all_finite(st.z1) || !all_finite(st.z2))
                throw NoConvergenceError("Picard iteration produced non-finite values");
            return st;
        }
    }
    throw NoConvergenceError("Picard iteration did not reach tolerance in " +
                             std::to_string(cfg.n_max) +
                             " iterations (under-resolved grid or invalid half-plane?)");
}

/// sup |z - (1,1)^T - T z| / (1 + sup|z|): how well the converged iterate
/// satisfies its own integral equation.
inline double fixed_point_residual(const TransformedSystem& ts, const SpectralPoint& sp,
                                   Branch branch, const IterationState& st) {
    const VolterraOperator op(ts, sp, direction_of(branch));
    ZPair z;
    z.z1 = st.z1;
    z.z2 = st.z2;
    const ZPair tz = op.apply(z);
    double res = 0.0, sup = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        res = std::max({res, std::abs(z.z1[i] - 1.0 - tz.z1[i]),
                        std::abs(z.z2[i] - 1.0 - tz.z2[i])});
        sup = std::max({sup, std::abs(z.z1[i]), std::abs(z.z2[i])});
    }
    return res / (1.0 + sup);
}

}  // namespace singsl
