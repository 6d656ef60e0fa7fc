#pragma once

// Independent reference solutions used to validate the Volterra path:
// closed forms for constant coefficients, an interface-matched transfer
// matrix for a single delta potential, and an adaptive Dormand-Prince
// integration of the first-order system for smooth coefficients.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "singsl/coefficients.hpp"
#include "singsl/errors.hpp"
#include "singsl/gridfn.hpp"
#include "singsl/volterra.hpp"

namespace singsl {

enum class OracleMethod { closed_form_constant, transfer_matrix_delta, adaptive_reference };

struct OracleSolution {
    std::vector<double> x;
    std::vector<Complex> y;
    std::vector<Complex> y_quasi;
    OracleMethod method = OracleMethod::closed_form_constant;
    double est_error = 0.0;
};

/// p = 0, u = 0, rho = rho0:  y = rho0^{-1/4} e^{+-i lambda sqrt(rho0) (x-a)}.
inline OracleSolution constant_closed_form(double rho0, Complex lambda, Interval iv,
                                           Branch branch, const std::vector<double>& x_eval) {
    if (!(rho0 > 0.0)) throw PositivityError("constant_closed_form: rho0 must be positive");
    OracleSolution sol;
    sol.method = OracleMethod::closed_form_constant;
    sol.x = x_eval;
    const double sr = std::sqrt(rho0);
    const Complex rate = (branch == Branch::plus ? iunit : -iunit) * lambda * sr;
    const Complex qfac = (branch == Branch::plus ? iunit : -iunit) * lambda * std::pow(rho0, 0.25);
    const double amp = std::pow(rho0, -0.25);
    sol.y.reserve(x_eval.size());
    sol.y_quasi.reserve(x_eval.size());
    for (double q : x_eval) {
        const Complex e = std::exp(rate * (q - iv.a));
        sol.y.push_back(amp * e);
        sol.y_quasi.push_back(qfac * e);
    }
    return sol;
}

/// Two-sided plane-wave coefficients for q = c delta(x - x0), rho = 1, p = 0:
/// y = A e^{i lambda (x-a)} + B e^{-i lambda (x-a)} on each side of x0.
struct DeltaPieces {
    Complex A_left{}, B_left{}, A_right{}, B_right{};
};

inline DeltaPieces delta_interface_coefficients(Complex c, double x0, Complex lambda,
                                                Interval iv, Branch branch) {
    if (!(x0 > iv.a && x0 < iv.b))
        throw DomainError("transfer_matrix_delta: x0 must lie strictly inside (a,b)");
    const Complex il = iunit * lambda;
    const double s0 = x0 - iv.a;
    DeltaPieces pc;
    if (branch == Branch::minus) {
        // left-endpoint data (y, y^[1]) (a) = (1, -i lambda); u = 0 there
        pc.A_left = Complex{0.0, 0.0};
        pc.B_left = Complex{1.0, 0.0};
        const Complex y0 = pc.A_left * std::exp(il * s0) + pc.B_left * std::exp(-il * s0);
        const Complex dy_left =
            il * (pc.A_left * std::exp(il * s0) - pc.B_left * std::exp(-il * s0));
        const Complex dy_right = dy_left + c * y0;  // y' jumps by c y(x0)
        pc.A_right = 0.5 * std::exp(-il * s0) * (y0 + dy_right / il);
        pc.B_right = 0.5 * std::exp(il * s0) * (y0 - dy_right / il);
    } else {
        // right-endpoint data (y, y^[1]) (b) = e^{i lambda (b-a)} (1, i lambda); u = c there
        const double sb = iv.b - iv.a;
        const Complex yb = std::exp(il * sb);
        const Complex dyb = (il + c) * yb;  // y' = y^[1] + u y at x = b
        pc.A_right = 0.5 * std::exp(-il * sb) * (yb + dyb / il);
        pc.B_right = 0.5 * std::exp(il * sb) * (yb - dyb / il);
        const Complex y0 = pc.A_right * std::exp(il * s0) + pc.B_right * std::exp(-il * s0);
        const Complex dy_right =
            il * (pc.A_right * std::exp(il * s0) - pc.B_right * std::exp(-il * s0));
        const Complex dy_left = dy_right - c * y0;
        pc.A_left = 0.5 * std::exp(-il * s0) * (y0 + dy_left / il);
        pc.B_left = 0.5 * std::exp(il * s0) * (y0 - dy_left / il);
    }
    return pc;
}

/// Exact weak solution for the single-delta potential. The quasi-derivative
/// y^[1] = y' - u y is matched across the jump, so it stays continuous while
/// y' itself jumps by c y(x0).
inline OracleSolution transfer_matrix_delta(Complex c, double x0, Complex lambda, Interval iv,
                                            Branch branch, const std::vector<double>& x_eval) {
    const DeltaPieces pc = delta_interface_coefficients(c, x0, lambda, iv, branch);
    const Complex il = iunit * lambda;
    OracleSolution sol;
    sol.method = OracleMethod::transfer_matrix_delta;
    sol.x = x_eval;
    for (double q : x_eval) {
        const double s = q - iv.a;
        const bool right = q > x0;  // u is left-continuous: u(x0) = 0
        const Complex A = right ? pc.A_right : pc.A_left;
        const Complex B = right ? pc.B_right : pc.B_left;
        const Complex ep = std::exp(il * s), em = std::exp(-il * s);
        const Complex y = A * ep + B * em;
        const Complex dy = il * (A * ep - B * em);
        const Complex u = right ? c : Complex{0.0, 0.0};
        sol.y.push_back(y);
        sol.y_quasi.push_back(dy - u * y);
    }
    return sol;
}

namespace detail {

/// Dormand-Prince 5(4) step on a fixed-size complex state.
template <std::size_t N, class Rhs>
struct Dopri5 {
    using State = std::array<Complex, N>;
    Rhs rhs;
    double atol, rtol;

    struct StepResult {
        State y;
        double err = 0.0;
    };

    StepResult step(double x, const State& y, const State& k1, double h) const {
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        State k2, k3, k4, k5, k6, k7, tmp;
        auto axpy = [&](const auto&... terms) {
            for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (... + terms(i));
        };
        axpy([&](std::size_t i) { return a21 * k1[i]; });
        rhs(x + h / 5.0, tmp, k2);
        axpy([&](std::size_t i) { return a31 * k1[i]; }, [&](std::size_t i) { return a32 * k2[i]; });
        rhs(x + 3.0 * h / 10.0, tmp, k3);
        axpy([&](std::size_t i) { return a41 * k1[i]; }, [&](std::size_t i) { return a42 * k2[i]; },
             [&](std::size_t i) { return a43 * k3[i]; });
        rhs(x + 4.0 * h / 5.0, tmp, k4);
        axpy([&](std::size_t i) { return a51 * k1[i]; }, [&](std::size_t i) { return a52 * k2[i]; },
             [&](std::size_t i) { return a53 * k3[i]; }, [&](std::size_t i) { return a54 * k4[i]; });
        rhs(x + 8.0 * h / 9.0, tmp, k5);
        axpy([&](std::size_t i) { return a61 * k1[i]; }, [&](std::size_t i) { return a62 * k2[i]; },
             [&](std::size_t i) { return a63 * k3[i]; }, [&](std::size_t i) { return a64 * k4[i]; },
             [&](std::size_t i) { return a65 * k5[i]; });
        rhs(x + h, tmp, k6);

        StepResult out;
        for (std::size_t i = 0; i < N; ++i)
            out.y[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(x + h, out.y, k7);
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const Complex le = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(out.y[i]));
            err = std::max(err, std::abs(le) / sc);
        }
        out.err = err;
        return out;
    }

    /// Integrates from x0 to x1 (either direction), invoking `capture` at every
    /// requested node in `targets` (must be ordered in integration direction).
    template <class Capture>
    double integrate(double x0, double x1, State y, const std::vector<double>& targets,
                     Capture capture) {
        const double span = std::abs(x1 - x0);
        const double dir = x1 > x0 ? 1.0 : -1.0;
        double x = x0;
        double h = dir * span / 100.0;
        double est = 0.0;
        State k1;
        rhs(x, y, k1);
        std::size_t ti = 0;
        while (ti < targets.size() && targets[ti] == x) capture(x, y), ++ti;
        while (ti < targets.size()) {
            if (std::abs(h) < 1e-12 * span)
                throw StiffnessError("adaptive_reference: step size collapsed");
            const double next = targets[ti];
            bool clipped = false;
            if ((next - x) * dir <= std::abs(h)) {
                h = next - x;
                clipped = true;
            }
            const StepResult r = step(x, y, k1, h);
            if (r.err <= 1.0) {  // accept
                x = clipped ? next : x + h;
                y = r.y;
                rhs(x, y, k1);  // no FSAL reuse: keeps the accept path simple
                est += r.err * (atol + rtol);  // accumulated relative-scale local error
                while (ti < targets.size() && (targets[ti] - x) * dir <= 0.0)
                    capture(targets[ti], y), ++ti;
            }
            const double fac = std::clamp(0.9 * std::pow(std::max(r.err, 1e-10), -0.2), 0.2, 5.0);
            h *= fac;
            if (std::abs(h) > span) h = dir * span;
        }
        return est;
    }
};

}  // namespace detail

/// Direct adaptive integration of the first-order system in the x variable,
/// with the sigma correction integral carried as an extra state. Restricted to
/// smooth coefficient sets; boundary data mirrors the Picard anchors exactly
/// (minus at x = a, plus at x = b).
inline OracleSolution adaptive_reference(const CoefficientSet& cs, Complex lambda, Branch branch,
                                         double tol, const std::vector<double>& x_eval) {
    if (!cs.smooth())
        throw DomainError("adaptive_reference requires smooth coefficients without breakpoints");
    if (!(tol > 0.0)) throw DomainError("adaptive_reference: tol must be positive");
    for (double q : x_eval)
        if (q < cs.interval.a || q > cs.interval.b)
            throw DomainError("adaptive_reference: evaluation point outside [a,b]");

    const Complex mu = -iunit * lambda;
    const Complex lam2 = lambda * lambda;
    const double amp = std::pow(cs.rho_at_a, -0.25);
    const Complex u_anchor = cs.u_at_a / std::sqrt(cs.rho_at_a);

    const auto coeffs_at = [&cs, &u_anchor](double q, Complex corr, Complex& sigma, Complex& f,
                                            double& sr) {
        const double rv = cs.rho.left(q).real();
        sr = std::sqrt(rv);
        const Complex uv = cs.u.left(q);
        const double rpv = cs.rho_prime.left(q).real();
        sigma = uv / sr - u_anchor + corr;
        f = cs.p.left(q) / sr - rpv / (2.0 * rv * sr);
    };

    // state: (y1, y2, corr, t)
    const auto rhs = [&](double q, const std::array<Complex, 4>& s,
                         std::array<Complex, 4>& ds) {
        Complex sigma, f;
        double sr;
        coeffs_at(q, s[2], sigma, f, sr);
        const Complex g = f * sigma - sigma * sigma;
        ds[0] = sr * (sigma * s[0] + s[1]);
        ds[1] = sr * ((-lam2 + g) * s[0] + (f - sigma) * s[1]);
        const double rv = sr * sr;
        ds[2] = cs.rho_prime.left(q).real() * cs.u.left(q) / (2.0 * rv * sr);
        ds[3] = Complex{sr, 0.0};
    };
    detail::Dopri5<4, decltype(rhs)> solver{rhs, tol, tol};

    OracleSolution sol;
    sol.method = OracleMethod::adaptive_reference;
    sol.x = x_eval;
    sol.y.resize(x_eval.size());
    sol.y_quasi.resize(x_eval.size());
    std::vector<std::size_t> order(x_eval.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    double est = 0.0;
    if (branch == Branch::minus) {
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return x_eval[i] < x_eval[j]; });
        std::vector<double> targets;
        for (std::size_t i : order) targets.push_back(x_eval[i]);
        std::array<Complex, 4> y0{amp, amp * mu, Complex{0.0, 0.0}, Complex{0.0, 0.0}};
        std::size_t slot = 0;
        est = solver.integrate(cs.interval.a, cs.interval.b, y0, targets,
                               [&](double q, const std::array<Complex, 4>& s) {
                                   const double sr = std::sqrt(cs.rho.left(q).real());
                                   sol.y[order[slot]] = s[0];
                                   sol.y_quasi[order[slot]] = sr * s[1];
                                   ++slot;
                               });
    } else {
        // preliminary pass for corr(b) and h
        std::array<Complex, 4> pre{Complex{0.0, 0.0}, Complex{0.0, 0.0}, Complex{0.0, 0.0},
                                   Complex{0.0, 0.0}};
        solver.integrate(cs.interval.a, cs.interval.b, pre, {cs.interval.b},
                         [&](double, const std::array<Complex, 4>& s) { pre = s; });
        const Complex corr_b = pre[2];
        const double h = pre[3].real();
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return x_eval[i] > x_eval[j]; });
        std::vector<double> targets;
        for (std::size_t i : order) targets.push_back(x_eval[i]);
        const Complex eb = std::exp(-mu * h);
        std::array<Complex, 4> y0{amp * eb, -amp * mu * eb, corr_b, Complex{h, 0.0}};
        std::size_t slot = 0;
        est = solver.integrate(cs.interval.b, cs.interval.a, y0, targets,
                               [&](double q, const std::array<Complex, 4>& s) {
                                   const double sr = std::sqrt(cs.rho.left(q).real());
                                   sol.y[order[slot]] = s[0];
                                   sol.y_quasi[order[slot]] = sr * s[1];
                                   ++slot;
                               });
    }
    sol.est_error = est;
    return sol;
}

}  // namespace singsl
