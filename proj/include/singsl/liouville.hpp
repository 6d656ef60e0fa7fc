#pragma once

// Change of variables t = int_a^x sqrt(rho) and the transformed t-variable
// system: f = p/sqrt(rho) - rho'_t/(2 rho), sigma = antiderivative of q/rho,
// g = f*sigma - sigma^2, F = int_0^t f.

#include <algorithm>
#include <cmath>
#include <vector>

#include "singsl/coefficients.hpp"
#include "singsl/errors.hpp"
#include "singsl/gridfn.hpp"

namespace singsl {

struct GridPolicy {
    int min_points = 512;
};

inline constexpr double kMapTolFactor = 1e-10;     // round-trip bound, times (b-a)
inline constexpr double kConsistencyTol = 1e-6;    // transform identity bound

/// Monotone piecewise-linear correspondence between x in [a,b] and t in [0,h].
struct LiouvilleMap {
    std::vector<double> x;  // strictly increasing, x.front()=a, x.back()=b
    std::vector<double> t;  // strictly increasing, t.front()=0, t.back()=h
    double h = 0.0;

    double t_of_x(double q) const { return interp(x, t, q); }
    double x_of_t(double q) const { return interp(t, x, q); }

private:
    static double interp(const std::vector<double>& from, const std::vector<double>& to,
                         double q) {
        const auto it = std::upper_bound(from.begin(), from.end(), q);
        if (it == from.begin()) return to.front();
        if (it == from.end()) return to.back();
        const std::size_t i = static_cast<std::size_t>(it - from.begin());
        const double w = (q - from[i - 1]) / (from[i] - from[i - 1]);
        return to[i - 1] + w * (to[i] - to[i - 1]);
    }
};

/// Builds the map by per-cell Simpson quadrature of sqrt(rho). All breakpoints
/// and sample kinks become grid nodes.
inline LiouvilleMap build_map(const CoefficientSet& cs, GridPolicy policy = {}) {
    if (policy.min_points < 16) throw GridError("map resolution below 16 points");
    LiouvilleMap map;
    map.x = make_grid(cs.interval.a, cs.interval.b, policy.min_points, cs.grid_marks);
    const auto sr = [&cs](double q) { return std::sqrt(cs.rho.left(q).real()); };
    map.t.assign(map.x.size(), 0.0);
    for (std::size_t j = 0; j + 1 < map.x.size(); ++j) {
        const double dx = map.x[j + 1] - map.x[j];
        const double mid = 0.5 * (map.x[j] + map.x[j + 1]);
        const double inc = (dx / 6.0) * (sr(map.x[j]) + 4.0 * sr(mid) + sr(map.x[j + 1]));
        map.t[j + 1] = map.t[j] + inc;
        if (!(inc > 0.0)) throw GridError("t grid not strictly increasing (rho too small?)");
    }
    map.h = map.t.back();
    return map;
}

/// Coefficients of system (y, y^[1])' = ((sigma, 1), (-lambda^2 + g, f - sigma)) (y, y^[1]),
/// tabulated on the map grid with one-sided node values.
struct TransformedSystem {
    std::vector<double> x;  // map grid
    std::vector<double> t;
    double h = 0.0;
    GridFn f;                       // p/sqrt(rho) - rho'_x/(2 rho^{3/2})
    GridFn sigma;                   // antiderivative of q/rho in t, sigma(0) = 0
    GridFn g;                       // f*sigma - sigma^2
    std::vector<Complex> F;         // int_0^t f, continuous
    GridFn h_x;                     // int_a^x q/sqrt(rho), the quasi-derivative weight
    std::vector<Complex> P;         // int_a^x p on the same grid
    std::vector<double> rho;        // continuous samples
    std::vector<double> sqrt_rho;
    double rho_at_a = 1.0;
};

/// sigma(t) = u/sqrt(rho) - u(a)/sqrt(rho(a)) + int_a^x rho' u / (2 rho^{3/2}),
/// evaluated without ever differentiating u. The correction integral is an
/// ordinary absolutely convergent integral by the rho' u in L1 condition.
inline GridFn compute_sigma(const CoefficientSet& cs, const LiouvilleMap& map) {
    const std::size_t n = map.x.size();
    const auto corr_integrand_r = [&cs](double q) {
        return cs.rho_prime.right(q) * cs.u.right(q) /
               (2.0 * std::pow(cs.rho.right(q).real(), 1.5));
    };
    const auto corr_integrand_l = [&cs](double q) {
        return cs.rho_prime.left(q) * cs.u.left(q) /
               (2.0 * std::pow(cs.rho.left(q).real(), 1.5));
    };
    const std::vector<Complex> corr =
        cumulative_simpson(map.x, corr_integrand_r, corr_integrand_l, corr_integrand_l);

    const double sra = std::sqrt(cs.rho_at_a);
    const Complex anchor = cs.u_at_a / sra;
    GridFn sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double srl = std::sqrt(cs.rho.left(map.x[i]).real());
        const double srr = std::sqrt(cs.rho.right(map.x[i]).real());
        sigma.left[i] = cs.u.left(map.x[i]) / srl - anchor + corr[i];
        sigma.right[i] = cs.u.right(map.x[i]) / srr - anchor + corr[i];
    }
    sigma.left[0] = sigma.right[0];          // t = 0: only the right limit exists
    sigma.right[n - 1] = sigma.left[n - 1];  // t = h: only the left limit exists
    return sigma;
}

inline TransformedSystem transform(const CoefficientSet& cs, const LiouvilleMap& map) {
    TransformedSystem ts;
    ts.x = map.x;
    ts.t = map.t;
    ts.h = map.h;
    ts.rho_at_a = cs.rho_at_a;
    const std::size_t n = map.x.size();

    ts.rho.resize(n);
    ts.sqrt_rho.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts.rho[i] = cs.rho.left(map.x[i]).real();
        ts.sqrt_rho[i] = std::sqrt(ts.rho[i]);
    }

    const auto f_side = [&cs](Complex pv, double rpv, double rv) {
        return pv / std::sqrt(rv) - rpv / (2.0 * std::pow(rv, 1.5));
    };
    ts.f = GridFn(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double q = map.x[i];
        ts.f.left[i] = f_side(cs.p.left(q), cs.rho_prime.left(q).real(), cs.rho.left(q).real());
        ts.f.right[i] =
            f_side(cs.p.right(q), cs.rho_prime.right(q).real(), cs.rho.right(q).real());
    }
    ts.f.left[0] = ts.f.right[0];
    ts.f.right[n - 1] = ts.f.left[n - 1];

    ts.sigma = compute_sigma(cs, map);

    ts.g = GridFn(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts.g.left[i] = ts.f.left[i] * ts.sigma.left[i] - ts.sigma.left[i] * ts.sigma.left[i];
        ts.g.right[i] = ts.f.right[i] * ts.sigma.right[i] - ts.sigma.right[i] * ts.sigma.right[i];
    }

    // F = int_0^t f d(xi). By dt = sqrt(rho) dx this equals the x-integral of
    // p - rho'/(2 rho), which keeps the transform identity defect at the level
    // of the rho'/rho quadrature alone.
    const auto F_integrand_r = [&cs](double q) {
        return cs.p.right(q) - cs.rho_prime.right(q) / (2.0 * cs.rho.right(q).real());
    };
    const auto F_integrand_l = [&cs](double q) {
        return cs.p.left(q) - cs.rho_prime.left(q) / (2.0 * cs.rho.left(q).real());
    };
    ts.F = cumulative_simpson(map.x, F_integrand_r, F_integrand_l, F_integrand_l);

    ts.P = cumulative_simpson(
        map.x, [&cs](double q) { return cs.p.right(q); },
        [&cs](double q) { return cs.p.left(q); }, [&cs](double q) { return cs.p.left(q); });

    // Independent route to the same antiderivative: correction integral done in
    // the t variable, with midpoints mapped through the in-cell linear inverse.
    {
        std::vector<Complex> corr_t(n, Complex{0.0, 0.0});
        const auto w_of_x = [&cs](Complex uv, double rpv, double rv) {
            return rpv * uv / (2.0 * rv * rv);
        };
        Complex acc{0.0, 0.0};
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double dt = map.t[j + 1] - map.t[j];
            const double xm =
                map.x[j] + 0.5 * dt * (map.x[j + 1] - map.x[j]) / (map.t[j + 1] - map.t[j]);
            const Complex wr = w_of_x(cs.u.right(map.x[j]), cs.rho_prime.right(map.x[j]).real(),
                                      cs.rho.right(map.x[j]).real());
            const Complex wm = w_of_x(cs.u.left(xm), cs.rho_prime.left(xm).real(),
                                      cs.rho.left(xm).real());
            const Complex wl = w_of_x(cs.u.left(map.x[j + 1]), cs.rho_prime.left(map.x[j + 1]).real(),
                                      cs.rho.left(map.x[j + 1]).real());
            acc += (dt / 6.0) * (wr + 4.0 * wm + wl);
            corr_t[j + 1] = acc;
        }
        const double sra = std::sqrt(cs.rho_at_a);
        const Complex anchor = cs.u_at_a / sra;
        ts.h_x = GridFn(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double srl = std::sqrt(cs.rho.left(map.x[i]).real());
            const double srr = std::sqrt(cs.rho.right(map.x[i]).real());
            ts.h_x.left[i] = cs.u.left(map.x[i]) / srl - anchor + corr_t[i];
            ts.h_x.right[i] = cs.u.right(map.x[i]) / srr - anchor + corr_t[i];
        }
        ts.h_x.left[0] = ts.h_x.right[0];
        ts.h_x.right[n - 1] = ts.h_x.left[n - 1];
    }

    return ts;
}

struct TransformDefects {
    double sigma_vs_h_x = 0.0;  // sup |sigma(t(x)) - h_x(x)|
    double identity = 0.0;      // sup |F/2 - P/2 + ln(rho)/4 - ln(rho(a))/4|
    double map_round_trip = 0.0;
};

/// Diagnostic defects of the two antiderivative routes and of the map.
inline TransformDefects transform_defects(const TransformedSystem& ts,
                                          const LiouvilleMap& map) {
    TransformDefects d;
    const double log_rho_a = std::log(ts.rho_at_a);
    for (std::size_t i = 0; i < ts.x.size(); ++i) {
        d.sigma_vs_h_x = std::max({d.sigma_vs_h_x, std::abs(ts.sigma.left[i] - ts.h_x.left[i]),
                                   std::abs(ts.sigma.right[i] - ts.h_x.right[i])});
        const Complex defect =
            0.5 * ts.F[i] - 0.5 * ts.P[i] + 0.25 * std::log(ts.rho[i]) - 0.25 * log_rho_a;
        d.identity = std::max(d.identity, std::abs(defect));
        d.map_round_trip =
            std::max(d.map_round_trip, std::abs(map.x_of_t(map.t_of_x(ts.x[i])) - ts.x[i]));
    }
    return d;
}

}  // namespace singsl
