#include <doctest.h>

#include <cmath>
#include <numbers>

#include "singsl/volterra.hpp"
#include "test_util.hpp"

using namespace singsl;
using namespace singsl_test;

namespace {

struct Sys {
    CoefficientSet cs;
    LiouvilleMap map;
    TransformedSystem ts;
};

Sys make_sys(const ProblemSpec& spec, int n = 512) {
    Sys s{ingest_coefficients(spec), {}, {}};
    s.map = build_map(s.cs, GridPolicy{n});
    s.ts = transform(s.cs, s.map);
    return s;
}

GridFn const_psi(std::size_t n, Complex v) {
    GridFn f(n);
    for (std::size_t i = 0; i < n; ++i) f.left[i] = f.right[i] = v;
    return f;
}

ZPair fill_pair(std::size_t n, Complex v1, Complex v2) {
    ZPair z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z.z1[i] = v1;
        z.z2[i] = v2;
    }
    return z;
}

}  // namespace

TEST_CASE("spectral point: mu = -i lambda and half-plane guards") {
    const SpectralPoint sp = make_spectral_point({30.0, 3.0}, 0.0);
    CHECK(sp.mu == Complex{3.0, -30.0});
    CHECK_THROWS_AS(make_spectral_point({0.5, 0.0}, 1.0), HalfPlaneError);
    CHECK_THROWS_AS(make_spectral_point({40.0, -2.5}, 2.0), HalfPlaneError);
    CHECK_THROWS_AS(make_spectral_point({40.0, 2.5}, 2.0, Halfplane::lower), HalfPlaneError);
    CHECK_NOTHROW(make_spectral_point({40.0, -2.0}, 2.0));
    CHECK_NOTHROW(make_spectral_point({40.0, -2.5}, 2.0, Halfplane::lower));
}

TEST_CASE("oscillatory integral: zero integrand") {
    const Sys s = make_sys(free_spec(), 64);
    const auto sweep = oscillatory_sweep(s.ts.t, const_psi(s.ts.t.size(), {0, 0}),
                                         Complex{1.0, -5.0}, Direction::forward, 0.0);
    CHECK(sup_norm(sweep) == 0.0);
}

TEST_CASE("oscillatory integral: psi == 1 against the closed form") {
    // int_0^t e^{-2 mu (t-xi)} dxi = (1 - e^{-2 mu t}) / (2 mu)
    const Sys s = make_sys(constant_rho_spec(1.0), 128);
    for (const Complex mu : {Complex{1.0, 0.0}, Complex{0.3, 20.0}, Complex{-0.5, 7.0}}) {
        const auto sweep = oscillatory_sweep(s.ts.t, const_psi(s.ts.t.size(), {1, 0}), mu,
                                             Direction::forward, 1.0);
        for (std::size_t j = 0; j < s.ts.t.size(); j += 13) {
            const Complex want = (1.0 - std::exp(-2.0 * mu * s.ts.t[j])) / (2.0 * mu);
            CHECK(std::abs(sweep[j] - want) <= 1e-13);
        }
    }
}

TEST_CASE("oscillatory integral: exact for piecewise-linear psi, both directions") {
    const Sys s = make_sys(constant_rho_spec(1.0), 97);
    const std::size_t n = s.ts.t.size();
    const Complex alpha{0.7, -0.3}, beta{-0.2, 1.1};
    GridFn psi(n);
    for (std::size_t i = 0; i < n; ++i)
        psi.left[i] = psi.right[i] = alpha * s.ts.t[i] + beta;

    for (const Complex mu :
         {Complex{4.0, 0.0}, Complex{0.002, 0.0}, Complex{1.0, 80.0}, Complex{-0.4, 3.0}}) {
        const Complex w = 2.0 * mu;
        const auto fwd = oscillatory_sweep(s.ts.t, psi, mu, Direction::forward, 0.5);
        const auto bwd = oscillatory_sweep(s.ts.t, psi, mu, Direction::backward, 0.5);
        for (std::size_t j = 0; j < n; j += 7) {
            const double t = s.ts.t[j];
            {  // int_0^t e^{-w(t-xi)} (alpha xi + beta) dxi
                const Complex E = std::exp(-w * t);
                const Complex want =
                    (alpha * t + beta) / w - beta * E / w - alpha * (1.0 - E) / (w * w);
                CHECK(std::abs(fwd[j] - want) <= 1e-11 * (1.0 + std::abs(want)));
            }
            {  // int_t^h e^{w(t-xi)} (alpha xi + beta) dxi, s = xi - t
                const double d = s.ts.h - t;
                const Complex E = std::exp(-w * d);
                const Complex m0 = (1.0 - E) / w;
                const Complex m1 = (1.0 - E * (1.0 + w * d)) / (w * w);
                const Complex want = (alpha * t + beta) * m0 + alpha * m1;
                CHECK(std::abs(bwd[j] - want) <= 1e-11 * (1.0 + std::abs(want)));
            }
        }
    }
}

TEST_CASE("oscillatory integral: uniform decay for smooth psi as |mu| grows") {
    const Sys s = make_sys(free_spec(), 4096);
    const std::size_t n = s.ts.t.size();
    GridFn psi(n);
    for (std::size_t i = 0; i < n; ++i) psi.left[i] = psi.right[i] = std::sin(s.ts.t[i]);
    double prev = 1e300;
    for (int k = 3; k <= 10; ++k) {
        const Complex mu{0.0, std::pow(2.0, k)};
        const auto sweep = oscillatory_sweep(s.ts.t, psi, mu, Direction::forward, 0.0);
        const double m = sup_norm(sweep);
        CHECK(m < prev);
        prev = m;
    }
    CHECK(prev <= 1e-3);  // ~ 1/s envelope at s = 1024
}

TEST_CASE("oscillatory integral: half-plane guard trips") {
    const Sys s = make_sys(free_spec(), 64);
    // Re mu = -30 on h = pi: exponent 60 pi >> 2 r h + 50 with r = 0
    CHECK_THROWS_AS(oscillatory_sweep(s.ts.t, const_psi(s.ts.t.size(), {1, 0}),
                                      Complex{-30.0, 5.0}, Direction::forward, 0.0),
                    HalfPlaneError);
}

TEST_CASE("apply_A: zero input, and f == 1 gives t/2") {
    ProblemSpec spec = free_spec();
    spec.p = const_fn(1.0);
    const Sys s = make_sys(spec, 128);
    const SpectralPoint sp = make_spectral_point({9.0, 0.0}, 0.0);
    const std::size_t n = s.ts.t.size();

    const ZPair zero = apply_A(s.ts, sp, fill_pair(n, {0, 0}, {0, 0}));
    CHECK(sup_norm(zero) == 0.0);

    const ZPair out = apply_A(s.ts, sp, fill_pair(n, {1, 0}, {1, 0}));
    for (std::size_t j = 0; j < n; j += 11) {
        CHECK(std::abs(out.z1[j] - Complex{0.5 * s.ts.t[j], 0.0}) <= 1e-13);
        CHECK(out.z2[j] == out.z1[j]);
    }
}

TEST_CASE("apply_A1: f == 1, z = (0,1) gives -(h-t)/2 in both rows") {
    ProblemSpec spec = free_spec();
    spec.p = const_fn(1.0);
    const Sys s = make_sys(spec, 128);
    const SpectralPoint sp = make_spectral_point({9.0, 0.0}, 0.0);
    const ZPair out = apply_A1(s.ts, sp, fill_pair(s.ts.t.size(), {0, 0}, {1, 0}));
    for (std::size_t j = 0; j < s.ts.t.size(); j += 11) {
        const Complex want{-0.5 * (s.ts.h - s.ts.t[j]), 0.0};
        CHECK(std::abs(out.z1[j] - want) <= 1e-13);
        CHECK(out.z2[j] == out.z1[j]);
    }
}

TEST_CASE("apply_B: f == 1, z = (0,1) matches the closed form") {
    ProblemSpec spec = free_spec();
    spec.p = const_fn(1.0);
    const Sys s = make_sys(spec, 256);
    const Complex mu{2.0, 5.0};
    const SpectralPoint sp = make_spectral_point(Complex{0.0, 1.0} * mu, 0.0);  // lambda = i mu
    REQUIRE(sp.mu == mu);
    const ZPair out = apply_B(s.ts, sp, fill_pair(s.ts.t.size(), {0, 0}, {1, 0}));
    for (std::size_t j = 0; j < s.ts.t.size(); j += 17) {
        const Complex want = -(1.0 - std::exp(-2.0 * mu * s.ts.t[j])) / (4.0 * mu);
        CHECK(std::abs(out.z1[j] - want) <= 1e-13);
        CHECK(out.z2[j] == -out.z1[j]);
    }
}

TEST_CASE("apply_A and apply_B: delta case against closed forms") {
    // u = 2 * step at 1/2, rho = 1, p = 0: sigma = 2*[t >= 1/2], g = -sigma^2.
    const Sys s = make_sys(delta_spec(2.0, 0.5), 512);
    const Complex mu{0.0, 10.0};
    const SpectralPoint sp = make_spectral_point(Complex{0.0, 1.0} * mu, 0.0);
    const std::size_t n = s.ts.t.size();
    const ZPair ones = fill_pair(n, {1, 0}, {1, 0});

    const ZPair a_out = apply_A(s.ts, sp, ones);
    const ZPair b_out = apply_B(s.ts, sp, ones);
    for (std::size_t j = 0; j < n; j += 23) {
        const double t = s.ts.t[j];
        const double tp = std::max(0.0, t - 0.5);
        // (A z)_1 = (1/2) (t - 1/2)_+ ((2 - 4/mu) - 2)
        const Complex want_a = 0.5 * tp * (-4.0 / mu);
        CHECK(std::abs(a_out.z1[j] - want_a) <= 1e-12);
        // (B z)_1 = (1/2) (4 + 4/mu) (1 - e^{-2 mu (t-1/2)_+}) / (2 mu)
        const Complex want_b =
            0.5 * (4.0 + 4.0 / mu) * (1.0 - std::exp(-2.0 * mu * tp)) / (2.0 * mu);
        CHECK(std::abs(b_out.z1[j] - want_b) <= 1e-12);
    }
}

TEST_CASE("apply_B1: smooth case against an independent per-node quadrature") {
    const Sys s = make_sys(smooth_spec(), 512);
    const Complex mu{1.0, 12.0};
    const SpectralPoint sp = make_spectral_point(Complex{0.0, 1.0} * mu, 1.0);
    const std::size_t n = s.ts.t.size();
    Rng rng(7);
    ZPair z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z.z1[i] = Complex{1.0, 0.0} + 0.3 * rng.complex_in_disk(1.0);
        z.z2[i] = Complex{1.0, 0.0} + 0.3 * rng.complex_in_disk(1.0);
    }
    const ZPair out = apply_B1(s.ts, sp, z);

    // Independent evaluation: for a handful of nodes, integrate the
    // piecewise-linear integrand cell by cell with antiderivative formulas.
    const detail::KernelRows rows(s.ts, sp.mu);
    const Complex w = 2.0 * mu;
    for (std::size_t j : {std::size_t{0}, n / 5, n / 2, n - 2}) {
        Complex acc{0.0, 0.0};
        for (std::size_t k = j; k + 1 < n; ++k) {
            const double t0 = s.ts.t[k], t1 = s.ts.t[k + 1], tj = s.ts.t[j];
            const Complex pa = rows.a.right[k] * z.z1[k] - rows.b.right[k] * z.z2[k];
            const Complex pb = rows.a.left[k + 1] * z.z1[k + 1] - rows.b.left[k + 1] * z.z2[k + 1];
            const Complex slope = (pb - pa) / (t1 - t0);
            // int e^{w (tj - xi)} (pa + slope (xi - t0)) dxi via the antiderivative
            const auto anti = [&](double xi) {
                const Complex e = std::exp(w * (tj - xi));
                return e * (-(pa + slope * (xi - t0)) / w - slope / (w * w));
            };
            acc += anti(t1) - anti(t0);
        }
        const Complex want = -0.5 * acc;
        CHECK(std::abs(out.z1[j] - want) <= 1e-8);
        CHECK(std::abs(out.z2[j] + want) <= 1e-8);
    }
}

TEST_CASE("kernel entries obey the e^{2rh} v envelope") {
    const Sys s = make_sys(smooth_spec(), 128);
    const double r = 1.5;
    const double bound_factor = std::exp(2.0 * r * s.ts.h);
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        // Re mu >= -r, |mu| >= 1
        Complex mu{rng.range(-r, 30.0), rng.range(-30.0, 30.0)};
        if (std::abs(mu) < 1.0) mu += Complex{3.0, 0.0};
        const std::size_t i = static_cast<std::size_t>(rng.range(0.0, s.ts.t.size() - 1.0));
        const std::size_t j = static_cast<std::size_t>(rng.range(0.0, i + 1.0));
        const double t = s.ts.t[i], xi = s.ts.t[j];
        const double v = std::abs(s.ts.f.right[j]) + std::abs(s.ts.g.right[j]) +
                         std::abs(s.ts.sigma.right[j]);
        const Complex exp_factor = std::exp(-2.0 * mu * (t - xi));
        const Complex inv_mu = 1.0 / mu;
        const Complex entries[4] = {
            0.5 * (s.ts.sigma.right[j] + inv_mu * s.ts.g.right[j]),
            0.5 * (s.ts.f.right[j] - s.ts.sigma.right[j]),
            0.5 * exp_factor * (s.ts.sigma.right[j] - inv_mu * s.ts.g.right[j]),
            0.5 * exp_factor * (s.ts.f.right[j] - s.ts.sigma.right[j])};
        for (const Complex& e : entries) CHECK(std::abs(e) <= bound_factor * v + 1e-15);
    }
}

TEST_CASE("operators are linear") {
    const Sys s = make_sys(smooth_spec(), 128);
    const SpectralPoint sp = make_spectral_point({12.0, 1.0}, 0.0);
    const std::size_t n = s.ts.t.size();
    Rng rng(3);
    ZPair z(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        z.z1[i] = rng.complex_in_disk(2.0);
        z.z2[i] = rng.complex_in_disk(2.0);
        w.z1[i] = rng.complex_in_disk(2.0);
        w.z2[i] = rng.complex_in_disk(2.0);
    }
    const Complex alpha{0.7, -1.2};
    ZPair combo(n);
    for (std::size_t i = 0; i < n; ++i) {
        combo.z1[i] = alpha * z.z1[i] + w.z1[i];
        combo.z2[i] = alpha * z.z2[i] + w.z2[i];
    }
    using ApplyFn = ZPair (*)(const TransformedSystem&, const SpectralPoint&, const ZPair&);
    for (ApplyFn apply : {static_cast<ApplyFn>(apply_A), static_cast<ApplyFn>(apply_B),
                          static_cast<ApplyFn>(apply_A1), static_cast<ApplyFn>(apply_B1)}) {
        const ZPair lhs = apply(s.ts, sp, combo);
        const ZPair az = apply(s.ts, sp, z);
        const ZPair aw = apply(s.ts, sp, w);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(lhs.z1[i] - (alpha * az.z1[i] + aw.z1[i])));
            worst = std::max(worst, std::abs(lhs.z2[i] - (alpha * az.z2[i] + aw.z2[i])));
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("causality: forward output ignores later samples, backward ignores earlier") {
    const Sys s = make_sys(smooth_spec(), 128);
    const SpectralPoint sp = make_spectral_point({12.0, 1.0}, 0.0);
    const std::size_t n = s.ts.t.size();
    const std::size_t k = n / 2;
    const ZPair base = fill_pair(n, {1, 0}, {1, 0});
    ZPair bumped = base;
    bumped.z1[k] += Complex{0.5, 0.25};

    const ZPair a0 = apply_A(s.ts, sp, base), a1 = apply_A(s.ts, sp, bumped);
    const ZPair b0 = apply_B(s.ts, sp, base), b1 = apply_B(s.ts, sp, bumped);
    for (std::size_t j = 0; j < k; ++j) {
        CHECK(a0.z1[j] == a1.z1[j]);
        CHECK(b0.z1[j] == b1.z1[j]);
    }
    CHECK(std::abs(a1.z1[n - 1] - a0.z1[n - 1]) > 0.0);

    const ZPair c0 = apply_A1(s.ts, sp, base), c1 = apply_A1(s.ts, sp, bumped);
    const ZPair d0 = apply_B1(s.ts, sp, base), d1 = apply_B1(s.ts, sp, bumped);
    for (std::size_t j = k + 1; j < n; ++j) {
        CHECK(c0.z1[j] == c1.z1[j]);
        CHECK(d0.z1[j] == d1.z1[j]);
    }
    CHECK(std::abs(c1.z1[0] - c0.z1[0]) > 0.0);
}

TEST_CASE("apriori_bound: closed-form values") {
    CHECK(apriori_bound(0.0, 1.0, 1) == 0.0);
    CHECK(apriori_bound(0.0, 1.0, 7) == 0.0);
    CHECK(apriori_bound(1.0, 1.0, 1) == doctest::Approx(4.0));
    CHECK(apriori_bound(1.0, 1.0, 5) == doctest::Approx(8.0 / 15.0));
}

TEST_CASE("iterated operator stays under the a-priori bound") {
    const Sys s = make_sys(smooth_spec(), 512);
    const SpectralPoint sp = make_spectral_point({25.0, 0.0}, 0.0);
    const VolterraOperator op(s.ts, sp, Direction::forward);
    const double F_h = envelope_mass(s.ts);
    const double C = envelope_constant(sp, s.ts.h);
    ZPair z = fill_pair(s.ts.t.size(), {1, 0}, {1, 0});
    for (int k = 1; k <= 10; ++k) {
        z = op.apply(z);
        CHECK(sup_norm(z) <= apriori_bound(C, F_h, k));
    }
}

TEST_CASE("picard: trivial system converges immediately") {
    const Sys s = make_sys(free_spec(), 512);
    const SpectralPoint sp = make_spectral_point({7.0, 2.0}, 0.0);
    const IterationState st = picard_solve(s.ts, sp, Branch::minus);
    CHECK(st.iterations_used == 1);
    for (const auto& v : st.z1) CHECK(v == Complex{1.0, 0.0});
    for (const auto& v : st.z2) CHECK(v == Complex{1.0, 0.0});
}

TEST_CASE("picard: delta case converges and satisfies its equation") {
    IterationConfig cfg;
    cfg.n_min = 4096;
    const Sys s = make_sys(delta_spec(), 4096);
    const SpectralPoint sp = make_spectral_point({20.0, 0.0}, 0.0);
    for (const Branch branch : {Branch::minus, Branch::plus}) {
        const IterationState st = picard_solve(s.ts, sp, branch, cfg);
        CHECK(st.iterations_used <= 30);
        CHECK(st.final_increment <= cfg.tol * (1.0 + sup_norm(st.z1)));
        CHECK(fixed_point_residual(s.ts, sp, branch, st) <= 10.0 * cfg.tol);
        CHECK(st.apriori_tail_bound >= 0.0);
    }
}

TEST_CASE("picard: resolution guard") {
    const Sys s = make_sys(free_spec(), 64);
    const SpectralPoint sp = make_spectral_point({500.0, 0.0}, 0.0);
    IterationConfig cfg;
    cfg.n_min = 16;
    CHECK_THROWS_AS(picard_solve(s.ts, sp, Branch::minus, cfg), GridError);
}

TEST_CASE("picard: increments eventually dominated by the factorial bound") {
    const Sys s = make_sys(smooth_spec(), 512);
    const SpectralPoint sp = make_spectral_point({25.0, 0.0}, 0.0);
    const VolterraOperator op(s.ts, sp, Direction::forward);
    const double F_h = envelope_mass(s.ts);
    const double C = envelope_constant(sp, s.ts.h);
    // increments of the Picard sequence are T^k applied to the seed
    ZPair diff = op.apply(fill_pair(s.ts.t.size(), {1, 0}, {1, 0}));
    for (int k = 1; k <= 12; ++k) {
        CHECK(sup_norm(diff) <= apriori_bound(C, F_h, k));
        diff = op.apply(diff);
    }
}
