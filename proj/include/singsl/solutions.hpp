#pragma once

// Assembly of the fundamental system y_pm(x, lambda): the plus branch carries
// the leading term rho^{-1/4} exp(P/2 + i lambda int sqrt(rho)) and is solved
// by the backward Volterra system (anchored at t = h); the minus branch
// carries exp(P/2 - i lambda ...) and is solved by the forward system
// (anchored at t = 0). With mu = -i lambda this pairs each branch with the
// half-plane in which its kernel stays bounded.

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>
#include <vector>

#include "singsl/coefficients.hpp"
#include "singsl/errors.hpp"
#include "singsl/liouville.hpp"
#include "singsl/volterra.hpp"

namespace singsl {

inline constexpr double kWronskianTol = 1e-6;
inline constexpr double kDecayThreshold = 0.05;

struct SolutionBranch {
    Branch branch = Branch::plus;
    Complex lambda{};
    std::vector<double> x, t;
    std::vector<Complex> y;          // solution samples
    std::vector<Complex> y_quasi;    // x-variable quasi-derivative y' - h_x sqrt(rho) y
    std::vector<Complex> y_quasi_t;  // t-variable quasi-derivative y' - sigma y
    std::vector<Complex> phi;        // remainder of the solution representation
    std::vector<Complex> psi;        // remainder of the quasi-derivative representation
    std::vector<Complex> z1, z2;     // underlying Volterra solution

    double sup_phi() const { return sup_norm(phi); }
    double sup_psi() const { return sup_norm(psi); }
};

/// Scales the Volterra solution by the exponential normal forms. The
/// rho(a)^{-1/4} factor makes the leading term hold with constant exactly one.
inline SolutionBranch assemble_branch(const CoefficientSet& cs, const LiouvilleMap& map,
                                      const TransformedSystem& ts, const SpectralPoint& sp,
                                      const IterationState& state, Branch branch) {
    (void)cs;
    (void)map;
    const std::size_t n = ts.t.size();
    if (state.z1.size() != n) throw GridError("assemble_branch: state/grid size mismatch");
    SolutionBranch br;
    br.branch = branch;
    br.lambda = sp.lambda;
    br.x = ts.x;
    br.t = ts.t;
    br.y.resize(n);
    br.y_quasi.resize(n);
    br.y_quasi_t.resize(n);
    br.phi.resize(n);
    br.psi.resize(n);
    br.z1 = state.z1;
    br.z2 = state.z2;

    // y = amp e^{w t} z1 and y^[1]t = amp w e^{w t} z2, with w = -mu for the
    // plus branch (so e^{w t} = e^{i lambda t}) and w = +mu for the minus one.
    // Each branch is scaled so the leading term holds with constant exactly 1
    // at its anchor end: rho(a)^{-1/4} at t = 0 for the minus branch, and the
    // same value transported through e^{F(h)/2} = e^{P(b)/2} (rho(b)/rho(a))^{-1/4}
    // for the plus branch pinned at t = h, where z(h) = (1,1).
    const Complex w = branch == Branch::plus ? -sp.mu : sp.mu;
    const Complex amp = branch == Branch::plus
                            ? std::pow(ts.rho_at_a, -0.25) * std::exp(0.5 * ts.F.back())
                            : Complex{std::pow(ts.rho_at_a, -0.25), 0.0};
    const Complex anchor_shift = branch == Branch::plus ? 0.5 * ts.F.back() : Complex{0.0, 0.0};

    for (std::size_t i = 0; i < n; ++i) {
        // leading-term exponent, Re(P)/2 + Re(w) t; the imaginary parts only rotate
        const double ex = 0.5 * ts.P[i].real() + w.real() * ts.t[i] + anchor_shift.real();
        if (ex < -690.0 || ex > 690.0)
            throw NormalizationError("leading-term exponential leaves double range at node " +
                                     std::to_string(i));
        const Complex e = std::exp(w * ts.t[i]);
        br.y[i] = amp * e * state.z1[i];
        br.y_quasi_t[i] = amp * w * e * state.z2[i];
        br.y_quasi[i] = ts.sqrt_rho[i] * br.y_quasi_t[i];
        // remainder by division: the e^{+- i lambda t} factors cancel exactly
        // against e^{w t} since mu = -i lambda, leaving slow factors only.
        const Complex slow = std::pow(ts.rho[i] / ts.rho_at_a, 0.25) *
                             std::exp(anchor_shift - 0.5 * ts.P[i]);
        br.phi[i] = state.z1[i] * slow - 1.0;
        br.psi[i] = state.z2[i] * slow - 1.0;
    }
    if (!all_finite(br.y) || !all_finite(br.y_quasi))
        throw NormalizationError("assembled branch has non-finite samples");
    return br;
}

struct FundamentalSystem {
    SolutionBranch plus, minus;
    std::vector<Complex> wronskian;             // W(t) = y+ y-^[1]t - y- y+^[1]t
    std::vector<Complex> normalized_wronskian;  // W(t) e^{-F(t)}
    double wronskian_defect = 0.0;              // sup |Wn - Wn(0)| / |Wn(0)|
    IterationState diag_plus, diag_minus;
    LiouvilleMap map;
    TransformedSystem ts;
    SpectralPoint sp;

    double residual(Branch b) const {
        return fixed_point_residual(ts, sp, b, b == Branch::plus ? diag_plus : diag_minus);
    }
};

namespace detail {

inline void finish_wronskian(FundamentalSystem& sys) {
    const std::size_t n = sys.ts.t.size();
    sys.wronskian.resize(n);
    sys.normalized_wronskian.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sys.wronskian[i] = sys.plus.y[i] * sys.minus.y_quasi_t[i] -
                           sys.minus.y[i] * sys.plus.y_quasi_t[i];
        sys.normalized_wronskian[i] = sys.wronskian[i] * std::exp(-sys.ts.F[i]);
    }
    const Complex w0 = sys.normalized_wronskian.front();
    if (!(std::abs(w0) > 0.0))
        throw NormalizationError("vanishing Wronskian: branches are not independent");
    double defect = 0.0;
    for (const Complex& wn : sys.normalized_wronskian)
        defect = std::max(defect, std::abs(wn - w0));
    sys.wronskian_defect = defect / std::abs(w0);
}

}  // namespace detail

/// Solves both branches at lambda in the upper convention Im lambda >= -r.
/// The grid is rebuilt per lambda so that e^{2 mu t} is resolved with kappa
/// samples per wavelength.
inline FundamentalSystem fundamental_system(const CoefficientSet& cs, Complex lambda, double r,
                                            const IterationConfig& cfg = {}) {
    cfg.validate();
    const SpectralPoint sp = make_spectral_point(lambda, r, Halfplane::upper);
    const double h_probe = build_map(cs, GridPolicy{129}).h;
    const int n_req = cfg.required_points(lambda, h_probe * (1.0 + 1e-9));

    FundamentalSystem sys;
    sys.sp = sp;
    sys.map = build_map(cs, GridPolicy{n_req});
    sys.ts = transform(cs, sys.map);
    sys.diag_minus = picard_solve(sys.ts, sp, Branch::minus, cfg);
    sys.diag_plus = picard_solve(sys.ts, sp, Branch::plus, cfg);
    sys.minus = assemble_branch(cs, sys.map, sys.ts, sp, sys.diag_minus, Branch::minus);
    sys.plus = assemble_branch(cs, sys.map, sys.ts, sp, sys.diag_plus, Branch::plus);
    detail::finish_wronskian(sys);
    return sys;
}

/// Lower convention Im lambda <= r via the substitution lambda -> -lambda,
/// which maps the plus machinery onto the minus branch and vice versa; the
/// leading terms of the relabeled branches are identical.
inline FundamentalSystem solve_lower_halfplane(const CoefficientSet& cs, Complex lambda, double r,
                                               const IterationConfig& cfg = {}) {
    const SpectralPoint sp = make_spectral_point(lambda, r, Halfplane::lower);
    FundamentalSystem sys = fundamental_system(cs, -lambda, r, cfg);
    std::swap(sys.plus, sys.minus);
    std::swap(sys.diag_plus, sys.diag_minus);
    sys.plus.branch = Branch::plus;
    sys.plus.lambda = lambda;
    sys.minus.branch = Branch::minus;
    sys.minus.lambda = lambda;
    sys.sp = sp;
    detail::finish_wronskian(sys);
    return sys;
}

/// Dispatches on the declared half-plane convention.
inline FundamentalSystem solve_halfplane(const CoefficientSet& cs, Complex lambda, double r,
                                         Halfplane hp, const IterationConfig& cfg = {}) {
    return hp == Halfplane::upper ? fundamental_system(cs, lambda, r, cfg)
                                  : solve_lower_halfplane(cs, lambda, r, cfg);
}

struct DecayReport {
    std::vector<Complex> lambdas;
    std::vector<double> sup_phi_plus, sup_phi_minus, sup_psi_plus, sup_psi_minus;
    std::vector<int> iterations_plus, iterations_minus;
    std::vector<int> grid_points;
    Halfplane halfplane = Halfplane::upper;
    double r = 0.0;
    double threshold = kDecayThreshold;

    static bool series_passes(const std::vector<double>& v, double threshold) {
        return !v.empty() && v.back() <= threshold && v.back() <= 0.5 * v.front();
    }

    bool passes() const {
        return series_passes(sup_phi_plus, threshold) && series_passes(sup_phi_minus, threshold) &&
               series_passes(sup_psi_plus, threshold) && series_passes(sup_psi_minus, threshold);
    }
};

/// Runs the half-plane solve over an increasing-|lambda| sequence, in parallel
/// over spectral points; results are merged in sequence order.
inline DecayReport remainder_sweep(const CoefficientSet& cs, const std::vector<Complex>& lambdas,
                                   double r, const IterationConfig& cfg = {},
                                   Halfplane hp = Halfplane::upper, unsigned jobs = 0) {
    for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
        if (std::abs(lambdas[i]) > std::abs(lambdas[i + 1]))
            throw DomainError("remainder_sweep: sequence must be ordered by increasing |lambda|");
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

    DecayReport rep;
    rep.lambdas = lambdas;
    rep.halfplane = hp;
    rep.r = r;
    const std::size_t n = lambdas.size();
    rep.sup_phi_plus.resize(n);
    rep.sup_phi_minus.resize(n);
    rep.sup_psi_plus.resize(n);
    rep.sup_psi_minus.resize(n);
    rep.iterations_plus.resize(n);
    rep.iterations_minus.resize(n);
    rep.grid_points.resize(n);

    const auto solve_one = [&](std::size_t i) {
        const FundamentalSystem sys = solve_halfplane(cs, lambdas[i], r, hp, cfg);
        rep.sup_phi_plus[i] = sys.plus.sup_phi();
        rep.sup_phi_minus[i] = sys.minus.sup_phi();
        rep.sup_psi_plus[i] = sys.plus.sup_psi();
        rep.sup_psi_minus[i] = sys.minus.sup_psi();
        rep.iterations_plus[i] = sys.diag_plus.iterations_used;
        rep.iterations_minus[i] = sys.diag_minus.iterations_used;
        rep.grid_points[i] = static_cast<int>(sys.ts.t.size());
    };

    for (std::size_t base = 0; base < n; base += jobs) {
        std::vector<std::future<void>> block;
        for (std::size_t i = base; i < std::min(n, base + jobs); ++i)
            block.push_back(std::async(std::launch::async, solve_one, i));
        for (auto& fu : block) fu.get();
    }
    return rep;
}

}  // namespace singsl
