#pragma once

// Problem data for  -y'' + p(x) y' + q(x) y = lambda^2 rho(x) y  on [a,b].
// The potential q is never materialized: it enters only through its
// antiderivative u, which may jump (a jump of height c at x0 encodes the
// point mass c*delta(x - x0)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "singsl/errors.hpp"
#include "singsl/gridfn.hpp"

namespace singsl {

struct Interval {
    double a = 0.0;
    double b = 1.0;
};

/// Closed-form coefficient primitive.
struct ExprFn {
    enum class Kind { constant, polynomial, trig, exponential, step, sawtooth, smoothstep };

    Kind kind = Kind::constant;

    Complex value{};              // constant
    std::vector<Complex> coeffs;  // polynomial: sum_k coeffs[k] * x^k
    Complex amp_sin{};            // trig: offset + amp_sin*sin(omega x) + amp_cos*cos(omega x)
    Complex amp_cos{};
    double omega = 1.0;
    Complex offset{};             // trig / exponential
    Complex amp{};                // exponential: offset + amp * exp(rate x)
    double rate = 1.0;
    Complex base{};               // step / smoothstep
    Complex height{};
    double location = 0.0;
    double width = 1.0;           // smoothstep ramp width
    Complex saw_amp{};            // sawtooth: saw_amp * frac((x - phase)/period)
    double period = 1.0;
    double phase = 0.0;

    Complex eval_smooth(double x) const {
        switch (kind) {
            case Kind::constant:
                return value;
            case Kind::polynomial: {
                Complex acc{0.0, 0.0};
                for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
                return acc;
            }
            case Kind::trig:
                return offset + amp_sin * std::sin(omega * x) + amp_cos * std::cos(omega * x);
            case Kind::exponential:
                return offset + amp * std::exp(rate * x);
            case Kind::smoothstep: {
                double s = (x - (location - 0.5 * width)) / width;
                s = std::clamp(s, 0.0, 1.0);
                const double q = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
                return base + height * q;
            }
            default:
                return value;
        }
    }

    Complex left(double x) const {
        switch (kind) {
            case Kind::step:
                return (x <= location) ? base : base + height;
            case Kind::sawtooth: {
                const double s = (x - phase) / period;
                double f = s - std::floor(s);
                if (f == 0.0) f = 1.0;  // limit from below at a jump node
                return saw_amp * f;
            }
            default:
                return eval_smooth(x);
        }
    }

    Complex right(double x) const {
        switch (kind) {
            case Kind::step:
                return (x < location) ? base : base + height;
            case Kind::sawtooth: {
                const double s = (x - phase) / period;
                const double f = s - std::floor(s);
                return saw_amp * f;
            }
            default:
                return eval_smooth(x);
        }
    }

    bool smooth() const { return kind != Kind::step && kind != Kind::sawtooth; }

    std::vector<double> jump_points(double a, double b) const {
        std::vector<double> out;
        if (kind == Kind::step) {
            if (location >= a && location <= b && height != Complex{0.0, 0.0})
                out.push_back(location);
        } else if (kind == Kind::sawtooth) {
            if (saw_amp != Complex{0.0, 0.0}) {
                const long k0 = static_cast<long>(std::ceil((a - phase) / period));
                const long k1 = static_cast<long>(std::floor((b - phase) / period));
                for (long k = k0; k <= k1; ++k) out.push_back(phase + k * period);
            }
        }
        return out;
    }
};

/// Sampled coefficient: piecewise-linear between samples. A repeated x value
/// encodes a jump (first entry = left limit, second = right limit).
struct SampledFn {
    std::vector<double> x;
    std::vector<Complex> v;

    void check() const {
        if (x.size() != v.size() || x.size() < 2)
            throw SpecError("sampled coefficient needs matching x/values arrays of size >= 2");
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
            if (x[i + 1] < x[i]) throw SpecError("sample locations must be nondecreasing");
            if (i + 2 < x.size() && x[i + 1] == x[i] && x[i + 2] == x[i])
                throw SpecError("more than two samples at the same location");
        }
    }

    Complex left(double q) const {
        const auto it = std::lower_bound(x.begin(), x.end(), q);
        if (it == x.begin()) return v.front();
        if (it == x.end()) return v.back();
        const std::size_t i = static_cast<std::size_t>(it - x.begin());
        if (x[i] == q) return v[i];
        return interp(i - 1, i, q);
    }

    Complex right(double q) const {
        const auto it = std::upper_bound(x.begin(), x.end(), q);
        if (it == x.end()) return v.back();
        if (it == x.begin()) return v.front();
        const std::size_t i = static_cast<std::size_t>(it - x.begin());
        if (x[i - 1] == q) return v[i - 1];
        return interp(i - 1, i, q);
    }

    bool smooth() const { return false; }  // kinks at interior samples

    std::vector<double> jump_points(double a, double b) const {
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < x.size(); ++i)
            if (x[i] == x[i + 1] && v[i] != v[i + 1] && x[i] >= a && x[i] <= b)
                out.push_back(x[i]);
        return out;
    }

    std::vector<double> nodes(double a, double b) const {
        std::vector<double> out;
        for (double s : x)
            if (s > a && s < b) out.push_back(s);
        return out;
    }

private:
    Complex interp(std::size_t i, std::size_t j, double q) const {
        const double w = (q - x[i]) / (x[j] - x[i]);
        return v[i] + w * (v[j] - v[i]);
    }
};

/// A coefficient function on [a,b], evaluable with one-sided limits.
class CoefficientFn {
public:
    CoefficientFn() : impl_(ExprFn{}) {}
    CoefficientFn(ExprFn e) : impl_(std::move(e)) {}
    CoefficientFn(SampledFn s) : impl_(std::move(s)) { std::get<SampledFn>(impl_).check(); }

    static CoefficientFn constant(Complex c) {
        ExprFn e;
        e.kind = ExprFn::Kind::constant;
        e.value = c;
        return CoefficientFn(e);
    }

    Complex left(double x) const {
        return std::visit([x](const auto& f) { return f.left(x); }, impl_);
    }
    Complex right(double x) const {
        return std::visit([x](const auto& f) { return f.right(x); }, impl_);
    }
    /// Point value under the left-continuity convention.
    Complex operator()(double x) const { return left(x); }

    bool smooth() const {
        return std::visit([](const auto& f) { return f.smooth(); }, impl_);
    }

    std::vector<double> jump_points(double a, double b) const {
        return std::visit([a, b](const auto& f) { return f.jump_points(a, b); }, impl_);
    }

    /// Interior locations that must be grid nodes (jumps and sample kinks).
    std::vector<double> grid_marks(double a, double b) const {
        std::vector<double> out = jump_points(a, b);
        if (const auto* s = std::get_if<SampledFn>(&impl_)) {
            const auto nodes = s->nodes(a, b);
            out.insert(out.end(), nodes.begin(), nodes.end());
        }
        return out;
    }

private:
    std::variant<ExprFn, SampledFn> impl_;
};

/// Raw problem description, before validation.
struct ProblemSpec {
    Interval interval;
    CoefficientFn p, u, rho, rho_prime;
    std::vector<double> breakpoints;
};

struct ValidationReport {
    double int_abs_p_sq = 0.0;
    double int_abs_u_sq = 0.0;
    double int_abs_rho_prime_u = 0.0;
    double min_rho = 0.0;
    bool p_ok = false, u_ok = false, rho_prime_u_ok = false, rho_ok = false;
    bool pass() const { return p_ok && u_ok && rho_prime_u_ok && rho_ok; }
};

inline constexpr double kRhoMin = 1e-8;
inline constexpr double kOverflowGuard = 1e12;

/// Validated, immutable problem data. Safe to share read-only across threads.
struct CoefficientSet {
    Interval interval;
    CoefficientFn p, u, rho, rho_prime;
    std::vector<double> breakpoints;   // jump locations of u / rho'
    std::vector<double> grid_marks;    // breakpoints plus sample kinks
    std::vector<double> validation_x;
    std::vector<Complex> P;            // tabulated int_a^x p on validation_x
    ValidationReport validation;
    Complex u_at_a{};                  // right limit of u at a (sigma normalization)
    double rho_at_a = 1.0;

    Complex P_at(double q) const {
        const auto it = std::upper_bound(validation_x.begin(), validation_x.end(), q);
        if (it == validation_x.begin()) return P.front();
        if (it == validation_x.end()) return P.back();
        const std::size_t i = static_cast<std::size_t>(it - validation_x.begin());
        const double w = (q - validation_x[i - 1]) / (validation_x[i] - validation_x[i - 1]);
        return P[i - 1] + w * (P[i] - P[i - 1]);
    }

    bool smooth() const {
        return breakpoints.empty() && p.smooth() && u.smooth() && rho.smooth() &&
               rho_prime.smooth();
    }
};

namespace detail {

inline double guarded_add(double acc, double inc, const char* what) {
    if (!std::isfinite(inc)) throw IntegrabilityError(std::string(what) + ": non-finite integrand");
    acc += inc;
    if (acc > kOverflowGuard)
        throw IntegrabilityError(std::string(what) + ": integral exceeds overflow guard");
    return acc;
}

inline ValidationReport run_validation(const CoefficientSet& cs) {
    ValidationReport rep;
    const auto& xs = cs.validation_x;
    rep.min_rho = std::numeric_limits<double>::infinity();
    double ip = 0.0, iu = 0.0, iru = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double rl = cs.rho.left(xs[j]).real(), rr = cs.rho.right(xs[j]).real();
        rep.min_rho = std::min({rep.min_rho, rl, rr});
        if (j + 1 == xs.size()) break;
        const double dt = xs[j + 1] - xs[j];
        const Complex pr = cs.p.right(xs[j]), pl = cs.p.left(xs[j + 1]);
        const Complex ur = cs.u.right(xs[j]), ul = cs.u.left(xs[j + 1]);
        const Complex rpr = cs.rho_prime.right(xs[j]), rpl = cs.rho_prime.left(xs[j + 1]);
        ip = guarded_add(ip, 0.5 * dt * (std::norm(pr) + std::norm(pl)), "int |p|^2");
        iu = guarded_add(iu, 0.5 * dt * (std::norm(ur) + std::norm(ul)), "int |u|^2");
        iru = guarded_add(iru, 0.5 * dt * (std::abs(rpr * ur) + std::abs(rpl * ul)),
                          "int |rho' u|");
    }
    rep.int_abs_p_sq = ip;
    rep.int_abs_u_sq = iu;
    rep.int_abs_rho_prime_u = iru;
    rep.p_ok = ip <= kOverflowGuard;
    rep.u_ok = iu <= kOverflowGuard;
    rep.rho_prime_u_ok = iru <= kOverflowGuard;
    rep.rho_ok = rep.min_rho >= kRhoMin;
    return rep;
}

}  // namespace detail

/// Validates the problem data and tabulates P = int_a^x p.
/// Throws DomainError / PositivityError / IntegrabilityError on bad input.
inline CoefficientSet ingest_coefficients(const ProblemSpec& spec,
                                          int validation_points = 4097) {
    const double a = spec.interval.a, b = spec.interval.b;
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
        throw DomainError("interval must satisfy a < b with finite endpoints");

    CoefficientSet cs;
    cs.interval = spec.interval;
    cs.p = spec.p;
    cs.u = spec.u;
    cs.rho = spec.rho;
    cs.rho_prime = spec.rho_prime;

    for (double bp : spec.breakpoints)
        if (bp < a || bp > b)
            throw DomainError("breakpoint outside [a,b]");

    std::vector<double> bps = spec.breakpoints;
    for (const CoefficientFn* f : {&cs.p, &cs.u, &cs.rho, &cs.rho_prime}) {
        const auto js = f->jump_points(a, b);
        bps.insert(bps.end(), js.begin(), js.end());
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    cs.breakpoints = bps;

    cs.grid_marks = bps;
    for (const CoefficientFn* f : {&cs.p, &cs.u, &cs.rho, &cs.rho_prime}) {
        const auto ms = f->grid_marks(a, b);
        cs.grid_marks.insert(cs.grid_marks.end(), ms.begin(), ms.end());
    }
    std::sort(cs.grid_marks.begin(), cs.grid_marks.end());
    cs.grid_marks.erase(std::unique(cs.grid_marks.begin(), cs.grid_marks.end()),
                        cs.grid_marks.end());

    cs.validation_x = make_grid(a, b, validation_points, cs.grid_marks);

    // rho and rho' must be real-valued.
    for (double q : {a, 0.5 * (a + b), b})
        if (std::abs(cs.rho.left(q).imag()) > 0.0 || std::abs(cs.rho_prime.left(q).imag()) > 0.0)
            throw SpecError("rho and rho_prime must be real-valued");

    cs.validation = detail::run_validation(cs);
    if (!cs.validation.rho_ok)
        throw PositivityError("min rho on the validation grid is below the positivity floor");

    cs.u_at_a = cs.u.right(a);
    cs.rho_at_a = cs.rho.right(a).real();

    cs.P = cumulative_simpson(
        cs.validation_x, [&](double q) { return cs.p.right(q); },
        [&](double q) { return cs.p.left(q); }, [&](double q) { return cs.p.left(q); });

    return cs;
}

/// Reporting-only re-run of the ingest checks.
inline ValidationReport validate_conditions(const CoefficientSet& cs) {
    return detail::run_validation(cs);
}

// ---------------------------------------------------------------------------
// JSON problem-spec files
// ---------------------------------------------------------------------------

namespace detail {

inline Complex parse_complex(const nlohmann::json& j, const char* what) {
    if (j.is_number()) return Complex{j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex{j[0].get<double>(), j[1].get<double>()};
    throw SpecError(std::string(what) + ": expected a number or [re, im]");
}

inline Complex param(const nlohmann::json& p, const char* key, Complex dflt) {
    if (!p.contains(key)) return dflt;
    return parse_complex(p.at(key), key);
}

inline double real_param(const nlohmann::json& p, const char* key, double dflt) {
    if (!p.contains(key)) return dflt;
    if (!p.at(key).is_number()) throw SpecError(std::string(key) + ": expected a real number");
    return p.at(key).get<double>();
}

inline CoefficientFn parse_coefficient(const nlohmann::json& j, const std::string& label) {
    if (j.is_number() || (j.is_array() && j.size() == 2))
        return CoefficientFn::constant(parse_complex(j, label.c_str()));
    if (!j.is_object() || !j.contains("kind"))
        throw SpecError(label + ": expected {kind: ...}");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "samples") {
        SampledFn s;
        if (!j.contains("x") || !j.contains("values"))
            throw SpecError(label + ": samples need x and values arrays");
        for (const auto& q : j.at("x")) s.x.push_back(q.get<double>());
        for (const auto& q : j.at("values")) s.v.push_back(parse_complex(q, label.c_str()));
        return CoefficientFn(std::move(s));
    }
    if (kind != "expr") throw SpecError(label + ": kind must be expr or samples");
    const std::string name = j.at("name").get<std::string>();
    const nlohmann::json params = j.contains("params") ? j.at("params") : nlohmann::json::object();
    ExprFn e;
    if (name == "constant") {
        e.kind = ExprFn::Kind::constant;
        e.value = param(params, "value", {});
    } else if (name == "polynomial") {
        e.kind = ExprFn::Kind::polynomial;
        if (!params.contains("coeffs")) throw SpecError(label + ": polynomial needs coeffs");
        for (const auto& c : params.at("coeffs")) e.coeffs.push_back(parse_complex(c, "coeffs"));
    } else if (name == "trig") {
        e.kind = ExprFn::Kind::trig;
        e.amp_sin = param(params, "sin", {});
        e.amp_cos = param(params, "cos", {});
        e.omega = real_param(params, "omega", 1.0);
        e.offset = param(params, "offset", {});
    } else if (name == "exponential") {
        e.kind = ExprFn::Kind::exponential;
        e.amp = param(params, "amp", Complex{1.0, 0.0});
        e.rate = real_param(params, "rate", 1.0);
        e.offset = param(params, "offset", {});
    } else if (name == "step") {
        e.kind = ExprFn::Kind::step;
        e.base = param(params, "base", {});
        e.height = param(params, "height", Complex{1.0, 0.0});
        e.location = real_param(params, "location", 0.0);
    } else if (name == "sawtooth") {
        e.kind = ExprFn::Kind::sawtooth;
        e.saw_amp = param(params, "amp", Complex{1.0, 0.0});
        e.period = real_param(params, "period", 1.0);
        e.phase = real_param(params, "phase", 0.0);
        if (e.period <= 0.0) throw SpecError(label + ": sawtooth period must be positive");
    } else if (name == "smoothstep") {
        e.kind = ExprFn::Kind::smoothstep;
        e.base = param(params, "base", {});
        e.height = param(params, "height", Complex{1.0, 0.0});
        e.location = real_param(params, "location", 0.0);
        e.width = real_param(params, "width", 1.0);
        if (e.width <= 0.0) throw SpecError(label + ": smoothstep width must be positive");
    } else {
        throw SpecError(label + ": unknown primitive '" + name + "'");
    }
    return CoefficientFn(std::move(e));
}

}  // namespace detail

inline ProblemSpec parse_problem_spec(const nlohmann::json& j) {
    ProblemSpec spec;
    if (!j.contains("interval") || !j.at("interval").is_array() || j.at("interval").size() != 2)
        throw SpecError("spec needs interval: [a, b]");
    spec.interval.a = j.at("interval")[0].get<double>();
    spec.interval.b = j.at("interval")[1].get<double>();
    for (const char* key : {"p", "u", "rho", "rho_prime"})
        if (!j.contains(key)) throw SpecError(std::string("spec needs coefficient '") + key + "'");
    spec.p = detail::parse_coefficient(j.at("p"), "p");
    spec.u = detail::parse_coefficient(j.at("u"), "u");
    spec.rho = detail::parse_coefficient(j.at("rho"), "rho");
    spec.rho_prime = detail::parse_coefficient(j.at("rho_prime"), "rho_prime");
    if (j.contains("breakpoints"))
        for (const auto& q : j.at("breakpoints")) spec.breakpoints.push_back(q.get<double>());
    return spec;
}

inline ProblemSpec load_problem_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SpecError("invalid JSON in " + path + ": " + e.what());
    }
    return parse_problem_spec(j);
}

}  // namespace singsl
