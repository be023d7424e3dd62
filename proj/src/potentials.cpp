#include "bihar/potentials.hpp"

#include <cmath>
#include <random>

#include "bihar/numerics.hpp"

namespace bihar {

namespace {

double pos4(double x) {
    double t = 1 - x * x;
    return t > 0 ? t * t * t * t : 0.0;
}

}  // namespace

// 1 / int_{-1}^{1} (1 - x^2)^4 dx
constexpr double kRamp = 315.0 / 256.0;

double ResonanceProfile::at(double x, double c, double d) const {
    if (value) return value(x);
    double x2 = x * x;
    double ramp = x <= -1 ? 0.0 : x >= 1 ? 1.0 : 0.5 + kRamp * x * (1 - 4 * x2 / 3 + 6 * x2 * x2 / 5 - 4 * x2 * x2 * x2 / 7 + x2 * x2 * x2 * x2 / 9);
    return d + c * (5 + 15 * x2 - 5 * x2 * x2 + x2 * x2 * x2) / 16 + alpha * pos4(x) + step * ramp;
}

double ResonanceProfile::second(double x, double c) const {
    if (d2) return d2(x);
    double x2 = x * x;
    return c * (30 - 60 * x2 + 30 * x2 * x2) / 16 + alpha * (-8 + 72 * x2 - 120 * x2 * x2 + 56 * x2 * x2 * x2) +
           step * kRamp * x * (-8 + 24 * x2 - 24 * x2 * x2 + 8 * x2 * x2 * x2);
}

double ResonanceProfile::fourth(double x, double c) const {
    if (d4) return d4(x);
    double x2 = x * x;
    return c * (-120 + 360 * x2) / 16 + alpha * (144 - 1440 * x2 + 1680 * x2 * x2) +
           step * kRamp * x * (144 - 480 * x2 + 336 * x2 * x2);
}

PotentialSpec PotentialSpec::bump(double amplitude, double radius, std::uint64_t seed) {
    PotentialSpec p;
    p.variant = Variant::compact_bump;
    p.amplitude = amplitude;
    p.radius = radius;
    p.seed = seed;
    return p;
}

PotentialSpec PotentialSpec::embedded() {
    PotentialSpec p;
    p.variant = Variant::embedded;
    p.sampling = Sampling::pointwise;
    return p;
}

PotentialSpec PotentialSpec::samples(VecR v) {
    PotentialSpec p;
    p.variant = Variant::custom;
    p.custom = std::move(v);
    return p;
}

std::string PotentialSpec::name() const {
    switch (variant) {
        case Variant::zero: return "free";
        case Variant::compact_bump: return "bump";
        case Variant::resonance_built: return c > 0 ? "first_kind" : "second_kind";
        case Variant::zero_eigen_built: return "zero_eigen";
        case Variant::embedded: return "embedded";
        case Variant::custom: return "custom";
    }
    return "unknown";
}

PotentialSpec resonance_builder(double c, double d, ResonanceProfile profile) {
    if (c < 0 || d < 0) throw ConfigError("resonance builder needs c >= 0 and d >= 0");
    if (c == 0 && d == 0) throw ConfigError("resonance builder needs (c, d) != (0, 0)");
    bool custom = bool(profile.d2) || bool(profile.d4) || bool(profile.value);
    if (custom && !(profile.d2 && profile.d4 && profile.value))
        throw ConfigError("a custom profile needs its value, second and fourth derivatives");
    PotentialSpec p;
    p.variant = PotentialSpec::Variant::resonance_built;
    p.c = c;
    p.d = d;
    p.profile = std::move(profile);
    p.mu_claim = INF;
    return p;
}

PotentialSpec zero_eigen_builder(double s) {
    if (!(s > 1)) throw DomainError("zero-eigenvalue builder needs s > 1 so that phi is in L^2");
    PotentialSpec p;
    p.variant = PotentialSpec::Variant::zero_eigen_built;
    p.s = s;
    p.mu_claim = 4;
    return p;
}

double zero_eigen_potential(double x, double s) {
    double x2 = x * x;
    double num = (s * s + 4 * s + 3) * x2 * x2 - (6 * s + 18) * x2 + 3;
    return -s * (s + 2) * num / std::pow(1 + x2, 4);
}

double embedded_potential(double x) {
    double c = 1.0 / std::cosh(x);
    double c2 = c * c;
    return 20 * c2 - 24 * c2 * c2;
}

double bump_profile(double x, double A, double r) {
    double t = 1 - (x / r) * (x / r);
    if (t <= 0) return 0.0;
    return A * std::exp(1.0 - 1.0 / t);
}

namespace {

// phi with phi'' linear between nodes, nodal values s, even, phi(0) = p0; integrated outward from
// the two central nodes (which sit at -h/2 and h/2).
VecR integrate_even(const Grid& g, const VecR& s, double p0) {
    const int n = g.n, c0 = n / 2;
    const double h = g.h;
    VecR S(n), Sp(n);
    double xc = g.x[c0];
    S[c0] = p0 + s[c0] * xc * xc / 2;
    Sp[c0] = s[c0] * xc;
    for (int j = c0; j + 1 < n; ++j) {
        Sp[j + 1] = Sp[j] + h * (s[j] + s[j + 1]) / 2;
        S[j + 1] = S[j] + h * Sp[j] + h * h * (2 * s[j] + s[j + 1]) / 6;
    }
    for (int j = c0 - 1; j >= 0; --j) S[j] = S[n - 1 - j];
    return S;
}

// Same construction integrated from the left end, where phi = c|x| + d and phi' = -c.
VecR integrate_left(const Grid& g, const VecR& s, double c, double d) {
    const int n = g.n;
    const double h = g.h;
    VecR S(n);
    double Sp = -c;
    S[0] = c * std::abs(g.x[0]) + d;
    for (int j = 0; j + 1 < n; ++j) {
        S[j + 1] = S[j] + h * Sp + h * h * (2 * s[j] + s[j + 1]) / 6;
        Sp += h * (s[j] + s[j + 1]) / 2;
    }
    return S;
}

double comb_residual(const Grid& g, const VecR& sext, const VecR& V, const VecR& S) {
    // sext holds s with one extra value on each side.
    double num = 0, den = 0;
    for (int j = 0; j < g.n; ++j) {
        double d2 = (sext[j + 2] - 2 * sext[j + 1] + sext[j]) / (g.h * g.h);
        num = std::max(num, std::abs(d2 + V[j] * S[j]));
        den = std::max(den, std::abs(V[j] * S[j]));
    }
    return den > 0 ? num / den : num;
}

// V = -(fourth difference of phi) / phi, so phi is an exact null vector of the interior stencil.
// Computed on the right half and mirrored when phi is even, so that V stays exactly even.
BuiltPotential stencil_exact(const Grid& g, const std::function<double(double)>& phi, bool even = true) {
    const int n = g.n;
    BuiltPotential out;
    out.V.resize(n);
    out.phi.resize(n);
    VecR pext(n + 4);
    for (int j = 0; j < n + 4; ++j) pext[j] = phi(g.x[0] + (j - 2) * g.h);
    const double h4 = std::pow(g.h, 4);
    double num = 0, den = 0;
    for (int j = even ? n / 2 : 0; j < n; ++j) {
        double d4 = (pext[j] - 4 * pext[j + 1] + 6 * pext[j + 2] - 4 * pext[j + 3] + pext[j + 4]) / h4;
        if (!(pext[j + 2] > 0)) throw ConfigError("profile must be positive");
        out.phi[j] = pext[j + 2];
        out.V[j] = -d4 / pext[j + 2];
        if (even) {
            out.phi[n - 1 - j] = out.phi[j];
            out.V[n - 1 - j] = out.V[j];
        }
        num = std::max(num, std::abs(d4 + out.V[j] * out.phi[j]));
        den = std::max(den, std::abs(d4));
    }
    out.residual = den > 0 ? num / den : num;
    return out;
}

BuiltPotential build_resonance(const PotentialSpec& spec, const Grid& g) {
    const int n = g.n;
    BuiltPotential out;
    out.V = VecR::Zero(n);
    out.phi.resize(n);
    if (spec.sampling == Sampling::stencil) {
        auto phi = [&](double x) {
            if (std::abs(x) < 1) return spec.profile.at(x, spec.c, spec.d);
            return spec.c * std::abs(x) + spec.d + (x >= 1 ? spec.profile.step : 0.0);
        };
        return stencil_exact(g, phi, spec.profile.step == 0);
    }
    if (spec.sampling == Sampling::pointwise) {
        double num = 0, den = 0;
        for (int i = 0; i < n; ++i) {
            double x = g.x[i];
            if (std::abs(x) < 1) {
                double p = spec.profile.at(x, spec.c, spec.d);
                if (!(p > 0)) throw ConfigError("resonance profile must be positive");
                out.phi[i] = p;
                out.V[i] = -spec.profile.fourth(x, spec.c) / p;
                num = std::max(num, std::abs(spec.profile.fourth(x, spec.c) + out.V[i] * p));
                den = std::max(den, std::abs(out.V[i] * p));
            } else {
                out.phi[i] = spec.c * std::abs(x) + spec.d;
            }
        }
        out.residual = den > 0 ? num / den : num;
        return out;
    }
    VecR s(n), b(n);
    for (int i = 0; i < n; ++i) {
        double x = g.x[i];
        bool in = std::abs(x) < 1;
        s[i] = in ? spec.profile.second(x, spec.c) : 0.0;
        b[i] = in ? (1 - x * x) * (1 - x * x) : 0.0;
    }
    // The slope jump across [-1, 1] must be exactly 2c for the discrete profile too.
    double kappa = (2 * spec.c - g.h * s.sum()) / (g.h * b.sum());
    s += kappa * b;
    VecR S = spec.profile.step == 0 ? integrate_even(g, s, spec.profile.at(0.0, spec.c, spec.d))
                                    : integrate_left(g, s, spec.c, spec.d);
    for (int i = 0; i < n; ++i)
        if (!(S[i] > 0)) throw ConfigError("resonance profile must be positive");
    for (int j = 1; j + 1 < n; ++j) out.V[j] = -(s[j + 1] - 2 * s[j] + s[j - 1]) / (g.h * g.h * S[j]);
    VecR sext = VecR::Zero(n + 2);
    sext.segment(1, n) = s;
    out.phi = S;
    out.residual = comb_residual(g, sext, out.V, S);
    return out;
}

BuiltPotential build_zero_eigen(const PotentialSpec& spec, const Grid& g) {
    const int n = g.n;
    const double sp = spec.s;
    auto phi = [&](double x) { return std::pow(1 + x * x, -sp / 2); };
    auto phi2 = [&](double x) { return sp * ((sp + 1) * x * x - 1) * std::pow(1 + x * x, -sp / 2 - 2); };
    BuiltPotential out;
    out.V.resize(n);
    out.phi.resize(n);
    if (spec.sampling == Sampling::pointwise) {
        double num = 0, den = 0;
        for (int i = 0; i < n; ++i) {
            double x = g.x[i], x2 = x * x;
            out.phi[i] = phi(x);
            out.V[i] = zero_eigen_potential(x, sp);
            double d4 = sp * (sp + 2) * ((sp + 1) * (sp + 3) * x2 * x2 - 6 * (sp + 3) * x2 + 3) *
                        std::pow(1 + x2, -sp / 2 - 4);
            num = std::max(num, std::abs(d4 + out.V[i] * out.phi[i]));
            den = std::max(den, std::abs(out.V[i] * out.phi[i]));
        }
        out.residual = num / den;
        return out;
    }
    if (spec.sampling == Sampling::stencil) return stencil_exact(g, phi);
    VecR s(n);
    for (int i = 0; i < n; ++i) s[i] = phi2(g.x[i]);
    VecR S = integrate_even(g, s, 1.0);
    VecR sext(n + 2);
    sext[0] = phi2(g.x[0] - g.h);
    sext.segment(1, n) = s;
    sext[n + 1] = phi2(g.x[n - 1] + g.h);
    for (int j = 0; j < n; ++j) {
        if (!(S[j] > 0)) throw NumericalError("zero-eigenvalue profile lost positivity on this grid");
        out.V[j] = -(sext[j + 2] - 2 * sext[j + 1] + sext[j]) / (g.h * g.h * S[j]);
    }
    out.phi = S;
    out.residual = comb_residual(g, sext, out.V, S);
    return out;
}

}  // namespace

BuiltPotential build_potential(const PotentialSpec& spec, const Grid& g) {
    switch (spec.variant) {
        case PotentialSpec::Variant::resonance_built: return build_resonance(spec, g);
        case PotentialSpec::Variant::zero_eigen_built: return build_zero_eigen(spec, g);
        default: {
            BuiltPotential b;
            b.V = sample_potential(spec, g).values.real();
            b.phi = VecR::Zero(g.n);
            return b;
        }
    }
}

SampledFunction sample_potential(const PotentialSpec& spec, const Grid& g) {
    VecR V = VecR::Zero(g.n);
    switch (spec.variant) {
        case PotentialSpec::Variant::zero: break;
        case PotentialSpec::Variant::compact_bump: {
            if (!(spec.radius > 0)) throw ConfigError("bump radius must be positive");
            if (spec.radius >= g.L / 2) throw ConfigError("bump support must stay inside |x| < L/2");
            // A nonzero seed modulates the bump by a random positive cosine series.
            double a[3] = {0, 0, 0};
            if (spec.seed != 0) {
                std::mt19937_64 rng(spec.seed);
                for (double& ak : a) ak = 0.25 * (2 * ((rng() >> 11) * 0x1.0p-53) - 1);
            }
            for (int i = 0; i < g.n; ++i) {
                double x = g.x[i];
                double m = 1;
                for (int k = 0; k < 3; ++k) m += a[k] * std::cos((k + 1) * PI * x / (2 * spec.radius));
                V[i] = bump_profile(x, spec.amplitude, spec.radius) * m;
            }
            break;
        }
        case PotentialSpec::Variant::resonance_built:
        case PotentialSpec::Variant::zero_eigen_built: V = build_potential(spec, g).V; break;
        case PotentialSpec::Variant::embedded:
            for (int i = 0; i < g.n; ++i) V[i] = embedded_potential(g.x[i]);
            break;
        case PotentialSpec::Variant::custom:
            if (spec.custom.size() != g.n) throw ConfigError("custom potential length does not match the grid");
            if (!spec.custom.allFinite()) throw ConfigError("custom potential has non-finite samples");
            V = spec.custom;
            break;
    }
    return SampledFunction(g, V.cast<cplx>());
}

PotentialReport checks(const SampledFunction& Vf) {
    const Grid& g = Vf.grid;
    VecR V = Vf.values.real();
    PotentialReport r;
    double vmax = V.cwiseAbs().maxCoeff();
    for (int i = 0; i < g.n; ++i)
        if (V[i] != 0) r.support_radius = std::max(r.support_radius, std::abs(g.x[i]));
    r.compact = r.support_radius < g.L / 2;
    for (int i = 0; i < g.n; ++i)
        if (std::abs(V[i] - V[g.n - 1 - i]) > 1e-12 * std::max(vmax, 1e-300)) r.even = false;
    for (int i = 1; i + 1 < g.n; ++i) {
        double dv = (V[i + 1] - V[i - 1]) / (2 * g.h);
        if (g.x[i] * dv > 1e-10 * vmax) {
            r.repulsive = false;
            break;
        }
    }
    std::vector<double> lx, ax, lv;
    for (int i = 0; i < g.n; ++i) {
        double a = std::abs(g.x[i]);
        if (a >= g.L / 2 && a <= 0.9 * g.L && std::abs(V[i]) > 0) {
            lx.push_back(0.5 * std::log1p(a * a));
            ax.push_back(a);
            lv.push_back(std::log(std::abs(V[i])));
        }
    }
    if (lx.size() < 4) return r;
    LineFit pw = fit_line(lx, lv), ex = fit_line(ax, lv);
    auto rss = [&](const LineFit& f, const std::vector<double>& xs) {
        double s = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double e = lv[i] - f.intercept - f.slope * xs[i];
            s += e * e;
        }
        return s;
    };
    r.decay_exponent = -pw.slope;
    r.decay = (ex.slope < 0 && rss(ex, ax) < 0.1 * rss(pw, lx)) ? PotentialReport::Decay::super_polynomial
                                                                 : PotentialReport::Decay::polynomial;
    return r;
}

PotentialReport checks(const PotentialSpec& spec, const Grid& g) { return checks(sample_potential(spec, g)); }

}  // namespace bihar
