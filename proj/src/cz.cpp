#include "bihar/wave_ops.hpp"

#include <cmath>
#include <algorithm>
#include <array>
#include <random>

#include "bihar/numerics.hpp"

namespace bihar {

double cutoff_psi(double s) {
    double t = std::clamp(s - 1.0, 0.0, 1.0);
    auto f = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
    double a = f(t), b = f(1 - t);
    return a / (a + b);
}

namespace {

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

cplx k1_value(Branch s, double x, double y) {
    double d = s == Branch::plus ? std::abs(x) + std::abs(y) : std::abs(x) - std::abs(y);
    double p = cutoff_psi(d * d);
    return p == 0 ? cplx(0) : cplx(p / d);
}

cplx k2_value(Branch s, double x, double y) {
    double d = std::abs(x) - std::abs(y);
    double p = cutoff_psi(d * d);
    if (p == 0) return 0;
    cplx den = std::abs(x) + (s == Branch::plus ? 1.0 : -1.0) * I * std::abs(y);
    return p / den;
}

cplx k1t_value(double x, double y) {
    double d = x - y;
    double p = cutoff_psi(d * d);
    return p == 0 ? cplx(0) : cplx(p / d);
}

cplx k2t_value(Branch s, double x, double y) {
    double d = x - y;
    double p = cutoff_psi(d * d);
    if (p == 0) return 0;
    return p / (x + (s == Branch::plus ? 1.0 : -1.0) * I * y);
}

// Coefficients of k1+, k1-, k2+, k2- in a k1, k2 or g kernel.
std::array<cplx, 4> coefficients(const CZKernelSpec& s) {
    using K = CZKernelSpec::Kind;
    const bool plus = s.sign == Branch::plus;
    switch (s.kind) {
        case K::k1: return plus ? std::array<cplx, 4>{1, 0, 0, 0} : std::array<cplx, 4>{0, 1, 0, 0};
        case K::k2: return plus ? std::array<cplx, 4>{0, 0, 1, 0} : std::array<cplx, 4>{0, 0, 0, 1};
        case K::g: {
            double pm = plus ? 1.0 : -1.0;
            return {s.a, pm * s.a, s.b, pm * s.b};
        }
        default: throw ConfigError("kernel kind has no chi decomposition");
    }
}

bool sgn_in(const CZKernelSpec& s) { return s.kind == CZKernelSpec::Kind::g && (s.j == 2 || s.j == 4); }
bool sgn_out(const CZKernelSpec& s) { return s.kind == CZKernelSpec::Kind::g && (s.j == 3 || s.j == 4); }

}  // namespace

CZKernelSpec CZKernelSpec::g_kernel(int j, Branch s, cplx a, cplx b) {
    CZKernelSpec k;
    k.kind = Kind::g;
    k.j = j;
    k.sign = s;
    k.a = a;
    k.b = b;
    k.validate();
    return k;
}

CZKernelSpec CZKernelSpec::from(std::function<cplx(double, double)> f) {
    CZKernelSpec k;
    k.kind = Kind::custom;
    k.custom = std::move(f);
    return k;
}

void CZKernelSpec::validate() const {
    const double tol = 1e-14 * std::max(1.0, std::abs(a));
    if (kind == Kind::g) {
        if (j < 1 || j > 4) throw ConfigError("g kernel index must be 1..4");
        if (j == 2 && sign == Branch::plus && std::abs(b + a) > tol)
            throw ConfigError("g_2^+ requires b = -a");
        if (j == 3 && sign == Branch::minus && std::abs(b + I * a) > tol)
            throw ConfigError("g_3^- requires b = -i a");
        if (j == 4 && sign == Branch::plus && std::abs(b + a) > tol)
            throw ConfigError("g_4^+ requires b = -a");
    }
    if (kind == Kind::truncated_hilbert && !(eps > 0)) throw ConfigError("truncation radius must be positive");
    if (kind == Kind::schur && !(rho > 1)) throw ConfigError("schur kernel exponent must exceed 1");
    if (kind == Kind::custom && !custom) throw ConfigError("custom kernel needs a callable");
    if (!(delta > 0 && delta <= 1)) throw ConfigError("Holder exponent must lie in (0, 1]");
}

cplx CZKernelSpec::operator()(double x, double y) const {
    switch (kind) {
        case Kind::k1: return k1_value(sign, x, y);
        case Kind::k2: return k2_value(sign, x, y);
        case Kind::k1_tilde: return k1t_value(x, y);
        case Kind::k2_tilde: return k2t_value(sign, x, y);
        case Kind::truncated_hilbert: {
            double d = x - y;
            return std::abs(d) > eps ? cplx(1.0 / d) : cplx(0);
        }
        case Kind::schur: {
            double d = std::abs(x) - std::abs(y);
            return std::pow(1 + d * d, -rho / 2);
        }
        case Kind::custom: return custom(x, y);
        case Kind::g: {
            auto c = coefficients(*this);
            cplx v = c[0] * k1_value(Branch::plus, x, y) + c[1] * k1_value(Branch::minus, x, y) +
                     c[2] * k2_value(Branch::plus, x, y) + c[3] * k2_value(Branch::minus, x, y);
            if (j == 2 || j == 4) v *= sgn(y);
            if (j == 3 || j == 4) v *= sgn(x);
            return v;
        }
    }
    return 0;
}

ComplexKernel cz_kernel_matrix(const CZKernelSpec& spec, const Grid& g) {
    spec.validate();
    ComplexKernel K{g, g, MatC(g.n, g.n)};
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) K.K(i, j) = spec(g.x[i], g.x[j]);
    return K;
}

SampledFunction cz_apply(const CZKernelSpec& spec, const SampledFunction& f) {
    return {f.grid, cz_kernel_matrix(spec, f.grid).apply(f.values)};
}

VecC cz_apply_at(const CZKernelSpec& spec, const SampledFunction& f, const VecR& at) {
    spec.validate();
    const Grid& g = f.grid;
    VecC out = VecC::Zero(at.size());
    for (int i = 0; i < at.size(); ++i)
        for (int j = 0; j < g.n; ++j)
            if (f.values[j] != cplx(0)) out[i] += spec(at[i], g.x[j]) * f.values[j] * g.q[j];
    return out;
}

SampledFunction cz_apply_decomposed(const CZKernelSpec& spec, const SampledFunction& f) {
    spec.validate();
    const Grid& g = f.grid;
    const int n = g.n;
    auto c = coefficients(spec);
    VecC u = f.values;
    if (sgn_in(spec))
        for (int i = 0; i < n; ++i) u[i] *= sgn(g.x[i]);
    VecC su = u + reflect(u);  // (1 + tau) u
    VecR chip(n), chim(n);
    for (int i = 0; i < n; ++i) {
        chip[i] = g.x[i] > 0 ? 1.0 : 0.0;
        chim[i] = g.x[i] < 0 ? 1.0 : 0.0;
    }
    CZKernelSpec t1 = spec, t2p = spec, t2m = spec;
    t1.kind = CZKernelSpec::Kind::k1_tilde;
    t2p.kind = t2m.kind = CZKernelSpec::Kind::k2_tilde;
    t2p.sign = Branch::plus;
    t2m.sign = Branch::minus;
    MatC T1 = cz_kernel_matrix(t1, g).op(), T2p = cz_kernel_matrix(t2p, g).op(), T2m = cz_kernel_matrix(t2m, g).op();
    VecC ap = chip.cast<cplx>().cwiseProduct(su), am = chim.cast<cplx>().cwiseProduct(su);
    VecC t1p = T1 * ap, t1m = T1 * am;
    VecC out(n);
    for (int i = 0; i < n; ++i) {
        // k1+ = chi+ T chi- - chi- T chi+, k1- = chi+ T chi+ - chi- T chi-, k2 = chi+ T chi+ - chi- T chi-
        cplx k1p = chip[i] * t1m[i] - chim[i] * t1p[i];
        cplx k1m = chip[i] * t1p[i] - chim[i] * t1m[i];
        out[i] = c[0] * k1p + c[1] * k1m;
    }
    if (c[2] != cplx(0) || c[3] != cplx(0)) {
        VecC p2p = T2p * ap, m2p = T2p * am, p2m = T2m * ap, m2m = T2m * am;
        for (int i = 0; i < n; ++i)
            out[i] += c[2] * (chip[i] * p2p[i] - chim[i] * m2p[i]) + c[3] * (chip[i] * p2m[i] - chim[i] * m2m[i]);
    }
    if (sgn_out(spec))
        for (int i = 0; i < n; ++i) out[i] *= sgn(g.x[i]);
    return {g, out};
}

AtomSuite atom_bmo_suite(const Grid& g, const std::function<cplx(double, double)>& K, int n_atoms,
                         std::uint64_t seed, int n_bmo) {
    if (g.L < 8) throw ConfigError("atom suite needs L >= 8");
    AtomSuite out;
    std::mt19937_64 rng(seed);
    auto unif = [&](double a, double b) { return a + (b - a) * ((rng() >> 11) * 0x1.0p-53); };
    std::vector<double> far = geomspace(g.L, 200 * g.L, 3000);
    for (int k = 0; k < n_atoms; ++k) {
        double r = std::exp(unif(std::log(2.0), std::log(g.L / 4)));
        double x0 = unif(-(g.L - r) / 2, (g.L - r) / 2);
        Atom a = make_atom(g, x0, r, rng());
        std::vector<int> sup;
        for (int j = 0; j < g.n; ++j)
            if (a.values[j] != 0) sup.push_back(j);
        auto T = [&](double x) {
            cplx s = 0;
            for (int j : sup) s += K(x, g.x[j]) * a.values[j] * g.q[j];
            return std::abs(s);
        };
        double l1 = 0;
        for (int i = 0; i < g.n; ++i) l1 += T(g.x[i]) * g.q[i];
        for (int sgnx : {1, -1}) {
            double prev = T(sgnx * far[0]);
            for (std::size_t m = 1; m < far.size(); ++m) {
                double cur = T(sgnx * far[m]);
                l1 += (far[m] - far[m - 1]) * (prev + cur) / 2;
                prev = cur;
            }
        }
        out.radii.push_back(r);
        out.l1.push_back(l1);
        out.max_l1 = std::max(out.max_l1, l1);
    }
    if (n_atoms >= 2) out.slope = loglog_fit(out.radii, out.l1).slope;
    if (n_bmo > 0) {
        MatC Km(g.n, g.n);
        for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.n; ++i) Km(i, j) = K(g.x[i], g.x[j]) * g.q[j];
        for (int k = 0; k < n_bmo; ++k) {
            // bounded test function: random values on unit pieces
            VecC f(g.n);
            double piece = unif(1.0, 8.0);
            std::vector<double> vals(int(std::ceil(2 * g.L / piece)) + 1);
            for (double& v : vals) v = unif(-1, 1);
            for (int i = 0; i < g.n; ++i) f[i] = vals[int((g.x[i] + g.L) / piece)];
            out.max_bmo = std::max(out.max_bmo, bmo_norm(SampledFunction(g, Km * f)));
        }
    }
    return out;
}

}  // namespace bihar
