#include "bihar/free_ops.hpp"

#include <cmath>

#include "bihar/numerics.hpp"

namespace bihar {

namespace {

cplx ipow(int k) {
    static const cplx table[4] = {1.0, I, -1.0, -I};
    return table[((k % 4) + 4) % 4];
}

}  // namespace

cplx f_pm(double s, Branch b, int k) {
    if (k < 0 || k > 3) throw ConfigError("F derivative order must be 0..3");
    double sgn_k = (k % 2 == 0) ? 1.0 : -1.0;
    if (b == Branch::plus) return I * ipow(k) * std::exp(I * s) - sgn_k * std::exp(-s);
    return -I * std::conj(ipow(k)) * std::exp(-I * s) - sgn_k * std::exp(-s);
}

VecC ComplexKernel::apply(const VecC& f) const { return K * (cols.q.cast<cplx>().asDiagonal() * f); }

MatC ComplexKernel::op() const { return K * cols.q.cast<cplx>().asDiagonal(); }

cplx free_resolvent_value(double lambda, Branch b, double r) {
    if (!(lambda > 0)) throw DomainError("spectral parameter must be positive");
    return f_pm(lambda * std::abs(r), b) / (4 * lambda * lambda * lambda);
}

ComplexKernel free_resolvent_kernel(SpectralParam sp, const Grid& g) {
    if (!(sp.lambda > 0)) throw DomainError("spectral parameter must be positive");
    // The kernel depends on |i - j| only.
    VecC row(g.n);
    for (int k = 0; k < g.n; ++k) row[k] = free_resolvent_value(sp.lambda, sp.sign, k * g.h);
    ComplexKernel K{g, g, MatC(g.n, g.n)};
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) K.K(i, j) = row[std::abs(i - j)];
    return K;
}

VecC apply_free_resolvent(double lambda, Branch b, const Grid& g, const VecC& f) {
    if (!(lambda > 0)) throw DomainError("spectral parameter must be positive");
    VecC row(g.n);
    for (int k = 0; k < g.n; ++k) row[k] = free_resolvent_value(lambda, b, k * g.h);
    VecC fq = g.q.cast<cplx>().cwiseProduct(f);
    VecC out = VecC::Zero(g.n);
    for (int j = 0; j < g.n; ++j) {
        if (fq[j] == cplx(0)) continue;
        for (int i = 0; i < g.n; ++i) out[i] += row[std::abs(i - j)] * fq[j];
    }
    return out;
}

VecC apply_free_resolvent_at(double lambda, Branch b, const Grid& g, const VecC& f, const VecR& at) {
    if (!(lambda > 0)) throw DomainError("spectral parameter must be positive");
    VecC out = VecC::Zero(at.size());
    for (int j = 0; j < g.n; ++j) {
        cplx w = f[j] * g.q[j];
        if (w == cplx(0)) continue;
        for (int i = 0; i < at.size(); ++i) out[i] += free_resolvent_value(lambda, b, at[i] - g.x[j]) * w;
    }
    return out;
}

ComplexKernel g0_kernel(const Grid& g) {
    ComplexKernel K{g, g, MatC(g.n, g.n)};
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            double r = std::abs(g.x[i] - g.x[j]);
            K.K(i, j) = r * r * r / 12.0;
        }
    return K;
}

FAlphaBeta f_alpha_beta(double lambda, double x, double y, int alpha, int beta) {
    if (alpha < 0 || alpha > 3 || beta < 0 || beta > 3) throw ConfigError("alpha and beta must be in 0..3");
    if (lambda < 0) throw DomainError("lambda must be nonnegative");
    double s = lambda * std::abs(x), t = lambda * std::abs(y);
    FAlphaBeta r;
    r.direct = f_pm(s, Branch::plus, alpha) * (f_pm(t, Branch::plus, beta) - f_pm(t, Branch::minus, beta));
    double sb = (beta % 2 == 0) ? 1.0 : -1.0;
    double sa1 = (alpha % 2 == 0) ? -1.0 : 1.0;  // (-1)^(alpha+1)
    r.expansion = -ipow(alpha + beta) * (std::exp(I * (s + t)) + sb * std::exp(I * (s - t))) +
                  sa1 * ipow(beta + 1) * (sb * std::exp(-(s + I * t)) + std::exp(-(s - I * t)));
    return r;
}

cplx TaylorSplit::reconstructed() const {
    cplx s = remainder;
    for (const auto& t : terms) s += t;
    return s;
}

TaylorSplit taylor_split(double lambda, double x, double y, int order, Branch F, bool corrected, int gauss_nodes) {
    if (order < 1 || order > 3) throw ConfigError("Taylor order must be 1, 2 or 3");
    if (order == 3 && !corrected)
        throw DomainError("order 3 needs F''(0) = 0; use the corrected function F~");
    const cplx c2 = (F == Branch::plus) ? cplx(1, 1) : cplx(1, -1);
    // Derivatives of the function being expanded, as functions of s >= 0.
    auto Fk = [&](double s, int k) -> cplx {
        cplx v = f_pm(s, F, k);
        if (corrected) {
            if (k == 0) v += 0.5 * c2 * s * s;
            if (k == 1) v += c2 * s;
            if (k == 2) v += c2;
        }
        return v;
    };
    auto sgn = [](double v) { return double((v > 0) - (v < 0)); };

    TaylorSplit out;
    out.exact = Fk(lambda * std::abs(x - y), 0);
    out.terms.push_back(Fk(lambda * std::abs(x), 0));
    if (order >= 2) out.terms.push_back(-lambda * y * sgn(x) * Fk(lambda * std::abs(x), 1));
    if (order >= 3) out.terms.push_back(0.5 * lambda * lambda * y * y * Fk(lambda * std::abs(x), 2));

    auto integrand = [&](double th) -> cplx {
        double z = x - th * y;
        switch (order) {
            case 1: return sgn(z) * Fk(lambda * std::abs(z), 1);
            case 2: return (1 - th) * Fk(lambda * std::abs(z), 2);
            default: return (1 - th) * (1 - th) * sgn(z) * Fk(lambda * std::abs(z), 3);
        }
    };
    // The integrand has a kink (or a jump) where x - theta y changes sign; split there.
    std::vector<double> cuts{0.0};
    if (y != 0) {
        double ts = x / y;
        if (ts > 0 && ts < 1) cuts.push_back(ts);
    }
    cuts.push_back(1.0);
    cplx integral = 0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        QuadRule q = gauss_legendre(gauss_nodes, cuts[k], cuts[k + 1]);
        for (int i = 0; i < gauss_nodes; ++i) integral += q.w[i] * integrand(q.x[i]);
    }
    switch (order) {
        case 1: out.remainder = -lambda * y * integral; break;
        case 2: out.remainder = lambda * lambda * y * y * integral; break;
        default: out.remainder = -0.5 * lambda * lambda * lambda * y * y * y * integral; break;
    }
    return out;
}

VecC fourth_difference(const Grid& g, const VecC& u) {
    VecC d = VecC::Zero(g.n);
    double h4 = std::pow(g.h, 4);
    for (int i = 2; i + 2 < g.n; ++i)
        d[i] = (u[i - 2] - 4.0 * u[i - 1] + 6.0 * u[i] - 4.0 * u[i + 1] + u[i + 2]) / h4;
    return d;
}

VecR propagator_symbol(const Grid& g, PropagatorOptions::Symbol s) {
    VecR xi = Fft::frequencies(g.n, g.h);
    VecR sym(g.n);
    for (int k = 0; k < g.n; ++k) {
        if (s == PropagatorOptions::Symbol::continuum) {
            sym[k] = std::pow(xi[k], 4);
        } else {
            double sn = std::sin(xi[k] * g.h / 2);
            sym[k] = 16 * std::pow(sn, 4) / std::pow(g.h, 4);
        }
    }
    return sym;
}

namespace {

double boundary_fraction(const Grid& g, const VecC& u) {
    double tot = 0, out = 0;
    for (int i = 0; i < g.n; ++i) {
        double m = std::norm(u[i]);
        tot += m;
        if (std::abs(g.x[i]) > 0.9 * g.L) out += m;
    }
    return tot > 0 ? out / tot : 0.0;
}

}  // namespace

std::vector<Propagated> free_trajectory(const std::vector<double>& times, const SampledFunction& f,
                                        const PropagatorOptions& opt) {
    const Grid& g = f.grid;
    Fft fft(g.n);
    VecR sym = propagator_symbol(g, opt.symbol);
    std::vector<Propagated> out;
    out.reserve(times.size());
    if (!opt.absorbing) {
        VecC fh = f.values;
        fft.forward(fh);
        for (double t : times) {
            VecC u(g.n);
            for (int k = 0; k < g.n; ++k) u[k] = std::exp(-I * t * sym[k]) * fh[k];
            fft.backward(u);
            Propagated p{SampledFunction(g, u), boundary_fraction(g, u), false};
            p.wraparound_warning = p.boundary_mass > 0.01;
            out.push_back(std::move(p));
        }
        return out;
    }
    double xc = (1 - opt.layer_fraction) * g.L;
    VecR G(g.n);
    for (int i = 0; i < g.n; ++i) {
        double a = std::abs(g.x[i]);
        G[i] = a > xc ? std::pow((a - xc) / (g.L - xc), 2) : 0.0;
    }
    VecC u = f.values;
    double now = 0;
    for (double t : times) {
        if (t < now) throw ConfigError("trajectory times must be nondecreasing");
        while (now < t - 1e-14) {
            double dt = std::min(opt.dt_max, t - now);
            fft.forward(u);
            for (int k = 0; k < g.n; ++k) u[k] *= std::exp(-I * dt * sym[k]);
            fft.backward(u);
            for (int i = 0; i < g.n; ++i) u[i] *= std::exp(-opt.strength * G[i] * dt);
            now += dt;
        }
        now = t;
        Propagated p{SampledFunction(g, u), boundary_fraction(g, u), false};
        out.push_back(std::move(p));
    }
    return out;
}

Propagated free_propagate(double t, const SampledFunction& f, const PropagatorOptions& opt) {
    return free_trajectory({t}, f, opt).front();
}

SampledFunction free_propagator(double t, const SampledFunction& f) { return free_propagate(t, f).u; }

}  // namespace bihar
