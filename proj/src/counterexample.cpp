#include <cmath>

#include "bihar/birman_schwinger.hpp"
#include "bihar/numerics.hpp"
#include "bihar/wave_ops.hpp"

namespace bihar {

namespace {

double model_a_kernel(double x, double y) {
    double ax = std::abs(x), ay = std::abs(y);
    if (std::abs(ax - ay) < 2) return 0;
    return 1.0 / (ax + ay) + 1.0 / (ax - ay);
}

int even_n(double L, double h) {
    int n = 2 * int(std::ceil(L / h)) + 2;
    return n;
}

}  // namespace

double model_a_value(const Grid& g, double R) {
    if (!(R > 0)) throw ConfigError("R must be positive");
    if (g.L < 2 * R) throw ConfigError("grid too small: need L >= 2R");
    SampledFunction f(g, indicator(g, -R, R).cast<cplx>());
    VecR at(1);
    at[0] = R + 2;
    return cz_apply_at(CZKernelSpec::g_kernel(1, Branch::plus, 1.0, 0.0), f, at)[0].real();
}

ModelAResult model_a_values(const std::vector<double>& Rs, double h) {
    if (!(h > 0)) throw ConfigError("grid spacing must be positive");
    ModelAResult out;
    for (double R : Rs) {
        Grid g = make_grid(2 * R, even_n(2 * R, h));
        double v = model_a_value(g, R), e = 2 * std::log(R + 1);
        out.R.push_back(R);
        out.value.push_back(v);
        out.expected.push_back(e);
        out.max_rel_error = std::max(out.max_rel_error, std::abs(v - e) / e);
    }
    return out;
}

TailResult model_a_tail(const std::vector<double>& Rps, int nodes) {
    if (Rps.size() < 2) throw ConfigError("tail fit needs at least two cut-offs");
    QuadRule neg = gauss_legendre(nodes, -1, 0), pos = gauss_legendre(nodes, 0, 1);
    auto Tf1 = [&](double x) {
        double s = 0;
        for (const QuadRule* q : {&neg, &pos})
            for (std::size_t k = 0; k < q->x.size(); ++k) s += q->w[k] * model_a_kernel(x, q->x[k]);
        return std::abs(s);
    };
    TailResult out;
    double acc = 0, a = 3;
    for (double Rp : Rps) {
        if (!(Rp > a)) throw ConfigError("cut-offs must increase and exceed 3");
        // panels of one octave each in log x
        while (a < Rp) {
            double b = std::min(2 * a, Rp);
            QuadRule q = gauss_legendre_log(nodes, a, b);
            for (std::size_t k = 0; k < q.x.size(); ++k) acc += 2 * q.w[k] * Tf1(q.x[k]);
            a = b;
        }
        out.Rp.push_back(Rp);
        out.integral.push_back(acc);
    }
    std::vector<double> lx;
    for (double r : out.Rp) lx.push_back(std::log(r));
    out.normalized_slope = fit_line(lx, out.integral).slope / 8.0;
    return out;
}

namespace {

double P(double a, double t) { return std::log(a + t) + std::log(std::abs(a - t)) - std::log(a * a + t * t); }

// Integral over t in [t1, t2], t >= 0, of the model kernel with the band |a - t| < 2 removed.
double Ipos(double a, double t1, double t2) {
    double s = 0;
    double hi = std::min(t2, a - 2);
    if (hi > t1) s += P(a, hi) - P(a, t1);
    double lo = std::max(t1, a + 2);
    if (t2 > lo) s += P(a, t2) - P(a, lo);
    return s;
}

double J(double a, double c, double d) {
    return Ipos(a, std::max(c, 0.0), std::max(d, 0.0)) - Ipos(a, std::max(-d, 0.0), std::max(-c, 0.0));
}

}  // namespace

ModelBResult model_b_sup(const std::vector<double>& Rs, double dx) {
    if (!(dx > 0)) throw ConfigError("sampling step must be positive");
    // Smooth rank-one coefficient m(u) = u (1 - u^2)^2 averaged over the shift u theta.
    QuadRule gu = gauss_legendre(24, -1, 1), gt = gauss_legendre(8, 0, 1);
    std::vector<double> U, W;
    for (std::size_t i = 0; i < gu.x.size(); ++i) {
        double u = gu.x[i], m = u * std::pow(1 - u * u, 2);
        for (std::size_t k = 0; k < gt.x.size(); ++k) {
            U.push_back(u * gt.x[k]);
            W.push_back(gu.w[i] * m * gt.w[k]);
        }
    }
    ModelBResult out;
    for (double R : Rs) {
        if (!(R > 0)) throw ConfigError("R must be positive");
        double sup = 0;
        int nx = int(std::ceil(3 * R / dx));
        for (int ix = 0; ix <= nx; ++ix) {
            double x = ix * dx + 1e-7;
            double v = 0;
            for (std::size_t p = 0; p < U.size(); ++p) {
                double inner = 0;
                for (std::size_t q = 0; q < U.size(); ++q) {
                    double X1 = x - U[q];
                    double sg = X1 > 0 ? 1.0 : (X1 < 0 ? -1.0 : 0.0);
                    inner += W[q] * sg * J(std::abs(X1), -R - U[p], R - U[p]);
                }
                v += W[p] * inner;
            }
            sup = std::max(sup, std::abs(v));
        }
        out.R.push_back(R);
        out.sup.push_back(sup);
    }
    if (out.R.size() >= 2) out.slope = loglog_fit(out.R, out.sup).slope;
    return out;
}

CounterexampleReport counterexample_sweep(const std::vector<double>& Rs) {
    CounterexampleReport r;
    r.a = model_a_values(Rs);
    std::vector<double> rp;
    for (double R : Rs) rp.push_back(std::max(10.0, 10 * R));
    std::sort(rp.begin(), rp.end());
    rp.erase(std::unique(rp.begin(), rp.end()), rp.end());
    if (rp.size() < 2) rp = {10, 100, 1000, 10000};
    r.tail = model_a_tail(rp);
    r.b = model_b_sup(Rs);
    return r;
}

DStarProbe d_star_probe(const SampledFunction& V, double R, bool zero_blocks) {
    if (!(R > 0)) throw ConfigError("R must be positive");
    DStarProbe out;
    ResonanceClass rc = classify_zero_energy(V);
    if (rc.kind != ResonanceKind::SecondKind) throw ConfigError("D* probe needs a second-kind potential");
    double scale = 0;
    if (!zero_blocks) {
        ExpansionFit fit = fit_inverse_expansion(V, ResonanceKind::SecondKind);
        ProjectionSet ps = build_projections(V);
        out.d_star = d_star_from_fit(fit, ps);
        out.fit_residual = fit.max_residual;
        scale = ps.D.cwiseProduct(ps.X.array().cube().matrix()).squaredNorm();
    }
    // D* is a bilinear form in x^3 v; anything at rounding level of that scale counts as zero.
    out.reliable = out.fit_residual < 1e-2 && std::abs(out.d_star) > 1e-10 * scale;
    // Far-field kernel of the leading low-energy term, conj(m) sgn x sgn y times the g-type profile.
    const cplx m = std::conj(out.d_star) / 576.0;
    QuadRule qy = gauss_legendre(64, R, 2 * R);
    out.x = geomspace(2.5 * R, 10 * R, 40);
    std::vector<cplx> vals;
    for (double x : out.x) {
        cplx s = 0;
        for (int side : {1, -1})
            for (std::size_t k = 0; k < qy.x.size(); ++k) {
                double y = side * qy.x[k], ax = std::abs(x), ay = std::abs(y);
                if (std::abs(ax - ay) < 2) continue;
                cplx prof = I / (ax + ay) + I / (ax - ay) + 2.0 * I * ax / (x * x + y * y);
                double sx = x > 0 ? 1 : -1, sy = y > 0 ? 1 : -1;
                s += qy.w[k] * m * sx * sy * prof * sy;  // g_R(y) = sgn y on R <= |y| <= 2R
            }
        vals.push_back(s);
        out.value.push_back(std::abs(s));
    }
    if (!out.reliable) return out;
    out.tail_exponent = loglog_fit(out.x, out.value).slope;
    const int k = int(out.x.size());
    MatC A(k, 3);
    VecC b(k);
    for (int i = 0; i < k; ++i) {
        double r = R / out.x[i];
        A(i, 0) = r;
        A(i, 1) = r * r;
        A(i, 2) = r * r * r;
        b[i] = vals[i];
    }
    VecC c = A.colPivHouseholderQr().solve(b);
    out.c1 = c[0];
    out.consistency = std::abs(c[0]) / (std::abs(out.d_star) / 72.0);
    return out;
}

}  // namespace bihar
