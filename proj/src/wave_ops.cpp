#include "bihar/wave_ops.hpp"

#include <cmath>
#include <random>

#include "bihar/birman_schwinger.hpp"
#include "bihar/numerics.hpp"

namespace bihar {

MatC weighted_adjoint(const Grid& g, const MatC& W) {
    return g.q.cwiseInverse().cast<cplx>().asDiagonal() * W.adjoint() * g.q.cast<cplx>().asDiagonal();
}

MatC plus_from_minus(const MatC& Wminus) { return Wminus.conjugate(); }

namespace {

struct NodeTerm {
    VecC ac, as;  // R_0^+ v M^{-1} v applied to cos and sin, on the full grid
};

NodeTerm node_term(const VUFactorization& vu, const Grid& g, double lam) {
    const int m = vu.size();
    MInverse Mi(vu, lam);
    VecC dc(m), ds(m);
    for (int k = 0; k < m; ++k) {
        dc[k] = vu.D[k] * std::cos(lam * vu.X[k]);
        ds[k] = vu.D[k] * std::sin(lam * vu.X[k]);
    }
    VecC yc = Mi.apply(dc), ys = Mi.apply(ds);
    NodeTerm t{VecC::Zero(g.n), VecC::Zero(g.n)};
    for (int k = 0; k < m; ++k) {
        cplx wc = vu.D[k] * yc[k], ws = vu.D[k] * ys[k];
        for (int i = 0; i < g.n; ++i) {
            cplx r = free_resolvent_value(lam, Branch::plus, g.x[i] - vu.X[k]);
            t.ac[i] += r * wc;
            t.as[i] += r * ws;
        }
    }
    return t;
}

double l2q(const Grid& g, const VecC& f) { return std::sqrt((f.cwiseAbs2().array() * g.q.array()).sum()); }

}  // namespace

WaveOperatorBundle stationary_wave_op(const SampledFunction& V, const QuadConfig& cfg) {
    const Grid& g = V.grid;
    if (!(cfg.lambda_min > 0 && cfg.lambda_min < cfg.lambda0 && cfg.lambda0 < cfg.lambda_max))
        throw ConfigError("quadrature needs 0 < lambda_min < lambda0 < lambda_max");
    WaveOperatorBundle wb;
    wb.method = WaveOperatorBundle::Method::stationary;
    wb.grid = g;
    wb.quad = cfg;
    VUFactorization vu = VUFactorization::from(V);
    if (vu.size() == 0) {
        wb.W = MatC::Identity(g.n, g.n);
        wb.Wstar = wb.W;
        return wb;
    }
    QuadRule lo = gauss_legendre_log(cfg.n_low, cfg.lambda_min, cfg.lambda0);
    QuadRule hi = gauss_legendre(cfg.n_high, cfg.lambda0, cfg.lambda_max);
    std::vector<double> lams = lo.x, ws = lo.w;
    lams.insert(lams.end(), hi.x.begin(), hi.x.end());
    ws.insert(ws.end(), hi.w.begin(), hi.w.end());
    const int N = int(lams.size());
    wb.nodes = N;
    // K = sum_nodes w (i/2) [A_c cos^T + A_s sin^T], accumulated as one product.
    MatC left(g.n, 2 * N), right(g.n, 2 * N);
    for (int k = 0; k < N; ++k) {
        NodeTerm t = node_term(vu, g, lams[k]);
        cplx c = ws[k] * 0.5 * I;
        left.col(2 * k) = c * t.ac;
        left.col(2 * k + 1) = c * t.as;
        for (int i = 0; i < g.n; ++i) {
            right(i, 2 * k) = std::cos(lams[k] * g.x[i]);
            right(i, 2 * k + 1) = std::sin(lams[k] * g.x[i]);
        }
    }
    const cplx pref = -2.0 / (PI * I);
    MatC K = pref * (left * right.transpose());
    wb.W = MatC::Identity(g.n, g.n) + K * g.q.cast<cplx>().asDiagonal();
    wb.Wstar = weighted_adjoint(g, wb.W);
    // The integrand decays like lambda^-3, so the tail beyond Lambda is about I(Lambda) Lambda / 2.
    NodeTerm t = node_term(vu, g, cfg.lambda_max);
    MatC Ilam(g.n, g.n);
    for (int j = 0; j < g.n; ++j) {
        double c = std::cos(cfg.lambda_max * g.x[j]), s = std::sin(cfg.lambda_max * g.x[j]);
        Ilam.col(j) = pref * 0.5 * I * (t.ac * c + t.as * s) * g.q[j];
    }
    wb.tail_estimate = Ilam.norm() * cfg.lambda_max / 2;
    wb.tail_warning = wb.tail_estimate > cfg.tail_tolerance;
    return wb;
}

MatC meanzero_family(const Grid& g, const std::vector<double>& centres, double sigma) {
    MatC F(g.n, centres.size());
    for (std::size_t k = 0; k < centres.size(); ++k)
        for (int i = 0; i < g.n; ++i) {
            double d = g.x[i] - centres[k];
            F(i, k) = std::exp(-d * d / (2 * sigma * sigma)) - 0.5 * std::exp(-d * d / (8 * sigma * sigma));
        }
    return F;
}

double family_distance(const Grid& g, const MatC& A, const MatC& B, const MatC& F) {
    double worst = 0;
    for (int k = 0; k < F.cols(); ++k) {
        VecC f = F.col(k);
        worst = std::max(worst, l2q(g, A * f - B * f) / l2q(g, f));
    }
    return worst;
}

double family_defect(const Grid& g, const MatC& A, const MatC& F) {
    return family_distance(g, A, MatC::Identity(g.n, g.n), F);
}

MatC gram_matrix(const Grid& g, const MatC& W, const MatC& F) {
    return F.adjoint() * g.q.cast<cplx>().asDiagonal() * W * F;
}

WaveOperatorBundle time_dependent_wave_op(const SampledFunction& V, const MatC& F, const TimeDependentConfig& cfg) {
    const Grid& g = V.grid;
    const int n = g.n, nb = cfg.big_n, k = int(F.cols());
    if (nb < n || (nb - n) % 2 != 0) throw ConfigError("work grid must be at least as large as the grid, same parity");
    if (F.rows() != n || k == 0) throw ConfigError("test family must be a nonempty set of grid functions");
    std::vector<double> times = cfg.times;
    if (times.empty())
        for (int j = 0; j <= 16; ++j) times.push_back(std::pow(2.0, j / 2.0));
    if (int(times.size()) < cfg.cesaro + 1) throw ConfigError("time schedule shorter than the averaging window");
    WaveOperatorBundle wb;
    wb.method = WaveOperatorBundle::Method::time_dependent;
    wb.grid = g;
    wb.times = times;

    const int off = (nb - n) / 2;
    const double h = g.h;
    VecR xb(nb), Vb = VecR::Zero(nb), Gam(nb);
    for (int i = 0; i < nb; ++i) xb[i] = (i - (nb - 1) / 2.0) * h;
    VecR Vr = V.values.real();
    for (int i = 0; i < n; ++i) Vb[off + i] = Vr[i];
    const double Lb = xb[nb - 1], xc = cfg.absorber_start * Lb;
    for (int i = 0; i < nb; ++i) {
        double a = std::abs(xb[i]);
        Gam[i] = a > xc ? cfg.absorber_strength * std::pow((a - xc) / (Lb - xc), 2) : 0.0;
    }
    MatC psi = MatC::Zero(nb, k);
    psi.middleRows(off, n) = F;
    MatC phi = psi;
    VecR E = Fft::frequencies(nb, h).array().pow(4);
    Fft fft(nb);
    const bool free = Vr.cwiseAbs().maxCoeff() == 0;

    auto integrand = [&](const MatC& a, const MatC& b) -> MatC {
        return (Vb.cast<cplx>().asDiagonal() * a).transpose() * b.conjugate() * h;
    };
    MatC S = (F.adjoint() * g.q.cast<cplx>().asDiagonal() * F).transpose();  // S_ab = <f_a, f_b>
    MatC integ = MatC::Zero(k, k), cur = integrand(psi, phi);
    std::vector<MatC> G;
    double sig = 0;
    std::size_t next = 0;
    while (!free && next < times.size()) {
        double dt = std::min({cfg.dt_rel * std::max(1.0, sig), cfg.dt_max, times[next] - sig});
        VecC pe(nb), hv(nb), fe(nb);
        for (int i = 0; i < nb; ++i) {
            pe[i] = std::exp(-Gam[i] * dt);
            hv[i] = std::exp((I * Vb[i] - Gam[i]) * (dt / 2));
            fe[i] = std::exp(I * E[i] * dt);
        }
        for (int c = 0; c < k; ++c) {
            VecC u = psi.col(c);
            fft.forward(u);
            u.array() *= fe.array();
            fft.backward(u);
            psi.col(c) = u.cwiseProduct(pe);
            VecC w = phi.col(c).cwiseProduct(hv);
            fft.forward(w);
            w.array() *= fe.array();
            fft.backward(w);
            phi.col(c) = w.cwiseProduct(hv);
        }
        MatC nw = integrand(psi, phi);
        integ += dt * (cur + nw) / 2.0;
        cur = nw;
        sig += dt;
        if (std::abs(sig - times[next]) < 1e-9) {
            sig = times[next];
            G.push_back(S - I * integ);
            ++next;
        }
    }
    MatC Gm;
    if (free) {
        Gm = S;
    } else {
        auto mean_of = [&](std::size_t end) {
            MatC m = MatC::Zero(k, k);
            for (std::size_t j = end - cfg.cesaro; j < end; ++j) m += G[j];
            return MatC(m / double(cfg.cesaro));
        };
        Gm = mean_of(G.size());
        MatC prev = mean_of(G.size() - 1);
        wb.last_change = (Gm - prev).norm() / Gm.norm();
        wb.converged = wb.last_change <= cfg.tolerance;
    }
    wb.gram = Gm;
    // Gamma(b, a) = <W f_a, f_b>; compress to span(F) and complete with the identity.
    if (free) {
        wb.W = MatC::Identity(n, n);
        wb.Wstar = wb.W;
        return wb;
    }
    MatC Gamma = Gm.transpose();
    MatC Sg = S.transpose();  // Sg(b, a) = <f_a, f_b> = F^H Omega F
    Eigen::PartialPivLU<MatC> slu(Sg);
    MatC FhO = F.adjoint() * g.q.cast<cplx>().asDiagonal();
    MatC SinvFhO = slu.solve(FhO);
    MatC PB = F * SinvFhO;
    wb.W = F * slu.solve(Gamma) * SinvFhO + (MatC::Identity(n, n) - PB);
    wb.Wstar = weighted_adjoint(g, wb.W);
    return wb;
}

SchurValues schur_values(const Grid& g, const std::function<cplx(double, double)>& K) {
    SchurValues s;
    VecR col = VecR::Zero(g.n);
    for (int i = 0; i < g.n; ++i) {
        double row = 0;
        for (int j = 0; j < g.n; ++j) {
            double a = std::abs(K(g.x[i], g.x[j]));
            row += a * g.q[j];
            col[j] += a * g.q[i];
        }
        s.row = std::max(s.row, row);
    }
    s.col = col.maxCoeff();
    return s;
}

LpProbe lp_norm_probe(const Grid& g, const MatC& W, double p, const WeightSpec& w, int family_size,
                      std::uint64_t seed) {
    if (!(p >= 1)) throw ConfigError("p must lie in [1, inf]");
    const int n = g.n;
    LpProbe out;
    // Schur bound for the weighted absolute kernel.
    VecR wv = w.on(g);
    const bool pinf = std::isinf(p);
    VecR wp(n);
    for (int i = 0; i < n; ++i) wp[i] = pinf ? 1.0 : std::pow(wv[i], 1.0 / p);
    VecR colsum = VecR::Zero(n), rowsum = VecR::Zero(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double k = wp[i] * std::abs(W(i, j)) / g.q[j] / wp[j];
            rowsum[i] += k * g.q[j];
            colsum[j] += k * g.q[i];
        }
    out.schur_1 = colsum.maxCoeff();
    out.schur_inf = rowsum.maxCoeff();
    out.upper = pinf ? out.schur_inf : std::pow(out.schur_1, 1.0 / p) * std::pow(out.schur_inf, 1.0 - 1.0 / p);

    std::mt19937_64 rng(seed);
    auto unif = [&](double a, double b) { return a + (b - a) * ((rng() >> 11) * 0x1.0p-53); };
    std::vector<std::pair<std::string, VecC>> fam;
    const int per = std::max(1, family_size / 3);
    for (int k = 0; k < per; ++k) {
        VecC f = VecC::Zero(n);
        for (int t = 0; t < 3; ++t) {
            double c = unif(-g.L / 2, g.L / 2), s = unif(0.5, 3.0), a = unif(-1, 1);
            for (int i = 0; i < n; ++i) f[i] += a * std::exp(-std::pow((g.x[i] - c) / s, 2) / 2);
        }
        fam.push_back({"smooth", f});
    }
    if (g.L >= 16) {
        for (int k = 0; k < per; ++k) {
            double r = std::exp(unif(std::log(2.0), std::log(g.L / 8)));
            double x0 = unif(-(g.L - r) / 2, (g.L - r) / 2);
            fam.push_back({"atom", make_atom(g, x0, r, rng()).values.cast<cplx>()});
        }
    }
    for (double R = 1; R <= g.L / 2 && int(fam.size()) < 3 * per + 8; R *= 2)
        fam.push_back({"indicator", indicator(g, -R, R).cast<cplx>()});
    const std::size_t base = fam.size();
    for (std::size_t k = 0; k < base; ++k) fam.push_back({fam[k].first + "_reflected", reflect(fam[k].second)});
    for (auto& [label, f] : fam) {
        double den = std::max(lp_norm(g, f, p, w), lp_norm(g, reflect(f), p, w));
        if (!(den > 0)) continue;
        double r = lp_norm(g, W * f, p, w) / den;
        out.ratios.push_back(r);
        out.labels.push_back(label);
        out.lower = std::max(out.lower, r);
    }
    return out;
}

}  // namespace bihar
