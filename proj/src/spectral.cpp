#include "bihar/spectral.hpp"

#include <cmath>

#include <lapacke.h>

#include <Eigen/SVD>

#include "bihar/birman_schwinger.hpp"
#include "bihar/numerics.hpp"

namespace bihar {

MatR DiscreteHamiltonian::dense() const {
    const int n = grid.n;
    const double c = 1.0 / std::pow(grid.h, 4);
    MatR H = MatR::Zero(n, n);
    const double st[5] = {1, -4, 6, -4, 1};
    for (int i = 0; i < n; ++i) {
        for (int o = -2; o <= 2; ++o) {
            int j = i + o;
            if (bc == BoundaryCondition::periodic) j = (j + n) % n;
            else if (j < 0 || j >= n) continue;
            H(i, j) += st[o + 2] * c;
        }
        H(i, i) += V[i];
    }
    if (bc == BoundaryCondition::clamped) {
        H(0, 0) += c;
        H(n - 1, n - 1) += c;
    }
    return H;
}

VecC DiscreteHamiltonian::apply(const VecC& u) const {
    const int n = grid.n;
    const double c = 1.0 / std::pow(grid.h, 4);
    const double st[5] = {1, -4, 6, -4, 1};
    VecC out(n);
    for (int i = 0; i < n; ++i) {
        cplx s = V[i] * u[i];
        for (int o = -2; o <= 2; ++o) {
            int j = i + o;
            if (bc == BoundaryCondition::periodic) j = (j + n) % n;
            else if (j < 0 || j >= n) continue;
            s += st[o + 2] * c * u[j];
        }
        out[i] = s;
    }
    if (bc == BoundaryCondition::clamped) {
        out[0] += c * u[0];
        out[n - 1] += c * u[n - 1];
    }
    return out;
}

double DiscreteHamiltonian::norm_bound() const { return 16.0 / std::pow(grid.h, 4) + V.cwiseAbs().maxCoeff(); }

DiscreteHamiltonian build_hamiltonian(const SampledFunction& V, BoundaryCondition bc) {
    const Grid& g = V.grid;
    double imag = V.values.imag().cwiseAbs().maxCoeff();
    if (imag > 0) throw ConfigError("the potential must be real");
    DiscreteHamiltonian H{g, V.values.real(), bc};
    if (H.V.cwiseAbs().maxCoeff() * std::pow(g.h, 4) >= 6)
        throw ConfigError("grid too coarse for this potential: max|V| h^4 must stay below 6");
    return H;
}

namespace {

void finish(SpectralData& sd, const SpectralOptions& opt, double vmax) {
    const Grid& g = sd.grid;
    sd.eps_bound = opt.eps_bound ? *opt.eps_bound : 1e-6 * std::max(1.0, vmax);
    const int k = int(sd.eigenvalues.size());
    sd.localization.resize(k);
    for (int j = 0; j < k; ++j) {
        double in = 0, tot = 0;
        for (int i = 0; i < g.n; ++i) {
            double m = sd.eigenvectors(i, j) * sd.eigenvectors(i, j);
            tot += m;
            if (std::abs(g.x[i]) <= g.L / 2) in += m;
        }
        sd.localization[j] = in / tot;
        if (sd.localization[j] < opt.localization) continue;
        if (sd.eigenvalues[j] < -sd.eps_bound) sd.bound.push_back(j);
        else if (sd.eigenvalues[j] > sd.eps_bound) sd.embedded.push_back(j);
    }
}

}  // namespace

SpectralData eigendecompose(const DiscreteHamiltonian& H, const SpectralOptions& opt) {
    const int n = H.grid.n;
    SpectralData sd;
    sd.grid = H.grid;
    if (!opt.window) {
        MatR A = H.dense();
        VecR w(n);
        int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, A.data(), n, w.data());
        if (info != 0) throw NumericalError("symmetric eigensolver failed, info = " + std::to_string(info));
        sd.eigenvalues = w;
        sd.eigenvectors = std::move(A);
    } else {
        if (H.bc != BoundaryCondition::clamped) throw ConfigError("windowed eigensolver needs the clamped boundary");
        const double c = 1.0 / std::pow(H.grid.h, 4);
        // Lower band storage: row 0 diagonal, row 1 first subdiagonal, row 2 second subdiagonal.
        MatR ab = MatR::Zero(3, n);
        for (int i = 0; i < n; ++i) {
            ab(0, i) = 6 * c + H.V[i];
            if (i + 1 < n) ab(1, i) = -4 * c;
            if (i + 2 < n) ab(2, i) = c;
        }
        ab(0, 0) += c;
        ab(0, n - 1) += c;
        MatR q(n, n), z(n, n);
        VecR w(n);
        std::vector<lapack_int> ifail(n);
        lapack_int m = 0;
        int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, 2, ab.data(), 3, q.data(), n, opt.window->first,
                                  opt.window->second, 0, 0, 2 * LAPACKE_dlamch('S'), &m, w.data(), z.data(), n,
                                  ifail.data());
        if (info != 0) throw NumericalError("banded eigensolver failed, info = " + std::to_string(info));
        sd.eigenvalues = w.head(m);
        sd.eigenvectors = z.leftCols(m);
        sd.partial = true;
    }
    finish(sd, opt, H.V.cwiseAbs().maxCoeff());
    return sd;
}

MatR ac_projector_matrix(const SpectralData& sd) {
    const int n = sd.grid.n;
    MatR P = MatR::Identity(n, n);
    auto remove = [&](int j) {
        const auto v = sd.eigenvectors.col(j);
        P.noalias() -= v * v.transpose();
    };
    for (int j : sd.bound) remove(j);
    for (int j : sd.embedded) remove(j);
    return P;
}

ComplexKernel ac_projector(const SpectralData& sd) {
    const Grid& g = sd.grid;
    MatR P = ac_projector_matrix(sd);
    ComplexKernel K{g, g, MatC(g.n, g.n)};
    K.K = (P * g.q.cwiseInverse().asDiagonal()).cast<cplx>();
    return K;
}

std::string to_string(ResonanceKind k) {
    switch (k) {
        case ResonanceKind::Regular: return "Regular";
        case ResonanceKind::FirstKind: return "FirstKind";
        case ResonanceKind::SecondKind: return "SecondKind";
        case ResonanceKind::ZeroEigenvalue: return "ZeroEigenvalue";
    }
    return "Unknown";
}

ResonanceKind kind_from_exponent(double e) {
    if (e > -0.5) return ResonanceKind::Regular;
    if (e > -2.0) return ResonanceKind::FirstKind;
    if (e > -3.5) return ResonanceKind::SecondKind;
    return ResonanceKind::ZeroEigenvalue;
}

BirmanExponent birman_exponent(const SampledFunction& V, std::vector<double> lambdas) {
    if (lambdas.empty()) lambdas = geomspace(1e-3, 1e-1, 12);
    for (double l : lambdas)
        if (!(l > 0)) throw DomainError("spectral parameter must be positive");
    BirmanExponent out;
    out.lambdas = lambdas;
    VUFactorization vu = VUFactorization::from(V);
    if (vu.size() == 0) {
        // M is undefined for V = 0; the free resolvent localized to [-1, 1] carries the same blow-up.
        out.free_fallback = true;
        const Grid& g = V.grid;
        VecR chi = indicator(g, -1, 1);
        std::vector<int> idx;
        for (int i = 0; i < g.n; ++i)
            if (chi[i] > 0) idx.push_back(i);
        const int m = int(idx.size());
        for (double lam : lambdas) {
            MatC K(m, m);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    double wa = std::sqrt(chi[idx[a]] * g.q[idx[a]]), wb = std::sqrt(chi[idx[b]] * g.q[idx[b]]);
                    K(a, b) = wa * free_resolvent_value(lam, Branch::plus, g.x[idx[a]] - g.x[idx[b]]) * wb;
                }
            out.norms.push_back(power_norm(
                m, [&](const VecC& y) -> VecC { return K * y; }, [&](const VecC& y) -> VecC { return K.adjoint() * y; }));
        }
    } else {
        for (double lam : lambdas) out.norms.push_back(MInverse(vu, lam).norm());
    }
    LineFit f = loglog_fit(out.lambdas, out.norms);
    out.exponent = f.slope;
    out.stderr_slope = f.stderr_slope;
    out.kind = kind_from_exponent(f.slope);
    return out;
}

MatR connection_matrix(const SampledFunction& Vf) {
    const Grid& g = Vf.grid;
    VecR V = Vf.values.real();
    int a = -1, b = -1;
    for (int i = 0; i < g.n; ++i)
        if (V[i] != 0) {
            if (a < 0) a = i;
            b = i;
        }
    if (a < 0) return MatR::Identity(4, 4);
    MatR C(4, 4);
    for (int k = 0; k < 4; ++k) {
        double x = g.x[a];
        double st[4] = {std::pow(x, k), k >= 1 ? k * std::pow(x, k - 1) : 0.0,
                        k >= 2 ? k * (k - 1) * std::pow(x, k - 2) : 0.0, k >= 3 ? 6.0 : 0.0};
        for (int j = a; j <= b; ++j) {
            st[3] -= g.q[j] * V[j] * st[0];
            if (j == b) break;
            double d = g.x[j + 1] - g.x[j];
            double p0 = st[0] + st[1] * d + st[2] * d * d / 2 + st[3] * d * d * d / 6;
            double p1 = st[1] + st[2] * d + st[3] * d * d / 2;
            double p2 = st[2] + st[3] * d;
            st[0] = p0;
            st[1] = p1;
            st[2] = p2;
        }
        x = g.x[b];
        double b3 = st[3] / 6;
        double b2 = (st[2] - 6 * b3 * x) / 2;
        double b1 = st[1] - 2 * b2 * x - 3 * b3 * x * x;
        double b0 = st[0] - b1 * x - b2 * x * x - b3 * x * x * x;
        C(0, k) = b0;
        C(1, k) = b1;
        C(2, k) = b2;
        C(3, k) = b3;
    }
    return C;
}

ResonanceClass classify_zero_energy(const SampledFunction& V, double rank_tol) {
    const Grid& g = V.grid;
    ResonanceClass rc;
    for (int i = 0; i < g.n; ++i)
        if (V.values[i] != cplx(0)) rc.support_radius = std::max(rc.support_radius, std::abs(g.x[i]));
    if (rc.support_radius >= g.L / 2) {
        rc.method = "birman_exponent";
        rc.exponent = birman_exponent(V);
        rc.kind = rc.exponent->kind;
        return rc;
    }
    rc.method = "shooting";
    MatR C = connection_matrix(V);
    rc.connection = C;
    Eigen::JacobiSVD<MatR> svd(C);
    double smax = svd.singularValues()[0];
    rc.bounded_residual = C.col(0).tail(3).norm() / smax;
    Eigen::JacobiSVD<MatR> svd2(C.block(2, 0, 2, 2));
    rc.linear_sigma_min = svd2.singularValues()[1] / smax;
    if (rc.bounded_residual <= rank_tol) rc.kind = ResonanceKind::SecondKind;
    else if (rc.linear_sigma_min <= rank_tol) rc.kind = ResonanceKind::FirstKind;
    else rc.kind = ResonanceKind::Regular;
    return rc;
}

}  // namespace bihar
