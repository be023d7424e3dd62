#include "bihar/birman_schwinger.hpp"

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "bihar/numerics.hpp"

namespace bihar {

namespace {

// F_+(s) - (i - 1) + (1 + i) s^2 / 2 = O(s^3); series for small s avoids the cancellation.
cplx f_reg(double s) {
    if (s < 0.5) {
        cplx acc = 0, ik = 1.0;  // i^k
        double sk = 1, fact = 1;
        for (int k = 1; k < 30; ++k) {
            ik *= I;
            sk *= s;
            fact *= k;
            if (k < 3) continue;
            acc += (I * ik - ((k % 2) ? -1.0 : 1.0)) * (sk / fact);
        }
        return acc;
    }
    return f_pm(s, Branch::plus) - (I - 1.0) + (1.0 + I) * s * s / 2.0;
}

MatC plus_matrix(const VUFactorization& vu, double lambda) {
    const int m = vu.size();
    MatC M(m, m);
    const double c = 1.0 / (4 * lambda * lambda * lambda);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            M(i, j) = vu.D[i] * f_pm(lambda * std::abs(vu.X[i] - vu.X[j]), Branch::plus) * c * vu.D[j];
    for (int i = 0; i < m; ++i) M(i, i) += vu.U[i];
    return M;
}

}  // namespace

VUFactorization VUFactorization::from(const SampledFunction& V) {
    const Grid& g = V.grid;
    VUFactorization f;
    f.grid = g;
    if (V.values.imag().cwiseAbs().maxCoeff() > 0) throw ConfigError("the potential must be real");
    VecR Vr = V.values.real();
    f.v = Vr.cwiseAbs().cwiseSqrt();
    double vmax = f.v.maxCoeff();
    if (vmax == 0) return f;
    for (int i = 0; i < g.n; ++i)
        if (f.v[i] > 1e-12 * vmax) f.idx.push_back(i);
    const int m = f.size();
    f.U.resize(m);
    f.D.resize(m);
    f.X.resize(m);
    for (int k = 0; k < m; ++k) {
        int i = f.idx[k];
        f.U[k] = Vr[i] >= 0 ? 1.0 : -1.0;
        f.D[k] = f.v[i] * std::sqrt(g.q[i]);
        f.X[k] = g.x[i];
    }
    return f;
}

MOperator build_M(const VUFactorization& vu, double lambda, Branch b) {
    if (!(lambda > 0)) throw DomainError("spectral parameter must be positive");
    if (vu.size() == 0) throw DomainError("M(lambda) is undefined for V = 0");
    MOperator m;
    m.lambda = lambda;
    m.branch = b;
    m.vu = vu;
    m.M = plus_matrix(vu, lambda);
    if (b == Branch::minus) m.M = m.M.conjugate().eval();
    Eigen::PartialPivLU<MatC> lu(m.M);
    double rc = lu.rcond();
    m.cond = rc > 0 ? 1.0 / rc : INF;
    return m;
}

MOperator build_M(const SampledFunction& V, double lambda, Branch b) {
    return build_M(VUFactorization::from(V), lambda, b);
}

MInverse::MInverse(const VUFactorization& vu, double lambda, Branch b)
    : lambda_(lambda), branch_(b), m_(vu.size()) {
    if (!(lambda > 0)) throw DomainError("spectral parameter must be positive");
    if (m_ == 0) throw DomainError("M(lambda) is undefined for V = 0");
    const double l3 = lambda * lambda * lambda;
    MatC A(m_, m_);
    for (int j = 0; j < m_; ++j)
        for (int i = 0; i < m_; ++i)
            A(i, j) = vu.D[i] * f_reg(lambda * std::abs(vu.X[i] - vu.X[j])) / (4 * l3) * vu.D[j];
    for (int i = 0; i < m_; ++i) A(i, i) += vu.U[i];
    lu_.compute(A);
    if (!(lu_.rcond() >= 1e-13)) {
        woodbury_ = false;
        lu_.compute(plus_matrix(vu, lambda));
        if (!(lu_.rcond() > 1e-15)) throw SingularError("M(lambda) is numerically singular", lambda);
        return;
    }
    B_.resize(m_, 3);
    for (int i = 0; i < m_; ++i) {
        B_(i, 0) = vu.D[i];
        B_(i, 1) = vu.D[i] * vu.X[i];
        B_(i, 2) = vu.D[i] * vu.X[i] * vu.X[i];
    }
    const cplx a = (I - 1.0) / (4 * l3), bb = -(1.0 + I) / (8 * lambda), e = (1.0 + I) / (4 * lambda);
    Eigen::Matrix3cd C;
    C << a, 0, bb, 0, e, 0, bb, 0, 0;
    AiB_ = lu_.solve(B_);
    AtiB_ = lu_.transpose().solve(B_);
    Eigen::Matrix3cd K = C.inverse() + B_.transpose() * AiB_;
    Eigen::FullPivLU<Eigen::Matrix3cd> klu(K);
    if (!klu.isInvertible()) throw SingularError("M(lambda) is numerically singular", lambda);
    S_ = klu.inverse();
}

VecC MInverse::apply(const VecC& y0) const {
    const bool minus = branch_ == Branch::minus;
    VecC y = minus ? VecC(y0.conjugate()) : y0;
    VecC r = lu_.solve(y);
    if (woodbury_) r -= AiB_ * (S_ * (AtiB_.transpose() * y));
    return minus ? VecC(r.conjugate()) : r;
}

VecC MInverse::apply_adjoint(const VecC& y0) const {
    const bool minus = branch_ == Branch::minus;
    VecC y = minus ? VecC(y0.conjugate()) : y0;
    VecC r = lu_.adjoint().solve(y);
    if (woodbury_) r -= AtiB_.conjugate() * (S_.adjoint() * (AiB_.adjoint() * y));
    return minus ? VecC(r.conjugate()) : r;
}

MatC MInverse::dense() const {
    MatC X = lu_.inverse();
    if (woodbury_) X -= AiB_ * S_ * AtiB_.transpose();
    if (branch_ == Branch::minus) X = X.conjugate().eval();
    return X;
}

double MInverse::norm() const {
    return power_norm(
        m_, [this](const VecC& y) { return apply(y); }, [this](const VecC& y) { return apply_adjoint(y); });
}

double MInverse::smallest_singular() const { return 1.0 / norm(); }

double MInverse::residual(const MatC& M) const {
    MatC E = M * dense() - MatC::Identity(m_, m_);
    return E.norm() / std::sqrt(double(m_));
}

MatC invert_M(const MOperator& m) {
    MInverse inv(m.vu, m.lambda, m.branch);
    MatC X = inv.dense();
    double res = (m.M * X - MatC::Identity(m.M.rows(), m.M.cols())).norm() / std::sqrt(double(m.M.rows()));
    if (!std::isfinite(res) || !std::isfinite(m.cond) || res > 1e-8 * m.cond)
        throw SingularError("M(lambda) inversion failed the residual check", m.lambda);
    return X;
}

ComplexKernel perturbed_resolvent_times_V(const SampledFunction& V, double lambda, Branch b) {
    const Grid& g = V.grid;
    VUFactorization vu = VUFactorization::from(V);
    ComplexKernel K{g, g, MatC::Zero(g.n, g.n)};
    if (vu.size() == 0) return K;
    const int m = vu.size();
    MatC Mi = MInverse(vu, lambda, b).dense();
    MatC R(g.n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < g.n; ++i) R(i, j) = free_resolvent_value(lambda, b, g.x[i] - vu.X[j]) * vu.D[j];
    MatC KD = R * Mi * vu.D.cast<cplx>().asDiagonal();
    for (int j = 0; j < m; ++j) K.K.col(vu.idx[j]) = KD.col(j) / g.q[vu.idx[j]];
    return K;
}

VecC apply_perturbed_resolvent(const SampledFunction& V, double lambda, const VecC& f, Branch b) {
    const Grid& g = V.grid;
    VecC r0 = apply_free_resolvent(lambda, b, g, f);
    VUFactorization vu = VUFactorization::from(V);
    if (vu.size() == 0) return r0;
    const int m = vu.size();
    VecC y(m);
    for (int k = 0; k < m; ++k) y[k] = vu.D[k] * r0[vu.idx[k]];
    VecC z = MInverse(vu, lambda, b).apply(y);
    // Back to a function on the grid: the coefficient of node u is D_u z_u / q_u under quadrature.
    VecC fz = VecC::Zero(g.n);
    for (int k = 0; k < m; ++k) fz[vu.idx[k]] = vu.D[k] * z[k] / g.q[vu.idx[k]];
    return r0 - apply_free_resolvent(lambda, b, g, fz);
}

ProjectionSet build_projections(const SampledFunction& V, double rank_tol) {
    VUFactorization vu = VUFactorization::from(V);
    const int m = vu.size();
    if (m == 0) throw DomainError("projections are undefined for V = 0");
    if (m < 4) throw ConfigError("too few support nodes for the projection family");
    ProjectionSet ps;
    ps.D = vu.D;
    ps.X = vu.X;
    MatR E(m, 3);
    E.col(0) = vu.D;
    E.col(1) = vu.D.cwiseProduct(vu.X);
    E.col(2) = vu.D.cwiseProduct(vu.X).cwiseProduct(vu.X);
    Eigen::HouseholderQR<MatR> qr(E);
    MatR R = qr.matrixQR().topRows(3).triangularView<Eigen::Upper>();
    for (int k = 0; k < 3; ++k)
        if (std::abs(R(k, k)) <= 1e-10 * E.col(k).norm())
            throw NumericalError("v, xv, x^2 v are numerically dependent");
    MatR Q = qr.householderQ() * MatR::Identity(m, m);
    const MatR Id = MatR::Identity(m, m);
    MatR Pi1 = Q.col(0) * Q.col(0).transpose();
    MatR Pi2 = Q.leftCols(2) * Q.leftCols(2).transpose();
    ps.P = Pi1;
    ps.Q1 = Id - Pi1;
    ps.Q2 = Id - Pi2;
    ps.rank_Q2 = m - 2;
    ps.T0 = MatR(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            double r = std::abs(vu.X[i] - vu.X[j]);
            ps.T0(i, j) = vu.D[i] * r * r * r / 12.0 * vu.D[j];
        }
    ps.T0 += vu.U.asDiagonal();
    auto null_projector = [&](const MatR& Pi, const MatR& N, int& rank) {
        MatR A = (Id - Pi) * ps.T0 * N;
        Eigen::BDCSVD<MatR> svd(A, Eigen::ComputeFullV);
        const VecR& s = svd.singularValues();
        double smax = s.size() ? s[0] : 0.0;
        int k = 0;
        for (int i = 0; i < s.size(); ++i)
            if (s[i] <= rank_tol * smax) ++k;
        k += int(N.cols() - s.size());
        rank = k;
        if (k == 0) return MatR(MatR::Zero(m, m));
        MatR Z = N * svd.matrixV().rightCols(k);
        // Re-orthonormalize to keep the projector idempotent to rounding.
        Eigen::HouseholderQR<MatR> zq(Z);
        MatR Zo = zq.householderQ() * MatR::Identity(m, k);
        return MatR(Zo * Zo.transpose());
    };
    ps.Q20 = null_projector(Pi2, Q.rightCols(m - 2), ps.rank_Q20);
    ps.Q3 = null_projector(Pi1, Q.rightCols(m - 3), ps.rank_Q3);
    return ps;
}

SingularityProbe bs_singularity_probe(double L, const std::vector<int>& ns, double lambda,
                                      const std::function<double(double)>& V) {
    SingularityProbe p;
    std::vector<double> hs;
    for (int n : ns) {
        Grid g = make_grid(L, n);
        SampledFunction Vf = SampledFunction::real(g, V);
        VUFactorization vu = VUFactorization::from(Vf);
        MatC M = plus_matrix(vu, lambda);
        double mn = power_norm(
            vu.size(), [&](const VecC& y) -> VecC { return M * y; }, [&](const VecC& y) -> VecC { return M.adjoint() * y; });
        double smin = MInverse(vu, lambda).smallest_singular();
        p.n.push_back(n);
        p.sigma_min.push_back(smin / mn);
        hs.push_back(g.h);
    }
    if (ns.size() >= 2) p.order = loglog_fit(hs, p.sigma_min).slope;
    p.flagged = ns.size() >= 2 && p.order >= 1.5 && p.sigma_min.back() < 1e-2;
    return p;
}

CancellationResult cancellation_exponent(const SampledFunction& V, int alpha, std::vector<double> lambdas) {
    if (alpha < 1 || alpha > 3) throw ConfigError("alpha must be 1, 2 or 3");
    if (lambdas.empty()) lambdas = geomspace(1e-3, 1e-1, 12);
    ProjectionSet ps = build_projections(V);
    const MatR& Q = alpha == 1 ? ps.Q1 : alpha == 2 ? ps.Q2 : ps.Q3;
    if (alpha == 3 && ps.rank_Q3 == 0) throw DomainError("Q3 is trivial for this potential");
    // G(z) = int F_+(|z - u|) g(u) du = int_0^inf F_+(t) (g(z - t) + g(z + t)) dt, g off-centre Gaussian;
    // R_0^+(lambda^4) [lambda g(lambda .)](x) = G(lambda x) / (4 lambda^3).
    auto g = [](double u) { return std::exp(-(u - 1) * (u - 1) / 2); };
    std::vector<double> tn, tw;
    for (int p = 0; p < 16; ++p) {
        QuadRule q = gauss_legendre(32, p, p + 1.0);
        tn.insert(tn.end(), q.x.begin(), q.x.end());
        tw.insert(tw.end(), q.w.begin(), q.w.end());
    }
    auto G = [&](double z) {
        cplx s = 0;
        for (std::size_t k = 0; k < tn.size(); ++k) s += tw[k] * f_pm(tn[k], Branch::plus) * (g(z - tn[k]) + g(z + tn[k]));
        return s;
    };
    CancellationResult out;
    out.lambdas = lambdas;
    const int m = int(ps.D.size());
    for (double lam : lambdas) {
        VecC y(m);
        for (int k = 0; k < m; ++k) y[k] = ps.D[k] * G(lam * ps.X[k]);
        out.norms.push_back((Q.cast<cplx>() * y).norm() / (4 * lam * lam * lam));
    }
    out.exponent = loglog_fit(out.lambdas, out.norms).slope;
    return out;
}

const MatC& ExpansionFit::block(int power) const {
    for (std::size_t k = 0; k < powers.size(); ++k)
        if (powers[k] == power) return blocks[k];
    throw ConfigError("power not present in the expansion fit");
}

ExpansionFit fit_inverse_expansion(const SampledFunction& V, ResonanceKind kind, std::vector<double> lambdas,
                                   double lambda0) {
    if (!(lambda0 > 0)) throw ConfigError("lambda0 must be positive");
    if (lambdas.empty()) lambdas = geomspace(1e-3, lambda0, 12);
    for (double l : lambdas)
        if (!(l > 0 && l <= lambda0 * (1 + 1e-12))) throw ConfigError("expansion sweep must lie in (0, lambda0]");
    ExpansionFit fit;
    fit.kind = kind;
    fit.lambdas = lambdas;
    int lo = 0;
    switch (kind) {
        case ResonanceKind::Regular: lo = 0; break;
        case ResonanceKind::FirstKind: lo = -1; break;
        case ResonanceKind::SecondKind: lo = -3; break;
        case ResonanceKind::ZeroEigenvalue: throw ConfigError("no expansion template for a zero eigenvalue");
    }
    for (int p = lo; p <= 4; ++p) fit.powers.push_back(p);
    const int K = int(lambdas.size()), P = int(fit.powers.size());
    if (K < P + 2) throw ConfigError("too few lambda samples for the expansion template");
    VUFactorization vu = VUFactorization::from(V);
    const int m = vu.size();
    if (m == 0) throw DomainError("expansion is undefined for V = 0");
    MatC Y(K, m * m);
    for (int k = 0; k < K; ++k) {
        MatC Mi = MInverse(vu, lambdas[k]).dense();
        Y.row(k) = Eigen::Map<const Eigen::RowVectorXcd>(Mi.data(), m * m);
    }
    // Columns (lambda/lambda0)^p keep the design matrix well scaled.
    MatR Phi(K, P);
    for (int k = 0; k < K; ++k)
        for (int p = 0; p < P; ++p) Phi(k, p) = std::pow(lambdas[k] / lambda0, fit.powers[p]);
    Eigen::ColPivHouseholderQR<MatR> qr(Phi);
    MatC Cf = qr.solve(MatR::Identity(K, K)).cast<cplx>() * Y;
    MatC Res = Phi.cast<cplx>() * Cf - Y;
    for (int k = 0; k < K; ++k) {
        fit.residual.push_back(Res.row(k).norm() / Y.row(k).norm());
        fit.max_residual = std::max(fit.max_residual, fit.residual.back());
    }
    fit.residual_dominated = fit.max_residual > 1e-3;
    for (int p = 0; p < P; ++p) {
        MatC Bk(m, m);
        Eigen::Map<MatC>(Bk.data(), m, m) = Eigen::Map<const MatC>(Cf.row(p).eval().data(), m, m);
        fit.blocks.push_back(Bk / std::pow(lambda0, fit.powers[p]));
    }
    ProjectionSet ps = build_projections(V);
    const MatR& Q = kind == ResonanceKind::Regular ? ps.Q2 : kind == ResonanceKind::FirstKind ? ps.Q20 : ps.Q3;
    const MatC& lead = fit.blocks[0];
    MatC IQ = (MatR::Identity(m, m) - Q).cast<cplx>();
    fit.leakage = (IQ * lead * IQ).norm() / lead.norm();
    VecC vh = (vu.D / vu.D.norm()).cast<cplx>();
    if (kind == ResonanceKind::Regular) fit.pv = vh.transpose() * fit.block(3) * vh;
    fit.pv_expected = -2.0 * (1.0 + I) / vu.l1();
    return fit;
}

cplx d_star_from_fit(const ExpansionFit& fit, const ProjectionSet& ps) {
    if (fit.kind != ResonanceKind::SecondKind) throw ConfigError("D* needs a second-kind expansion");
    VecC xD = ps.D.cwiseProduct(ps.X).cast<cplx>();
    VecC x3D = ps.D.cwiseProduct(ps.X.array().cube().matrix()).cast<cplx>();
    MatC Q1 = ps.Q1.cast<cplx>(), Q3 = ps.Q3.cast<cplx>();
    cplx t1 = x3D.transpose() * Q3 * fit.block(-1) * Q1 * xD;
    cplx t2 = x3D.transpose() * Q3 * fit.block(-3) * Q3 * x3D;
    return 6.0 * t1 - t2;
}

}  // namespace bihar
