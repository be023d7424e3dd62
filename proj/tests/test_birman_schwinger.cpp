#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bihar/birman_schwinger.hpp"
#include "bihar/numerics.hpp"
#include "bihar/potentials.hpp"

using namespace bihar;

namespace {

SampledFunction bump(const Grid& g, double amp = 1.0) { return sample_potential(PotentialSpec::bump(amp, 2.0), g); }

// Changes sign inside its support, so U is not the identity.
SampledFunction mixed(const Grid& g) {
    return SampledFunction::real(g, [](double x) { return std::sin(2 * x) * bump_profile(x, 1.0, 2.0); });
}

double interior_rel_error(const Grid& g, const VecC& lhs, const VecC& f) {
    double num = 0, den = 0;
    for (int i = 2; i < g.n - 2; ++i) {
        num += std::norm(lhs[i] - f[i]) * g.q[i];
        den += std::norm(f[i]) * g.q[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("v U factorization") {
    Grid g = make_grid(10, 256);
    SampledFunction V = mixed(g);
    VUFactorization vu = VUFactorization::from(V);
    REQUIRE(vu.size() > 0);
    bool negative = false;
    for (int k = 0; k < vu.size(); ++k) {
        int i = vu.idx[k];
        CHECK(vu.v[i] >= 0);
        CHECK(std::abs(vu.U[k]) == 1.0);
        CHECK(std::abs(vu.v[i] * vu.U[k] * vu.v[i] - V.values[i].real()) <= 1e-12);
        CHECK(std::abs(vu.D[k] - vu.v[i] * std::sqrt(g.q[i])) <= 1e-15);
        negative = negative || vu.U[k] < 0;
    }
    CHECK(negative);
    for (int i = 0; i < g.n; ++i)
        if (std::abs(g.x[i]) > 2) CHECK(vu.v[i] == 0);
    CHECK(std::abs(vu.l1() - lp_norm(V, 1)) <= 1e-12 * vu.l1());
}

TEST_CASE("M(lambda) structure") {
    Grid g = make_grid(10, 256);
    VUFactorization vu = VUFactorization::from(bump(g));
    for (int k = 0; k < vu.size(); ++k) CHECK(vu.U[k] == 1.0);
    MOperator m = build_M(bump(g), 1.0);
    CHECK((m.M - m.M.adjoint()).norm() > 1e-3 * m.M.norm());
    CHECK((m.M - m.M.transpose()).norm() <= 1e-12 * m.M.norm());
    MOperator mm = build_M(bump(g), 1.0, Branch::minus);
    CHECK((mm.M - m.M.conjugate()).norm() <= 1e-12 * m.M.norm());
    CHECK(std::isfinite(m.cond));
    CHECK_THROWS_AS(build_M(bump(g), 0.0), DomainError);
    CHECK_THROWS_AS(build_M(sample_potential(PotentialSpec::zero(), g), 1.0), DomainError);
}

TEST_CASE("||M - U|| grows like lambda^-3") {
    Grid g = make_grid(10, 256);
    SampledFunction V = mixed(g);
    VUFactorization vu = VUFactorization::from(V);
    std::vector<double> lams = geomspace(1e-3, 1e-1, 8), norms;
    for (double l : lams) {
        MatC A = build_M(vu, l).M;
        A.diagonal() -= vu.U.cast<cplx>();
        norms.push_back(Eigen::JacobiSVD<MatC>(A).singularValues()[0]);
    }
    CHECK(std::abs(loglog_fit(lams, norms).slope + 3) <= 0.1);
}

TEST_CASE("inverse of M") {
    Grid g = make_grid(10, 512);
    MOperator m = build_M(bump(g), 1.0);
    MatC X = invert_M(m);
    CHECK((m.M * X - MatC::Identity(X.rows(), X.cols())).norm() / std::sqrt(double(X.rows())) <= 1e-10);
    MInverse inv(m.vu, 1.0);
    CHECK(inv.residual(m.M) <= 1e-10);
    VecC y = VecC::Random(inv.size());
    CHECK((inv.apply(y) - X * y).norm() <= 1e-10 * y.norm());
    CHECK((inv.apply_adjoint(y) - X.adjoint() * y).norm() <= 1e-10 * y.norm());
    CHECK(std::abs(inv.smallest_singular() * inv.norm() - 1) <= 1e-12);
    // small lambda goes through the Woodbury split
    MOperator ms = build_M(m.vu, 1e-3);
    MInverse small(m.vu, 1e-3);
    CHECK(small.woodbury());
    CHECK(small.residual(ms.M) <= 1e-8 * ms.cond);
}

TEST_CASE("M^-1 reduces to U when the resolvent term vanishes") {
    // R_0(lambda^4) is O(lambda^-3), so at large lambda M = U + O(lambda^-3) and U^2 = I.
    Grid g = make_grid(10, 256);
    VUFactorization vu = VUFactorization::from(mixed(g));
    MatC X = invert_M(build_M(vu, 1e4));
    MatC U = vu.U.cast<cplx>().asDiagonal();
    CHECK((X - U).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((U * U - MatC::Identity(vu.size(), vu.size())).norm() == 0);
}

TEST_CASE("embedded eigenvalue makes M(1) nearly singular") {
    SingularityProbe p = bs_singularity_probe(10, {256, 512, 1024}, 1.0, embedded_potential);
    CHECK(p.flagged);
    for (std::size_t k = 1; k < p.sigma_min.size(); ++k) CHECK(p.sigma_min[k] < p.sigma_min[k - 1]);
    SingularityProbe q = bs_singularity_probe(10, {256, 512, 1024}, 1.0, [](double x) { return bump_profile(x, 1, 2); });
    CHECK_FALSE(q.flagged);
}

TEST_CASE("perturbed resolvent") {
    Grid g = make_grid(10, 256);
    SampledFunction tiny = bump(g, 1e-6);
    ComplexKernel K = perturbed_resolvent_times_V(tiny, 1.0);
    ComplexKernel R0 = free_resolvent_kernel({1.0, Branch::plus}, g);
    CHECK(K.K.cwiseAbs().maxCoeff() <= 1e-5 * R0.K.cwiseAbs().maxCoeff());

    SampledFunction V = mixed(g);
    ComplexKernel Kp = perturbed_resolvent_times_V(V, 0.8, Branch::plus);
    ComplexKernel Km = perturbed_resolvent_times_V(V, 0.8, Branch::minus);
    CHECK((Km.K - Kp.K.conjugate()).cwiseAbs().maxCoeff() <= 1e-8 * Kp.K.cwiseAbs().maxCoeff());
    CHECK(perturbed_resolvent_times_V(sample_potential(PotentialSpec::zero(), g), 1.0).K.cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("perturbed resolvent inverts H - lambda^4") {
    Grid g = make_grid(20, 2048);
    SampledFunction f = SampledFunction::real(g, [](double x) { return std::exp(-x * x / 2); });
    SampledFunction V = bump(g);
    for (Branch b : {Branch::plus, Branch::minus}) {
        VecC u = apply_perturbed_resolvent(V, 1.0, f.values, b);
        VecC lhs = fourth_difference(g, u) + V.values.cwiseProduct(u) - u;
        CHECK(interior_rel_error(g, lhs, f.values) <= 1e-2);
    }
    // second resolvent identity R_V V R_0 f = R_0 f - R_V f
    VecC r0f = apply_free_resolvent(1.0, Branch::plus, g, f.values);
    VecC lhs = perturbed_resolvent_times_V(V, 1.0).apply(r0f);
    VecC rhs = r0f - apply_perturbed_resolvent(V, 1.0, f.values);
    CHECK((lhs - rhs).norm() <= 1e-8 * rhs.norm());
}

TEST_CASE("projection family") {
    Grid g = make_grid(10, 512);
    ResonanceProfile ramp;
    ramp.step = 0.5;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (const SampledFunction& V :
         {bump(g), mixed(g), sample_potential(resonance_builder(0, 1), g), sample_potential(resonance_builder(1, 1), g),
          sample_potential(resonance_builder(0, 1, ramp), g)}) {
        ProjectionSet ps = build_projections(V);
        const int m = int(ps.D.size());
        MatR Id = MatR::Identity(m, m);
        CHECK((ps.P + ps.Q1 - Id).cwiseAbs().maxCoeff() <= 1e-12);
        for (const MatR* Q : {&ps.P, &ps.Q1, &ps.Q2, &ps.Q20, &ps.Q3}) {
            CHECK((*Q * *Q - *Q).cwiseAbs().maxCoeff() <= 1e-10);
            CHECK((*Q - Q->transpose()).cwiseAbs().maxCoeff() <= 1e-10);
        }
        VecR v = ps.D, xv = v.cwiseProduct(ps.X), x2v = xv.cwiseProduct(ps.X);
        CHECK((ps.P * v - v).norm() <= 1e-12 * v.norm());
        CHECK((ps.Q1 * v).norm() <= 1e-12 * v.norm());
        CHECK((ps.Q2 * v).norm() <= 1e-10 * v.norm());
        CHECK((ps.Q2 * xv).norm() <= 1e-10 * xv.norm());
        VecR f(m);
        for (int i = 0; i < m; ++i) f[i] = nd(rng);
        CHECK(std::abs(xv.dot(ps.Q2 * f)) <= 1e-10 * xv.norm() * f.norm());
        if (ps.rank_Q3 > 0) CHECK((ps.Q3 * x2v).norm() <= 1e-10 * x2v.norm());
        CHECK(ps.rank_Q3 <= ps.rank_Q20);
        CHECK(ps.rank_Q20 <= ps.rank_Q2);
        CHECK(ps.rank_Q2 == m - 2);
        CHECK(std::abs(ps.Q2.trace() - ps.rank_Q2) <= 1e-8);
    }
    // For V >= 0 the kernel of Q2 T0 Q2 on Q2 L^2 is trivial, so Q20 = Q3 = 0.
    ProjectionSet pb = build_projections(bump(g));
    CHECK(pb.rank_Q20 == 0);
    CHECK(pb.rank_Q3 == 0);
    ProjectionSet ps2 = build_projections(sample_potential(resonance_builder(0, 1), g));
    CHECK(ps2.rank_Q3 >= 1);
    ProjectionSet ps1 = build_projections(sample_potential(resonance_builder(1, 1), g));
    CHECK(ps1.rank_Q20 >= 1);
    CHECK_THROWS_AS(build_projections(sample_potential(PotentialSpec::zero(), g)), DomainError);
}

TEST_CASE("cancellation law") {
    Grid g = make_grid(10, 1024);
    SampledFunction b = bump(g);
    ResonanceProfile ramp;
    ramp.step = 0.5;
    SampledFunction second = sample_potential(resonance_builder(0, 1, ramp), g);
    CHECK(std::abs(cancellation_exponent(b, 1).exponent + 2) <= 0.15);
    CHECK(std::abs(cancellation_exponent(b, 2).exponent + 1) <= 0.15);
    CHECK(std::abs(cancellation_exponent(second, 3).exponent) <= 0.2);
    CHECK_THROWS_AS(cancellation_exponent(b, 3), DomainError);
    CHECK_THROWS_AS(cancellation_exponent(b, 4), ConfigError);
}

TEST_CASE("expansion of M^-1 for a regular potential") {
    Grid g = make_grid(10, 256);
    SampledFunction V = bump(g);
    ExpansionFit fit = fit_inverse_expansion(V, ResonanceKind::Regular);
    CHECK(fit.lambdas.size() == 12);
    CHECK_FALSE(fit.residual_dominated);
    CHECK(fit.leakage <= 0.05);
    CHECK(std::abs(fit.pv - fit.pv_expected) <= 0.1 * std::abs(fit.pv_expected));
    VUFactorization vu = VUFactorization::from(V);
    CHECK(std::abs(fit.pv_expected - (-2.0 * (1.0 + I) / vu.l1())) <= 1e-15);
    CHECK_THROWS_AS(fit.block(-3), ConfigError);
    CHECK_THROWS_AS(fit_inverse_expansion(V, ResonanceKind::ZeroEigenvalue), ConfigError);
}

TEST_CASE("expansion of M^-1 for a second-kind resonance") {
    Grid g = make_grid(10, 256);
    SampledFunction V = sample_potential(resonance_builder(0, 1), g);
    ExpansionFit fit = fit_inverse_expansion(V, ResonanceKind::SecondKind);
    CHECK(fit.powers.front() == -3);
    CHECK(fit.leakage <= 0.05);
    ProjectionSet ps = build_projections(V);
    const MatC& B = fit.block(-3);
    MatC Q3 = ps.Q3.cast<cplx>();
    CHECK((Q3 * B * Q3 - B).norm() <= 0.05 * B.norm());
}
