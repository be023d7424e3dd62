#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bihar/numerics.hpp"
#include "bihar/potentials.hpp"
#include "bihar/propagator.hpp"
#include "bihar/wave_ops.hpp"

using namespace bihar;

namespace {

SampledFunction bump(const Grid& g, double amp = 1.0) { return sample_potential(PotentialSpec::bump(amp, 2.0), g); }

MatC reflection(int n) {
    MatC R = MatC::Zero(n, n);
    for (int i = 0; i < n; ++i) R(i, n - 1 - i) = 1;
    return R;
}

}  // namespace

TEST_CASE("free case gives the identity for both constructions") {
    Grid g = make_grid(10, 256);
    SampledFunction Z = sample_potential(PotentialSpec::zero(), g);
    MatC F = meanzero_family(g, linspace(-4, 4, 9));
    MatC Id = MatC::Identity(g.n, g.n);
    WaveOperatorBundle s = stationary_wave_op(Z);
    WaveOperatorBundle t = time_dependent_wave_op(Z, F);
    CHECK(s.W == Id);
    CHECK(s.Wstar == Id);
    CHECK(t.W == Id);
    CHECK(t.converged);
}

TEST_CASE("stationary wave operator of a regular bump") {
    Grid g = make_grid(10, 512);
    SampledFunction V = bump(g);
    WaveOperatorBundle st = stationary_wave_op(V);
    CHECK(st.method == WaveOperatorBundle::Method::stationary);
    CHECK(st.nodes == st.quad.n_low + st.quad.n_high);
    CHECK((st.Wstar - weighted_adjoint(g, st.W)).cwiseAbs().maxCoeff() <= 1e-10 * st.W.cwiseAbs().maxCoeff());
    MatC F = meanzero_family(g, linspace(-4, 4, 9));
    CHECK(family_defect(g, st.Wstar * st.W, F) <= 5e-2);
    CHECK_FALSE(st.tail_warning);
    MatC Wp = plus_from_minus(st.W);
    CHECK(plus_from_minus(Wp) == st.W);
    CHECK((Wp - st.W.conjugate()).cwiseAbs().maxCoeff() == 0);
    // p = 2 probe of a near-isometry
    LpProbe pr = lp_norm_probe(g, st.W, 2);
    CHECK(pr.lower <= 1 + 5e-2);
    CHECK(pr.lower > 0.5);
    CHECK(pr.lower <= pr.upper);
}

TEST_CASE("wave operator of a small potential") {
    // ||W - I|| is O(eps) for eps V, with a slightly sub-linear rate: the free operator is resonant at
    // zero energy, so the low-energy part of M^-1 is not perturbative.
    Grid g = make_grid(10, 256);
    MatC F = meanzero_family(g, linspace(-4, 4, 9));
    MatC Id = MatC::Identity(g.n, g.n);
    double d7 = family_distance(g, stationary_wave_op(bump(g, 1e-7)).W, Id, F);
    double d6 = family_distance(g, stationary_wave_op(bump(g, 1e-6)).W, Id, F);
    double d5 = family_distance(g, stationary_wave_op(bump(g, 1e-5)).W, Id, F);
    CHECK(d6 > 1e-7);
    CHECK(d6 <= 2e-5);
    double rate = std::log10(d5 / d7) / 2;
    CHECK(rate >= 0.85);
    CHECK(rate <= 1.0);
}

TEST_CASE("time-dependent and stationary constructions agree") {
    Grid g = make_grid(10, 512);
    SampledFunction V = bump(g);
    MatC F = meanzero_family(g, linspace(-4, 4, 9));
    WaveOperatorBundle st = stationary_wave_op(V);
    WaveOperatorBundle td = time_dependent_wave_op(V, F);
    CHECK(td.method == WaveOperatorBundle::Method::time_dependent);
    CHECK(td.converged);
    CHECK(td.times.size() == 17);
    MatC Gs = gram_matrix(g, st.W, F), Gt = gram_matrix(g, td.W, F);
    CHECK((Gs - Gt).norm() / Gs.norm() <= 5e-2);
    CHECK((td.gram.transpose() - Gt).norm() <= 1e-8 * Gt.norm());

    SpectralData sd = eigendecompose(build_hamiltonian(V));
    MatC Uc = sd.eigenvectors.cast<cplx>();
    VecC e(g.n);
    for (int j = 0; j < g.n; ++j) e[j] = std::exp(-sd.eigenvalues[j]);
    MatC hH = Uc * e.asDiagonal() * Uc.transpose() * ac_projector_matrix(sd).cast<cplx>();
    MatC hF = free_multiplier(g, [](double l) { return cplx(std::exp(-l)); });
    CHECK(family_distance(g, hH * st.W, st.W * hF, F) <= 5e-2);
}

TEST_CASE("meanzero family and gram matrix helpers") {
    Grid g = make_grid(20, 512);
    MatC F = meanzero_family(g, linspace(-4, 4, 9));
    CHECK(F.cols() == 9);
    for (int c = 0; c < F.cols(); ++c) CHECK(std::abs(g.q.cast<cplx>().dot(F.col(c))) <= 1e-10 * F.col(c).norm());
    MatC Id = MatC::Identity(g.n, g.n);
    CHECK(family_defect(g, Id, F) == 0);
    MatC G = gram_matrix(g, Id, F);
    CHECK((G - G.adjoint()).norm() <= 1e-12 * G.norm());
}

TEST_CASE("lp probe reference values") {
    Grid g = make_grid(10, 256);
    MatC Id = MatC::Identity(g.n, g.n);
    for (double p : {1.0, 2.0, 3.0, INF}) {
        LpProbe pr = lp_norm_probe(g, Id, p);
        CHECK(std::abs(pr.lower - 1) <= 1e-12);
        CHECK(std::abs(pr.upper - 1) <= 1e-12);
    }
    CHECK_THROWS_AS(lp_norm_probe(g, Id, 0.5), ConfigError);
}

TEST_CASE("lp probe with an even weight sees W and its reflection alike") {
    Grid g = make_grid(20, 256);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    MatC W(g.n, g.n);
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) W(i, j) = (i == j ? 1.0 : 0.0) + 0.01 * cplx(nd(rng), nd(rng));
    MatC R = reflection(g.n);
    for (const WeightSpec& w : {WeightSpec::unit(), WeightSpec::power(0.5), WeightSpec::japanese(0.3)}) {
        LpProbe a = lp_norm_probe(g, W, 2, w), b = lp_norm_probe(g, R * W * R, 2, w);
        CHECK(std::abs(a.lower - b.lower) <= 1e-12 * a.lower);
        CHECK(std::abs(a.upper - b.upper) <= 1e-12 * a.upper);
    }
}

TEST_CASE("Schur values of <|x| - |y|>^-2") {
    // sup_x of int_{-L}^{L} dy / (1 + (|x| - |y|)^2) = 2 (atan|x| + atan(L - |x|)), largest at |x| = L/2
    CZKernelSpec s = CZKernelSpec::schur(2.0);
    auto K = [&](double x, double y) { return s(x, y); };
    const double L = 10, exact = 4 * std::atan(L / 2);
    SchurValues a = schur_values(make_grid(L, 512), K), b = schur_values(make_grid(L, 1024), K);
    CHECK(std::isfinite(a.row));
    CHECK(std::isfinite(a.col));
    CHECK(std::abs(a.row - exact) <= 1e-2);
    CHECK(std::abs(a.col - exact) <= 1e-2);
    CHECK(std::abs(b.row / a.row - 1) <= 1e-2);
    CHECK(std::abs(b.col / a.col - 1) <= 1e-2);
    // the full-line value tends to 2 pi
    SchurValues c = schur_values(make_grid(400, 8192), K);
    CHECK(std::abs(c.row - 2 * PI) <= 2e-2);
}

TEST_CASE("cutoff psi") {
    CHECK(cutoff_psi(0.5) == 0);
    CHECK(cutoff_psi(1.0) == 0);
    CHECK(cutoff_psi(2.0) == 1);
    CHECK(cutoff_psi(7.0) == 1);
    double prev = 0;
    for (double s = 1; s <= 2; s += 0.01) {
        double v = cutoff_psi(s);
        CHECK(v >= prev);
        CHECK(v >= 0);
        CHECK(v <= 1);
        prev = v;
    }
}

TEST_CASE("truncated Hilbert transform of an indicator") {
    Grid g = make_grid(10, 4000);
    SampledFunction f = SampledFunction::real(g, [](double x) { return std::abs(x) <= 1 ? 1.0 : 0.0; });
    VecR at(1);
    at[0] = 5;
    Grid gm = make_grid(1, 2000);
    SampledFunction one = SampledFunction::real(gm, [](double) { return 1.0; });
    VecC v = cz_apply_at(CZKernelSpec::hilbert(2.0), one, at);
    CHECK(std::abs(v[0] - std::log(1.5)) <= 1e-3);
    VecC w = cz_apply_at(CZKernelSpec::hilbert(2.0), f, at);
    CHECK(std::abs(w[0] - std::log(1.5)) <= 1e-2);
    CHECK_THROWS_AS(CZKernelSpec::hilbert(0.0).validate(), ConfigError);
}

TEST_CASE("k1- vanishes near the anti-diagonals") {
    Grid g = make_grid(5, 200);
    ComplexKernel K = cz_kernel_matrix(CZKernelSpec::k1(Branch::minus), g);
    int zeros = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (std::abs(std::abs(g.x[i]) - std::abs(g.x[j])) <= 1) {
                CHECK(K.K(i, j) == cplx(0));
                ++zeros;
            }
    CHECK(zeros > 0);
}

TEST_CASE("T_{k1~} is skew-adjoint") {
    Grid g = make_grid(8, 300);
    CZKernelSpec s;
    s.kind = CZKernelSpec::Kind::k1_tilde;
    MatC K = cz_kernel_matrix(s, g).K;
    CHECK((K.adjoint() + K).cwiseAbs().maxCoeff() <= 1e-10 * K.cwiseAbs().maxCoeff());
}

TEST_CASE("chi+- decomposition equals direct quadrature") {
    Grid g = make_grid(8, 200);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    SampledFunction f(g, VecC(g.n));
    for (int i = 0; i < g.n; ++i) f.values[i] = cplx(u(rng), u(rng));
    for (const CZKernelSpec& s :
         {CZKernelSpec::k1(Branch::plus), CZKernelSpec::k1(Branch::minus), CZKernelSpec::k2(Branch::plus),
          CZKernelSpec::k2(Branch::minus), CZKernelSpec::g_kernel(1, Branch::minus, 0.4, I),
          CZKernelSpec::g_kernel(2, Branch::plus, 1.0, -1.0), CZKernelSpec::g_kernel(3, Branch::minus, 2.0, -2.0 * I),
          CZKernelSpec::g_kernel(4, Branch::plus, I, -I), CZKernelSpec::g_kernel(4, Branch::minus, 0.3, 2.0)}) {
        VecC a = cz_apply(s, f).values, b = cz_apply_decomposed(s, f).values;
        CHECK((a - b).norm() <= 1e-10 * a.norm());
    }
    CHECK_THROWS_AS(cz_apply_decomposed(CZKernelSpec::hilbert(2.0), f), ConfigError);
}

TEST_CASE("g kernel restrictions") {
    CHECK_THROWS_AS(CZKernelSpec::g_kernel(2, Branch::plus, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(CZKernelSpec::g_kernel(3, Branch::minus, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(CZKernelSpec::g_kernel(4, Branch::plus, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(CZKernelSpec::g_kernel(5, Branch::plus, 1.0, 0.0), ConfigError);
    CHECK_NOTHROW(CZKernelSpec::g_kernel(2, Branch::minus, 1.0, 3.0));
    CHECK_NOTHROW(CZKernelSpec::g_kernel(3, Branch::plus, 1.0, 3.0));
}

TEST_CASE("Schur sums of CZ kernels weighted by <|x| - |y|>^2 are uniform in n") {
    for (const CZKernelSpec& s : {CZKernelSpec::k1(Branch::plus), CZKernelSpec::k2(Branch::minus)}) {
        auto K = [&](double x, double y) {
            double d = std::abs(x) - std::abs(y);
            return std::abs(s(x, y)) / (1 + d * d) * cplx(1);
        };
        SchurValues a = schur_values(make_grid(10, 400), K), b = schur_values(make_grid(10, 800), K);
        CHECK(std::abs(b.row / a.row - 1) <= 2e-2);
        CHECK(std::abs(b.col / a.col - 1) <= 2e-2);
    }
}

TEST_CASE("atoms") {
    Grid g = make_grid(100, 2000);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 50; ++k) {
        double r = std::exp(std::log(2.0) + (std::log(25.0) - std::log(2.0)) * (rng() >> 11) * 0x1.0p-53);
        Atom a = make_atom(g, 0.0, r, rng());
        CHECK(lp_norm(SampledFunction(g, a.values.cast<cplx>()), 1) <= 2 + 1e-9);
    }
    CZKernelSpec g1 = CZKernelSpec::g_kernel(1, Branch::plus, 1.0, 0.0);
    AtomSuite s = atom_bmo_suite(g, [&](double x, double y) { return g1(x, y); }, 100);
    CHECK(s.radii.size() == 100);
    for (double r : s.radii) {
        CHECK(r >= 2);
        CHECK(r <= g.L / 4);
    }
    CHECK(std::isfinite(s.max_l1));
    CHECK(s.slope <= 0.05);
}

TEST_CASE("uncut 1/(|x| - |y|) on f = 1: BMO stays finite while the sup grows with L") {
    auto plain = CZKernelSpec::from([](double x, double y) {
        double d = std::abs(x) - std::abs(y);
        return d == 0 ? cplx(0) : cplx(1 / d);
    });
    std::vector<double> sup, bmo;
    for (double L : {10.0, 20.0, 40.0}) {
        Grid g = make_grid(L, int(std::lround(20 * L)));
        SampledFunction one = SampledFunction::real(g, [](double) { return 1.0; });
        SampledFunction out = cz_apply(plain, one);
        sup.push_back(lp_norm(out, INF));
        bmo.push_back(bmo_norm(out));
    }
    CHECK(sup[1] > sup[0]);
    CHECK(sup[2] > sup[1]);
    for (double b : bmo) CHECK(std::isfinite(b));
    CHECK(bmo[2] / bmo[0] < sup[2] / sup[0]);
}

TEST_CASE("counterexample models") {
    ModelAResult a = model_a_values({10});
    REQUIRE(a.value.size() == 1);
    CHECK(std::abs(a.expected[0] - 2 * std::log(11.0)) <= 1e-14);
    CHECK(std::abs(a.value[0] / a.expected[0] - 1) <= 0.02);
    CHECK_THROWS_AS(model_a_value(make_grid(5, 500), 10), ConfigError);
    ModelBResult b = model_b_sup({10, 20, 40, 80});
    CHECK(b.slope <= 0.05);
    TailResult t = model_a_tail({10, 100, 1000, 10000});
    CHECK(std::abs(t.normalized_slope - 1) <= 0.1);
}

TEST_CASE("D* probe") {
    Grid g = make_grid(10, 512);
    ResonanceProfile ramp;
    ramp.step = 0.5;
    SampledFunction V = sample_potential(resonance_builder(0, 1, ramp), g);
    DStarProbe z = d_star_probe(V, 4.0, true);
    CHECK(z.d_star == cplx(0));
    CHECK_FALSE(z.reliable);
    for (double v : z.value) CHECK(v == 0);

    DStarProbe p = d_star_probe(V, 4.0);
    REQUIRE(p.reliable);
    CHECK(std::abs(p.d_star) > 0);
    CHECK(p.fit_residual < 1e-2);
    CHECK(std::abs(p.tail_exponent + 1) <= 0.1);
    CHECK(p.consistency >= 0.5);
    CHECK(p.consistency <= 2);
    for (double x : p.x) {
        CHECK(x >= 2.5 * 4 - 1e-12);
        CHECK(x <= 10 * 4 + 1e-12);
    }
    CHECK_THROWS_AS(d_star_probe(bump(g), 4.0), ConfigError);
}
