#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bihar/potentials.hpp"
#include "bihar/spectral.hpp"

using namespace bihar;

namespace {

double sech(double x) { return 1 / std::cosh(x); }

bool is_even(const VecC& v) {
    const int n = int(v.size());
    for (int i = 0; i < n; ++i)
        if (std::abs(v[i] - v[n - 1 - i]) > 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) return false;
    return true;
}

}  // namespace

TEST_CASE("sample_potential basics") {
    Grid g = make_grid(10, 512);
    CHECK(sample_potential(PotentialSpec::zero(), g).values.cwiseAbs().maxCoeff() == 0);
    SampledFunction e = sample_potential(PotentialSpec::embedded(), g);
    for (int i = 0; i < g.n; ++i) {
        double s = sech(g.x[i]);
        CHECK(std::abs(e.values[i].real() - (20 * s * s - 24 * s * s * s * s)) < 1e-13);
        CHECK(e.values[i].imag() == 0);
    }
    for (std::uint64_t seed : {0, 1, 7}) {
        SampledFunction b = sample_potential(PotentialSpec::bump(1, 2, seed), g);
        for (int i = 0; i < g.n; ++i)
            if (std::abs(g.x[i]) > 2) CHECK(b.values[i] == cplx(0));
        CHECK(b.values.cwiseAbs().maxCoeff() > 0);
    }
}

TEST_CASE("embedded potential annihilates sech - 1") {
    // sech'''' = sech - 20 sech^3 + 24 sech^5, so (d^4 + V) sech = sech.
    for (double x = -6; x <= 6; x += 0.37) {
        double s = sech(x), d4 = s - 20 * std::pow(s, 3) + 24 * std::pow(s, 5);
        CHECK(std::abs(d4 + embedded_potential(x) * s - s) <= 1e-6 * s);
        const double h = 1e-2;
        double fd = (-sech(x - 3 * h) + 12 * sech(x - 2 * h) - 39 * sech(x - h) + 56 * sech(x) - 39 * sech(x + h) +
                     12 * sech(x + 2 * h) - sech(x + 3 * h)) /
                    (6 * std::pow(h, 4));
        CHECK(std::abs(fd - d4) < 1e-5);
    }
}

TEST_CASE("resonance builder: flat profile gives V = 0") {
    ResonanceProfile flat;
    flat.d2 = [](double) { return 0.0; };
    flat.d4 = [](double) { return 0.0; };
    flat.value = [](double) { return 1.0; };
    Grid g = make_grid(10, 512);
    CHECK(sample_potential(resonance_builder(0, 1, flat), g).values.cwiseAbs().maxCoeff() <= 1e-14);
    ResonanceProfile partial;
    partial.d2 = [](double) { return 0.0; };
    CHECK_THROWS_AS(resonance_builder(0, 1, partial), ConfigError);
    CHECK_THROWS_AS(resonance_builder(0, 0), ConfigError);
    CHECK_THROWS_AS(resonance_builder(-1, 1), ConfigError);
}

TEST_CASE("resonance builder classes and residuals") {
    Grid g = make_grid(10, 1024);
    struct Case {
        PotentialSpec spec;
        ResonanceKind kind;
    };
    ResonanceProfile ramp;
    ramp.step = 0.5;
    std::vector<Case> cases = {{resonance_builder(1, 1), ResonanceKind::FirstKind},
                               {resonance_builder(0, 1), ResonanceKind::SecondKind},
                               {resonance_builder(0, 1, ramp), ResonanceKind::SecondKind}};
    for (auto& c : cases) {
        BuiltPotential b = build_potential(c.spec, g);
        CHECK(b.residual <= 1e-6);
        SampledFunction V(g, b.V.cast<cplx>());
        for (int i = 0; i < g.n; ++i)
            if (std::abs(g.x[i]) > 1.0 + 2 * g.h) CHECK(b.V[i] == 0);
        CHECK(classify_zero_energy(V).kind == c.kind);
    }
    CHECK(is_even(sample_potential(resonance_builder(1, 1), g).values));
    CHECK(is_even(sample_potential(resonance_builder(0, 1), g).values));
    CHECK_FALSE(is_even(sample_potential(resonance_builder(0, 1, ramp), g).values));
    PotentialSpec pw = resonance_builder(1, 1);
    pw.sampling = Sampling::pointwise;
    CHECK(build_potential(pw, g).residual <= 1e-6);
}

TEST_CASE("ramped profile tends to d on the left and d + step on the right") {
    ResonanceProfile p;
    p.step = 0.5;
    CHECK(p.at(-1, 0, 1) == doctest::Approx(1.0 + p.alpha * 0).epsilon(1e-14));
    CHECK(p.at(1, 0, 1) == doctest::Approx(1.5).epsilon(1e-14));
    // second and fourth derivatives against finite differences of the value
    for (double x : {-0.7, -0.2, 0.3, 0.8}) {
        const double h = 1e-3;
        double d2 = (p.at(x + h, 0, 1) - 2 * p.at(x, 0, 1) + p.at(x - h, 0, 1)) / (h * h);
        CHECK(std::abs(d2 - p.second(x, 0)) < 1e-4);
        double d4 = (p.second(x + h, 0) - 2 * p.second(x, 0) + p.second(x - h, 0)) / (h * h);
        CHECK(std::abs(d4 - p.fourth(x, 0)) < 1e-3);
    }
}

TEST_CASE("zero-eigenvalue builder") {
    CHECK_THROWS_AS(zero_eigen_builder(1), DomainError);
    PotentialSpec spec = zero_eigen_builder(2);
    spec.sampling = Sampling::pointwise;
    Grid big = make_grid(40, 4096);
    CHECK(build_potential(spec, big).residual <= 1e-8);
    Grid g = make_grid(40, 1024);
    PotentialSpec st = zero_eigen_builder(2);
    st.sampling = Sampling::stencil;
    BuiltPotential b = build_potential(st, g);
    CHECK(b.residual <= 1e-10);
    SampledFunction V(g, b.V.cast<cplx>());
    SpectralData sd = eigendecompose(build_hamiltonian(V));
    VecR phi(g.n);
    for (int i = 0; i < g.n; ++i) phi[i] = 1 / (1 + g.x[i] * g.x[i]);
    // Low continuum modes of the box also sit near 0, so pick the eigenvector aligned with phi.
    // Comb and pointwise samples shift that eigenvalue by O(h^2); stencil samples keep it at 0.
    double best = INF, cosine = 0;
    for (int j = 0; j < g.n; ++j) {
        double c = std::abs(sd.eigenvectors.col(j).dot(phi)) / phi.norm();
        if (c > cosine) {
            cosine = c;
            best = std::abs(sd.eigenvalues[j]);
        }
    }
    CHECK(best <= 1e-3);
    CHECK(cosine >= 0.999);
    CHECK(is_even(V.values));
    CHECK(is_even(sample_potential(zero_eigen_builder(2), g).values));
    CHECK(build_potential(zero_eigen_builder(2), big).residual <= 1e-6);
}

TEST_CASE("stencil sampling of the resonance profiles") {
    Grid g = make_grid(10, 1024);
    for (double c : {0.0, 1.0}) {
        PotentialSpec spec = resonance_builder(c, 1);
        spec.sampling = Sampling::stencil;
        BuiltPotential b = build_potential(spec, g);
        CHECK(b.residual <= 1e-10);
        for (int i = 0; i < g.n; ++i)
            if (std::abs(g.x[i]) > 1 + 3 * g.h) CHECK(std::abs(b.V[i]) <= 1e-6);
    }
}

TEST_CASE("potential checks") {
    Grid g = make_grid(15, 1024);
    PotentialReport z = checks(PotentialSpec::zero(), g);
    CHECK(z.repulsive);
    CHECK(z.decay == PotentialReport::Decay::none);
    CHECK(std::isinf(z.decay_exponent));
    PotentialReport e = checks(PotentialSpec::embedded(), g);
    CHECK_FALSE(e.repulsive);
    CHECK(e.decay == PotentialReport::Decay::super_polynomial);
    PotentialSpec ze = zero_eigen_builder(2);
    ze.sampling = Sampling::pointwise;
    PotentialReport r = checks(ze, make_grid(40, 2048));
    CHECK(r.decay == PotentialReport::Decay::polynomial);
    CHECK(std::abs(r.decay_exponent - 4) <= 0.3);
    CHECK(checks(PotentialSpec::bump(1, 2), g).compact);
}
