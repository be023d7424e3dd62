#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bihar/grid.hpp"

using namespace bihar;

namespace {

SampledFunction random_function(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    VecC v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = cplx(u(rng), u(rng));
    return {g, v};
}

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

TEST_CASE("make_grid spacing and endpoints") {
    Grid g = make_grid(1, 16);
    CHECK(g.x[0] == doctest::Approx(-1).epsilon(1e-15));
    CHECK(g.x[15] == doctest::Approx(1).epsilon(1e-15));
    CHECK(g.h == doctest::Approx(2.0 / 15).epsilon(1e-15));
    CHECK(make_grid(20, 2048).h == doctest::Approx(40.0 / 2047).epsilon(1e-14));
    CHECK(std::abs(make_grid(20, 2048).h - 0.01954) < 1e-5);
    CHECK_THROWS_AS(make_grid(1, 3), ConfigError);
    CHECK_THROWS_AS(make_grid(-1, 16), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 17), ConfigError);
}

TEST_CASE("trapezoid weights integrate constants and linear functions exactly") {
    Grid g = make_grid(3, 64);
    CHECK(g.q.sum() == doctest::Approx(6).epsilon(1e-13));
    CHECK(std::abs(g.q.dot(g.x)) < 1e-13);
}

TEST_CASE("lp_norm reference values") {
    Grid g = make_grid(1, 256);
    SampledFunction one = SampledFunction::real(g, [](double) { return 1.0; });
    CHECK(lp_norm(one, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lp_norm(one, INF) == 1.0);
    Grid g2 = make_grid(1, 2048);
    SampledFunction ax = SampledFunction::real(g2, [](double x) { return std::abs(x); });
    // int_{-1}^{1} |x| dx = 1
    CHECK(std::abs(lp_norm(ax, 1) - 1.0) <= 1e-3);
}

TEST_CASE("lp_norm is homogeneous") {
    Grid g = make_grid(4, 128);
    SampledFunction f = random_function(g, 5);
    const cplx c(-2.5, 1.5);
    for (double p : {1.0, 1.5, 2.0, 3.0, INF}) {
        SampledFunction cf(g, c * f.values);
        CHECK(lp_norm(cf, p) == doctest::Approx(std::abs(c) * lp_norm(f, p)).epsilon(1e-13));
        CHECK(lp_norm(cf, p, WeightSpec::power(0.5)) ==
              doctest::Approx(std::abs(c) * lp_norm(f, p, WeightSpec::power(0.5))).epsilon(1e-13));
    }
}

TEST_CASE("p = infinity ignores the weight") {
    Grid g = make_grid(4, 128);
    SampledFunction f = random_function(g, 6);
    CHECK(lp_norm(f, INF, WeightSpec::power(1.0)) == lp_norm(f, INF));
}

TEST_CASE("weak_l1 reference values") {
    Grid g = make_grid(3, 600);
    SampledFunction ind = SampledFunction::real(g, [](double x) { return std::abs(x) <= 1 ? 1.0 : 0.0; });
    CHECK(std::abs(weak_l1(ind) - 2.0) <= 2 * g.h);
    Grid g10 = make_grid(10, 2000);
    SampledFunction inv = SampledFunction::real(g10, [](double x) { return 1.0 / std::abs(x); });
    // |{1/|x| > s}| = 2/s, so sup_s s * 2/s = 2
    CHECK(std::abs(weak_l1(inv) - 2.0) <= 0.1);
    SampledFunction zero = SampledFunction::real(g, [](double) { return 0.0; });
    CHECK(weak_l1(zero) == 0.0);
}

TEST_CASE("weak_l1 never exceeds the L1 norm") {
    Grid g = make_grid(5, 200);
    for (std::uint64_t s = 1; s <= 5; ++s) {
        SampledFunction f = random_function(g, s);
        CHECK(weak_l1(f) <= lp_norm(f, 1) * (1 + 1e-12));
        CHECK(weak_l1(f, WeightSpec::japanese(0.5)) <= lp_norm(f, 1, WeightSpec::japanese(0.5)) * (1 + 1e-12));
    }
}

TEST_CASE("bmo_norm reference values") {
    Grid g = make_grid(4, 256);
    SampledFunction c = SampledFunction::real(g, [](double) { return 3.0; });
    CHECK(bmo_norm(c) <= 1e-12);
    SampledFunction s = SampledFunction::real(g, [](double x) { return sgn(x); });
    // on a symmetric interval the mean is 0 and |sgn - 0| = 1
    CHECK(std::abs(bmo_norm(s) - 1.0) <= 0.05);
    auto logabs = [](const Grid& gg) { return SampledFunction::real(gg, [](double x) { return std::log(std::abs(x)); }); };
    double b1 = bmo_norm(logabs(make_grid(8, 512))), b2 = bmo_norm(logabs(make_grid(8, 1024)));
    CHECK(std::isfinite(b1));
    CHECK(std::abs(b2 / b1 - 1) <= 0.1);
}

TEST_CASE("bmo_norm ignores additive constants") {
    Grid g = make_grid(4, 128);
    SampledFunction f = random_function(g, 9);
    SampledFunction f2(g, f.values.array() + cplx(2.0, -1.0));
    CHECK(bmo_norm(f2) == doctest::Approx(bmo_norm(f)).epsilon(1e-12));
}

TEST_CASE("A_p characteristic") {
    Grid g = make_grid(10, 512);
    CHECK(ap_characteristic(g, WeightSpec::unit(), 2).value == 1.0);
    double a1 = ap_characteristic(g, WeightSpec::power(0.5), 2).value;
    double a2 = ap_characteristic(make_grid(10, 1024), WeightSpec::power(0.5), 2).value;
    CHECK(a1 >= 1.0);
    CHECK(std::abs(a2 / a1 - 1) <= 0.05);
    CHECK(ap_characteristic(g, WeightSpec::power(-2.0), 2).diverged);
    for (double p : {1.0, 1.5, 3.0}) CHECK(ap_characteristic(g, WeightSpec::japanese(0.3), p).value >= 1.0);
}

TEST_CASE("atoms") {
    Grid g = make_grid(8, 800);
    Atom haar = haar_atom(g, 0, 2);
    CHECK(is_valid_atom(g, haar));
    for (int i = 0; i < g.n; ++i) {
        double x = g.x[i];
        if (x > -2 && x < 0) CHECK(haar.values[i] == doctest::Approx(0.25));
        if (x > 0 && x < 2) CHECK(haar.values[i] == doctest::Approx(-0.25));
    }
    for (std::uint64_t s = 1; s <= 10; ++s) {
        Atom a = make_atom(g, 0.5, 2 + 0.3 * s, s);
        CHECK(std::abs(g.q.dot(a.values)) <= 1e-10);
        CHECK(is_valid_atom(g, a));
    }
    CHECK_THROWS_AS(make_atom(g, 0, 1, 1), ConfigError);
}

TEST_CASE("reflection") {
    Grid g = make_grid(5, 200);
    SampledFunction even = SampledFunction::real(g, [](double x) { return std::exp(-x * x); });
    SampledFunction odd = SampledFunction::real(g, [](double x) { return x * std::exp(-x * x); });
    CHECK((reflect(even).values - even.values).norm() <= 1e-14);
    CHECK((reflect(odd).values + odd.values).norm() <= 1e-14);
    SampledFunction f = random_function(g, 3);
    CHECK(reflect(reflect(f)).values == f.values);
    for (double p : {1.0, 2.0, 4.0})
        CHECK(lp_norm(reflect(f), p, WeightSpec::power(0.5)) ==
              doctest::Approx(lp_norm(f, p, WeightSpec::power(0.5))).epsilon(1e-13));
}
