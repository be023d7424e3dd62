#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bihar/types.hpp"

namespace bihar {

// Uniform symmetric grid on [-L, L]; n is even so there is never a node at 0.
struct Grid {
    double L = 0;
    int n = 0;
    double h = 0;
    VecR x;  // nodes
    VecR q;  // trapezoid weights

    int size() const { return n; }
};

Grid make_grid(double L, int n);

struct SampledFunction {
    Grid grid;
    VecC values;

    SampledFunction() = default;
    SampledFunction(Grid g, VecC v);
    static SampledFunction from(const Grid& g, const std::function<cplx(double)>& f);
    static SampledFunction real(const Grid& g, const std::function<double(double)>& f);
};

// Cell average of the indicator of [a,b] around every node; second-order accurate under quadrature.
VecR indicator(const Grid& g, double a, double b);

struct WeightSpec {
    enum class Kind { unit, power, japanese, custom };
    Kind kind = Kind::unit;
    double a = 0;  // exponent for power / japanese
    VecR custom;   // samples for custom

    static WeightSpec unit() { return {}; }
    static WeightSpec power(double a) { return {Kind::power, a, {}}; }
    static WeightSpec japanese(double a) { return {Kind::japanese, a, {}}; }
    static WeightSpec samples(VecR w);

    VecR on(const Grid& g) const;
    bool even_flag(const Grid& g) const;
};

inline constexpr double INF = std::numeric_limits<double>::infinity();

double lp_norm(const SampledFunction& f, double p, const WeightSpec& w = {});
double lp_norm(const Grid& g, const VecC& f, double p, const WeightSpec& w = {});
double weak_l1(const SampledFunction& f, const WeightSpec& w = {});
double bmo_norm(const SampledFunction& f);

struct ApResult {
    double value = 1;
    bool diverged = false;
    std::vector<double> level_sups;  // sup over intervals of length 2^k cells, k = 1, 2, ...
};
ApResult ap_characteristic(const Grid& g, const WeightSpec& w, double p);

struct Atom {
    double x0 = 0;
    double r = 0;
    VecR values;
};

// Random piecewise-constant atom built from unit-length pieces, projected to zero mean, sup = 1/r.
Atom make_atom(const Grid& g, double x0, double r, std::uint64_t seed);
Atom haar_atom(const Grid& g, double x0, double r);
bool is_valid_atom(const Grid& g, const Atom& a, double C = 1.0);

SampledFunction reflect(const SampledFunction& f);
VecC reflect(const VecC& f);

}  // namespace bihar
