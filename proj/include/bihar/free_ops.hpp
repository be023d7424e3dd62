#pragma once

#include <vector>

#include "bihar/grid.hpp"

namespace bihar {

enum class Branch { plus, minus };

// F_pm(s) = pm i e^{pm i s} - e^{-s} and its derivatives up to order 3.
cplx f_pm(double s, Branch b, int k = 0);

struct SpectralParam {
    double lambda;
    Branch sign = Branch::plus;
};

// Dense kernel K(x_i, y_j); apply() integrates against the column grid's trapezoid weights.
struct ComplexKernel {
    Grid rows;
    Grid cols;
    MatC K;

    VecC apply(const VecC& f) const;
    // Matrix of the discretized operator, K * diag(q).
    MatC op() const;
};

cplx free_resolvent_value(double lambda, Branch b, double r);
ComplexKernel free_resolvent_kernel(SpectralParam sp, const Grid& g);
// Matrix-free application of R_0^pm(lambda^4) to samples f, evaluated at arbitrary points.
VecC apply_free_resolvent(double lambda, Branch b, const Grid& g, const VecC& f);
VecC apply_free_resolvent_at(double lambda, Branch b, const Grid& g, const VecC& f, const VecR& at);

ComplexKernel g0_kernel(const Grid& g);

struct FAlphaBeta {
    cplx direct;
    cplx expansion;
};
FAlphaBeta f_alpha_beta(double lambda, double x, double y, int alpha, int beta);

struct TaylorSplit {
    std::vector<cplx> terms;  // explicit terms of the expansion
    cplx remainder;           // integral remainder evaluated by Gauss-Legendre quadrature
    cplx exact;               // F(lambda |x - y|) computed directly
    cplx reconstructed() const;
};
// With corrected = true the function expanded is F~(s) = F(s) + (1 pm i) s^2 / 2, which is
// required for order 3 because F''(0) != 0.
TaylorSplit taylor_split(double lambda, double x, double y, int order, Branch F, bool corrected = false,
                         int gauss_nodes = 64);

// Centered fourth difference on interior nodes (two nodes on each side are left at zero).
VecC fourth_difference(const Grid& g, const VecC& u);

struct PropagatorOptions {
    enum class Symbol { continuum, stencil };
    Symbol symbol = Symbol::continuum;
    bool absorbing = false;
    double layer_fraction = 0.2;  // width of the absorbing layer relative to L
    double strength = 5.0;
    double dt_max = 0.02;
};

struct Propagated {
    SampledFunction u;
    double boundary_mass = 0;  // fraction of L^2 mass in |x| > 0.9 L
    bool wraparound_warning = false;
};

VecR propagator_symbol(const Grid& g, PropagatorOptions::Symbol s);

SampledFunction free_propagator(double t, const SampledFunction& f);
Propagated free_propagate(double t, const SampledFunction& f, const PropagatorOptions& opt = {});
// States at increasing times; steps through the absorbing layer when enabled.
std::vector<Propagated> free_trajectory(const std::vector<double>& times, const SampledFunction& f,
                                        const PropagatorOptions& opt = {});

}  // namespace bihar
