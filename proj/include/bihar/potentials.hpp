#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "bihar/grid.hpp"

namespace bihar {

// Even interior profile phi_1 on [-1, 1], described through its second derivative and its value at 0.
// The default is d + c (5 + 15x^2 - 5x^4 + x^6)/16 + alpha (1 - x^2)^4, which meets c|x| + d with
// matching value and first three derivatives at |x| = 1.
struct ResonanceProfile {
    double alpha = 0.5;
    // Adds step * S(x), S a C^4 ramp from 0 (x <= -1) to 1 (x >= 1), so the profile tends to d on the left
    // and d + step on the right.
    double step = 0.0;
    // Custom profile: second and fourth derivatives on (-1, 1) and value at 0. Empty means default.
    std::function<double(double)> d2;
    std::function<double(double)> d4;
    std::function<double(double)> value;

    double at(double x, double c, double d) const;
    double second(double x, double c) const;
    double fourth(double x, double c) const;
};

// How a built potential is placed on the grid.
//   comb: V_j is chosen so that the exact solution of phi'''' = -sum_j q_j V_j phi(x_j) delta_{x_j}
//         is the sampled profile; this is the same discrete model that M(lambda) uses.
//   pointwise: the closed form -phi''''/phi evaluated at the nodes.
//   stencil: minus the five-point fourth difference of the sampled phi over phi, so phi is an exact
//            null vector of the interior rows of the finite-difference H.
enum class Sampling { comb, pointwise, stencil };

struct PotentialSpec {
    enum class Variant { zero, compact_bump, resonance_built, zero_eigen_built, embedded, custom };
    Variant variant = Variant::zero;
    double amplitude = 1.0;
    double radius = 2.0;
    std::uint64_t seed = 0;
    double c = 0, d = 1;
    ResonanceProfile profile;
    double s = 2.0;
    VecR custom;
    Sampling sampling = Sampling::comb;
    double mu_claim = INF;  // claimed decay exponent, informational

    static PotentialSpec zero() { return {}; }
    static PotentialSpec bump(double amplitude, double radius, std::uint64_t seed = 0);
    static PotentialSpec embedded();
    static PotentialSpec samples(VecR v);
    std::string name() const;
};

PotentialSpec resonance_builder(double c, double d, ResonanceProfile profile = {});
PotentialSpec zero_eigen_builder(double s);

SampledFunction sample_potential(const PotentialSpec& spec, const Grid& g);

// Result of a builder: V on the grid together with the profile phi it annihilates.
struct BuiltPotential {
    VecR V;
    VecR phi;
    // max_j |(s_{j+1} - 2 s_j + s_{j-1})/h^2 + V_j phi_j| / max_j |V_j phi_j| for comb sampling,
    // max |phi'''' + V phi| / max |V phi| from closed forms for pointwise sampling.
    double residual = 0;
};
BuiltPotential build_potential(const PotentialSpec& spec, const Grid& g);

// Closed-form potential annihilating (1 + x^2)^(-s/2).
double zero_eigen_potential(double x, double s);
double embedded_potential(double x);
// Smooth bump A e exp(-1 / (1 - (x/r)^2)), peak value A at 0.
double bump_profile(double x, double A, double r);

struct PotentialReport {
    enum class Decay { none, polynomial, super_polynomial };
    Decay decay = Decay::none;  // none: V vanishes on the outer window
    double decay_exponent = INF;
    bool repulsive = true;
    bool compact = true;
    double support_radius = 0;
    bool even = true;
};
PotentialReport checks(const PotentialSpec& spec, const Grid& g);
PotentialReport checks(const SampledFunction& V);

}  // namespace bihar
