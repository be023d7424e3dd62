#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bihar/free_ops.hpp"
#include "bihar/grid.hpp"

namespace bihar {

enum class BoundaryCondition { clamped, periodic };

// Five-diagonal finite-difference H = d^4/dx^4 + V. Clamped rows use ghost values u_{-1} = u_1,
// u_{-2} = 0 folded into the first diagonal entry (7/h^4 instead of 6/h^4).
struct DiscreteHamiltonian {
    Grid grid;
    VecR V;
    BoundaryCondition bc = BoundaryCondition::clamped;

    MatR dense() const;
    VecC apply(const VecC& u) const;
    // Gershgorin bound on the spectral norm.
    double norm_bound() const;
};

DiscreteHamiltonian build_hamiltonian(const SampledFunction& V, BoundaryCondition bc = BoundaryCondition::clamped);

struct SpectralOptions {
    // Eigenvalues below -eps count as bound states, above +eps as embedded candidates (when localized).
    // Default eps = 1e-6 max(1, max|V|).
    std::optional<double> eps_bound;
    double localization = 0.99;
    // Restrict to eigenvalues in [lo, hi] (banded solver, clamped boundary only).
    std::optional<std::pair<double, double>> window;
};

struct SpectralData {
    Grid grid;
    VecR eigenvalues;   // ascending
    MatR eigenvectors;  // columns, orthonormal in the Euclidean inner product on samples
    VecR localization;  // mass in |x| <= L/2 over total
    std::vector<int> bound;
    std::vector<int> embedded;
    double eps_bound = 0;
    bool partial = false;  // only a window of the spectrum was computed
};

SpectralData eigendecompose(const DiscreteHamiltonian& H, const SpectralOptions& opt = {});

// I minus the projectors onto bound states and embedded candidates; op() is the sample-space matrix.
ComplexKernel ac_projector(const SpectralData& sd);
MatR ac_projector_matrix(const SpectralData& sd);

enum class ResonanceKind { Regular, FirstKind, SecondKind, ZeroEigenvalue };
std::string to_string(ResonanceKind k);

struct BirmanExponent {
    double exponent = 0;
    double stderr_slope = 0;
    std::vector<double> lambdas;
    std::vector<double> norms;
    ResonanceKind kind = ResonanceKind::Regular;
    bool free_fallback = false;  // V == 0: slope of the localized free resolvent instead
};

// Exponent ranges: > -0.5 regular, (-2, -0.5] first kind, (-3.5, -2] second kind, <= -3.5 zero eigenvalue.
ResonanceKind kind_from_exponent(double e);

BirmanExponent birman_exponent(const SampledFunction& V, std::vector<double> lambdas = {});

struct ResonanceClass {
    ResonanceKind kind = ResonanceKind::Regular;
    std::string method;  // "shooting" or "birman_exponent"
    double support_radius = 0;
    // Shooting diagnostics (relative to the largest singular value of the connection matrix).
    double bounded_residual = 0;  // size of the non-constant right coefficients of the left constant
    double linear_sigma_min = 0;  // smallest singular value of the {1,x} -> {x^2,x^3} block
    MatR connection;
    std::optional<BirmanExponent> exponent;
};

// Exact transfer across the node comb sum_j q_j V_j delta_{x_j}: free cubics between nodes and
// a jump -q_j V_j phi(x_j) in phi''' at each node.
MatR connection_matrix(const SampledFunction& V);
ResonanceClass classify_zero_energy(const SampledFunction& V, double rank_tol = 1e-6);

}  // namespace bihar
