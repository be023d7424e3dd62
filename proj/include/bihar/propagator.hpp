#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bihar/free_ops.hpp"
#include "bihar/grid.hpp"
#include "bihar/spectral.hpp"
#include "bihar/wave_ops.hpp"

namespace bihar {

// e^{-itH} P_ac on the eigenbasis of the discretized H.
class Evolver {
public:
    explicit Evolver(SpectralData sd);
    const SpectralData& spectral() const { return sd_; }
    VecC project(const VecC& f) const;  // P_ac f
    SampledFunction evolve(double t, const SampledFunction& f) const;
    // Coefficients of P_ac f in the eigenbasis, reused across many times.
    VecC coefficients(const VecC& f) const;
    VecC evolve_coefficients(double t, const VecC& c) const;

private:
    SpectralData sd_;
    std::vector<int> ac_;
};

SampledFunction evolve(const SampledFunction& V, double t, const SampledFunction& f,
                       BoundaryCondition bc = BoundaryCondition::clamped);

// Closed quadrangle A(1/2,1/2) B(1,1/3) C(1,0) D(2/3,0) minus the closed segments BC and DC, decided
// in exact rational arithmetic. DomainError outside the unit square.
bool in_region(double invp, double invq);

struct DecayPair {
    double inv_p = 0, inv_q = 0;
    double exponent = 0;
    double stderr_slope = 0;
    double expected = 0;  // -(1/4)(1/p - 1/q)
    bool in_region = false;
    std::vector<double> ratios;  // sup over the family at each retained time
};

struct DecayConfig {
    std::vector<double> times;          // default: 12 log-spaced points on [1, 100]
    std::vector<double> widths;         // default: 0.5 * 2^(k/4), k = 0..16
    double offset = 3.0;                // family members are centred at offset * width
    double boundary_threshold = 0.01;   // members leave the family once this mass fraction is near the edge
    std::vector<double> free_widths;    // free route, centred; default: 0.5 * 2^(k/4), k = -4..16
};

struct DecayScanResult {
    std::vector<DecayPair> pairs;
    std::vector<double> times;       // times retained in the fits
    std::vector<int> alive;          // family members still clear of the boundary at each time
    double window_end = 0;           // last retained time
    bool trimmed = false;
    std::vector<std::string> warnings;
    bool free_route = false;

    std::string to_csv() const;
};

// V = 0 uses the exact periodic Fourier propagator; otherwise the eigenbasis of the clamped H.
DecayScanResult decay_scan(const SampledFunction& V, const std::vector<std::pair<double, double>>& pairs,
                           const DecayConfig& cfg = {});
DecayScanResult decay_scan(const Evolver& ev, const std::vector<std::pair<double, double>>& pairs,
                           const DecayConfig& cfg = {});

struct MultiplierOptions {
    PropagatorOptions::Symbol symbol = PropagatorOptions::Symbol::continuum;  // symbol used for f(Delta^2)
};

struct MultiplierResult {
    MatC route1;  // f applied to the eigenvalues of the discretized H
    MatC route2;  // sum_j f(lambda_j) P_j + W f(Delta^2) W*
    double distance = 0;      // max over the test family of ||(route1 - route2) f|| / ||f||
    double wave_error = 0;    // max(W*W - I, WW* - P_ac) defects on the same family
    bool consistent = false;  // distance <= 3 wave_error (or both negligible)
};

// f(Delta^2) on the grid as a Fourier multiplier.
MatC free_multiplier(const Grid& g, const std::function<cplx(double)>& f, const MultiplierOptions& opt = {});
MultiplierResult spectral_multiplier(const SpectralData& sd, const WaveOperatorBundle& wb,
                                     const std::function<cplx(double)>& f, const MatC& family,
                                     const MultiplierOptions& opt = {});

// Smooth bump supported in [1/2, 2].
double default_eta(double lambda);

struct SymbolCheck {
    std::vector<double> deltas;
    std::vector<double> hs_norms;         // sup over the sweep at the finer resolution, per delta
    double M = 0;                         // sup over delta at the finer resolution
    double M_coarse = 0;
    double hormander_growth = 0;          // M / M_coarse
    bool hormander_pass = false;
    double C0 = 0, C1 = 0;                // sup |f|, sup |lambda f'| at the finer resolution
    double C1_coarse = 0;
    bool mikhlin_pass = false;
};
SymbolCheck hormander_mikhlin_check(const std::function<cplx(double)>& f, double s = 1.0,
                                    const std::function<double(double)>& eta = default_eta, int points = 4096);

}  // namespace bihar
