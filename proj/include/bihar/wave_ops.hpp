#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bihar/free_ops.hpp"
#include "bihar/grid.hpp"
#include "bihar/spectral.hpp"

namespace bihar {

// ---------------------------------------------------------------------------------------------
// Wave operators

struct QuadConfig {
    int n_low = 200;    // Gauss nodes in log(lambda) on [lambda_min, lambda0]
    int n_high = 400;   // Gauss nodes on [lambda0, lambda_max]
    double lambda_min = 1e-3;
    double lambda0 = 0.1;
    double lambda_max = 8.0;
    double tail_tolerance = 5e-2;
};

struct TimeDependentConfig {
    int big_n = 4096;               // periodic work grid with the same spacing
    std::vector<double> times;      // defaults to 2^(k/2), k = 0..16
    int cesaro = 8;                 // number of trailing times averaged
    double absorber_start = 0.45;   // absorbing layer begins at this fraction of the work box
    double absorber_strength = 2.0;
    double dt_rel = 0.002;          // sigma-step dt = min(dt_rel max(1, sigma), dt_max)
    double dt_max = 0.5;
    double tolerance = 5e-2;        // convergence flag threshold between the last two averages
};

struct WaveOperatorBundle {
    enum class Method { stationary, time_dependent };
    Method method = Method::stationary;
    Grid grid;
    MatC W;      // acts on samples
    MatC Wstar;  // adjoint in L^2 with trapezoid weights: diag(q)^-1 W^H diag(q)
    // stationary metadata
    QuadConfig quad;
    int nodes = 0;
    double tail_estimate = 0;
    bool tail_warning = false;
    // time-dependent metadata
    std::vector<double> times;
    MatC gram;            // G_ab = <W f_a, f_b> on the test family
    double last_change = 0;
    bool converged = true;
};

MatC weighted_adjoint(const Grid& g, const MatC& W);

WaveOperatorBundle stationary_wave_op(const SampledFunction& V, const QuadConfig& cfg = {});
// W_+ f = conj(W_- conj f).
MatC plus_from_minus(const MatC& Wminus);

// Duhamel form <W_- f_a, f_b> = <f_a, f_b> - i int_0^inf <V e^{i s Delta^2} f_a, e^{i s H} f_b> ds with
// split-step evolution on a larger periodic box carrying an absorbing layer. The returned W is the
// compression to span(family) completed by the identity on its complement.
WaveOperatorBundle time_dependent_wave_op(const SampledFunction& V, const MatC& family,
                                          const TimeDependentConfig& cfg = {});

// Standard smooth test family: mean-zero Gaussian differences centred on a uniform set of points.
MatC meanzero_family(const Grid& g, const std::vector<double>& centres, double sigma = 0.7);

// max over columns of ||A f - f|| / ||f|| in L^2(q).
double family_defect(const Grid& g, const MatC& A, const MatC& F);
// max over columns of ||A f - B f|| / ||f||.
double family_distance(const Grid& g, const MatC& A, const MatC& B, const MatC& F);
// G = F^H diag(q) W F, entry (b, a) = <W f_a, f_b>.
MatC gram_matrix(const Grid& g, const MatC& W, const MatC& F);

// ---------------------------------------------------------------------------------------------
// Norm probes

struct LpProbe {
    double lower = 0;
    double upper = 0;        // Schur bound for |kernel|: A1^(1/p) Ainf^(1 - 1/p)
    double schur_1 = 0;      // max column integral
    double schur_inf = 0;    // max row integral
    std::vector<double> ratios;
    std::vector<std::string> labels;
};
// Lower bound: max over a structured family of ||W f|| / max(||f||, ||tau f||).
LpProbe lp_norm_probe(const Grid& g, const MatC& W, double p, const WeightSpec& w = {}, int family_size = 24,
                      std::uint64_t seed = 7);

struct SchurValues {
    double col = 0;  // sup_y int |K(x,y)| dx
    double row = 0;  // sup_x int |K(x,y)| dy
};
SchurValues schur_values(const Grid& g, const std::function<cplx(double, double)>& K);

// ---------------------------------------------------------------------------------------------
// Calderon-Zygmund toolbox

// psi = 0 on [0, 1], 1 on [2, inf), C^infinity monotone bridge.
double cutoff_psi(double s);

struct CZKernelSpec {
    enum class Kind { k1, k2, g, k1_tilde, k2_tilde, truncated_hilbert, schur, custom };
    Kind kind = Kind::k1;
    Branch sign = Branch::plus;
    int j = 1;            // g_j, j = 1..4
    cplx a = 1.0, b = 0.0;
    double eps = 2.0;     // truncated Hilbert
    double rho = 2.0;     // schur kernel <|x| - |y|>^-rho
    double delta = 1.0;   // Holder exponent of the standard-kernel bound
    std::function<cplx(double, double)> custom;

    static CZKernelSpec k1(Branch s) { CZKernelSpec k; k.kind = Kind::k1; k.sign = s; return k; }
    static CZKernelSpec k2(Branch s) { CZKernelSpec k; k.kind = Kind::k2; k.sign = s; return k; }
    static CZKernelSpec g_kernel(int j, Branch s, cplx a, cplx b);
    static CZKernelSpec hilbert(double eps) { CZKernelSpec k; k.kind = Kind::truncated_hilbert; k.eps = eps; return k; }
    static CZKernelSpec schur(double rho) { CZKernelSpec k; k.kind = Kind::schur; k.rho = rho; return k; }
    static CZKernelSpec from(std::function<cplx(double, double)> f);

    // Throws ConfigError when g_2^+, g_3^- or g_4^+ is requested with a forbidden b.
    void validate() const;
    cplx operator()(double x, double y) const;
};

ComplexKernel cz_kernel_matrix(const CZKernelSpec& spec, const Grid& g);
SampledFunction cz_apply(const CZKernelSpec& spec, const SampledFunction& f);
VecC cz_apply_at(const CZKernelSpec& spec, const SampledFunction& f, const VecR& at);
// Same operator assembled from chi_+/- T_{k~} chi_+/- (1 + tau); only for k1, k2, g kinds.
SampledFunction cz_apply_decomposed(const CZKernelSpec& spec, const SampledFunction& f);

struct AtomSuite {
    double max_l1 = 0;
    double slope = 0;  // OLS slope of log ||T a||_1 against log r
    std::vector<double> radii, l1;
    double max_bmo = 0;
};
// Random atoms with r log-uniform in [2, L/4]; ||T a||_1 includes the far field beyond the grid.
AtomSuite atom_bmo_suite(const Grid& g, const std::function<cplx(double, double)>& K, int n_atoms,
                         std::uint64_t seed = 3, int n_bmo = 0);

// ---------------------------------------------------------------------------------------------
// Counterexample models

// (a): kernel [1/(|x|+|y|) + 1/(|x|-|y|)] psi-cut, value of T f_R at x = R + 2.
struct ModelAResult {
    std::vector<double> R, value, expected;  // expected = 2 log(R + 1)
    double max_rel_error = 0;
};
ModelAResult model_a_values(const std::vector<double>& Rs, double h = 0.02);
// Single evaluation on a caller-supplied grid; ConfigError if L < 2R.
double model_a_value(const Grid& g, double R);

// L^1 tail of model (a) applied to f_1 over 3 <= |x| <= R'; slope against log R' divided by 4 ||f_1||_1.
struct TailResult {
    std::vector<double> Rp, integral;
    double normalized_slope = 0;
};
TailResult model_a_tail(const std::vector<double>& Rps, int nodes = 32);

// (b): odd-odd model of the first-kind low-energy kernel with a rank-one smooth coefficient.
struct ModelBResult {
    std::vector<double> R, sup;
    double slope = 0;  // log sup against log R
};
ModelBResult model_b_sup(const std::vector<double>& Rs, double dx = 0.2);

struct CounterexampleReport {
    ModelAResult a;
    TailResult tail;
    ModelBResult b;
};
CounterexampleReport counterexample_sweep(const std::vector<double>& Rs);

struct DStarProbe {
    cplx d_star = 0;
    double tail_exponent = 0;
    cplx c1 = 0;             // coefficient of R/x in the far field
    double consistency = 0;  // |c1| / (|D*| / 72)
    double fit_residual = 0;
    bool reliable = false;  // fit residual below 1e-2 and D* above rounding level of ||x^3 v||^2
    std::vector<double> x, value;
};
// Second-kind V (compact): D* from the expansion fit and the far field of T* g_R for R = 4.
DStarProbe d_star_probe(const SampledFunction& V, double R = 4.0, bool zero_blocks = false);

}  // namespace bihar
