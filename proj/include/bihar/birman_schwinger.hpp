#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "bihar/free_ops.hpp"
#include "bihar/grid.hpp"
#include "bihar/spectral.hpp"

namespace bihar {

// v = sqrt|V|, U = sgn V (U = 1 where V >= 0), restricted to nodes with v > 1e-12 max v.
// D = v sqrt(q) is the symmetric quadrature weighting used by every matrix below.
struct VUFactorization {
    Grid grid;
    std::vector<int> idx;  // retained grid nodes
    VecR v;                // full-grid sqrt|V|
    VecR U;                // on idx
    VecR D;                // on idx
    VecR X;                // node positions on idx

    static VUFactorization from(const SampledFunction& V);
    int size() const { return int(idx.size()); }
    double l1() const { return D.squaredNorm(); }  // ||V||_{L^1} under the quadrature
};

struct MOperator {
    double lambda = 0;
    Branch branch = Branch::plus;
    VUFactorization vu;
    MatC M;
    double cond = 0;  // 1-norm condition number estimate
};

// M(lambda) = U + D R_0(lambda^4) D on the v-support.
MOperator build_M(const SampledFunction& V, double lambda, Branch b = Branch::plus);
MOperator build_M(const VUFactorization& vu, double lambda, Branch b = Branch::plus);

// M^{-1}(lambda). M = A + B C B^T where A = U + D R_reg D stays bounded as lambda -> 0 and
// B C B^T carries the lambda^-3 and lambda^-1 parts of the kernel (B = [D, xD, x^2 D]); the inverse
// uses the Woodbury formula, with a direct LU fallback if A itself is ill conditioned.
class MInverse {
public:
    MInverse(const VUFactorization& vu, double lambda, Branch b = Branch::plus);

    double lambda() const { return lambda_; }
    int size() const { return m_; }
    VecC apply(const VecC& y) const;
    VecC apply_adjoint(const VecC& y) const;
    MatC dense() const;
    double norm() const;            // spectral norm by power iteration
    double smallest_singular() const;  // 1 / ||M^{-1}||
    bool woodbury() const { return woodbury_; }
    // ||M M^{-1} - I||_F / sqrt(m) on the dense inverse.
    double residual(const MatC& M) const;

private:
    double lambda_;
    Branch branch_;
    int m_;
    bool woodbury_ = true;
    Eigen::PartialPivLU<MatC> lu_;
    MatC B_, AiB_, S_, AtiB_;
};

// Dense inverse with the residual check ||M M^-1 - I|| <= 1e-8 cond; throws SingularError naming lambda.
MatC invert_M(const MOperator& m);

// Kernel of R_0 v M^{-1} v on the full grid: (R_V V f)(x_i) = sum_j K(x_i, x_j) f_j q_j.
ComplexKernel perturbed_resolvent_times_V(const SampledFunction& V, double lambda, Branch b = Branch::plus);
// R_V(lambda^4) f = R_0 f - R_0 v M^{-1} v R_0 f on the grid.
VecC apply_perturbed_resolvent(const SampledFunction& V, double lambda, const VecC& f, Branch b = Branch::plus);

struct ProjectionSet {
    MatR P, Q1, Q2, Q20, Q3, T0;
    int rank_Q2 = 0, rank_Q20 = 0, rank_Q3 = 0;
    VecR D, X;
};
ProjectionSet build_projections(const SampledFunction& V, double rank_tol = 1e-8);

// Smallest singular value of M(lambda) under a sequence of grids (n doubling); a collapse with
// refinement signals an eigenvalue lambda^4 of H.
struct SingularityProbe {
    std::vector<int> n;
    std::vector<double> sigma_min;  // relative to ||M||
    double order = 0;               // fitted rate of sigma_min in h
    bool flagged = false;
};
SingularityProbe bs_singularity_probe(double L, const std::vector<int>& ns, double lambda,
                                      const std::function<double(double)>& V);

struct CancellationResult {
    double exponent = 0;
    std::vector<double> lambdas, norms;
};
// Slope of ||Q_alpha v R_0^+(lambda^4) f_lambda|| for the dilated family f_lambda(y) = lambda g(lambda y).
CancellationResult cancellation_exponent(const SampledFunction& V, int alpha, std::vector<double> lambdas = {});

struct ExpansionFit {
    ResonanceKind kind = ResonanceKind::Regular;
    std::vector<double> lambdas;
    std::vector<int> powers;       // fitted powers of lambda (the last one is the remainder column)
    std::vector<MatC> blocks;      // coefficient matrix for each power
    std::vector<double> residual;  // per-lambda relative Frobenius residual of the fit
    double max_residual = 0;
    double leakage = 0;            // ||(I-Q) B (I-Q)|| / ||B|| for the leading block B
    cplx pv = 0;                   // <vhat, B_3 vhat>
    cplx pv_expected = 0;          // -2(1+i)/||V||_1
    bool residual_dominated = false;
    const MatC& block(int power) const;
};
ExpansionFit fit_inverse_expansion(const SampledFunction& V, ResonanceKind kind, std::vector<double> lambdas = {},
                                   double lambda0 = 0.1);

// For second-kind V: D* = 6 <x^3 v, Q3 B_{-1} Q1 x v> - <x^3 v, Q3 B_{-3} Q3 x^3 v> (bilinear), where
// B_k is the fitted lambda^k block of M^{-1}.
cplx d_star_from_fit(const ExpansionFit& fit, const ProjectionSet& proj);

}  // namespace bihar
