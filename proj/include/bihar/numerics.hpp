#pragma once

#include <memory>
#include <vector>

#include "bihar/types.hpp"

namespace bihar {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double stderr_slope = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Least-squares slope of log y against log x.
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> geomspace(double a, double b, int n);
std::vector<double> linspace(double a, double b, int n);

struct QuadRule {
    std::vector<double> x, w;
};
QuadRule gauss_legendre(int n, double a, double b);
// Gauss-Legendre in the variable log(lambda), weights include the Jacobian.
QuadRule gauss_legendre_log(int n, double a, double b);

// Largest singular value of a linear map given by its action and the action of its adjoint.
template <class Apply, class ApplyAdj>
double power_norm(int dim, Apply apply, ApplyAdj apply_adj, int max_iter = 300, double tol = 1e-10) {
    VecC v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
    v.normalize();
    double s = 0;
    for (int it = 0; it < max_iter; ++it) {
        VecC u = apply(v);
        VecC w = apply_adj(u);
        double nw = w.norm();
        if (nw == 0) return 0;
        double s_new = std::sqrt(nw);
        v = w / nw;
        if (it > 3 && std::abs(s_new - s) <= tol * s_new) return s_new;
        s = s_new;
    }
    return s;
}

// Thin wrapper over a pair of FFTW plans for complex transforms of fixed length.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return n_; }
    void forward(VecC& v) const;
    // Unnormalized backward transform followed by division by n.
    void backward(VecC& v) const;
    // Angular frequencies 2 pi k / (n h) in FFT order.
    static VecR frequencies(int n, double h);

private:
    struct Impl;
    int n_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace bihar
