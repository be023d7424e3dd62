#include <cmath>
#include <cstring>

#include <fftw3.h>
#include <gsl/gsl_integration.h>

#include "bihar/numerics.hpp"

namespace bihar {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ConfigError("line fit needs at least two matching points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.stderr_slope = std::sqrt(rss / (n - 2) / sxx);
    }
    return f;
}

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
    for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
    return fit_line(lx, ly);
}

std::vector<double> geomspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a * std::pow(b / a, double(i) / (n - 1));
    return v;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * double(i) / (n - 1);
    return v;
}

QuadRule gauss_legendre(int n, double a, double b) {
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
    QuadRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, i, &r.x[i], &r.w[i], t);
    gsl_integration_glfixed_table_free(t);
    return r;
}

QuadRule gauss_legendre_log(int n, double a, double b) {
    QuadRule r = gauss_legendre(n, std::log(a), std::log(b));
    for (int i = 0; i < n; ++i) {
        r.x[i] = std::exp(r.x[i]);
        r.w[i] *= r.x[i];
    }
    return r;
}

struct Fft::Impl {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr, bwd = nullptr;
};

Fft::Fft(int n) : n_(n), impl_(std::make_unique<Impl>()) {
    impl_->buf = fftw_alloc_complex(n);
    // ESTIMATE keeps plans deterministic from run to run.
    impl_->fwd = fftw_plan_dft_1d(n, impl_->buf, impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_1d(n, impl_->buf, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    fftw_destroy_plan(impl_->fwd);
    fftw_destroy_plan(impl_->bwd);
    fftw_free(impl_->buf);
}

void Fft::forward(VecC& v) const {
    std::memcpy(impl_->buf, v.data(), sizeof(fftw_complex) * n_);
    fftw_execute(impl_->fwd);
    std::memcpy(static_cast<void*>(v.data()), impl_->buf, sizeof(fftw_complex) * n_);
}

void Fft::backward(VecC& v) const {
    std::memcpy(impl_->buf, v.data(), sizeof(fftw_complex) * n_);
    fftw_execute(impl_->bwd);
    std::memcpy(static_cast<void*>(v.data()), impl_->buf, sizeof(fftw_complex) * n_);
    v /= double(n_);
}

VecR Fft::frequencies(int n, double h) {
    VecR xi(n);
    for (int k = 0; k < n; ++k) {
        int kk = k < (n + 1) / 2 ? k : k - n;
        xi[k] = 2 * PI * kk / (n * h);
    }
    return xi;
}

}  // namespace bihar
