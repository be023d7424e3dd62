#include "bihar/propagator.hpp"

#include <cmath>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "bihar/numerics.hpp"

namespace bihar {

Evolver::Evolver(SpectralData sd) : sd_(std::move(sd)) {
    std::vector<bool> skip(sd_.eigenvalues.size(), false);
    for (int j : sd_.bound) skip[j] = true;
    for (int j : sd_.embedded) skip[j] = true;
    for (int j = 0; j < int(skip.size()); ++j)
        if (!skip[j]) ac_.push_back(j);
}

VecC Evolver::coefficients(const VecC& f) const {
    VecC c(ac_.size());
    for (std::size_t k = 0; k < ac_.size(); ++k) c[k] = sd_.eigenvectors.col(ac_[k]).cast<cplx>().dot(f);
    return c;
}

VecC Evolver::evolve_coefficients(double t, const VecC& c) const {
    VecC u = VecC::Zero(sd_.grid.n);
    for (std::size_t k = 0; k < ac_.size(); ++k)
        u += std::exp(-I * t * sd_.eigenvalues[ac_[k]]) * c[k] * sd_.eigenvectors.col(ac_[k]).cast<cplx>();
    return u;
}

VecC Evolver::project(const VecC& f) const { return evolve_coefficients(0, coefficients(f)); }

SampledFunction Evolver::evolve(double t, const SampledFunction& f) const {
    return {sd_.grid, evolve_coefficients(t, coefficients(f.values))};
}

SampledFunction evolve(const SampledFunction& V, double t, const SampledFunction& f, BoundaryCondition bc) {
    Evolver ev(eigendecompose(build_hamiltonian(V, bc)));
    return ev.evolve(t, f);
}

bool in_region(double invp, double invq) {
    using boost::multiprecision::cpp_rational;
    if (!(invp >= 0 && invp <= 1 && invq >= 0 && invq <= 1))
        throw DomainError("(1/p, 1/q) must lie in the unit square");
    cpp_rational x(invp), y(invq);
    // below AB: x + 3y <= 2; right of AD: 3x + y >= 2; BC (x = 1) and DC (y = 0) excluded.
    return x + 3 * y <= 2 && 3 * x + y >= 2 && x < 1 && y > 0;
}

namespace {

double q_exponent(double inv) { return inv == 0 ? INF : 1.0 / inv; }

void fit_pairs(DecayScanResult& r) {
    std::vector<double> t = r.times;
    for (auto& p : r.pairs) {
        if (t.size() < 2) {
            r.warnings.push_back("fit window too short");
            continue;
        }
        LineFit f = loglog_fit(t, p.ratios);
        p.exponent = f.slope;
        p.stderr_slope = f.stderr_slope;
        if (p.exponent > 0.01) r.warnings.push_back("growth detected for a scanned pair");
    }
}

std::vector<DecayPair> make_pairs(const std::vector<std::pair<double, double>>& pq) {
    std::vector<DecayPair> out;
    for (auto [ip, iq] : pq) {
        DecayPair d;
        d.inv_p = ip;
        d.inv_q = iq;
        d.expected = -0.25 * (ip - iq);
        d.in_region = in_region(ip, iq);
        out.push_back(d);
    }
    return out;
}

std::vector<double> default_times(const DecayConfig& cfg) {
    return cfg.times.empty() ? geomspace(1, 100, 12) : cfg.times;
}

}  // namespace

std::string DecayScanResult::to_csv() const {
    std::ostringstream os;
    os.precision(10);
    os << "inv_p,inv_q,exponent,stderr,in_region\n";
    for (const auto& p : pairs)
        os << p.inv_p << ',' << p.inv_q << ',' << p.exponent << ',' << p.stderr_slope << ',' << (p.in_region ? 1 : 0)
           << '\n';
    return os.str();
}

namespace {

// Members are dropped for good once more than the threshold of their mass lies in |x| > 0.9 L, so
// neither the clamped walls nor periodic wraparound enter the retained ratios.
DecayScanResult scan_family(const Grid& g, const std::vector<std::pair<double, double>>& pq, const DecayConfig& cfg,
                            const std::vector<VecC>& fam, const std::function<VecC(std::size_t, double)>& evolve) {
    DecayScanResult r;
    r.pairs = make_pairs(pq);
    std::vector<bool> alive(fam.size(), true);
    for (double t : default_times(cfg)) {
        std::vector<VecC> u(fam.size());
        int n_alive = 0;
        for (std::size_t k = 0; k < fam.size(); ++k) {
            if (!alive[k]) continue;
            u[k] = evolve(k, t);
            double edge = 0, tot = u[k].squaredNorm();
            for (int i = 0; i < g.n; ++i)
                if (std::abs(g.x[i]) > 0.9 * g.L) edge += std::norm(u[k][i]);
            if (edge > cfg.boundary_threshold * tot) alive[k] = false;
            else ++n_alive;
        }
        if (n_alive == 0) {
            r.trimmed = true;
            continue;
        }
        r.times.push_back(t);
        r.alive.push_back(n_alive);
        for (auto& p : r.pairs) {
            double best = 0;
            for (std::size_t k = 0; k < fam.size(); ++k)
                if (alive[k])
                    best = std::max(best, lp_norm(g, u[k], q_exponent(p.inv_q)) / lp_norm(g, fam[k], q_exponent(p.inv_p)));
            p.ratios.push_back(best);
        }
    }
    if (r.trimmed) r.warnings.push_back("fit window trimmed: every family member reached the boundary");
    r.window_end = r.times.empty() ? 0 : r.times.back();
    fit_pairs(r);
    return r;
}

std::vector<double> width_ladder(const std::vector<double>& given, int k0) {
    if (!given.empty()) return given;
    std::vector<double> w;
    for (int k = k0; k <= 16; ++k) w.push_back(0.5 * std::pow(2.0, k / 4.0));
    return w;
}

}  // namespace

DecayScanResult decay_scan(const Evolver& ev, const std::vector<std::pair<double, double>>& pq,
                           const DecayConfig& cfg) {
    const Grid& g = ev.spectral().grid;
    std::vector<VecC> fam, coef;
    for (double s : width_ladder(cfg.widths, 0)) {
        VecC f(g.n);
        for (int i = 0; i < g.n; ++i) f[i] = std::exp(-std::pow(g.x[i] - cfg.offset * s, 2) / (2 * s * s));
        fam.push_back(ev.project(f));
        coef.push_back(ev.coefficients(f));
    }
    return scan_family(g, pq, cfg, fam, [&](std::size_t k, double t) { return ev.evolve_coefficients(t, coef[k]); });
}

DecayScanResult decay_scan(const SampledFunction& V, const std::vector<std::pair<double, double>>& pq,
                           const DecayConfig& cfg) {
    if (V.values.cwiseAbs().maxCoeff() > 0)
        return decay_scan(Evolver(eigendecompose(build_hamiltonian(V, BoundaryCondition::clamped))), pq, cfg);
    const Grid& g = V.grid;
    std::vector<SampledFunction> fam;
    std::vector<VecC> vals;
    for (double s : width_ladder(cfg.free_widths, -4)) {
        fam.push_back(SampledFunction::real(g, [s](double x) { return std::exp(-x * x / (2 * s * s)); }));
        vals.push_back(fam.back().values);
    }
    DecayScanResult r =
        scan_family(g, pq, cfg, vals, [&](std::size_t k, double t) { return free_propagator(t, fam[k]).values; });
    r.free_route = true;
    return r;
}

MatC free_multiplier(const Grid& g, const std::function<cplx(double)>& f, const MultiplierOptions& opt) {
    const int n = g.n;
    VecR sym = propagator_symbol(g, opt.symbol);
    VecC c(n);
    for (int k = 0; k < n; ++k) c[k] = f(sym[k]);
    Fft fft(n);
    fft.backward(c);
    MatC M(n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) M(i, k) = c[((i - k) % n + n) % n];
    return M;
}

MultiplierResult spectral_multiplier(const SpectralData& sd, const WaveOperatorBundle& wb,
                                     const std::function<cplx(double)>& f, const MatC& family,
                                     const MultiplierOptions& opt) {
    const Grid& g = sd.grid;
    if (sd.partial) throw ConfigError("multiplier needs the full eigendecomposition");
    if (wb.grid.n != g.n) throw ConfigError("wave operator and spectral data live on different grids");
    MultiplierResult r;
    const int n = g.n;
    VecC fl(n);
    for (int j = 0; j < n; ++j) fl[j] = f(sd.eigenvalues[j]);
    MatC Uc = sd.eigenvectors.cast<cplx>();
    r.route1 = Uc * fl.asDiagonal() * Uc.transpose();
    r.route2 = wb.W * free_multiplier(g, f, opt) * wb.Wstar;
    for (const auto* list : {&sd.bound, &sd.embedded})
        for (int j : *list) r.route2 += fl[j] * Uc.col(j) * Uc.col(j).transpose();
    r.distance = family_distance(g, r.route1, r.route2, family);
    MatC Pac = ac_projector_matrix(sd).cast<cplx>();
    r.wave_error = std::max(family_defect(g, wb.Wstar * wb.W, family),
                            family_distance(g, wb.W * wb.Wstar, Pac, family));
    r.consistent = r.distance <= 3 * r.wave_error || r.distance <= 1e-8;
    return r;
}

double default_eta(double lambda) {
    double u = (lambda - 1.25) / 0.75;
    return std::abs(u) < 1 ? std::exp(1 - 1 / (1 - u * u)) : 0.0;
}

namespace {

double hs_norm(const std::function<cplx(double)>& f, double delta, double s,
               const std::function<double(double)>& eta, int N) {
    const double span = 2.5, dl = span / N;
    VecC v(N);
    for (int k = 0; k < N; ++k) {
        double l = k * dl, e = eta(l);
        v[k] = e == 0 ? cplx(0) : e * f(delta * l);
    }
    Fft fft(N);
    fft.forward(v);
    VecR xi = Fft::frequencies(N, dl);
    double acc = 0;
    for (int m = 0; m < N; ++m) acc += std::pow(1 + xi[m] * xi[m], s) * std::norm(v[m]);
    return std::sqrt(acc * dl / N);
}

std::pair<double, double> mikhlin(const std::function<cplx(double)>& f, int N) {
    std::vector<double> l = geomspace(1e-3, 1e3, N);
    double c0 = 0, c1 = 0;
    for (int k = 0; k < N; ++k) {
        c0 = std::max(c0, std::abs(f(l[k])));
        if (k > 0 && k + 1 < N)
            c1 = std::max(c1, std::abs(f(l[k + 1]) - f(l[k - 1])) / (std::log(l[k + 1]) - std::log(l[k - 1])));
    }
    return {c0, c1};
}

}  // namespace

SymbolCheck hormander_mikhlin_check(const std::function<cplx(double)>& f, double s,
                                    const std::function<double(double)>& eta, int points) {
    if (!(s > 0.5)) throw ConfigError("Sobolev index must exceed 1/2");
    if (points < 16) throw ConfigError("symbol grid too small");
    SymbolCheck r;
    for (int k = -10; k <= 10; ++k) {
        double d = std::pow(2.0, k);
        r.deltas.push_back(d);
        double fine = hs_norm(f, d, s, eta, 2 * points), coarse = hs_norm(f, d, s, eta, points);
        r.hs_norms.push_back(fine);
        r.M = std::max(r.M, fine);
        r.M_coarse = std::max(r.M_coarse, coarse);
    }
    r.hormander_growth = r.M_coarse > 0 ? r.M / r.M_coarse : 1.0;
    r.hormander_pass = std::isfinite(r.M) && r.hormander_growth <= 1.2;
    auto [c0c, c1c] = mikhlin(f, points);
    auto [c0, c1] = mikhlin(f, 2 * points);
    r.C0 = c0;
    r.C1 = c1;
    r.C1_coarse = c1c;
    r.mikhlin_pass = std::isfinite(c0) && std::isfinite(c1) && c1 <= 1.1 * c1c + 1e-12 && c0 <= 1.1 * c0c + 1e-12;
    return r;
}

}  // namespace bihar
