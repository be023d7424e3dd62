#include "bihar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bihar {

Grid make_grid(double L, int n) {
    if (!(L > 0)) throw ConfigError("grid half-width must be positive");
    if (n < 16) throw ConfigError("grid needs at least 16 points");
    if (n % 2 != 0) throw ConfigError("grid point count must be even");
    Grid g;
    g.L = L;
    g.n = n;
    g.h = 2.0 * L / (n - 1);
    g.x.resize(n);
    g.q.setConstant(n, g.h);
    // Fill symmetrically so x_i == -x_{n-1-i} holds bit for bit.
    for (int i = 0; i < n / 2; ++i) {
        double xi = -L + i * g.h;
        g.x[i] = xi;
        g.x[n - 1 - i] = -xi;
    }
    g.q[0] = g.q[n - 1] = 0.5 * g.h;
    return g;
}

SampledFunction::SampledFunction(Grid g, VecC v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.n) throw ConfigError("sample count does not match grid");
    if (!values.allFinite()) throw ConfigError("non-finite sample");
}

SampledFunction SampledFunction::from(const Grid& g, const std::function<cplx(double)>& f) {
    VecC v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.x[i]);
    return {g, v};
}

SampledFunction SampledFunction::real(const Grid& g, const std::function<double(double)>& f) {
    VecC v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.x[i]);
    return {g, v};
}

VecR indicator(const Grid& g, double a, double b) {
    VecR v(g.n);
    for (int i = 0; i < g.n; ++i) {
        double lo = std::max(a, g.x[i] - g.h / 2), hi = std::min(b, g.x[i] + g.h / 2);
        v[i] = std::max(0.0, hi - lo) / g.h;
    }
    return v;
}

WeightSpec WeightSpec::samples(VecR w) {
    if ((w.array() <= 0).any()) throw ConfigError("custom weight samples must be strictly positive");
    WeightSpec s;
    s.kind = Kind::custom;
    s.custom = std::move(w);
    return s;
}

VecR WeightSpec::on(const Grid& g) const {
    VecR w(g.n);
    switch (kind) {
        case Kind::unit: w.setOnes(); break;
        case Kind::power:
            for (int i = 0; i < g.n; ++i) {
                double ax = std::abs(g.x[i]);
                if (ax == 0) ax = g.h / 2;
                w[i] = std::pow(ax, a);
            }
            break;
        case Kind::japanese:
            for (int i = 0; i < g.n; ++i) w[i] = std::pow(1.0 + g.x[i] * g.x[i], a / 2);
            break;
        case Kind::custom:
            if (custom.size() != g.n) throw ConfigError("custom weight length does not match grid");
            w = custom;
            break;
    }
    return w;
}

bool WeightSpec::even_flag(const Grid& g) const {
    VecR w = on(g);
    for (int i = 0; i < g.n / 2; ++i)
        if (std::abs(w[i] - w[g.n - 1 - i]) > 1e-14 * std::abs(w[i])) return false;
    return true;
}

double lp_norm(const Grid& g, const VecC& f, double p, const WeightSpec& w) {
    if (!(p >= 1)) throw ConfigError("p must lie in [1, inf]");
    if (std::isinf(p)) return f.cwiseAbs().maxCoeff();
    VecR wv = w.on(g);
    double s = 0;
    for (int i = 0; i < g.n; ++i) s += std::pow(std::abs(f[i]), p) * wv[i] * g.q[i];
    return std::pow(s, 1.0 / p);
}

double lp_norm(const SampledFunction& f, double p, const WeightSpec& w) {
    return lp_norm(f.grid, f.values, p, w);
}

double weak_l1(const SampledFunction& f, const WeightSpec& w) {
    const Grid& g = f.grid;
    VecR a = f.values.cwiseAbs();
    VecR wv = w.on(g);
    std::vector<double> levels(a.data(), a.data() + a.size());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double best = 0;
    for (double lam : levels) {
        if (lam <= 0) continue;
        double mu = 0;
        for (int i = 0; i + 1 < g.n; ++i) {
            double fa = a[i], fb = a[i + 1];
            double t0, t1;
            if (fa >= lam && fb >= lam) {
                t0 = 0; t1 = 1;
            } else if (fa < lam && fb < lam) {
                continue;
            } else {
                double ts = (lam - fa) / (fb - fa);
                if (fa >= lam) { t0 = 0; t1 = ts; } else { t0 = ts; t1 = 1; }
            }
            double w0 = wv[i] + t0 * (wv[i + 1] - wv[i]);
            double w1 = wv[i] + t1 * (wv[i + 1] - wv[i]);
            mu += g.h * (t1 - t0) * 0.5 * (w0 + w1);
        }
        best = std::max(best, lam * mu);
    }
    return best;
}

namespace {

// Interval lengths in cells used by the BMO and A_p sweeps: 2, 4, 8, ... and the whole grid.
std::vector<int> sweep_lengths(int n) {
    std::vector<int> m;
    for (int k = 2; k <= n - 1; k *= 2) m.push_back(k);
    if (m.empty() || m.back() != n - 1) m.push_back(n - 1);
    return m;
}

}  // namespace

double bmo_norm(const SampledFunction& f) {
    const Grid& g = f.grid;
    const VecC& v = f.values;
    const int n = g.n;
    std::vector<cplx> pre(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) pre[i + 1] = pre[i] + 0.5 * (v[i] + v[i + 1]);
    double best = 0;
    for (int m : sweep_lengths(n)) {
        for (int s = 0; s + m <= n - 1; ++s) {
            cplx mean = (pre[s + m] - pre[s]) / double(m);
            double osc = 0;
            double prev = std::abs(v[s] - mean);
            for (int j = s; j < s + m; ++j) {
                double next = std::abs(v[j + 1] - mean);
                osc += 0.5 * (prev + next);
                prev = next;
            }
            best = std::max(best, osc / m);
        }
    }
    return best;
}

ApResult ap_characteristic(const Grid& g, const WeightSpec& ws, double p) {
    if (!(p >= 1) || std::isinf(p)) throw ConfigError("A_p characteristic needs p in [1, inf)");
    VecR w = ws.on(g);
    if ((w.array() <= 0).any()) throw ConfigError("weight must be positive");
    const int n = g.n;
    // Prefix sums of cell averages in units of h, so a unit weight gives averages of exactly 1.
    auto prefix = [&](const VecR& u) {
        std::vector<double> P(n, 0.0);
        for (int i = 0; i + 1 < n; ++i) P[i + 1] = P[i] + 0.5 * (u[i] + u[i + 1]);
        return P;
    };
    std::vector<double> Pw = prefix(w);
    std::vector<double> Ps;
    // Sparse table for max of 1/w when p = 1.
    std::vector<std::vector<double>> table;
    if (p > 1) {
        VecR s = w.array().pow(-1.0 / (p - 1));
        Ps = prefix(s);
    } else {
        table.push_back(std::vector<double>(n));
        for (int i = 0; i < n; ++i) table[0][i] = 1.0 / w[i];
        for (int k = 1; (1 << k) <= n; ++k) {
            const auto& prev = table[k - 1];
            std::vector<double> cur(n - (1 << k) + 1);
            for (int i = 0; i < (int)cur.size(); ++i) cur[i] = std::max(prev[i], prev[i + (1 << (k - 1))]);
            table.push_back(std::move(cur));
        }
    }
    auto range_max = [&](int a, int b) {  // inclusive node range
        int len = b - a + 1, k = 0;
        while ((2 << k) <= len) ++k;
        return std::max(table[k][a], table[k][b - (1 << k) + 1]);
    };

    ApResult res;
    res.value = 0;
    for (int m : sweep_lengths(n)) {
        double sup = 0;
        for (int s = 0; s + m <= n - 1; ++s) {
            double aw = (Pw[s + m] - Pw[s]) / m;
            double val;
            if (p > 1) {
                double as = (Ps[s + m] - Ps[s]) / m;
                val = aw * std::pow(as, p - 1);
            } else {
                val = aw * range_max(s, s + m);
            }
            sup = std::max(sup, val);
        }
        res.level_sups.push_back(sup);
        res.value = std::max(res.value, sup);
    }
    // Growth across the three coarsest levels relative to everything finer signals an
    // exponent outside the admissible range.
    const auto& L = res.level_sups;
    int K = (int)L.size();
    if (K >= 6) {
        double early = *std::max_element(L.begin(), L.end() - 3);
        double late = *std::max_element(L.end() - 3, L.end());
        res.diverged = late > 2.0 * early;
    }
    return res;
}

namespace {

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Atom make_atom(const Grid& g, double x0, double r, std::uint64_t seed) {
    if (!(r >= 2)) throw ConfigError("atom radius must be at least 2");
    if (x0 - r < -g.L || x0 + r > g.L) throw ConfigError("atom support exceeds grid");
    std::mt19937_64 rng(seed);
    int pieces = std::max(2, (int)std::lround(2 * r));
    std::vector<double> vals(pieces);
    for (auto& v : vals) v = 2 * uniform01(rng) - 1;
    Atom a{x0, r, VecR::Zero(g.n)};
    std::vector<int> support;
    double qs = 0;
    for (int i = 0; i < g.n; ++i) {
        double t = g.x[i] - (x0 - r);
        if (t <= 0 || t >= 2 * r) continue;
        int k = std::min(pieces - 1, (int)(t / (2 * r) * pieces));
        a.values[i] = vals[k];
        support.push_back(i);
        qs += g.q[i];
    }
    if (support.empty()) throw ConfigError("atom support contains no grid nodes");
    // Two passes so the rounding left by the first subtraction is removed as well.
    for (int pass = 0; pass < 2; ++pass) {
        double mean = 0;
        for (int i : support) mean += a.values[i] * g.q[i];
        for (int i : support) a.values[i] -= mean / qs;
    }
    a.values /= a.values.cwiseAbs().maxCoeff() * r;
    return a;
}

Atom haar_atom(const Grid& g, double x0, double r) {
    if (!(r >= 2)) throw ConfigError("atom radius must be at least 2");
    if (x0 - r < -g.L || x0 + r > g.L) throw ConfigError("atom support exceeds grid");
    Atom a{x0, r, VecR::Zero(g.n)};
    for (int i = 0; i < g.n; ++i) {
        double t = g.x[i] - x0;
        if (t > -r && t < 0) a.values[i] = 1.0 / (2 * r);
        if (t > 0 && t < r) a.values[i] = -1.0 / (2 * r);
    }
    return a;
}

bool is_valid_atom(const Grid& g, const Atom& a, double C) {
    if (a.values.size() != g.n) return false;
    double l1 = 0, s = 0;
    for (int i = 0; i < g.n; ++i) {
        double v = a.values[i];
        if (v == 0) continue;
        if (g.x[i] <= a.x0 - a.r || g.x[i] >= a.x0 + a.r) return false;
        if (std::abs(v) > C / a.r * (1 + 1e-12)) return false;
        l1 += std::abs(v) * g.h;
        s += v * g.h;
    }
    return std::abs(s) <= 1e-10 * std::max(l1, 1e-300);
}

VecC reflect(const VecC& f) { return f.reverse(); }

SampledFunction reflect(const SampledFunction& f) { return {f.grid, f.values.reverse()}; }

}  // namespace bihar
