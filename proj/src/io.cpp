#include "bihar/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bihar {

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os << text;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_matrix(const std::string& path, const MatC& M) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    os.write("BIHARMAT", 8);
    std::int64_t r = M.rows(), c = M.cols();
    os.write(reinterpret_cast<const char*>(&r), 8);
    os.write(reinterpret_cast<const char*>(&c), 8);
    os.write(reinterpret_cast<const char*>(M.data()), std::streamsize(sizeof(cplx) * r * c));
}

MatC read_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "BIHARMAT", 8) != 0) throw ConfigError(path + " is not a matrix container");
    std::int64_t r = 0, c = 0;
    is.read(reinterpret_cast<char*>(&r), 8);
    is.read(reinterpret_cast<char*>(&c), 8);
    if (!is || r < 0 || c < 0) throw ConfigError(path + ": corrupt header");
    MatC M(r, c);
    is.read(reinterpret_cast<char*>(M.data()), std::streamsize(sizeof(cplx) * r * c));
    if (!is) throw ConfigError(path + ": truncated data");
    return M;
}

json grid_json(const Grid& g) { return {{"L", g.L}, {"n", g.n}, {"h", g.h}}; }

json bundle_sidecar(const WaveOperatorBundle& wb) {
    json j;
    j["grid"] = grid_json(wb.grid);
    if (wb.method == WaveOperatorBundle::Method::stationary) {
        j["method"] = "stationary";
        j["quadrature"] = {{"nodes", wb.nodes},
                           {"n_low", wb.quad.n_low},
                           {"n_high", wb.quad.n_high},
                           {"lambda_min", wb.quad.lambda_min},
                           {"lambda0", wb.quad.lambda0},
                           {"lambda_max", wb.quad.lambda_max}};
        j["tail_estimate"] = wb.tail_estimate;
        j["tail_warning"] = wb.tail_warning;
    } else {
        j["method"] = "time_dependent";
        j["times"] = wb.times;
        j["last_change"] = wb.last_change;
        j["converged"] = wb.converged;
    }
    return j;
}

void save_bundle(const std::string& stem, const WaveOperatorBundle& wb) {
    write_matrix(stem + ".W.bin", wb.W);
    write_matrix(stem + ".Wstar.bin", wb.Wstar);
    write_text(stem + ".json", bundle_sidecar(wb).dump(2) + "\n");
}

namespace {

std::ostringstream csv_stream() {
    std::ostringstream os;
    os.precision(17);
    return os;
}

}  // namespace

std::string sampled_csv(const SampledFunction& f) {
    auto os = csv_stream();
    os << "x,re,im\n";
    for (int i = 0; i < f.grid.n; ++i) os << f.grid.x[i] << ',' << f.values[i].real() << ',' << f.values[i].imag() << '\n';
    return os.str();
}

std::string potential_csv(const SampledFunction& V) {
    auto os = csv_stream();
    os << "x,V\n";
    for (int i = 0; i < V.grid.n; ++i) os << V.grid.x[i] << ',' << V.values[i].real() << '\n';
    return os.str();
}

std::string spectrum_csv(const SpectralData& sd) {
    auto os = csv_stream();
    os << "index,eigenvalue,localization\n";
    for (int j = 0; j < sd.eigenvalues.size(); ++j) os << j << ',' << sd.eigenvalues[j] << ',' << sd.localization[j] << '\n';
    return os.str();
}

SampledFunction potential_from_csv(const std::string& text, const Grid& g) {
    std::istringstream is(text);
    std::string line;
    std::vector<std::pair<double, double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, v;
        if (!(ls >> x >> v)) continue;  // header
        rows.push_back({x, v});
    }
    if (rows.size() < 2) throw ConfigError("potential table needs at least two rows");
    std::sort(rows.begin(), rows.end());
    VecC out = VecC::Zero(g.n);
    for (int i = 0; i < g.n; ++i) {
        double x = g.x[i];
        if (x < rows.front().first || x > rows.back().first) continue;
        auto it = std::lower_bound(rows.begin(), rows.end(), std::make_pair(x, -INF));
        if (it == rows.begin()) {
            out[i] = it->second;
            continue;
        }
        auto pr = std::prev(it);
        double t = (x - pr->first) / (it->first - pr->first);
        out[i] = (1 - t) * pr->second + t * it->second;
    }
    return {g, out};
}

}  // namespace bihar
