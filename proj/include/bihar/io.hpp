#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bihar/grid.hpp"
#include "bihar/spectral.hpp"
#include "bihar/wave_ops.hpp"

namespace bihar {

using json = nlohmann::json;

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

// Binary container: 8-byte magic "BIHARMAT", int64 rows, int64 cols, column-major (re, im) doubles.
void write_matrix(const std::string& path, const MatC& M);
MatC read_matrix(const std::string& path);

json bundle_sidecar(const WaveOperatorBundle& wb);
// Writes <stem>.W.bin, <stem>.Wstar.bin and the <stem>.json sidecar.
void save_bundle(const std::string& stem, const WaveOperatorBundle& wb);

std::string sampled_csv(const SampledFunction& f);   // x,re,im
std::string potential_csv(const SampledFunction& V);  // x,V
std::string spectrum_csv(const SpectralData& sd);     // index,eigenvalue,localization
// Reads an (x, V) table and resamples it on g by linear interpolation (zero outside the table).
SampledFunction potential_from_csv(const std::string& text, const Grid& g);

json grid_json(const Grid& g);

}  // namespace bihar
