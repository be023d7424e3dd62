#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bihar/io.hpp"

namespace bihar::cli {

const std::vector<std::string>& commands();

// Every key the command understands, with its default value. ConfigError for an unknown command.
json default_config(const std::string& command);
json default_potential(const std::string& kind);

// Defaults, then the config file (merge patch), then "a.b.c=value" overrides. Values that parse as
// JSON are taken as JSON, anything else as a string. Unknown keys are rejected with ConfigError.
json resolve_config(const std::string& command, const json& file, const std::vector<std::string>& sets = {});
void apply_set(json& cfg, const std::string& assignment);
void validate_config(const json& cfg);

SampledFunction potential_from_config(const json& potential, const Grid& g);
Grid grid_from_config(const json& cfg);

struct Report {
    json doc;       // command, config, config_hash, grid, tolerances, result, pass, files
    bool pass = false;
    std::string text;  // human-readable summary (selftest lines)
};

// Runs a command on a resolved config and writes its artifacts into cfg["output"].
Report run_command(const std::string& command, const json& cfg);

// Full command line: exit 0 on pass, 1 on fail, 2 on configuration or usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bihar::cli
