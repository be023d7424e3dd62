#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "bihar/io.hpp"

namespace bihar {

struct Check {
    std::string name;
    double value = 0;
    std::string bound;  // human-readable tolerance, e.g. "<= 1e-12" or "in [-0.27, -0.23]"
    bool pass = false;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::vector<Check> checks;
    std::vector<std::string> notes;
    double seconds = 0;  // wall time, kept out of the JSON report

    json to_json() const;
};

struct AcceptanceOptions {
    bool reduced = false;       // fewer random samples; grid sizes pinned by the criteria are kept
    bool inject_fault = false;  // flips the sign of the free-kernel difference used by criterion 1
    std::set<int> only;         // empty = all ten criteria
    std::uint64_t seed = 1;
    std::function<void(const CriterionResult&)> progress;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});
CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});
std::string format_line(const CriterionResult& r);

}  // namespace bihar
