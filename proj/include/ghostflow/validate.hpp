#pragma once

#include "ghostflow/bundle.hpp"
#include "ghostflow/scenario.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ghostflow {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Shared, lazily-computed preset artifacts so the checks do not recompute the
// expensive runs.
class CheckContext {
public:
    struct PresetRun {
        Scenario scenario;
        QuadraticModel model;
        SeriesBundle bundle;
    };
    struct BihamRun {
        Scenario scenario;
        BiHamiltonianPair pair;
        BihamComparison cmp;
    };

    const Scenario& scenario(const std::string& name);
    const PresetRun& run(const std::string& name);  // single-model presets
    const BihamRun& biham();                        // fig7

private:
    std::map<std::string, Scenario> scenarios_;
    std::map<std::string, std::unique_ptr<PresetRun>> runs_;
    std::unique_ptr<BihamRun> biham_;
};

struct Check {
    std::string name;
    std::function<CheckResult(CheckContext&)> fn;
};

// Single registry backing both the CLI `validate` subcommand and the
// acceptance test suite: acceptance criteria first, module invariants after.
const std::vector<Check>& validation_registry();

struct ValidationReport {
    std::vector<CheckResult> results;
    bool all_pass = true;
};

// Runs every check, streams one pass/fail line per check to `progress`, and
// optionally writes a machine-readable JSON summary.
ValidationReport run_validation(std::ostream& progress, const std::string& summary_path = "");

}  // namespace ghostflow
