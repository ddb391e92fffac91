#pragma once

#include "options.hpp"
#include "output.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cli {

struct Outcome {
    Report report;
    std::vector<std::string> violations;  // invariant failures for --check
    // Extra artifact (e.g. a scaffold file) written next to the report.
    std::string artifact;
    std::string artifact_path;
    // Where the report goes; defaults to --out.
    std::optional<std::string> report_path;
};

struct Command {
    std::string name;
    std::string help;
    std::vector<OptSpec> specs;
    std::function<Outcome(const Options&)> run;
    // Commands like `check` always enforce their invariants.
    bool always_check = false;
};

std::vector<Command> all_commands();

}  // namespace cli
