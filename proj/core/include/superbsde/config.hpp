#pragma once

#include "superbsde/mcsolver.hpp"
#include "superbsde/pde.hpp"
#include "superbsde/problem.hpp"
#include "superbsde/supconv.hpp"

#include <string>

namespace superbsde {

// Loads a problem definition (and optional solver sections) from a JSON
// config file.  Schema violations throw ConfigError naming the offending
// config path ("problem.forward.T", ...).
struct LoadedConfig {
    ProblemSpec problem;
    bool has_pde = false;
    PdeConfig pde;
    bool has_mc = false;
    int mc_paths = 10000;
    int mc_steps = 50;
    RegressionBasis mc_basis;
    bool mc_truncate = false;
    bool has_supconv = false;
    SupConvConfig supconv;
    std::string raw_text;   // original file contents (for digests)
};

LoadedConfig load_config_file(const std::string& path);
LoadedConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

} // namespace superbsde
