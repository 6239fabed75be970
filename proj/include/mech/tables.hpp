#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mech::tables {

// Knobs shared by every preset. `scale` shrinks sample counts, grid sizes and
// GA rounds proportionally for quick runs; outputs are a pure function of
// (seed, scale, threads) — reruns are byte-identical.
struct PresetOptions {
    uint64_t seed = 42;
    int threads = 1;
    double scale = 1.0;
};

const std::vector<std::string>& preset_names();

// Renders one named preset as CSV text (header row carries the config hash
// and seed). Throws std::invalid_argument for unknown names.
std::string run_preset(const std::string& name, const PresetOptions& options);

}  // namespace mech::tables
