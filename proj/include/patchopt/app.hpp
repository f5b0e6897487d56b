#pragma once

#include <string>

#include "patchopt/curvature.hpp"
#include "patchopt/pnm.hpp"
#include "patchopt/trws.hpp"

namespace patchopt {

struct RunReport {
    std::string command;
    std::string model;
    unsigned seed = 0;
    double energy = 0;
    double lower_bound = 0;
    double relative_gap = 0;
    int iterations = 0;
    double wall_ms = 0;
    bool consistent = false;
    // optional extras appended as-is (already formatted "key: value" lines)
    std::vector<std::string> extra;
};

// flat "key: value" lines, one per field
void write_report(const RunReport& report, const std::string& path);

// comma-separated trace: header then one line per iteration
void write_trace(const std::vector<TraceEntry>& trace, const std::string& path);

// Disc with integer center ((size-1)/2, (size-1)/2); a pixel is foreground
// iff dx^2 + dy^2 <= radius^2 at its integer coordinates.
GridImage gen_circle(int size, int radius);

// Two seeded filled discs on a size x size canvas plus optional additive
// Gaussian noise (clamped to [0, 1]). noise == 0 gives a binary image.
GridImage gen_blob(int size, unsigned seed, double noise);

// costs.tsv: "# patch_side=s count=N" header then "bitmask<TAB>cost" lines
void write_costs(const PatchCostTable& table, const std::string& path);
PatchCostTable load_costs(const std::string& path);

}  // namespace patchopt
