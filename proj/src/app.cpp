#include "patchopt/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace patchopt {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

}  // namespace

void write_report(const RunReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "command: " << report.command << "\n";
    out << "model: " << report.model << "\n";
    out << "seed: " << report.seed << "\n";
    out << "energy: " << fmt(report.energy) << "\n";
    out << "lower_bound: " << fmt(report.lower_bound) << "\n";
    out << "relative_gap: " << fmt(report.relative_gap) << "\n";
    out << "iterations: " << report.iterations << "\n";
    out << "wall_ms: " << fmt(report.wall_ms) << "\n";
    out << "consistent: " << (report.consistent ? "true" : "false") << "\n";
    for (const std::string& line : report.extra) out << line << "\n";
}

void write_trace(const std::vector<TraceEntry>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "iter,lower_bound,energy,ms\n";
    for (const TraceEntry& t : trace)
        out << t.iter << "," << fmt(t.lower_bound) << "," << fmt(t.best_energy)
            << "," << fmt(t.ms) << "\n";
}

GridImage gen_circle(int size, int radius) {
    if (size < 8) throw InputError("size must be >= 8");
    GridImage img;
    img.width = img.height = size;
    img.samples.assign(static_cast<std::size_t>(size) * size, 0.0);
    int cx = (size - 1) / 2, cy = (size - 1) / 2;
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            long dx = c - cx, dy = r - cy;
            if (dx * dx + dy * dy <= static_cast<long>(radius) * radius)
                img.samples[r * size + c] = 1.0;
        }
    return img;
}

GridImage gen_blob(int size, unsigned seed, double noise) {
    if (size < 8) throw InputError("size must be >= 8");
    GridImage img;
    img.width = img.height = size;
    img.samples.assign(static_cast<std::size_t>(size) * size, 0.0);

    std::mt19937 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng()) / 4294967296.0; };
    // two discs, kept away from the border, radii scaled with the canvas
    for (int blob = 0; blob < 2; ++blob) {
        double cx = size * (0.25 + 0.5 * uniform());
        double cy = size * (0.25 + 0.5 * uniform());
        double rad = size * (0.12 + 0.13 * uniform());
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) {
                double dx = c - cx, dy = r - cy;
                if (dx * dx + dy * dy <= rad * rad) img.samples[r * size + c] = 1.0;
            }
    }
    if (noise > 0) {
        // Box-Muller, fixed algorithm for cross-platform reproducibility
        for (double& s : img.samples) {
            double u1 = std::max(uniform(), 1e-12), u2 = uniform();
            double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
            s = std::clamp(s + noise * g, 0.0, 1.0);
        }
    }
    return img;
}

void write_costs(const PatchCostTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "# patch_side=" << table.side << " count=" << table.allowed.size()
        << "\n";
    for (std::size_t i = 0; i < table.allowed.size(); ++i)
        out << table.allowed[i] << "\t" << fmt(table.costs[i]) << "\n";
}

PatchCostTable load_costs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw FormatError("empty costs file", 0);
    int side = 0;
    std::size_t count = 0;
    if (std::sscanf(header.c_str(), "# patch_side=%d count=%zu", &side, &count) != 2 ||
        side < 2)
        throw FormatError("bad costs header", 0);
    PatchCostTable t;
    t.side = side;
    long offset = static_cast<long>(header.size()) + 1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        std::uint64_t mask;
        double cost;
        if (std::sscanf(line.c_str(), "%llu\t%lf",
                        reinterpret_cast<unsigned long long*>(&mask), &cost) != 2)
            throw FormatError("bad costs line", offset);
        if (mask >> (side * side))
            throw FormatError("bitmask out of range", offset);
        t.allowed.push_back(mask);
        t.costs.push_back(cost);
        offset += static_cast<long>(line.size()) + 1;
    }
    if (t.allowed.size() != count)
        throw FormatError("row count does not match header", offset);
    if (!std::is_sorted(t.allowed.begin(), t.allowed.end()))
        throw FormatError("bitmasks not ascending", 0);
    return t;
}

}  // namespace patchopt
