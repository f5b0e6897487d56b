#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchopt/errors.hpp"

namespace patchopt {

struct GridImage {
    int width = 0;
    int height = 0;
    std::vector<double> samples;  // row-major, normalized to [0, 1]

    double at(int r, int c) const { return samples[r * width + c]; }
};

// P1/P4 (PBM) and P2/P5 (PGM), maxval <= 65535, '#' comments in headers.
// PBM foreground bits (1) map to sample 1.0. Malformed input throws
// FormatError carrying the byte offset of the problem.
GridImage read_pnm(const std::string& path);

// 8-bit binary PGM (P5), samples clamped to [0, 1] and scaled by 255.
void write_pgm(const GridImage& image, const std::string& path);

// bitmap PBM (P4); sample >= 0.5 writes a 1 bit
void write_pbm(const GridImage& image, const std::string& path);

}  // namespace patchopt
