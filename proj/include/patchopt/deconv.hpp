#pragma once

#include <vector>

#include "patchopt/supergraph.hpp"

namespace patchopt {

// (K*x)_i = (1/9) * sum of x over the 3x3 neighborhood of i clipped to the
// image; the divisor stays 9 at borders.
std::vector<double> mean_blur3(const std::vector<double>& image, int width,
                               int height);

struct DeconvEnergy {
    FactorGraph graph;     // unary + pairwise expansion of the data term
    double constant = 0;   // sum of y_i^2, so graph energy + constant =
                           // sum_i ((K*x)_i - y_i)^2 for binary x
};

// Quadratic data energy expanded over binary pixels: x_j^2 = x_j gives
// unary coefficients sum_{i: j in N3(i)} (1/81 - (2/9) y_i) and pair
// coefficients (2/81) * #{i : j,l in N3(i)} for distinct j, l.
DeconvEnergy build_deconv_graph(const std::vector<double>& y, int width,
                                int height);

// residual data cost sum_i ((K*x)_i - y_i)^2 for a binary labeling
double deconv_data_cost(const std::vector<double>& y,
                        const std::vector<int>& x, int width, int height);

// Lift with sliding 3x3 patches; every pair coefficient fits in a patch.
SuperGraph build_deconv_super(const FactorGraph& graph, int width, int height);

}  // namespace patchopt
