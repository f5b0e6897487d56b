#include "patchopt/deconv.hpp"

#include <algorithm>
#include <map>

namespace patchopt {

std::vector<double> mean_blur3(const std::vector<double>& image, int width,
                               int height) {
    if (static_cast<int>(image.size()) != width * height)
        throw InputError("image size mismatch");
    std::vector<double> out(image.size(), 0.0);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double s = 0;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
                    s += image[rr * width + cc];
                }
            }
            out[r * width + c] = s / 9.0;
        }
    }
    return out;
}

DeconvEnergy build_deconv_graph(const std::vector<double>& y, int width,
                                int height) {
    if (static_cast<int>(y.size()) != width * height)
        throw InputError("image size mismatch");
    DeconvEnergy out;
    FactorGraph& g = out.graph;
    g.num_vars = width * height;
    g.label_counts.assign(g.num_vars, 2);

    std::vector<double> unary(g.num_vars, 0.0);
    std::map<std::pair<int, int>, double> pair_w;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            int i = r * width + c;
            out.constant += y[i] * y[i];
            std::vector<int> nbh;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
                    nbh.push_back(rr * width + cc);
                }
            for (int j : nbh) unary[j] += 1.0 / 81.0 - (2.0 / 9.0) * y[i];
            for (std::size_t a = 0; a < nbh.size(); ++a)
                for (std::size_t b = a + 1; b < nbh.size(); ++b) {
                    int lo = std::min(nbh[a], nbh[b]);
                    int hi = std::max(nbh[a], nbh[b]);
                    pair_w[{lo, hi}] += 2.0 / 81.0;
                }
        }
    }
    for (int j = 0; j < g.num_vars; ++j)
        g.factors.push_back({{j}, {0.0, unary[j]}});
    for (auto [key, w] : pair_w)
        g.factors.push_back({{key.first, key.second}, {0, 0, 0, w}});
    return out;
}

double deconv_data_cost(const std::vector<double>& y,
                        const std::vector<int>& x, int width, int height) {
    std::vector<double> xd(x.begin(), x.end());
    std::vector<double> blurred = mean_blur3(xd, width, height);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = blurred[i] - y[i];
        s += d * d;
    }
    return s;
}

SuperGraph build_deconv_super(const FactorGraph& graph, int width, int height) {
    return build_super_graph(graph, make_grid_cover(width, height, 3));
}

}  // namespace patchopt
