// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is independent; a throw inside one marks it
// failed and the remaining criteria still run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "patchopt/app.hpp"
#include "patchopt/curvature.hpp"
#include "patchopt/deconv.hpp"
#include "patchopt/trws.hpp"

using namespace patchopt;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("%s criterion-%d %s\n", ok ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::array<double, 2>> make_data(std::mt19937& rng, int n) {
    std::vector<std::array<double, 2>> d(n);
    for (auto& v : d)
        v = {static_cast<double>(rng() % 1000) / 1000.0,
             static_cast<double>(rng() % 1000) / 1000.0};
    return d;
}

std::vector<std::array<double, 2>> image_data(const GridImage& img,
                                              double mu_fg, double mu_bg) {
    std::vector<std::array<double, 2>> d(img.samples.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double s = img.samples[i];
        d[i] = {(s - mu_bg) * (s - mu_bg), (s - mu_fg) * (s - mu_fg)};
    }
    return d;
}

double window_sum(const Window& w, const PatchCostTable& t) {
    const int s = t.side;
    double sum = 0;
    for (int R = 0; R + s <= w.side; ++R)
        for (int C = 0; C + s <= w.side; ++C) {
            std::uint64_t mask = 0;
            for (int i = 0; i < s; ++i)
                for (int j = 0; j < s; ++j)
                    if (w.pixels[(R + i) * w.side + (C + j)])
                        mask |= std::uint64_t(1) << (i * s + j);
            sum += t.cost_of(mask);
        }
    return sum;
}

// 1. Oracle equivalence on small instances: a sub-1e-9 gap certifies the
// exact brute-force optimum, for the 2x2 segmentation model at three
// regularizer weights and for deconvolution.
void criterion1() {
    auto t0 = Clock::now();
    std::mt19937 rng(101);
    PatchCostTable table = two_by_two_costs();
    int certified = 0, mismatched = 0, total = 0;
    for (int inst = 0; inst < 20; ++inst) {
        auto data = make_data(rng, 16);
        for (double lambda : {0.0, 0.1, 1.0}) {
            SuperGraph sg = build_segmentation_instance(data, 4, 4, lambda, table);
            SolveResult res = run(sg);
            FactorGraph g = segmentation_factor_graph(data, 4, 4, lambda, table);
            auto bf = brute_force_min(g);
            ++total;
            if (res.relative_gap < 1e-9) {
                ++certified;
                // exact equality under the common evaluator
                if (evaluate(g, res.base) != bf.energy) ++mismatched;
            }
        }
        // deconvolution instance on the same grid size
        std::vector<double> truth(16);
        for (double& v : truth) v = rng() % 2;
        std::vector<double> y = mean_blur3(truth, 4, 4);
        for (double& v : y)
            v += (static_cast<double>(rng() % 2001) - 1000.0) / 20000.0;
        DeconvEnergy e = build_deconv_graph(y, 4, 4);
        SolveResult res = run(build_deconv_super(e.graph, 4, 4));
        auto bf = brute_force_min(e.graph);
        ++total;
        if (res.relative_gap < 1e-9) {
            ++certified;
            if (evaluate(e.graph, res.base) != bf.energy) ++mismatched;
        }
    }
    double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "oracle-equivalence certified=%d/%d mismatched=%d time=%.1fs",
                  certified, total, mismatched, secs);
    report(1, mismatched == 0 && certified > 0 && secs < 10.0, buf);
}

// 2. Tight bounds from the lifted energy where the plain pairwise
// formulation of the same energy stays loose.
void criterion2() {
    auto t0 = Clock::now();
    GridImage img = gen_blob(64, 1, 0.0);
    auto data = image_data(img, 1.0, 0.0);
    PatchCostTable table = two_by_two_costs();

    bool tight = true;
    double super_gap_at_1 = 0;
    for (double lambda : {0.01, 0.1, 1.0}) {
        SolveResult res = run(build_segmentation_instance(data, 64, 64, lambda, table));
        if (!(res.relative_gap < 1e-6)) tight = false;
        if (lambda == 1.0) super_gap_at_1 = res.relative_gap;
    }
    FactorGraph pg = two_by_two_pairwise_graph(data, 64, 64, 1.0);
    PairwiseSolveResult pr = run_pairwise(pg);
    double pair_gap = (pr.energy - pr.lower_bound) /
                      std::max(std::fabs(pr.lower_bound), 1e-12);
    double secs = seconds_since(t0);
    bool contrast = pair_gap >= 10.0 * std::max(super_gap_at_1, 1e-12);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "tight-bounds super_gap(lambda=1)=%.3g pairwise_gap=%.3g time=%.1fs",
                  super_gap_at_1, pair_gap, secs);
    report(2, tight && contrast && secs < 60.0, buf);
}

// 3. Deconvolution on a seeded 30x30 blur+noise instance: near-zero gap
// and a reconstruction at least as good as the ground truth on data cost.
void criterion3() {
    auto t0 = Clock::now();
    GridImage blob = gen_blob(30, 5, 0.0);
    std::vector<double> truth = blob.samples;
    std::vector<double> y = mean_blur3(truth, 30, 30);
    std::mt19937 rng(99);
    for (double& v : y) {
        double u1 = std::max(static_cast<double>(rng()) / 4294967296.0, 1e-12);
        double u2 = static_cast<double>(rng()) / 4294967296.0;
        v += 0.1 * std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * kPi * u2);
    }
    DeconvEnergy e = build_deconv_graph(y, 30, 30);
    SolveResult res = run(build_deconv_super(e.graph, 30, 30));
    std::vector<int> truth_int(truth.begin(), truth.end());
    double rec_cost = deconv_data_cost(y, res.base.values, 30, 30);
    double truth_cost = deconv_data_cost(y, truth_int, 30, 30);
    double secs = seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "deconv gap=%.3g data_cost=%.4g truth_cost=%.4g time=%.1fs",
                  res.relative_gap, rec_cost, truth_cost, secs);
    report(3, res.relative_gap < 1e-6 && rec_cost <= truth_cost + 1e-9 &&
                  secs < 60.0,
           buf);
}

// 4. Direction bias on a disc: the 2x2 model produces axis-aligned
// boundaries; the 3x3 model allows multiples of pi/4 only.
void criterion4() {
    auto t0 = Clock::now();
    GridImage img = gen_circle(81, 30);
    auto data = image_data(img, 1.0, 0.0);

    SolveResult r2 = run(build_segmentation_instance(data, 81, 81, 20.0,
                                                     two_by_two_costs()));
    std::vector<std::uint8_t> seg2(r2.base.values.begin(), r2.base.values.end());
    BoundaryHistogram h2 = boundary_direction_histogram(seg2, 81, 81);
    double axis_frac =
        h2.total ? static_cast<double>(h2.axis) / h2.total : 0.0;

    PatchCostTable t3 =
        solve_patch_costs(assemble_constraints(canonical_windows(), 3), 7);
    SolveResult r3 = run(build_segmentation_instance(data, 81, 81, 20.0, t3));
    std::vector<std::uint8_t> seg3(r3.base.values.begin(), r3.base.values.end());
    BoundaryHistogram h3 = boundary_direction_histogram(seg3, 81, 81);
    double other_frac =
        h3.total ? static_cast<double>(h3.other) / h3.total : 1.0;

    double secs = seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "direction-bias axis_frac(2x2)=%.3f other_frac(3x3)=%.3f time=%.1fs",
                  axis_frac, other_frac, secs);
    report(4, axis_frac >= 0.95 && other_frac < 0.05 && h2.total > 0 &&
                  h3.total > 0 && secs < 120.0,
           buf);
}

// 5. The generated 3x3 patch-cost table: label count, window equalities,
// nonnegativity, zero-cost straight lines, and the nine-patch corner sum.
void criterion5() {
    auto wins = canonical_windows();
    PatchCostTable t = solve_patch_costs(assemble_constraints(wins, 3), 7);
    bool count_ok = t.allowed.size() == 122;
    double worst = 0;
    for (const Window& w : wins)
        worst = std::max(worst, std::fabs(window_sum(w, t) - w.curvature));
    bool nonneg = true;
    for (double c : t.costs) nonneg = nonneg && c >= 0.0;
    bool straight_zero = true;
    for (const Window& w : wins)
        if (w.curvature == 0.0 && std::fabs(window_sum(w, t)) > 1e-8)
            straight_zero = false;

    Window corner;
    corner.side = 5;
    for (const char* row : {"01111", "00111", "00011", "11111", "11111"})
        for (int j = 0; j < 5; ++j) corner.pixels.push_back(row[j] == '1');
    double corner_sum = window_sum(corner, t);
    bool corner_ok = std::fabs(corner_sum - 3 * kPi / 4) <= 1e-8;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "patch-costs labels=%zu worst_violation=%.3g corner_sum=%.9f",
                  t.allowed.size(), worst, corner_sum);
    report(5, count_ok && worst <= 1e-8 && nonneg && straight_zero && corner_ok,
           buf);
}

// 6. The grouped message kernel matches the naive restriction-based kernel
// exactly (including infinities) within the linear op budget.
EdgeSide make_edge_side(const std::vector<int>& group_of, int num_groups) {
    EdgeSide s;
    s.group_of_label = group_of;
    s.group_begin.assign(num_groups + 1, 0);
    for (int g : group_of) ++s.group_begin[g + 1];
    for (int g = 0; g < num_groups; ++g) s.group_begin[g + 1] += s.group_begin[g];
    std::vector<int> cursor(s.group_begin.begin(), s.group_begin.end() - 1);
    s.order.resize(group_of.size());
    for (std::size_t i = 0; i < group_of.size(); ++i)
        s.order[cursor[group_of[i]]++] = static_cast<int>(i);
    return s;
}

void criterion6() {
    std::mt19937 rng(606);
    int mismatched = 0;
    long worst_over = 0;
    for (int draw = 0; draw < 10000; ++draw) {
        int la = 1 + static_cast<int>(rng() % 24);
        int lb = 1 + static_cast<int>(rng() % 24);
        int groups = 1 + static_cast<int>(rng() % 6);
        std::vector<int> ga(la), gb(lb);
        for (int& g : ga) g = static_cast<int>(rng() % groups);
        for (int& g : gb) g = static_cast<int>(rng() % groups);
        EdgeSide from = make_edge_side(ga, groups);
        EdgeSide to = make_edge_side(gb, groups);
        std::vector<double> d(la), m_in(la), a(lb), b(lb);
        for (double& v : d)
            v = rng() % 7 == 0 ? kInfiniteCost
                               : static_cast<double>(rng() % 2000) / 100.0 - 10.0;
        for (double& v : m_in)
            v = static_cast<double>(rng() % 2000) / 100.0 - 10.0;
        double gamma = 0.25 + static_cast<double>(rng() % 100) / 100.0;

        std::size_t ops = 0;
        double da = send_message_grouped(d, m_in, gamma, from, to, groups, a, &ops);
        double db = send_message_naive(d, m_in, gamma, from, to, b);
        bool same = da == db;
        for (int x = 0; x < lb; ++x) same = same && a[x] == b[x];
        if (!same) ++mismatched;
        worst_over =
            std::max(worst_over, static_cast<long>(ops) - 4L * (la + lb));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "message-kernel mismatched=%d max_ops_over_budget=%ld",
                  mismatched, worst_over);
    report(6, mismatched == 0 && worst_over <= 0, buf);
}

// 7. Structural invariants: lifting preserves energies, the stride-1 grid
// edge set satisfies the sufficiency condition, lower bounds are monotone,
// split unary weights total 1 per pixel, and PGM images round trip.
void criterion7() {
    auto t0 = Clock::now();
    std::mt19937 rng(707);
    bool preserved = true;
    for (int rep = 0; rep < 30; ++rep) {
        auto data = make_data(rng, 20);
        double lambda = static_cast<double>(rng() % 100) / 50.0;
        FactorGraph g =
            segmentation_factor_graph(data, 5, 4, lambda, two_by_two_costs());
        SuperGraph sg = build_segmentation_instance(data, 5, 4, lambda,
                                                    two_by_two_costs());
        for (int t = 0; t < 40; ++t) {
            Labeling x;
            for (int i = 0; i < 20; ++i) x.values.push_back(rng() % 2);
            auto lifted = lift(sg, x);
            if (!lifted ||
                std::fabs(super_energy(sg, *lifted) - evaluate(g, x)) > 1e-9)
                preserved = false;
        }
    }

    bool sufficient = true;
    for (auto [w, h] : std::vector<std::pair<int, int>>{{4, 4}, {7, 5}, {9, 9}}) {
        auto cover = make_grid_cover(w, h, 2);
        auto edges = select_consistency_edges(cover);
        sufficient = sufficient && verify_edge_sufficiency(cover, edges);
    }

    bool monotone = true, weights_ok = true;
    {
        auto data = make_data(rng, 36);
        SuperGraph sg =
            build_segmentation_instance(data, 6, 6, 0.5, two_by_two_costs());
        SolverOptions opts;
        opts.record_trace = true;
        SolveResult res = run(sg, opts);
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            if (res.trace[i].lower_bound < res.trace[i - 1].lower_bound - 1e-9)
                monotone = false;

        // each pixel's split data-term weights must total 1: with unit data
        // terms (cost 1 per pixel for either label) the lifted energy of any
        // labeling at lambda=0 equals the pixel count
        std::vector<std::array<double, 2>> unit(36, {1.0, 1.0});
        SuperGraph su =
            build_segmentation_instance(unit, 6, 6, 0.0, two_by_two_costs());
        for (int t = 0; t < 20; ++t) {
            Labeling x;
            for (int i = 0; i < 36; ++i) x.values.push_back(rng() % 2);
            auto lifted = lift(su, x);
            if (!lifted || std::fabs(super_energy(su, *lifted) - 36.0) > 1e-9)
                weights_ok = false;
        }
    }

    bool pgm_ok = true;
    {
        GridImage img = gen_blob(24, 3, 0.2);
        std::string path = "acceptance_roundtrip.pgm";
        write_pgm(img, path);
        GridImage back = read_pnm(path);
        std::remove(path.c_str());
        if (back.width != img.width || back.height != img.height) pgm_ok = false;
        for (std::size_t i = 0; i < img.samples.size() && pgm_ok; ++i)
            if (std::fabs(back.samples[i] - img.samples[i]) > 0.5 / 255.0)
                pgm_ok = false;
    }

    double secs = seconds_since(t0);
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "invariants preserve=%d sufficiency=%d monotone=%d "
                  "unit_weights=%d pgm=%d time=%.1fs",
                  preserved, sufficient, monotone, weights_ok, pgm_ok, secs);
    report(7, preserved && sufficient && monotone && weights_ok && pgm_ok &&
                  secs < 120.0,
           buf);
}

}  // namespace

int main() {
    using Fn = void (*)();
    Fn criteria[] = {criterion1, criterion2, criterion3, criterion4,
                     criterion5, criterion6, criterion7};
    for (int i = 0; i < 7; ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            report(i + 1, false, std::string("exception: ") + e.what());
        }
    }
    return failures == 0 ? 0 : 1;
}
