#include <random>

#include "doctest.h"
#include "patchopt/curvature.hpp"
#include "patchopt/energy.hpp"

using namespace patchopt;

namespace {

FactorGraph random_graph(std::mt19937& rng, int num_vars, int num_factors,
                         int max_labels = 3, int max_arity = 3) {
    FactorGraph g;
    g.num_vars = num_vars;
    for (int i = 0; i < num_vars; ++i)
        g.label_counts.push_back(1 + static_cast<int>(rng() % max_labels));
    for (int f = 0; f < num_factors; ++f) {
        Factor fac;
        int arity = 1 + static_cast<int>(rng() % max_arity);
        std::vector<int> vars(num_vars);
        for (int i = 0; i < num_vars; ++i) vars[i] = i;
        for (int k = 0; k < arity; ++k)
            std::swap(vars[k], vars[k + rng() % (num_vars - k)]);
        fac.scope.assign(vars.begin(), vars.begin() + arity);
        std::sort(fac.scope.begin(), fac.scope.end());
        std::size_t size = 1;
        for (int v : fac.scope) size *= g.label_counts[v];
        fac.table.resize(size);
        for (double& t : fac.table) t = static_cast<double>(rng() % 1000) / 100.0;
        g.factors.push_back(std::move(fac));
    }
    return g;
}

Labeling random_labeling(std::mt19937& rng, const FactorGraph& g) {
    Labeling x;
    for (int i = 0; i < g.num_vars; ++i)
        x.values.push_back(static_cast<int>(rng() % g.label_counts[i]));
    return x;
}

}  // namespace

TEST_CASE("evaluate on an empty factor set is zero") {
    FactorGraph g;
    g.num_vars = 3;
    g.label_counts = {2, 2, 2};
    CHECK(evaluate(g, Labeling{{0, 1, 0}}) == 0.0);
}

TEST_CASE("single 2x2 curvature factor: one pixel set costs pi/2") {
    PatchCostTable t = two_by_two_costs();
    FactorGraph g;
    g.num_vars = 4;
    g.label_counts = {2, 2, 2, 2};
    Factor f;
    f.scope = {0, 1, 2, 3};
    f.table.resize(16);
    for (std::uint64_t code = 0; code < 16; ++code)
        f.table[code] = t.cost_of(reverse_bits(code, 4));
    g.factors.push_back(f);
    for (int bit = 0; bit < 4; ++bit) {
        Labeling x{{0, 0, 0, 0}};
        x.values[bit] = 1;
        CHECK(evaluate(g, x) == doctest::Approx(std::acos(-1.0) / 2).epsilon(1e-12));
    }
    CHECK(evaluate(g, Labeling{{0, 0, 0, 0}}) == 0.0);
    CHECK(evaluate(g, Labeling{{1, 0, 0, 1}}) ==
          doctest::Approx(2 * std::acos(-1.0)).epsilon(1e-12));
}

TEST_CASE("evaluate equals independent per-factor lookups on random graphs") {
    std::mt19937 rng(123);
    for (int rep = 0; rep < 25; ++rep) {
        FactorGraph g = random_graph(rng, 6, 3);
        for (int s = 0; s < 20; ++s) {
            Labeling x = random_labeling(rng, g);
            double expect = 0;
            for (const Factor& f : g.factors) {
                std::vector<int> vals = restrict_to(x, f.scope);
                std::vector<int> rad;
                for (int v : f.scope) rad.push_back(g.label_counts[v]);
                expect += f.table[encode_assignment(vals, rad)];
            }
            CHECK(evaluate(g, x) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluate is additive over single-factor subgraphs") {
    std::mt19937 rng(7);
    FactorGraph g = random_graph(rng, 5, 4);
    Labeling x = random_labeling(rng, g);
    double total = 0;
    for (const Factor& f : g.factors) {
        FactorGraph sub;
        sub.num_vars = g.num_vars;
        sub.label_counts = g.label_counts;
        sub.factors = {f};
        total += evaluate(sub, x);
    }
    CHECK(evaluate(g, x) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("infinite factor entries propagate the sentinel") {
    FactorGraph g;
    g.num_vars = 1;
    g.label_counts = {2};
    g.factors.push_back({{0}, {0.0, kInfiniteCost}});
    CHECK(evaluate(g, Labeling{{1}}) == kInfiniteCost);
    CHECK(evaluate(g, Labeling{{0}}) == 0.0);
}

TEST_CASE("brute force: zero tables give zero energy and all-zero labeling") {
    FactorGraph g;
    g.num_vars = 4;
    g.label_counts = {2, 3, 2, 2};
    g.factors.push_back({{0, 1}, std::vector<double>(6, 0.0)});
    auto res = brute_force_min(g);
    CHECK(res.energy == 0.0);
    CHECK(res.labeling.values == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("brute force bounds 1000 random labelings") {
    std::mt19937 rng(99);
    FactorGraph g = random_graph(rng, 6, 4);
    auto res = brute_force_min(g);
    for (int i = 0; i < 1000; ++i) {
        Labeling x = random_labeling(rng, g);
        CHECK(res.energy <= evaluate(g, x) + 1e-12);
    }
}

TEST_CASE("brute force with lambda=0 segmentation is the per-pixel threshold") {
    std::mt19937 rng(5);
    std::vector<std::array<double, 2>> data(9);
    for (auto& d : data)
        d = {static_cast<double>(rng() % 100) / 100.0,
             static_cast<double>(rng() % 100) / 100.0};
    FactorGraph g = segmentation_factor_graph(data, 3, 3, 0.0, two_by_two_costs());
    auto res = brute_force_min(g);
    for (int i = 0; i < 9; ++i)
        CHECK(res.labeling.values[i] == (data[i][1] < data[i][0] ? 1 : 0));
}

TEST_CASE("brute force capacity cap") {
    FactorGraph g;
    g.num_vars = 30;
    g.label_counts.assign(30, 2);
    CHECK_THROWS_AS(brute_force_min(g), CapacityError);
    CHECK_NOTHROW(brute_force_min(g, std::uint64_t(1) << 31));
}

TEST_CASE("restrict projects in scope order") {
    CHECK(restrict_to(Labeling{{0, 1, 0}}, std::vector<int>{1}) ==
          std::vector<int>{1});
    CHECK(restrict_to(Labeling{{1, 0, 1, 1}}, std::vector<int>{0, 2, 3}) ==
          std::vector<int>{1, 1, 1});
}

TEST_CASE("mixed-radix encode/decode are inverses up to 25 binary digits") {
    std::mt19937 rng(31);
    for (int len = 1; len <= 25; ++len) {
        std::vector<int> rad(len, 2);
        for (int rep = 0; rep < 50; ++rep) {
            std::uint64_t code = (static_cast<std::uint64_t>(rng()) << 32 | rng()) &
                                 ((std::uint64_t(1) << len) - 1);
            std::vector<int> digits = decode_assignment(code, rad);
            CHECK(encode_assignment(digits, rad) == code);
        }
    }
}

TEST_CASE("validate rejects malformed graphs") {
    FactorGraph g;
    g.num_vars = 2;
    g.label_counts = {2, 2};
    g.factors.push_back({{1, 0}, {0, 0, 0, 0}});  // unsorted scope
    CHECK_THROWS_AS(g.validate(), InputError);
    g.factors[0] = {{0, 1}, {0, 0, 0}};  // wrong table size
    CHECK_THROWS_AS(g.validate(), InputError);
    g.factors[0] = {{0, 1}, {0, 0, 0, std::nan("")}};
    CHECK_THROWS_AS(g.validate(), InputError);
    g.factors[0] = {{0, 1}, {0, 0, 0, kInfiniteCost}};
    CHECK_NOTHROW(g.validate());
}
