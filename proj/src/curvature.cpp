#include "patchopt/curvature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace patchopt {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::uint64_t reverse_bits(std::uint64_t v, int n) {
    std::uint64_t out = 0;
    for (int i = 0; i < n; ++i)
        if (v >> i & 1) out |= std::uint64_t(1) << (n - 1 - i);
    return out;
}

double PatchCostTable::cost_of(std::uint64_t mask) const {
    auto it = std::lower_bound(allowed.begin(), allowed.end(), mask);
    if (it == allowed.end() || *it != mask) return kInfiniteCost;
    return costs[it - allowed.begin()];
}

bool PatchCostTable::is_allowed(std::uint64_t mask) const {
    return std::binary_search(allowed.begin(), allowed.end(), mask);
}

PatchCostTable two_by_two_costs() {
    PatchCostTable t;
    t.side = 2;
    t.allowed.resize(16);
    t.costs.resize(16);
    for (std::uint64_t m = 0; m < 16; ++m) {
        t.allowed[m] = m;
        int pc = std::popcount(m);
        double c;
        if (pc == 0 || pc == 4)
            c = 0;  // uniform
        else if (pc == 1 || pc == 3)
            c = kPi / 2;  // single minority pixel: one quarter turn
        else if (m == 0b0110 || m == 0b1001)
            c = 2 * kPi;  // checkerboard diagonal
        else
            c = 0;  // axis-aligned half/half
        t.costs[m] = c;
    }
    return t;
}

namespace {

Window rot90(const Window& w) {  // counterclockwise
    int n = w.side;
    Window out{n, std::vector<std::uint8_t>(n * n), w.curvature};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.pixels[i * n + j] = w.pixels[j * n + (n - 1 - i)];
    return out;
}

Window reflect(const Window& w) {  // horizontal mirror
    int n = w.side;
    Window out{n, std::vector<std::uint8_t>(n * n), w.curvature};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.pixels[i * n + j] = w.pixels[i * n + (n - 1 - j)];
    return out;
}

Window invert(const Window& w) {
    Window out = w;
    for (auto& p : out.pixels) p = 1 - p;
    return out;
}

}  // namespace

std::vector<Window> generate_symmetry_orbit(const Window& w) {
    std::map<std::vector<std::uint8_t>, Window> seen;
    std::vector<Window> stack{w};
    while (!stack.empty()) {
        Window u = std::move(stack.back());
        stack.pop_back();
        if (seen.count(u.pixels)) continue;
        stack.push_back(rot90(u));
        stack.push_back(reflect(u));
        stack.push_back(invert(u));
        seen.emplace(u.pixels, std::move(u));
    }
    std::vector<Window> out;
    out.reserve(seen.size());
    for (auto& [_, win] : seen) out.push_back(std::move(win));
    return out;
}

namespace {

Window make_window(int side, std::initializer_list<const char*> rows,
                   double curvature) {
    Window w{side, {}, curvature};
    for (const char* row : rows)
        for (int j = 0; j < side; ++j) w.pixels.push_back(row[j] == '1');
    return w;
}

// Merge into a mask-keyed set keeping the smallest curvature on collision.
void merge_windows(std::map<std::vector<std::uint8_t>, Window>& acc,
                   std::vector<Window> orbit) {
    for (Window& o : orbit) {
        auto it = acc.find(o.pixels);
        if (it == acc.end())
            acc.emplace(o.pixels, std::move(o));
        else if (o.curvature < it->second.curvature - 1e-9)
            it->second.curvature = o.curvature;
    }
}

std::vector<Window> flatten(std::map<std::vector<std::uint8_t>, Window> acc) {
    std::vector<Window> out;
    out.reserve(acc.size());
    for (auto& [_, w] : acc) out.push_back(std::move(w));
    return out;
}

}  // namespace

std::vector<Window> canonical_windows() {
    // Boundary through the window center turning by the stated angle; the
    // straight-line and single-corner configurations of the pi/4 model.
    const std::vector<Window> reps = {
        make_window(5, {"00000", "00000", "00100", "00110", "00111"}, 3 * kPi / 4),
        make_window(5, {"00000", "00000", "00000", "00011", "00011"}, kPi / 2),
        make_window(5, {"00000", "00000", "00000", "00011", "00111"}, kPi / 4),
        make_window(5, {"00000", "00000", "00000", "11111", "11111"}, 0.0),
        make_window(5, {"00000", "00000", "00100", "01110", "11111"}, kPi / 2),
        make_window(5, {"00000", "00000", "00001", "00011", "00111"}, 0.0),
    };
    std::map<std::vector<std::uint8_t>, Window> acc;
    for (const Window& rep : reps) merge_windows(acc, generate_symmetry_orbit(rep));
    return flatten(std::move(acc));
}

namespace {

// Foreground = strictly left of the directed polyline d1 -> corner -> d2,
// corner at (cx, cy) in centered coordinates (x right, y up).
Window rasterize_polyline(int side, double d1x, double d1y, double d2x,
                          double d2y, double turning) {
    const double cx = 0.5, cy = -0.5, eps = 1e-12;
    double cross = d1x * d2y - d1y * d2x;
    double dot = d1x * d2x + d1y * d2y;
    int half = (side - 1) / 2;
    Window w{side, std::vector<std::uint8_t>(side * side), turning};
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            double dx = (c - half) - cx;
            double dy = (half - r) - cy;
            double s1 = d1x * dy - d1y * dx;
            double s2 = d2x * dy - d2y * dx;
            bool fg;
            if (std::fabs(cross) < eps && dot > 0)
                fg = s1 > eps;  // straight line
            else if (cross > 0)
                fg = s1 > eps && s2 > eps;  // left turn
            else
                fg = s1 > eps || s2 > eps;  // right turn
            w.pixels[r * side + c] = fg;
        }
    }
    return w;
}

}  // namespace

std::vector<Window> rasterize_windows(int window_side, int num_dirs) {
    if (window_side < 3 || window_side % 2 == 0)
        throw InputError("window side must be odd and >= 3");
    std::map<std::vector<std::uint8_t>, Window> acc;
    for (int i = 0; i < num_dirs; ++i) {
        for (int j = 0; j < num_dirs; ++j) {
            double a1 = 2 * kPi * i / num_dirs;
            double a2 = 2 * kPi * j / num_dirs;
            double turn = a2 - a1;
            while (turn > kPi) turn -= 2 * kPi;
            while (turn <= -kPi) turn += 2 * kPi;
            double at = std::fabs(turn);
            if (at > 3 * kPi / 4 + 1e-9) continue;
            Window w = rasterize_polyline(window_side, std::cos(a1), std::sin(a1),
                                          std::cos(a2), std::sin(a2), at);
            bool uniform = std::all_of(w.pixels.begin(), w.pixels.end(),
                                       [&](std::uint8_t p) { return p == w.pixels[0]; });
            if (uniform) continue;
            merge_windows(acc, generate_symmetry_orbit(w));
        }
    }
    return flatten(std::move(acc));
}

ConstraintSystem assemble_constraints(const std::vector<Window>& windows,
                                      int patch_side) {
    const int s = patch_side;
    auto subpatch_masks = [&](const Window& w) {
        std::vector<std::uint64_t> out;
        for (int R = 0; R + s <= w.side; ++R) {
            for (int C = 0; C + s <= w.side; ++C) {
                std::uint64_t mask = 0;
                for (int i = 0; i < s; ++i)
                    for (int j = 0; j < s; ++j)
                        if (w.pixels[(R + i) * w.side + (C + j)])
                            mask |= std::uint64_t(1) << (i * s + j);
                out.push_back(mask);
            }
        }
        return out;
    };

    ConstraintSystem sys;
    sys.patch_side = s;
    for (const Window& w : windows) {
        if (w.side <= s) throw InputError("window no larger than patch");
        for (std::uint64_t m : subpatch_masks(w)) sys.states.push_back(m);
    }
    std::sort(sys.states.begin(), sys.states.end());
    sys.states.erase(std::unique(sys.states.begin(), sys.states.end()),
                     sys.states.end());

    std::map<std::pair<std::vector<std::pair<int, int>>, long long>, ConstraintRow>
        dedup;
    for (const Window& w : windows) {
        std::map<int, int> mult;
        for (std::uint64_t m : subpatch_masks(w)) {
            int idx = static_cast<int>(
                std::lower_bound(sys.states.begin(), sys.states.end(), m) -
                sys.states.begin());
            mult[idx]++;
        }
        ConstraintRow row;
        row.coeffs.assign(mult.begin(), mult.end());
        row.rhs = w.curvature;
        long long key = std::llround(w.curvature * 1e9);
        dedup.try_emplace({row.coeffs, key}, std::move(row));
    }
    for (auto& [_, row] : dedup) sys.rows.push_back(std::move(row));
    return sys;
}

PatchCostTable solve_patch_costs(const ConstraintSystem& system, unsigned seed) {
    const int n = static_cast<int>(system.states.size());

    // Presolve. Zero-rhs rows with positive coefficients force their
    // variables to 0, and singleton rows pin their variable; both cascade
    // and shrink the heavily degenerate simplex input a lot.
    std::vector<double> value(n, -1.0);  // fixed value, or -1 when free
    std::vector<ConstraintRow> rows = system.rows;
    std::vector<char> row_done(rows.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (row_done[r]) continue;
            ConstraintRow& row = rows[r];
            std::vector<std::pair<int, int>> live;
            for (auto [idx, mult] : row.coeffs) {
                if (value[idx] >= 0)
                    row.rhs -= mult * value[idx];
                else
                    live.push_back({idx, mult});
            }
            row.coeffs = std::move(live);
            if (row.coeffs.empty()) {
                if (std::fabs(row.rhs) > 1e-8)
                    throw ModelError("patch-cost system infeasible, certificate row " +
                                     std::to_string(r));
                row_done[r] = 1;
                changed = true;
            } else if (row.rhs < 1e-12) {
                if (row.rhs < -1e-8)
                    throw ModelError("patch-cost system infeasible, certificate row " +
                                     std::to_string(r));
                for (auto [idx, mult] : row.coeffs) value[idx] = 0.0;
                row.coeffs.clear();
                row_done[r] = 1;
                changed = true;
            } else if (row.coeffs.size() == 1) {
                value[row.coeffs[0].first] = row.rhs / row.coeffs[0].second;
                row.coeffs.clear();
                row_done[r] = 1;
                changed = true;
            }
        }
    }

    std::vector<int> free_vars;
    std::vector<int> col_of(n, -1);
    for (int i = 0; i < n; ++i)
        if (value[i] < 0) {
            col_of[i] = static_cast<int>(free_vars.size());
            free_vars.push_back(i);
        }
    std::vector<std::size_t> live_rows;
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (!row_done[r]) live_rows.push_back(r);

    std::mt19937 rng(seed);
    auto objective = [&] { return 0.5 + static_cast<double>(rng()) / 4294967296.0; };
    std::vector<double> obj(n);
    for (double& c : obj) c = objective();  // drawn per state, presolve-independent

    if (!free_vars.empty()) {
        LinearProgram lp;
        lp.num_vars = static_cast<int>(free_vars.size());
        lp.num_rows = static_cast<int>(live_rows.size());
        lp.A.assign(static_cast<std::size_t>(lp.num_rows) * lp.num_vars, 0.0);
        lp.b.resize(lp.num_rows);
        for (int r = 0; r < lp.num_rows; ++r) {
            for (auto [idx, mult] : rows[live_rows[r]].coeffs)
                lp.at(r, col_of[idx]) = mult;
            lp.b[r] = rows[live_rows[r]].rhs;
        }
        lp.c.resize(lp.num_vars);
        for (int j = 0; j < lp.num_vars; ++j) lp.c[j] = obj[free_vars[j]];

        LpResult res = solve_lp(lp);
        if (res.status == LpStatus::Infeasible)
            throw ModelError(
                "patch-cost system infeasible, certificate row " +
                std::to_string(res.certificate_row >= 0
                                   ? static_cast<long>(live_rows[res.certificate_row])
                                   : -1L));
        if (res.status == LpStatus::Unbounded)
            throw ModelError("patch-cost LP unbounded");
        for (int j = 0; j < lp.num_vars; ++j) value[free_vars[j]] = res.x[j];
    }

    PatchCostTable t;
    t.side = system.patch_side;
    t.allowed = system.states;
    t.costs = std::move(value);
    for (double& c : t.costs) {
        if (c < -1e-10) throw ModelError("negative patch cost from LP");
        if (c < 0) c = 0;
    }
    return t;
}

namespace {

struct SortedModel {
    std::vector<std::uint64_t> codes;  // super-node label codes, ascending
    std::vector<std::uint64_t> masks;  // parallel bitmasks
    std::vector<double> costs;
};

SortedModel sort_by_code(const PatchCostTable& table) {
    const int bits = table.side * table.side;
    SortedModel m;
    std::vector<int> order(table.allowed.size());
    m.codes.resize(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<int>(i);
        m.codes[i] = reverse_bits(table.allowed[i], bits);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return m.codes[a] < m.codes[b];
    });
    SortedModel out;
    for (int i : order) {
        out.codes.push_back(m.codes[i]);
        out.masks.push_back(table.allowed[i]);
        out.costs.push_back(table.costs[i]);
    }
    return out;
}

}  // namespace

SuperGraph build_segmentation_instance(
    const std::vector<std::array<double, 2>>& data, int width, int height,
    double lambda, const PatchCostTable& table, bool arc_consistency) {
    if (static_cast<int>(data.size()) != width * height)
        throw InputError("data term size mismatch");
    const int s = table.side;
    PatchCover cover = make_grid_cover(width, height, s);
    SortedModel model = sort_by_code(table);

    std::vector<int> membership(width * height, 0);
    for (const auto& patch : cover.patches)
        for (int v : patch) membership[v]++;

    std::vector<std::vector<std::uint64_t>> labels(cover.patches.size(),
                                                   model.codes);
    std::vector<std::vector<double>> unaries(cover.patches.size());
    for (std::size_t p = 0; p < cover.patches.size(); ++p) {
        const auto& patch = cover.patches[p];
        auto& u = unaries[p];
        u.resize(model.codes.size());
        for (std::size_t li = 0; li < model.codes.size(); ++li) {
            double e = lambda * model.costs[li];
            std::uint64_t mask = model.masks[li];
            for (int t = 0; t < s * s; ++t)
                e += data[patch[t]][mask >> t & 1] / membership[patch[t]];
            u[li] = e;
        }
    }
    SuperGraph sg = build_super_graph_direct(
        width * height, std::vector<int>(width * height, 2), cover,
        std::move(labels), std::move(unaries));
    if (arc_consistency &&
        model.codes.size() < (std::uint64_t(1) << (s * s)))
        apply_arc_consistency(sg);
    return sg;
}

FactorGraph segmentation_factor_graph(
    const std::vector<std::array<double, 2>>& data, int width, int height,
    double lambda, const PatchCostTable& table) {
    if (static_cast<int>(data.size()) != width * height)
        throw InputError("data term size mismatch");
    const int s = table.side;
    FactorGraph g;
    g.num_vars = width * height;
    g.label_counts.assign(g.num_vars, 2);
    for (int i = 0; i < g.num_vars; ++i)
        g.factors.push_back({{i}, {data[i][0], data[i][1]}});
    const int bits = s * s;
    PatchCover cover = make_grid_cover(width, height, s);
    for (const auto& patch : cover.patches) {
        Factor f;
        f.scope = patch;
        f.table.resize(std::uint64_t(1) << bits);
        for (std::uint64_t code = 0; code < f.table.size(); ++code) {
            double c = table.cost_of(reverse_bits(code, bits));
            f.table[code] = is_finite_cost(c) ? lambda * c : kInfiniteCost;
        }
        g.factors.push_back(std::move(f));
    }
    return g;
}

FactorGraph two_by_two_pairwise_graph(
    const std::vector<std::array<double, 2>>& data, int width, int height,
    double lambda) {
    if (static_cast<int>(data.size()) != width * height)
        throw InputError("data term size mismatch");
    FactorGraph g;
    g.num_vars = width * height;
    g.label_counts.assign(g.num_vars, 2);
    for (int i = 0; i < g.num_vars; ++i)
        g.factors.push_back({{i}, {data[i][0], data[i][1]}});

    std::map<std::pair<int, int>, double> w;  // Potts weight per pixel pair
    const double side_w = lambda * kPi / 2, diag_w = -lambda * kPi / 2;
    for (int r = 0; r + 2 <= height; ++r) {
        for (int c = 0; c + 2 <= width; ++c) {
            int tl = r * width + c, tr = tl + 1;
            int bl = tl + width, br = bl + 1;
            w[{tl, tr}] += side_w;
            w[{bl, br}] += side_w;
            w[{tl, bl}] += side_w;
            w[{tr, br}] += side_w;
            w[{tl, br}] += diag_w;
            w[{std::min(tr, bl), std::max(tr, bl)}] += diag_w;
        }
    }
    for (auto [pair, weight] : w)
        g.factors.push_back({{pair.first, pair.second}, {0, weight, weight, 0}});
    return g;
}

namespace {

// Crack boundary tracing: directed unit edges between pixel corners with
// foreground on the right, forming closed loops.
struct CrackEdges {
    // key: corner (r, c) encoded r*(w+1)+c; value: outgoing move list
    std::vector<std::vector<int>> out;  // move: 0=E,1=S,2=W,3=N
    int w1 = 0;
};

constexpr int kDr[4] = {0, 1, 0, -1};
constexpr int kDc[4] = {1, 0, -1, 0};

}  // namespace

BoundaryHistogram boundary_direction_histogram(
    const std::vector<std::uint8_t>& foreground, int width, int height) {
    auto fg = [&](int r, int c) {
        return r >= 0 && r < height && c >= 0 && c < width &&
               foreground[r * width + c] != 0;
    };
    const int w1 = width + 1;
    CrackEdges ce;
    ce.w1 = w1;
    ce.out.assign(static_cast<std::size_t>(height + 1) * w1, {});
    auto add = [&](int r, int c, int move) { ce.out[r * w1 + c].push_back(move); };
    std::size_t num_edges = 0;
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            if (!fg(r, c)) continue;
            if (!fg(r - 1, c)) add(r, c, 0), ++num_edges;          // top: east
            if (!fg(r + 1, c)) add(r + 1, c + 1, 2), ++num_edges;  // bottom: west
            if (!fg(r, c - 1)) add(r + 1, c, 3), ++num_edges;      // left: north
            if (!fg(r, c + 1)) add(r, c + 1, 1), ++num_edges;      // right: south
        }
    }

    BoundaryHistogram hist;
    hist.total = num_edges;
    std::vector<std::vector<int>> loops;
    for (std::size_t start = 0; start < ce.out.size(); ++start) {
        while (!ce.out[start].empty()) {
            std::vector<int> moves;
            std::size_t v = start;
            int prev = -1;
            do {
                auto& lst = ce.out[v];
                // prefer the tightest right turn relative to the previous
                // move so touching regions trace as separate loops
                int pick = 0;
                if (prev >= 0 && lst.size() > 1) {
                    auto turn_rank = [&](int mv) { return ((mv - prev) + 5) % 4; };
                    for (std::size_t k = 1; k < lst.size(); ++k)
                        if (turn_rank(lst[k]) < turn_rank(lst[pick]))
                            pick = static_cast<int>(k);
                }
                int mv = lst[pick];
                lst.erase(lst.begin() + pick);
                moves.push_back(mv);
                int r = static_cast<int>(v) / w1, c = static_cast<int>(v) % w1;
                v = static_cast<std::size_t>(r + kDr[mv]) * w1 + (c + kDc[mv]);
                prev = mv;
            } while (v != start);
            loops.push_back(std::move(moves));
        }
    }

    for (auto& moves : loops) {
        const std::size_t n = moves.size();
        if (n == 0) continue;
        // rotate so the loop starts at the beginning of its longest run
        std::size_t best = 0, best_len = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (moves[i] != moves[(i + n - 1) % n]) {
                std::size_t len = 1;
                while (len < n && moves[(i + len) % n] == moves[i]) ++len;
                if (len > best_len) best_len = len, best = i;
            }
        }
        std::rotate(moves.begin(), moves.begin() + static_cast<long>(best),
                    moves.end());

        // run-length encode
        std::vector<std::pair<int, std::size_t>> runs;
        for (int mv : moves) {
            if (!runs.empty() && runs.back().first == mv)
                runs.back().second++;
            else
                runs.push_back({mv, 1});
        }
        // staircase detection: >= 3 consecutive runs alternating between two
        // perpendicular directions where one direction's runs all have
        // length 1; constant other-length 1 means a 45-degree diagonal
        std::size_t m = runs.size(), i = 0;
        while (i < m) {
            std::size_t j = i + 1;
            while (j < m && runs[j].first != runs[j - 1].first &&
                   (runs[j].first % 2) != (runs[j - 1].first % 2) &&
                   runs[j].first == runs[i + ((j - i) % 2 == 0 ? 0 : 1)].first)
                ++j;
            std::size_t count = j - i;
            if (count >= 3) {
                std::size_t ones_a = 0, ones_b = 0, segs = 0;
                bool const_a = true, const_b = true;
                std::size_t len_a = runs[i].second, len_b = runs[i + 1].second;
                for (std::size_t k = i; k < j; ++k) {
                    segs += runs[k].second;
                    bool is_a = (k - i) % 2 == 0;
                    if (is_a) {
                        if (runs[k].second == 1) ++ones_a;
                        if (runs[k].second != len_a) const_a = false;
                    } else {
                        if (runs[k].second == 1) ++ones_b;
                        if (runs[k].second != len_b) const_b = false;
                    }
                }
                std::size_t na = (count + 1) / 2, nb = count / 2;
                bool a_all_one = ones_a == na, b_all_one = ones_b == nb;
                if (a_all_one && b_all_one)
                    hist.diagonal += segs;
                else if ((a_all_one && const_b) || (b_all_one && const_a))
                    hist.other += segs;
                else
                    hist.axis += segs;  // not a staircase pattern after all
                i = j;
            } else {
                for (std::size_t k = i; k < j; ++k) hist.axis += runs[k].second;
                i = j;
            }
        }
    }
    return hist;
}

}  // namespace patchopt
