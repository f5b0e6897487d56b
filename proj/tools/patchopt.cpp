#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "patchopt/app.hpp"
#include "patchopt/deconv.hpp"

namespace {

using namespace patchopt;
using Clock = std::chrono::steady_clock;

std::vector<std::array<double, 2>> data_term(const GridImage& img, double mu_bg,
                                             double mu_fg) {
    std::vector<std::array<double, 2>> d(img.samples.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        double v = img.samples[i];
        d[i] = {(v - mu_bg) * (v - mu_bg), (v - mu_fg) * (v - mu_fg)};
    }
    return d;
}

PatchCostTable model_table(const std::string& model, const std::string& costs_path,
                           unsigned seed, int window_side) {
    if (model == "2x2") return two_by_two_costs();
    if (!costs_path.empty()) {
        PatchCostTable t = load_costs(costs_path);
        int want = model == "3x3" ? 3 : 5;
        if (t.side != want) throw InputError("costs file has wrong patch side");
        return t;
    }
    if (model == "3x3")
        return solve_patch_costs(assemble_constraints(canonical_windows(), 3), seed);
    return solve_patch_costs(
        assemble_constraints(rasterize_windows(window_side), 5), seed);
}

GridImage binary_image(const Labeling& x, int width, int height) {
    GridImage out;
    out.width = width;
    out.height = height;
    out.samples.resize(x.values.size());
    for (std::size_t i = 0; i < x.values.size(); ++i)
        out.samples[i] = x.values[i] ? 1.0 : 0.0;
    return out;
}

std::string joined_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"patch-based discrete energy minimization"};
    app.require_subcommand(1);
    std::string command_echo = joined_args(argc, argv);

    // segment
    auto* seg = app.add_subcommand("segment", "curvature-regularized segmentation");
    std::string seg_input, seg_model = "2x2", seg_costs, seg_out, seg_report,
                seg_trace, seg_algo = "trws";
    double seg_lambda = 1.0, mu_fg = 1.0, mu_bg = 0.0;
    int seg_max_iters = 10000, seg_window_side = 9;
    unsigned seg_seed = 1;
    seg->add_option("--input", seg_input, "input PGM/PBM image")->required();
    seg->add_option("--lambda", seg_lambda, "curvature weight");
    seg->add_option("--model", seg_model)->check(CLI::IsMember({"2x2", "3x3", "5x5"}));
    seg->add_option("--costs", seg_costs, "precomputed costs.tsv");
    seg->add_option("--mu-fg", mu_fg);
    seg->add_option("--mu-bg", mu_bg);
    seg->add_option("--max-iters", seg_max_iters);
    seg->add_option("--seed", seg_seed, "seed for generated cost tables");
    seg->add_option("--window-side", seg_window_side, "5x5 model window side");
    seg->add_option("--algorithm", seg_algo)->check(CLI::IsMember({"trws", "lbp"}));
    seg->add_option("--out", seg_out, "output PBM segmentation");
    seg->add_option("--report", seg_report);
    seg->add_option("--trace", seg_trace);

    // deconv
    auto* dec = app.add_subcommand("deconv", "binary deconvolution");
    std::string dec_input, dec_kernel = "mean3", dec_truth, dec_out, dec_report,
                dec_trace;
    int dec_max_iters = 10000;
    dec->add_option("--input", dec_input, "blurred/noisy PGM")->required();
    dec->add_option("--kernel", dec_kernel)->check(CLI::IsMember({"mean3"}));
    dec->add_option("--truth", dec_truth, "ground-truth binary image");
    dec->add_option("--max-iters", dec_max_iters);
    dec->add_option("--out", dec_out, "output PBM reconstruction");
    dec->add_option("--report", dec_report);
    dec->add_option("--trace", dec_trace);

    // gen
    auto* gen = app.add_subcommand("gen", "synthetic inputs");
    gen->require_subcommand(1);
    auto* gen_circle_cmd = gen->add_subcommand("circle");
    int circle_size = 81, circle_radius = 30;
    std::string circle_out;
    gen_circle_cmd->add_option("--size", circle_size);
    gen_circle_cmd->add_option("--radius", circle_radius);
    gen_circle_cmd->add_option("--out", circle_out)->required();
    auto* gen_blob_cmd = gen->add_subcommand("blob");
    int blob_size = 64;
    unsigned blob_seed = 1;
    double blob_noise = 0.0;
    std::string blob_out;
    gen_blob_cmd->add_option("--size", blob_size);
    gen_blob_cmd->add_option("--seed", blob_seed);
    gen_blob_cmd->add_option("--noise", blob_noise);
    gen_blob_cmd->add_option("--out", blob_out)->required();

    // costs
    auto* costs = app.add_subcommand("costs", "generate a patch cost table");
    std::string costs_model = "3x3", costs_out;
    unsigned costs_seed = 1;
    int costs_window_side = 9;
    costs->add_option("--model", costs_model)->check(CLI::IsMember({"3x3", "5x5"}));
    costs->add_option("--seed", costs_seed);
    costs->add_option("--window-side", costs_window_side);
    costs->add_option("--out", costs_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad command line counts as an input error
    }

    if (seg->parsed()) {
        auto t0 = Clock::now();
        GridImage img = read_pnm(seg_input);
        PatchCostTable table =
            model_table(seg_model, seg_costs, seg_seed, seg_window_side);
        SuperGraph sg = build_segmentation_instance(
            data_term(img, mu_bg, mu_fg), img.width, img.height, seg_lambda, table);
        SolverOptions opts;
        opts.max_iters = seg_max_iters;
        opts.algorithm = seg_algo == "lbp" ? Algorithm::LBP : Algorithm::TRWS;
        SolveResult res = run(sg, opts);
        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (!seg_out.empty())
            write_pbm(binary_image(res.base, img.width, img.height), seg_out);
        if (!seg_trace.empty()) write_trace(res.trace, seg_trace);
        if (!seg_report.empty()) {
            RunReport rep{command_echo, seg_model, seg_seed, res.energy,
                          res.lower_bound, res.relative_gap, res.iterations,
                          ms, res.consistent, {}};
            write_report(rep, seg_report);
        }
        std::cout << "energy " << res.energy << " lower_bound " << res.lower_bound
                  << " relative_gap " << res.relative_gap << "\n";
        return 0;
    }

    if (dec->parsed()) {
        auto t0 = Clock::now();
        GridImage img = read_pnm(dec_input);
        DeconvEnergy energy = build_deconv_graph(img.samples, img.width, img.height);
        SuperGraph sg = build_deconv_super(energy.graph, img.width, img.height);
        SolverOptions opts;
        opts.max_iters = dec_max_iters;
        SolveResult res = run(sg, opts);
        double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        if (!dec_out.empty())
            write_pbm(binary_image(res.base, img.width, img.height), dec_out);
        if (!dec_trace.empty()) write_trace(res.trace, dec_trace);
        RunReport rep{command_echo, "deconv-mean3", 0, res.energy,
                      res.lower_bound, res.relative_gap, res.iterations,
                      ms, res.consistent, {}};
        double data_cost =
            deconv_data_cost(img.samples, res.base.values, img.width, img.height);
        rep.extra.push_back("data_cost: " + std::to_string(data_cost));
        if (!dec_truth.empty()) {
            GridImage truth = read_pnm(dec_truth);
            std::vector<int> tx(truth.samples.size());
            for (std::size_t i = 0; i < tx.size(); ++i)
                tx[i] = truth.samples[i] >= 0.5 ? 1 : 0;
            rep.extra.push_back(
                "truth_data_cost: " +
                std::to_string(deconv_data_cost(img.samples, tx, img.width,
                                                img.height)));
        }
        if (!dec_report.empty()) write_report(rep, dec_report);
        std::cout << "energy " << res.energy << " lower_bound " << res.lower_bound
                  << " relative_gap " << res.relative_gap << " data_cost "
                  << data_cost << "\n";
        return 0;
    }

    if (gen->parsed()) {
        if (gen_circle_cmd->parsed())
            write_pgm(gen_circle(circle_size, circle_radius), circle_out);
        else
            write_pgm(gen_blob(blob_size, blob_seed, blob_noise), blob_out);
        return 0;
    }

    if (costs->parsed()) {
        PatchCostTable table =
            costs_model == "3x3"
                ? solve_patch_costs(assemble_constraints(canonical_windows(), 3),
                                    costs_seed)
                : solve_patch_costs(
                      assemble_constraints(rasterize_windows(costs_window_side), 5),
                      costs_seed);
        write_costs(table, costs_out);
        std::cout << "wrote " << table.allowed.size() << " states to " << costs_out
                  << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const patchopt::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const patchopt::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const patchopt::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const patchopt::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
