// Command-line front end: JSON in, JSON out, deterministic under --seed.
// Exit codes: 0 success, 1 domain or infeasibility errors, 2 malformed input.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "phuber/distribution.hpp"
#include "phuber/fusion.hpp"
#include "phuber/harness.hpp"
#include "phuber/json_io.hpp"
#include "phuber/mapping.hpp"
#include "phuber/verify.hpp"

namespace {

using phuber::io::json;

struct CommonOpts {
    std::string input_path;
    std::string output_path;
    std::uint64_t seed = 0;
    std::int64_t n = 1000;
    double tol = 1e-8;
    int window = 200;
};

json load_input(const CommonOpts& opts) {
    if (opts.input_path.empty()) {
        throw phuber::io::MalformedInputError("missing --input file");
    }
    std::ifstream in(opts.input_path);
    if (!in) {
        throw phuber::io::MalformedInputError("cannot open input file: " + opts.input_path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return phuber::io::parse(buf.str());
}

void emit(const json& j, const CommonOpts& opts) {
    const std::string text = phuber::io::dump(j) + "\n";
    if (opts.output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opts.output_path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + opts.output_path);
    }
    out << text;
}

std::vector<phuber::ViewEstimate> views_from(const json& j) {
    const json& arr = j.contains("views") ? j.at("views") : j;
    if (!arr.is_array() || arr.empty()) {
        throw phuber::io::MalformedInputError("expected a non-empty 'views' array");
    }
    std::vector<phuber::ViewEstimate> views;
    views.reserve(arr.size());
    for (const auto& v : arr) views.push_back(phuber::io::view_from_json(v));
    return views;
}

int run_eval(const CommonOpts& opts) {
    const json in = load_input(opts);
    const phuber::DistParams params = phuber::io::dist_params_from_json(in.at("params"));
    if (!in.contains("points") || !in.at("points").is_array()) {
        throw phuber::io::MalformedInputError("expected a 'points' array");
    }
    json values = json::array();
    for (const auto& p : in.at("points")) {
        values.push_back(phuber::log_pdf(phuber::io::point_from_json(p), params));
    }
    emit({{"log_pdf", values}}, opts);
    return 0;
}

int run_sample(const CommonOpts& opts) {
    const json in = load_input(opts);
    const phuber::DistParams params = phuber::io::dist_params_from_json(in.at("params"));
    const auto pts = phuber::sample(params, opts.n, opts.seed);
    json arr = json::array();
    for (const auto& p : pts) arr.push_back(phuber::io::to_json(p));
    emit({{"samples", arr}}, opts);
    return 0;
}

int run_moments(const CommonOpts& opts) {
    const json in = load_input(opts);
    const phuber::DistParams params = phuber::io::dist_params_from_json(in.at("params"));
    const phuber::Moments m = phuber::moments(params);
    emit({{"mean_proj", {m.mean_proj.x(), m.mean_proj.y()}},
          {"var_proj",
           {{m.var_proj(0, 0), m.var_proj(0, 1)}, {m.var_proj(1, 0), m.var_proj(1, 1)}}},
          {"mean_depth", m.mean_depth},
          {"var_depth", m.var_depth}},
         opts);
    return 0;
}

int run_stats(const CommonOpts& opts, const std::vector<double>& z_range,
              const std::vector<double>& f_range) {
    phuber::DatasetStats stats;
    if (!z_range.empty() || !f_range.empty()) {
        if (z_range.size() != 2 || f_range.size() != 2) {
            throw phuber::io::MalformedInputError("--z-range and --f-range each need two values");
        }
        stats = phuber::stats_from_ranges(z_range[0], z_range[1], f_range[0], f_range[1]);
    } else {
        const json in = load_input(opts);
        if (!in.contains("samples") || !in.at("samples").is_array()) {
            throw phuber::io::MalformedInputError("expected a 'samples' array of [z, f] pairs");
        }
        std::vector<std::pair<double, double>> samples;
        for (const auto& e : in.at("samples")) {
            if (!e.is_array() || e.size() != 2 || !e.at(0).is_number() || !e.at(1).is_number()) {
                throw phuber::io::MalformedInputError("each sample must be [z, f]");
            }
            samples.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
        }
        stats = phuber::compute_stats(samples);
    }
    emit(phuber::io::to_json(stats), opts);
    return 0;
}

int run_fuse(const CommonOpts& opts) {
    const json in = load_input(opts);
    const auto views = views_from(in);
    std::optional<phuber::Point3> init;
    if (in.is_object() && in.contains("init")) {
        init = phuber::io::point_from_json(in.at("init"));
    }
    const phuber::FuseResult r = phuber::fuse(views, init, opts.tol);
    emit({{"v_star", phuber::io::to_json(r.v_star)},
          {"nll", r.nll},
          {"iterations", r.iterations},
          {"converged", r.converged}},
         opts);
    return 0;
}

int run_plane(const CommonOpts& opts) {
    const json in = load_input(opts);
    const auto views = views_from(in);
    const phuber::Plane plane = phuber::io::plane_from_json(in.at("plane"));
    const phuber::PlaneMleResult r = phuber::plane_mle(views, plane, opts.tol);
    emit({{"v_star", phuber::io::to_json(r.v_star)},
          {"nll", r.nll},
          {"iterations", r.iterations},
          {"converged", r.converged}},
         opts);
    return 0;
}

int run_fit(const CommonOpts& opts) {
    const json in = load_input(opts);
    if (!in.contains("samples") || !in.at("samples").is_array()) {
        throw phuber::io::MalformedInputError("expected a 'samples' array of observations");
    }
    std::vector<phuber::NormalizedObservation> samples;
    for (const auto& e : in.at("samples")) {
        samples.push_back(phuber::io::observation_from_json(e));
    }
    std::optional<phuber::RawOutput> init;
    if (in.contains("init")) init = phuber::io::raw_output_from_json(in.at("init"));
    const phuber::FitResult r = phuber::fit_params(samples, init, opts.tol);
    json out = phuber::io::to_json(r.w);
    out["params"] = phuber::io::to_json(r.params);
    out["loss"] = r.loss;
    out["iterations"] = r.iterations;
    out["converged"] = r.converged;
    out["a_at_floor"] = r.a_at_floor;
    emit(out, opts);
    return 0;
}

int run_simulate(const CommonOpts& opts) {
    const json in = load_input(opts);
    phuber::ScenarioConfig config = phuber::io::scenario_from_json(in);
    if (!in.contains("seed")) config.seed = opts.seed;
    const auto views = phuber::simulate_rig(config);
    json arr = json::array();
    for (const auto& v : views) arr.push_back(phuber::io::to_json(v));
    emit({{"views", arr}}, opts);
    return 0;
}

int run_calibrate(const CommonOpts& opts) {
    const json in = load_input(opts);
    if (!in.contains("pairs") || !in.at("pairs").is_array()) {
        throw phuber::io::MalformedInputError("expected a 'pairs' array");
    }
    std::vector<std::pair<double, double>> pairs;
    for (const auto& e : in.at("pairs")) {
        if (!e.is_array() || e.size() != 2 || !e.at(0).is_number() || !e.at(1).is_number()) {
            throw phuber::io::MalformedInputError(
                "each pair must be [predicted_variance, squared_error]");
        }
        pairs.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    }
    emit(phuber::io::to_json(phuber::calibration_curve(pairs, opts.window)), opts);
    return 0;
}

int run_verify(const CommonOpts& opts) {
    const auto reports = phuber::run_verify_suites(opts.seed);
    json arr = json::array();
    bool all = true;
    for (const auto& r : reports) {
        json details = json::array();
        for (const auto& d : r.details) details.push_back(d);
        arr.push_back({{"suite", r.suite}, {"passed", r.passed}, {"details", details}});
        all = all && r.passed;
    }
    emit(arr, opts);
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic 3D position estimation with the projected Huber distribution"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::vector<double> z_range, f_range;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--input", opts.input_path, "input JSON file");
        cmd->add_option("--output", opts.output_path, "output JSON file (default: stdout)");
        cmd->add_option("--seed", opts.seed, "RNG seed");
        cmd->add_option("--n", opts.n, "sample count");
        cmd->add_option("--tol", opts.tol, "solver gradient tolerance");
        cmd->add_option("--window", opts.window, "calibration window length");
        return cmd;
    };

    auto* eval_cmd = add_common(app.add_subcommand("eval", "log-density of points under params"));
    auto* sample_cmd = add_common(app.add_subcommand("sample", "draw samples from params"));
    auto* moments_cmd = add_common(app.add_subcommand("moments", "analytic moments of params"));
    auto* stats_cmd = add_common(app.add_subcommand("stats", "dataset normalization constants"));
    stats_cmd->add_option("--z-range", z_range, "depth range [lo hi] in meters")->expected(2);
    stats_cmd->add_option("--f-range", f_range, "focal range [lo hi] in pixels")->expected(2);
    auto* fuse_cmd = add_common(app.add_subcommand("fuse", "multi-view maximum likelihood fusion"));
    auto* plane_cmd = add_common(app.add_subcommand("plane", "ground-plane constrained MLE"));
    auto* fit_cmd = add_common(app.add_subcommand("fit", "fit parameters to observations"));
    auto* sim_cmd = add_common(app.add_subcommand("simulate", "simulate a camera rig"));
    auto* cal_cmd = add_common(app.add_subcommand("calibrate", "calibration curve from pairs"));
    auto* verify_cmd = add_common(app.add_subcommand("verify", "run the invariant suites"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems count as malformed input
    }

    try {
        if (eval_cmd->parsed()) return run_eval(opts);
        if (sample_cmd->parsed()) return run_sample(opts);
        if (moments_cmd->parsed()) return run_moments(opts);
        if (stats_cmd->parsed()) return run_stats(opts, z_range, f_range);
        if (fuse_cmd->parsed()) return run_fuse(opts);
        if (plane_cmd->parsed()) return run_plane(opts);
        if (fit_cmd->parsed()) return run_fit(opts);
        if (sim_cmd->parsed()) return run_simulate(opts);
        if (cal_cmd->parsed()) return run_calibrate(opts);
        if (verify_cmd->parsed()) return run_verify(opts);
    } catch (const phuber::io::MalformedInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const phuber::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
