// railscale command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "railscale/railscale.hpp"

namespace fs = std::filesystem;
using namespace railscale;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_config = 2;

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

struct Emitted {
    std::string name;
    std::string content;
};

void write_outputs(const fs::path& dir, const std::vector<Emitted>& files)
{
    fs::create_directories(dir);
    for (const auto& f : files) {
        text::write_file((dir / f.name).string(), f.content);
    }
}

std::vector<Scheme> parse_scheme_list(const std::vector<std::string>& names)
{
    std::vector<Scheme> out;
    for (const auto& n : names) {
        const auto s = parse_scheme(n);
        if (!s) {
            throw ConfigError("schemes: unknown scheme '" + n + "'");
        }
        out.push_back(*s);
    }
    return out;
}

struct RunArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> profile;
    std::optional<std::size_t> steps;
    std::vector<std::string> schemes;
};

int cmd_run(const RunArgs& a, const fs::path& data_dir)
{
    ConfigOverrides ov;
    ov.seed = a.seed;
    ov.profile = a.profile;
    ov.n_steps = a.steps;
    if (!a.schemes.empty()) {
        ov.schemes = parse_scheme_list(a.schemes);
    }
    const auto loaded = load_config_file(a.config, data_dir, ov);
    const auto report = run(loaded.sim);

    std::vector<Emitted> files;
    for (const auto& s : report.schemes) {
        files.push_back({"steps_" + std::string(to_string(s.scheme)) + ".csv", steps_to_csv(s)});
    }
    files.push_back({"summary.json", summary_json(report).dump(2) + "\n"});

    nlohmann::json listed = nlohmann::json::array();
    for (const auto& f : files) {
        listed.push_back({{"name", f.name}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
    }
    nlohmann::json manifest = {{"config", a.config}, {"output_dir", a.out},
        {"seed", loaded.generated_from ? nlohmann::json(loaded.generated_from->seed) : nlohmann::json()},
        {"profile", loaded.sim.profile.name}, {"files", listed}};
    files.push_back({"manifest.json", manifest.dump(2) + "\n"});
    write_outputs(a.out, files);

    for (const auto& row : compare_schemes(report).rows) {
        std::cout << to_string(row.scheme) << ": " << text::format_double(row.power_reduction_x)
                  << "x\n";
    }
    return exit_ok;
}

struct SweepArgs {
    std::string axis;
    std::optional<double> from;
    std::optional<double> to;
    std::optional<double> step;
    std::optional<std::string> config;
    std::string profile = "tabla";
    std::optional<std::string> curves;
    double load = 0.5;
    std::size_t nodes = 10;
    std::string out;
};

int cmd_sweep(const SweepArgs& a, const fs::path& data_dir)
{
    const auto axis = parse_sweep_axis(a.axis);
    if (!axis) {
        throw ConfigError("axis: expected workload, alpha or beta, got '" + a.axis + "'");
    }
    SweepContext ctx;
    if (a.config) {
        const auto loaded = load_config_file(*a.config, data_dir);
        ctx.profile = loaded.sim.profile;
        ctx.curves = loaded.sim.curves;
        ctx.grid = loaded.sim.grid;
        ctx.weights = loaded.sim.weights;
        ctx.n_nodes = loaded.sim.n_nodes;
        ctx.schemes = loaded.sim.schemes;
    } else {
        ctx.profile = load_named_profile(a.profile, data_dir);
        ctx.curves = a.curves ? std::make_shared<const ResourceCurves>(load_curves_file(*a.curves))
                              : load_default_curves(data_dir);
        ctx.n_nodes = a.nodes;
    }
    ctx.base_load = a.load;
    auto range = default_range(*axis);
    range.from = a.from.value_or(range.from);
    range.to = a.to.value_or(range.to);
    range.step = a.step.value_or(range.step);

    const auto csv = sweep_to_csv(sweep(ctx, *axis, range.values()));
    if (a.out.empty() || a.out == "-") {
        std::cout << csv;
    } else {
        if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
        text::write_file(a.out, csv);
    }
    return exit_ok;
}

int cmd_gen_trace(const GenParams& p, const std::string& out)
{
    const auto g = generate_detailed(p);
    fs::path csv_path(out);
    if (const auto parent = csv_path.parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    text::write_file(csv_path.string(), trace_to_csv(g.trace));
    auto meta_path = csv_path;
    meta_path.replace_extension(".meta.json");
    text::write_file(meta_path.string(), g.trace.meta.dump(2) + "\n");
    std::cout << "wrote " << g.trace.size() << " steps to " << csv_path.string() << " (mean load "
              << text::format_double(std::accumulate(g.trace.loads.begin(), g.trace.loads.end(), 0.0)
                     / static_cast<double>(g.trace.size()))
              << ")\n";
    return exit_ok;
}

int cmd_validate_curves(const std::string& file)
{
    const auto curves = load_curves_file(file);
    std::cout << file << ": ok (v_core nominal " << text::format_double(curves.v_core_nominal())
              << " V, v_bram nominal " << text::format_double(curves.v_bram_nominal())
              << " V, crash " << text::format_double(curves.v_crash()) << " V)\n";
    for (auto c : all_resource_classes) {
        for (auto k : all_curve_kinds) {
            const auto& t = curves.table(c, k);
            std::cout << "  " << to_string(c) << '/' << to_string(k) << ": " << t.points().size()
                      << " points, " << text::format_double(t.min_voltage()) << "-"
                      << text::format_double(t.max_voltage()) << " V\n";
        }
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Workload-aware dual-rail DVFS simulator for multi-FPGA platforms"};
    app.require_subcommand(1);
    std::string data_dir_opt;
    app.add_option("--data-dir", data_dir_opt,
        std::string("Directory with default_curves.csv and profiles/ (default: $") + data_dir_env
            + " or the bundled data)");

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Simulate a workload trace for each scheme");
    run_cmd->add_option("-c,--config", run_args.config, "Run configuration (JSON)")->required();
    run_cmd->add_option("-o,--out", run_args.out, "Output directory")->required();
    run_cmd->add_option("--seed", run_args.seed, "Override the trace generator seed");
    run_cmd->add_option("--profile", run_args.profile, "Override the application profile name");
    run_cmd->add_option("--steps", run_args.steps, "Override the generated trace length");
    run_cmd->add_option("--schemes", run_args.schemes, "Override the scheme list")->delimiter(',');

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Compare schemes along workload, alpha or beta");
    sweep_cmd->add_option("-a,--axis", sweep_args.axis, "workload | alpha | beta")->required();
    sweep_cmd->add_option("--from", sweep_args.from, "First axis value");
    sweep_cmd->add_option("--to", sweep_args.to, "Last axis value");
    sweep_cmd->add_option("--step", sweep_args.step, "Axis step");
    sweep_cmd->add_option("-c,--config", sweep_args.config, "Take profile, curves and grid from a run config");
    sweep_cmd->add_option("--profile", sweep_args.profile, "Bundled profile name");
    sweep_cmd->add_option("--curves", sweep_args.curves, "Characterization CSV");
    sweep_cmd->add_option("--load", sweep_args.load, "Load used on the alpha/beta axes");
    sweep_cmd->add_option("--nodes", sweep_args.nodes, "Node count for power gating");
    sweep_cmd->add_option("-o,--out", sweep_args.out, "Output CSV (default stdout)");

    GenParams gen;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-trace", "Synthesize a self-similar workload trace");
    gen_cmd->add_option("--mean", gen.mean_load, "Mean load fraction");
    gen_cmd->add_option("--hurst", gen.hurst, "Hurst exponent, (0.5, 1]");
    gen_cmd->add_option("--idc", gen.idc, "Index of dispersion for counts");
    gen_cmd->add_option("--lambda", gen.lambda_rate, "Mean arrivals per base interval");
    gen_cmd->add_option("--steps", gen.n_steps, "Trace length");
    gen_cmd->add_option("--seed", gen.seed, "RNG seed");
    gen_cmd->add_option("--tau", gen.tau_s, "Step length in seconds");
    gen_cmd->add_option("-o,--out", gen_out, "Output CSV")->required();

    std::string curves_file;
    auto* val_cmd = app.add_subcommand("validate-curves", "Check a characterization CSV");
    val_cmd->add_option("file", curves_file, "Characterization CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    const fs::path data_dir = data_dir_opt.empty() ? default_data_dir() : fs::path(data_dir_opt);
    try {
        if (run_cmd->parsed()) return cmd_run(run_args, data_dir);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, data_dir);
        if (gen_cmd->parsed()) return cmd_gen_trace(gen, gen_out);
        if (val_cmd->parsed()) return cmd_validate_curves(curves_file);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_runtime;
}
