// nerf-cert: generate signed-permutation frames, build step-function nets,
// certify NERF bounds for every K, and cross-check against brute force.
//
// Exit codes: 0 success, 2 usage or I/O, 3 oracle budget exceeded,
// 4 invariant violation.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nerf/nerf.hpp"

namespace {

using nerf::Json;
using Clock = std::chrono::steady_clock;

constexpr int exit_usage = 2;
constexpr int exit_infeasible = 3;
constexpr int exit_invariant = 4;

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::size_t dimension = 0;
    std::size_t support = 0;
    double epsilon_sq = 0.0;
    bool no_prune = false;
    unsigned threads = 0;
    std::uint64_t seed = 1;
    std::string frame_path;
    std::string output;
    std::string report_path;
    std::string check_path;
    std::string rule = "combined";
    std::uint64_t budget = 10'000'000;
    std::size_t k_min = 0;
    std::size_t k_max = 0;
    std::uint32_t levels = 0;
    bool quiet = false;
    std::vector<std::string> inputs;
    std::vector<std::string> labels;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate_epsilon(double e2) {
    if (!(e2 > 0.0 && e2 < 1.0))
        throw nerf::Error(nerf::ErrorKind::invalid_config, "--eps-sq must lie in (0,1)");
}

template <class Writer>
void write_output(const std::string& path, Writer&& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw nerf::Error(nerf::ErrorKind::io, "cannot open '" + path + "' for writing");
    writer(out);
    out.close();
    if (!out)
        throw nerf::Error(nerf::ErrorKind::io, "failed writing '" + path + "'");
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw nerf::Error(nerf::ErrorKind::io, "cannot open '" + path + "'");
    return in;
}

nerf::FrameMatrix load_frame(const RunConfig& cfg) {
    if (!cfg.frame_path.empty()) {
        auto in = open_input(cfg.frame_path);
        return nerf::read_frame(in);
    }
    if (cfg.dimension == 0 || cfg.support == 0)
        throw nerf::Error(nerf::ErrorKind::invalid_spec, "give either -f <frame> or -M and -k");
    return nerf::orbit_signed_permutations({cfg.dimension, cfg.support});
}

Json config_echo(const RunConfig& cfg, const std::string& command) {
    Json j;
    j["command"] = command;
    if (!cfg.frame_path.empty())
        j["frame"] = cfg.frame_path;
    else {
        j["M"] = cfg.dimension;
        j["k"] = cfg.support;
    }
    if (cfg.epsilon_sq > 0.0) {
        j["epsilon_sq"] = cfg.epsilon_sq;
        j["epsilon"] = std::sqrt(cfg.epsilon_sq);
    }
    j["pruned"] = !cfg.no_prune;
    j["threads"] = nerf::resolve_threads(cfg.threads);
    j["seed"] = cfg.seed;
    return j;
}

// -------------------------------------------------------------------------- //

int cmd_gen_frame(const RunConfig& cfg) {
    const auto frame = nerf::orbit_signed_permutations({cfg.dimension, cfg.support});
    const auto untf = nerf::verify_untf(frame);
    write_output(cfg.output, [&](std::ostream& out) { nerf::write_frame(out, frame); });
    std::cerr << "N=" << frame.size() << " tight_constant=" << untf.tight_constant
              << " frobenius_defect=" << untf.frobenius_defect << '\n';
    return 0;
}

int cmd_build_net(const RunConfig& cfg) {
    validate_epsilon(cfg.epsilon_sq);
    const auto t0 = Clock::now();
    auto config = cfg.levels ? nerf::NetConfig::with_levels(cfg.dimension, cfg.levels, cfg.epsilon_sq, !cfg.no_prune)
                             : nerf::NetConfig::for_epsilon(cfg.dimension, cfg.epsilon_sq, !cfg.no_prune);
    const nerf::StepNet net(config);
    const auto count = net.count_retained();
    auto report = nerf::net_report(config, count);
    report["pruned"] = config.pruned;
    report["wall_time_s"] = seconds_since(t0);
    write_output(cfg.output, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
    return 0;
}

int cmd_estimate(const RunConfig& cfg) {
    validate_epsilon(cfg.epsilon_sq);
    const auto start = Clock::now();
    Json report;
    report["tool"] = "nerf-cert";
    report["version"] = nerf::version;
    report["config"] = config_echo(cfg, "estimate");
    report["status"] = "running";

    const auto rule = nerf::parse_rule(cfg.rule);
    const auto frame = load_frame(cfg);
    const auto untf = nerf::verify_untf(frame);
    if (!untf.is_unit_norm)
        throw InvariantViolation("frame columns are not unit norm");
    if (rule != nerf::CertificateRule::general && !untf.is_tight)
        throw InvariantViolation("certificate rule '" + cfg.rule + "' needs a tight frame; defect " +
                                 nerf::format_real(untf.frobenius_defect));
    if (!nerf::verify_group_invariance(frame, 100, cfg.seed))
        throw InvariantViolation("frame is not invariant under signed permutations");

    auto t0 = Clock::now();
    auto config = nerf::NetConfig::for_epsilon(frame.dimension(), cfg.epsilon_sq, !cfg.no_prune);
    const nerf::StepNet net(config);
    const double t_net = seconds_since(t0);

    nerf::SweepOptions options;
    options.threads = cfg.threads;
    if (!cfg.quiet)
        options.progress = [](std::uint64_t done, std::uint64_t total) {
            std::cerr << "  " << done << " net points evaluated (index space " << total << ")\n";
        };
    t0 = Clock::now();
    auto table = nerf::sweep_all_K(frame, net, options);
    const double t_sweep = seconds_since(t0);

    t0 = Clock::now();
    table = nerf::certify(std::move(table), rule);
    const auto spanning = nerf::min_spanning_K(table);
    const double t_certify = seconds_since(t0);

    const auto csv = nerf::bounds_csv(table, nerf::bounds_metadata(table, config));
    write_output(cfg.output, [&](std::ostream& out) { nerf::write_csv(out, csv); });

    std::optional<double> condition;
    if (spanning)
        condition = nerf::condition_number_bound(table, *spanning);

    std::cerr << "M=" << frame.dimension() << " N=" << frame.size() << " eps^2=" << cfg.epsilon_sq
              << " eps=" << std::sqrt(cfg.epsilon_sq) << " L=" << config.levels << " delta=" << config.delta << '\n'
              << "net: full=" << config.cardinality().str() << " used=" << table.points_used << '\n';
    if (spanning)
        std::cerr << "min_spanning_K=" << *spanning << " condition_number_bound=" << *condition << '\n';
    else
        std::cerr << "min_spanning_K=none\n";

    if (!cfg.report_path.empty()) {
        report["frame"] = {{"M", frame.dimension()}, {"N", frame.size()}, {"frobenius_defect", untf.frobenius_defect}};
        report["net"] = nerf::net_report(config, table.points_used);
        report["counts"] = {{"net_full", config.cardinality().str()},
                            {"net_used", table.points_used},
                            {"points_skipped", (config.cardinality() - table.points_used).str()}};
        report["timings_s"] = {{"net", t_net}, {"sweep", t_sweep}, {"certify", t_certify}};
        report["wall_time_s"] = seconds_since(start);
        report["certificate"] = cfg.rule;
        report["min_spanning_K"] = spanning ? Json(*spanning) : Json(nullptr);
        report["condition_number_bound"] = condition ? Json(*condition) : Json(nullptr);
        report["bounds_csv"] = cfg.output;
        report["status"] = "complete";
        write_output(cfg.report_path, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
    }
    return 0;
}

int cmd_oracle(const RunConfig& cfg) {
    const auto frame = load_frame(cfg);
    nerf::OracleOptions options;
    options.budget = cfg.budget;
    options.threads = cfg.threads;
    const std::size_t k_min = cfg.k_min ? cfg.k_min : 1;
    const std::size_t k_max = cfg.k_max ? cfg.k_max : frame.size();
    const auto results = nerf::exact_bounds_all_K(frame, options, k_min, k_max);
    Json meta{{"M", frame.dimension()}, {"N", frame.size()}};
    write_output(cfg.output, [&](std::ostream& out) { nerf::write_csv(out, nerf::oracle_csv(results, meta)); });

    if (!cfg.check_path.empty()) {
        auto in = open_input(cfg.check_path);
        const auto bounds = nerf::bounds_from_csv(nerf::read_csv(in));
        const auto violations = nerf::check_sandwich(bounds, results);
        for (const auto& v : violations)
            std::cerr << "sandwich violation at K=" << v.k << ": " << v.what << '\n';
        if (!violations.empty())
            throw InvariantViolation(std::to_string(violations.size()) + " sandwich violation(s)");
        std::cerr << "sandwich verified for K=" << k_min << ".." << k_max << '\n';
    }
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    std::vector<nerf::CsvTable> tables;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
        auto in = open_input(cfg.inputs[i]);
        tables.push_back(nerf::read_csv(in));
        labels.push_back(i < cfg.labels.size() ? cfg.labels[i]
                                               : std::filesystem::path(cfg.inputs[i]).stem().string());
    }
    const auto merged = nerf::merge_on_K(tables, labels);
    write_output(cfg.output, [&](std::ostream& out) { nerf::write_csv(out, merged); });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified bounds on numerically erasure-robust frames"};
    app.set_version_flag("--version", nerf::version);
    app.require_subcommand(1);
    RunConfig cfg;

    auto* gen = app.add_subcommand("gen-frame", "Write the signed-permutation orbit frame of a k-sparse generator");
    gen->add_option("-M", cfg.dimension, "Ambient dimension")->required()->check(CLI::PositiveNumber);
    gen->add_option("-k", cfg.support, "Number of nonzero generator entries")->required()->check(CLI::PositiveNumber);
    gen->add_option("-o,--output", cfg.output, "Frame file (default stdout)");

    auto* net = app.add_subcommand("build-net", "Enumerate the step-function net and report its size");
    net->add_option("-M", cfg.dimension, "Ambient dimension")->required()->check(CLI::PositiveNumber);
    net->add_option("--eps-sq", cfg.epsilon_sq, "epsilon^2 in (0,1)")->required();
    net->add_option("--levels", cfg.levels, "Override the number of levels L");
    net->add_flag("--no-prune", cfg.no_prune, "Keep every step function");
    net->add_option("-o,--output", cfg.output, "JSON report (default stdout)");

    auto* est = app.add_subcommand("estimate", "Certify NERF bounds for every K");
    auto* est_frame = est->add_option("-f,--frame", cfg.frame_path, "Frame file");
    auto* est_m = est->add_option("-M", cfg.dimension, "Ambient dimension (with -k)");
    auto* est_k = est->add_option("-k", cfg.support, "Generator support size (with -M)");
    est_frame->excludes(est_m)->excludes(est_k);
    est_m->needs(est_k);
    est_k->needs(est_m);
    est->add_option("--eps-sq", cfg.epsilon_sq, "epsilon^2 in (0,1)")->required();
    est->add_option("--threads", cfg.threads, "Worker threads (0: NERF_CERT_THREADS or all cores)");
    est->add_option("--seed", cfg.seed, "Seed for the invariance check");
    est->add_option("--rule", cfg.rule, "Certificate: combined, untf or general")
        ->check(CLI::IsMember({"combined", "untf", "general"}));
    est->add_flag("--no-prune", cfg.no_prune, "Sweep the full net");
    est->add_flag("-q,--quiet", cfg.quiet, "No progress output");
    est->add_option("-o,--output", cfg.output, "Bounds CSV (default stdout)");
    est->add_option("--report", cfg.report_path, "JSON run report");

    auto* ora = app.add_subcommand("oracle", "Exact bounds by enumerating every K-subset");
    auto* ora_frame = ora->add_option("-f,--frame", cfg.frame_path, "Frame file");
    auto* ora_m = ora->add_option("-M", cfg.dimension, "Ambient dimension (with -k)");
    auto* ora_k = ora->add_option("-k", cfg.support, "Generator support size (with -M)");
    ora_frame->excludes(ora_m)->excludes(ora_k);
    ora_m->needs(ora_k);
    ora_k->needs(ora_m);
    ora->add_option("--k-min", cfg.k_min, "Smallest K (default 1)");
    ora->add_option("--k-max", cfg.k_max, "Largest K (default N)");
    ora->add_option("--budget", cfg.budget, "Maximum number of subsets");
    ora->add_option("--threads", cfg.threads, "Worker threads (0: NERF_CERT_THREADS or all cores)");
    ora->add_option("--check", cfg.check_path, "Bounds CSV whose intervals must contain the exact values");
    ora->add_option("-o,--output", cfg.output, "Oracle CSV (default stdout)");

    auto* rep = app.add_subcommand("report", "Merge CSV tables on K");
    rep->add_option("-i,--input", cfg.inputs, "CSV files")->required();
    rep->add_option("--label", cfg.labels, "Column prefixes (default: file stems)");
    rep->add_option("-o,--output", cfg.output, "Merged CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*gen)
            return cmd_gen_frame(cfg);
        if (*net)
            return cmd_build_net(cfg);
        if (*est)
            return cmd_estimate(cfg);
        if (*ora)
            return cmd_oracle(cfg);
        if (*rep)
            return cmd_report(cfg);
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return exit_invariant;
    } catch (const nerf::Error& e) {
        std::cerr << e.what() << '\n';
        return e.kind() == nerf::ErrorKind::oracle_infeasible ? exit_infeasible : exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invariant;
    }
    return exit_usage;
}
