#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mimo/config.hpp"
#include "mimo/sweep.hpp"
#include "mimo/verify.hpp"

namespace fs = std::filesystem;
using namespace mimo;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

struct CommonFlags {
    std::string problem;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string snr_list;
    std::optional<int> realizations;
    std::string out = "out";
    std::optional<int> max_iter;
    std::optional<double> tol;
    bool full_scale = false;
    bool total_power = false;
    bool no_gp = false;
    bool serial = false;
};

void add_common(CLI::App* app, CommonFlags& f)
{
    app->add_option("--problem", f.problem, "P1..P5, or P8 (alias of P3)");
    app->add_option("--config", f.config, "INI file; flags override it")->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "channel seed");
    app->add_option("--snr-list", f.snr_list, "comma-separated SNR values in dB");
    app->add_option("--realizations", f.realizations, "channel realizations per SNR")->check(CLI::PositiveNumber);
    app->add_option("--out", f.out, "output directory");
    app->add_option("--max-iter", f.max_iter, "outer iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--tol", f.tol, "stop when the objective changes by less than this")->check(CLI::PositiveNumber);
    app->add_flag("--full-scale", f.full_scale, "100 realizations per SNR");
    app->add_flag("--total-power", f.total_power, "replace the caps by a total power constraint");
    app->add_flag("--no-gp", f.no_gp, "skip the power GP and alternate duality transfers only");
    app->add_flag("--serial", f.serial, "run the sweep on one thread");
}

SweepConfig build_config(const CommonFlags& f, const std::string& problem_override = {})
{
    SweepConfig cfg;
    cfg.problem = make_problem(ProblemId::P1);
    if (!f.config.empty()) apply_ini(read_ini_file(f.config), cfg);
    const std::string p = problem_override.empty() ? f.problem : problem_override;
    if (!p.empty()) {
        const bool tp = cfg.problem.total_power;
        cfg.problem = parse_problem(p);
        cfg.problem.total_power = tp;
    }
    if (f.total_power) cfg.problem.total_power = true;
    if (f.seed) cfg.seed = *f.seed;
    if (!f.snr_list.empty()) cfg.snr_db = parse_double_list(f.snr_list);
    if (f.full_scale) cfg.realizations = 100;
    if (f.realizations) cfg.realizations = *f.realizations;
    if (f.max_iter) cfg.solve.max_outer = *f.max_iter;
    if (f.tol) cfg.solve.outer_tol = *f.tol;
    if (f.no_gp) cfg.duality_only = true;
    cfg.system.fill_default_weights();
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot write " + path.string());
    return os;
}

// Solves the sweep and writes aggregate.csv, trace.csv and summary.csv into dir.
std::vector<AggregateRow> run_to(const SweepConfig& cfg, const fs::path& dir, Execution exec)
{
    fs::create_directories(dir);
    const auto runs = run_sweep(cfg, exec);
    const auto rows = aggregate(cfg, runs);
    auto agg = open_out(dir / "aggregate.csv");
    write_aggregate_csv(agg, rows);
    auto trace = open_out(dir / "trace.csv");
    write_trace_csv(trace, runs);
    auto summary = open_out(dir / "summary.csv");
    write_summary_csv(summary, cfg, runs);
    int failures = 0;
    for (const auto& r : runs)
        if (r.result.trace.status == RunStatus::MonotonicityViolation) {
            ++failures;
            std::cerr << "snr " << r.snr_db << " realization " << r.realization << ": "
                      << r.result.trace.diagnostic << '\n';
        }
    std::cout << problem_name(cfg.problem.id) << ": " << runs.size() << " solves, " << failures
              << " monotonicity violations, written to " << dir.string() << '\n';
    return rows;
}

std::vector<std::string> split(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void print_report(const OracleReport& r)
{
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  instances=" << r.instances
              << "  max_deviation=" << format_number(r.max_deviation) << "  tolerance=" << format_number(r.tolerance);
    if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
    std::cout << '\n';
}

int run_verify(const std::vector<std::string>& wanted, std::uint64_t seed)
{
    std::vector<std::uint64_t> seeds(100);
    std::iota(seeds.begin(), seeds.end(), seed);
    auto want = [&](const std::string& name) {
        return wanted.empty() || std::find(wanted.begin(), wanted.end(), "all") != wanted.end() ||
               std::find(wanted.begin(), wanted.end(), name) != wanted.end();
    };
    static const std::vector<std::string> known{"roundtrip", "inequality", "total_power", "structured_inverse",
                                                "fixed_point", "gp", "identity", "monte_carlo", "all"};
    for (const auto& w : wanted)
        if (std::find(known.begin(), known.end(), w) == known.end()) throw InvalidArgument("unknown suite " + w);

    std::vector<OracleReport> reports;
    const std::vector<ProblemId> four{ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P4};
    if (want("roundtrip"))
        for (auto id : four) reports.push_back(duality_roundtrip_suite(make_problem(id), seeds));
    if (want("inequality"))
        for (auto id : {ProblemId::P1, ProblemId::P2})
            reports.push_back(duality_inequality_suite(make_problem(id), seeds));
    if (want("total_power"))
        for (auto id : four) reports.push_back(total_power_suite(make_problem(id, true), seeds));
    if (want("structured_inverse")) reports.push_back(structured_inverse_suite(500, 2, 12, seed));
    if (want("fixed_point")) reports.push_back(fixed_point_suite(1000, seed));
    if (want("gp")) reports.push_back(gp_oracle_suite(50, seed));
    if (want("identity")) reports.push_back(identity_suite(100, seed));
    if (want("monte_carlo")) reports.push_back(monte_carlo_suite(20, 1000000, seed));

    bool ok = true;
    for (const auto& r : reports) {
        print_report(r);
        ok = ok && r.pass;
    }
    return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiuser MIMO transceiver design under per-antenna and per-stream power caps"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags, compare_flags;
    auto* run = app.add_subcommand("run", "solve one problem over the SNR x realization grid");
    add_common(run, run_flags);
    auto* sweep = app.add_subcommand("sweep", "run several problems (default P1-P4) into per-problem folders");
    add_common(sweep, sweep_flags);
    auto* compare = app.add_subcommand("compare", "paired traces without and with the power GP");
    add_common(compare, compare_flags);

    std::string suites;
    std::uint64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "run the oracle suites; exit 1 on any failure");
    verify->add_option("--suite", suites,
                       "comma list: roundtrip, inequality, total_power, structured_inverse, fixed_point, gp, identity, "
                       "monte_carlo, all");
    verify->add_option("--seed", verify_seed, "base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run->parsed()) {
            const SweepConfig cfg = build_config(run_flags);
            run_to(cfg, run_flags.out, run_flags.serial ? Execution::Serial : Execution::Parallel);
        } else if (sweep->parsed()) {
            const auto problems = sweep_flags.problem.empty() ? std::vector<std::string>{"P1", "P2", "P3", "P4"}
                                                               : split(sweep_flags.problem);
            std::vector<AggregateRow> all;
            for (const auto& p : problems) {
                const SweepConfig cfg = build_config(sweep_flags, p);
                const auto rows = run_to(cfg, fs::path(sweep_flags.out) / problem_name(cfg.problem.id),
                                         sweep_flags.serial ? Execution::Serial : Execution::Parallel);
                all.insert(all.end(), rows.begin(), rows.end());
            }
            auto os = open_out(fs::path(sweep_flags.out) / "aggregate.csv");
            write_aggregate_csv(os, all);
        } else if (compare->parsed()) {
            SweepConfig cfg = build_config(compare_flags);
            const Execution exec = compare_flags.serial ? Execution::Serial : Execution::Parallel;
            cfg.duality_only = true;
            const auto a1 = run_sweep(cfg, exec);
            cfg.duality_only = false;
            const auto a2 = run_sweep(cfg, exec);
            fs::create_directories(compare_flags.out);
            auto os = open_out(fs::path(compare_flags.out) / "compare.csv");
            write_compare_csv(os, a1, a2);
            std::cout << "compare: " << a1.size() << " paired runs written to " << compare_flags.out << '\n';
        } else if (verify->parsed()) {
            return run_verify(split(suites), verify_seed);
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kVerifyFailed;
    }
    return kOk;
}
