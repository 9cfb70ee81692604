#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "mimo/config.hpp"
#include "mimo/sweep.hpp"

using namespace mimo;
namespace fs = std::filesystem;

namespace {

SweepConfig small_sweep(const std::string& problem)
{
    SweepConfig cfg;
    cfg.problem = parse_problem(problem);
    cfg.snr_db = {0.0, 15.0};
    cfg.realizations = 3;
    cfg.seed = 11;
    return cfg;
}

std::string first_line(const std::string& text)
{
    return text.substr(0, text.find('\n'));
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(MIMO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesSectionsAndComments)
{
    std::istringstream is("# comment\n[system]\nK = 2\nN=4\nM = 2,2\nS = 1, 2 ; trailing\n\n[Sweep]\nsnr_db = 0, 10\n");
    const IniData ini = parse_ini(is);
    EXPECT_EQ(ini.at("system").at("k"), "2");
    EXPECT_EQ(ini.at("system").at("s"), "1, 2");
    EXPECT_EQ(ini.at("sweep").at("snr_db"), "0, 10");
    SweepConfig cfg;
    apply_ini(ini, cfg);
    EXPECT_EQ(cfg.system.S, (std::vector<int>{1, 2}));
    EXPECT_EQ(cfg.system.symbol_weights.size(), 3);
    EXPECT_EQ(cfg.snr_db, (std::vector<double>{0.0, 10.0}));
}

TEST(Config, RejectsUnknownOrMalformed)
{
    auto apply = [](const std::string& text) {
        std::istringstream is(text);
        SweepConfig cfg;
        apply_ini(parse_ini(is), cfg);
        cfg.validate();
    };
    EXPECT_THROW(apply("[system]\nfoo = 1\n"), InvalidArgument);
    EXPECT_THROW(apply("[nowhere]\nk = 1\n"), InvalidArgument);
    EXPECT_THROW(apply("[system]\nK = two\n"), InvalidArgument);
    EXPECT_THROW(apply("[solver]\nproblem = P7\n"), InvalidArgument);
    EXPECT_THROW(apply("[solver]\ngp_step = maybe\n"), InvalidArgument);
    EXPECT_THROW(apply("[sweep]\nrealizations = 0\n"), InvalidArgument);
    EXPECT_THROW(apply("[sweep]\nsnr_db = 1,,2\n"), InvalidArgument);
    EXPECT_THROW(apply("[budget]\nantenna_mw = -1\n"), InvalidArgument);
    EXPECT_THROW(apply("[system\n"), InvalidArgument);
    EXPECT_NO_THROW(apply("[solver]\nproblem = p8\ntotal_power = yes\n"));
}

TEST(Config, ShippedFilesLoad)
{
    for (const char* name : {"reference.ini", "desk.ini"}) {
        SweepConfig cfg;
        apply_ini(read_ini_file(std::string(MIMO_CONFIG_DIR) + "/" + name), cfg);
        EXPECT_NO_THROW(cfg.validate());
        EXPECT_EQ(cfg.system.K, 2);
        EXPECT_EQ(cfg.system.N, 4);
        EXPECT_EQ(cfg.budget.antenna_mw, 2.5);
        EXPECT_EQ(cfg.budget.total_mw, 10.0);
        EXPECT_EQ(cfg.snr_db.size(), 6u);
    }
}

TEST(Sweep, CsvSchemas)
{
    const SweepConfig cfg = small_sweep("P3");
    const auto runs = run_sweep(cfg);
    ASSERT_EQ(runs.size(), 6u);
    std::ostringstream agg, trace, summary, compare;
    write_aggregate_csv(agg, aggregate(cfg, runs));
    write_trace_csv(trace, runs);
    write_summary_csv(summary, cfg, runs);
    write_compare_csv(compare, runs, runs);
    EXPECT_EQ(first_line(agg.str()),
              "problem,snr_db,mean_objective,std_objective,mean_total_power_mw,mean_max_weighted_mse,"
              "mean_outer_iterations,converged_fraction");
    EXPECT_EQ(first_line(trace.str()), "snr_db,realization,outer_iter,objective,total_power_mw,max_weighted_mse,status");
    EXPECT_EQ(first_line(summary.str()),
              "problem,snr_db,sigma_av2_db,realization,status,outer_iterations,objective,spread,epigraph_tight,"
              "max_cap_excess_mw,max_J_norm");
    EXPECT_EQ(first_line(compare.str()), "snr_db,realization,outer_iter,objective_duality_only,objective_with_gp");
    // one aggregate row per SNR, one summary row per run
    const std::string a = agg.str(), s = summary.str();
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 3);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
}

TEST(Sweep, SigmaReportedInDbPerMilliwatt)
{
    const SweepConfig cfg = small_sweep("P1");
    // 10 mW over two users at 10 dB: 0.5 mW
    EXPECT_NEAR(sigma_av2_db(cfg, 10.0), 10.0 * std::log10(0.5), 1e-12);
}

TEST(Sweep, SerialAndParallelAreBitwiseIdentical)
{
    const SweepConfig cfg = small_sweep("P1");
    const auto a = run_sweep(cfg, Execution::Serial);
    const auto b = run_sweep(cfg, Execution::Parallel);
    std::ostringstream sa, sb;
    write_trace_csv(sa, a);
    write_trace_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].result.dl.B == b[i].result.dl.B);
}

TEST(Sweep, RealizationSharesChannelsAcrossSnr)
{
    const SweepConfig cfg = small_sweep("P1");
    const Instance lo = make_instance(cfg, 0.0, 2);
    const Instance hi = make_instance(cfg, 20.0, 2);
    EXPECT_TRUE(lo.ch.H[1] == hi.ch.H[1]);
    EXPECT_GT(std::real(lo.noise.R[0](0, 0)), std::real(hi.noise.R[0](0, 0)));
}

TEST(Cli, ExitCodes)
{
    const fs::path out = fs::temp_directory_path() / "mimo_cli_exit";
    fs::remove_all(out);
    EXPECT_EQ(run_cli("run --problem P9"), 2);
    EXPECT_EQ(run_cli("run --realizations 0"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("verify --suite nonsense"), 2);
    EXPECT_EQ(run_cli("verify --suite identity,structured_inverse"), 0);
    EXPECT_EQ(run_cli("run --problem P2 --snr-list 5 --realizations 2 --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(out / "trace.csv"));
    EXPECT_TRUE(fs::exists(out / "summary.csv"));
}

TEST(Cli, RerunIsByteIdentical)
{
    const fs::path a = fs::temp_directory_path() / "mimo_cli_a";
    const fs::path b = fs::temp_directory_path() / "mimo_cli_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const std::string args = "--config " + std::string(MIMO_CONFIG_DIR) +
                             "/desk.ini --problem P4 --snr-list 0,20 --realizations 2 --seed 5 --out ";
    ASSERT_EQ(run_cli("run " + args + a.string()), 0);
    ASSERT_EQ(run_cli("run --serial " + args + b.string()), 0);
    for (const char* f : {"aggregate.csv", "trace.csv", "summary.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, CompareAndSweepOutputs)
{
    const fs::path out = fs::temp_directory_path() / "mimo_cli_cmp";
    fs::remove_all(out);
    ASSERT_EQ(run_cli("compare --problem P1 --snr-list 10 --realizations 2 --out " + out.string()), 0);
    const std::string cmp = slurp(out / "compare.csv");
    EXPECT_EQ(first_line(cmp), "snr_db,realization,outer_iter,objective_duality_only,objective_with_gp");
    EXPECT_NE(cmp.find("\n10,0,0,"), std::string::npos);
    ASSERT_EQ(run_cli("sweep --problem P1,P3 --snr-list 10 --realizations 1 --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "P1" / "aggregate.csv"));
    EXPECT_TRUE(fs::exists(out / "P3" / "summary.csv"));
    const std::string agg = slurp(out / "aggregate.csv");
    EXPECT_NE(agg.find("\nP1,"), std::string::npos);
    EXPECT_NE(agg.find("\nP3,"), std::string::npos);
}
