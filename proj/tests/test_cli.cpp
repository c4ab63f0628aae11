#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "orliczfb/config.hpp"
#include "orliczfb/experiment.hpp"
#include "orliczfb/snapshot.hpp"

namespace fs = std::filesystem;
using namespace orliczfb;

namespace {

const char* kSmall = R"(# small interval run
g = power(2)
beta = polybump(6)
domain.kind = interval
domain.x_lo = -1
domain.x_hi = 1
domain.nodes = 201
bc.left = dirichlet(0)
bc.right = dirichlet(0.5)
eps_schedule = 0.1, 0.05
)";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("orliczfb_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

template <class F> void expect_parse_error_at(F&& f, std::size_t line) {
    try {
        f();
        ADD_FAILURE() << "no ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, line) << e.what();
    }
}

} // namespace

TEST(Config, MinimalFillsDefaults) {
    const auto cfg = parse_config_text(kSmall);
    EXPECT_EQ(cfg.g_expr, "power(2)");
    EXPECT_EQ(cfg.domain, Domain(Interval{-1.0, 1.0, 201}));
    EXPECT_EQ(cfg.eps_schedule, (std::vector<double>{0.1, 0.05}));
    EXPECT_EQ(cfg.solver, SolverOptions{});
    EXPECT_EQ(cfg.verify, VerifyOptions{});
    EXPECT_EQ(cfg.check, CheckOptions{});
    EXPECT_EQ(cfg.output_dir, "out");
    EXPECT_FALSE(cfg.parallel);
    EXPECT_EQ(std::get<Dirichlet>(cfg.bc.right).value, 0.5);
}

TEST(Config, IncreasingScheduleNamesTheField) {
    std::string text = kSmall;
    text.replace(text.find("0.1, 0.05"), 9, "0.05, 0.1");
    try {
        parse_config_text(text);
        FAIL() << "no ValidationError";
    } catch (const ValidationError& e) {
        ASSERT_EQ(e.fields.size(), 1u);
        EXPECT_EQ(e.fields[0], "eps_schedule");
        EXPECT_NE(std::string(e.what()).find("not strictly decreasing"), std::string::npos);
    }
}

TEST(Config, ValidationCollectsEveryProblem) {
    try {
        parse_config_text("g = power(2)\ndomain.kind = rectangle\ndomain.nodes = 10\n");
        FAIL() << "no ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_GE(e.fields.size(), 3u);
        auto has = [&](const std::string& f) { return std::find(e.fields.begin(), e.fields.end(), f) != e.fields.end(); };
        EXPECT_TRUE(has("beta"));
        EXPECT_TRUE(has("eps_schedule"));
        EXPECT_TRUE(has("domain.nodes"));
    }
}

TEST(Config, ParseErrorsCarryLineNumbers) {
    expect_parse_error_at([] { parse_config_text("g = power(2)\nthis line has no equals\n"); }, 2);
    expect_parse_error_at([] { parse_config_text("# c\n\ng = power(2)\ncolour = blue\n"); }, 4);
    expect_parse_error_at([] { parse_config_text("g = power(2)\ng = power(3)\n"); }, 2);
    expect_parse_error_at([] { parse_config_text("domain.nodes = many\n"); }, 1);
    expect_parse_error_at([] { parse_config_text("beta =\n"); }, 1);
    expect_parse_error_at([] { parse_config_text("parallel = maybe\n"); }, 1);
    expect_parse_error_at([] { parse_config_text("bc.left = robin(1)\n"); }, 1);
    expect_parse_error_at([] { parse_config(fs::path("/nonexistent/x.cfg")); }, 0);
}

TEST(Config, EmitParseRoundTripOnShippedConfigs) {
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(ORLICZFB_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg")
            continue;
        const auto cfg = parse_config(entry.path());
        const std::string text = emit_config(cfg);
        const auto again = parse_config_text(text, cfg.base_dir);
        EXPECT_EQ(again, cfg) << entry.path();
        EXPECT_EQ(emit_config(again), text);
        ++seen;
    }
    EXPECT_EQ(seen, 5u);
}

TEST(Snapshot, RoundTripIsBitExact) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (const Domain& d : {Domain(Interval{-1.0, 1.0, 57}), Domain(Radial{0.25, 1.0, 3, 40}),
                            Domain(Rectangle{-1.0, 1.0, 0.0, 1.0, 9, 7})}) {
        std::vector<double> v(d.node_count());
        for (auto& x : v)
            x = nd(rng) * 1e3;
        const DiscreteField f{d, {}, v, 0.0123456789, 81.0};
        const auto back = parse_snapshot(snapshot_text(f));
        EXPECT_EQ(back.domain, f.domain);
        EXPECT_EQ(back.values, f.values);
        EXPECT_EQ(back.eps, f.eps);
        EXPECT_EQ(back.reg_n, f.reg_n);
        EXPECT_EQ(snapshot_text(back), snapshot_text(f));
    }
}

TEST(Snapshot, Format) {
    const Domain d(Interval{0.0, 1.0, 3});
    const std::string text = snapshot_text({d, {}, {0.0, 0.25, 1.0}, 0.5, 10.0});
    std::istringstream in(text);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1, "ORLICZFB 1");
    EXPECT_EQ(l2, d.descriptor());
    EXPECT_EQ(l3, "eps=0.5 n=10");
    expect_parse_error_at([] { parse_snapshot("ORLICZFB 2\n"); }, 1);
    expect_parse_error_at([&] { parse_snapshot("ORLICZFB 1\n" + d.descriptor() + "\neps=0.5 n=10\n0\n1\n"); }, 5);
}

TEST(Run, LyingGrowthBoundsStopBeforeSolving) {
    std::string text = kSmall;
    text.replace(text.find("power(2)"), 8, "bounds(2.5, 3, power(2))");
    const auto cfg = parse_config_text(text);
    const auto dir = scratch("gate");
    std::ostringstream log;
    EXPECT_EQ(run_experiment(cfg, dir, false, log), 3);
    EXPECT_TRUE(fs::exists(dir / "failure.txt"));
    EXPECT_NE(slurp(dir / "failure.txt").find("stage=check-g"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / snapshot_name(0)));
    EXPECT_FALSE(fs::exists(dir / "sweep.csv"));
}

TEST(Run, RefusesNonEmptyDirectoryWithoutForce) {
    const auto cfg = parse_config_text(kSmall);
    const auto dir = scratch("force");
    fs::create_directories(dir);
    std::ofstream(dir / "keep.txt") << "x";
    std::ostringstream log;
    EXPECT_EQ(run_experiment(cfg, dir, false, log), 2);
    EXPECT_TRUE(fs::exists(dir / "keep.txt"));
    EXPECT_EQ(run_experiment(cfg, dir, true, log), 0);
}

TEST(Run, OutputsAndDeterminism) {
    const auto cfg = parse_config_text(kSmall);
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    std::ostringstream log;
    ASSERT_EQ(run_experiment(cfg, a, false, log), 0);
    ASSERT_EQ(run_experiment(cfg, b, false, log), 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const auto other = b / e.path().filename();
        ASSERT_TRUE(fs::exists(other)) << other;
        EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
        ++files;
    }
    EXPECT_EQ(files, 9u);
    EXPECT_DOUBLE_EQ(std::stod(slurp(a / "lambda_star.txt")), std::sqrt(2.0));
    EXPECT_EQ(parse_config_text(slurp(a / "config.txt")), cfg);
    const std::string sweep = slurp(a / "sweep.csv");
    EXPECT_EQ(sweep.substr(0, sweep.find('\n')), "eps,h,energy,iters,sup_grad,lambda_hat,fb_location");
    EXPECT_NE(slurp(a / "report.txt").find("status=ok"), std::string::npos);
    const auto snap = read_snapshot((a / snapshot_name(1)).string());
    EXPECT_EQ(snap.eps, 0.05);
}

TEST(Binary, CheckGAndRun) {
    const std::string exe = ORLICZFB_CLI;
    EXPECT_EQ(std::system((exe + " check-g --g 'power(2)' > /dev/null").c_str()), 0);
    EXPECT_NE(std::system((exe + " check-g --g 'bounds(2.5,3,power(2))' > /dev/null").c_str()), 0);
    const auto dir = scratch("bin");
    fs::create_directories(dir);
    std::ofstream(dir / "small.cfg") << kSmall;
    const std::string run = exe + " run --config " + (dir / "small.cfg").string() + " --out " + (dir / "o").string() +
                            " > /dev/null";
    EXPECT_EQ(std::system(run.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "report.txt"));
    std::ofstream(dir / "bad.cfg") << "g = power(2)\n";
    const int rc = std::system((exe + " run --config " + (dir / "bad.cfg").string() + " 2> /dev/null").c_str());
    ASSERT_TRUE(WIFEXITED(rc));
    EXPECT_EQ(WEXITSTATUS(rc), 2);
}
