#include "commands.hpp"
#include "config.hpp"

#include "macromc/error.hpp"
#include "macromc/trace.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace macromc;
using namespace macromc::cli;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("macromc_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        unsetenv(kConfigEnv);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int call(std::vector<std::string> args)
    {
        out_.str({});
        err_.str({});
        return run(args, out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::map<std::string, std::string> report() const
    {
        std::map<std::string, std::string> kv;
        std::istringstream is(out_.str());
        std::string line;
        while (std::getline(is, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                kv[line.substr(0, eq)] = line.substr(eq + 1);
            }
        }
        return kv;
    }

    static std::string slurp(const std::string& p)
    {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    void write(const std::string& name, const std::string& contents) const
    {
        std::ofstream(dir_ / name) << contents;
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

double num(const std::string& s)
{
    return std::stod(s);
}

} // namespace

TEST(Config, DefaultsMatchShippedFile)
{
    const RunConfig shipped = load_config(fs::path(MACROMC_DATA_DIR) / "table1.ini");
    const RunConfig defaults;
    EXPECT_EQ(shipped.tx.Q, defaults.tx.Q);
    EXPECT_EQ(shipped.tx.Te, defaults.tx.Te);
    EXPECT_EQ(shipped.tx.rho_d, defaults.tx.rho_d);
    EXPECT_NEAR(shipped.tx.theta.radians(), defaults.tx.theta.radians(), 1e-15);
    EXPECT_EQ(shipped.sensor.Ro, defaults.sensor.Ro);
    EXPECT_EQ(shipped.sensor.sens.c, defaults.sensor.sens.c);
    EXPECT_EQ(shipped.distances, defaults.distances);
    EXPECT_EQ(shipped.search.grid_gamma, defaults.search.grid_gamma);
    EXPECT_EQ(shipped.search.mse_threshold, defaults.search.mse_threshold);
}

TEST(Config, ParsesAndValidates)
{
    std::istringstream good("; comment\n[transmitter]\ntheta_deg = 45\n\n[search]\ntheta_rv_deg=20\nseed = 9\n"
                            "[io]\nsensitivity_table = t.csv\n");
    const auto cfg = config_from_ini(parse_ini(good), "/base");
    EXPECT_NEAR(cfg.tx.theta.degrees(), 45.0, 1e-12);
    ASSERT_TRUE(cfg.search.theta_rv);
    EXPECT_EQ(cfg.search.seed, 9u);
    EXPECT_EQ(*cfg.io.sensitivity_table, fs::path("/base/t.csv"));

    auto load = [](const std::string& text) {
        std::istringstream is(text);
        return config_from_ini(parse_ini(is));
    };
    EXPECT_THROW(load("Q = 1\n"), ParseError);
    EXPECT_THROW(load("[transmitter]\nQ\n"), ParseError);
    EXPECT_THROW(load("[transmitter]\nQ = 1\nQ = 2\n"), ParseError);
    EXPECT_THROW(load("[transmitter]\nq = 1\n"), ValidationError);
    EXPECT_THROW(load("[transmitter]\nQ = abc\n"), ValidationError);
    EXPECT_THROW(load("[transmitter]\nQ = -1\n"), ValidationError);
    EXPECT_THROW(load("[transmitter]\ntheta_deg = 90\n"), ValidationError);
    EXPECT_THROW(load("[search]\ngrid_k1 = 2.5\n"), ValidationError);
    EXPECT_THROW(load("[channel]\ndistances = 1, -1\n"), ValidationError);
    EXPECT_THROW(load("[simulate]\ndt = 0\n"), ValidationError);
}

TEST(Config, NumberFormatting)
{
    for (double v : {0.0, 0.1, 1.0 / 3.0, -2.5e-300, 1e300}) {
        EXPECT_EQ(parse_number(format_number(v), "v"), v);
    }
    EXPECT_EQ(format_number(0.03), "0.03");
    EXPECT_THROW(parse_number("1.0x", "v"), ValidationError);
    EXPECT_THROW(parse_number("inf", "v"), ValidationError);
    EXPECT_THROW(parse_number("", "v"), ValidationError);
    EXPECT_EQ(parse_number("+2", "v"), 2.0);
}

TEST_F(CliTest, SimulateDefaults)
{
    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--gamma", "3", "--out", path("sim.csv")}), kExitOk);
    const auto kv = report();
    EXPECT_EQ(kv.at("samples"), "1001");
    EXPECT_NEAR(num(kv.at("peak_time_s")), 0.924196240746593746, 1e-12);
    EXPECT_NEAR(num(kv.at("peak_voltage_v")), 0.598101605894135343, 1e-12);
    const Trace t = traceio::load_trace(path("sim.csv"));
    EXPECT_EQ(t.size(), 1001u);
    EXPECT_EQ(t.time().back(), 10.0);

    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--out", path("g1.csv")}), kExitOk);
    EXPECT_NEAR(num(report().at("C0_kg_m3")), 1.36022361564252200e-3, 1e-15);

    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--t-end", "0", "--out", path("one.csv")}), kExitOk);
    const Trace one = traceio::load_trace(path("one.csv"));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.time()[0], 0.0);
    EXPECT_EQ(one.voltage()[0], 0.0);
}

TEST_F(CliTest, SimulateRejectsInvalidParameters)
{
    EXPECT_EQ(call({"simulate", "--k1", "0", "--k2", "0.5", "--out", path("x.csv")}), kExitValidation);
    EXPECT_NE(err_.str().find("k1"), std::string::npos);
    EXPECT_EQ(call({"simulate", "--k1", "1", "--k2", "0.5", "--gamma", "0.5", "--out", path("x.csv")}),
              kExitValidation);
    EXPECT_EQ(call({"simulate", "--k1", "1", "--k2", "0.5", "--dt", "-1", "--out", path("x.csv")}), kExitValidation);
    EXPECT_EQ(call({"simulate", "--k2", "0.5", "--out", path("x.csv")}), kExitValidation);
    EXPECT_EQ(call({"frobnicate"}), kExitValidation);
    EXPECT_EQ(call({"--help"}), kExitOk);
}

TEST_F(CliTest, SimulateIsByteIdentical)
{
    const std::vector<std::string> base{"simulate", "--k1", "2", "--k2", "0.5", "--noise", "0.01", "--seed", "3"};
    auto a = base;
    a.insert(a.end(), {"--out", path("a.csv")});
    auto b = base;
    b.insert(b.end(), {"--out", path("b.csv")});
    ASSERT_EQ(call(a), kExitOk);
    ASSERT_EQ(call(b), kExitOk);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_FALSE(fs::exists(path("a.csv") + ".tmp"));
}

TEST_F(CliTest, EstimateRoundTrip)
{
    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--gamma", "3", "--s", "1.1", "--out", path("sim.csv")}),
              kExitOk);
    ASSERT_EQ(call({"estimate", "--trace", path("sim.csv"), "--out", path("e/1.est"), "--residuals", path("r.csv")}),
              kExitOk);
    const auto kv = report();
    EXPECT_NEAR(num(kv.at("s")), 1.1, 0.0);
    EXPECT_NEAR(num(kv.at("k1")), 2.0, 2e-3);
    EXPECT_NEAR(num(kv.at("k2")), 0.5, 5e-4);
    EXPECT_NEAR(num(kv.at("gamma")), 3.0, 3e-3);
    EXPECT_EQ(kv.at("canonical"), "true");
    EXPECT_EQ(kv.at("low_confidence"), "false");
    EXPECT_EQ(slurp(path("e/1.est")), out_.str());
    const auto residuals = slurp(path("r.csv"));
    EXPECT_EQ(residuals.rfind("time_s,measured_v,model_v,residual_v\n", 0), 0u);
}

TEST_F(CliTest, EstimateNoisyTraceMeetsThreshold)
{
    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--gamma", "3", "--noise", "0.01", "--seed", "11", "--out",
                    path("noisy.csv")}),
              kExitOk);
    ASSERT_EQ(call({"estimate", "--trace", path("noisy.csv")}), kExitOk);
    EXPECT_LE(num(report().at("mse_v2")), 0.021);
}

TEST_F(CliTest, EstimateExitCodes)
{
    std::string flat = "time_s,voltage_v\n";
    for (int i = 0; i <= 100; ++i) {
        flat += std::to_string(i * 0.1) + ",0\n";
    }
    write("flat.csv", flat);
    EXPECT_EQ(call({"estimate", "--trace", path("flat.csv"), "--s", "1", "--t0", "0"}), kExitNoSignal);

    std::string square = "time_s,voltage_v\n";
    for (int i = 0; i <= 1000; ++i) {
        square += std::to_string(i * 0.01) + (i > 700 ? ",2.5\n" : ",0\n");
    }
    write("square.csv", square);
    EXPECT_EQ(call({"estimate", "--trace", path("square.csv"), "--s", "1", "--t0", "0"}), kExitLowConfidence);
    EXPECT_EQ(report().at("low_confidence"), "true");

    EXPECT_EQ(call({"estimate", "--trace", path("square.csv"), "--t0", "0"}), kExitValidation);
    EXPECT_EQ(call({"estimate", "--trace", path("missing.csv"), "--s", "1"}), kExitIo);
    write("bad.csv", "time_s,voltage_v\n0,1\n1,x\n");
    EXPECT_EQ(call({"estimate", "--trace", path("bad.csv"), "--s", "1"}), kExitValidation);
    EXPECT_NE(err_.str().find("line 3"), std::string::npos);
}

TEST_F(CliTest, EstimateAutoOnset)
{
    // raw recording: 2 s of 0.3 V baseline before the response starts
    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--gamma", "3", "--out", path("sim.csv")}), kExitOk);
    const Trace sim = traceio::load_trace(path("sim.csv"));
    std::string raw = "time_s,voltage_v\n";
    for (int i = 0; i < 200; ++i) {
        raw += format_number(i * 0.01) + ",0.3\n";
    }
    for (std::size_t i = 0; i < sim.size(); ++i) {
        raw += format_number(2.0 + sim.time()[i]) + ',' + format_number(0.3 + sim.voltage()[i]) + '\n';
    }
    write("raw.csv", raw);
    ASSERT_EQ(call({"estimate", "--trace", path("raw.csv"), "--s", "1", "--t0", "2"}), kExitOk);
    EXPECT_NEAR(num(report().at("k1")), 2.0, 2e-3);
    EXPECT_EQ(call({"estimate", "--trace", path("raw.csv"), "--s", "1", "--t0", "auto"}), kExitOk);
    EXPECT_NEAR(num(report().at("k1")), 2.0, 0.2);
}

TEST_F(CliTest, FitSensitivity)
{
    ASSERT_EQ(call({"fit-sensitivity", "--out", path("fit.csv")}), kExitOk);
    const auto kv = report();
    EXPECT_LE(num(kv.at("rmse")), 0.0371 + 0.01);
    EXPECT_NEAR(num(kv.at("a")), 0.0116, 0.1 * 0.0116);
    EXPECT_EQ(kv.at("ratio_at_reference_ideal"), "1");
    EXPECT_NEAR(num(kv.at("ratio_at_reference_fitted")), 1.058, 0.005);

    std::string exact = "concentration_kg_m3,rs_over_ro\n";
    for (int i = 0; i < 30; ++i) {
        const double x = 5e-5 * std::pow(200.0, i / 29.0);
        exact += format_number(x) + ',' + format_number(0.0116 * std::pow(x, -0.5855) - 0.0743) + '\n';
    }
    write("exact.csv", exact);
    ASSERT_EQ(call({"fit-sensitivity", "--table", path("exact.csv")}), kExitOk);
    EXPECT_LT(num(report().at("rmse")), 1e-8);

    write("three.csv", "concentration_kg_m3,rs_over_ro\n1e-4,2.5\n1e-3,0.6\n1e-2,0.1\n");
    EXPECT_EQ(call({"fit-sensitivity", "--table", path("three.csv")}), kExitLowConfidence);
    EXPECT_NE(out_.str().find("warning="), std::string::npos);

    EXPECT_EQ(call({"fit-sensitivity", "--table", path("none.csv")}), kExitIo);
}

TEST_F(CliTest, Trend)
{
    const char* est = "s=%s\nk1=%s\nk2=%s\ngamma=2\n";
    auto put = [&](const std::string& name, const std::string& s, const std::string& k1, const std::string& k2) {
        char buf[128];
        std::snprintf(buf, sizeof buf, est, s.c_str(), k1.c_str(), k2.c_str());
        write("est/" + name, buf);
    };
    fs::create_directories(dir_ / "est");
    put("a.est", "0.9", "5", "1.0");
    put("b.est", "1.0", "4", "1.02");
    put("c.est", "1.1", "3", "0.98");
    put("d.est", "1.2", "2", "1.01");
    write("est/ignored.txt", "junk");
    ASSERT_EQ(call({"trend", "--dir", path("est"), "--out", path("trend.csv")}), kExitOk);
    EXPECT_NE(out_.str().find("verdict.k1=k1 strictly decreasing"), std::string::npos);
    EXPECT_NE(out_.str().find("verdict.k2=k2 within ±5% of mean"), std::string::npos);
    const auto csv = slurp(path("trend.csv"));
    EXPECT_EQ(csv.rfind("s,n,k1_mean,k1_std,k2_mean,k2_std,gamma_mean,gamma_std\n0.9,1,5,0,1,0,2,0\n", 0), 0u);

    fs::remove_all(dir_ / "est");
    fs::create_directories(dir_ / "est");
    put("a.est", "1.0", "2", "1");
    put("b.est", "1.0", "4", "1");
    EXPECT_EQ(call({"trend", "--dir", path("est")}), kExitValidation);
    put("c.est", "1.2", "1", "1");
    ASSERT_EQ(call({"trend", "--dir", path("est")}), kExitOk);
    EXPECT_NE(out_.str().find("1,2,3,1.4142135623730951,"), std::string::npos);

    EXPECT_EQ(call({"trend", "--dir", path("missing")}), kExitIo);
    EXPECT_EQ(call({"trend"}), kExitValidation);
}

TEST_F(CliTest, FlowRate)
{
    write("m.csv", "mass_before_kg,mass_after_kg,dt_s\n0.1,0.099131,0.5\n");
    ASSERT_EQ(call({"flow-rate", "--measurements", path("m.csv")}), kExitOk);
    EXPECT_NEAR(num(report().at("Q_mean_m3_s")), 2.2028e-6, 1e-9);
    EXPECT_EQ(call({"flow-rate", "--measurements", path("m.csv"), "--rho-d", "0"}), kExitValidation);
    write("empty.csv", "mass_before_kg,mass_after_kg,dt_s\n");
    EXPECT_EQ(call({"flow-rate", "--measurements", path("empty.csv")}), kExitValidation);
    EXPECT_EQ(call({"flow-rate"}), kExitValidation);
}

TEST_F(CliTest, ConfigFromEnvironmentAndFlag)
{
    write("cfg.ini", "[transmitter]\ngamma = 2\n[simulate]\nt_end = 1\n");
    setenv(kConfigEnv, path("cfg.ini").c_str(), 1);
    ASSERT_EQ(call({"simulate", "--k1", "2", "--k2", "0.5", "--out", path("a.csv")}), kExitOk);
    EXPECT_EQ(report().at("samples"), "101");
    EXPECT_NEAR(num(report().at("C0_kg_m3")), 2.0 * 1.36022361564252200e-3, 1e-14);
    unsetenv(kConfigEnv);

    ASSERT_EQ(call({"--config", path("cfg.ini"), "simulate", "--k1", "2", "--k2", "0.5", "--out", path("b.csv")}),
              kExitOk);
    EXPECT_EQ(report().at("samples"), "101");
    ASSERT_EQ(call({"simulate", "--config", path("cfg.ini"), "--k1", "2", "--k2", "0.5", "--out", path("b.csv")}),
              kExitOk);
    EXPECT_EQ(report().at("samples"), "101");

    write("broken.ini", "[transmitter]\nQ = 1\nQ = 2\n");
    EXPECT_EQ(call({"--config", path("broken.ini"), "simulate", "--k1", "2", "--k2", "0.5", "--out", path("c.csv")}),
              kExitValidation);
    EXPECT_EQ(call({"--config", path("nope.ini"), "simulate", "--k1", "2", "--k2", "0.5", "--out", path("c.csv")}),
              kExitIo);
}
