#include "commands.hpp"

#include "config.hpp"
#include "macromc/calibration.hpp"
#include "macromc/channel.hpp"
#include "macromc/error.hpp"
#include "macromc/fitting.hpp"
#include "macromc/kinetics.hpp"
#include "macromc/sensor.hpp"
#include "macromc/trace.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef MACROMC_CLI_DATA_DIR
#define MACROMC_CLI_DATA_DIR "."
#endif
#ifndef MACROMC_CLI_INSTALL_DATA_DIR
#define MACROMC_CLI_INSTALL_DATA_DIR "."
#endif

namespace macromc::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kTableFile = "mq3_sensitivity_reconstructed.csv";
constexpr const char* kEstimateExtension = ".est";

struct GlobalOptions {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
};

struct SimulateOptions {
    double k1 = 0.0;
    double k2 = 0.0;
    std::optional<double> gamma;
    std::optional<double> s;
    std::optional<double> t_end;
    std::optional<double> dt;
    double noise = 0.0;
    std::string out;
};

struct EstimateOptions {
    std::string trace;
    std::optional<double> s;
    std::optional<std::string> t0;
    std::optional<std::string> out;
    std::optional<std::string> residuals;
};

struct SensitivityOptions {
    std::optional<std::string> table;
    std::optional<std::string> out;
};

struct TrendOptions {
    std::optional<std::string> dir;
    std::optional<std::string> out;
};

struct FlowOptions {
    std::optional<std::string> measurements;
    std::optional<double> rho_d;
    std::optional<std::string> out;
};

std::string yes_no(bool v)
{
    return v ? "true" : "false";
}

RunConfig resolve_config(const GlobalOptions& global)
{
    RunConfig cfg;
    if (global.config) {
        cfg = load_config(*global.config);
    } else if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
        cfg = load_config(env);
    }
    if (global.seed) {
        cfg.search.seed = *global.seed;
    }
    return cfg;
}

fs::path default_table_path()
{
    if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') {
        return fs::path(env) / kTableFile;
    }
    const fs::path build_tree = fs::path(MACROMC_CLI_DATA_DIR) / kTableFile;
    std::error_code ec;
    return fs::exists(build_tree, ec) ? build_tree : fs::path(MACROMC_CLI_INSTALL_DATA_DIR) / kTableFile;
}

int simulate(const RunConfig& base, const SimulateOptions& o, std::ostream& out)
{
    RunConfig cfg = base;
    if (o.gamma) {
        cfg.tx.gamma = *o.gamma;
    }
    const double s = o.s.value_or(1.0);
    const double t_end = o.t_end.value_or(cfg.t_end);
    const double dt = o.dt.value_or(cfg.dt);
    if (!(o.noise >= 0.0)) {
        throw ValidationError("--noise must be >= 0");
    }
    const KineticsParams kin{o.k1, o.k2};
    kin.validate();

    Trace trace = channel::sample_response(cfg.tx, kin, cfg.sensor, s, channel::uniform_grid(t_end, dt));
    if (o.noise > 0.0) {
        trace = traceio::add_gaussian_noise(trace, o.noise, cfg.search.seed);
    }
    traceio::store_trace(trace, o.out);

    const double t_peak = kinetics::peak_time(kin);
    out << "samples=" << trace.size() << '\n';
    out << "C0_kg_m3=" << format_number(channel::initial_concentration(cfg.tx, s)) << '\n';
    out << "peak_time_s=" << format_number(t_peak) << '\n';
    out << "peak_voltage_v=" << format_number(channel::impulse_response(cfg.tx, kin, cfg.sensor, s, t_peak)) << '\n';
    out << "trace=" << o.out << '\n';
    return kExitOk;
}

std::string render_estimate(double s, const fitting::ChannelEstimate& est, const std::string& source)
{
    std::ostringstream os;
    os << "s=" << format_number(s) << '\n';
    os << "k1=" << format_number(est.k1) << '\n';
    os << "k2=" << format_number(est.k2) << '\n';
    os << "gamma=" << format_number(est.gamma) << '\n';
    os << "canonical=" << yes_no(est.canonical) << '\n';
    os << "mse_v2=" << format_number(est.mse) << '\n';
    os << "low_confidence=" << yes_no(est.low_confidence) << '\n';
    os << "converged=" << yes_no(est.converged) << '\n';
    os << "iterations=" << est.iterations << '\n';
    os << "condition=" << format_number(est.condition) << '\n';
    os << "grid_best=" << format_number(est.grid_best.k1) << ' ' << format_number(est.grid_best.k2) << ' '
       << format_number(est.grid_best.gamma) << ' ' << format_number(est.grid_best.mse) << '\n';
    os << "source=" << source << '\n';
    for (const auto& w : est.warnings) {
        os << "warning=" << w << '\n';
    }
    return os.str();
}

int estimate(const RunConfig& cfg, const EstimateOptions& o, std::ostream& out)
{
    const Trace raw = traceio::load_trace(o.trace);

    double s = 0.0;
    if (o.s) {
        s = *o.s;
    } else if (const auto it = raw.meta().attributes.find("s"); it != raw.meta().attributes.end()) {
        s = parse_number(it->second, "trace attribute s");
    } else {
        throw ValidationError("estimate: distance unknown; pass --s");
    }
    if (!(s > 0.0)) {
        throw ValidationError("estimate: distance must be > 0");
    }

    // Model output and already preprocessed traces are used as they are unless --t0 is given.
    Trace measured = raw;
    const bool ready = raw.meta().has_flag("preprocessed") || raw.meta().source == "model";
    if (o.t0 || !ready) {
        traceio::PreprocessOptions pre;
        pre.noise_floor = cfg.noise_floor;
        if (o.t0 && *o.t0 != "auto") {
            pre.t0 = parse_number(*o.t0, "--t0");
        }
        measured = traceio::preprocess(raw, pre);
    }

    const auto est = fitting::estimate_channel_params(measured, cfg.tx, cfg.sensor, s, cfg.search);
    const std::string report = render_estimate(s, est, o.trace);
    out << report;
    if (o.out) {
        traceio::write_file_atomic(*o.out, report);
    }
    if (o.residuals) {
        TransmitterSpec tx = cfg.tx;
        tx.gamma = est.gamma;
        const Trace model = channel::sample_response(tx, {est.k1, est.k2}, cfg.sensor, s, measured.time());
        std::ostringstream os;
        os << "time_s,measured_v,model_v,residual_v\n";
        for (std::size_t i = 0; i < measured.size(); ++i) {
            const double m = measured.voltage()[i];
            const double f = model.voltage()[i];
            os << format_number(measured.time()[i]) << ',' << format_number(m) << ',' << format_number(f) << ','
               << format_number(m - f) << '\n';
        }
        traceio::write_file_atomic(*o.residuals, os.str());
    }
    return est.low_confidence ? kExitLowConfidence : kExitOk;
}

int fit_sensitivity_cmd(const RunConfig& cfg, const SensitivityOptions& o, std::ostream& out)
{
    const fs::path path = o.table ? fs::path(*o.table) : cfg.io.sensitivity_table.value_or(default_table_path());
    const auto table = sensor::load_sensitivity_table(path);
    const auto [coeffs, fit] = fitting::fit_sensitivity(table);

    out << "a=" << format_number(coeffs.a) << '\n';
    out << "b=" << format_number(coeffs.b) << '\n';
    out << "c=" << format_number(coeffs.c) << '\n';
    out << "rmse=" << format_number(fit.rmse) << '\n';
    out << "points=" << table.concentration.size() << '\n';
    out << "converged=" << yes_no(fit.converged) << '\n';
    out << "iterations=" << fit.iterations << '\n';
    // Ro is defined at the reference concentration, so the ideal ratio there is exactly 1.
    const double ref = sensor::kReferenceConcentration;
    out << "ratio_at_reference_ideal=1\n";
    out << "ratio_at_reference_fitted=" << format_number(coeffs.a * std::pow(ref, coeffs.b) + coeffs.c) << '\n';
    for (const auto& w : fit.warnings) {
        out << "warning=" << w << '\n';
    }
    if (o.out) {
        std::ostringstream os;
        os << "concentration_kg_m3,measured_ratio,fitted_ratio\n";
        for (std::size_t i = 0; i < table.concentration.size(); ++i) {
            const double x = table.concentration[i];
            os << format_number(x) << ',' << format_number(table.ratio[i]) << ','
               << format_number(coeffs.a * std::pow(x, coeffs.b) + coeffs.c) << '\n';
        }
        traceio::write_file_atomic(*o.out, os.str());
    }
    return fit.converged ? kExitOk : kExitLowConfidence;
}

fitting::DistanceEstimate read_estimate_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open estimate '" + path.string() + "'");
    }
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ": expected key=value", lineno);
        }
        kv.emplace(line.substr(0, eq), line.substr(eq + 1));
    }
    auto get = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw ValidationError(path.string() + ": missing '" + key + "'");
        }
        return parse_number(it->second, path.string() + ": " + key);
    };
    fitting::DistanceEstimate d;
    d.s = get("s");
    d.estimate.k1 = get("k1");
    d.estimate.k2 = get("k2");
    d.estimate.gamma = get("gamma");
    return d;
}

int trend(const RunConfig& cfg, const TrendOptions& o, std::ostream& out)
{
    const auto dir = o.dir ? std::optional<fs::path>(*o.dir) : cfg.io.estimates_dir;
    if (!dir) {
        throw ValidationError("trend: no estimates directory; pass --dir");
    }
    std::error_code ec;
    if (!fs::is_directory(*dir, ec)) {
        throw IoError("trend: '" + dir->string() + "' is not a directory");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(*dir)) {
        if (entry.is_regular_file() && entry.path().extension() == kEstimateExtension) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<fitting::DistanceEstimate> estimates;
    for (const auto& f : files) {
        estimates.push_back(read_estimate_file(f));
    }
    const auto report = fitting::distance_trend(estimates);

    std::ostringstream csv;
    csv << "s,n,k1_mean,k1_std,k2_mean,k2_std,gamma_mean,gamma_std\n";
    for (const auto& row : report.rows) {
        csv << format_number(row.s) << ',' << row.count << ',' << format_number(row.k1.mean) << ','
            << format_number(row.k1.stddev) << ',' << format_number(row.k2.mean) << ','
            << format_number(row.k2.stddev) << ',' << format_number(row.gamma.mean) << ','
            << format_number(row.gamma.stddev) << '\n';
    }
    out << csv.str();
    out << "verdict.k1=" << report.k1.describe("k1") << '\n';
    out << "verdict.k2=" << report.k2.describe("k2") << '\n';
    out << "verdict.gamma=" << report.gamma.describe("gamma") << '\n';
    if (o.out) {
        traceio::write_file_atomic(*o.out, csv.str());
    }
    return kExitOk;
}

int flow_rate_cmd(const RunConfig& cfg, const FlowOptions& o, std::ostream& out)
{
    const auto path = o.measurements ? std::optional<fs::path>(*o.measurements) : cfg.io.measurements;
    if (!path) {
        throw ValidationError("flow-rate: no measurements file; pass --measurements");
    }
    const auto report = calibration::flow_rate(calibration::load_measurements(*path), o.rho_d.value_or(cfg.tx.rho_d));
    std::ostringstream os;
    os << "n=" << report.per_measurement.size() << '\n';
    os << "Q_mean_m3_s=" << format_number(report.mean) << '\n';
    os << "Q_std_m3_s=" << format_number(report.stddev) << '\n';
    for (std::size_t i = 0; i < report.per_measurement.size(); ++i) {
        os << "Q_" << i << "_m3_s=" << format_number(report.per_measurement[i]) << '\n';
    }
    out << os.str();
    if (o.out) {
        traceio::write_file_atomic(*o.out, os.str());
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Macroscale molecular-communication channel toolkit", "macromc"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config, "INI config file (default: $MACROMC_CONFIG, else built-in defaults)");
    app.add_option("--seed", global.seed, "Seed for noise generation and search");

    SimulateOptions sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Sample the model response into a trace CSV");
    cmd_sim->add_option("--k1", sim.k1, "Adhesion rate (1/s)")->required();
    cmd_sim->add_option("--k2", sim.k2, "Detachment rate (1/s)")->required();
    cmd_sim->add_option("--gamma", sim.gamma, "Spray coefficient (default from config)");
    cmd_sim->add_option("--s", sim.s, "Distance (m), default 1");
    cmd_sim->add_option("--t-end", sim.t_end, "Last sample time (s)");
    cmd_sim->add_option("--dt", sim.dt, "Sampling step (s)");
    cmd_sim->add_option("--noise", sim.noise, "Gaussian noise sigma (V)");
    cmd_sim->add_option("--out", sim.out, "Output trace CSV")->required();

    EstimateOptions est;
    auto* cmd_est = app.add_subcommand("estimate", "Fit (k1, k2, gamma) to a measured trace");
    cmd_est->add_option("--trace", est.trace, "Trace CSV (time_s,voltage_v)")->required();
    cmd_est->add_option("--s", est.s, "Distance (m); default from the trace metadata");
    cmd_est->add_option("--t0", est.t0, "Start time in s, or 'auto' for onset detection");
    cmd_est->add_option("--out", est.out, "Write the estimate report (use a .est extension for trend)");
    cmd_est->add_option("--residuals", est.residuals, "Write measured/model/residual CSV");

    SensitivityOptions sens;
    auto* cmd_sens = app.add_subcommand("fit-sensitivity", "Fit the sensor power law to a sensitivity table");
    cmd_sens->add_option("--table", sens.table, "CSV concentration_kg_m3,rs_over_ro (default: bundled table)");
    cmd_sens->add_option("--out", sens.out, "Write measured/fitted ratio CSV");

    TrendOptions tr;
    auto* cmd_trend = app.add_subcommand("trend", "Per-distance statistics of estimate files");
    cmd_trend->add_option("--dir", tr.dir, "Directory of *.est files");
    cmd_trend->add_option("--out", tr.out, "Write the trend CSV");

    FlowOptions flow;
    auto* cmd_flow = app.add_subcommand("flow-rate", "Flow rate from before/after mass measurements");
    cmd_flow->add_option("--measurements", flow.measurements, "CSV mass_before_kg,mass_after_kg,dt_s");
    cmd_flow->add_option("--rho-d", flow.rho_d, "Fluid density (kg/m^3), default from config");
    cmd_flow->add_option("--out", flow.out, "Write the report");

    for (auto* cmd : {cmd_sim, cmd_est, cmd_sens, cmd_trend, cmd_flow}) {
        cmd->add_option("--config", global.config, "INI config file");
        cmd->add_option("--seed", global.seed, "Seed for noise generation and search");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        const RunConfig cfg = resolve_config(global);
        if (cmd_sim->parsed()) {
            return simulate(cfg, sim, out);
        }
        if (cmd_est->parsed()) {
            return estimate(cfg, est, out);
        }
        if (cmd_sens->parsed()) {
            return fit_sensitivity_cmd(cfg, sens, out);
        }
        if (cmd_trend->parsed()) {
            return trend(cfg, tr, out);
        }
        return flow_rate_cmd(cfg, flow, out);
    } catch (const NoSignalError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNoSignal;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ParseError& e) {
        err << "error: line " << e.line() << ": " << e.what() << '\n';
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

} // namespace macromc::cli
