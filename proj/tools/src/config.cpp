#include "config.hpp"

#include "macromc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace macromc::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> values;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        values.push_back(parse_number(trim(item), what));
    }
    return values;
}

std::size_t parse_count(const std::string& text, const std::string& what)
{
    const double v = parse_number(text, what);
    if (v < 1.0 || v != std::floor(v) || v > 1e6) {
        throw ValidationError(what + ": expected a positive integer, got '" + text + "'");
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t parse_seed(const std::string& text, const std::string& what)
{
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ValidationError(what + ": expected an unsigned integer, got '" + text + "'");
    }
    return value;
}

} // namespace

std::string format_number(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

double parse_number(const std::string& text, const std::string& what)
{
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    if (begin != end && *begin == '+' && begin + 1 != end && begin[1] != '-') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ValidationError(what + ": expected a finite number, got '" + text + "'");
    }
    return value;
}

IniDocument parse_ini(std::istream& in)
{
    IniDocument doc;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') {
            continue;
        }
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                throw ParseError("malformed section header '" + s + "'", lineno);
            }
            section = trim(s.substr(1, s.size() - 2));
            doc[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected 'key = value', got '" + s + "'", lineno);
        }
        if (section.empty()) {
            throw ParseError("key outside of any [section]", lineno);
        }
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) {
            throw ParseError("empty key", lineno);
        }
        if (!doc[section].emplace(key, trim(s.substr(eq + 1))).second) {
            throw ParseError("duplicate key '" + section + "." + key + "'", lineno);
        }
    }
    return doc;
}

void RunConfig::validate() const
{
    tx.validate();
    sensor.validate();
    search.validate();
    if (distances.empty()) {
        throw ValidationError("channel.distances: at least one distance required");
    }
    for (const double s : distances) {
        if (!(s > 0.0)) {
            throw ValidationError("channel.distances: distances must be > 0");
        }
    }
    if (!(t_end >= 0.0)) {
        throw ValidationError("simulate.t_end must be >= 0");
    }
    if (!(dt > 0.0)) {
        throw ValidationError("simulate.dt must be > 0");
    }
    if (!(noise_floor >= 0.0)) {
        throw ValidationError("preprocess.noise_floor must be >= 0");
    }
}

RunConfig config_from_ini(const IniDocument& doc, const std::filesystem::path& base_dir)
{
    RunConfig cfg;
    using Setter = std::function<void(const std::string& value, const std::string& name)>;
    auto number = [](double& field) -> Setter {
        return [&field](const std::string& v, const std::string& n) { field = parse_number(v, n); };
    };
    auto count = [](std::size_t& field) -> Setter {
        return [&field](const std::string& v, const std::string& n) { field = parse_count(v, n); };
    };
    auto path = [&base_dir](std::optional<std::filesystem::path>& field) -> Setter {
        return [&field, &base_dir](const std::string& v, const std::string&) {
            const std::filesystem::path p(v);
            field = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        };
    };

    const std::map<std::string, Setter> setters{
        {"transmitter.Q", number(cfg.tx.Q)},
        {"transmitter.Te", number(cfg.tx.Te)},
        {"transmitter.rho_d", number(cfg.tx.rho_d)},
        {"transmitter.theta_deg",
         [&](const std::string& v, const std::string& n) { cfg.tx.theta = Angle::degrees(parse_number(v, n)); }},
        {"transmitter.gamma", number(cfg.tx.gamma)},
        {"sensor.Ein", number(cfg.sensor.Ein)},
        {"sensor.RL", number(cfg.sensor.RL)},
        {"sensor.Ro", number(cfg.sensor.Ro)},
        {"sensor.a", number(cfg.sensor.sens.a)},
        {"sensor.b", number(cfg.sensor.sens.b)},
        {"sensor.c", number(cfg.sensor.sens.c)},
        {"channel.distances",
         [&](const std::string& v, const std::string& n) { cfg.distances = parse_list(v, n); }},
        {"search.k1_min", number(cfg.search.k1_min)},
        {"search.k1_max", number(cfg.search.k1_max)},
        {"search.k2_min", number(cfg.search.k2_min)},
        {"search.k2_max", number(cfg.search.k2_max)},
        {"search.gamma_min", number(cfg.search.gamma_min)},
        {"search.gamma_max",
         [&](const std::string& v, const std::string& n) { cfg.search.gamma_max = parse_number(v, n); }},
        {"search.theta_rv_deg",
         [&](const std::string& v, const std::string& n) { cfg.search.theta_rv = Angle::degrees(parse_number(v, n)); }},
        {"search.grid_k1", count(cfg.search.grid_k1)},
        {"search.grid_k2", count(cfg.search.grid_k2)},
        {"search.grid_gamma", count(cfg.search.grid_gamma)},
        {"search.refine_top", count(cfg.search.refine_top)},
        {"search.mse_threshold", number(cfg.search.mse_threshold)},
        {"search.min_signal", number(cfg.search.min_signal)},
        {"search.seed", [&](const std::string& v, const std::string& n) { cfg.search.seed = parse_seed(v, n); }},
        {"simulate.t_end", number(cfg.t_end)},
        {"simulate.dt", number(cfg.dt)},
        {"preprocess.noise_floor", number(cfg.noise_floor)},
        {"io.sensitivity_table", path(cfg.io.sensitivity_table)},
        {"io.estimates_dir", path(cfg.io.estimates_dir)},
        {"io.measurements", path(cfg.io.measurements)},
    };

    for (const auto& [section, entries] : doc) {
        for (const auto& [key, value] : entries) {
            const std::string name = section + "." + key;
            const auto it = setters.find(name);
            if (it == setters.end()) {
                throw ValidationError("unknown config key '" + name + "'");
            }
            it->second(value, name);
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    return config_from_ini(parse_ini(in), path.parent_path());
}

} // namespace macromc::cli
