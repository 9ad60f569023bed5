#pragma once

#include "macromc/channel.hpp"
#include "macromc/fitting.hpp"
#include "macromc/sensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace macromc::cli {

/// Sectioned key/value text: `[section]` headers, `key = value` lines, `#` or `;` comment lines.
using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

/// Throws ParseError on malformed lines, keys outside a section or duplicate keys.
IniDocument parse_ini(std::istream& in);

struct IoPaths {
    std::optional<std::filesystem::path> sensitivity_table;
    std::optional<std::filesystem::path> estimates_dir;
    std::optional<std::filesystem::path> measurements;
};

/// Everything a command needs. Default-constructed values are the reference experimental setup.
struct RunConfig {
    TransmitterSpec tx;
    SensorSpec sensor;
    std::vector<double> distances{0.9, 1.0, 1.1, 1.2};
    fitting::SearchConfig search;
    double t_end = 10.0;
    double dt = 0.01;
    double noise_floor = 0.005;
    IoPaths io;

    /// Throws ValidationError naming the first violated invariant.
    void validate() const;
};

/// Builds a validated RunConfig. Missing keys keep their defaults; unknown sections or keys,
/// unparsable numbers and invariant violations are ValidationErrors. Relative io paths
/// resolve against `base_dir`.
RunConfig config_from_ini(const IniDocument& doc, const std::filesystem::path& base_dir = {});

/// Reads a config file; IoError when it cannot be opened.
RunConfig load_config(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_number(double value);

/// Parses a complete finite decimal number or throws ValidationError mentioning `what`.
double parse_number(const std::string& text, const std::string& what);

} // namespace macromc::cli
