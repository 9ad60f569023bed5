#include "macromc/trace.hpp"

#include "csv.hpp"
#include "macromc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <system_error>

namespace macromc {

bool TraceMeta::has_flag(const std::string& flag) const
{
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void TraceMeta::add_flag(const std::string& flag)
{
    if (!has_flag(flag)) {
        flags.push_back(flag);
    }
}

void validate_time_grid(std::span<const double> times, const char* what)
{
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) {
            throw ValidationError(std::string(what) + ": non-finite time stamp at index " + std::to_string(i));
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw ValidationError(std::string(what) + ": time stamps must be strictly increasing (index " +
                                  std::to_string(i) + ")");
        }
    }
}

Trace::Trace(std::vector<double> time, std::vector<double> voltage, TraceMeta meta)
    : time_(std::move(time)), voltage_(std::move(voltage)), meta_(std::move(meta))
{
    if (time_.size() != voltage_.size()) {
        throw ValidationError("Trace: time and voltage columns differ in length");
    }
    validate_time_grid(time_, "Trace");
    for (std::size_t i = 0; i < voltage_.size(); ++i) {
        if (!std::isfinite(voltage_[i])) {
            throw ValidationError("Trace: non-finite voltage at index " + std::to_string(i));
        }
    }
}

double Trace::value_at(double t) const
{
    if (empty() || !(t >= time_.front() && t <= time_.back())) {
        throw DomainError("Trace::value_at: t = " + std::to_string(t) + " outside the trace span");
    }
    const auto it = std::lower_bound(time_.begin(), time_.end(), t);
    const auto hi = static_cast<std::size_t>(it - time_.begin());
    if (time_[hi] == t) {
        return voltage_[hi];
    }
    const std::size_t lo = hi - 1;
    const double w = (t - time_[lo]) / (time_[hi] - time_[lo]);
    return voltage_[lo] + w * (voltage_[hi] - voltage_[lo]);
}

double Trace::min_voltage() const
{
    if (empty()) {
        throw DomainError("Trace::min_voltage: empty trace");
    }
    return *std::min_element(voltage_.begin(), voltage_.end());
}

double Trace::max_voltage() const
{
    if (empty()) {
        throw DomainError("Trace::max_voltage: empty trace");
    }
    return *std::max_element(voltage_.begin(), voltage_.end());
}

namespace traceio {

namespace {

constexpr const char* kFlagPreprocessed = "preprocessed";
constexpr const char* kFlagClamped = "clamped_dips";
constexpr const char* kFlagNegative = "negative_dip";

void apply_comment(TraceMeta& meta, const std::string& comment)
{
    const auto eq = comment.find('=');
    if (eq == std::string::npos) {
        return;
    }
    const std::string key = comment.substr(0, eq);
    const std::string value = comment.substr(eq + 1);
    try {
        if (key == "source") {
            meta.source = value;
        } else if (key == "t0_s") {
            meta.t0 = std::stod(value);
        } else if (key == "offset_v") {
            meta.offset_v = std::stod(value);
        } else if (key == "flags") {
            std::istringstream is(value);
            std::string flag;
            while (std::getline(is, flag, ';')) {
                if (!flag.empty()) {
                    meta.add_flag(flag);
                }
            }
        } else if (key.rfind("attr.", 0) == 0) {
            meta.attributes[key.substr(5)] = value;
        }
    } catch (const std::logic_error&) {
        // unrecognised annotation; comments never fail a load
    }
}

} // namespace

Trace read_trace(std::istream& in)
{
    const auto doc = detail::read_numeric_csv(in, {"time_s", "voltage_v"});
    std::vector<double> time;
    std::vector<double> voltage;
    time.reserve(doc.rows.size());
    voltage.reserve(doc.rows.size());
    for (const auto& row : doc.rows) {
        if (!time.empty() && !(row.values[0] > time.back())) {
            throw ValidationError("line " + std::to_string(row.line) + ": time stamps must be strictly increasing");
        }
        time.push_back(row.values[0]);
        voltage.push_back(row.values[1]);
    }
    TraceMeta meta;
    for (const auto& c : doc.comments) {
        apply_comment(meta, c);
    }
    return Trace(std::move(time), std::move(voltage), std::move(meta));
}

Trace load_trace(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trace '" + path.string() + "'");
    }
    return read_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out)
{
    const auto& meta = trace.meta();
    if (!meta.source.empty()) {
        out << "# source=" << meta.source << '\n';
    }
    out << "# t0_s=" << detail::format_double(meta.t0) << '\n';
    out << "# offset_v=" << detail::format_double(meta.offset_v) << '\n';
    if (!meta.flags.empty()) {
        out << "# flags=";
        for (std::size_t i = 0; i < meta.flags.size(); ++i) {
            out << (i ? ";" : "") << meta.flags[i];
        }
        out << '\n';
    }
    for (const auto& [key, value] : meta.attributes) {
        out << "# attr." << key << '=' << value << '\n';
    }
    out << "time_s,voltage_v\n";
    const auto t = trace.time();
    const auto v = trace.voltage();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << detail::format_double(t[i]) << ',' << detail::format_double(v[i]) << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out << contents;
        out.flush();
        if (!out) {
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

void store_trace(const Trace& trace, const std::filesystem::path& path)
{
    std::ostringstream os;
    write_trace(trace, os);
    write_file_atomic(path, os.str());
}

double detect_onset(const Trace& raw)
{
    const std::size_t n = raw.size();
    if (n < 5) {
        throw DomainError("detect_onset: need at least 5 samples");
    }
    const auto t = raw.time();
    const auto v = raw.voltage();

    std::vector<double> slope(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        slope[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
    }

    const std::size_t window = std::max<std::size_t>(2, (n + 9) / 10);
    const std::size_t last = std::min(window, n - 2);
    double mean = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
        mean += slope[i];
    }
    mean /= static_cast<double>(last);
    double var = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
        var += (slope[i] - mean) * (slope[i] - mean);
    }
    const double threshold = 3.0 * std::sqrt(var / static_cast<double>(last));

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (slope[i] - mean > threshold) {
            return t[i];
        }
    }
    throw DomainError("detect_onset: no onset found; pass an explicit t0");
}

Trace preprocess(const Trace& raw, const PreprocessOptions& opts)
{
    if (raw.empty()) {
        throw DomainError("preprocess: empty trace");
    }
    const double t0 = opts.t0 ? *opts.t0 : detect_onset(raw);
    const auto t = raw.time();
    const auto v = raw.voltage();
    if (!(t0 >= t.front() && t0 <= t.back())) {
        throw DomainError("preprocess: t0 = " + std::to_string(t0) + " outside the trace span");
    }
    const double offset = raw.value_at(t0);

    std::vector<double> time;
    std::vector<double> voltage;
    time.reserve(raw.size() + 1);
    voltage.reserve(raw.size() + 1);
    const auto first = std::lower_bound(t.begin(), t.end(), t0);
    auto i = static_cast<std::size_t>(first - t.begin());
    if (t[i] != t0) {
        time.push_back(0.0);
        voltage.push_back(0.0);
    }
    for (; i < raw.size(); ++i) {
        time.push_back(t[i] - t0);
        voltage.push_back(v[i] - offset);
    }
    voltage.front() = 0.0;

    TraceMeta meta = raw.meta();
    meta.t0 += t0;
    meta.offset_v += offset;
    meta.add_flag(kFlagPreprocessed);

    const double lowest = *std::min_element(voltage.begin(), voltage.end());
    if (lowest < 0.0) {
        if (lowest >= -opts.noise_floor) {
            for (auto& x : voltage) {
                x = std::max(x, 0.0);
            }
            meta.add_flag(kFlagClamped);
        } else {
            meta.add_flag(kFlagNegative);
        }
    }
    return Trace(std::move(time), std::move(voltage), std::move(meta));
}

Trace resample(const Trace& trace, std::span<const double> grid)
{
    validate_time_grid(grid, "resample grid");
    std::vector<double> voltage;
    voltage.reserve(grid.size());
    for (const double g : grid) {
        if (trace.empty() || g < trace.time().front() || g > trace.time().back()) {
            throw DomainError("resample: grid point " + std::to_string(g) +
                              " outside the trace span (no extrapolation)");
        }
        voltage.push_back(trace.value_at(g));
    }
    TraceMeta meta = trace.meta();
    meta.add_flag("resampled");
    return Trace(std::vector<double>(grid.begin(), grid.end()), std::move(voltage), std::move(meta));
}

Trace add_gaussian_noise(const Trace& trace, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw DomainError("add_gaussian_noise: sigma must be >= 0");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> voltage(trace.voltage().begin(), trace.voltage().end());
    if (sigma > 0.0) {
        for (auto& x : voltage) {
            x += noise(rng);
        }
    }
    TraceMeta meta = trace.meta();
    meta.attributes["noise_sigma"] = detail::format_double(sigma);
    meta.attributes["noise_seed"] = std::to_string(seed);
    return Trace(std::vector<double>(trace.time().begin(), trace.time().end()), std::move(voltage), std::move(meta));
}

} // namespace traceio
} // namespace macromc
