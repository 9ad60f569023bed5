#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace macromc {

/// Bookkeeping attached to a trace. `t0` and `offset_v` accumulate over preprocessing.
struct TraceMeta {
    double t0 = 0.0;
    double offset_v = 0.0;
    std::string source;
    std::vector<std::string> flags;
    /// Free-form key/value annotations (model parameters of simulated traces, etc.).
    std::map<std::string, std::string> attributes;

    bool has_flag(const std::string& flag) const;
    void add_flag(const std::string& flag);
};

/// Time-stamped voltage samples: strictly increasing times (s), finite values (V).
class Trace {
public:
    Trace() = default;
    /// Throws ValidationError when the samples violate the trace invariants.
    Trace(std::vector<double> time, std::vector<double> voltage, TraceMeta meta = {});

    std::size_t size() const noexcept { return time_.size(); }
    bool empty() const noexcept { return time_.empty(); }

    std::span<const double> time() const noexcept { return time_; }
    std::span<const double> voltage() const noexcept { return voltage_; }

    const TraceMeta& meta() const noexcept { return meta_; }
    TraceMeta& meta() noexcept { return meta_; }

    /// Linear interpolation inside [front, back]. Throws DomainError outside.
    double value_at(double t) const;

    double min_voltage() const;
    double max_voltage() const;

    friend bool operator==(const Trace& lhs, const Trace& rhs)
    {
        return lhs.time_ == rhs.time_ && lhs.voltage_ == rhs.voltage_;
    }

private:
    std::vector<double> time_;
    std::vector<double> voltage_;
    TraceMeta meta_;
};

/// Checks that `times` is strictly increasing with finite entries.
void validate_time_grid(std::span<const double> times, const char* what);

namespace traceio {

/// Options of the offset/onset preprocessing.
struct PreprocessOptions {
    /// Explicit start time; nullopt selects the onset detector.
    std::optional<double> t0;
    /// Negative dips no deeper than this are clamped to zero.
    double noise_floor = 0.005;
};

/// Reads `time_s,voltage_v` CSV. Comment lines `# key=value` restore the metadata
/// written by store_trace; other comments are ignored.
Trace load_trace(const std::filesystem::path& path);
Trace read_trace(std::istream& in);

/// Writes the trace atomically (temporary file + rename), values in shortest round-trip form.
void store_trace(const Trace& trace, const std::filesystem::path& path);
void write_trace(const Trace& trace, std::ostream& out);

/// Onset time: the first sample whose centred slope exceeds the mean slope of the
/// initial 10% of the trace by more than three standard deviations.
double detect_onset(const Trace& raw);

/// Shifts the time axis to start at t0 (dropping earlier samples), subtracts the
/// voltage at t0 and handles negative dips per `opts.noise_floor`.
Trace preprocess(const Trace& raw, const PreprocessOptions& opts = {});

/// Linear interpolation of `trace` on `grid`. Extrapolation is a DomainError.
Trace resample(const Trace& trace, std::span<const double> grid);

/// Adds i.i.d. N(0, sigma^2) noise from a seeded mt19937_64.
Trace add_gaussian_noise(const Trace& trace, double sigma, std::uint64_t seed);

/// Writes `contents` to `path` through a sibling temporary file and a rename,
/// creating missing parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

} // namespace traceio
} // namespace macromc
