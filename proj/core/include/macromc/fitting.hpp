#pragma once

#include "macromc/angle.hpp"
#include "macromc/channel.hpp"
#include "macromc/levenberg_marquardt.hpp"
#include "macromc/sensor.hpp"
#include "macromc/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace macromc::fitting {

/// Mean of squared sample differences. Both traces must share their time stamps (within 1e-9 s).
double mse(const Trace& model, const Trace& measured);

/// Power-law fit of a sensitivity table. Tables with fewer than four points or a
/// constant ratio column come back with converged = false and a rank-deficiency warning.
std::pair<SensitivityCoeffs, FitResult> fit_sensitivity(const SensitivityTable& table);

/// Search box and grid of the channel-parameter estimator.
struct SearchConfig {
    double k1_min = 0.05;
    double k1_max = 50.0;
    double k2_min = 0.05;
    double k2_max = 50.0;
    double gamma_min = 1.0;
    /// Explicit upper bound on gamma; otherwise derived from theta_rv, else 25.
    std::optional<double> gamma_max;
    std::optional<Angle> theta_rv;

    std::size_t grid_k1 = 24;
    std::size_t grid_k2 = 24;
    std::size_t grid_gamma = 16;
    std::size_t refine_top = 5;

    double mse_threshold = 0.021; ///< V^2, above it the estimate is low-confidence
    double min_signal = 1e-3;     ///< V, minimum peak-to-peak of a usable trace
    std::uint64_t seed = 1;

    void validate() const;
    double effective_gamma_max(const TransmitterSpec& tx, double s) const;
};

/// One evaluated grid point.
struct GridCell {
    double k1 = 0.0;
    double k2 = 0.0;
    double gamma = 0.0;
    double mse = 0.0;
};

struct ChannelEstimate {
    double k1 = 0.0;
    double k2 = 0.0;
    double gamma = 1.0;
    bool canonical = false; ///< k1 >= k2 convention applied
    double mse = 0.0;       ///< V^2
    bool low_confidence = false;
    bool converged = false;
    int iterations = 0;
    double condition = 0.0;
    GridCell grid_best;
    std::vector<std::string> warnings;
};

/// Log-spaced points lo, ..., hi (n >= 2), or {lo} when n == 1.
std::vector<double> log_space(double lo, double hi, std::size_t n);

/// Coarse stage of the estimator: the `search.refine_top` best cells, ordered by
/// (mse, k1, k2, gamma). Infeasible cells are skipped.
std::vector<GridCell> channel_grid_search(const Trace& measured, const TransmitterSpec& tx,
                                          const SensorSpec& sensor, double s, const SearchConfig& search);

/// Maps (k1, k2, gamma) with k1 < k2 to the equivalent (k2, k1, gamma k1 / k2).
/// Returns nullopt when the swapped gamma would fall below `gamma_min`.
std::optional<ChannelEstimate> canonicalize(const ChannelEstimate& est, double gamma_min);

/// Estimates (k1, k2, gamma) from a preprocessed trace: coarse log grid, LM refinement of
/// the best cells, canonicalisation to k1 >= k2. The gamma of `tx` is ignored.
/// Throws NoSignalError for a flat trace.
ChannelEstimate estimate_channel_params(const Trace& measured, const TransmitterSpec& tx,
                                        const SensorSpec& sensor, double s, const SearchConfig& search = {});

/// Estimate tagged with the distance it was taken at.
struct DistanceEstimate {
    double s = 0.0;
    ChannelEstimate estimate;
};

struct ParameterSummary {
    double mean = 0.0;
    double stddev = 0.0; ///< sample (n - 1) convention, 0 for a single estimate
};

struct TrendRow {
    double s = 0.0;
    std::size_t count = 0;
    ParameterSummary k1;
    ParameterSummary k2;
    ParameterSummary gamma;
};

/// Shape of a per-distance parameter sequence.
struct TrendVerdict {
    bool strictly_increasing = false;
    bool strictly_decreasing = false;
    bool within_band = false; ///< every mean within band of the grand mean
    double band = 0.05;

    std::string describe(const std::string& name) const;
};

struct TrendReport {
    std::vector<TrendRow> rows; ///< ascending distance
    TrendVerdict k1;
    TrendVerdict k2;
    TrendVerdict gamma;

    std::string summary() const;
};

/// Groups estimates by distance (within 1e-9 m) and classifies the trend of each parameter.
/// Throws InsufficientDataError with fewer than two distinct distances.
TrendReport distance_trend(const std::vector<DistanceEstimate>& estimates, double band = 0.05);

} // namespace macromc::fitting
