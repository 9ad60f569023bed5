#include "macromc/fitting.hpp"

#include "macromc/error.hpp"
#include "macromc/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace macromc::fitting {

namespace {

constexpr double kDefaultGammaMax = 25.0;
constexpr double kConditionLimit = 1e12;

bool cell_less(const GridCell& a, const GridCell& b)
{
    return std::tie(a.mse, a.k1, a.k2, a.gamma) < std::tie(b.mse, b.k1, b.k2, b.gamma);
}

bool estimate_less(const ChannelEstimate& a, const ChannelEstimate& b)
{
    return std::tie(a.mse, a.k1, a.k2, a.gamma) < std::tie(b.mse, b.k1, b.k2, b.gamma);
}

void check_measured(const Trace& measured, const SearchConfig& search)
{
    if (measured.empty()) {
        throw NoSignalError("estimate_channel_params: empty trace");
    }
    if (measured.time().front() < 0.0) {
        throw ValidationError("estimate_channel_params: trace must be t0-aligned (times >= 0)");
    }
    const double swing = measured.max_voltage() - measured.min_voltage();
    if (swing < search.min_signal) {
        std::ostringstream os;
        os << "estimate_channel_params: peak-to-peak " << swing << " V below " << search.min_signal
           << " V; no signal to fit";
        throw NoSignalError(os.str());
    }
}

/// Residuals of the end-to-end model in log-parameters (ln k1, ln k2, ln gamma).
class ChannelResidual {
public:
    ChannelResidual(const Trace& measured, const TransmitterSpec& tx, const SensorSpec& sensor, double s)
        : time_(measured.time().begin(), measured.time().end()),
          voltage_(measured.voltage().begin(), measured.voltage().end()), tx_(tx), sensor_(sensor), s_(s)
    {
    }

    Eigen::VectorXd operator()(const Eigen::VectorXd& q) const
    {
        const double k1 = std::exp(q[0]);
        const double k2 = std::exp(q[1]);
        TransmitterSpec tx = tx_;
        tx.gamma = std::exp(q[2]);
        const double C0 = channel::initial_concentration(tx, s_);
        Eigen::VectorXd r(static_cast<Eigen::Index>(time_.size()));
        for (std::size_t i = 0; i < time_.size(); ++i) {
            const double B = kinetics::bound_concentration_unchecked(C0, k1, k2, time_[i]);
            r[static_cast<Eigen::Index>(i)] = sensor::voltage_from_concentration_unchecked(B, sensor_) - voltage_[i];
        }
        return r;
    }

private:
    std::vector<double> time_;
    std::vector<double> voltage_;
    TransmitterSpec tx_;
    SensorSpec sensor_;
    double s_;
};

ParameterSummary summarize(const std::vector<double>& xs)
{
    ParameterSummary out;
    const auto n = static_cast<double>(xs.size());
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (const double x : xs) {
            ss += (x - out.mean) * (x - out.mean);
        }
        out.stddev = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

TrendVerdict classify(const std::vector<double>& means, double band)
{
    TrendVerdict v;
    v.band = band;
    v.strictly_increasing = true;
    v.strictly_decreasing = true;
    for (std::size_t i = 1; i < means.size(); ++i) {
        v.strictly_increasing = v.strictly_increasing && means[i] > means[i - 1];
        v.strictly_decreasing = v.strictly_decreasing && means[i] < means[i - 1];
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
    v.within_band = std::all_of(means.begin(), means.end(),
                                [&](double m) { return std::abs(m - grand) <= band * std::abs(grand); });
    return v;
}

} // namespace

double mse(const Trace& model, const Trace& measured)
{
    if (model.size() != measured.size()) {
        throw AlignmentError("mse: traces have " + std::to_string(model.size()) + " and " +
                             std::to_string(measured.size()) + " samples; resample to a common grid");
    }
    if (model.empty()) {
        throw AlignmentError("mse: traces are empty");
    }
    const auto tm = model.time();
    const auto tf = measured.time();
    const auto vm = model.voltage();
    const auto vf = measured.voltage();
    double sum = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (std::abs(tm[i] - tf[i]) > 1e-9) {
            throw AlignmentError("mse: time stamps differ at sample " + std::to_string(i) +
                                 "; resample to a common grid");
        }
        const double d = vm[i] - vf[i];
        sum += d * d;
    }
    return sum / static_cast<double>(model.size());
}

std::pair<SensitivityCoeffs, FitResult> fit_sensitivity(const SensitivityTable& table)
{
    const auto& x = table.concentration;
    const auto& y = table.ratio;
    if (x.size() != y.size()) {
        throw ValidationError("fit_sensitivity: concentration and ratio columns differ in length");
    }
    if (x.empty()) {
        throw ValidationError("fit_sensitivity: empty table");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !std::isfinite(x[i])) {
            throw ValidationError("fit_sensitivity: concentrations must be positive");
        }
        if (i > 0 && !(x[i] > x[i - 1])) {
            throw ValidationError("fit_sensitivity: concentrations must be strictly increasing");
        }
        if (!std::isfinite(y[i])) {
            throw ValidationError("fit_sensitivity: non-finite ratio");
        }
    }

    std::vector<std::string> warnings;
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    const double yscale = std::max({std::abs(*ymin_it), std::abs(*ymax_it), 1e-12});
    const bool constant = (*ymax_it - *ymin_it) <= 1e-12 * yscale;
    if (x.size() < 4) {
        warnings.emplace_back("rank-deficient: " + std::to_string(x.size()) +
                              " points cannot determine three coefficients with a residual");
    }
    if (constant) {
        warnings.emplace_back("rank-deficient: constant ratio column");
    }

    // Start from a log-log line through the positive points with c = 0.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] > 0.0) {
            const double lx = std::log(x[i]);
            const double ly = std::log(y[i]);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++used;
        }
    }
    double b0 = -0.5;
    double a0 = 1.0;
    if (used >= 2) {
        const double nu = static_cast<double>(used);
        const double denom = nu * sxx - sx * sx;
        if (denom > 0.0) {
            b0 = (nu * sxy - sx * sy) / denom;
        }
        if (!(b0 < -1e-6)) {
            b0 = -0.5;
        }
        a0 = std::exp((sy - b0 * sx) / nu);
    } else if (used == 1) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y[i] > 0.0) {
                a0 = y[i] / std::pow(x[i], b0);
            }
        }
    }

    FitProblem problem;
    problem.initial = Eigen::Vector3d(a0, b0, 0.0);
    problem.lower = Eigen::Vector3d(a0 * 1e-6, -20.0, -10.0 * yscale);
    problem.upper = Eigen::Vector3d(a0 * 1e6, -1e-9, 10.0 * yscale);
    problem.scaling = Eigen::Vector3d(a0, std::max(std::abs(b0), 0.1), yscale);
    problem.residuals = [&x, &y](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i) {
            r[static_cast<Eigen::Index>(i)] = p[0] * std::pow(x[i], p[1]) + p[2] - y[i];
        }
        return r;
    };

    FitResult fit = levenberg_marquardt(problem);
    if (!(fit.condition < kConditionLimit)) {
        warnings.emplace_back("rank-deficient: ill-conditioned Jacobian");
    }
    if (!warnings.empty()) {
        fit.converged = false;
        fit.warnings.insert(fit.warnings.end(), warnings.begin(), warnings.end());
    }
    return {SensitivityCoeffs{fit.params[0], fit.params[1], fit.params[2]}, std::move(fit)};
}

void SearchConfig::validate() const
{
    auto check_range = [](double lo, double hi, const char* name) {
        if (!(std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && lo <= hi)) {
            throw ValidationError(std::string("SearchConfig: ") + name + " bounds must satisfy 0 < min <= max");
        }
    };
    check_range(k1_min, k1_max, "k1");
    check_range(k2_min, k2_max, "k2");
    if (!(gamma_min >= 1.0) || !std::isfinite(gamma_min)) {
        throw ValidationError("SearchConfig: gamma_min must be >= 1");
    }
    if (gamma_max && !(*gamma_max >= gamma_min && std::isfinite(*gamma_max))) {
        throw ValidationError("SearchConfig: gamma_max must be >= gamma_min");
    }
    if (grid_k1 == 0 || grid_k2 == 0 || grid_gamma == 0) {
        throw ValidationError("SearchConfig: grid sizes must be >= 1");
    }
    if (refine_top == 0) {
        throw ValidationError("SearchConfig: refine_top must be >= 1");
    }
    if (!(mse_threshold >= 0.0)) {
        throw ValidationError("SearchConfig: mse_threshold must be >= 0");
    }
}

double SearchConfig::effective_gamma_max(const TransmitterSpec& tx, double s) const
{
    if (gamma_max) {
        return *gamma_max;
    }
    if (theta_rv) {
        const ConeGeometry geom{s, tx.theta, *theta_rv};
        geom.validate();
        return geom.max_gamma();
    }
    return kDefaultGammaMax;
}

std::vector<double> log_space(double lo, double hi, std::size_t n)
{
    if (n == 0) {
        return {};
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> out(n);
    const double a = std::log(lo);
    const double step = (std::log(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(a + step * static_cast<double>(i));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<GridCell> channel_grid_search(const Trace& measured, const TransmitterSpec& tx,
                                          const SensorSpec& sensor, double s, const SearchConfig& search)
{
    search.validate();
    sensor.validate();
    check_measured(measured, search);

    TransmitterSpec unit = tx;
    unit.gamma = 1.0;
    const double C0_unit = channel::initial_concentration(unit, s);

    const auto k1s = log_space(search.k1_min, search.k1_max, search.grid_k1);
    const auto k2s = log_space(search.k2_min, search.k2_max, search.grid_k2);
    const auto gammas = log_space(search.gamma_min, search.effective_gamma_max(tx, s), search.grid_gamma);

    const auto t = measured.time();
    const auto v = measured.voltage();
    const std::size_t n = measured.size();
    const auto& sc = sensor.sens;

    // With the power law fixed, (gamma B)^b = gamma^b B^b: one pow per sample and rate pair.
    std::vector<double> power(n);
    std::vector<GridCell> cells;
    cells.reserve(k1s.size() * k2s.size() * gammas.size());
    for (const double k1 : k1s) {
        for (const double k2 : k2s) {
            for (std::size_t i = 0; i < n; ++i) {
                const double B = kinetics::bound_concentration_unchecked(C0_unit, k1, k2, t[i]);
                power[i] = B > 0.0 ? std::pow(B, sc.b) : 0.0;
            }
            for (const double gamma : gammas) {
                const double scale = sc.a * std::pow(gamma, sc.b);
                double sum = 0.0;
                bool feasible = true;
                for (std::size_t i = 0; i < n; ++i) {
                    double model = 0.0;
                    if (power[i] > 0.0 && std::isfinite(power[i])) {
                        const double ratio = scale * power[i] + sc.c;
                        if (!(ratio > 0.0)) {
                            feasible = false;
                            break;
                        }
                        model = sensor.Ein * sensor.RL / (sensor.Ro * (ratio + sensor.RL / sensor.Ro));
                    }
                    const double d = model - v[i];
                    sum += d * d;
                }
                if (feasible) {
                    cells.push_back({k1, k2, gamma, sum / static_cast<double>(n)});
                }
            }
        }
    }

    const std::size_t keep = std::min(search.refine_top, cells.size());
    std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(keep), cells.end(), cell_less);
    cells.resize(keep);
    return cells;
}

std::optional<ChannelEstimate> canonicalize(const ChannelEstimate& est, double gamma_min)
{
    ChannelEstimate out = est;
    if (est.k1 >= est.k2) {
        out.canonical = true;
        return out;
    }
    const double swapped_gamma = est.gamma * est.k1 / est.k2;
    if (swapped_gamma < gamma_min * (1.0 - 1e-9)) {
        return std::nullopt;
    }
    out.k1 = est.k2;
    out.k2 = est.k1;
    out.gamma = std::max(swapped_gamma, gamma_min);
    out.canonical = true;
    return out;
}

ChannelEstimate estimate_channel_params(const Trace& measured, const TransmitterSpec& tx,
                                        const SensorSpec& sensor, double s, const SearchConfig& search)
{
    const auto cells = channel_grid_search(measured, tx, sensor, s, search);
    if (cells.empty()) {
        throw NoSignalError("estimate_channel_params: no feasible grid cell; the trace exceeds the sensor model");
    }
    const double gamma_max = search.effective_gamma_max(tx, s);

    FitProblem problem;
    problem.residuals = ChannelResidual(measured, tx, sensor, s);
    problem.lower = Eigen::Vector3d(std::log(search.k1_min), std::log(search.k2_min), std::log(search.gamma_min));
    problem.upper = Eigen::Vector3d(std::log(search.k1_max), std::log(search.k2_max), std::log(gamma_max));
    problem.scaling = Eigen::Vector3d::Ones();

    std::vector<ChannelEstimate> candidates;
    for (const auto& cell : cells) {
        problem.initial = Eigen::Vector3d(std::log(cell.k1), std::log(cell.k2), std::log(cell.gamma))
                              .cwiseMax(problem.lower)
                              .cwiseMin(problem.upper);
        FitResult fit;
        try {
            fit = levenberg_marquardt(problem);
        } catch (const DomainError&) {
            continue; // grid approximation feasible, exact model not
        }
        ChannelEstimate est;
        est.k1 = std::exp(fit.params[0]);
        est.k2 = std::exp(fit.params[1]);
        est.gamma = std::min(std::max(std::exp(fit.params[2]), search.gamma_min), gamma_max);
        est.mse = fit.mse;
        est.converged = fit.converged;
        est.iterations = fit.iterations;
        est.condition = fit.condition;
        est.grid_best = cells.front();
        est.warnings = fit.warnings;
        if (auto canon = canonicalize(est, search.gamma_min)) {
            candidates.push_back(std::move(*canon));
        } else {
            est.canonical = false;
            est.warnings.emplace_back("k1 < k2 kept: swapping would push gamma below its lower bound");
            candidates.push_back(std::move(est));
        }
    }
    if (candidates.empty()) {
        throw NoSignalError("estimate_channel_params: every refinement start was infeasible");
    }

    ChannelEstimate best = *std::min_element(candidates.begin(), candidates.end(), estimate_less);
    if (best.mse > search.mse_threshold) {
        best.low_confidence = true;
        std::ostringstream os;
        os << "low confidence: mse " << best.mse << " V^2 above threshold " << search.mse_threshold << " V^2";
        best.warnings.push_back(os.str());
    }
    return best;
}

std::string TrendVerdict::describe(const std::string& name) const
{
    std::ostringstream os;
    os << name << ' ';
    if (within_band) {
        os << "within ±" << band * 100.0 << "% of mean";
    } else if (strictly_decreasing) {
        os << "strictly decreasing";
    } else if (strictly_increasing) {
        os << "strictly increasing";
    } else {
        os << "no monotone trend";
    }
    return os.str();
}

std::string TrendReport::summary() const
{
    return k1.describe("k1") + "; " + k2.describe("k2") + "; " + gamma.describe("gamma");
}

TrendReport distance_trend(const std::vector<DistanceEstimate>& estimates, double band)
{
    std::vector<DistanceEstimate> sorted = estimates;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const DistanceEstimate& a, const DistanceEstimate& b) { return a.s < b.s; });

    TrendReport report;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        std::vector<double> k1, k2, gamma;
        while (j < sorted.size() && std::abs(sorted[j].s - sorted[i].s) <= 1e-9) {
            k1.push_back(sorted[j].estimate.k1);
            k2.push_back(sorted[j].estimate.k2);
            gamma.push_back(sorted[j].estimate.gamma);
            ++j;
        }
        report.rows.push_back({sorted[i].s, k1.size(), summarize(k1), summarize(k2), summarize(gamma)});
        i = j;
    }
    if (report.rows.size() < 2) {
        throw InsufficientDataError("distance_trend: need estimates at two or more distinct distances");
    }

    std::vector<double> m1, m2, mg;
    for (const auto& row : report.rows) {
        m1.push_back(row.k1.mean);
        m2.push_back(row.k2.mean);
        mg.push_back(row.gamma.mean);
    }
    report.k1 = classify(m1, band);
    report.k2 = classify(m2, band);
    report.gamma = classify(mg, band);
    return report;
}

} // namespace macromc::fitting
