#pragma once

// Workload traces: CSV ingest, self-similar synthesis, and load binning.
//
// Synthetic traces come from fractional Gaussian noise (Davies-Harte
// circulant embedding). Each step aggregates K base intervals of a
// lambda-rate arrival process whose base counts have variance IDC * lambda;
// aggregating fGn keeps it exactly self-similar, so a step count has mean
// K*lambda and standard deviation sqrt(IDC*lambda) * K^H. Loads are counts
// divided by the expected peak (mean + 4 sigma), and K is the unique
// aggregation level at which that normalization yields the requested mean
// load.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fftw3.h>
#include <nlohmann/json.hpp>

#include "railscale/error.hpp"
#include "railscale/text_io.hpp"

namespace railscale {

using BinIndex = std::size_t;

struct WorkloadTrace {
    std::vector<double> loads;  // fraction of expected peak, in [0, 1]
    double tau_s = 1.0;
    nlohmann::json meta = nlohmann::json::object();

    std::size_t size() const noexcept { return loads.size(); }

    void validate() const
    {
        if (loads.empty()) {
            throw ConfigError("trace is empty");
        }
        if (!(tau_s > 0.0) || !std::isfinite(tau_s)) {
            throw ConfigError("trace step length tau_s must be > 0");
        }
        for (std::size_t i = 0; i < loads.size(); ++i) {
            if (!(loads[i] >= 0.0 && loads[i] <= 1.0)) {
                throw ConfigError("trace step " + std::to_string(i) + ": load "
                    + text::format_double(loads[i]) + " outside [0, 1]");
            }
        }
    }
};

struct GenParams {
    double mean_load = 0.40;
    double hurst = 0.76;
    double idc = 500.0;
    double lambda_rate = 1000.0;
    std::size_t n_steps = 4096;
    std::uint64_t seed = 42;
    double tau_s = 1.0;

    static constexpr std::size_t min_steps = 64;
    // Expected peak sits this many standard deviations above the mean.
    static constexpr double peak_sigmas = 4.0;

    void validate() const
    {
        if (!(hurst > 0.5 && hurst <= 1.0)) {
            throw ConfigError("hurst must be in (0.5, 1], got " + text::format_double(hurst));
        }
        if (!(mean_load > 0.0 && mean_load < 1.0)) {
            throw ConfigError("mean_load must be in (0, 1), got " + text::format_double(mean_load));
        }
        if (!(idc > 0.0) || !std::isfinite(idc)) {
            throw ConfigError("idc must be > 0");
        }
        if (!(lambda_rate > 0.0) || !std::isfinite(lambda_rate)) {
            throw ConfigError("lambda must be > 0");
        }
        if (n_steps < min_steps) {
            throw ConfigError("n_steps " + std::to_string(n_steps)
                + " too short for self-similar synthesis (need >= "
                + std::to_string(min_steps) + ")");
        }
        if (!(tau_s > 0.0)) {
            throw ConfigError("tau_s must be > 0");
        }
    }
};

inline void to_json(nlohmann::json& j, const GenParams& p)
{
    j = nlohmann::json{{"mean_load", p.mean_load}, {"hurst", p.hurst}, {"idc", p.idc},
        {"lambda", p.lambda_rate}, {"n_steps", p.n_steps}, {"seed", p.seed}, {"tau_s", p.tau_s}};
}

// Autocovariance of unit-variance fGn at lag k.
inline double fgn_autocovariance(double hurst, double k)
{
    const double h2 = 2.0 * hurst;
    k = std::abs(k);
    return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

namespace detail {

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t n)
{
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) {
        throw std::bad_alloc();
    }
    return FftwBuffer(p);
}

// In-place forward DFT. FFTW planning is not thread-safe; execution is.
inline void forward_dft(fftw_complex* data, std::size_t n)
{
    static std::mutex planner_mutex;
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
}

} // namespace detail

// n samples of unit-variance fractional Gaussian noise.
inline std::vector<double> fractional_gaussian_noise(std::size_t n, double hurst, std::mt19937_64& rng)
{
    if (n == 0) {
        return {};
    }
    const std::size_t half = std::bit_ceil(n);
    const std::size_t m = 2 * half;

    auto buf = detail::fftw_buffer(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t lag = k <= half ? k : m - k;
        buf[k][0] = fgn_autocovariance(hurst, static_cast<double>(lag));
        buf[k][1] = 0.0;
    }
    detail::forward_dft(buf.get(), m);

    double max_eig = 0.0;
    double min_eig = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        max_eig = std::max(max_eig, buf[k][0]);
        min_eig = std::min(min_eig, buf[k][0]);
    }
    if (min_eig < -1e-9 * max_eig) {
        throw Error("circulant embedding is not non-negative definite");
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double scale = std::sqrt(std::max(buf[k][0], 0.0) / static_cast<double>(m));
        const double re = normal(rng);
        const double im = normal(rng);
        buf[k][0] = scale * re;
        buf[k][1] = scale * im;
    }
    detail::forward_dft(buf.get(), m);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = buf[i][0];
    }
    return out;
}

struct GeneratedTrace {
    WorkloadTrace trace;
    std::vector<double> counts;     // arrivals per step
    double base_intervals = 0.0;    // K
    double count_mean = 0.0;
    double count_sd = 0.0;
    double peak = 0.0;
};

inline GeneratedTrace generate_detailed(const GenParams& params)
{
    params.validate();
    std::mt19937_64 rng(params.seed);
    auto z = fractional_gaussian_noise(params.n_steps, params.hurst, rng);

    // Standardize the sample so the trace hits the target moments exactly
    // before clipping.
    const double n = static_cast<double>(z.size());
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : z) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / n);
    for (double& v : z) {
        v = sd > 1e-12 ? (v - mean) / sd : 0.0;
    }

    const double cv = (1.0 / params.mean_load - 1.0) / GenParams::peak_sigmas;
    const double base_cv = std::sqrt(params.idc / params.lambda_rate);
    const double k = params.hurst < 1.0 ? std::pow(cv / base_cv, 1.0 / (params.hurst - 1.0)) : 1.0;

    GeneratedTrace g;
    g.base_intervals = k;
    g.count_mean = k * params.lambda_rate;
    g.count_sd = cv * g.count_mean;
    g.peak = g.count_mean + GenParams::peak_sigmas * g.count_sd;
    g.counts.resize(z.size());
    g.trace.loads.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        g.counts[i] = std::max(0.0, std::round(g.count_mean + g.count_sd * z[i]));
        g.trace.loads[i] = std::clamp(g.counts[i] / g.peak, 0.0, 1.0);
    }
    g.trace.tau_s = params.tau_s;
    g.trace.meta = {{"generator", "fgn-davies-harte"}, {"params", params},
        {"base_intervals_per_step", k}, {"count_mean", g.count_mean},
        {"count_sd", g.count_sd}, {"peak_count", g.peak}};
    return g;
}

inline WorkloadTrace generate(const GenParams& params)
{
    return generate_detailed(params).trace;
}

// Aggregated-variance Hurst estimate: the variance of block means scales as
// k^(2H-2). Uses 20 log-spaced block sizes from 2 to n/32.
inline double estimate_hurst(std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n < 128) {
        throw RangeError("Hurst estimation needs at least 128 samples");
    }
    const double k_lo = std::log(2.0);
    const double k_hi = std::log(static_cast<double>(n) / 32.0);
    constexpr int n_sizes = 20;
    std::vector<std::size_t> sizes;
    for (int i = 0; i < n_sizes; ++i) {
        const double lk = k_lo + (k_hi - k_lo) * i / (n_sizes - 1);
        const auto k = static_cast<std::size_t>(std::llround(std::exp(lk)));
        if (sizes.empty() || sizes.back() != k) {
            sizes.push_back(k);
        }
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto k : sizes) {
        const std::size_t blocks = n / k;
        std::vector<double> means(blocks);
        for (std::size_t b = 0; b < blocks; ++b) {
            means[b] = std::accumulate(x.begin() + b * k, x.begin() + (b + 1) * k, 0.0)
                / static_cast<double>(k);
        }
        const double mu = std::accumulate(means.begin(), means.end(), 0.0) / blocks;
        double ss = 0.0;
        for (double m : means) {
            ss += (m - mu) * (m - mu);
        }
        const double var = ss / static_cast<double>(blocks - 1);
        if (var <= 0.0) {
            continue;
        }
        xs.push_back(std::log(static_cast<double>(k)));
        ys.push_back(std::log(var));
    }
    if (xs.size() < 2) {
        throw RangeError("series has no variance to estimate Hurst from");
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return 1.0 + (sxy / sxx) / 2.0;
}

// Trace CSV: header `load`, one fraction per row. Rows are numbered from 1
// after the header in error messages.
inline WorkloadTrace load_trace(std::string_view source, double tau_s)
{
    const auto ls = text::lines(source);
    std::size_t i = 0;
    while (i < ls.size() && text::trim(ls[i]).empty()) {
        ++i;
    }
    if (i == ls.size()) {
        throw ConfigError("trace file is empty");
    }
    if (text::trim(ls[i]) != "load") {
        throw ConfigError("trace file: expected header 'load'");
    }
    WorkloadTrace t;
    t.tau_s = tau_s;
    std::size_t row = 0;
    for (++i; i < ls.size(); ++i) {
        const auto cell = text::trim(ls[i]);
        if (cell.empty()) {
            continue;
        }
        ++row;
        double v = 0.0;
        if (!text::parse_double(cell, v)) {
            throw ConfigError("trace row " + std::to_string(row) + ": not a number '"
                + std::string(cell) + "'");
        }
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ConfigError("trace row " + std::to_string(row) + ": load "
                + std::string(cell) + " outside [0, 1]");
        }
        t.loads.push_back(v);
    }
    if (t.loads.empty()) {
        throw ConfigError("trace file has no rows");
    }
    t.validate();
    return t;
}

inline WorkloadTrace load_trace_file(const std::string& path, double tau_s)
{
    auto t = load_trace(text::read_file(path), tau_s);
    t.meta = {{"source", path}};
    return t;
}

inline std::string trace_to_csv(const WorkloadTrace& t)
{
    std::string out = "load\n";
    for (double v : t.loads) {
        out += text::format_double(v);
        out += '\n';
    }
    return out;
}

inline void check_bins(std::size_t m)
{
    if (m < 2) {
        throw ConfigError("bin count must be >= 2, got " + std::to_string(m));
    }
}

// floor(load * m), with load == 1 mapped into the top bin.
inline BinIndex discretize(double load, std::size_t m)
{
    check_bins(m);
    if (!(load >= 0.0 && load <= 1.0)) {
        throw RangeError("load " + text::format_double(load) + " outside [0, 1]");
    }
    const auto b = static_cast<BinIndex>(std::floor(load * static_cast<double>(m)));
    return std::min(b, m - 1);
}

// Load a correctly predicted bin is provisioned for: its upper edge.
inline double bin_capacity(BinIndex b, std::size_t m)
{
    check_bins(m);
    return static_cast<double>(b + 1) / static_cast<double>(m);
}

} // namespace railscale
