#pragma once

// Clock-switch overhead of reprogramming the PLL between time steps.

#include <cmath>

#include "railscale/error.hpp"
#include "railscale/text_io.hpp"

namespace railscale {

struct PllConfig {
    static constexpr double max_lock_s = 100e-6;

    double p_pll_w = 0.1;
    double t_lock_s = 10e-6;
    // Two PLLs behind a clock mux: one drives the design while the other is
    // reprogrammed for the next step.
    bool dual = true;

    void validate() const
    {
        if (!(p_pll_w > 0.0)) {
            throw ConfigError("p_pll_w must be > 0");
        }
        if (!(t_lock_s > 0.0 && t_lock_s <= max_lock_s)) {
            throw ConfigError("t_lock_s must be in (0, 100e-6] s, got "
                + text::format_double(t_lock_s));
        }
    }
};

struct PllOverhead {
    double energy_j = 0.0;
    double stall_s = 0.0;
};

// Single PLL: design energy while waiting for lock plus PLL energy over
// tau + t_lock. Dual PLL: both PLLs for tau, no stall.
inline PllOverhead step_overhead_energy(const PllConfig& cfg, double p_design_w, double tau_s)
{
    cfg.validate();
    if (!(tau_s > cfg.t_lock_s)) {
        throw RangeError("step shorter than lock time (tau " + text::format_double(tau_s)
            + " s <= t_lock " + text::format_double(cfg.t_lock_s) + " s)");
    }
    if (!(p_design_w >= 0.0)) {
        throw RangeError("design power must be >= 0");
    }
    if (cfg.dual) {
        return {2.0 * cfg.p_pll_w * tau_s, 0.0};
    }
    return {p_design_w * cfg.t_lock_s + cfg.p_pll_w * (tau_s + cfg.t_lock_s), cfg.t_lock_s};
}

// Break-even step length P_design * t_lock / P_pll, the t_lock << tau
// simplification of single == dual.
inline double break_even_tau(const PllConfig& cfg, double p_design_w)
{
    cfg.validate();
    if (!(p_design_w > 0.0)) {
        throw RangeError("design power must be > 0");
    }
    return p_design_w * cfg.t_lock_s / cfg.p_pll_w;
}

// Exact tau where single and dual energies are equal:
// t_lock * (P_design + P_pll) / P_pll. Dual is cheaper below it, single above.
inline double exact_crossover_tau(const PllConfig& cfg, double p_design_w)
{
    cfg.validate();
    if (!(p_design_w > 0.0)) {
        throw RangeError("design power must be > 0");
    }
    return cfg.t_lock_s * (p_design_w + cfg.p_pll_w) / cfg.p_pll_w;
}

} // namespace railscale
