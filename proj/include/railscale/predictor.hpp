#pragma once

// Discrete-time Markov-chain predictor over M load bins.
//
// Transition probabilities are maximum-likelihood estimates from observed
// transition counts with add-one smoothing. After warm-up the counts only
// change when a streak of consecutive mispredictions reaches the refresh
// threshold; transitions seen since the last refresh are staged and folded
// in at that point.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "railscale/error.hpp"
#include "railscale/text_io.hpp"
#include "railscale/workload.hpp"

namespace railscale {

struct PredictorParams {
    std::size_t bins = 25;
    std::size_t warmup_steps = 200;
    double margin = 0.05;
    std::size_t refresh_threshold = 3;

    void validate() const
    {
        check_bins(bins);
        if (!(margin > 1.0 / static_cast<double>(bins))) {
            throw ConfigError("margin " + text::format_double(margin)
                + " must exceed 1/bins = " + text::format_double(1.0 / bins)
                + ": margin cannot discriminate adjacent bins");
        }
        if (!(margin < 1.0)) {
            throw ConfigError("margin must be < 1");
        }
        if (refresh_threshold < 1) {
            throw ConfigError("refresh_threshold must be >= 1");
        }
    }
};

// Optional periodic bias: phase p of each period nudges bin `bins[p]`.
struct PhasePriors {
    std::vector<BinIndex> bins;
    double weight = 0.5;
};

class MarkovPredictor {
public:
    using Matrix = std::vector<std::vector<double>>;
    using CountMatrix = std::vector<std::vector<std::size_t>>;

    explicit MarkovPredictor(PredictorParams params)
        : params_(params)
    {
        params_.validate();
        const auto m = params_.bins;
        counts_.assign(m, std::vector<std::size_t>(m, 0));
        staged_.assign(m, std::vector<std::size_t>(m, 0));
        probs_.assign(m, std::vector<double>(m, 1.0 / static_cast<double>(m)));
    }

    MarkovPredictor(std::size_t bins, std::size_t warmup_steps, double margin,
        std::size_t refresh_threshold)
        : MarkovPredictor(PredictorParams{bins, warmup_steps, margin, refresh_threshold})
    {
    }

    const PredictorParams& params() const noexcept { return params_; }
    std::size_t bins() const noexcept { return params_.bins; }
    const Matrix& probs() const noexcept { return probs_; }
    const CountMatrix& counts() const noexcept { return counts_; }
    std::optional<BinIndex> state() const noexcept { return state_; }
    std::size_t mispredict_streak() const noexcept { return streak_; }
    std::size_t steps_seen() const noexcept { return steps_; }
    bool warmed_up() const noexcept { return steps_ >= params_.warmup_steps; }

    void set_phase_priors(PhasePriors priors)
    {
        for (auto b : priors.bins) {
            check_bin(b);
        }
        if (!(priors.weight >= 0.0)) {
            throw ConfigError("phase prior weight must be >= 0");
        }
        priors_ = std::move(priors);
    }

    // Learn one observed bin; the first observation only sets the state.
    void train(BinIndex observed)
    {
        check_bin(observed);
        if (state_) {
            ++counts_[*state_][observed];
            renormalize_row(*state_);
        }
        state_ = observed;
        ++steps_;
    }

    // Argmax of the current state's row; ties go to the higher bin. Before
    // any observation, every bin ties.
    BinIndex predict_next() const
    {
        const auto m = params_.bins;
        std::vector<double> score(m, 1.0 / static_cast<double>(m));
        if (state_) {
            score = probs_[*state_];
        }
        if (!priors_.bins.empty()) {
            score[priors_.bins[steps_ % priors_.bins.size()]] += priors_.weight;
        }
        BinIndex best = m - 1;
        for (BinIndex j = m; j-- > 0;) {
            if (score[j] > score[best]) {
                best = j;
            }
        }
        return best;
    }

    // Compare the actual bin against the prediction for this step, move to
    // the actual state and refresh the counts once the misprediction streak
    // reaches the threshold. Returns whether the step was mispredicted.
    bool observe(BinIndex actual)
    {
        check_bin(actual);
        const BinIndex predicted = predict_next();
        const bool miss = predicted != actual;
        if (state_) {
            ++staged_[*state_][actual];
        }
        streak_ = miss ? streak_ + 1 : 0;
        state_ = actual;
        ++steps_;
        if (streak_ >= params_.refresh_threshold) {
            fold_staged();
            streak_ = 0;
        }
        return miss;
    }

    nlohmann::json to_json() const
    {
        return {{"bins", params_.bins}, {"warmup_steps", params_.warmup_steps},
            {"margin", params_.margin}, {"refresh_threshold", params_.refresh_threshold},
            {"counts", counts_}, {"probs", probs_},
            {"state", state_ ? nlohmann::json(*state_) : nlohmann::json(nullptr)}};
    }

    // Loads a trained model. Probabilities are recomputed from the counts and
    // must agree with the stored ones.
    static MarkovPredictor from_json(const nlohmann::json& j)
    {
        try {
            PredictorParams p;
            p.bins = j.at("bins").get<std::size_t>();
            p.warmup_steps = j.value("warmup_steps", p.warmup_steps);
            p.margin = j.value("margin", p.margin);
            p.refresh_threshold = j.value("refresh_threshold", p.refresh_threshold);
            MarkovPredictor pred(p);
            const auto counts = j.at("counts").get<CountMatrix>();
            if (counts.size() != p.bins) {
                throw ConfigError("predictor counts must be bins x bins");
            }
            for (const auto& row : counts) {
                if (row.size() != p.bins) {
                    throw ConfigError("predictor counts must be bins x bins");
                }
            }
            pred.counts_ = counts;
            for (std::size_t i = 0; i < p.bins; ++i) {
                pred.renormalize_row(i);
            }
            if (j.contains("probs")) {
                const auto probs = j.at("probs").get<Matrix>();
                if (probs.size() != p.bins) {
                    throw ConfigError("predictor probs must be bins x bins");
                }
                for (std::size_t i = 0; i < p.bins; ++i) {
                    if (probs[i].size() != p.bins) {
                        throw ConfigError("predictor probs must be bins x bins");
                    }
                    for (std::size_t k = 0; k < p.bins; ++k) {
                        if (std::abs(probs[i][k] - pred.probs_[i][k]) > 1e-9) {
                            throw ConfigError("predictor probs disagree with counts at ("
                                + std::to_string(i) + ", " + std::to_string(k) + ")");
                        }
                    }
                }
            }
            if (j.contains("state") && !j.at("state").is_null()) {
                const auto s = j.at("state").get<BinIndex>();
                pred.check_bin(s);
                pred.state_ = s;
            }
            // A loaded model is already trained.
            pred.steps_ = p.warmup_steps;
            return pred;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("predictor JSON: ") + e.what());
        }
    }

private:
    void check_bin(BinIndex b) const
    {
        if (b >= params_.bins) {
            throw RangeError("bin " + std::to_string(b) + " outside [0, "
                + std::to_string(params_.bins) + ")");
        }
    }

    void renormalize_row(std::size_t i)
    {
        const auto m = params_.bins;
        std::size_t total = 0;
        for (auto c : counts_[i]) {
            total += c;
        }
        const double denom = static_cast<double>(total + m);
        for (std::size_t k = 0; k < m; ++k) {
            probs_[i][k] = static_cast<double>(counts_[i][k] + 1) / denom;
        }
    }

    void fold_staged()
    {
        for (std::size_t i = 0; i < params_.bins; ++i) {
            bool touched = false;
            for (std::size_t k = 0; k < params_.bins; ++k) {
                if (staged_[i][k] != 0) {
                    counts_[i][k] += staged_[i][k];
                    staged_[i][k] = 0;
                    touched = true;
                }
            }
            if (touched) {
                renormalize_row(i);
            }
        }
    }

    PredictorParams params_;
    CountMatrix counts_;
    CountMatrix staged_;
    Matrix probs_;
    std::optional<BinIndex> state_;
    std::size_t streak_ = 0;
    std::size_t steps_ = 0;
    PhasePriors priors_;
};

} // namespace railscale
