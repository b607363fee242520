#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dynpr {

/// Lagged one-step-ahead design for a single node. Feature series are indexed
/// by epoch (1-based entries stored at [1..k]; index 0 unused) and the row for
/// target epoch t stacks, per series, the lags t-1, t-2, ..., t-w.
struct LaggedDesign {
    std::size_t w = 1;
    std::vector<std::vector<double>> feature_series; // each of length k+1
    std::vector<double> target;                      // length k+1
    std::size_t first_target = 0;                    // inclusive epoch range of rows
    std::size_t last_target = 0;
};

struct FitResult {
    std::vector<double> coefficients;
    bool rank_deficient = false; // minimum-norm solution was taken
};

/// Least-squares fit of the stacked lag rows against the targets, solved by a
/// rank-revealing SVD; rank-deficient designs yield the minimum-norm solution
/// with the warning flag set. Throws ConfigError when there are fewer rows
/// than coefficients or the epoch range is infeasible for the lag window.
FitResult fit_lagged(const LaggedDesign& design);

/// Inner product of the lag row for target epoch t with b.
/// Throws ConfigError on layout mismatch.
double predict_next(const std::vector<double>& b, const LaggedDesign& design, std::size_t t);

/// Symmetric mean absolute percentage error; terms with actual = predicted = 0
/// contribute 0. Inputs must be nonnegative and of equal length.
double smape(const std::vector<double>& actual, const std::vector<double>& predicted);

struct NodePrediction {
    double smape_base = 0.0;
    double smape_augmented = 0.0;
    std::size_t evaluated_steps = 0;
    bool rank_deficient = false;
};

struct CohortRatio {
    std::string label;                  // "non-stationary" (top) or "stationary" (bottom)
    std::vector<std::uint32_t> nodes;
    double mean_smape_base = 0.0;
    double mean_smape_augmented = 0.0;
    bool ratio_defined = false;         // false when the base mean is 0
    double error_ratio = 0.0;           // augmented / base when defined
};

struct PredictionReport {
    std::size_t w = 0;
    std::size_t first_predicted = 0; // epoch of the first walk-forward prediction
    std::size_t last_predicted = 0;
    std::vector<NodePrediction> per_node;
    double mean_smape_base = 0.0;
    double mean_smape_augmented = 0.0;
    double overall_error_ratio = 0.0;
    bool overall_ratio_defined = false;
    std::vector<CohortRatio> cohorts;
};

/// Walk-forward evaluation over all nodes. activity holds k epoch columns of
/// length n (the regression target and base feature); scores optionally adds
/// one transient-score column per epoch as the augmenting feature block. Both
/// models are refit at every step on all epochs seen so far and evaluated on
/// the identical epoch range, which starts at the first epoch where the wider
/// model has as many samples as coefficients. difference_scores picks the
/// top-m (non-stationary) and bottom-m (stationary) cohorts.
PredictionReport evaluate_prediction(const std::vector<std::vector<double>>& activity,
                                     const std::vector<std::vector<double>>& scores,
                                     std::size_t w, std::size_t cohort_size,
                                     const std::vector<double>& difference_scores);

} // namespace dynpr
