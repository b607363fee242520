#include "dynpr/predict.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "dynpr/errors.hpp"
#include "dynpr/ranks.hpp"

namespace dynpr {

namespace {

std::size_t coefficient_count(const LaggedDesign& design) {
    return design.w * design.feature_series.size();
}

void validate_design(const LaggedDesign& design) {
    if (design.w < 1) throw ConfigError("lag window w must be >= 1");
    if (design.feature_series.empty()) throw ConfigError("lagged design has no feature series");
    const std::size_t len = design.target.size();
    for (const auto& f : design.feature_series)
        if (f.size() != len) throw ConfigError("feature/target series lengths differ");
    if (design.first_target <= design.w)
        throw ConfigError("first target epoch leaves no room for " + std::to_string(design.w) +
                          " lags");
    if (design.last_target < design.first_target)
        throw ConfigError("lagged design target range is empty");
    if (design.last_target >= len) throw ConfigError("target epoch beyond the series length");
}

void fill_row(const LaggedDesign& design, std::size_t t, double* row) {
    std::size_t c = 0;
    for (const auto& series : design.feature_series)
        for (std::size_t lag = 1; lag <= design.w; ++lag) row[c++] = series[t - lag];
}

} // namespace

FitResult fit_lagged(const LaggedDesign& design) {
    validate_design(design);
    const std::size_t rows = design.last_target - design.first_target + 1;
    const std::size_t cols = coefficient_count(design);
    if (rows < cols)
        throw ConfigError("lagged design has " + std::to_string(rows) + " samples for " +
                          std::to_string(cols) + " coefficients");

    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd y(rows);
    std::vector<double> row(cols);
    for (std::size_t t = design.first_target; t <= design.last_target; ++t) {
        fill_row(design, t, row.data());
        for (std::size_t c = 0; c < cols; ++c) X(t - design.first_target, c) = row[c];
        y(t - design.first_target) = design.target[t];
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd b = svd.solve(y);

    FitResult result;
    result.coefficients.assign(b.data(), b.data() + b.size());
    result.rank_deficient = static_cast<std::size_t>(svd.rank()) < cols;
    return result;
}

double predict_next(const std::vector<double>& b, const LaggedDesign& design, std::size_t t) {
    if (design.w < 1) throw ConfigError("lag window w must be >= 1");
    if (b.size() != coefficient_count(design))
        throw ConfigError("coefficient layout mismatch: got " + std::to_string(b.size()) +
                          ", design wants " + std::to_string(coefficient_count(design)));
    if (t <= design.w || t >= design.target.size())
        throw ConfigError("prediction epoch outside the feasible range");

    std::vector<double> row(b.size());
    fill_row(design, t, row.data());
    double acc = 0.0;
    for (std::size_t c = 0; c < b.size(); ++c) acc += b[c] * row[c];
    return acc;
}

double smape(const std::vector<double>& actual, const std::vector<double>& predicted) {
    if (actual.size() != predicted.size()) throw ConfigError("smape series lengths differ");
    if (actual.empty()) throw ConfigError("smape of empty series");

    double acc = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double p = actual[i], q = predicted[i];
        if (p < 0.0 || q < 0.0) throw ConfigError("smape inputs must be nonnegative");
        if (p == 0.0 && q == 0.0) continue; // inactive step contributes 0
        acc += std::abs(p - q) / ((p + q) / 2.0);
    }
    return acc / static_cast<double>(actual.size());
}

PredictionReport evaluate_prediction(const std::vector<std::vector<double>>& activity,
                                     const std::vector<std::vector<double>>& scores,
                                     std::size_t w, std::size_t cohort_size,
                                     const std::vector<double>& difference_scores) {
    if (activity.empty()) throw ConfigError("prediction needs activity epochs");
    const std::size_t k = activity.size();
    const std::size_t n = activity.front().size();
    for (const auto& col : activity)
        if (col.size() != n) throw ConfigError("activity columns differ in length");
    const bool augmented_available = !scores.empty();
    if (augmented_available) {
        if (scores.size() != k) throw ConfigError("score epochs do not match activity epochs");
        for (const auto& col : scores)
            if (col.size() != n) throw ConfigError("score columns differ in length");
    }
    if (w < 1) throw ConfigError("lag window w must be >= 1");
    if (cohort_size == 0) throw ConfigError("cohort size must be positive");
    if (2 * cohort_size > n)
        throw ConfigError("cohorts of " + std::to_string(cohort_size) + " overlap for " +
                          std::to_string(n) + " nodes");
    if (difference_scores.size() != n)
        throw ConfigError("difference score length does not match node count");

    // Walk-forward range shared by both models: predicting epoch t refits on
    // targets [w+1, t-1], so the wider (augmented) model needs t-1-w >= 2w.
    const std::size_t block_count = augmented_available ? 2 : 1;
    const std::size_t first_pred = w + 1 + block_count * w;
    if (first_pred > k)
        throw ConfigError("epoch count " + std::to_string(k) + " is too short for lag window " +
                          std::to_string(w) + " (needs at least " + std::to_string(first_pred) +
                          ")");

    PredictionReport report;
    report.w = w;
    report.first_predicted = first_pred;
    report.last_predicted = k;
    report.per_node.resize(n);

    // Epoch-indexed series with entry j at index j (index 0 unused).
    std::vector<double> target(k + 1), score_series(k + 1);
    for (std::uint32_t node = 0; node < n; ++node) {
        for (std::size_t j = 1; j <= k; ++j) target[j] = activity[j - 1][node];

        LaggedDesign base;
        base.w = w;
        base.feature_series = {target};
        base.target = target;

        LaggedDesign aug;
        if (augmented_available) {
            for (std::size_t j = 1; j <= k; ++j) score_series[j] = scores[j - 1][node];
            aug.w = w;
            aug.feature_series = {target, score_series};
            aug.target = target;
        }

        std::vector<double> actual, base_pred, aug_pred;
        bool deficient = false;
        for (std::size_t t = first_pred; t <= k; ++t) {
            base.first_target = w + 1;
            base.last_target = t - 1;
            FitResult fb = fit_lagged(base);
            deficient = deficient || fb.rank_deficient;
            base_pred.push_back(std::max(0.0, predict_next(fb.coefficients, base, t)));

            if (augmented_available) {
                aug.first_target = w + 1;
                aug.last_target = t - 1;
                FitResult fa = fit_lagged(aug);
                deficient = deficient || fa.rank_deficient;
                aug_pred.push_back(std::max(0.0, predict_next(fa.coefficients, aug, t)));
            }
            actual.push_back(target[t]);
        }

        NodePrediction& np = report.per_node[node];
        np.evaluated_steps = actual.size();
        np.rank_deficient = deficient;
        np.smape_base = smape(actual, base_pred);
        np.smape_augmented = augmented_available ? smape(actual, aug_pred) : np.smape_base;
    }

    auto cohort_of = [&](const std::vector<std::uint32_t>& nodes, const std::string& label) {
        CohortRatio c;
        c.label = label;
        c.nodes = nodes;
        for (std::uint32_t node : nodes) {
            c.mean_smape_base += report.per_node[node].smape_base;
            c.mean_smape_augmented += report.per_node[node].smape_augmented;
        }
        c.mean_smape_base /= static_cast<double>(nodes.size());
        c.mean_smape_augmented /= static_cast<double>(nodes.size());
        c.ratio_defined = c.mean_smape_base > 0.0;
        if (c.ratio_defined) c.error_ratio = c.mean_smape_augmented / c.mean_smape_base;
        return c;
    };

    const auto order = top_k(difference_scores, n);
    std::vector<std::uint32_t> top(order.begin(), order.begin() + cohort_size);
    std::vector<std::uint32_t> bottom(order.end() - cohort_size, order.end());
    report.cohorts.push_back(cohort_of(top, "non-stationary"));
    report.cohorts.push_back(cohort_of(bottom, "stationary"));

    for (const NodePrediction& np : report.per_node) {
        report.mean_smape_base += np.smape_base;
        report.mean_smape_augmented += np.smape_augmented;
    }
    report.mean_smape_base /= static_cast<double>(n);
    report.mean_smape_augmented /= static_cast<double>(n);
    report.overall_ratio_defined = report.mean_smape_base > 0.0;
    if (report.overall_ratio_defined)
        report.overall_error_ratio = report.mean_smape_augmented / report.mean_smape_base;
    return report;
}

} // namespace dynpr
