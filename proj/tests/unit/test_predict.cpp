#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include <dynpr/errors.hpp>
#include <dynpr/predict.hpp>
#include <dynpr/synth.hpp>

#include "oracles.hpp"

using namespace dynpr;

namespace {

// Epoch-indexed series (index 0 unused) following p(t) = r * p(t-1).
std::vector<double> geometric(std::size_t k, double p1, double r) {
    std::vector<double> s(k + 1, 0.0);
    s[1] = p1;
    for (std::size_t j = 2; j <= k; ++j) s[j] = r * s[j - 1];
    return s;
}

// Rebuild the stacked lag rows exactly as documented: per feature series,
// lags t-1, t-2, ..., t-w.
std::vector<std::vector<double>> design_rows(const LaggedDesign& d) {
    std::vector<std::vector<double>> rows;
    for (std::size_t t = d.first_target; t <= d.last_target; ++t) {
        std::vector<double> row;
        for (const auto& series : d.feature_series)
            for (std::size_t lag = 1; lag <= d.w; ++lag) row.push_back(series[t - lag]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> design_targets(const LaggedDesign& d) {
    std::vector<double> y;
    for (std::size_t t = d.first_target; t <= d.last_target; ++t) y.push_back(d.target[t]);
    return y;
}

LaggedDesign random_design(std::size_t k, std::size_t w, std::size_t series_count,
                           std::uint64_t seed) {
    SplitMix64 rng(seed);
    LaggedDesign d;
    d.w = w;
    for (std::size_t s = 0; s < series_count; ++s) {
        std::vector<double> f(k + 1, 0.0);
        for (std::size_t j = 1; j <= k; ++j) f[j] = rng.next_normal();
        d.feature_series.push_back(std::move(f));
    }
    d.target.assign(k + 1, 0.0);
    for (std::size_t j = 1; j <= k; ++j) d.target[j] = rng.next_normal();
    d.first_target = w + 1;
    d.last_target = k;
    return d;
}

}  // namespace

TEST_CASE("a deterministic doubling series is fit exactly") {
    const std::size_t k = 10;
    const auto series = geometric(k, 1.0, 2.0);

    LaggedDesign d;
    d.w = 1;
    d.feature_series = {series};
    d.target = series;
    d.first_target = 2;
    d.last_target = k;

    const FitResult fit = fit_lagged(d);
    REQUIRE(fit.coefficients.size() == 1);
    CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(fit.rank_deficient);

    const double next = predict_next(fit.coefficients, d, k);
    CHECK(next == doctest::Approx(series[k]).epsilon(1e-12));
}

TEST_CASE("walk-forward evaluation nails exact recurrences") {
    const std::size_t k = 10;
    std::vector<std::vector<double>> activity(k);
    for (std::size_t j = 0; j < k; ++j)
        activity[j] = {std::pow(2.0, static_cast<double>(j)),
                       3.0 * std::pow(1.5, static_cast<double>(j))};

    const auto report =
        evaluate_prediction(activity, {}, 1, 1, std::vector<double>{1.0, 0.0});
    CHECK(report.first_predicted == 3);
    CHECK(report.last_predicted == k);
    CHECK(report.mean_smape_base < 1e-12);
    for (const auto& np : report.per_node) {
        CHECK(np.smape_base < 1e-12);
        CHECK(np.evaluated_steps == k - 2);
    }
}

TEST_CASE("constant activity predicts itself") {
    std::vector<std::vector<double>> activity(8, std::vector<double>{5.0, 7.0, 5.0});
    const auto report =
        evaluate_prediction(activity, {}, 2, 1, std::vector<double>{0.3, 0.2, 0.1});
    CHECK(report.first_predicted == 5);
    CHECK(report.mean_smape_base < 1e-12);
}

TEST_CASE("least-squares fit matches the normal equations") {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const auto d = random_design(40, 2, 2, seed);
        const FitResult fit = fit_lagged(d);
        CHECK_FALSE(fit.rank_deficient);

        const auto expected = oracle::normal_equations(design_rows(d), design_targets(d));
        REQUIRE(fit.coefficients.size() == expected.size());
        for (std::size_t c = 0; c < expected.size(); ++c)
            CHECK(fit.coefficients[c] ==
                  doctest::Approx(expected[c]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("fitted residuals are orthogonal to the design columns") {
    const auto d = random_design(60, 3, 2, 17);
    const FitResult fit = fit_lagged(d);
    const auto rows = design_rows(d);
    const auto y = design_targets(d);

    const std::size_t cols = fit.coefficients.size();
    std::vector<double> xtr(cols, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double pred = 0.0;
        for (std::size_t c = 0; c < cols; ++c) pred += rows[r][c] * fit.coefficients[c];
        const double res = y[r] - pred;
        for (std::size_t c = 0; c < cols; ++c) xtr[c] += rows[r][c] * res;
    }
    for (double v : xtr) CHECK(std::abs(v) < 1e-8 * static_cast<double>(rows.size()));
}

TEST_CASE("adding a feature block never hurts in sample") {
    const auto base = random_design(50, 2, 1, 23);
    LaggedDesign aug = base;
    SplitMix64 rng(99);
    std::vector<double> extra(51, 0.0);
    for (std::size_t j = 1; j <= 50; ++j) extra[j] = rng.next_normal();
    aug.feature_series.push_back(extra);
    aug.first_target = 5;
    LaggedDesign base_same = base;
    base_same.first_target = 5;

    auto rss = [](const LaggedDesign& d, const FitResult& fit) {
        const auto rows = design_rows(d);
        const auto y = design_targets(d);
        double acc = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double pred = 0.0;
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                pred += rows[r][c] * fit.coefficients[c];
            acc += (y[r] - pred) * (y[r] - pred);
        }
        return acc;
    };

    const double rss_base = rss(base_same, fit_lagged(base_same));
    const double rss_aug = rss(aug, fit_lagged(aug));
    CHECK(rss_aug <= rss_base + 1e-10);
}

TEST_CASE("predict_next is a plain inner product") {
    LaggedDesign d;
    d.w = 1;
    d.feature_series = {{0.0, 1.0, 5.0, 9.0}};
    d.target = {0.0, 1.0, 5.0, 9.0};
    d.first_target = 2;
    d.last_target = 3;

    CHECK(predict_next({1.0}, d, 3) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(predict_next({0.0}, d, 3) == 0.0);
    CHECK(predict_next({-2.0}, d, 2) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK_THROWS_AS(predict_next({1.0, 2.0}, d, 3), ConfigError);
    CHECK_THROWS_AS(predict_next({1.0}, d, 1), ConfigError);
    CHECK_THROWS_AS(predict_next({1.0}, d, 4), ConfigError);
}

TEST_CASE("design validation") {
    LaggedDesign d;
    d.w = 2;
    d.feature_series = {{0.0, 1.0, 2.0, 3.0, 4.0, 5.0}};
    d.target = d.feature_series[0];

    SUBCASE("first target must leave room for the lags") {
        d.first_target = 2;
        d.last_target = 5;
        CHECK_THROWS_AS(fit_lagged(d), ConfigError);
    }
    SUBCASE("more coefficients than rows is rejected") {
        d.first_target = 3;
        d.last_target = 3;
        CHECK_THROWS_AS(fit_lagged(d), ConfigError);
    }
    SUBCASE("target range past the series end is rejected") {
        d.first_target = 3;
        d.last_target = 6;
        CHECK_THROWS_AS(fit_lagged(d), ConfigError);
    }
}

TEST_CASE("smape properties") {
    CHECK(smape({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(smape({1.0}, {3.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(smape({1.0}, {0.0}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(smape({0.0}, {0.0}) == 0.0);
    CHECK(smape({0.0, 4.0}, {0.0, 4.0}) == 0.0);
    CHECK(smape({1.0, 5.0}, {2.0, 4.0}) ==
          doctest::Approx(smape({2.0, 4.0}, {1.0, 5.0})).epsilon(1e-15));
    CHECK(smape({10.0, 50.0}, {20.0, 40.0}) ==
          doctest::Approx(smape({1.0, 5.0}, {2.0, 4.0})).epsilon(1e-14));
    CHECK_THROWS_AS(smape({1.0}, {1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(smape({-1.0}, {1.0}), ConfigError);
    CHECK_THROWS_AS(smape({1.0}, {-1.0}), ConfigError);
    CHECK_THROWS_AS(smape({}, {}), ConfigError);
}

TEST_CASE("duplicating the activity as scores changes nothing but flags rank") {
    // The augmented block repeats the base block column for column, so the
    // minimum-norm fit spreads the same weights and predicts identically.
    const std::size_t k = 12, n = 4;
    SplitMix64 rng(31);
    std::vector<std::vector<double>> activity(k, std::vector<double>(n));
    for (auto& col : activity)
        for (double& e : col) e = std::floor(10.0 + 20.0 * rng.next_double());

    const auto report = evaluate_prediction(activity, activity, 1, 1,
                                            std::vector<double>{0.4, 0.3, 0.2, 0.1});
    CHECK(report.first_predicted == 4);
    for (const auto& np : report.per_node) {
        CHECK(np.rank_deficient);
        CHECK(np.smape_augmented == doctest::Approx(np.smape_base).epsilon(1e-9));
    }
    if (report.overall_ratio_defined)
        CHECK(report.overall_error_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cohorts follow the difference ranking") {
    const std::size_t k = 8, n = 6;
    SplitMix64 rng(57);
    std::vector<std::vector<double>> activity(k, std::vector<double>(n));
    for (auto& col : activity)
        for (double& e : col) e = std::floor(1.0 + 30.0 * rng.next_double());

    const std::vector<double> swing{0.9, 0.1, 0.5, 0.05, 0.7, 0.3};
    const auto report = evaluate_prediction(activity, {}, 1, 2, swing);
    REQUIRE(report.cohorts.size() == 2);
    CHECK(report.cohorts[0].label == "non-stationary");
    CHECK(report.cohorts[1].label == "stationary");
    REQUIRE(report.cohorts[0].nodes.size() == 2);
    CHECK(report.cohorts[0].nodes[0] == 0);
    CHECK(report.cohorts[0].nodes[1] == 4);
    CHECK(report.cohorts[1].nodes[0] == 1);
    CHECK(report.cohorts[1].nodes[1] == 3);
}

TEST_CASE("walk-forward input validation") {
    std::vector<std::vector<double>> activity(6, std::vector<double>{1.0, 2.0});
    const std::vector<double> diff{0.5, 0.4};

    CHECK_THROWS_AS(evaluate_prediction({}, {}, 1, 1, {}), ConfigError);
    CHECK_THROWS_AS(evaluate_prediction(activity, {}, 0, 1, diff), ConfigError);
    CHECK_THROWS_AS(evaluate_prediction(activity, {}, 1, 0, diff), ConfigError);
    CHECK_THROWS_AS(evaluate_prediction(activity, {}, 1, 2, diff), ConfigError);
    CHECK_THROWS_AS(evaluate_prediction(activity, {}, 1, 1, std::vector<double>{1.0}),
                    ConfigError);

    // Six epochs support w = 2 without scores (first prediction epoch 5)
    // but not with them (epoch 7 needed).
    CHECK_NOTHROW(evaluate_prediction(activity, {}, 2, 1, diff));
    CHECK_THROWS_AS(evaluate_prediction(activity, activity, 2, 1, diff), ConfigError);

    std::vector<std::vector<double>> ragged = activity;
    ragged[3] = {1.0};
    CHECK_THROWS_AS(evaluate_prediction(ragged, {}, 1, 1, diff), ConfigError);
    CHECK_THROWS_AS(evaluate_prediction(activity, ragged, 1, 1, diff), ConfigError);
}

TEST_CASE("first prediction epoch depends on the feature blocks") {
    const std::size_t k = 10, n = 2;
    SplitMix64 rng(77);
    std::vector<std::vector<double>> activity(k, std::vector<double>(n));
    std::vector<std::vector<double>> scores(k, std::vector<double>(n));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            activity[j][i] = std::floor(5.0 + 10.0 * rng.next_double());
            scores[j][i] = rng.next_double();
        }
    const std::vector<double> diff{0.2, 0.1};

    CHECK(evaluate_prediction(activity, {}, 2, 1, diff).first_predicted == 5);
    CHECK(evaluate_prediction(activity, scores, 2, 1, diff).first_predicted == 7);
    CHECK(evaluate_prediction(activity, scores, 1, 1, diff).first_predicted == 4);
}
