#include "dynpr/solvers.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "dynpr/errors.hpp"

namespace dynpr {

namespace {

void validate(const SolveConfig& cfg) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
        throw ConfigError("alpha must lie in [0, 1), got " + std::to_string(cfg.alpha));
    if (!(cfg.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (cfg.max_iter == 0) throw ConfigError("max_iter must be positive");
}

double l1_norm(const std::vector<double>& v) {
    double sum = 0.0;
    for (double e : v) sum += std::abs(e);
    return sum;
}

} // namespace

std::vector<double> static_pagerank(const TransitionOperator& P, const SolveConfig& cfg,
                                    const std::vector<double>& v) {
    validate(cfg);
    if (v.size() != P.size()) throw ConfigError("teleportation vector length mismatch");

    const double alpha = cfg.alpha;
    std::vector<double> x = v;
    std::vector<double> px;

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        P.apply(x, px);
        double residual = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double next = alpha * px[i] + (1.0 - alpha) * v[i];
            residual += std::abs(next - x[i]);
            x[i] = next;
        }
        // ||x_{k+1} - x_k||_1 equals the residual ||(1-a)v - (I-aP)x_k||_1.
        if (residual <= cfg.tol) return x;
    }

    P.apply(x, px);
    double residual = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        residual += std::abs(alpha * px[i] + (1.0 - alpha) * v[i] - x[i]);
    throw ConvergenceError("static PageRank did not reach tol " + std::to_string(cfg.tol) +
                               " within " + std::to_string(cfg.max_iter) + " iterations",
                           residual);
}

ComplexSolution complex_pagerank(const TransitionOperator& P, std::complex<double> gamma,
                                 const std::vector<std::complex<double>>& b,
                                 const SolveConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (cfg.max_iter == 0) throw ConfigError("max_iter must be positive");
    if (std::abs(gamma) >= 1.0)
        throw ConfigError("complex solve requires |gamma| < 1, got |gamma| = " +
                          std::to_string(std::abs(gamma)));
    if (b.size() != P.size()) throw ConfigError("right-hand side length mismatch");

    const std::size_t n = P.size();
    std::vector<double> re(n), im(n), pre, pim;
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = b[i].real();
        im[i] = b[i].imag();
    }

    ComplexSolution sol;
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        P.apply(re, pre);
        P.apply(im, pim);
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> ps(pre[i], pim[i]);
            const std::complex<double> next = gamma * ps + b[i];
            residual += std::abs(next - std::complex<double>(re[i], im[i]));
            re[i] = next.real();
            im[i] = next.imag();
        }
        if (residual <= cfg.tol) {
            sol.iterations = it;
            sol.residual = residual;
            sol.s.resize(n);
            sol.magnitude.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                sol.s[i] = {re[i], im[i]};
                sol.magnitude[i] = std::abs(sol.s[i]);
            }
            return sol;
        }
        sol.residual = residual;
    }
    throw ConvergenceError("complex PageRank did not reach tol " + std::to_string(cfg.tol) +
                               " within " + std::to_string(cfg.max_iter) + " iterations",
                           sol.residual);
}

OscillatorySteadyState oscillatory_steady_state(const TransitionOperator& P, double alpha,
                                                const std::vector<std::vector<double>>& columns,
                                                const SolveConfig& cfg) {
    const std::size_t k = columns.size();
    if (k < 2) throw ConfigError("oscillatory steady state needs k >= 2 teleportation columns");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ConfigError("alpha must lie in [0, 1), got " + std::to_string(alpha));
    const std::size_t n = P.size();
    for (const auto& c : columns)
        if (c.size() != n) throw ConfigError("teleportation column length mismatch");

    SolveConfig solve_cfg = cfg;
    solve_cfg.alpha = alpha;

    // Mean teleportation (1/k) V e drives the baseline static solution.
    std::vector<double> mean(n, 0.0);
    for (const auto& c : columns)
        for (std::size_t i = 0; i < n; ++i) mean[i] += c[i];
    for (double& e : mean) e /= static_cast<double>(k);

    OscillatorySteadyState out;
    out.x = static_pagerank(P, solve_cfg, mean);

    // Forcing (1-alpha)/(k(1+i)) V exp(i f) with f_j = (j-1) 2pi/k; gamma has
    // modulus alpha/sqrt(2) < 1, so the complex solve always converges.
    const std::complex<double> one_plus_i(1.0, 1.0);
    const std::complex<double> gamma = alpha / one_plus_i;
    std::vector<std::complex<double>> b(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double f = static_cast<double>(j) * 2.0 * std::numbers::pi / static_cast<double>(k);
        const std::complex<double> w =
            (1.0 - alpha) / (static_cast<double>(k) * one_plus_i) * std::exp(std::complex<double>(0.0, f));
        for (std::size_t i = 0; i < n; ++i) b[i] += w * columns[j][i];
    }
    out.s = complex_pagerank(P, gamma, b, solve_cfg);
    return out;
}

std::vector<double> eval_steady(const std::vector<double>& x,
                                const std::vector<std::complex<double>>& s, double t) {
    if (x.size() != s.size()) throw ConfigError("steady-state component length mismatch");
    const std::complex<double> rot = std::exp(std::complex<double>(0.0, t));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + (s[i] * rot).real();
    return out;
}

} // namespace dynpr
