#pragma once

#include <complex>
#include <vector>

#include "dynpr/graph.hpp"

namespace dynpr {

struct SolveConfig {
    double alpha = 0.85;      // in [0, 1)
    double tol = 1e-10;       // residual 1-norm target
    std::size_t max_iter = 10000;
};

struct ComplexSolution {
    std::vector<std::complex<double>> s;
    std::vector<double> magnitude; // |s| entrywise
    double residual = 0.0;         // achieved complex 1-norm residual
    std::size_t iterations = 0;
};

/// Solve (I - alpha P) x = (1 - alpha) v by Richardson iteration
/// x <- alpha P x + (1 - alpha) v, declaring convergence on the residual
/// 1-norm. Throws ConfigError for bad alpha/tol/v and ConvergenceError when
/// max_iter is hit.
std::vector<double> static_pagerank(const TransitionOperator& P, const SolveConfig& cfg,
                                    const std::vector<double>& v);

/// Solve (I - gamma P) s = b for complex gamma with |gamma| < 1 by the same
/// Richardson scheme; each complex matvec is two real applies.
ComplexSolution complex_pagerank(const TransitionOperator& P, std::complex<double> gamma,
                                 const std::vector<std::complex<double>>& b,
                                 const SolveConfig& cfg);

struct OscillatorySteadyState {
    std::vector<double> x; // static PageRank for the mean teleportation (1/k) V e
    ComplexSolution s;     // solution of (I - alpha/(1+i) P) s = (1-alpha)/(k(1+i)) V exp(i f)
};

/// Closed-form steady state of the oscillatory system: the trajectory
/// approaches x + Re{s e^{it}} once transients decay. Requires k >= 2.
OscillatorySteadyState oscillatory_steady_state(const TransitionOperator& P, double alpha,
                                                const std::vector<std::vector<double>>& columns,
                                                const SolveConfig& cfg);

/// x + Re{s e^{it}}.
std::vector<double> eval_steady(const std::vector<double>& x,
                                const std::vector<std::complex<double>>& s, double t);

} // namespace dynpr
