#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "boolspec/decision.hpp"
#include "boolspec/fourier.hpp"

namespace boolspec {

struct NoiseProcess {
    double rho = 0.8;  // each coordinate kept with probability (1+rho)/2
    std::uint64_t seed = 0;
};

/// Independently keeps each coordinate with probability (1+rho)/2, flips it
/// otherwise.
SpinVector apply_noise(const SpinVector& x, double rho, std::mt19937_64& rng);
Dataset apply_noise(const Dataset& data, const NoiseProcess& proc);

/// phi for the contaminated value: (y - rho*mu) / sqrt(1 - rho^2 mu^2).
double phi_noisy(Spin y, double mu, double rho);

struct NoisyMoments {
    std::vector<double> true_score;    // rho * mu_i, evaluated at x_i = +1
    std::vector<double> sigma_rho;     // sqrt(1 - rho^2 mu_i^2)
    std::vector<double> reliability;   // rho * sigma_i / sigma_rho_i
};

NoisyMoments noisy_moments(const std::vector<double>& probs, double rho);
std::vector<double> item_reliability(const std::vector<double>& probs, double rho);

struct TrueScoreReport {
    double max_abs_error_mean = 0;  // max_i |mean(Y_i - rho x_i)|
    double max_abs_correlation = 0; // max_i |cor(Y_i - rho X_i, rho X_i)|
    double mc_tolerance = 0;        // 3 / sqrt(m)
    int replications = 0;
};

/// Empirical verification of the true-score criteria under product(pi).
TrueScoreReport true_score_criteria_check(const std::vector<double>& probs, double rho, int m,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Stability S_rho(f) = P(f(X)=f(Y)) - P(f(X)!=f(Y)) = E f(X) f(Y)

struct StabilityDecomposition {
    double stability = 0;
    double covariance = 0;
    double mean_x = 0;
    double mean_y = 0;
};

/// Exact enumeration over weighted (x, y) pairs via the noise operator.
StabilityDecomposition stability_decomposition(const DecisionFunction& f, double rho,
                                               const Measure& measure);
double stability_enumeration(const DecisionFunction& f, double rho, const Measure& measure);

/// Spectral route: sum over nonempty S of omega(S) rho^|S| fhat(S) fhat_rho(S)
/// plus the product of means; factorizing measures only.
double stability_spectral(const DecisionFunction& f, double rho, const Measure& measure);

double stability_montecarlo(const DecisionFunction& f, double rho, const Measure& measure,
                            int pairs, std::uint64_t seed);
/// Rows of the dataset as the X distribution, `replicates` noisy copies each.
double stability_montecarlo_data(const DecisionFunction& f, double rho, const Dataset& data,
                                 int replicates, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Decision reliability cor(f(X), f(Y))

struct ReliabilityReport {
    double correlation = 0;        // variance-form denominators sqrt(1 - fhat(empty)^2)
    double correlation_raw_denom = 0;  // the sqrt(1 - fhat(empty)) variant, for comparison
    double approx_order1 = 0;      // rho sum_i omega(i) fhat(i) fhat_rho(i)
    double gap = 0;
    bool degenerate = false;       // vanishing variance; correlation undefined
};

ReliabilityReport decision_reliability(const DecisionFunction& f, double rho,
                                       const Measure& measure);

// ---------------------------------------------------------------------------
// Stability / reliability curves over (rho, a0) grids

struct StabilityCurveRow {
    double rho = 0;
    double a0 = 0;
    double stability = 0;
    double reliability_exact = 0;
    double reliability_approx = 0;
};

struct CurveOptions {
    std::vector<double> weights;     // LTF weights (required)
    bool zero_one_params = true;     // interpret (a0, weights) on 0/1 inputs
    int replicates_per_row = 1000;
    std::uint64_t seed = 1;
};

/// Monte Carlo curves over dataset rows; noise replicates are drawn once per
/// rho (stream derived from (seed, rho index)) and shared across thresholds.
std::vector<StabilityCurveRow> stability_curves(const Dataset& data, const ConditionalProbs& probs,
                                                const std::vector<double>& rho_grid,
                                                const std::vector<double>& a0_grid,
                                                const CurveOptions& opts);

/// Exact curves under a factorizing measure (spectral path).
std::vector<StabilityCurveRow> stability_curves_exact(const Measure& measure,
                                                      const std::vector<double>& weights,
                                                      const std::vector<double>& rho_grid,
                                                      const std::vector<double>& a0_grid,
                                                      bool zero_one_params = false);

std::string curves_to_csv(const std::vector<StabilityCurveRow>& rows);

}  // namespace boolspec
