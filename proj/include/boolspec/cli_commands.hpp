#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boolspec/estimation.hpp"
#include "boolspec/noise.hpp"

namespace boolspec {

// ---------------------------------------------------------------------------
// Experiment configuration (JSON)

enum class ThresholdRule { NegHalfRowSum, Zero };

struct DecisionSpec {
    std::string type = "ltf";        // ltf | majority | dictator | constant | truth_table
    double a0 = -0.6;
    std::vector<double> weights;     // empty means equal weights 1/n
    std::string domain = "zero_one"; // ltf parameters on 0/1 or pm1 inputs
    int item = 0;                    // dictator
    int value = 1;                   // constant
    std::string bits;                // truth_table, base64

    DecisionFunction build(int n) const;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int n = 35;
    int m = 100;
    double edge_prob = 0.05;
    std::vector<std::pair<int, int>> edges;  // explicit edge list overrides edge_prob
    bool explicit_edges = false;
    double theta = 3.0;                      // interaction magnitude (model domain)
    ThresholdRule threshold_rule = ThresholdRule::NegHalfRowSum;
    std::string model_domain = "zero_one";
    // per_row: one independent chain per observation; single_chain: one long
    // thinned chain
    std::string sampler = "per_row";
    DecisionSpec decision;
    std::vector<double> rho_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> a0_grid = {-0.9, -0.8, -0.7, -0.6, -0.5};
    int replications = 20;
    double ebic_gamma = 0.25;
    int max_order = 2;
    std::vector<double> theta_grid = {1.0, 2.0, 3.0};
    int curve_replicates = 1000;
    int threads = 1;

    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;
};

/// Graph + Ising model of a configuration at the given interaction magnitude;
/// the graph draw and the rest of the experiment use split seed streams.
IsingModel build_config_model(const ExperimentConfig& config, double theta, std::uint64_t seed);

GibbsOptions sampler_options(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Replication-level helpers shared by the CLI and the acceptance suite

struct ReplicationSummary {
    double degree_coefficient_correlation = 0;  // Pearson(degree_i, fhat(i))
    std::vector<double> order1;                 // per item
    std::vector<int> degrees;
};

/// One simulate + fit + spectrum pass at the configured theta.
ReplicationSummary degree_correlation_replication(const ExperimentConfig& config,
                                                  std::uint64_t seed);

struct RecoveryStats {
    double precision = 1;   // 1 by convention when no edge is selected
    double recall = 1;      // 1 by convention when the true edge set is empty
    double prob_mad = 0;    // mean |p_hat - p_true|
    double fourier_mad = 0; // mean |fhat_est(i) - fhat_true(i)|
};

RecoveryStats recovery_replication(const ExperimentConfig& config, double theta,
                                   std::uint64_t seed);

std::string recovery_to_csv(const std::vector<double>& theta_grid,
                            const std::vector<std::vector<RecoveryStats>>& per_theta);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Entry point: simulate | analyze | montecarlo | stability | properties
// exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure

int run_cli(const std::vector<std::string>& args);

}  // namespace boolspec
