#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boolspec/core.hpp"

namespace boolspec {

enum class Domain { PlusMinus, ZeroOne };

// Probabilities are clamped to this band before any division by sigma_i.
inline constexpr double kProbClampLo = 1e-9;
inline constexpr double kProbClampHi = 1.0 - 1e-9;

inline double clamp_prob(double p) {
    return p < kProbClampLo ? kProbClampLo : (p > kProbClampHi ? kProbClampHi : p);
}

// ---------------------------------------------------------------------------
// IsingModel
//
// Joint distribution P(x) = exp(sum_i xi_i x_i + sum_{(i,j) in E} theta_ij x_i x_j) / Z_V
// over the declared domain. Two conditional parameterizations coexist:
//
//   conditional_prob      carries theta/2 per neighbor; the product of these
//                         conditionals is the pseudo-likelihood measure and
//                         reconstructs the joint via the Z_i / Z_V^(1/n)
//                         factorization.
//   joint_conditional_prob  the conditional implied by the joint itself (full
//                         theta); this is what a single-site sampler must use
//                         and what nodewise logistic fits estimate.

class IsingModel {
public:
    IsingModel() = default;
    IsingModel(Graph graph, std::vector<double> thresholds, std::vector<double> theta_dense,
               Domain domain = Domain::PlusMinus);

    /// Convenience: interactions given edge-aligned with graph.edges().
    static IsingModel from_edge_list(Graph graph, std::vector<double> thresholds,
                                     const std::vector<double>& edge_theta,
                                     Domain domain = Domain::PlusMinus);

    int items() const { return graph_.nodes(); }
    const Graph& graph() const { return graph_; }
    Domain domain() const { return domain_; }
    double threshold(int i) const { return xi_[static_cast<std::size_t>(i)]; }
    double theta(int i, int j) const { return theta_[static_cast<std::size_t>(i) * items() + j]; }
    const std::vector<double>& thresholds() const { return xi_; }

    double domain_low() const { return domain_ == Domain::PlusMinus ? -1.0 : 0.0; }

    /// xi_i + (1/2) sum_{j in boundary(i)} theta_ij x_j
    double half_field(const SpinVector& x, int i) const;
    /// xi_i + sum_{j in boundary(i)} theta_ij x_j
    double full_field(const SpinVector& x, int i) const;

    /// P(X_i = 1 | x_boundary) under the theta/2 parameterization.
    double conditional_prob(const SpinVector& x, int i) const;
    /// P(X_i = 1 | x_boundary) implied by the joint (full theta).
    double joint_conditional_prob(const SpinVector& x, int i) const;

    /// Normalizer Z_i(x_boundary) of the theta/2 conditional.
    double conditional_normalizer(const SpinVector& x, int i) const;

    /// Exact domain change preserving the joint distribution.
    IsingModel to_domain(Domain target) const;

private:
    Graph graph_;
    std::vector<double> xi_;
    std::vector<double> theta_;  // dense n*n, symmetric, zero diagonal, support within E
    Domain domain_ = Domain::PlusMinus;
};

/// Spin values of configuration index idx in the model's domain.
SpinVector config_spins(const IsingModel& model, SubsetMask idx);

double log_partition_function(const IsingModel& model);
double partition_function(const IsingModel& model);
double joint_prob(const IsingModel& model, const SpinVector& x);

/// All 2^n joint probabilities indexed by configuration index (n <= cap).
std::vector<double> joint_table(const IsingModel& model);

struct GibbsOptions {
    int burn_in = 1000;   // full sweeps
    int thin = 10;        // sweeps between retained samples
    // run a freshly seeded chain of burn_in sweeps per retained row instead of
    // thinning one long chain; rows come out independent
    bool per_sample_chains = false;
};

Dataset gibbs_sample(const IsingModel& model, int m, std::uint64_t seed, GibbsOptions opts = {});

// ---------------------------------------------------------------------------
// Pseudo-likelihood measure

/// Product of theta/2 conditionals at x (unnormalized pseudo-likelihood weight).
double pseudo_likelihood_weight(const IsingModel& model, const SpinVector& x);

struct PseudoMeasure {
    std::vector<double> probs;     // normalized, indexed by configuration index
    double normalization_sum = 0;  // sum of raw weights; 1 exactly when theta = 0
};

PseudoMeasure pseudo_measure(const IsingModel& model);

struct KlReport {
    double kl_normalized = 0;      // D(P || normalized pseudo-measure); >= 0
    double kl_raw = 0;             // D-style sum against the raw product of conditionals
    double normalization_sum = 0;
};

/// Direct-enumeration divergence between the joint and the pseudo-likelihood
/// measure (both variants reported; the raw one can be negative since the raw
/// product is not a probability measure).
KlReport kl_divergence_oracle(const IsingModel& model);

// ---------------------------------------------------------------------------
// Conditional probability matrices

enum class ProbProvenance { TrueModel, Estimated };

class ConditionalProbs {
public:
    ConditionalProbs() = default;
    ConditionalProbs(std::vector<double> values, int rows, int items, ProbProvenance provenance);

    int rows() const { return rows_; }
    int items() const { return items_; }
    ProbProvenance provenance() const { return provenance_; }
    double at(int t, int i) const { return p_[static_cast<std::size_t>(t) * items_ + i]; }
    /// Number of entries that hit the clamp band during construction.
    int clamped_count() const { return clamped_; }

private:
    std::vector<double> p_;
    int rows_ = 0;
    int items_ = 0;
    ProbProvenance provenance_ = ProbProvenance::TrueModel;
    int clamped_ = 0;
};

/// Per-observation joint conditionals of the model (full theta), clamped.
ConditionalProbs conditional_probs_from_model(const IsingModel& model, const Dataset& data,
                                              ProbProvenance provenance = ProbProvenance::TrueModel);
/// Same but under the theta/2 pseudo parameterization.
ConditionalProbs pseudo_conditional_probs_from_model(
    const IsingModel& model, const Dataset& data,
    ProbProvenance provenance = ProbProvenance::TrueModel);

// ---------------------------------------------------------------------------
// Serialization: {n, edges, theta (edge-aligned), xi, domain}

std::string model_to_json(const IsingModel& model);
IsingModel model_from_json(const std::string& json_text);

}  // namespace boolspec
