#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boolspec/fourier.hpp"
#include "boolspec/influence.hpp"

namespace boolspec {

// Nodewise L1-penalized logistic pseudo-likelihood. Fits run on the +-1 coded
// data, so the fitted logit b0 + sum b_j x_j equals 2*xi_i + 2*theta_ij x_j of
// the joint parameterization; symmetrize() halves when building the model.

struct LassoOptions {
    double tol = 1e-7;      // max coordinate change per sweep
    int max_sweeps = 10000;
    bool record_objective_trace = false;
};

struct NodeFit {
    int item = -1;
    double intercept = 0;
    std::vector<double> slopes;      // aligned with predictors
    std::vector<int> predictors;     // all j != item, ascending
    double lambda = 0;
    bool converged = false;
    bool degenerate = false;         // response column constant
    int sweeps = 0;
    double objective = 0;            // penalized mean objective at the solution
    double log_likelihood = 0;       // unpenalized pseudo-log-likelihood (sum over rows)
    double ebic = 0;
    int nonzero_count = 0;
    std::vector<double> objective_trace;  // per sweep, when recording is enabled

    double slope_for(int j) const;
};

NodeFit fit_node_lasso(const Dataset& data, int item, double lambda, const LassoOptions& opts = {});

/// 50 log-spaced values from lambda_max (smallest lambda zeroing all edges)
/// down to 0.01 * lambda_max.
std::vector<double> lambda_grid_for(const Dataset& data, int item, int count = 50,
                                    double min_ratio = 0.01);

double ebic_score(const NodeFit& fit, int m, int n, double gamma);

struct NodePath {
    std::vector<NodeFit> fits;  // along the grid, largest lambda first
    int best_index = -1;
};

/// EBIC = -2 loglik + k log m + 2 gamma k log(n-1), k = nonzero edge count.
NodePath select_penalty_ebic(const Dataset& data, int item, double gamma,
                             std::vector<double> lambda_grid = {}, const LassoOptions& opts = {});

std::vector<NodeFit> fit_all_nodes(const Dataset& data, double gamma, const LassoOptions& opts = {},
                                   int threads = 1);

enum class SymmetrizeRule { And, Or };

/// Reconciles theta_hat_ij with theta_hat_ji: And zeroes the pair unless both
/// are nonzero (then averages); Or averages, zero only if both are zero. The
/// reconciled logistic coefficients are halved into the joint model's theta.
IsingModel symmetrize(const std::vector<NodeFit>& fits, SymmetrizeRule rule = SymmetrizeRule::And);

double symmetrize_coefficients(double a, double b, SymmetrizeRule rule);

ConditionalProbs predict_probs(const IsingModel& model, const Dataset& data);
ConditionalProbs predict_probs(const std::vector<NodeFit>& fits, const Dataset& data);

// ---------------------------------------------------------------------------
// Desparsified lasso

struct DesparsifiedFit {
    Eigen::VectorXd beta;          // (intercept, slopes) of the input fit
    Eigen::VectorXd beta_dl;       // desparsified estimate
    Eigen::VectorXd variance_diag; // diag(Theta Sigma Theta^T)
    Eigen::MatrixXd theta_hat;     // approximate inverse of Sigma_hat
    double inverse_residual_maxnorm = 0;  // || Sigma_hat Theta_hat - I ||_max
    bool ridge_fallback = false;
};

/// beta_dl = beta_hat - Theta_hat grad(psi)(beta_hat), with Sigma_hat the
/// weighted Gram matrix and Theta_hat from nodewise regressions on the
/// sqrt(p(1-p))-weighted design (ridge 1e-4 fallback on singular sub-designs).
DesparsifiedFit desparsify(const NodeFit& fit, const Dataset& data);

// ---------------------------------------------------------------------------
// End-to-end pipeline

struct PipelineResult {
    std::vector<NodeFit> fits;
    IsingModel model;
    ConditionalProbs probs;
    FourierSpectrum spectrum;
    InfluenceProfile influence;
    std::vector<int> degenerate_items;
};

/// Fits all nodes, symmetrizes, predicts probabilities, and computes the
/// empirical spectrum and influence profile. Stage failures are rethrown with
/// a stage label.
PipelineResult pipeline_fourier(const Dataset& data, const DecisionFunction& f, double gamma,
                                int max_order = 2, SymmetrizeRule rule = SymmetrizeRule::And,
                                int threads = 1);

// ---------------------------------------------------------------------------
// Export

std::string fits_to_json(const std::vector<NodeFit>& fits);
/// Edge list (1-based i, j, weight) of the symmetrized model.
std::string model_edges_to_csv(const IsingModel& model);

}  // namespace boolspec
