#include "boolspec/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>

#include <nlohmann/json.hpp>

namespace boolspec {

using nlohmann::json;

namespace {

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// boundary cases |z| ~= t leave O(eps) residues; snap them to an exact zero so
// the reported support is meaningful
constexpr double kSupportSnap = 1e-12;

// mean logistic NLL at the current margins g_t, responses y_t in {-1, +1}
double mean_nll(const std::vector<double>& g, const std::vector<double>& y) {
    double acc = 0;
    for (std::size_t t = 0; t < g.size(); ++t) {
        const double z = -y[t] * g[t];
        acc += z > 30 ? z : std::log1p(std::exp(z));
    }
    return acc / static_cast<double>(g.size());
}

}  // namespace

double NodeFit::slope_for(int j) const {
    for (std::size_t k = 0; k < predictors.size(); ++k) {
        if (predictors[k] == j) return slopes[k];
    }
    return 0.0;
}

namespace {
NodeFit fit_node_lasso_impl(const Dataset& data, int item, double lambda, const LassoOptions& opts,
                            const NodeFit* warm) {
    if (lambda <= 0) throw config_error("lambda must be positive");
    const int m = data.rows();
    const int n = data.items();
    if (item < 0 || item >= n) throw config_error("item index out of range");

    NodeFit fit;
    fit.item = item;
    fit.lambda = lambda;
    for (int j = 0; j < n; ++j) {
        if (j != item) fit.predictors.push_back(j);
    }
    const int d = static_cast<int>(fit.predictors.size());
    fit.slopes.assign(static_cast<std::size_t>(d), 0.0);

    std::vector<double> y(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) y[static_cast<std::size_t>(t)] = data.at(t, item);

    if (data.column_constant(item)) {
        // degenerate: intercept at the clamped empirical logit, no edges
        fit.degenerate = true;
        const double p = clamp_prob(0.5 * (1.0 + data.column_mean(item)));
        fit.intercept = std::log(p / (1.0 - p));
        std::vector<double> g(static_cast<std::size_t>(m), fit.intercept);
        fit.log_likelihood = -mean_nll(g, y) * m;
        fit.objective = mean_nll(g, y);
        fit.converged = true;
        return fit;
    }

    std::vector<double> g(static_cast<std::size_t>(m), 0.0);  // margins b0 + sum b_j x_j
    if (warm && !warm->degenerate && warm->item == item) {
        fit.intercept = warm->intercept;
        fit.slopes = warm->slopes;
        for (int t = 0; t < m; ++t) {
            double gv = fit.intercept;
            for (int c = 0; c < d; ++c) {
                gv += fit.slopes[static_cast<std::size_t>(c)] *
                      data.at(t, fit.predictors[static_cast<std::size_t>(c)]);
            }
            g[static_cast<std::size_t>(t)] = gv;
        }
    }

    auto penalty_of = [&] {
        double l1 = 0;
        for (double b : fit.slopes) l1 += std::fabs(b);
        return lambda * l1;
    };

    // Outer loop: quadratic expansion of the logistic loss at the current
    // margins (weights floored for saturated probabilities). Inner loop:
    // cyclic soft-threshold coordinate descent on the weighted least-squares
    // surrogate, which needs no exponentials. Since the design is +-1 valued,
    // every coordinate shares the same surrogate curvature mean(w). A
    // step-halving safeguard keeps the true penalized objective nonincreasing
    // across outer steps.
    std::vector<double> w(static_cast<std::size_t>(m)), r(static_cast<std::size_t>(m));
    double current_obj = mean_nll(g, y) + penalty_of();

    const int max_outer = 50;
    for (int outer = 0; outer < max_outer && fit.sweeps < opts.max_sweeps; ++outer) {
        // working weights and residuals: r_t = (y01_t - p_t) / w_t
        double wsum = 0;
        for (int t = 0; t < m; ++t) {
            const double p = 1.0 / (1.0 + std::exp(-g[static_cast<std::size_t>(t)]));
            double wt = p * (1.0 - p);
            if (wt < 1e-5) wt = 1e-5;
            w[static_cast<std::size_t>(t)] = wt;
            const double y01 = 0.5 * (1.0 + y[static_cast<std::size_t>(t)]);
            r[static_cast<std::size_t>(t)] = (y01 - p) / wt;
            wsum += wt;
        }
        const double curv = wsum / m;

        const double b0_before = fit.intercept;
        const std::vector<double> slopes_before = fit.slopes;

        auto inner_update = [&](int col) {
            // col = -1 for the unpenalized intercept
            double wxr = 0;
            if (col < 0) {
                for (int t = 0; t < m; ++t) {
                    wxr += w[static_cast<std::size_t>(t)] * r[static_cast<std::size_t>(t)];
                }
            } else {
                const int j = fit.predictors[static_cast<std::size_t>(col)];
                for (int t = 0; t < m; ++t) {
                    wxr += w[static_cast<std::size_t>(t)] * r[static_cast<std::size_t>(t)] *
                           data.at(t, j);
                }
            }
            wxr /= m;
            const double bj = col < 0 ? fit.intercept : fit.slopes[static_cast<std::size_t>(col)];
            double bj_new = col < 0 ? bj + wxr / curv
                                    : soft_threshold(curv * bj + wxr, lambda) / curv;
            if (col >= 0 && std::fabs(bj_new) < kSupportSnap) bj_new = 0.0;
            const double delta = bj_new - bj;
            if (delta != 0) {
                if (col < 0) {
                    fit.intercept = bj_new;
                    for (int t = 0; t < m; ++t) r[static_cast<std::size_t>(t)] -= delta;
                } else {
                    fit.slopes[static_cast<std::size_t>(col)] = bj_new;
                    const int j = fit.predictors[static_cast<std::size_t>(col)];
                    for (int t = 0; t < m; ++t) {
                        r[static_cast<std::size_t>(t)] -= delta * data.at(t, j);
                    }
                }
            }
            return std::fabs(delta);
        };

        // full sweeps establish the active set; only active coordinates cycle
        // in between
        while (fit.sweeps < opts.max_sweeps) {
            ++fit.sweeps;
            double max_change = inner_update(-1);
            for (int c = 0; c < d; ++c) max_change = std::max(max_change, inner_update(c));
            if (max_change < opts.tol) break;
            std::vector<int> active;
            for (int c = 0; c < d; ++c) {
                if (fit.slopes[static_cast<std::size_t>(c)] != 0.0) active.push_back(c);
            }
            while (fit.sweeps < opts.max_sweeps) {
                ++fit.sweeps;
                double inner_change = inner_update(-1);
                for (int c : active) inner_change = std::max(inner_change, inner_update(c));
                if (inner_change < opts.tol) break;
            }
        }

        auto refresh_margins = [&] {
            for (int t = 0; t < m; ++t) {
                double gv = fit.intercept;
                for (int c = 0; c < d; ++c) {
                    gv += fit.slopes[static_cast<std::size_t>(c)] *
                          data.at(t, fit.predictors[static_cast<std::size_t>(c)]);
                }
                g[static_cast<std::size_t>(t)] = gv;
            }
        };
        refresh_margins();
        double obj = mean_nll(g, y) + penalty_of();
        for (int halving = 0; obj > current_obj + 1e-14 && halving < 30; ++halving) {
            fit.intercept = 0.5 * (fit.intercept + b0_before);
            for (int c = 0; c < d; ++c) {
                fit.slopes[static_cast<std::size_t>(c)] =
                    0.5 * (fit.slopes[static_cast<std::size_t>(c)] +
                           slopes_before[static_cast<std::size_t>(c)]);
            }
            refresh_margins();
            obj = mean_nll(g, y) + penalty_of();
        }
        current_obj = obj;
        if (opts.record_objective_trace) fit.objective_trace.push_back(current_obj);

        double outer_change = std::fabs(fit.intercept - b0_before);
        for (int c = 0; c < d; ++c) {
            outer_change = std::max(outer_change,
                                    std::fabs(fit.slopes[static_cast<std::size_t>(c)] -
                                              slopes_before[static_cast<std::size_t>(c)]));
        }
        if (outer_change < opts.tol) {
            fit.converged = true;
            break;
        }
    }

    const double nll = mean_nll(g, y);
    fit.log_likelihood = -nll * m;
    double l1 = 0;
    for (double b : fit.slopes) l1 += std::fabs(b);
    fit.objective = nll + lambda * l1;
    for (double b : fit.slopes) {
        if (b != 0) ++fit.nonzero_count;
    }
    return fit;
}
}  // namespace

NodeFit fit_node_lasso(const Dataset& data, int item, double lambda, const LassoOptions& opts) {
    return fit_node_lasso_impl(data, item, lambda, opts, nullptr);
}

std::vector<double> lambda_grid_for(const Dataset& data, int item, int count, double min_ratio) {
    const int m = data.rows();
    const int n = data.items();
    // gradient at the intercept-only optimum
    const double p = clamp_prob(0.5 * (1.0 + data.column_mean(item)));
    const double b0 = std::log(p / (1.0 - p));
    double lambda_max = 0;
    for (int j = 0; j < n; ++j) {
        if (j == item) continue;
        double acc = 0;
        for (int t = 0; t < m; ++t) {
            const double yt = data.at(t, item);
            const double z = -yt * b0;
            const double s = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            acc += -yt * data.at(t, j) * s;
        }
        lambda_max = std::max(lambda_max, std::fabs(acc / m));
    }
    lambda_max = std::max(lambda_max, 1e-3);
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double lo = lambda_max * min_ratio;
    for (int k = 0; k < count; ++k) {
        const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        grid[static_cast<std::size_t>(k)] = lambda_max * std::pow(lo / lambda_max, f);
    }
    return grid;
}

double ebic_score(const NodeFit& fit, int m, int n, double gamma) {
    const int k = fit.nonzero_count;
    return -2.0 * fit.log_likelihood + k * std::log(static_cast<double>(m)) +
           2.0 * gamma * k * std::log(static_cast<double>(n - 1));
}

NodePath select_penalty_ebic(const Dataset& data, int item, double gamma,
                             std::vector<double> lambda_grid, const LassoOptions& opts) {
    if (gamma < 0) throw config_error("EBIC gamma must be >= 0");
    if (lambda_grid.empty()) lambda_grid = lambda_grid_for(data, item);
    std::sort(lambda_grid.rbegin(), lambda_grid.rend());

    NodePath path;
    NodeFit warm;
    for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
        NodeFit fit = fit_node_lasso_impl(data, item, lambda_grid[k], opts, k ? &warm : nullptr);
        fit.ebic = ebic_score(fit, data.rows(), data.items(), gamma);
        warm = fit;
        path.fits.push_back(std::move(fit));
        if (path.best_index < 0 ||
            path.fits.back().ebic < path.fits[static_cast<std::size_t>(path.best_index)].ebic) {
            path.best_index = static_cast<int>(path.fits.size()) - 1;
        }
    }
    return path;
}

std::vector<NodeFit> fit_all_nodes(const Dataset& data, double gamma, const LassoOptions& opts,
                                   int threads) {
    const int n = data.items();
    std::vector<NodeFit> fits(static_cast<std::size_t>(n));
    auto work = [&](int i) {
        auto path = select_penalty_ebic(data, i, gamma, {}, opts);
        fits[static_cast<std::size_t>(i)] = path.fits[static_cast<std::size_t>(path.best_index)];
    };
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) work(i);
        return fits;
    }
    std::vector<std::future<void>> futures;
    std::atomic<int> next{0};
    for (int w = 0; w < threads; ++w) {
        futures.push_back(std::async(std::launch::async, [&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) work(i);
        }));
    }
    for (auto& f : futures) f.get();
    return fits;
}

double symmetrize_coefficients(double a, double b, SymmetrizeRule rule) {
    if (rule == SymmetrizeRule::And) {
        return (a != 0 && b != 0) ? 0.5 * (a + b) : 0.0;
    }
    return (a == 0 && b == 0) ? 0.0 : 0.5 * (a + b);
}

IsingModel symmetrize(const std::vector<NodeFit>& fits, SymmetrizeRule rule) {
    const int n = static_cast<int>(fits.size());
    for (int i = 0; i < n; ++i) {
        if (fits[static_cast<std::size_t>(i)].item != i) {
            throw config_error("node fits must cover items 0..n-1 in order");
        }
    }
    std::vector<double> xi(static_cast<std::size_t>(n));
    std::vector<std::pair<int, int>> edges;
    std::vector<double> edge_theta;
    for (int i = 0; i < n; ++i) {
        xi[static_cast<std::size_t>(i)] = 0.5 * fits[static_cast<std::size_t>(i)].intercept;
        for (int j = i + 1; j < n; ++j) {
            const double reconciled = symmetrize_coefficients(
                fits[static_cast<std::size_t>(i)].slope_for(j),
                fits[static_cast<std::size_t>(j)].slope_for(i), rule);
            if (reconciled != 0.0) {
                edges.emplace_back(i, j);
                // the +-1-domain logistic slope is twice the joint's theta
                edge_theta.push_back(0.5 * reconciled);
            }
        }
    }
    return IsingModel::from_edge_list(Graph(n, std::move(edges)), std::move(xi), edge_theta,
                                      Domain::PlusMinus);
}

ConditionalProbs predict_probs(const IsingModel& model, const Dataset& data) {
    return conditional_probs_from_model(model, data);
}

ConditionalProbs predict_probs(const std::vector<NodeFit>& fits, const Dataset& data) {
    const int n = data.items();
    const int m = data.rows();
    if (static_cast<int>(fits.size()) != n) throw data_error("fit/dataset item count mismatch");
    std::vector<double> p(static_cast<std::size_t>(m) * n);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < n; ++i) {
            const auto& fit = fits[static_cast<std::size_t>(i)];
            double gv = fit.intercept;
            for (std::size_t k = 0; k < fit.predictors.size(); ++k) {
                gv += fit.slopes[k] * data.at(t, fit.predictors[k]);
            }
            p[static_cast<std::size_t>(t) * n + i] = 1.0 / (1.0 + std::exp(-gv));
        }
    }
    return ConditionalProbs(std::move(p), m, n, ProbProvenance::Estimated);
}

// ---------------------------------------------------------------------------
// Desparsified lasso

DesparsifiedFit desparsify(const NodeFit& fit, const Dataset& data) {
    const int m = data.rows();
    const int d = static_cast<int>(fit.predictors.size()) + 1;  // intercept first

    Eigen::MatrixXd design(m, d);
    Eigen::VectorXd y01(m);
    for (int t = 0; t < m; ++t) {
        design(t, 0) = 1.0;
        for (int k = 1; k < d; ++k) {
            design(t, k) = data.at(t, fit.predictors[static_cast<std::size_t>(k - 1)]);
        }
        y01(t) = 0.5 * (1.0 + data.at(t, fit.item));
    }

    DesparsifiedFit out;
    out.beta.resize(d);
    out.beta(0) = fit.intercept;
    for (int k = 1; k < d; ++k) out.beta(k) = fit.slopes[static_cast<std::size_t>(k - 1)];

    Eigen::VectorXd margins = design * out.beta;
    Eigen::VectorXd p(m), w(m);
    for (int t = 0; t < m; ++t) {
        p(t) = 1.0 / (1.0 + std::exp(-margins(t)));
        w(t) = p(t) * (1.0 - p(t));
    }

    const Eigen::VectorXd grad = design.transpose() * (p - y01) / m;
    const Eigen::MatrixXd sigma = design.transpose() * w.asDiagonal() * design / m;

    // nodewise regressions on the weighted design
    Eigen::MatrixXd weighted = w.cwiseSqrt().asDiagonal() * design;
    out.theta_hat.setZero(d, d);
    for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd rest(m, d - 1);
        int col = 0;
        for (int k = 0; k < d; ++k) {
            if (k != j) rest.col(col++) = weighted.col(k);
        }
        Eigen::MatrixXd gram = rest.transpose() * rest;
        Eigen::VectorXd rhs = rest.transpose() * weighted.col(j);
        Eigen::LDLT<Eigen::MatrixXd> solver(gram);
        Eigen::VectorXd gamma_j;
        bool ridge = solver.info() != Eigen::Success;
        if (!ridge) {
            gamma_j = solver.solve(rhs);
            if (!gamma_j.allFinite()) ridge = true;
        }
        double tau2 = 0;
        if (!ridge) {
            tau2 = (weighted.col(j).squaredNorm() - rhs.dot(gamma_j)) / m;
            if (!(tau2 > 1e-12)) ridge = true;
        }
        if (ridge) {
            out.ridge_fallback = true;
            gram.diagonal().array() += 1e-4;
            gamma_j = gram.ldlt().solve(rhs);
            tau2 = (weighted.col(j).squaredNorm() - rhs.dot(gamma_j)) / m + 1e-4;
        }
        out.theta_hat(j, j) = 1.0 / tau2;
        col = 0;
        for (int k = 0; k < d; ++k) {
            if (k != j) out.theta_hat(j, k) = -gamma_j(col++) / tau2;
        }
    }

    out.beta_dl = out.beta - out.theta_hat * grad;
    const Eigen::MatrixXd residual =
        sigma * out.theta_hat.transpose() - Eigen::MatrixXd::Identity(d, d);
    out.inverse_residual_maxnorm = residual.cwiseAbs().maxCoeff();
    out.variance_diag = (out.theta_hat * sigma * out.theta_hat.transpose()).diagonal();
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

PipelineResult pipeline_fourier(const Dataset& data, const DecisionFunction& f, double gamma,
                                int max_order, SymmetrizeRule rule, int threads) {
    PipelineResult result;
    try {
        result.fits = fit_all_nodes(data, gamma, {}, threads);
    } catch (const std::exception& e) {
        throw numeric_error(std::string("fit stage: ") + e.what());
    }
    for (const auto& fit : result.fits) {
        if (fit.degenerate) result.degenerate_items.push_back(fit.item);
    }
    try {
        result.model = symmetrize(result.fits, rule);
    } catch (const std::exception& e) {
        throw numeric_error(std::string("symmetrize stage: ") + e.what());
    }
    try {
        // phi is driven by the estimated model's pseudo-measure conditionals
        // (theta/2), the empirical counterpart of the exact E_pi construction;
        // predict_probs keeps the full-logit form for accuracy checks
        result.probs =
            pseudo_conditional_probs_from_model(result.model, data, ProbProvenance::Estimated);
    } catch (const std::exception& e) {
        throw numeric_error(std::string("predict stage: ") + e.what());
    }
    try {
        result.spectrum = empirical_spectrum(f, data, result.probs, max_order);
        result.influence = influence_profile_empirical(result.spectrum, result.probs);
    } catch (const std::exception& e) {
        throw numeric_error(std::string("spectrum stage: ") + e.what());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Export

std::string fits_to_json(const std::vector<NodeFit>& fits) {
    json arr = json::array();
    for (const auto& fit : fits) {
        arr.push_back({{"item", fit.item + 1},
                       {"intercept", fit.intercept},
                       {"predictors", fit.predictors},
                       {"slopes", fit.slopes},
                       {"lambda", fit.lambda},
                       {"ebic", fit.ebic},
                       {"converged", fit.converged},
                       {"degenerate", fit.degenerate},
                       {"sweeps", fit.sweeps}});
    }
    json j;
    j["nodes"] = arr;
    return j.dump(2);
}

std::string model_edges_to_csv(const IsingModel& model) {
    std::string out = "i,j,weight\n";
    char buf[96];
    for (auto [a, b] : model.graph().edges()) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", a + 1, b + 1, model.theta(a, b));
        out += buf;
    }
    return out;
}

}  // namespace boolspec
