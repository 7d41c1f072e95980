#include "boolspec/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace boolspec {

SpinVector apply_noise(const SpinVector& x, double rho, std::mt19937_64& rng) {
    if (rho < -1.0 || rho > 1.0) throw config_error("rho outside [-1, 1]");
    const double keep = 0.5 * (1.0 + rho);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SpinVector y = x;
    for (int i = 0; i < x.size(); ++i) {
        if (unif(rng) >= keep) y.flip(i);
    }
    return y;
}

Dataset apply_noise(const Dataset& data, const NoiseProcess& proc) {
    std::mt19937_64 rng(proc.seed);
    std::vector<SpinVector> rows;
    rows.reserve(static_cast<std::size_t>(data.rows()));
    for (int t = 0; t < data.rows(); ++t) rows.push_back(apply_noise(data.row(t), proc.rho, rng));
    return dataset_from_rows(rows);
}

double phi_noisy(Spin y, double mu, double rho) {
    const double s = std::sqrt(1.0 - rho * rho * mu * mu);
    return (y - rho * mu) / s;
}

NoisyMoments noisy_moments(const std::vector<double>& probs, double rho) {
    NoisyMoments out;
    out.true_score.reserve(probs.size());
    out.sigma_rho.reserve(probs.size());
    out.reliability.reserve(probs.size());
    for (double p : probs) {
        p = clamp_prob(p);
        const double mu = 2.0 * p - 1.0;
        const double sigma = 2.0 * std::sqrt(p * (1.0 - p));
        const double srho = std::sqrt(1.0 - rho * rho * mu * mu);
        out.true_score.push_back(rho * mu);
        out.sigma_rho.push_back(srho);
        out.reliability.push_back(rho * sigma / srho);
    }
    return out;
}

std::vector<double> item_reliability(const std::vector<double>& probs, double rho) {
    return noisy_moments(probs, rho).reliability;
}

TrueScoreReport true_score_criteria_check(const std::vector<double>& probs, double rho, int m,
                                          std::uint64_t seed) {
    const int n = static_cast<int>(probs.size());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> err_sum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> e_sum(static_cast<std::size_t>(n), 0.0), e2_sum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> t_sum(static_cast<std::size_t>(n), 0.0), t2_sum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> et_sum(static_cast<std::size_t>(n), 0.0);

    const double keep = 0.5 * (1.0 + rho);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < n; ++i) {
            const double p = clamp_prob(probs[static_cast<std::size_t>(i)]);
            const double x = unif(rng) < p ? 1.0 : -1.0;
            const double y = unif(rng) < keep ? x : -x;
            const double e = y - rho * x;
            const double ts = rho * x;
            err_sum[static_cast<std::size_t>(i)] += e;
            e_sum[static_cast<std::size_t>(i)] += e;
            e2_sum[static_cast<std::size_t>(i)] += e * e;
            t_sum[static_cast<std::size_t>(i)] += ts;
            t2_sum[static_cast<std::size_t>(i)] += ts * ts;
            et_sum[static_cast<std::size_t>(i)] += e * ts;
        }
    }
    TrueScoreReport rep;
    rep.replications = m;
    rep.mc_tolerance = 3.0 / std::sqrt(static_cast<double>(m));
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        rep.max_abs_error_mean = std::max(rep.max_abs_error_mean, std::fabs(err_sum[k] / m));
        const double ve = e2_sum[k] / m - (e_sum[k] / m) * (e_sum[k] / m);
        const double vt = t2_sum[k] / m - (t_sum[k] / m) * (t_sum[k] / m);
        if (ve > 1e-12 && vt > 1e-12) {
            const double cov = et_sum[k] / m - (e_sum[k] / m) * (t_sum[k] / m);
            rep.max_abs_correlation =
                std::max(rep.max_abs_correlation, std::fabs(cov / std::sqrt(ve * vt)));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Stability

namespace {

// E[f(Y) | x] for every configuration x: one axis pass per item.
std::vector<double> noise_operator(const std::vector<Spin>& table, int n, double rho) {
    std::vector<double> a(table.begin(), table.end());
    const double keep = 0.5 * (1.0 + rho);
    const double flip = 0.5 * (1.0 - rho);
    for (int i = 0; i < n; ++i) {
        const SubsetMask bit = SubsetMask{1} << i;
        const SubsetMask total = SubsetMask{1} << n;
        for (SubsetMask idx = 0; idx < total; ++idx) {
            if (idx & bit) continue;
            const double lo = a[idx], hi = a[idx | bit];
            a[idx] = keep * lo + flip * hi;
            a[idx | bit] = keep * hi + flip * lo;
        }
    }
    return a;
}

}  // namespace

StabilityDecomposition stability_decomposition(const DecisionFunction& f, double rho,
                                               const Measure& measure) {
    const MeasureTable table = tabulate_measure(measure);
    const auto fv = truth_table_of(f);
    const auto tf = noise_operator(fv, table.n, rho);
    StabilityDecomposition out;
    for (SubsetMask idx = 0; idx < (SubsetMask{1} << table.n); ++idx) {
        out.stability += table.weight[idx] * fv[idx] * tf[idx];
        out.mean_x += table.weight[idx] * fv[idx];
        out.mean_y += table.weight[idx] * tf[idx];
    }
    out.covariance = out.stability - out.mean_x * out.mean_y;
    return out;
}

double stability_enumeration(const DecisionFunction& f, double rho, const Measure& measure) {
    return stability_decomposition(f, rho, measure).stability;
}

namespace {

struct SpectralParts {
    FourierSpectrum spec_x, spec_y;
    std::vector<double> omega1;  // sigma_i / sigma_rho_i per item
    double covariance = 0;
};

SpectralParts spectral_parts(const DecisionFunction& f, double rho, const Measure& measure) {
    if (measure.kind() == MeasureKind::PseudoIsing) {
        throw numeric_error("the spectral stability route requires a factorizing measure");
    }
    const auto& probs = measure.probs();
    std::vector<double> q(probs.size());
    SpectralParts parts;
    parts.omega1.resize(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double mu = 2.0 * probs[i] - 1.0;
        q[i] = 0.5 * (1.0 + rho * mu);  // P(Y_i = 1); Y is again a product measure
        const double sigma = 2.0 * std::sqrt(probs[i] * (1.0 - probs[i]));
        const double sigma_rho = std::sqrt(1.0 - rho * rho * mu * mu);
        parts.omega1[i] = sigma / sigma_rho;
    }
    parts.spec_x = exact_spectrum(f, measure);
    parts.spec_y = exact_spectrum(f, Measure::product(q));
    for (const auto& [mask, cx] : parts.spec_x.coeffs) {
        if (mask == 0) continue;
        const int order = popcount(mask);
        double omega = 1.0;
        for (SubsetMask rest = mask; rest; rest &= rest - 1) {
            omega *= parts.omega1[static_cast<std::size_t>(__builtin_ctzll(rest))];
        }
        parts.covariance +=
            omega * std::pow(rho, order) * cx * parts.spec_y.coefficient(mask);
    }
    return parts;
}

}  // namespace

double stability_spectral(const DecisionFunction& f, double rho, const Measure& measure) {
    const auto parts = spectral_parts(f, rho, measure);
    return parts.covariance + parts.spec_x.mean() * parts.spec_y.mean();
}

double stability_montecarlo(const DecisionFunction& f, double rho, const Measure& measure,
                            int pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = measure.items();
    const double keep = 0.5 * (1.0 + rho);

    std::vector<double> cdf;  // pseudo-measure sampling for small n
    if (measure.kind() == MeasureKind::PseudoIsing) {
        const auto pm = pseudo_measure(measure.model());
        cdf.resize(pm.probs.size());
        double acc = 0;
        for (std::size_t k = 0; k < pm.probs.size(); ++k) {
            acc += pm.probs[k];
            cdf[k] = acc;
        }
    }

    double acc = 0;
    SpinVector x(n, 1), y(n, 1);
    for (int t = 0; t < pairs; ++t) {
        if (cdf.empty()) {
            for (int i = 0; i < n; ++i) {
                x.set(i, unif(rng) < measure.probs()[static_cast<std::size_t>(i)] ? Spin{1}
                                                                                  : Spin{-1});
            }
        } else {
            const double u = unif(rng);
            const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            const SubsetMask idx = static_cast<SubsetMask>(it - cdf.begin());
            x = SpinVector::from_config_index(idx, n);
        }
        for (int i = 0; i < n; ++i) {
            y.set(i, unif(rng) < keep ? x[i] : static_cast<Spin>(-x[i]));
        }
        acc += static_cast<double>(f.evaluate(x)) * f.evaluate(y);
    }
    return acc / pairs;
}

double stability_montecarlo_data(const DecisionFunction& f, double rho, const Dataset& data,
                                 int replicates, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double acc = 0;
    long long count = 0;
    for (int t = 0; t < data.rows(); ++t) {
        const SpinVector x = data.row(t);
        const double fx = f.evaluate(x);
        for (int r = 0; r < replicates; ++r) {
            const SpinVector y = apply_noise(x, rho, rng);
            acc += fx * f.evaluate(y);
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Decision reliability

ReliabilityReport decision_reliability(const DecisionFunction& f, double rho,
                                       const Measure& measure) {
    const auto parts = spectral_parts(f, rho, measure);
    ReliabilityReport rep;
    const double var_x = parts.spec_x.variance();
    const double var_y = parts.spec_y.variance();
    if (var_x < 1e-12 || var_y < 1e-12) {
        rep.degenerate = true;
        return rep;
    }
    rep.correlation = parts.covariance / std::sqrt(var_x * var_y);
    const double raw_x = 1.0 - parts.spec_x.mean();
    const double raw_y = 1.0 - parts.spec_y.mean();
    if (raw_x > 0 && raw_y > 0) {
        rep.correlation_raw_denom = parts.covariance / std::sqrt(raw_x * raw_y);
    }
    for (int i = 0; i < measure.items(); ++i) {
        const SubsetMask bit = SubsetMask{1} << i;
        rep.approx_order1 += parts.omega1[static_cast<std::size_t>(i)] *
                             parts.spec_x.coefficient(bit) * parts.spec_y.coefficient(bit);
    }
    rep.approx_order1 *= rho;
    rep.gap = std::fabs(rep.correlation - rep.approx_order1);
    return rep;
}

// ---------------------------------------------------------------------------
// Curves

std::vector<StabilityCurveRow> stability_curves(const Dataset& data, const ConditionalProbs& probs,
                                                const std::vector<double>& rho_grid,
                                                const std::vector<double>& a0_grid,
                                                const CurveOptions& opts) {
    if (rho_grid.empty() || a0_grid.empty()) throw config_error("empty grid");
    const int n = data.items();
    const int m = data.rows();
    if (static_cast<int>(opts.weights.size()) != n) throw config_error("weight length mismatch");

    auto make_f = [&](double a0) {
        return opts.zero_one_params ? DecisionFunction::ltf_zero_one(a0, opts.weights)
                                    : DecisionFunction::ltf(a0, opts.weights);
    };

    // mu and sigma of each (t, i) cell from the supplied probabilities
    std::vector<double> mu(static_cast<std::size_t>(m) * n), sigma(static_cast<std::size_t>(m) * n);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < n; ++i) {
            const double p = probs.at(t, i);
            mu[static_cast<std::size_t>(t) * n + i] = 2.0 * p - 1.0;
            sigma[static_cast<std::size_t>(t) * n + i] = 2.0 * std::sqrt(p * (1.0 - p));
        }
    }

    // order-1 empirical coefficients of the clean data per threshold
    const auto subsets1 = enumerate_subsets(n, 1);
    std::vector<StabilityCurveRow> rows;
    rows.reserve(rho_grid.size() * a0_grid.size());

    for (std::size_t rk = 0; rk < rho_grid.size(); ++rk) {
        const double rho = rho_grid[rk];
        std::mt19937_64 rng(mix_seed(opts.seed, rk));

        // draw all noisy replicates once per rho, shared across thresholds
        std::vector<SpinVector> clean;
        clean.reserve(static_cast<std::size_t>(m));
        for (int t = 0; t < m; ++t) clean.push_back(data.row(t));
        std::vector<SpinVector> noisy;
        noisy.reserve(static_cast<std::size_t>(m) * opts.replicates_per_row);
        for (int t = 0; t < m; ++t) {
            for (int r = 0; r < opts.replicates_per_row; ++r) {
                noisy.push_back(apply_noise(clean[static_cast<std::size_t>(t)], rho, rng));
            }
        }

        for (double a0 : a0_grid) {
            const DecisionFunction f = make_f(a0);
            StabilityCurveRow row;
            row.rho = rho;
            row.a0 = a0;

            std::vector<double> fx(static_cast<std::size_t>(m));
            for (int t = 0; t < m; ++t) fx[static_cast<std::size_t>(t)] = f.evaluate(clean[static_cast<std::size_t>(t)]);

            double sxy = 0, sx = 0, sy = 0, sx2 = 0, sy2 = 0;
            std::vector<double> fhat1(static_cast<std::size_t>(n), 0.0);       // clean, order 1
            std::vector<double> fhat1_rho(static_cast<std::size_t>(n), 0.0);   // noisy, order 1
            std::vector<double> omega(static_cast<std::size_t>(n), 0.0);
            long long pairs = 0;
            for (int t = 0; t < m; ++t) {
                const double fxt = fx[static_cast<std::size_t>(t)];
                for (int i = 0; i < n; ++i) {
                    const auto k = static_cast<std::size_t>(t) * n + i;
                    fhat1[static_cast<std::size_t>(i)] +=
                        fxt * (clean[static_cast<std::size_t>(t)][i] - mu[k]) / sigma[k];
                }
                for (int r = 0; r < opts.replicates_per_row; ++r) {
                    const SpinVector& y =
                        noisy[static_cast<std::size_t>(t) * opts.replicates_per_row + r];
                    const double fyt = f.evaluate(y);
                    sxy += fxt * fyt;
                    sx += fxt;
                    sy += fyt;
                    sx2 += fxt * fxt;
                    sy2 += fyt * fyt;
                    ++pairs;
                    for (int i = 0; i < n; ++i) {
                        const auto k = static_cast<std::size_t>(t) * n + i;
                        fhat1_rho[static_cast<std::size_t>(i)] += fyt * phi_noisy(y[i], mu[k], rho);
                    }
                }
            }
            const double np = static_cast<double>(pairs);
            row.stability = sxy / np;
            const double vx = sx2 / np - (sx / np) * (sx / np);
            const double vy = sy2 / np - (sy / np) * (sy / np);
            const double cov = sxy / np - (sx / np) * (sy / np);
            row.reliability_exact = (vx > 1e-12 && vy > 1e-12) ? cov / std::sqrt(vx * vy) : 0.0;

            for (int i = 0; i < n; ++i) {
                double om = 0;
                for (int t = 0; t < m; ++t) {
                    const auto k = static_cast<std::size_t>(t) * n + i;
                    om += sigma[k] / std::sqrt(1.0 - rho * rho * mu[k] * mu[k]);
                }
                omega[static_cast<std::size_t>(i)] = om / m;
                row.reliability_approx += omega[static_cast<std::size_t>(i)] *
                                          (fhat1[static_cast<std::size_t>(i)] / m) *
                                          (fhat1_rho[static_cast<std::size_t>(i)] / np);
            }
            row.reliability_approx *= rho;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<StabilityCurveRow> stability_curves_exact(const Measure& measure,
                                                      const std::vector<double>& weights,
                                                      const std::vector<double>& rho_grid,
                                                      const std::vector<double>& a0_grid,
                                                      bool zero_one_params) {
    if (rho_grid.empty() || a0_grid.empty()) throw config_error("empty grid");
    std::vector<StabilityCurveRow> rows;
    for (double rho : rho_grid) {
        for (double a0 : a0_grid) {
            const DecisionFunction f = zero_one_params
                                           ? DecisionFunction::ltf_zero_one(a0, weights)
                                           : DecisionFunction::ltf(a0, weights);
            StabilityCurveRow row;
            row.rho = rho;
            row.a0 = a0;
            row.stability = stability_spectral(f, rho, measure);
            const auto rel = decision_reliability(f, rho, measure);
            row.reliability_exact = rel.degenerate ? 0.0 : rel.correlation;
            row.reliability_approx = rel.approx_order1;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string curves_to_csv(const std::vector<StabilityCurveRow>& rows) {
    std::string out = "rho,a0,stability,reliability_exact,reliability_approx\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.rho, r.a0, r.stability,
                      r.reliability_exact, r.reliability_approx);
        out += buf;
    }
    return out;
}

}  // namespace boolspec
