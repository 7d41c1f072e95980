#include "boolspec/influence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace boolspec {

using nlohmann::json;

int discrete_derivative(const DecisionFunction& f, const SpinVector& x, int i) {
    SpinVector y = x;
    y.set(i, 1);
    const int hi = f.evaluate(y);
    y.set(i, -1);
    const int lo = f.evaluate(y);
    return (hi - lo) / 2;
}

double discrete_derivative_phi(const DecisionFunction& f, const SpinVector& x, int i,
                               double sigma_i) {
    return sigma_i * discrete_derivative(f, x, i);
}

double influence_flip(const DecisionFunction& f, int i, const MeasureTable& table) {
    const SubsetMask total = SubsetMask{1} << table.n;
    const SubsetMask bit = SubsetMask{1} << i;
    double acc = 0;
    for (SubsetMask idx = 0; idx < total; ++idx) {
        if (f.evaluate_config(idx) != f.evaluate_config(idx ^ bit)) acc += table.weight[idx];
    }
    return acc;
}

double influence_fourier(const FourierSpectrum& spec, int i, double sigma_i) {
    const SubsetMask bit = SubsetMask{1} << i;
    double acc = 0;
    for (const auto& [mask, c] : spec.coeffs) {
        if (mask & bit) acc += c * c;
    }
    return acc / (sigma_i * sigma_i);
}

double influence_upper_bound(double sd_f, double sigma_i, int n) {
    return sd_f / (sigma_i * std::sqrt(static_cast<double>(n)));
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void apply_flags(InfluenceProfile& prof, const InfluenceFlagPolicy& policy) {
    const double med = median_of(prof.influence);
    prof.flagged.resize(prof.influence.size());
    for (std::size_t i = 0; i < prof.influence.size(); ++i) {
        prof.flagged[i] =
            prof.influence[i] > prof.bound[i] && prof.influence[i] > policy.median_factor * med;
    }
}

// average conditional sd per item under a tabulated measure
std::vector<double> mean_sigma(const MeasureTable& table) {
    std::vector<double> out(static_cast<std::size_t>(table.n));
    if (!table.per_config) {
        for (int i = 0; i < table.n; ++i) {
            const double p = table.item_prob[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] = 2.0 * std::sqrt(p * (1.0 - p));
        }
        return out;
    }
    for (int i = 0; i < table.n; ++i) {
        double acc = 0;
        for (SubsetMask idx = 0; idx < (SubsetMask{1} << table.n); ++idx) {
            const double p = table.prob(idx, i);
            acc += table.weight[idx] * 2.0 * std::sqrt(p * (1.0 - p));
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

}  // namespace

InfluenceProfile influence_profile(const DecisionFunction& f, const Measure& measure,
                                   InfluenceFlagPolicy policy) {
    const MeasureTable table = tabulate_measure(measure);
    const int n = table.n;
    InfluenceProfile prof;
    switch (measure.kind()) {
        case MeasureKind::Uniform: prof.measure = SpectrumMeasure::Uniform; break;
        case MeasureKind::Product: prof.measure = SpectrumMeasure::Product; break;
        case MeasureKind::PseudoIsing: prof.measure = SpectrumMeasure::PseudoIsing; break;
    }
    const auto spec = exact_spectrum(f, measure);
    const double sd = std::sqrt(spec.variance());
    const auto sigmas = mean_sigma(table);
    prof.influence.resize(static_cast<std::size_t>(n));
    prof.bound.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        prof.influence[static_cast<std::size_t>(i)] = influence_flip(f, i, table);
        prof.bound[static_cast<std::size_t>(i)] =
            influence_upper_bound(sd, sigmas[static_cast<std::size_t>(i)], n);
        prof.total += prof.influence[static_cast<std::size_t>(i)];
    }
    apply_flags(prof, policy);
    return prof;
}

InfluenceProfile influence_profile_empirical(const FourierSpectrum& spec,
                                             const ConditionalProbs& probs,
                                             InfluenceFlagPolicy policy) {
    const int n = spec.n;
    InfluenceProfile prof;
    prof.measure = SpectrumMeasure::Empirical;
    prof.influence.resize(static_cast<std::size_t>(n));
    prof.bound.resize(static_cast<std::size_t>(n));
    const double sd = std::sqrt(std::max(spec.variance(), 0.0));
    for (int i = 0; i < n; ++i) {
        double sig = 0;
        for (int t = 0; t < probs.rows(); ++t) {
            const double p = probs.at(t, i);
            sig += 2.0 * std::sqrt(p * (1.0 - p));
        }
        sig /= probs.rows();
        prof.influence[static_cast<std::size_t>(i)] =
            spec.coefficient(SubsetMask{1} << i) / sig;
        prof.bound[static_cast<std::size_t>(i)] = influence_upper_bound(sd, sig, n);
        prof.total += prof.influence[static_cast<std::size_t>(i)];
    }
    apply_flags(prof, policy);
    return prof;
}

// ---------------------------------------------------------------------------
// Rousseau

DecisionFunction rousseau_ltf(const std::vector<double>& probs) {
    double a0 = 0;
    std::vector<double> w(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = clamp_prob(probs[i]);
        const double mu = 2.0 * p - 1.0;
        const double sigma = 2.0 * std::sqrt(p * (1.0 - p));
        a0 -= mu / sigma;
        w[i] = 1.0 / sigma;
    }
    return DecisionFunction::ltf(a0, std::move(w));
}

std::vector<DecisionFunction> monotone_functions(int n) {
    if (n > 4) throw numeric_error("monotone enumeration supported for n <= 4");
    const SubsetMask total = SubsetMask{1} << n;
    const SubsetMask tables = SubsetMask{1} << total;
    std::vector<DecisionFunction> out;
    for (SubsetMask t = 0; t < tables; ++t) {
        bool monotone = true;
        for (SubsetMask idx = 0; idx < total && monotone; ++idx) {
            for (int i = 0; i < n; ++i) {
                if ((idx >> i) & 1) continue;
                const SubsetMask up = idx | (SubsetMask{1} << i);
                if (((t >> idx) & 1) > ((t >> up) & 1)) {
                    monotone = false;
                    break;
                }
            }
        }
        if (!monotone) continue;
        std::vector<Spin> table(total);
        for (SubsetMask idx = 0; idx < total; ++idx) {
            table[idx] = (t >> idx) & 1 ? Spin{1} : Spin{-1};
        }
        out.push_back(DecisionFunction::truth_table(n, std::move(table)));
    }
    return out;
}

RousseauReport rousseau_maximality_check(const std::vector<double>& probs, double tol) {
    if (probs.size() != 3) throw config_error("the exhaustive check runs at n = 3");
    const Measure measure = Measure::product(probs);
    const MeasureTable table = tabulate_measure(measure);
    std::vector<double> sigma(3);
    for (int i = 0; i < 3; ++i) {
        const double p = clamp_prob(probs[static_cast<std::size_t>(i)]);
        sigma[static_cast<std::size_t>(i)] = 2.0 * std::sqrt(p * (1.0 - p));
    }
    auto unscaled_total = [&](const DecisionFunction& f) {
        double acc = 0;
        for (int i = 0; i < 3; ++i) {
            acc += sigma[static_cast<std::size_t>(i)] * influence_flip(f, i, table);
        }
        return acc;
    };

    RousseauReport rep;
    const auto candidates = monotone_functions(3);
    rep.all_values.reserve(candidates.size());
    for (const auto& f : candidates) {
        rep.all_values.push_back(unscaled_total(f));
        rep.best_value = std::max(rep.best_value, rep.all_values.back());
    }
    rep.rousseau_value = unscaled_total(rousseau_ltf(probs));
    rep.attains_max = rep.rousseau_value >= rep.best_value - tol;
    return rep;
}

std::pair<double, double> expected_agreement(const DecisionFunction& f) {
    const int n = f.items();
    if (n > kExactEnumerationCap) throw numeric_error("agreement enumeration requires n <= cap");
    const SubsetMask total = SubsetMask{1} << n;
    double enumerated = 0;
    for (SubsetMask idx = 0; idx < total; ++idx) {
        const Spin fx = f.evaluate_config(idx);
        int agree = 0;
        for (int i = 0; i < n; ++i) {
            const Spin xi = (idx >> i) & 1 ? Spin{1} : Spin{-1};
            if (xi == fx) ++agree;
        }
        enumerated += agree;
    }
    enumerated /= static_cast<double>(total);

    const auto spec = exact_spectrum(f, Measure::uniform(n), 1);
    double sum_first = 0;
    for (int i = 0; i < n; ++i) sum_first += spec.coefficient(SubsetMask{1} << i);
    return {enumerated, n / 2.0 + 0.5 * sum_first};
}

// ---------------------------------------------------------------------------
// Conditional association

CondAssocReport conditional_association_check(const DecisionFunction& f, const DecisionFunction& g,
                                              const std::vector<int>& part_k,
                                              const DecisionFunction& h, Spin h_value,
                                              const Measure& measure) {
    if (f.kind() != DecisionKind::Ltf || g.kind() != DecisionKind::Ltf) {
        throw config_error("the first-order criterion requires LTF decision functions");
    }
    const int n = measure.items();
    const MeasureTable table = tabulate_measure(measure);

    std::vector<bool> in_k(static_cast<std::size_t>(n), false);
    for (int i : part_k) {
        if (i < 0 || i >= n) throw config_error("partition index out of range");
        in_k[static_cast<std::size_t>(i)] = true;
    }
    std::vector<int> part_l;
    for (int i = 0; i < n; ++i) {
        if (!in_k[static_cast<std::size_t>(i)]) part_l.push_back(i);
    }
    if (h.items() != static_cast<int>(part_l.size())) {
        throw config_error("conditioning function arity must match the complement part");
    }

    CondAssocReport rep;
    double wsum = 0, ef = 0, eg = 0, efg = 0;
    const SubsetMask total = SubsetMask{1} << n;
    for (SubsetMask idx = 0; idx < total; ++idx) {
        SubsetMask hidx = 0;
        for (std::size_t b = 0; b < part_l.size(); ++b) {
            if ((idx >> part_l[b]) & 1) hidx |= SubsetMask{1} << b;
        }
        if (h.evaluate_config(hidx) != h_value) continue;
        const double w = table.weight[idx];
        const double fv = f.evaluate_config(idx);
        const double gv = g.evaluate_config(idx);
        wsum += w;
        ef += w * fv;
        eg += w * gv;
        efg += w * fv * gv;
    }
    if (wsum <= 0) throw numeric_error("empty conditioning event");
    rep.slice_probability = wsum;
    rep.covariance = efg / wsum - (ef / wsum) * (eg / wsum);

    for (int i : part_k) {
        double sigma2;
        if (table.per_config) {
            sigma2 = 0;
            for (SubsetMask idx = 0; idx < total; ++idx) {
                const double p = table.prob(idx, i);
                sigma2 += table.weight[idx] * 4.0 * p * (1.0 - p);
            }
        } else {
            const double p = table.item_prob[static_cast<std::size_t>(i)];
            sigma2 = 4.0 * p * (1.0 - p);
        }
        rep.criterion += f.weights()[static_cast<std::size_t>(i)] *
                         g.weights()[static_cast<std::size_t>(i)] * sigma2;
    }
    rep.signs_agree = (rep.criterion >= 0) == (rep.covariance >= -1e-12);
    return rep;
}

// ---------------------------------------------------------------------------
// Equal influence

EqualInfluenceReport equal_influence_check(const IsingModel& model, const DecisionFunction& f) {
    const Graph& g = model.graph();
    if (!g.is_regular()) {
        std::string degrees;
        for (int i = 0; i < g.nodes(); ++i) {
            if (i) degrees += ",";
            degrees += std::to_string(g.degree(i));
        }
        throw config_error("equal-influence check requires a regular graph; degrees are (" +
                           degrees + ")");
    }
    for (int i = 1; i < g.nodes(); ++i) {
        if (model.threshold(i) != model.threshold(0)) {
            throw config_error("equal-influence check requires constant thresholds");
        }
    }
    if (!g.edges().empty()) {
        const double t0 = model.theta(g.edges()[0].first, g.edges()[0].second);
        for (auto [a, b] : g.edges()) {
            if (model.theta(a, b) != t0) {
                throw config_error("equal-influence check requires constant interactions");
            }
        }
    }

    const Measure measure = Measure::pseudo_ising(model);
    const MeasureTable table = tabulate_measure(measure);
    EqualInfluenceReport rep;
    rep.influences.resize(static_cast<std::size_t>(model.items()));
    for (int i = 0; i < model.items(); ++i) {
        rep.influences[static_cast<std::size_t>(i)] = influence_flip(f, i, table);
    }
    for (std::size_t i = 0; i < rep.influences.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.influences.size(); ++j) {
            rep.max_gap = std::max(rep.max_gap, std::fabs(rep.influences[i] - rep.influences[j]));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Reports

std::string influence_to_csv(const InfluenceProfile& profile) {
    std::string out = "item,influence,bound,flag\n";
    char buf[96];
    for (std::size_t i = 0; i < profile.influence.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d\n", i + 1, profile.influence[i],
                      profile.bound[i], profile.flagged[i] ? 1 : 0);
        out += buf;
    }
    return out;
}

std::string influence_to_json(const InfluenceProfile& profile) {
    json items = json::array();
    for (std::size_t i = 0; i < profile.influence.size(); ++i) {
        items.push_back({{"item", i + 1},
                         {"influence", profile.influence[i]},
                         {"bound", profile.bound[i]},
                         {"flag", static_cast<bool>(profile.flagged[i])}});
    }
    json j;
    j["total"] = profile.total;
    j["items"] = items;
    return j.dump(2);
}

}  // namespace boolspec
