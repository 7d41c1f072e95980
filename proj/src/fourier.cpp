#include "boolspec/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace boolspec {

using nlohmann::json;

double phi(Spin x, double p) {
    p = clamp_prob(p);
    return x == 1 ? std::sqrt((1.0 - p) / p) : -std::sqrt(p / (1.0 - p));
}

// ---------------------------------------------------------------------------
// Measure

Measure Measure::uniform(int n) {
    if (n < 1 || n > 4096) throw config_error("item count outside [1, 4096]");
    Measure m;
    m.kind_ = MeasureKind::Uniform;
    m.n_ = n;
    m.probs_.assign(static_cast<std::size_t>(n), 0.5);
    return m;
}

Measure Measure::product(std::vector<double> probs) {
    if (probs.empty() || probs.size() > 4096) throw config_error("item count outside [1, 4096]");
    for (auto& p : probs) p = clamp_prob(p);
    Measure m;
    m.kind_ = MeasureKind::Product;
    m.n_ = static_cast<int>(probs.size());
    m.probs_ = std::move(probs);
    return m;
}

Measure Measure::pseudo_ising(IsingModel model) {
    Measure m;
    m.kind_ = MeasureKind::PseudoIsing;
    m.n_ = model.items();
    m.model_ = std::make_shared<IsingModel>(model.domain() == Domain::PlusMinus
                                                ? std::move(model)
                                                : model.to_domain(Domain::PlusMinus));
    return m;
}

MeasureTable tabulate_measure(const Measure& measure) {
    const int n = measure.items();
    MeasureTable table;
    table.n = n;
    if (measure.kind() == MeasureKind::PseudoIsing) {
        if (n > 16) throw numeric_error("pseudo-measure tabulation requires n <= 16");
        const auto pm = pseudo_measure(measure.model());
        table.per_config = true;
        table.weight = pm.probs;
        table.item_prob.resize((std::size_t{1} << n) * n);
        for (SubsetMask idx = 0; idx < (SubsetMask{1} << n); ++idx) {
            const SpinVector x = SpinVector::from_config_index(idx, n);
            for (int i = 0; i < n; ++i) {
                table.item_prob[static_cast<std::size_t>(idx) * n + i] =
                    clamp_prob(measure.model().conditional_prob(x, i));
            }
        }
        return table;
    }
    if (n > kExactEnumerationCap) {
        throw numeric_error("exact measure tabulation requires n <= " +
                            std::to_string(kExactEnumerationCap));
    }
    table.per_config = false;
    table.item_prob = measure.probs();
    const SubsetMask total = SubsetMask{1} << n;
    table.weight.resize(total);
    for (SubsetMask idx = 0; idx < total; ++idx) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            w *= (idx >> i) & 1 ? table.item_prob[static_cast<std::size_t>(i)]
                                : 1.0 - table.item_prob[static_cast<std::size_t>(i)];
        }
        table.weight[idx] = w;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Spectra

double FourierSpectrum::coefficient(SubsetMask mask) const {
    auto it = std::lower_bound(coeffs.begin(), coeffs.end(), mask,
                               [](const auto& a, SubsetMask m) { return a.first < m; });
    if (it != coeffs.end() && it->first == mask) return it->second;
    return 0.0;
}

double FourierSpectrum::variance() const {
    double v = 0;
    for (const auto& [mask, c] : coeffs) {
        if (mask != 0) v += c * c;
    }
    return v;
}

namespace {

SpectrumMeasure to_tag(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::Uniform: return SpectrumMeasure::Uniform;
        case MeasureKind::Product: return SpectrumMeasure::Product;
        case MeasureKind::PseudoIsing: return SpectrumMeasure::PseudoIsing;
    }
    return SpectrumMeasure::Uniform;
}

// Axis-by-axis transform for factorizing measures: after processing item i,
// the table entry with bit i clear holds the E_{p_i} part and the entry with
// bit i set holds the E_{p_i}(phi * .) part. The final table is f_hat by mask.
std::vector<double> product_transform(const std::vector<Spin>& table, const std::vector<double>& probs) {
    const int n = static_cast<int>(probs.size());
    std::vector<double> a(table.begin(), table.end());
    for (int i = 0; i < n; ++i) {
        const double p = probs[static_cast<std::size_t>(i)];
        const double phi_lo = phi(-1, p), phi_hi = phi(1, p);
        const SubsetMask bit = SubsetMask{1} << i;
        const SubsetMask total = SubsetMask{1} << n;
        for (SubsetMask idx = 0; idx < total; ++idx) {
            if (idx & bit) continue;
            const double lo = a[idx], hi = a[idx | bit];
            a[idx] = (1.0 - p) * lo + p * hi;
            a[idx | bit] = (1.0 - p) * lo * phi_lo + p * hi * phi_hi;
        }
    }
    return a;
}

}  // namespace

FourierSpectrum exact_spectrum(const DecisionFunction& f, const Measure& measure, int max_order) {
    const int n = measure.items();
    if (f.items() != n) throw data_error("function/measure item count mismatch");
    if (n > kExactEnumerationCap) throw numeric_error("exact spectrum requires n <= cap");
    if (max_order < 0 || max_order > n) max_order = n;

    FourierSpectrum spec;
    spec.n = n;
    spec.max_order = max_order;
    spec.measure = to_tag(measure.kind());
    if (measure.kind() != MeasureKind::PseudoIsing) spec.probs = measure.probs();

    if (measure.kind() != MeasureKind::PseudoIsing) {
        const auto values = product_transform(truth_table_of(f), measure.probs());
        for (SubsetMask mask = 0; mask < (SubsetMask{1} << n); ++mask) {
            if (popcount(mask) <= max_order) spec.coeffs.emplace_back(mask, values[mask]);
        }
        return spec;
    }

    // pseudo-measure: weights do not factor, sum subset by subset
    const MeasureTable table = tabulate_measure(measure);
    const auto fvals = truth_table_of(f);
    const SubsetMask total = SubsetMask{1} << n;
    std::vector<double> phis(static_cast<std::size_t>(total) * n);
    for (SubsetMask idx = 0; idx < total; ++idx) {
        for (int i = 0; i < n; ++i) {
            const Spin s = (idx >> i) & 1 ? Spin{1} : Spin{-1};
            phis[static_cast<std::size_t>(idx) * n + i] = phi(s, table.prob(idx, i));
        }
    }
    for (SubsetMask mask = 0; mask < total; ++mask) {
        if (popcount(mask) > max_order) continue;
        double c = 0;
        for (SubsetMask idx = 0; idx < total; ++idx) {
            double prod = fvals[idx];
            for (SubsetMask rest = mask; rest; rest &= rest - 1) {
                const int i = __builtin_ctzll(rest);
                prod *= phis[static_cast<std::size_t>(idx) * n + i];
            }
            c += table.weight[idx] * prod;
        }
        spec.coeffs.emplace_back(mask, c);
    }
    return spec;
}

FourierSpectrum empirical_spectrum(const DecisionFunction& f, const Dataset& data,
                                   const ConditionalProbs& probs, int max_order) {
    const int n = data.items();
    const int m = data.rows();
    if (f.items() != n) throw data_error("function/dataset item count mismatch");
    if (probs.rows() != m || probs.items() != n) {
        throw data_error("probability matrix misaligned with dataset");
    }

    std::vector<double> phi_vals(static_cast<std::size_t>(m) * n);
    std::vector<double> fvals(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) {
        const SpinVector x = data.row(t);
        fvals[static_cast<std::size_t>(t)] = f.evaluate(x);
        for (int i = 0; i < n; ++i) {
            phi_vals[static_cast<std::size_t>(t) * n + i] = phi(x[i], probs.at(t, i));
        }
    }

    FourierSpectrum spec;
    spec.n = n;
    spec.max_order = max_order;
    spec.measure = SpectrumMeasure::Empirical;
    for (SubsetMask mask : enumerate_subsets(n, max_order)) {
        double c = 0;
        for (int t = 0; t < m; ++t) {
            double prod = fvals[static_cast<std::size_t>(t)];
            for (SubsetMask rest = mask; rest; rest &= rest - 1) {
                const int i = __builtin_ctzll(rest);
                prod *= phi_vals[static_cast<std::size_t>(t) * n + i];
            }
            c += prod;
        }
        spec.coeffs.emplace_back(mask, c / m);
    }
    return spec;
}

Moments moments(const FourierSpectrum& spec) { return {spec.mean(), spec.variance()}; }

double spectrum_covariance(const FourierSpectrum& a, const FourierSpectrum& b) {
    if (a.n != b.n || a.max_order != b.max_order || a.measure != b.measure || a.probs != b.probs) {
        throw data_error("spectra measure/order mismatch");
    }
    double cov = 0;
    for (const auto& [mask, c] : a.coeffs) {
        if (mask != 0) cov += c * b.coefficient(mask);
    }
    return cov;
}

double plancherel_residual(const DecisionFunction& f, const DecisionFunction& g,
                           const Measure& measure) {
    const MeasureTable table = tabulate_measure(measure);
    const auto fv = truth_table_of(f);
    const auto gv = truth_table_of(g);
    double lhs = 0;
    for (SubsetMask idx = 0; idx < (SubsetMask{1} << table.n); ++idx) {
        lhs += table.weight[idx] * fv[idx] * gv[idx];
    }
    const auto fs = exact_spectrum(f, measure);
    const auto gs = exact_spectrum(g, measure);
    double rhs = 0;
    for (const auto& [mask, c] : fs.coeffs) rhs += c * gs.coefficient(mask);
    return std::fabs(lhs - rhs);
}

double reconstruct_value(const FourierSpectrum& spec, const MeasureTable& table, SubsetMask idx) {
    double v = 0;
    for (const auto& [mask, c] : spec.coeffs) {
        double prod = c;
        for (SubsetMask rest = mask; rest; rest &= rest - 1) {
            const int i = __builtin_ctzll(rest);
            const Spin s = (idx >> i) & 1 ? Spin{1} : Spin{-1};
            prod *= phi(s, table.prob(idx, i));
        }
        v += prod;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Export

namespace {
std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* measure_name(SpectrumMeasure m) {
    switch (m) {
        case SpectrumMeasure::Uniform: return "uniform";
        case SpectrumMeasure::Product: return "product";
        case SpectrumMeasure::PseudoIsing: return "pseudo_ising";
        case SpectrumMeasure::Empirical: return "empirical";
    }
    return "?";
}
}  // namespace

std::string spectrum_to_csv(const FourierSpectrum& spec) {
    std::string out = "subset_mask,order,coefficient\n";
    for (const auto& [mask, c] : spec.coeffs) {
        if (std::fabs(c) < 1e-15) continue;
        out += std::to_string(mask);
        out += ',';
        out += std::to_string(popcount(mask));
        out += ',';
        out += format_double(c);
        out += '\n';
    }
    return out;
}

std::string spectrum_to_json(const FourierSpectrum& spec) {
    json j;
    j["n"] = spec.n;
    j["max_order"] = spec.max_order;
    j["measure"] = measure_name(spec.measure);
    if (!spec.probs.empty()) j["probs"] = spec.probs;
    json coeffs = json::array();
    for (const auto& [mask, c] : spec.coeffs) {
        if (std::fabs(c) < 1e-15) continue;
        coeffs.push_back({{"mask", mask}, {"order", popcount(mask)}, {"value", c}});
    }
    j["coefficients"] = coeffs;
    return j.dump(2);
}

}  // namespace boolspec
