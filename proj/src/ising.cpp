#include "boolspec/ising.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

namespace boolspec {

using nlohmann::json;

IsingModel::IsingModel(Graph graph, std::vector<double> thresholds, std::vector<double> theta_dense,
                       Domain domain)
    : graph_(std::move(graph)), xi_(std::move(thresholds)), theta_(std::move(theta_dense)),
      domain_(domain) {
    const int n = graph_.nodes();
    if (static_cast<int>(xi_.size()) != n) throw config_error("threshold vector length mismatch");
    if (theta_.size() != static_cast<std::size_t>(n) * n) {
        throw config_error("interaction matrix must be n x n");
    }
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(xi_[static_cast<std::size_t>(i)])) {
            throw config_error("non-finite threshold at node " + std::to_string(i));
        }
        for (int j = 0; j < n; ++j) {
            const double v = theta_[static_cast<std::size_t>(i) * n + j];
            if (!std::isfinite(v)) throw config_error("non-finite interaction");
            if (i == j && v != 0.0) throw config_error("interaction diagonal must be zero");
            if (v != theta_[static_cast<std::size_t>(j) * n + i]) {
                throw config_error("interaction matrix must be symmetric");
            }
            if (v != 0.0 && i != j && !graph_.has_edge(i, j)) {
                throw config_error("interaction outside the edge set at (" + std::to_string(i) +
                                   "," + std::to_string(j) + ")");
            }
        }
    }
}

IsingModel IsingModel::from_edge_list(Graph graph, std::vector<double> thresholds,
                                      const std::vector<double>& edge_theta, Domain domain) {
    const int n = graph.nodes();
    if (edge_theta.size() != graph.edges().size()) {
        throw config_error("edge-aligned theta length mismatch");
    }
    std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t e = 0; e < edge_theta.size(); ++e) {
        auto [i, j] = graph.edges()[e];
        dense[static_cast<std::size_t>(i) * n + j] = edge_theta[e];
        dense[static_cast<std::size_t>(j) * n + i] = edge_theta[e];
    }
    return IsingModel(std::move(graph), std::move(thresholds), std::move(dense), domain);
}

double IsingModel::half_field(const SpinVector& x, int i) const {
    const double lo = domain_low();
    double s = xi_[static_cast<std::size_t>(i)];
    for (int j : graph_.neighbors(i)) s += 0.5 * theta(i, j) * (x[j] == 1 ? 1.0 : lo);
    return s;
}

double IsingModel::full_field(const SpinVector& x, int i) const {
    const double lo = domain_low();
    double s = xi_[static_cast<std::size_t>(i)];
    for (int j : graph_.neighbors(i)) s += theta(i, j) * (x[j] == 1 ? 1.0 : lo);
    return s;
}

namespace {
// P(X_i = 1) given linear field a and low domain value lo: e^a / (e^{lo*a} + e^a).
inline double field_to_prob(double a, double lo) {
    // logistic((1 - lo) * a), computed overflow-safe
    const double t = (1.0 - lo) * a;
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}
}  // namespace

double IsingModel::conditional_prob(const SpinVector& x, int i) const {
    return field_to_prob(half_field(x, i), domain_low());
}

double IsingModel::joint_conditional_prob(const SpinVector& x, int i) const {
    return field_to_prob(full_field(x, i), domain_low());
}

double IsingModel::conditional_normalizer(const SpinVector& x, int i) const {
    const double a = half_field(x, i);
    return std::exp(domain_low() * a) + std::exp(a);
}

IsingModel IsingModel::to_domain(Domain target) const {
    if (target == domain_) return *this;
    const int n = items();
    std::vector<double> xi(static_cast<std::size_t>(n));
    std::vector<double> th(theta_);
    if (domain_ == Domain::ZeroOne) {
        // x01 = (x + 1)/2: xi' = xi/2 + (1/4) sum_j theta_ij, theta' = theta/4
        for (auto& v : th) v *= 0.25;
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int j : graph_.neighbors(i)) s += theta(i, j);
            xi[static_cast<std::size_t>(i)] = 0.5 * xi_[static_cast<std::size_t>(i)] + 0.25 * s;
        }
    } else {
        // x = 2*x01 - 1: xi' = 2*xi - 2 sum_j theta_ij, theta' = 4*theta
        for (auto& v : th) v *= 4.0;
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int j : graph_.neighbors(i)) s += theta(i, j);
            xi[static_cast<std::size_t>(i)] = 2.0 * xi_[static_cast<std::size_t>(i)] - 2.0 * s;
        }
    }
    return IsingModel(graph_, std::move(xi), std::move(th), target);
}

SpinVector config_spins(const IsingModel& model, SubsetMask idx) {
    // In the 0/1 domain the "spin" labels stay -1/+1 internally; energies map
    // them onto the declared domain values.
    return SpinVector::from_config_index(idx, model.items());
}

namespace {

double config_energy(const IsingModel& model, SubsetMask idx) {
    const int n = model.items();
    const double lo = model.domain_low();
    double e = 0;
    for (int i = 0; i < n; ++i) {
        const double v = (idx >> i) & 1 ? 1.0 : lo;
        e += model.threshold(i) * v;
    }
    for (auto [i, j] : model.graph().edges()) {
        const double vi = (idx >> i) & 1 ? 1.0 : lo;
        const double vj = (idx >> j) & 1 ? 1.0 : lo;
        e += model.theta(i, j) * vi * vj;
    }
    return e;
}

void require_exact_cap(const IsingModel& model, const char* what) {
    if (model.items() > kExactEnumerationCap) {
        throw numeric_error(std::string(what) + " requires n <= " +
                            std::to_string(kExactEnumerationCap) +
                            "; use gibbs_sample for larger models");
    }
}

}  // namespace

double log_partition_function(const IsingModel& model) {
    require_exact_cap(model, "partition function");
    const SubsetMask total = SubsetMask{1} << model.items();
    // log-sum-exp over all configurations
    double max_e = -1e300;
    for (SubsetMask idx = 0; idx < total; ++idx) max_e = std::max(max_e, config_energy(model, idx));
    double sum = 0;
    for (SubsetMask idx = 0; idx < total; ++idx) sum += std::exp(config_energy(model, idx) - max_e);
    return max_e + std::log(sum);
}

double partition_function(const IsingModel& model) { return std::exp(log_partition_function(model)); }

double joint_prob(const IsingModel& model, const SpinVector& x) {
    if (x.size() != model.items()) throw data_error("configuration length mismatch");
    return std::exp(config_energy(model, x.config_index()) - log_partition_function(model));
}

std::vector<double> joint_table(const IsingModel& model) {
    require_exact_cap(model, "joint enumeration");
    const SubsetMask total = SubsetMask{1} << model.items();
    const double log_z = log_partition_function(model);
    std::vector<double> probs(total);
    for (SubsetMask idx = 0; idx < total; ++idx) {
        probs[idx] = std::exp(config_energy(model, idx) - log_z);
    }
    return probs;
}

Dataset gibbs_sample(const IsingModel& model, int m, std::uint64_t seed, GibbsOptions opts) {
    if (m < 1) throw config_error("sample count must be >= 1");
    const int n = model.items();
    std::vector<Spin> flat;
    flat.reserve(static_cast<std::size_t>(m) * n);

    auto run_chain = [&](std::mt19937_64& rng, SpinVector& x, int sweeps) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < sweeps; ++s) {
            for (int i = 0; i < n; ++i) {
                const double p = model.joint_conditional_prob(x, i);
                x.set(i, unif(rng) < p ? Spin{1} : Spin{-1});
            }
        }
    };
    auto random_start = [&](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        SpinVector x(n, 1);
        for (int i = 0; i < n; ++i) x.set(i, unif(rng) < 0.5 ? Spin{-1} : Spin{1});
        return x;
    };

    if (opts.per_sample_chains) {
        for (int t = 0; t < m; ++t) {
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
            SpinVector x = random_start(rng);
            run_chain(rng, x, opts.burn_in);
            flat.insert(flat.end(), x.values().begin(), x.values().end());
        }
    } else {
        std::mt19937_64 rng(seed);
        SpinVector x = random_start(rng);
        run_chain(rng, x, opts.burn_in);
        for (int t = 0; t < m; ++t) {
            run_chain(rng, x, opts.thin);
            flat.insert(flat.end(), x.values().begin(), x.values().end());
        }
    }
    const SourceDomain src =
        model.domain() == Domain::ZeroOne ? SourceDomain::ZeroOne : SourceDomain::PlusMinus;
    return Dataset(std::move(flat), m, n, src);
}

double pseudo_likelihood_weight(const IsingModel& model, const SpinVector& x) {
    double w = 1.0;
    for (int i = 0; i < model.items(); ++i) {
        const double p1 = model.conditional_prob(x, i);
        w *= x[i] == 1 ? p1 : 1.0 - p1;
    }
    return w;
}

PseudoMeasure pseudo_measure(const IsingModel& model) {
    require_exact_cap(model, "pseudo-measure normalization");
    const SubsetMask total = SubsetMask{1} << model.items();
    PseudoMeasure out;
    out.probs.resize(total);
    for (SubsetMask idx = 0; idx < total; ++idx) {
        out.probs[idx] = pseudo_likelihood_weight(model, config_spins(model, idx));
        out.normalization_sum += out.probs[idx];
    }
    for (auto& p : out.probs) p /= out.normalization_sum;
    return out;
}

KlReport kl_divergence_oracle(const IsingModel& model) {
    require_exact_cap(model, "KL divergence oracle");
    const auto joint = joint_table(model);
    const SubsetMask total = SubsetMask{1} << model.items();
    std::vector<double> raw(total);
    double norm = 0;
    for (SubsetMask idx = 0; idx < total; ++idx) {
        raw[idx] = pseudo_likelihood_weight(model, config_spins(model, idx));
        norm += raw[idx];
    }
    KlReport rep;
    rep.normalization_sum = norm;
    for (SubsetMask idx = 0; idx < total; ++idx) {
        if (joint[idx] <= 0) continue;
        rep.kl_raw += joint[idx] * std::log(joint[idx] / raw[idx]);
        rep.kl_normalized += joint[idx] * std::log(joint[idx] / (raw[idx] / norm));
    }
    return rep;
}

ConditionalProbs::ConditionalProbs(std::vector<double> values, int rows, int items,
                                   ProbProvenance provenance)
    : p_(std::move(values)), rows_(rows), items_(items), provenance_(provenance) {
    if (p_.size() != static_cast<std::size_t>(rows_) * items_) {
        throw data_error("probability matrix shape mismatch");
    }
    for (auto& v : p_) {
        if (v < kProbClampLo || v > kProbClampHi) {
            v = clamp_prob(v);
            ++clamped_;
        }
    }
}

namespace {
ConditionalProbs probs_from_model_impl(const IsingModel& model, const Dataset& data, bool pseudo,
                                       ProbProvenance provenance) {
    if (data.items() != model.items()) throw data_error("dataset/model item count mismatch");
    const int m = data.rows();
    const int n = data.items();
    std::vector<double> p(static_cast<std::size_t>(m) * n);
    for (int t = 0; t < m; ++t) {
        const SpinVector x = data.row(t);
        for (int i = 0; i < n; ++i) {
            p[static_cast<std::size_t>(t) * n + i] =
                pseudo ? model.conditional_prob(x, i) : model.joint_conditional_prob(x, i);
        }
    }
    return ConditionalProbs(std::move(p), m, n, provenance);
}
}  // namespace

ConditionalProbs conditional_probs_from_model(const IsingModel& model, const Dataset& data,
                                              ProbProvenance provenance) {
    return probs_from_model_impl(model, data, false, provenance);
}

ConditionalProbs pseudo_conditional_probs_from_model(const IsingModel& model, const Dataset& data,
                                                     ProbProvenance provenance) {
    return probs_from_model_impl(model, data, true, provenance);
}

std::string model_to_json(const IsingModel& model) {
    json j;
    j["n"] = model.items();
    j["domain"] = model.domain() == Domain::PlusMinus ? "pm1" : "zero_one";
    j["xi"] = model.thresholds();
    json edges = json::array();
    json theta = json::array();
    for (auto [a, b] : model.graph().edges()) {
        edges.push_back({a, b});
        theta.push_back(model.theta(a, b));
    }
    j["edges"] = edges;
    j["theta"] = theta;
    return j.dump(2);
}

IsingModel model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw data_error(std::string("model JSON parse failure: ") + e.what());
    }
    try {
        const int n = j.at("n").get<int>();
        const std::string dom = j.value("domain", "pm1");
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        Graph g(n, edges);
        auto xi = j.at("xi").get<std::vector<double>>();
        auto theta = j.at("theta").get<std::vector<double>>();
        return IsingModel::from_edge_list(std::move(g), std::move(xi), theta,
                                          dom == "zero_one" ? Domain::ZeroOne : Domain::PlusMinus);
    } catch (const json::exception& e) {
        throw data_error(std::string("model JSON field error: ") + e.what());
    }
}

}  // namespace boolspec
