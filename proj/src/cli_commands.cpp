#include "boolspec/cli_commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace boolspec {

using nlohmann::json;

namespace {
constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

// ---------------------------------------------------------------------------
// DecisionSpec / ExperimentConfig

DecisionFunction DecisionSpec::build(int n) const {
    if (type == "ltf") {
        std::vector<double> w = weights;
        if (w.empty()) w.assign(static_cast<std::size_t>(n), 1.0 / n);
        if (static_cast<int>(w.size()) != n) {
            throw config_error("decision.weights length must equal n");
        }
        return domain == "zero_one" ? DecisionFunction::ltf_zero_one(a0, std::move(w))
                                    : DecisionFunction::ltf(a0, std::move(w));
    }
    if (type == "majority") return DecisionFunction::majority(n);
    if (type == "dictator") return DecisionFunction::dictator(item, n);
    if (type == "constant") return DecisionFunction::constant(static_cast<Spin>(value), n);
    if (type == "truth_table") {
        json j;
        j["type"] = "truth_table";
        j["n"] = n;
        j["params"] = {{"bits", bits}};
        return DecisionFunction::from_json(j.dump());
    }
    throw config_error("unknown decision.type '" + type + "'");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config parse failure: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.n = j.value("n", c.n);
        c.m = j.value("m", c.m);
        if (j.contains("graph")) {
            const auto& g = j.at("graph");
            if (g.contains("edges")) {
                for (const auto& e : g.at("edges")) {
                    c.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
                }
                c.explicit_edges = true;
            } else {
                c.edge_prob = g.value("edge_prob", c.edge_prob);
            }
        }
        c.theta = j.value("theta", c.theta);
        const std::string rule = j.value("threshold_rule", std::string("neg_half_row_sum"));
        if (rule == "neg_half_row_sum") {
            c.threshold_rule = ThresholdRule::NegHalfRowSum;
        } else if (rule == "zero") {
            c.threshold_rule = ThresholdRule::Zero;
        } else {
            throw config_error("threshold_rule must be neg_half_row_sum or zero");
        }
        c.model_domain = j.value("model_domain", c.model_domain);
        if (c.model_domain != "zero_one" && c.model_domain != "pm1") {
            throw config_error("model_domain must be zero_one or pm1");
        }
        c.sampler = j.value("sampler", c.sampler);
        if (c.sampler != "per_row" && c.sampler != "single_chain") {
            throw config_error("sampler must be per_row or single_chain");
        }
        if (j.contains("decision")) {
            const auto& d = j.at("decision");
            c.decision.type = d.value("type", c.decision.type);
            c.decision.a0 = d.value("a0", c.decision.a0);
            if (d.contains("weights") && d.at("weights").is_array()) {
                c.decision.weights = d.at("weights").get<std::vector<double>>();
            }
            c.decision.domain = d.value("domain", c.decision.domain);
            c.decision.item = d.value("item", 0);
            c.decision.value = d.value("value", 1);
            c.decision.bits = d.value("bits", std::string());
        }
        if (j.contains("rho_grid")) c.rho_grid = j.at("rho_grid").get<std::vector<double>>();
        if (j.contains("a0_grid")) c.a0_grid = j.at("a0_grid").get<std::vector<double>>();
        c.replications = j.value("replications", c.replications);
        c.ebic_gamma = j.value("ebic_gamma", c.ebic_gamma);
        c.max_order = j.value("max_order", c.max_order);
        if (j.contains("theta_grid")) c.theta_grid = j.at("theta_grid").get<std::vector<double>>();
        c.curve_replicates = j.value("curve_replicates", c.curve_replicates);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw config_error(std::string("config field error: ") + e.what());
    }
    if (c.n < 1 || c.n > kMaxItems) throw config_error("config field n outside [1, 64]");
    if (c.m < 1) throw config_error("config field m must be >= 1");
    if (c.edge_prob < 0 || c.edge_prob > 1) throw config_error("config field edge_prob outside [0, 1]");
    if (c.replications < 1) throw config_error("config field replications must be >= 1");
    if (c.ebic_gamma < 0) throw config_error("config field ebic_gamma must be >= 0");
    if (c.max_order < 0) throw config_error("config field max_order must be >= 0");
    if (c.curve_replicates < 1) throw config_error("config field curve_replicates must be >= 1");
    for (double r : c.rho_grid) {
        if (r < -1 || r > 1) throw config_error("config field rho_grid outside [-1, 1]");
    }
    return c;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["n"] = n;
    j["m"] = m;
    if (explicit_edges) {
        json e = json::array();
        for (auto [a, b] : edges) e.push_back({a, b});
        j["graph"] = {{"edges", e}};
    } else {
        j["graph"] = {{"edge_prob", edge_prob}};
    }
    j["theta"] = theta;
    j["threshold_rule"] =
        threshold_rule == ThresholdRule::NegHalfRowSum ? "neg_half_row_sum" : "zero";
    j["model_domain"] = model_domain;
    j["sampler"] = sampler;
    j["decision"] = {{"type", decision.type}, {"a0", decision.a0}, {"domain", decision.domain}};
    if (!decision.weights.empty()) j["decision"]["weights"] = decision.weights;
    if (decision.type == "dictator") j["decision"]["item"] = decision.item;
    if (decision.type == "constant") j["decision"]["value"] = decision.value;
    if (decision.type == "truth_table") j["decision"]["bits"] = decision.bits;
    j["rho_grid"] = rho_grid;
    j["a0_grid"] = a0_grid;
    j["replications"] = replications;
    j["ebic_gamma"] = ebic_gamma;
    j["max_order"] = max_order;
    j["theta_grid"] = theta_grid;
    j["curve_replicates"] = curve_replicates;
    j["threads"] = threads;
    return j.dump(2);
}

IsingModel build_config_model(const ExperimentConfig& config, double theta, std::uint64_t seed) {
    Graph g = config.explicit_edges ? Graph(config.n, config.edges)
                                    : Graph::random(config.n, config.edge_prob, mix_seed(seed, 101));
    std::vector<double> xi(static_cast<std::size_t>(config.n), 0.0);
    if (config.threshold_rule == ThresholdRule::NegHalfRowSum) {
        // threshold of each node is -1/2 the sum over its incident edges
        for (int i = 0; i < config.n; ++i) {
            xi[static_cast<std::size_t>(i)] = -0.5 * theta * g.degree(i);
        }
    }
    const std::vector<double> edge_theta(g.edges().size(), theta);
    const Domain domain = config.model_domain == "pm1" ? Domain::PlusMinus : Domain::ZeroOne;
    return IsingModel::from_edge_list(std::move(g), std::move(xi), edge_theta, domain);
}

GibbsOptions sampler_options(const ExperimentConfig& config) {
    GibbsOptions opts;
    opts.per_sample_chains = config.sampler == "per_row";
    return opts;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw data_error("correlation input mismatch");
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    const double va = saa / n - (sa / n) * (sa / n);
    const double vb = sbb / n - (sb / n) * (sb / n);
    if (va < 1e-15 || vb < 1e-15) return 0.0;
    return (sab / n - (sa / n) * (sb / n)) / std::sqrt(va * vb);
}

ReplicationSummary degree_correlation_replication(const ExperimentConfig& config,
                                                  std::uint64_t seed) {
    const IsingModel model = build_config_model(config, config.theta, seed);
    const Dataset data = gibbs_sample(model, config.m, mix_seed(seed, 202), sampler_options(config));
    const DecisionFunction f = config.decision.build(config.n);
    const auto result = pipeline_fourier(data, f, config.ebic_gamma,
                                         std::max(config.max_order, 1), SymmetrizeRule::And,
                                         config.threads);
    ReplicationSummary out;
    out.order1.resize(static_cast<std::size_t>(config.n));
    out.degrees.resize(static_cast<std::size_t>(config.n));
    std::vector<double> degv(static_cast<std::size_t>(config.n));
    for (int i = 0; i < config.n; ++i) {
        out.order1[static_cast<std::size_t>(i)] =
            result.spectrum.coefficient(SubsetMask{1} << i);
        out.degrees[static_cast<std::size_t>(i)] = model.graph().degree(i);
        degv[static_cast<std::size_t>(i)] = model.graph().degree(i);
    }
    out.degree_coefficient_correlation = pearson_correlation(degv, out.order1);
    return out;
}

RecoveryStats recovery_replication(const ExperimentConfig& config, double theta,
                                   std::uint64_t seed) {
    const IsingModel model = build_config_model(config, theta, seed);
    const Dataset data = gibbs_sample(model, config.m, mix_seed(seed, 202), sampler_options(config));

    const auto fits = fit_all_nodes(data, config.ebic_gamma, {}, config.threads);
    const IsingModel estimate = symmetrize(fits, SymmetrizeRule::And);

    RecoveryStats stats;
    int true_edges = 0, selected = 0, hits = 0;
    for (int i = 0; i < config.n; ++i) {
        for (int j = i + 1; j < config.n; ++j) {
            const bool truth = model.graph().has_edge(i, j);
            const bool est = estimate.graph().has_edge(i, j);
            true_edges += truth;
            selected += est;
            hits += truth && est;
        }
    }
    if (selected > 0) stats.precision = static_cast<double>(hits) / selected;
    if (true_edges > 0) stats.recall = static_cast<double>(hits) / true_edges;

    const ConditionalProbs p_est = predict_probs(estimate, data);
    const ConditionalProbs p_true = conditional_probs_from_model(model, data);
    double mad = 0;
    for (int t = 0; t < data.rows(); ++t) {
        for (int i = 0; i < config.n; ++i) {
            mad += std::fabs(p_est.at(t, i) - p_true.at(t, i));
        }
    }
    stats.prob_mad = mad / (static_cast<double>(data.rows()) * config.n);

    // coefficient accuracy in the full-logit parameterization, estimate vs
    // truth driving the same coefficient formula
    const DecisionFunction f = config.decision.build(config.n);
    const auto spec_est = empirical_spectrum(f, data, p_est, 1);
    const auto spec_true = empirical_spectrum(f, data, p_true, 1);
    double fmad = 0;
    for (int i = 0; i < config.n; ++i) {
        fmad += std::fabs(spec_est.coefficient(SubsetMask{1} << i) -
                          spec_true.coefficient(SubsetMask{1} << i));
    }
    stats.fourier_mad = fmad / config.n;
    return stats;
}

std::string recovery_to_csv(const std::vector<double>& theta_grid,
                            const std::vector<std::vector<RecoveryStats>>& per_theta) {
    auto mean_sd = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        const double mean = s / static_cast<double>(v.size());
        double q = 0;
        for (double x : v) q += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(q / (static_cast<double>(v.size()) - 1)) : 0.0;
        return std::make_pair(mean, sd);
    };
    std::string out =
        "theta,precision_mean,precision_sd,recall_mean,recall_sd,prob_mad_mean,prob_mad_sd,"
        "fourier_mad_mean,fourier_mad_sd\n";
    char buf[256];
    for (std::size_t k = 0; k < theta_grid.size(); ++k) {
        std::vector<double> prec, rec, pmad, fmad;
        for (const auto& s : per_theta[k]) {
            prec.push_back(s.precision);
            rec.push_back(s.recall);
            pmad.push_back(s.prob_mad);
            fmad.push_back(s.fourier_mad);
        }
        const auto [pm, ps] = mean_sd(prec);
        const auto [rm, rs] = mean_sd(rec);
        const auto [mm, ms] = mean_sd(pmad);
        const auto [fm, fs] = mean_sd(fmad);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      theta_grid[k], pm, ps, rm, rs, mm, ms, fm, fs);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subcommand bodies

namespace {

json manifest_base(const std::string& command, const ExperimentConfig& config) {
    json man;
    man["command"] = command;
    man["version"] = kVersion;
    man["seed"] = config.seed;
    man["config_hash"] = fnv1a(config.to_json());
    man["config"] = json::parse(config.to_json());
    return man;
}

void write_manifest(const std::string& out_dir, json man, const std::vector<std::string>& outputs) {
    man["outputs"] = outputs;
    write_file_atomic(out_dir + "/manifest.json", man.dump(2) + "\n");
}

int cmd_simulate(const ExperimentConfig& config, const std::string& out_dir) {
    const IsingModel model = build_config_model(config, config.theta, config.seed);
    const Dataset data =
        gibbs_sample(model, config.m, mix_seed(config.seed, 202), sampler_options(config));

    write_file_atomic(out_dir + "/dataset.csv", dataset_to_csv(data));
    write_file_atomic(out_dir + "/true_model.json", model_to_json(model) + "\n");
    write_manifest(out_dir, manifest_base("simulate", config),
                   {"dataset.csv", "true_model.json"});
    std::cout << "simulate: wrote " << data.rows() << "x" << data.items() << " dataset with "
              << model.graph().edges().size() << " true edges to " << out_dir << "\n";
    return 0;
}

int cmd_analyze(const ExperimentConfig& config, const std::string& data_path,
                const std::string& out_dir, const std::string& true_model_path,
                bool curves_only) {
    Dataset data = read_dataset_csv(data_path);
    ExperimentConfig cfg = config;
    cfg.n = data.items();
    cfg.m = data.rows();

    const DecisionFunction f = cfg.decision.build(cfg.n);
    const auto result =
        pipeline_fourier(data, f, cfg.ebic_gamma, cfg.max_order, SymmetrizeRule::And, cfg.threads);
    for (int item : result.degenerate_items) {
        std::cerr << "warning: item " << item + 1
                  << " is constant in the data; degenerate fit, analysis continues\n";
    }

    std::vector<std::string> outputs;
    if (!curves_only) {
        write_file_atomic(out_dir + "/spectrum.csv", spectrum_to_csv(result.spectrum));
        write_file_atomic(out_dir + "/influence.csv", influence_to_csv(result.influence));
        write_file_atomic(out_dir + "/model_estimate.json", model_to_json(result.model) + "\n");
        write_file_atomic(out_dir + "/fits.json", fits_to_json(result.fits) + "\n");
        write_file_atomic(out_dir + "/edges.csv", model_edges_to_csv(result.model));
        outputs = {"spectrum.csv", "influence.csv", "model_estimate.json", "fits.json",
                   "edges.csv"};
    }

    CurveOptions copts;
    copts.weights = cfg.decision.weights.empty()
                        ? std::vector<double>(static_cast<std::size_t>(cfg.n), 1.0 / cfg.n)
                        : cfg.decision.weights;
    copts.zero_one_params = cfg.decision.domain == "zero_one";
    copts.replicates_per_row = cfg.curve_replicates;
    copts.seed = mix_seed(cfg.seed, 303);
    const auto rows = stability_curves(data, result.probs, cfg.rho_grid, cfg.a0_grid, copts);
    write_file_atomic(out_dir + "/curves.csv", curves_to_csv(rows));
    outputs.push_back("curves.csv");

    if (!true_model_path.empty()) {
        const IsingModel truth = model_from_json(read_text_file(true_model_path));
        std::vector<double> degrees, order1;
        for (int i = 0; i < cfg.n; ++i) {
            degrees.push_back(truth.graph().degree(i));
            order1.push_back(result.spectrum.coefficient(SubsetMask{1} << i));
        }
        const double corr = pearson_correlation(degrees, order1);
        std::string scatter = "item,degree,order1_coefficient\n";
        char buf[96];
        for (int i = 0; i < cfg.n; ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", i + 1, truth.graph().degree(i),
                          order1[static_cast<std::size_t>(i)]);
            scatter += buf;
        }
        write_file_atomic(out_dir + "/influence_vs_degree.csv", scatter);
        outputs.push_back("influence_vs_degree.csv");
        std::cout << "degree/coefficient correlation: " << corr << "\n";
    }

    write_manifest(out_dir, manifest_base(curves_only ? "stability" : "analyze", cfg), outputs);
    std::cout << (curves_only ? "stability" : "analyze") << ": wrote results for " << cfg.m << "x"
              << cfg.n << " dataset to " << out_dir << "\n";
    return 0;
}

int cmd_montecarlo(const ExperimentConfig& config, const std::string& out_dir) {
    if (config.replications < 2) throw config_error("montecarlo requires replications >= 2");
    std::vector<std::vector<RecoveryStats>> per_theta(config.theta_grid.size());
    for (std::size_t k = 0; k < config.theta_grid.size(); ++k) {
        per_theta[k].resize(static_cast<std::size_t>(config.replications));
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int r = next.fetch_add(1); r < config.replications; r = next.fetch_add(1)) {
                per_theta[k][static_cast<std::size_t>(r)] = recovery_replication(
                    config, config.theta_grid[k],
                    mix_seed(config.seed, k * 100000 + static_cast<std::uint64_t>(r)));
            }
        };
        if (config.threads <= 1) {
            worker();
        } else {
            std::vector<std::future<void>> fut;
            for (int w = 0; w < config.threads; ++w) {
                fut.push_back(std::async(std::launch::async, worker));
            }
            for (auto& fx : fut) fx.get();
        }
    }
    write_file_atomic(out_dir + "/recovery.csv", recovery_to_csv(config.theta_grid, per_theta));
    write_manifest(out_dir, manifest_base("montecarlo", config), {"recovery.csv"});
    std::cout << "montecarlo: wrote recovery table over " << config.theta_grid.size()
              << " theta values x " << config.replications << " replications to " << out_dir
              << "\n";
    return 0;
}

int cmd_properties(const std::string& decision_arg) {
    std::string text = decision_arg;
    if (!text.empty() && text.front() != '{') text = read_text_file(decision_arg);
    const DecisionFunction f = DecisionFunction::from_json(text);
    const PropertyReport rep = check_properties(f);
    json j;
    j["monotone"] = rep.monotone;
    j["odd"] = rep.odd;
    j["unanimous"] = rep.unanimous;
    j["symmetric"] = rep.symmetric;
    j["transitive_symmetric"] = rep.transitive_symmetric;
    j["exhaustive"] = rep.exhaustive;
    j["permutations_checked"] = rep.permutations_checked;
    j["ltf_ties"] = f.tie_count();
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Fourier spectra, influence, stability, and Ising estimation for binary "
                 "decision rules"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", data_path, true_model_path, decision_arg;
    std::uint64_t seed_override = 0;
    int threads_override = 0;

    app.add_option("--config", config_path, "experiment config JSON")->capture_default_str();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed_override, "seed override");
    app.add_option("--threads", threads_override, "worker threads for replications");

    auto* sim = app.add_subcommand("simulate", "generate a dataset from a configured model");
    auto* ana = app.add_subcommand("analyze", "estimate, transform, and report on a dataset");
    ana->add_option("--data", data_path, "dataset CSV")->required();
    ana->add_option("--true-model", true_model_path, "true model JSON for diagnostics");
    auto* mc = app.add_subcommand("montecarlo", "recovery and accuracy tables over theta grid");
    auto* stab = app.add_subcommand("stability", "stability/reliability curves for a dataset");
    stab->add_option("--data", data_path, "dataset CSV")->required();
    auto* props = app.add_subcommand("properties", "decision function property report");
    props->add_option("--decision", decision_arg, "decision JSON (inline or file path)")
        ->required();
    // global flags may follow the subcommand name
    for (auto* sub : {sim, ana, mc, stab, props}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        ExperimentConfig config;
        if (!config_path.empty()) config = ExperimentConfig::from_json(read_text_file(config_path));
        if (seed_opt->count() > 0) config.seed = seed_override;
        if (threads_override > 0) config.threads = threads_override;

        if (sim->parsed()) return cmd_simulate(config, out_dir);
        if (ana->parsed()) return cmd_analyze(config, data_path, out_dir, true_model_path, false);
        if (mc->parsed()) return cmd_montecarlo(config, out_dir);
        if (stab->parsed()) return cmd_analyze(config, data_path, out_dir, "", true);
        if (props->parsed()) return cmd_properties(decision_arg);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace boolspec
