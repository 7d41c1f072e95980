#include <doctest.h>

#include <cmath>
#include <random>

#include "boolspec/influence.hpp"

using namespace boolspec;

namespace {

std::vector<double> random_probs(int n, std::uint64_t seed, double lo = 0.15, double hi = 0.85) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = unif(rng);
    return p;
}

// random table pushed up to a monotone function: f(x) = max over y <= x of g(y)
DecisionFunction random_monotone(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const SubsetMask total = SubsetMask{1} << n;
    std::vector<Spin> t(total);
    for (auto& v : t) v = rng() & 1 ? Spin{1} : Spin{-1};
    for (SubsetMask idx = 0; idx < total; ++idx) {
        for (int i = 0; i < n; ++i) {
            if ((idx >> i) & 1) {
                const SubsetMask down = idx & ~(SubsetMask{1} << i);
                if (t[down] > t[idx]) t[idx] = t[down];
            }
        }
    }
    return DecisionFunction::truth_table(n, std::move(t));
}

double sigma_of(double p) { return 2.0 * std::sqrt(p * (1.0 - p)); }

}  // namespace

TEST_CASE("discrete derivative") {
    const DecisionFunction maj = DecisionFunction::majority(3);
    // first two coordinates disagree: the third is pivotal
    CHECK(std::abs(discrete_derivative(maj, SpinVector({1, -1, 1}), 2)) == 1);
    CHECK(std::abs(discrete_derivative(maj, SpinVector({1, -1, -1}), 2)) == 1);
    // first two agree: the third is irrelevant
    CHECK(discrete_derivative(maj, SpinVector({1, 1, -1}), 2) == 0);

    const DecisionFunction c = DecisionFunction::constant(1, 3);
    for (SubsetMask idx = 0; idx < 8; ++idx) {
        CHECK(discrete_derivative(c, SpinVector::from_config_index(idx, 3), 1) == 0);
    }
    const DecisionFunction dict = DecisionFunction::dictator(0, 3);
    for (SubsetMask idx = 0; idx < 8; ++idx) {
        CHECK(discrete_derivative(dict, SpinVector::from_config_index(idx, 3), 0) == 1);
    }
    CHECK(discrete_derivative_phi(dict, SpinVector({1, 1, 1}), 0, 0.8) == doctest::Approx(0.8));
}

TEST_CASE("influence of the canonical functions under the uniform measure") {
    const MeasureTable table = tabulate_measure(Measure::uniform(3));
    const DecisionFunction maj = DecisionFunction::majority(3);
    for (int i = 0; i < 3; ++i) {
        CHECK(influence_flip(maj, i, table) == doctest::Approx(0.5).epsilon(1e-12));
    }
    const DecisionFunction dict = DecisionFunction::dictator(0, 3);
    CHECK(influence_flip(dict, 0, table) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(influence_flip(dict, 1, table) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(influence_flip(dict, 2, table) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("flip influence equals the Fourier sum under random product measures") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const int n = 5;
        std::vector<Spin> t(32);
        for (auto& v : t) v = rng() & 1 ? Spin{1} : Spin{-1};
        const DecisionFunction f = DecisionFunction::truth_table(n, std::move(t));
        const auto probs = random_probs(n, seed + 40);
        const Measure measure = Measure::product(probs);
        const MeasureTable table = tabulate_measure(measure);
        const auto spec = exact_spectrum(f, measure);
        for (int i = 0; i < n; ++i) {
            const double flip = influence_flip(f, i, table);
            const double fourier =
                influence_fourier(spec, i, sigma_of(probs[static_cast<std::size_t>(i)]));
            CHECK(std::fabs(flip - fourier) < 1e-10);
        }
    }
}

TEST_CASE("monotone simplification: influence is the scaled singleton coefficient") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const int n = 5;
        const DecisionFunction f = random_monotone(n, seed);
        const auto probs = random_probs(n, seed + 90);
        const Measure measure = Measure::product(probs);
        const MeasureTable table = tabulate_measure(measure);
        const auto spec = exact_spectrum(f, measure);
        for (int i = 0; i < n; ++i) {
            const double c1 = spec.coefficient(SubsetMask{1} << i);
            CHECK(c1 >= -1e-12);
            CHECK(std::fabs(influence_flip(f, i, table) -
                            c1 / sigma_of(probs[static_cast<std::size_t>(i)])) < 1e-10);
        }
    }
}

TEST_CASE("influence upper bound") {
    const Measure uniform3 = Measure::uniform(3);
    const auto prof_maj = influence_profile(DecisionFunction::majority(3), uniform3);
    for (int i = 0; i < 3; ++i) {
        CHECK(prof_maj.bound[static_cast<std::size_t>(i)] ==
              doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
        CHECK(prof_maj.influence[static_cast<std::size_t>(i)] <=
              prof_maj.bound[static_cast<std::size_t>(i)]);
        CHECK_FALSE(prof_maj.flagged[static_cast<std::size_t>(i)]);
    }
    CHECK(prof_maj.total == doctest::Approx(1.5).epsilon(1e-12));

    // dictator is not transitive-symmetric: the bound is violated and flagged
    const auto prof_dict = influence_profile(DecisionFunction::dictator(0, 3), uniform3);
    CHECK(prof_dict.influence[0] == doctest::Approx(1.0));
    CHECK(prof_dict.influence[0] > prof_dict.bound[0]);
    CHECK(prof_dict.flagged[0]);

    const auto prof_const = influence_profile(DecisionFunction::constant(1, 3), uniform3);
    CHECK(prof_const.influence[0] == doctest::Approx(0.0));
    CHECK(prof_const.bound[0] == doctest::Approx(0.0));
}

TEST_CASE("influence stays in the unit interval") {
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        std::vector<Spin> t(16);
        for (auto& v : t) v = rng() & 1 ? Spin{1} : Spin{-1};
        const auto prof = influence_profile(DecisionFunction::truth_table(4, std::move(t)),
                                            Measure::product(random_probs(4, seed)));
        for (double v : prof.influence) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("rousseau ltf") {
    SUBCASE("uniform probabilities reduce to majority") {
        const DecisionFunction r = rousseau_ltf({0.5, 0.5, 0.5});
        const DecisionFunction maj = DecisionFunction::majority(3);
        CHECK(r.a0() == doctest::Approx(0.0));
        for (SubsetMask idx = 0; idx < 8; ++idx) {
            CHECK(r.evaluate_config(idx) == maj.evaluate_config(idx));
        }
    }
    SUBCASE("there are exactly 20 monotone functions on three items") {
        CHECK(monotone_functions(3).size() == 20);
        CHECK(monotone_functions(2).size() == 6);
    }
    SUBCASE("sgn(l_phi) attains the maximal unscaled total influence") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto rep = rousseau_maximality_check(random_probs(3, seed));
            CHECK(rep.attains_max);
            CHECK(rep.all_values.size() == 20);
            CHECK(rep.rousseau_value == doctest::Approx(rep.best_value).epsilon(1e-9));
        }
    }
}

TEST_CASE("expected agreement identity") {
    // n/2 + (1/2) sum fhat(i) for any f under the uniform measure
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 6; ++rep) {
        std::vector<Spin> t(16);
        for (auto& v : t) v = rng() & 1 ? Spin{1} : Spin{-1};
        const auto [enumerated, spectral] =
            expected_agreement(DecisionFunction::truth_table(4, std::move(t)));
        CHECK(enumerated == doctest::Approx(spectral).epsilon(1e-12));
    }
    // for monotone f the sum of singleton coefficients is the total influence
    const auto [enum_maj, spec_maj] = expected_agreement(DecisionFunction::majority(3));
    CHECK(enum_maj == doctest::Approx(3.0 / 2.0 + 0.5 * 1.5).epsilon(1e-12));
    CHECK(spec_maj == doctest::Approx(enum_maj).epsilon(1e-12));
}

TEST_CASE("conditional association") {
    SUBCASE("equally weighted sum scores give a positive criterion") {
        const DecisionFunction f = DecisionFunction::ltf(0.0, {0.25, 0.25, 0.25, 0.25});
        const auto rep = conditional_association_check(
            f, f, {0, 1}, DecisionFunction::dictator(0, 2), 1, Measure::uniform(4));
        CHECK(rep.criterion > 0);
        CHECK(rep.covariance >= -1e-12);
        CHECK(rep.signs_agree);
    }
    SUBCASE("nonnegative weights make the criterion nonnegative for every partition") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep_i = 0; rep_i < 5; ++rep_i) {
            std::vector<double> a(4), b(4);
            for (auto& v : a) v = unif(rng);
            for (auto& v : b) v = unif(rng);
            const DecisionFunction f = DecisionFunction::ltf(0.1, a);
            const DecisionFunction g = DecisionFunction::ltf(-0.2, b);
            const Measure measure = Measure::product(random_probs(4, rng()));
            for (SubsetMask kmask = 1; kmask < 15; ++kmask) {
                std::vector<int> part_k;
                for (int i = 0; i < 4; ++i) {
                    if ((kmask >> i) & 1) part_k.push_back(i);
                }
                const int l_size = 4 - static_cast<int>(part_k.size());
                if (l_size == 0) continue;
                const auto rep = conditional_association_check(
                    f, g, part_k, DecisionFunction::constant(1, l_size), 1, measure);
                CHECK(rep.criterion >= -1e-12);
            }
        }
    }
    SUBCASE("monotone LTF pairs are conditionally associated under product measures") {
        const DecisionFunction f = DecisionFunction::ltf(0.0, {0.5, 0.8, 0.2, 0.9});
        const DecisionFunction g = DecisionFunction::ltf(0.1, {0.3, 0.4, 0.7, 0.1});
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const Measure measure = Measure::product(random_probs(4, seed));
            const auto rep = conditional_association_check(
                f, g, {0, 2}, DecisionFunction::ltf(0.0, {1.0, 1.0}), 1, measure);
            CHECK(rep.covariance >= -1e-10);
            CHECK(rep.slice_probability > 0);
        }
    }
    SUBCASE("empty conditioning event is an error") {
        const DecisionFunction f = DecisionFunction::ltf(0.0, {1.0, 1.0, 1.0});
        // h never equals -1 for constant(+1)
        CHECK_THROWS_AS(conditional_association_check(f, f, {0, 1},
                                                      DecisionFunction::constant(1, 1), -1,
                                                      Measure::uniform(3)),
                        numeric_error);
    }
    SUBCASE("non-ltf input is rejected") {
        CHECK_THROWS_AS(
            conditional_association_check(DecisionFunction::majority(3),
                                          DecisionFunction::majority(3), {0},
                                          DecisionFunction::constant(1, 2), 1,
                                          Measure::uniform(3)),
            config_error);
    }
}

TEST_CASE("equal influence under regular models with constant parameters") {
    const DecisionFunction f6 = DecisionFunction::ltf(0.0, std::vector<double>(6, 1.0));
    const IsingModel cycle = IsingModel::from_edge_list(
        Graph::cycle(6), std::vector<double>(6, 0.0), std::vector<double>(6, 1.0));
    const auto rep_cycle = equal_influence_check(cycle, f6);
    CHECK(rep_cycle.max_gap < 1e-10);

    const DecisionFunction f4 = DecisionFunction::ltf(0.0, std::vector<double>(4, 1.0));
    const IsingModel complete = IsingModel::from_edge_list(
        Graph::complete(4), std::vector<double>(4, 0.3), std::vector<double>(6, 0.7));
    const auto rep_complete = equal_influence_check(complete, f4);
    CHECK(rep_complete.max_gap < 1e-10);

    // path degrees 1,2,1 violate the precondition and are named in the error
    const IsingModel path = IsingModel::from_edge_list(
        Graph::path(3), std::vector<double>(3, 0.0), std::vector<double>(2, 1.0));
    CHECK_THROWS_WITH_AS(equal_influence_check(path, DecisionFunction::majority(3)),
                         doctest::Contains("(1,2,1)"), config_error);
}

TEST_CASE("influence report emission") {
    const auto prof = influence_profile(DecisionFunction::majority(3), Measure::uniform(3));
    const std::string csv = influence_to_csv(prof);
    CHECK(csv.rfind("item,influence,bound,flag", 0) == 0);
    CHECK(csv.find("\n1,0.5") != std::string::npos);  // 1-based item labels
    const std::string js = influence_to_json(prof);
    CHECK(js.find("\"total\"") != std::string::npos);
}
