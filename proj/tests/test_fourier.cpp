#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "boolspec/fourier.hpp"

using namespace boolspec;

namespace {

DecisionFunction max2() { return DecisionFunction::ltf(1.0, {1.0, 1.0}); }

std::vector<double> random_probs(int n, std::uint64_t seed, double lo = 0.1, double hi = 0.9) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = unif(rng);
    return p;
}

DecisionFunction random_table(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Spin> t(std::size_t{1} << n);
    for (auto& v : t) v = rng() & 1 ? Spin{1} : Spin{-1};
    return DecisionFunction::truth_table(n, std::move(t));
}

// the eight closed-form p-biased coefficients of maj3
double maj3_biased_coefficient(SubsetMask mask, const std::vector<double>& p) {
    double mu[3], sigma[3];
    for (int i = 0; i < 3; ++i) {
        mu[i] = 2.0 * p[static_cast<std::size_t>(i)] - 1.0;
        sigma[i] = 2.0 * std::sqrt(p[static_cast<std::size_t>(i)] *
                                   (1.0 - p[static_cast<std::size_t>(i)]));
    }
    switch (mask) {
        case 0b000: return 0.5 * (mu[0] + mu[1] + mu[2] - mu[0] * mu[1] * mu[2]);
        case 0b001: return 0.5 * sigma[0] * (1.0 - mu[1] * mu[2]);
        case 0b010: return 0.5 * sigma[1] * (1.0 - mu[0] * mu[2]);
        case 0b100: return 0.5 * sigma[2] * (1.0 - mu[0] * mu[1]);
        case 0b011: return -0.5 * mu[2] * sigma[0] * sigma[1];
        case 0b101: return -0.5 * mu[1] * sigma[0] * sigma[2];
        case 0b110: return -0.5 * mu[0] * sigma[1] * sigma[2];
        case 0b111: return -0.5 * sigma[0] * sigma[1] * sigma[2];
    }
    return 0;
}

// product-measure dataset with constant per-item probabilities
Dataset product_dataset(const std::vector<double>& p, int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n = static_cast<int>(p.size());
    std::vector<Spin> flat;
    flat.reserve(static_cast<std::size_t>(m) * n);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < n; ++i) {
            flat.push_back(unif(rng) < p[static_cast<std::size_t>(i)] ? Spin{1} : Spin{-1});
        }
    }
    return Dataset(std::move(flat), m, n, SourceDomain::PlusMinus);
}

ConditionalProbs constant_probs(const std::vector<double>& p, int m) {
    const int n = static_cast<int>(p.size());
    std::vector<double> pm(static_cast<std::size_t>(m) * n);
    for (int t = 0; t < m; ++t) {
        for (int i = 0; i < n; ++i) {
            pm[static_cast<std::size_t>(t) * n + i] = p[static_cast<std::size_t>(i)];
        }
    }
    return ConditionalProbs(std::move(pm), m, n, ProbProvenance::TrueModel);
}

}  // namespace

TEST_CASE("phi closed forms and moments") {
    CHECK(phi(1, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(phi(-1, 0.5) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(phi(1, 0.8) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(phi(-1, 0.8) == doctest::Approx(-2.0).epsilon(1e-12));
    for (double p : {0.05, 0.3, 0.5, 0.77, 0.99}) {
        const double mean = p * phi(1, p) + (1 - p) * phi(-1, p);
        const double second = p * phi(1, p) * phi(1, p) + (1 - p) * phi(-1, p) * phi(-1, p);
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(second == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("uniform spectra of max2 and maj3") {
    const auto spec2 = exact_spectrum(max2(), Measure::uniform(2));
    CHECK(spec2.coefficient(0b00) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec2.coefficient(0b01) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec2.coefficient(0b10) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec2.coefficient(0b11) == doctest::Approx(-0.5).epsilon(1e-12));

    const auto spec3 = exact_spectrum(DecisionFunction::majority(3), Measure::uniform(3));
    for (SubsetMask mask = 0; mask < 8; ++mask) {
        const double expected = popcount(mask) == 1 ? 0.5 : (mask == 0b111 ? -0.5 : 0.0);
        CHECK(spec3.coefficient(mask) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("p-biased maj3 spectrum matches the closed forms") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto p = random_probs(3, seed);
        const auto spec = exact_spectrum(DecisionFunction::majority(3), Measure::product(p));
        for (SubsetMask mask = 0; mask < 8; ++mask) {
            CHECK(std::fabs(spec.coefficient(mask) - maj3_biased_coefficient(mask, p)) < 1e-10);
        }
    }
}

TEST_CASE("at p = 1/2 the biased spectrum equals the uniform spectrum exactly") {
    const DecisionFunction f = random_table(5, 4);
    const auto uni = exact_spectrum(f, Measure::uniform(5));
    const auto half = exact_spectrum(f, Measure::product(std::vector<double>(5, 0.5)));
    REQUIRE(uni.coeffs.size() == half.coeffs.size());
    for (std::size_t k = 0; k < uni.coeffs.size(); ++k) {
        CHECK(uni.coeffs[k].first == half.coeffs[k].first);
        CHECK(uni.coeffs[k].second == half.coeffs[k].second);  // bitwise equal
    }
}

TEST_CASE("orthonormality of the product basis") {
    const int n = 5;
    const auto probs = random_probs(n, 11);
    const MeasureTable table = tabulate_measure(Measure::product(probs));
    for (SubsetMask s = 0; s < (SubsetMask{1} << n); ++s) {
        for (SubsetMask t = s; t < (SubsetMask{1} << n); ++t) {
            double acc = 0;
            for (SubsetMask idx = 0; idx < (SubsetMask{1} << n); ++idx) {
                double prod = 1;
                for (SubsetMask rest = s; rest; rest &= rest - 1) {
                    const int i = __builtin_ctzll(rest);
                    prod *= phi((idx >> i) & 1 ? 1 : -1, probs[static_cast<std::size_t>(i)]);
                }
                for (SubsetMask rest = t; rest; rest &= rest - 1) {
                    const int i = __builtin_ctzll(rest);
                    prod *= phi((idx >> i) & 1 ? 1 : -1, probs[static_cast<std::size_t>(i)]);
                }
                acc += table.weight[idx] * prod;
            }
            CHECK(std::fabs(acc - (s == t ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("pointwise reconstruction under random product measures") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const int n = 6;
        const DecisionFunction f = random_table(n, seed);
        const Measure measure = Measure::product(random_probs(n, seed + 50));
        const auto spec = exact_spectrum(f, measure);
        const MeasureTable table = tabulate_measure(measure);
        for (SubsetMask idx = 0; idx < (SubsetMask{1} << n); ++idx) {
            CHECK(std::fabs(reconstruct_value(spec, table, idx) - f.evaluate_config(idx)) < 1e-9);
        }
    }
}

TEST_CASE("moments and covariance") {
    const auto spec3 = exact_spectrum(DecisionFunction::majority(3), Measure::uniform(3));
    const auto m3 = moments(spec3);
    CHECK(m3.mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m3.variance == doctest::Approx(1.0).epsilon(1e-12));

    const auto spec2 = exact_spectrum(max2(), Measure::uniform(2));
    const auto m2 = moments(spec2);
    CHECK(m2.mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m2.variance == doctest::Approx(0.75).epsilon(1e-12));

    CHECK(spectrum_covariance(spec2, spec2) == doctest::Approx(m2.variance).epsilon(1e-12));
    CHECK_THROWS_AS(spectrum_covariance(spec2, spec3), data_error);
}

TEST_CASE("plancherel identities") {
    const DecisionFunction maj = DecisionFunction::majority(3);
    CHECK(plancherel_residual(maj, maj, Measure::uniform(3)) < 1e-12);

    // E(maj3 * dictator_1) equals the singleton coefficient 1/2
    const DecisionFunction dict = DecisionFunction::dictator(0, 3);
    const MeasureTable table = tabulate_measure(Measure::uniform(3));
    double e_fg = 0;
    for (SubsetMask idx = 0; idx < 8; ++idx) {
        e_fg += table.weight[idx] * maj.evaluate_config(idx) * dict.evaluate_config(idx);
    }
    CHECK(e_fg == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(plancherel_residual(maj, dict, Measure::uniform(3)) < 1e-12);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const DecisionFunction f = random_table(5, seed);
        const DecisionFunction g = random_table(5, seed + 100);
        CHECK(plancherel_residual(f, g, Measure::product(random_probs(5, seed + 200))) < 1e-10);
    }
}

TEST_CASE("pseudo-measure spectrum reduces to the product case at zero coupling") {
    const IsingModel m(Graph(4, {}), {0.3, -0.1, 0.0, 0.6}, std::vector<double>(16, 0.0));
    std::vector<double> p(4);
    for (int i = 0; i < 4; ++i) {
        p[static_cast<std::size_t>(i)] = m.conditional_prob(SpinVector(4, 1), i);
    }
    const DecisionFunction f = random_table(4, 9);
    const auto pseudo = exact_spectrum(f, Measure::pseudo_ising(m));
    const auto product = exact_spectrum(f, Measure::product(p));
    for (SubsetMask mask = 0; mask < 16; ++mask) {
        CHECK(std::fabs(pseudo.coefficient(mask) - product.coefficient(mask)) < 1e-12);
    }
}

TEST_CASE("empirical spectrum converges to the exact spectrum") {
    std::mt19937_64 rng(31);
    const auto p = random_probs(3, 8, 0.25, 0.75);
    const int m = 100000;
    const Dataset data = product_dataset(p, m, rng);
    const ConditionalProbs probs = constant_probs(p, m);
    const DecisionFunction maj = DecisionFunction::majority(3);
    const auto emp = empirical_spectrum(maj, data, probs, 3);
    const auto exact = exact_spectrum(maj, Measure::product(p));
    double max_phi = 1;
    for (double pi : p) {
        max_phi = std::max(max_phi, std::max(std::sqrt((1 - pi) / pi), std::sqrt(pi / (1 - pi))));
    }
    for (SubsetMask mask = 0; mask < 8; ++mask) {
        const double tol =
            3.0 * std::pow(max_phi, popcount(mask)) / std::sqrt(static_cast<double>(m));
        CHECK(std::fabs(emp.coefficient(mask) - exact.coefficient(mask)) < std::max(tol, 1e-3));
    }
}

TEST_CASE("empirical spectrum basics") {
    SUBCASE("constant function") {
        const Dataset data = spins_from_binary({{0, 1}, {1, 0}, {1, 1}, {0, 0}});
        const ConditionalProbs probs(std::vector<double>(8, 0.5), 4, 2, ProbProvenance::TrueModel);
        const auto spec = empirical_spectrum(DecisionFunction::constant(1, 2), data, probs, 2);
        CHECK(spec.coefficient(0) == doctest::Approx(1.0).epsilon(1e-15));
        // balanced design makes the order-1 terms vanish exactly here
        CHECK(spec.coefficient(1) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("single observation gives single products") {
        const Dataset data = spins_from_binary({{1, 0}});
        const ConditionalProbs probs({0.8, 0.3}, 1, 2, ProbProvenance::Estimated);
        const DecisionFunction f = DecisionFunction::dictator(0, 2);
        const auto spec = empirical_spectrum(f, data, probs, 2);
        CHECK(spec.coefficient(0b01) == doctest::Approx(phi(1, 0.8)).epsilon(1e-12));
        CHECK(spec.coefficient(0b10) == doctest::Approx(phi(-1, 0.3)).epsilon(1e-12));
        CHECK(spec.coefficient(0b11) ==
              doctest::Approx(phi(1, 0.8) * phi(-1, 0.3)).epsilon(1e-12));
    }
    SUBCASE("misaligned shapes are rejected") {
        const Dataset data = spins_from_binary({{0, 1}});
        const ConditionalProbs probs(std::vector<double>(3, 0.5), 1, 3, ProbProvenance::Estimated);
        CHECK_THROWS_AS(empirical_spectrum(DecisionFunction::majority(3), data, probs, 1),
                        data_error);
    }
}

TEST_CASE("empirical error shrinks at the root-m rate") {
    // quadrupling m should roughly halve the error, averaged over replications
    const auto p = random_probs(3, 77, 0.3, 0.7);
    const DecisionFunction maj = DecisionFunction::majority(3);
    const auto exact = exact_spectrum(maj, Measure::product(p));
    std::mt19937_64 rng(123);

    auto one_error = [&](int m) {
        const Dataset data = product_dataset(p, m, rng);
        const ConditionalProbs probs = constant_probs(p, m);
        const auto emp = empirical_spectrum(maj, data, probs, 1);
        double err = 0;
        for (int i = 0; i < 3; ++i) {
            const double d =
                emp.coefficient(SubsetMask{1} << i) - exact.coefficient(SubsetMask{1} << i);
            err += d * d;
        }
        return std::sqrt(err);
    };

    const int reps = 60;
    double err_small = 0, err_large = 0;
    for (int r = 0; r < reps; ++r) {
        err_small += one_error(400);
        err_large += one_error(1600);
    }
    const double ratio = err_small / err_large;
    CHECK(ratio > 1.5);
    CHECK(ratio < 2.5);
}

TEST_CASE("exports") {
    const auto spec = exact_spectrum(DecisionFunction::majority(3), Measure::uniform(3));
    const std::string csv = spectrum_to_csv(spec);
    CHECK(csv.rfind("subset_mask,order,coefficient", 0) == 0);
    // zero coefficients are dropped: the three singletons and the triple remain
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    const std::string js = spectrum_to_json(spec);
    CHECK(js.find("uniform") != std::string::npos);
}
