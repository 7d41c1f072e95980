#pragma once

#include <memory>
#include <string>
#include <vector>

#include "boolspec/core.hpp"
#include "boolspec/decision.hpp"
#include "boolspec/ising.hpp"

namespace boolspec {

/// Standardized item value (x - mu)/sigma with mu = 2p - 1, sigma = 2 sqrt(p(1-p)).
/// phi(+1) = sqrt((1-p)/p), phi(-1) = -sqrt(p/(1-p)).
double phi(Spin x, double p);

// ---------------------------------------------------------------------------
// Measures for exact expectations

enum class MeasureKind { Uniform, Product, PseudoIsing };

// Exact expectations under the Ising case use the normalized pseudo-measure
// (product of theta/2 conditionals over the normalization sum), with phi
// driven by the per-configuration conditional probabilities.
class Measure {
public:
    static Measure uniform(int n);
    static Measure product(std::vector<double> probs);
    static Measure pseudo_ising(IsingModel model);

    MeasureKind kind() const { return kind_; }
    int items() const { return n_; }
    const std::vector<double>& probs() const { return probs_; }
    const IsingModel& model() const { return *model_; }

private:
    MeasureKind kind_ = MeasureKind::Uniform;
    int n_ = 0;
    std::vector<double> probs_;                 // product / uniform
    std::shared_ptr<const IsingModel> model_;   // pseudo (held in the +-1 domain)
};

/// Tabulated configuration weights (summing to 1) and per-item probabilities.
struct MeasureTable {
    int n = 0;
    bool per_config = false;
    std::vector<double> weight;      // 2^n
    std::vector<double> item_prob;   // per_config ? 2^n * n : n entries

    double prob(SubsetMask idx, int i) const {
        return per_config ? item_prob[static_cast<std::size_t>(idx) * n + i]
                          : item_prob[static_cast<std::size_t>(i)];
    }
};

MeasureTable tabulate_measure(const Measure& measure);

// ---------------------------------------------------------------------------
// Spectra

enum class SpectrumMeasure { Uniform, Product, PseudoIsing, Empirical };

struct FourierSpectrum {
    int n = 0;
    int max_order = 0;
    SpectrumMeasure measure = SpectrumMeasure::Uniform;
    std::vector<double> probs;  // product probabilities when applicable

    // ascending mask order, dense within |S| <= max_order
    std::vector<std::pair<SubsetMask, double>> coeffs;

    double coefficient(SubsetMask mask) const;
    double mean() const { return coefficient(0); }
    /// sum of squared coefficients over nonempty subsets (within stored order)
    double variance() const;
};

/// Coefficient for every |S| <= max_order by full enumeration under the stated
/// measure (max_order < 0 means full order n).
FourierSpectrum exact_spectrum(const DecisionFunction& f, const Measure& measure, int max_order = -1);

/// (1/m) sum_t f(x_t) prod_{i in S} phi(x_it, p_it) for all |S| <= max_order.
FourierSpectrum empirical_spectrum(const DecisionFunction& f, const Dataset& data,
                                   const ConditionalProbs& probs, int max_order = 2);

struct Moments {
    double mean = 0;
    double variance = 0;
};

Moments moments(const FourierSpectrum& spec);

/// sum_{S != empty} fhat(S) ghat(S); requires matching measure and order.
double spectrum_covariance(const FourierSpectrum& a, const FourierSpectrum& b);

/// |E(fg) - sum_S fhat(S) ghat(S)|, both sides by enumeration.
double plancherel_residual(const DecisionFunction& f, const DecisionFunction& g,
                           const Measure& measure);

/// Pointwise reconstruction sum_S fhat(S) phi_S(x) from a full-order spectrum.
double reconstruct_value(const FourierSpectrum& spec, const MeasureTable& table, SubsetMask idx);

// ---------------------------------------------------------------------------
// Export: coefficients with |value| < 1e-15 are dropped on serialization.

std::string spectrum_to_csv(const FourierSpectrum& spec);
std::string spectrum_to_json(const FourierSpectrum& spec);

}  // namespace boolspec
