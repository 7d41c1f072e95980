#pragma once

#include <string>
#include <vector>

#include "boolspec/decision.hpp"
#include "boolspec/fourier.hpp"

namespace boolspec {

/// D_i f = (f(x with x_i=+1) - f(x with x_i=-1)) / 2, in {-1, 0, +1}.
int discrete_derivative(const DecisionFunction& f, const SpinVector& x, int i);

/// sigma_i * D_i f, the derivative against the standardized coordinate.
double discrete_derivative_phi(const DecisionFunction& f, const SpinVector& x, int i, double sigma_i);

/// Influence as the flip probability E[(D_i f)^2] under the measure.
double influence_flip(const DecisionFunction& f, int i, const MeasureTable& table);

/// Fourier form (1/sigma_i^2) sum_{S containing i} fhat(S)^2.
double influence_fourier(const FourierSpectrum& spec, int i, double sigma_i);

struct InfluenceFlagPolicy {
    double median_factor = 2.0;  // flag when I_i > bound and I_i > factor * median
};

struct InfluenceProfile {
    std::vector<double> influence;
    std::vector<double> bound;      // sd(f) / (sigma_i sqrt(n)); derivation assumes
                                    // transitive symmetry, recorded here
    bool bound_assumes_transitive_symmetry = true;
    std::vector<bool> flagged;
    double total = 0;
    SpectrumMeasure measure = SpectrumMeasure::Uniform;
};

InfluenceProfile influence_profile(const DecisionFunction& f, const Measure& measure,
                                   InfluenceFlagPolicy policy = {});

/// Profile from the empirical pipeline: monotone form fhat(i)/sigma_bar_i with
/// the mean conditional sd; values are estimates and may fall outside [0,1].
InfluenceProfile influence_profile_empirical(const FourierSpectrum& spec,
                                             const ConditionalProbs& probs,
                                             InfluenceFlagPolicy policy = {});

double influence_upper_bound(double sd_f, double sigma_i, int n);

// ---------------------------------------------------------------------------
// Rousseau's maximizer

/// LTF with a0 = -sum mu_i/sigma_i and a_i = 1/sigma_i.
DecisionFunction rousseau_ltf(const std::vector<double>& probs);

/// All monotone Boolean functions on n items (including the two constants);
/// n = 3 yields the 20 functions.
std::vector<DecisionFunction> monotone_functions(int n);

struct RousseauReport {
    double rousseau_value = 0;          // sum sigma_i I_i at sgn(l_phi)
    double best_value = 0;              // maximum over all monotone functions
    bool attains_max = false;           // within tolerance; ties permitted
    std::vector<double> all_values;     // aligned with monotone_functions(3)
};

RousseauReport rousseau_maximality_check(const std::vector<double>& probs, double tol = 1e-9);

/// Uniform-measure expected number of items agreeing with the decision,
/// enumerated directly and via n/2 + (1/2) sum fhat(i).
std::pair<double, double> expected_agreement(const DecisionFunction& f);

// ---------------------------------------------------------------------------
// Conditional association (LTF criterion + enumeration)

struct CondAssocReport {
    double covariance = 0;        // cov(f, g | h(x_L) = c) by enumeration
    double criterion = 0;         // sum_{i in K} a_i b_i sigma_i^2
    double slice_probability = 0;
    bool signs_agree = false;     // criterion >= 0 matches covariance >= -tol
};

/// f and g must be LTFs; K indexes the conditioned-on part's complement, h is
/// evaluated on the remaining coordinates (ascending order).
CondAssocReport conditional_association_check(const DecisionFunction& f, const DecisionFunction& g,
                                              const std::vector<int>& part_k,
                                              const DecisionFunction& h, Spin h_value,
                                              const Measure& measure);

// ---------------------------------------------------------------------------
// Equal influence under regular models

struct EqualInfluenceReport {
    std::vector<double> influences;
    double max_gap = 0;
};

/// Influences under the normalized pseudo-measure of a regular model with
/// constant parameters; rejects non-regular graphs naming the degrees.
EqualInfluenceReport equal_influence_check(const IsingModel& model, const DecisionFunction& f);

// ---------------------------------------------------------------------------
// Report emission: CSV columns item, influence, bound, flag (1-based items)

std::string influence_to_csv(const InfluenceProfile& profile);
std::string influence_to_json(const InfluenceProfile& profile);

}  // namespace boolspec
