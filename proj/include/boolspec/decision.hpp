#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boolspec/core.hpp"
#include "boolspec/ising.hpp"

namespace boolspec {

enum class DecisionKind { Ltf, Majority, Dictator, Constant, TruthTable };

// Boolean decision rule on {-1,+1}^n. Immutable and shareable; evaluation is
// pure (the LTF tie counter is a shared diagnostic, not state).
class DecisionFunction {
public:
    /// sgn(a0 + sum a_i x_i); sgn(0) = +1 and counted as a tie.
    static DecisionFunction ltf(double a0, std::vector<double> weights);
    /// The same rule expressed on 0/1 inputs b = (x+1)/2, converted exactly:
    /// sgn(a0 + sum w_i b_i) = sgn((a0 + sum w_i / 2) + sum (w_i/2) x_i).
    static DecisionFunction ltf_zero_one(double a0, std::vector<double> weights);
    static DecisionFunction majority(int n);  // n odd
    static DecisionFunction dictator(int item, int n);
    static DecisionFunction constant(Spin value, int n);
    /// Outputs indexed by configuration index: item 0 is the least-significant
    /// bit, -1 maps to bit 0, +1 to bit 1.
    static DecisionFunction truth_table(int n, std::vector<Spin> outputs);

    Spin evaluate(const SpinVector& x) const;
    Spin evaluate_config(SubsetMask idx) const;

    int items() const { return n_; }
    DecisionKind kind() const { return kind_; }
    double a0() const { return a0_; }
    const std::vector<double>& weights() const { return weights_; }
    int dictator_item() const { return item_; }
    Spin constant_value() const { return constant_; }
    const std::vector<Spin>& table() const { return table_; }

    long long tie_count() const { return ties_ ? ties_->load() : 0; }
    void reset_tie_count() const {
        if (ties_) ties_->store(0);
    }

    std::string to_json() const;
    static DecisionFunction from_json(const std::string& json_text);

private:
    DecisionFunction() = default;

    DecisionKind kind_ = DecisionKind::Constant;
    int n_ = 0;
    double a0_ = 0;
    std::vector<double> weights_;
    int item_ = 0;
    Spin constant_ = 1;
    std::vector<Spin> table_;
    std::shared_ptr<std::atomic<long long>> ties_;
};

/// All 2^n outputs of f, indexed by configuration index.
std::vector<Spin> truth_table_of(const DecisionFunction& f);

// ---------------------------------------------------------------------------
// Property checking

struct PropertyReport {
    bool monotone = false;
    bool odd = false;
    bool unanimous = false;
    bool symmetric = false;
    bool transitive_symmetric = false;
    bool exhaustive = true;          // false when anonymity was sampled (n > 8)
    long long permutations_checked = 0;

    // witnesses, present when the corresponding flag is false
    std::optional<std::pair<SpinVector, SpinVector>> monotone_witness;  // x <= y, f(x) > f(y)
    std::optional<SpinVector> odd_witness;
    std::optional<SpinVector> unanimous_witness;
    std::optional<std::pair<std::vector<int>, SpinVector>> symmetry_witness;
    std::optional<std::pair<int, int>> transitive_witness;
};

PropertyReport check_properties(const DecisionFunction& f);

// ---------------------------------------------------------------------------
// Energy function and response equivalence classes

/// l_beta_i(x) = xi_i + sum_{j in boundary(i)} theta_ij x_j, evaluated in the
/// model's domain.
double energy_ltf(const IsingModel& model, int i, const SpinVector& x);

struct EquivalenceClasses {
    std::vector<int> boundary;                      // ordered neighbors of i
    std::vector<std::vector<SubsetMask>> classes;   // masks over boundary positions
    std::vector<double> levels;                     // energy per class, ascending
};

/// Groups neighbor configurations of item i by equal energy value; the
/// conditional probability is constant on each class.
EquivalenceClasses equivalence_classes(const IsingModel& model, int i, double tol = 1e-9);

}  // namespace boolspec
