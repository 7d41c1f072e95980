#include "boolspec/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace boolspec {

using nlohmann::json;

namespace {

// evaluation by SpinVector has no mask limit; config-index paths stay within
// the enumeration caps enforced at their call sites
void require_items(int n) {
    if (n < 1 || n > 4096) throw config_error("item count outside [1, 4096]");
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static const char* tab = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) v |= bytes[i + 2];
        out += tab[(v >> 18) & 63];
        out += tab[(v >> 12) & 63];
        out += i + 1 < bytes.size() ? tab[(v >> 6) & 63] : '=';
        out += i + 2 < bytes.size() ? tab[v & 63] : '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t buf = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = val(c);
        if (v < 0) throw data_error("invalid base64 character");
        buf = (buf << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((buf >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace

DecisionFunction DecisionFunction::ltf(double a0, std::vector<double> weights) {
    require_items(static_cast<int>(weights.size()));
    DecisionFunction f;
    f.kind_ = DecisionKind::Ltf;
    f.n_ = static_cast<int>(weights.size());
    f.a0_ = a0;
    f.weights_ = std::move(weights);
    f.ties_ = std::make_shared<std::atomic<long long>>(0);
    return f;
}

DecisionFunction DecisionFunction::ltf_zero_one(double a0, std::vector<double> weights) {
    double half_sum = 0;
    for (double w : weights) half_sum += 0.5 * w;
    for (double& w : weights) w *= 0.5;
    return ltf(a0 + half_sum, std::move(weights));
}

DecisionFunction DecisionFunction::majority(int n) {
    require_items(n);
    if (n % 2 == 0) throw config_error("majority requires odd n");
    DecisionFunction f;
    f.kind_ = DecisionKind::Majority;
    f.n_ = n;
    return f;
}

DecisionFunction DecisionFunction::dictator(int item, int n) {
    require_items(n);
    if (item < 0 || item >= n) throw config_error("dictator item out of range");
    DecisionFunction f;
    f.kind_ = DecisionKind::Dictator;
    f.n_ = n;
    f.item_ = item;
    return f;
}

DecisionFunction DecisionFunction::constant(Spin value, int n) {
    require_items(n);
    if (value != -1 && value != 1) throw config_error("constant value must be -1 or +1");
    DecisionFunction f;
    f.kind_ = DecisionKind::Constant;
    f.n_ = n;
    f.constant_ = value;
    return f;
}

DecisionFunction DecisionFunction::truth_table(int n, std::vector<Spin> outputs) {
    require_items(n);
    if (n > kExactEnumerationCap) throw config_error("truth table item count exceeds the exact cap");
    if (outputs.size() != (std::size_t{1} << n)) {
        throw config_error("truth table must have exactly 2^n entries");
    }
    for (Spin s : outputs) {
        if (s != -1 && s != 1) throw config_error("truth table entries must be -1 or +1");
    }
    DecisionFunction f;
    f.kind_ = DecisionKind::TruthTable;
    f.n_ = n;
    f.table_ = std::move(outputs);
    return f;
}

Spin DecisionFunction::evaluate(const SpinVector& x) const {
    if (x.size() != n_) {
        throw data_error("decision function expects " + std::to_string(n_) + " items, got " +
                         std::to_string(x.size()));
    }
    switch (kind_) {
        case DecisionKind::Ltf: {
            double s = a0_;
            for (int i = 0; i < n_; ++i) s += weights_[static_cast<std::size_t>(i)] * x[i];
            if (s == 0.0 && ties_) ties_->fetch_add(1);
            return s >= 0.0 ? Spin{1} : Spin{-1};
        }
        case DecisionKind::Majority: {
            int s = 0;
            for (int i = 0; i < n_; ++i) s += x[i];
            return s > 0 ? Spin{1} : Spin{-1};
        }
        case DecisionKind::Dictator:
            return x[item_];
        case DecisionKind::Constant:
            return constant_;
        case DecisionKind::TruthTable:
            return table_[x.config_index()];
    }
    return 1;
}

Spin DecisionFunction::evaluate_config(SubsetMask idx) const {
    switch (kind_) {
        case DecisionKind::Ltf: {
            double s = a0_;
            for (int i = 0; i < n_; ++i) {
                s += (idx >> i) & 1 ? weights_[static_cast<std::size_t>(i)]
                                    : -weights_[static_cast<std::size_t>(i)];
            }
            if (s == 0.0 && ties_) ties_->fetch_add(1);
            return s >= 0.0 ? Spin{1} : Spin{-1};
        }
        case DecisionKind::Majority: {
            const int ones = popcount(idx & ((n_ == 64 ? ~SubsetMask{0} : (SubsetMask{1} << n_) - 1)));
            return 2 * ones > n_ ? Spin{1} : Spin{-1};
        }
        case DecisionKind::Dictator:
            return (idx >> item_) & 1 ? Spin{1} : Spin{-1};
        case DecisionKind::Constant:
            return constant_;
        case DecisionKind::TruthTable:
            return table_[idx];
    }
    return 1;
}

std::vector<Spin> truth_table_of(const DecisionFunction& f) {
    if (f.items() > kExactEnumerationCap) throw numeric_error("truth table exceeds the exact cap");
    const SubsetMask total = SubsetMask{1} << f.items();
    std::vector<Spin> out(total);
    for (SubsetMask idx = 0; idx < total; ++idx) out[idx] = f.evaluate_config(idx);
    return out;
}

std::string DecisionFunction::to_json() const {
    json j;
    j["n"] = n_;
    switch (kind_) {
        case DecisionKind::Ltf:
            j["type"] = "ltf";
            j["params"] = {{"a0", a0_}, {"weights", weights_}};
            break;
        case DecisionKind::Majority:
            j["type"] = "majority";
            j["params"] = json::object();
            break;
        case DecisionKind::Dictator:
            j["type"] = "dictator";
            j["params"] = {{"item", item_}};
            break;
        case DecisionKind::Constant:
            j["type"] = "constant";
            j["params"] = {{"value", static_cast<int>(constant_)}};
            break;
        case DecisionKind::TruthTable: {
            // bit k of byte k/8 holds entry k; bit 1 encodes output +1
            std::vector<std::uint8_t> bytes((table_.size() + 7) / 8, 0);
            for (std::size_t k = 0; k < table_.size(); ++k) {
                if (table_[k] == 1) bytes[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
            }
            j["type"] = "truth_table";
            j["params"] = {{"bits", base64_encode(bytes)}};
            break;
        }
    }
    return j.dump(2);
}

DecisionFunction DecisionFunction::from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw data_error(std::string("decision JSON parse failure: ") + e.what());
    }
    try {
        const std::string type = j.at("type").get<std::string>();
        const int n = j.at("n").get<int>();
        const json params = j.value("params", json::object());
        if (type == "ltf") {
            return ltf(params.at("a0").get<double>(), params.at("weights").get<std::vector<double>>());
        }
        if (type == "ltf_zero_one") {
            return ltf_zero_one(params.at("a0").get<double>(),
                                params.at("weights").get<std::vector<double>>());
        }
        if (type == "majority") return majority(n);
        if (type == "dictator") return dictator(params.at("item").get<int>(), n);
        if (type == "constant") return constant(static_cast<Spin>(params.at("value").get<int>()), n);
        if (type == "truth_table") {
            const auto bytes = base64_decode(params.at("bits").get<std::string>());
            const std::size_t total = std::size_t{1} << n;
            if (bytes.size() < (total + 7) / 8) throw data_error("truth table bitstring too short");
            std::vector<Spin> table(total);
            for (std::size_t k = 0; k < total; ++k) {
                table[k] = (bytes[k / 8] >> (k % 8)) & 1 ? Spin{1} : Spin{-1};
            }
            return truth_table(n, std::move(table));
        }
        throw data_error("unknown decision function type '" + type + "'");
    } catch (const json::exception& e) {
        throw data_error(std::string("decision JSON field error: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Properties

namespace {

// applies coordinate permutation: result_j = x_{perm[j]}
SpinVector permute(const SpinVector& x, const std::vector<int>& perm) {
    std::vector<Spin> v(static_cast<std::size_t>(x.size()));
    for (int j = 0; j < x.size(); ++j) v[static_cast<std::size_t>(j)] = x[perm[static_cast<std::size_t>(j)]];
    return SpinVector(std::move(v));
}

bool invariant_under(const DecisionFunction& f, const std::vector<int>& perm) {
    const SubsetMask total = SubsetMask{1} << f.items();
    for (SubsetMask idx = 0; idx < total; ++idx) {
        const SpinVector x = SpinVector::from_config_index(idx, f.items());
        if (f.evaluate(permute(x, perm)) != f.evaluate(x)) return false;
    }
    return true;
}

}  // namespace

PropertyReport check_properties(const DecisionFunction& f) {
    const int n = f.items();
    if (n > kExactEnumerationCap) throw numeric_error("property check requires n <= cap");
    const SubsetMask total = SubsetMask{1} << n;
    const auto table = truth_table_of(f);
    PropertyReport rep;

    // monotone: sufficient to check single-coordinate -1 -> +1 moves
    rep.monotone = true;
    for (SubsetMask idx = 0; idx < total && rep.monotone; ++idx) {
        for (int i = 0; i < n; ++i) {
            if ((idx >> i) & 1) continue;
            const SubsetMask up = idx | (SubsetMask{1} << i);
            if (table[idx] > table[up]) {
                rep.monotone = false;
                rep.monotone_witness = {SpinVector::from_config_index(idx, n),
                                        SpinVector::from_config_index(up, n)};
                break;
            }
        }
    }

    rep.odd = true;
    for (SubsetMask idx = 0; idx < total; ++idx) {
        const SubsetMask neg = ~idx & (total - 1);
        if (table[idx] != -table[neg]) {
            rep.odd = false;
            rep.odd_witness = SpinVector::from_config_index(idx, n);
            break;
        }
    }

    rep.unanimous = table[0] == -1 && table[total - 1] == 1;
    if (!rep.unanimous) {
        rep.unanimous_witness = SpinVector::from_config_index(table[0] != -1 ? 0 : total - 1, n);
    }

    // anonymity: all n! permutations up to n = 8, sampled above
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rep.symmetric = true;
    if (n <= 8) {
        do {
            ++rep.permutations_checked;
            if (!invariant_under(f, perm)) {
                rep.symmetric = false;
                for (SubsetMask idx = 0; idx < total; ++idx) {
                    const SpinVector x = SpinVector::from_config_index(idx, n);
                    if (f.evaluate(permute(x, perm)) != f.evaluate(x)) {
                        rep.symmetry_witness = {perm, x};
                        break;
                    }
                }
                break;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        rep.exhaustive = false;
        std::mt19937_64 rng(12345);
        for (int trial = 0; trial < 10000; ++trial) {
            std::shuffle(perm.begin(), perm.end(), rng);
            ++rep.permutations_checked;
            if (!invariant_under(f, perm)) {
                rep.symmetric = false;
                rep.symmetry_witness = {perm, SpinVector::from_config_index(0, n)};
                break;
            }
        }
    }

    if (rep.symmetric) {
        // (d) implies (e)
        rep.transitive_symmetric = true;
        return rep;
    }

    // transitive symmetry: for each ordered pair (i, j) some invariant
    // permutation must put x_i in place of x_j
    rep.transitive_symmetric = true;
    for (int i = 0; i < n && rep.transitive_symmetric; ++i) {
        for (int j = 0; j < n && rep.transitive_symmetric; ++j) {
            if (i == j) continue;
            bool found = false;
            std::iota(perm.begin(), perm.end(), 0);
            if (n <= 8) {
                do {
                    if (perm[static_cast<std::size_t>(j)] != i) continue;
                    if (invariant_under(f, perm)) {
                        found = true;
                        break;
                    }
                } while (std::next_permutation(perm.begin(), perm.end()));
            } else {
                std::mt19937_64 rng(999 + static_cast<std::uint64_t>(i) * 64 + j);
                for (int trial = 0; trial < 2000 && !found; ++trial) {
                    std::shuffle(perm.begin(), perm.end(), rng);
                    auto it = std::find(perm.begin(), perm.end(), i);
                    std::swap(*it, perm[static_cast<std::size_t>(j)]);
                    if (invariant_under(f, perm)) found = true;
                }
            }
            if (!found) {
                rep.transitive_symmetric = false;
                rep.transitive_witness = {i, j};
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Energy and equivalence classes

double energy_ltf(const IsingModel& model, int i, const SpinVector& x) {
    if (x.size() != model.items()) throw data_error("configuration length mismatch");
    return model.full_field(x, i);
}

EquivalenceClasses equivalence_classes(const IsingModel& model, int i, double tol) {
    EquivalenceClasses out;
    out.boundary = model.graph().neighbors(i);
    const int k = static_cast<int>(out.boundary.size());
    if (k > kExactEnumerationCap) throw numeric_error("boundary too large for class enumeration");
    const double lo = model.domain_low();

    const SubsetMask total = SubsetMask{1} << k;
    std::vector<std::pair<double, SubsetMask>> levels(total);
    for (SubsetMask m = 0; m < total; ++m) {
        double e = model.threshold(i);
        for (int b = 0; b < k; ++b) {
            const double v = (m >> b) & 1 ? 1.0 : lo;
            e += model.theta(i, out.boundary[static_cast<std::size_t>(b)]) * v;
        }
        levels[m] = {e, m};
    }
    std::sort(levels.begin(), levels.end());
    for (const auto& [e, m] : levels) {
        if (out.levels.empty() || e - out.levels.back() > tol) {
            out.levels.push_back(e);
            out.classes.emplace_back();
        }
        out.classes.back().push_back(m);
    }
    return out;
}

}  // namespace boolspec
