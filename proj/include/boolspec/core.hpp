#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace boolspec {

// Item values live on {-1,+1} internally; {0,1} exists only at ingestion/egress.
using Spin = std::int8_t;

// S <= V as a bitmask; bit i set <=> item i in S. Items are 0-based internally,
// reports render 1-based labels.
using SubsetMask = std::uint64_t;

// Full 2^n loops are permitted up to here; larger n must use order-limited or
// sampled paths.
inline constexpr int kExactEnumerationCap = 20;

// Hard limit from the bitmask representation.
inline constexpr int kMaxItems = 64;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline int popcount(SubsetMask m) { return __builtin_popcountll(m); }

/// splitmix64 step; used to derive independent seed streams from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------------------
// SpinVector

class SpinVector {
public:
    SpinVector() = default;
    explicit SpinVector(std::vector<Spin> values);
    SpinVector(std::initializer_list<int> values);
    SpinVector(int n, Spin fill);

    int size() const { return static_cast<int>(values_.size()); }
    Spin operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    void set(int i, Spin s);
    void flip(int i) { values_[static_cast<std::size_t>(i)] = static_cast<Spin>(-values_[static_cast<std::size_t>(i)]); }

    const std::vector<Spin>& values() const { return values_; }

    /// Configuration index with item 0 as the least-significant bit; +1 maps to
    /// bit 1, -1 to bit 0. Requires size() <= kMaxItems.
    SubsetMask config_index() const;
    static SpinVector from_config_index(SubsetMask idx, int n);

    bool operator==(const SpinVector& other) const { return values_ == other.values_; }

private:
    std::vector<Spin> values_;
};

// ---------------------------------------------------------------------------
// Dataset

enum class SourceDomain { PlusMinus, ZeroOne };

class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<Spin> flat, int row_count, int item_count, SourceDomain source);

    int rows() const { return rows_; }
    int items() const { return items_; }
    SourceDomain source_domain() const { return source_; }

    Spin at(int row, int item) const { return flat_[static_cast<std::size_t>(row) * items_ + item]; }
    SpinVector row(int t) const;
    const std::vector<Spin>& flat() const { return flat_; }

    /// Column mean in the +-1 domain.
    double column_mean(int item) const;
    bool column_constant(int item) const;

    /// Values mapped back to the 0/1 labels (b = (x+1)/2).
    std::vector<std::vector<int>> to_binary_rows() const;

private:
    std::vector<Spin> flat_;
    int rows_ = 0;
    int items_ = 0;
    SourceDomain source_ = SourceDomain::PlusMinus;
};

/// Relabels 0/1 rows to -1/+1 (b -> 2b-1). Rejects non-binary entries naming
/// the offending (row, column).
Dataset spins_from_binary(const std::vector<std::vector<int>>& rows);

Dataset dataset_from_rows(const std::vector<SpinVector>& rows);

// ---------------------------------------------------------------------------
// Graph

class Graph {
public:
    Graph() = default;
    /// Unordered edges (i, j), i != j; duplicates and self-loops rejected.
    Graph(int node_count, std::vector<std::pair<int, int>> edges);

    int nodes() const { return node_count_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int i) const { return adjacency_[static_cast<std::size_t>(i)]; }
    int degree(int i) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(i)].size()); }
    bool has_edge(int i, int j) const;
    bool is_regular() const;

    static Graph path(int n);
    static Graph cycle(int n);
    static Graph complete(int n);
    /// Erdos-Renyi G(n, p_edge), deterministic given seed.
    static Graph random(int n, double edge_prob, std::uint64_t seed);

private:
    int node_count_ = 0;
    std::vector<std::pair<int, int>> edges_;           // normalized i < j, sorted
    std::vector<std::vector<int>> adjacency_;
};

/// Per-node neighbor sets, index-aligned with the nodes.
std::vector<std::vector<int>> neighborhoods(const Graph& g);

// ---------------------------------------------------------------------------
// Subset enumeration

/// Every S with |S| <= max_order exactly once, ascending mask order (the empty
/// set first). For max_order >= 3 the item count must be within the exact
/// enumeration cap.
std::vector<SubsetMask> enumerate_subsets(int n, int max_order);

// ---------------------------------------------------------------------------
// CSV ingestion / emission

struct CsvOptions {
    char delimiter = ',';
    // -1 auto-detect, 0 no header, 1 header present
    int header = -1;
    // -1 auto-detect from values, 0 force {0,1}, 1 force {-1,1}
    int domain = -1;
};

/// One observation per line; values in {0,1} or {-1,1}. Parse failures carry
/// 1-based line numbers.
Dataset read_dataset_csv(const std::string& path, const CsvOptions& opts = {});
Dataset parse_dataset_csv(const std::string& text, const CsvOptions& opts = {});

/// Writes in the dataset's source domain, no header row.
std::string dataset_to_csv(const Dataset& data, char delimiter = ',');

/// Atomic write: temp file in the target directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace boolspec
