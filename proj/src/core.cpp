#include "boolspec/core.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace boolspec {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// SpinVector

SpinVector::SpinVector(std::vector<Spin> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] != -1 && values_[i] != 1) {
            throw data_error("SpinVector entry at index " + std::to_string(i) +
                             " is " + std::to_string(static_cast<int>(values_[i])) +
                             ", expected -1 or +1");
        }
    }
}

SpinVector::SpinVector(std::initializer_list<int> values) {
    values_.reserve(values.size());
    for (int v : values) {
        if (v != -1 && v != 1) throw data_error("SpinVector entry must be -1 or +1");
        values_.push_back(static_cast<Spin>(v));
    }
}

SpinVector::SpinVector(int n, Spin fill) : values_(static_cast<std::size_t>(n), fill) {
    if (fill != -1 && fill != 1) throw data_error("SpinVector fill must be -1 or +1");
}

void SpinVector::set(int i, Spin s) {
    if (s != -1 && s != 1) throw data_error("SpinVector entry must be -1 or +1");
    values_[static_cast<std::size_t>(i)] = s;
}

SubsetMask SpinVector::config_index() const {
    SubsetMask idx = 0;
    for (int i = 0; i < size(); ++i) {
        if (values_[static_cast<std::size_t>(i)] == 1) idx |= SubsetMask{1} << i;
    }
    return idx;
}

SpinVector SpinVector::from_config_index(SubsetMask idx, int n) {
    std::vector<Spin> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = (idx >> i) & 1 ? Spin{1} : Spin{-1};
    }
    return SpinVector(std::move(v));
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<Spin> flat, int row_count, int item_count, SourceDomain source)
    : flat_(std::move(flat)), rows_(row_count), items_(item_count), source_(source) {
    if (rows_ < 1) throw data_error("Dataset requires at least one row");
    if (items_ < 1 || items_ > kMaxItems) {
        throw data_error("Dataset item count must be in [1, " + std::to_string(kMaxItems) + "]");
    }
    if (flat_.size() != static_cast<std::size_t>(rows_) * items_) {
        throw data_error("Dataset shape mismatch");
    }
    for (Spin s : flat_) {
        if (s != -1 && s != 1) throw data_error("Dataset entries must be -1 or +1 internally");
    }
}

SpinVector Dataset::row(int t) const {
    std::vector<Spin> v(flat_.begin() + static_cast<std::ptrdiff_t>(t) * items_,
                        flat_.begin() + static_cast<std::ptrdiff_t>(t + 1) * items_);
    return SpinVector(std::move(v));
}

double Dataset::column_mean(int item) const {
    long long sum = 0;
    for (int t = 0; t < rows_; ++t) sum += at(t, item);
    return static_cast<double>(sum) / rows_;
}

bool Dataset::column_constant(int item) const {
    Spin first = at(0, item);
    for (int t = 1; t < rows_; ++t) {
        if (at(t, item) != first) return false;
    }
    return true;
}

std::vector<std::vector<int>> Dataset::to_binary_rows() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(rows_));
    for (int t = 0; t < rows_; ++t) {
        out[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(items_));
        for (int i = 0; i < items_; ++i) {
            out[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = (at(t, i) + 1) / 2;
        }
    }
    return out;
}

Dataset spins_from_binary(const std::vector<std::vector<int>>& rows) {
    if (rows.empty()) throw data_error("empty input");
    const std::size_t n = rows.front().size();
    std::vector<Spin> flat;
    flat.reserve(rows.size() * n);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != n) {
            throw data_error("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                             " entries, expected " + std::to_string(n));
        }
        for (std::size_t c = 0; c < n; ++c) {
            const int b = rows[r][c];
            if (b != 0 && b != 1) {
                throw data_error("non-binary entry at (" + std::to_string(r) + "," +
                                 std::to_string(c) + ")");
            }
            flat.push_back(static_cast<Spin>(2 * b - 1));
        }
    }
    return Dataset(std::move(flat), static_cast<int>(rows.size()), static_cast<int>(n),
                   SourceDomain::ZeroOne);
}

Dataset dataset_from_rows(const std::vector<SpinVector>& rows) {
    if (rows.empty()) throw data_error("empty input");
    const int n = rows.front().size();
    std::vector<Spin> flat;
    flat.reserve(rows.size() * static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != n) throw data_error("row " + std::to_string(r) + " length mismatch");
        flat.insert(flat.end(), rows[r].values().begin(), rows[r].values().end());
    }
    return Dataset(std::move(flat), static_cast<int>(rows.size()), n, SourceDomain::PlusMinus);
}

// ---------------------------------------------------------------------------
// Graph

Graph::Graph(int node_count, std::vector<std::pair<int, int>> edges) : node_count_(node_count) {
    if (node_count_ < 1) throw config_error("graph needs at least one node");
    edges_.reserve(edges.size());
    for (auto [i, j] : edges) {
        if (i == j) throw config_error("self-loop on node " + std::to_string(i));
        if (i < 0 || j < 0 || i >= node_count_ || j >= node_count_) {
            throw config_error("edge (" + std::to_string(i) + "," + std::to_string(j) +
                               ") out of range");
        }
        if (i > j) std::swap(i, j);
        edges_.emplace_back(i, j);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
        throw config_error("duplicate edge");
    }
    adjacency_.assign(static_cast<std::size_t>(node_count_), {});
    for (auto [i, j] : edges_) {
        adjacency_[static_cast<std::size_t>(i)].push_back(j);
        adjacency_[static_cast<std::size_t>(j)].push_back(i);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(i, j));
}

bool Graph::is_regular() const {
    for (int i = 1; i < node_count_; ++i) {
        if (degree(i) != degree(0)) return false;
    }
    return true;
}

Graph Graph::path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Graph(n, std::move(e));
}

Graph Graph::cycle(int n) {
    if (n < 3) throw config_error("cycle needs n >= 3");
    auto g = path(n);
    std::vector<std::pair<int, int>> e = g.edges();
    e.emplace_back(0, n - 1);
    return Graph(n, std::move(e));
}

Graph Graph::complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Graph(n, std::move(e));
}

Graph Graph::random(int n, double edge_prob, std::uint64_t seed) {
    if (edge_prob < 0.0 || edge_prob > 1.0) throw config_error("edge probability outside [0,1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (unif(rng) < edge_prob) e.emplace_back(i, j);
        }
    }
    return Graph(n, std::move(e));
}

std::vector<std::vector<int>> neighborhoods(const Graph& g) {
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(g.nodes()));
    for (int i = 0; i < g.nodes(); ++i) out.push_back(g.neighbors(i));
    return out;
}

// ---------------------------------------------------------------------------
// Subsets

std::vector<SubsetMask> enumerate_subsets(int n, int max_order) {
    if (n < 0 || n > kMaxItems) throw config_error("item count outside [0, 64]");
    if (max_order < 0 || max_order > n) throw config_error("max_order outside [0, n]");
    std::vector<SubsetMask> out;
    if (max_order <= 2) {
        out.push_back(0);
        // ascending mask order: singletons and pairs interleave
        std::vector<SubsetMask> rest;
        if (max_order >= 1) {
            for (int i = 0; i < n; ++i) rest.push_back(SubsetMask{1} << i);
        }
        if (max_order >= 2) {
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    rest.push_back((SubsetMask{1} << i) | (SubsetMask{1} << j));
        }
        std::sort(rest.begin(), rest.end());
        out.insert(out.end(), rest.begin(), rest.end());
        return out;
    }
    if (n > kExactEnumerationCap) {
        throw config_error("item count " + std::to_string(n) + " exceeds the exact enumeration cap " +
                           std::to_string(kExactEnumerationCap) + " for order > 2");
    }
    const SubsetMask total = SubsetMask{1} << n;
    for (SubsetMask m = 0; m < total; ++m) {
        if (popcount(m) <= max_order) out.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == delim) {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

bool parse_int_token(const std::string& raw, int& value) {
    std::size_t a = raw.find_first_not_of(" \t");
    if (a == std::string::npos) return false;
    std::size_t b = raw.find_last_not_of(" \t");
    const std::string tok = raw.substr(a, b - a + 1);
    try {
        std::size_t used = 0;
        value = std::stoi(tok, &used);
        return used == tok.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, const CsvOptions& opts) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<int>> raw_rows;
    int line_no = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line, opts.delimiter);
        std::vector<int> row(fields.size());
        bool numeric = true;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!parse_int_token(fields[c], row[c])) {
                numeric = false;
                if (raw_rows.empty() && !header_skipped && opts.header != 0) {
                    break;  // treat as header
                }
                throw data_error("line " + std::to_string(line_no) + ": cannot parse value '" +
                                 fields[c] + "' in column " + std::to_string(c + 1));
            }
        }
        if (!numeric) {
            header_skipped = true;
            continue;
        }
        if (opts.header == 1 && !header_skipped && raw_rows.empty()) {
            header_skipped = true;
            continue;
        }
        if (!raw_rows.empty() && row.size() != raw_rows.front().size()) {
            throw data_error("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(raw_rows.front().size()) + " values, got " +
                             std::to_string(row.size()));
        }
        raw_rows.push_back(std::move(row));
    }
    if (raw_rows.empty()) throw data_error("no data rows found");

    int domain = opts.domain;
    if (domain == -1) {
        domain = 0;
        for (const auto& row : raw_rows) {
            for (int v : row) {
                if (v == -1) domain = 1;
            }
        }
    }
    if (domain == 0) return spins_from_binary(raw_rows);

    std::vector<Spin> flat;
    flat.reserve(raw_rows.size() * raw_rows.front().size());
    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
        for (std::size_t c = 0; c < raw_rows[r].size(); ++c) {
            const int v = raw_rows[r][c];
            if (v != -1 && v != 1) {
                throw data_error("entry at (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") is " + std::to_string(v) + ", expected -1 or 1");
            }
            flat.push_back(static_cast<Spin>(v));
        }
    }
    return Dataset(std::move(flat), static_cast<int>(raw_rows.size()),
                   static_cast<int>(raw_rows.front().size()), SourceDomain::PlusMinus);
}

Dataset read_dataset_csv(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset_csv(ss.str(), opts);
}

std::string dataset_to_csv(const Dataset& data, char delimiter) {
    std::string out;
    const bool zero_one = data.source_domain() == SourceDomain::ZeroOne;
    for (int t = 0; t < data.rows(); ++t) {
        for (int i = 0; i < data.items(); ++i) {
            if (i) out += delimiter;
            const int v = zero_one ? (data.at(t, i) + 1) / 2 : data.at(t, i);
            out += std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot write '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, target);
}

}  // namespace boolspec
