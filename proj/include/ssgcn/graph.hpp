#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ssgcn {

using NodeId = std::int32_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Dense node-feature matrix, one row per node.
using FeatureMatrix = Matrix;

struct WeightedEdge {
    NodeId u;
    NodeId v;
    double w = 1.0;
};

/// Immutable undirected graph in CSR form.
///
/// Every undirected edge {u, v} is stored twice (u -> v and v -> u) with equal
/// weight. Rows have strictly increasing column indices, self-loops are never
/// stored and all weights are strictly positive.
class Graph {
public:
    Graph() = default;

    /// Builds the symmetrized, deduplicated graph. For repeated pairs the first
    /// occurrence (in either direction) fixes the weight; self-loops are
    /// dropped. Throws DataError on out-of-range ids or non-positive weights.
    static Graph from_edges(NodeId num_nodes, std::span<const WeightedEdge> edges);

    NodeId num_nodes() const noexcept { return num_nodes_; }
    /// Number of undirected edges.
    std::int64_t num_edges() const noexcept { return static_cast<std::int64_t>(columns_.size()) / 2; }
    bool weighted() const noexcept { return weighted_; }

    std::span<const std::int64_t> offsets() const noexcept { return offsets_; }
    std::span<const NodeId> columns() const noexcept { return columns_; }
    std::span<const double> weights() const noexcept { return weights_; }

    std::span<const NodeId> neighbors(NodeId v) const;
    std::span<const double> neighbor_weights(NodeId v) const;
    NodeId degree(NodeId v) const { return static_cast<NodeId>(neighbors(v).size()); }

    /// Sum of incident edge weights w(v); 0 for an isolated node.
    double weighted_degree(NodeId v) const;
    /// Sum over all nodes of w(v) (twice the total edge weight).
    double total_weighted_degree() const noexcept { return total_weighted_degree_; }

    /// Same topology with every weight multiplied by factor (> 0).
    Graph scaled(double factor) const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    NodeId num_nodes_ = 0;
    bool weighted_ = false;
    std::vector<std::int64_t> offsets_{0};
    std::vector<NodeId> columns_;
    std::vector<double> weights_;
    std::vector<double> degree_weight_;
    double total_weighted_degree_ = 0.0;
};

/// Per-node class ids in [0, num_classes).
struct Labels {
    std::vector<int> ids;
    int num_classes = 0;
    /// Original label strings, indexed by class id (may be empty).
    std::vector<std::string> names;

    std::size_t size() const noexcept { return ids.size(); }
    int operator[](NodeId v) const { return ids[static_cast<std::size_t>(v)]; }
};

/// D^-1/2 (A + I) D^-1/2, degrees including the self-loop.
struct NormalizedAdjacency {
    SparseMatrix matrix;

    Eigen::Index rows() const noexcept { return matrix.rows(); }
};

struct LoadStats {
    std::size_t raw_edge_lines = 0;
    std::size_t dropped_edges = 0;   // referencing unknown node ids
    std::size_t self_loops = 0;
};

/// Graph + features + labels as read from a citation dataset.
struct Dataset {
    std::string name;
    Graph graph;
    FeatureMatrix features;
    Labels labels;
    /// Original node ids, indexed by dense id.
    std::vector<std::string> raw_ids;
    LoadStats stats;
};

struct LoadOptions {
    bool row_normalize_features = true;
};

/// Reads a Cora-style dataset: content rows `id <TAB> f binary features <TAB>
/// label`, cites rows `cited <TAB> citing`. Node ids are remapped to [0, n) in
/// file order, labels to class ids in first-appearance order. Citations to
/// unknown ids are dropped and counted in Dataset::stats.
Dataset load_citation_dataset(const std::filesystem::path& content_path,
                              const std::filesystem::path& cites_path,
                              const LoadOptions& options = {});

/// Writes a dataset back out in the same two-file layout (features as 0/1
/// when they are binary, otherwise as reals).
void write_citation_dataset(const Dataset& data, const std::filesystem::path& content_path,
                            const std::filesystem::path& cites_path);

/// Scales each non-zero feature row to unit L1 norm.
void row_normalize(FeatureMatrix& features);

/// Generic edge list: `u v [w]` per line, whitespace separated, `#` comments.
/// A `# nodes N` comment fixes the node count (isolated trailing nodes);
/// otherwise n = max id + 1.
Graph read_edge_list(std::istream& in, const std::string& source = "<stream>");
Graph read_edge_list(const std::filesystem::path& path);
/// Writes `# nodes N` followed by one `u v w` line per undirected edge (u < v),
/// weights in shortest round-trip form.
void write_edge_list(const Graph& g, std::ostream& out);

NormalizedAdjacency symmetric_normalize(const Graph& g);

/// Throws std::out_of_range for an invalid id.
double weighted_degree(const Graph& g, NodeId v);

/// Component id per node; ids are assigned in order of each component's
/// smallest member.
std::vector<int> connected_components(const Graph& g);
int count_components(std::span<const int> component_ids);

struct DatasetSummary {
    NodeId n = 0;
    std::int64_t m = 0;
    int k = 0;
    Eigen::Index f = 0;
    int components = 0;
};

DatasetSummary summarize(const Dataset& data);
void write_summary_csv(const DatasetSummary& summary, std::ostream& out);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

} // namespace ssgcn
