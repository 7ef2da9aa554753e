#include "ssgcn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/core.h>

#include "ssgcn/errors.hpp"

namespace ssgcn {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_number(std::string_view token, double& out) {
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

bool parse_integer(std::string_view token, std::int64_t& out) {
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Graph

Graph Graph::from_edges(NodeId num_nodes, std::span<const WeightedEdge> edges) {
    if (num_nodes < 0) throw DataError("negative node count");

    struct Keyed {
        NodeId a, b;
        double w;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes)
            throw DataError(fmt::format("edge ({}, {}) outside [0, {})", e.u, e.v, num_nodes));
        if (!(e.w > 0.0) || !std::isfinite(e.w))
            throw DataError(fmt::format("edge ({}, {}) has non-positive weight {}", e.u, e.v, e.w));
        if (e.u == e.v) continue;
        keyed.push_back({std::min(e.u, e.v), std::max(e.u, e.v), e.w});
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const Keyed& x, const Keyed& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    keyed.erase(std::unique(keyed.begin(), keyed.end(),
                            [](const Keyed& x, const Keyed& y) { return x.a == y.a && x.b == y.b; }),
                keyed.end());

    Graph g;
    g.num_nodes_ = num_nodes;
    g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (const auto& e : keyed) {
        ++g.offsets_[static_cast<std::size_t>(e.a) + 1];
        ++g.offsets_[static_cast<std::size_t>(e.b) + 1];
        if (e.w != 1.0) g.weighted_ = true;
    }
    for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];

    g.columns_.resize(keyed.size() * 2);
    g.weights_.resize(keyed.size() * 2);
    std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // keyed is sorted by (a, b): emitting a->b in order keeps row a sorted, but
    // b->a entries interleave, so each row is sorted afterwards.
    for (const auto& e : keyed) {
        auto pa = cursor[static_cast<std::size_t>(e.a)]++;
        g.columns_[static_cast<std::size_t>(pa)] = e.b;
        g.weights_[static_cast<std::size_t>(pa)] = e.w;
        auto pb = cursor[static_cast<std::size_t>(e.b)]++;
        g.columns_[static_cast<std::size_t>(pb)] = e.a;
        g.weights_[static_cast<std::size_t>(pb)] = e.w;
    }
    std::vector<std::pair<NodeId, double>> row;
    for (NodeId v = 0; v < num_nodes; ++v) {
        const auto begin = g.offsets_[static_cast<std::size_t>(v)];
        const auto end = g.offsets_[static_cast<std::size_t>(v) + 1];
        row.clear();
        for (auto p = begin; p < end; ++p)
            row.emplace_back(g.columns_[static_cast<std::size_t>(p)], g.weights_[static_cast<std::size_t>(p)]);
        std::sort(row.begin(), row.end());
        for (auto p = begin; p < end; ++p) {
            g.columns_[static_cast<std::size_t>(p)] = row[static_cast<std::size_t>(p - begin)].first;
            g.weights_[static_cast<std::size_t>(p)] = row[static_cast<std::size_t>(p - begin)].second;
        }
    }

    g.degree_weight_.assign(static_cast<std::size_t>(num_nodes), 0.0);
    for (NodeId v = 0; v < num_nodes; ++v) {
        double s = 0.0;
        for (double w : g.neighbor_weights(v)) s += w;
        g.degree_weight_[static_cast<std::size_t>(v)] = s;
        g.total_weighted_degree_ += s;
    }
    return g;
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
    const auto i = static_cast<std::size_t>(v);
    return std::span<const NodeId>(columns_).subspan(static_cast<std::size_t>(offsets_[i]),
                                                     static_cast<std::size_t>(offsets_[i + 1] - offsets_[i]));
}

std::span<const double> Graph::neighbor_weights(NodeId v) const {
    const auto i = static_cast<std::size_t>(v);
    return std::span<const double>(weights_).subspan(static_cast<std::size_t>(offsets_[i]),
                                                     static_cast<std::size_t>(offsets_[i + 1] - offsets_[i]));
}

double Graph::weighted_degree(NodeId v) const { return degree_weight_[static_cast<std::size_t>(v)]; }

Graph Graph::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    Graph g = *this;
    for (double& w : g.weights_) w *= factor;
    g.total_weighted_degree_ = 0.0;
    for (NodeId v = 0; v < num_nodes_; ++v) {
        double s = 0.0;
        for (double w : g.neighbor_weights(v)) s += w;
        g.degree_weight_[static_cast<std::size_t>(v)] = s;
        g.total_weighted_degree_ += s;
    }
    g.weighted_ = true;
    return g;
}

double weighted_degree(const Graph& g, NodeId v) {
    if (v < 0 || v >= g.num_nodes())
        throw std::out_of_range(fmt::format("node {} outside [0, {})", v, g.num_nodes()));
    return g.weighted_degree(v);
}

// ---------------------------------------------------------------------------
// Citation datasets

Dataset load_citation_dataset(const std::filesystem::path& content_path,
                              const std::filesystem::path& cites_path, const LoadOptions& options) {
    Dataset data;
    data.name = content_path.stem().string();

    std::unordered_map<std::string, NodeId> id_of;
    std::unordered_map<std::string, int> class_of;
    std::vector<std::vector<double>> rows;
    std::vector<int> label_ids;
    std::ptrdiff_t width = -1;

    {
        auto in = open_input(content_path);
        const std::string file = content_path.string();
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto tokens = split_ws(line);
            if (tokens.empty()) continue;
            if (tokens.size() < 2) throw ParseError(file, line_no, "expected `id features... label`");
            const auto f = static_cast<std::ptrdiff_t>(tokens.size()) - 2;
            if (width < 0) width = f;
            if (f != width)
                throw ParseError(file, line_no, fmt::format("feature width {} differs from {}", f, width));
            std::vector<double> row(static_cast<std::size_t>(f));
            for (std::ptrdiff_t j = 0; j < f; ++j) {
                if (!parse_number(tokens[static_cast<std::size_t>(j) + 1], row[static_cast<std::size_t>(j)]) ||
                    !std::isfinite(row[static_cast<std::size_t>(j)]))
                    throw ParseError(file, line_no, fmt::format("bad feature value `{}`",
                                                                tokens[static_cast<std::size_t>(j) + 1]));
            }
            std::string raw(tokens.front());
            if (id_of.contains(raw)) throw ParseError(file, line_no, "duplicate node id " + raw);
            id_of.emplace(raw, static_cast<NodeId>(rows.size()));
            data.raw_ids.push_back(std::move(raw));

            std::string label(tokens.back());
            auto [it, inserted] = class_of.try_emplace(label, static_cast<int>(class_of.size()));
            if (inserted) data.labels.names.push_back(label);
            label_ids.push_back(it->second);
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) throw DataError(content_path.string() + ": no node rows");

    const auto n = static_cast<NodeId>(rows.size());
    data.features.resize(n, width);
    for (NodeId i = 0; i < n; ++i)
        for (std::ptrdiff_t j = 0; j < width; ++j)
            data.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (options.row_normalize_features) row_normalize(data.features);

    data.labels.ids = std::move(label_ids);
    data.labels.num_classes = static_cast<int>(class_of.size());

    std::vector<WeightedEdge> edges;
    {
        auto in = open_input(cites_path);
        const std::string file = cites_path.string();
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto tokens = split_ws(line);
            if (tokens.empty()) continue;
            if (tokens.size() != 2) throw ParseError(file, line_no, "expected `cited citing`");
            ++data.stats.raw_edge_lines;
            auto a = id_of.find(std::string(tokens[0]));
            auto b = id_of.find(std::string(tokens[1]));
            if (a == id_of.end() || b == id_of.end()) {
                ++data.stats.dropped_edges;
                continue;
            }
            if (a->second == b->second) ++data.stats.self_loops;
            edges.push_back({a->second, b->second, 1.0});
        }
    }
    if (data.stats.dropped_edges > 0)
        fmt::print(stderr, "warning: {}: dropped {} citation(s) to unknown node ids\n", cites_path.string(),
                   data.stats.dropped_edges);

    data.graph = Graph::from_edges(n, edges);
    return data;
}

void write_citation_dataset(const Dataset& data, const std::filesystem::path& content_path,
                            const std::filesystem::path& cites_path) {
    std::ofstream content(content_path);
    if (!content) throw DataError("cannot write " + content_path.string());
    const auto& x = data.features;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        content << data.raw_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double value = x(i, j);
            content << '\t';
            if (value == 0.0)
                content << '0';
            else if (value == 1.0)
                content << '1';
            else
                content << format_double(value);
        }
        const int cls = data.labels.ids[static_cast<std::size_t>(i)];
        content << '\t' << data.labels.names[static_cast<std::size_t>(cls)] << '\n';
    }

    std::ofstream cites(cites_path);
    if (!cites) throw DataError("cannot write " + cites_path.string());
    const auto& g = data.graph;
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v)
                cites << data.raw_ids[static_cast<std::size_t>(u)] << '\t'
                      << data.raw_ids[static_cast<std::size_t>(v)] << '\n';
}

void row_normalize(FeatureMatrix& features) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const double s = features.row(i).cwiseAbs().sum();
        if (s > 0.0) features.row(i) /= s;
    }
}

// ---------------------------------------------------------------------------
// Edge lists

Graph read_edge_list(std::istream& in, const std::string& source) {
    std::vector<WeightedEdge> edges;
    std::int64_t declared_nodes = -1;
    std::int64_t max_id = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            const auto comment = split_ws(view.substr(hash + 1));
            if (comment.size() == 2 && comment[0] == "nodes") {
                if (!parse_integer(comment[1], declared_nodes) || declared_nodes < 0)
                    throw ParseError(source, line_no, "bad node count");
            }
            view = view.substr(0, hash);
        }
        const auto tokens = split_ws(view);
        if (tokens.empty()) continue;
        if (tokens.size() != 2 && tokens.size() != 3) throw ParseError(source, line_no, "expected `u v [w]`");
        std::int64_t u = 0, v = 0;
        double w = 1.0;
        if (!parse_integer(tokens[0], u) || !parse_integer(tokens[1], v) || u < 0 || v < 0)
            throw ParseError(source, line_no, "bad node id");
        if (tokens.size() == 3 && (!parse_number(tokens[2], w) || !(w > 0.0) || !std::isfinite(w)))
            throw ParseError(source, line_no, "bad edge weight");
        max_id = std::max({max_id, u, v});
        edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), w});
    }
    const auto n = std::max(declared_nodes, max_id + 1);
    return Graph::from_edges(static_cast<NodeId>(n), edges);
}

Graph read_edge_list(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_edge_list(in, path.string());
}

void write_edge_list(const Graph& g, std::ostream& out) {
    out << "# nodes " << g.num_nodes() << '\n';
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        const auto nbrs = g.neighbors(u);
        const auto ws = g.neighbor_weights(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i)
            if (u < nbrs[i]) out << u << ' ' << nbrs[i] << ' ' << format_double(ws[i]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Normalization and structure

NormalizedAdjacency symmetric_normalize(const Graph& g) {
    const NodeId n = g.num_nodes();
    std::vector<double> dhat(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) dhat[static_cast<std::size_t>(v)] = 1.0 + g.weighted_degree(v);

    NormalizedAdjacency out;
    out.matrix.resize(n, n);
    Eigen::VectorXi row_sizes(n);
    for (NodeId v = 0; v < n; ++v) row_sizes(v) = g.degree(v) + 1;
    out.matrix.reserve(row_sizes);
    for (NodeId i = 0; i < n; ++i) {
        const auto di = dhat[static_cast<std::size_t>(i)];
        const auto nbrs = g.neighbors(i);
        const auto ws = g.neighbor_weights(i);
        bool diagonal_done = false;
        for (std::size_t p = 0; p < nbrs.size(); ++p) {
            const NodeId j = nbrs[p];
            if (!diagonal_done && j > i) {
                out.matrix.insert(i, i) = 1.0 / di;
                diagonal_done = true;
            }
            out.matrix.insert(i, j) = ws[p] / std::sqrt(di * dhat[static_cast<std::size_t>(j)]);
        }
        if (!diagonal_done) out.matrix.insert(i, i) = 1.0 / di;
    }
    out.matrix.makeCompressed();
    return out;
}

std::vector<int> connected_components(const Graph& g) {
    const NodeId n = g.num_nodes();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<NodeId> queue;
    int next_id = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        comp[static_cast<std::size_t>(s)] = next_id;
        queue.assign(1, s);
        for (std::size_t head = 0; head < queue.size(); ++head)
            for (NodeId v : g.neighbors(queue[head]))
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = next_id;
                    queue.push_back(v);
                }
        ++next_id;
    }
    return comp;
}

int count_components(std::span<const int> component_ids) {
    int hi = -1;
    for (int c : component_ids) hi = std::max(hi, c);
    return hi + 1;
}

DatasetSummary summarize(const Dataset& data) {
    DatasetSummary s;
    s.n = data.graph.num_nodes();
    s.m = data.graph.num_edges();
    s.k = data.labels.num_classes;
    s.f = data.features.cols();
    s.components = count_components(connected_components(data.graph));
    return s;
}

void write_summary_csv(const DatasetSummary& s, std::ostream& out) {
    out << "n,m,k,f,components\n" << s.n << ',' << s.m << ',' << s.k << ',' << s.f << ',' << s.components << '\n';
}

} // namespace ssgcn
