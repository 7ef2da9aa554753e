#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ssgcn/graph.hpp"
#include "ssgcn/rng.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("ssgcn-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

private:
    std::filesystem::path path_;
};

inline ssgcn::Graph graph_from_pairs(ssgcn::NodeId n, std::initializer_list<std::pair<int, int>> pairs) {
    std::vector<ssgcn::WeightedEdge> edges;
    for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
    return ssgcn::Graph::from_edges(n, edges);
}

inline ssgcn::Graph cycle(ssgcn::NodeId n) {
    std::vector<ssgcn::WeightedEdge> edges;
    for (ssgcn::NodeId v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n, 1.0});
    return ssgcn::Graph::from_edges(n, edges);
}

// Erdos-Renyi style graph with optional random weights in [0.5, 2).
inline ssgcn::Graph random_graph(ssgcn::NodeId n, double p, std::uint64_t seed, bool weighted = false) {
    ssgcn::Rng rng(seed, 99);
    std::vector<ssgcn::WeightedEdge> edges;
    for (ssgcn::NodeId u = 0; u < n; ++u)
        for (ssgcn::NodeId v = u + 1; v < n; ++v)
            if (rng.uniform() < p) edges.push_back({u, v, weighted ? 0.5 + 1.5 * rng.uniform() : 1.0});
    return ssgcn::Graph::from_edges(n, edges);
}

// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
inline ssgcn::Graph two_triangles() {
    return graph_from_pairs(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
}

}  // namespace testutil

#include <boost/math/distributions/chi_squared.hpp>

namespace testutil {

// Pearson goodness-of-fit p-value for counts against category probabilities.
// Categories with zero expected probability must have zero counts.
inline double chi_squared_p(const std::vector<double>& counts, const std::vector<double>& probs) {
    double total = 0.0;
    for (double c : counts) total += c;
    double stat = 0.0;
    int categories = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] == 0.0) {
            if (counts[i] != 0.0) return 0.0;
            continue;
        }
        const double e = total * probs[i];
        stat += (counts[i] - e) * (counts[i] - e) / e;
        ++categories;
    }
    if (categories < 2) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(categories - 1), stat));
}

}  // namespace testutil
