#include "ssgcn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "ssgcn/rng.hpp"

namespace ssgcn {

NodeId SyntheticSpec::num_nodes() const {
    return std::accumulate(class_sizes.begin(), class_sizes.end(), NodeId{0});
}

void SyntheticSpec::validate() const {
    if (class_sizes.size() < 2 || class_names.size() != class_sizes.size())
        throw std::invalid_argument("need at least two named classes");
    for (auto s : class_sizes)
        if (s < 1) throw std::invalid_argument("class sizes must be positive");
    const auto n = num_nodes();
    if (giant_component < 2 || giant_component > n) throw std::invalid_argument("giant component size out of range");
    if (edges < n - 1) throw std::invalid_argument("too few edges to avoid isolated nodes");
    if (vocabulary < 1 || words_per_doc < 1.0) throw std::invalid_argument("empty vocabulary or documents");
    if (homophily < 0.0 || homophily > 1.0 || topic_strength < 0.0 || topic_strength > 1.0)
        throw std::invalid_argument("homophily and topic strength must lie in [0, 1]");
    if (!(degree_tail > 1.0)) throw std::invalid_argument("degree tail index must exceed 1");
}

namespace {

// Cumulative-weight table for repeated categorical draws.
class Sampler {
public:
    Sampler() = default;
    explicit Sampler(std::vector<double> weights) : cumulative_(std::move(weights)) {
        std::partial_sum(cumulative_.begin(), cumulative_.end(), cumulative_.begin());
    }
    bool empty() const { return cumulative_.empty(); }
    std::size_t draw(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                 static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
    }

private:
    std::vector<double> cumulative_;
};

struct EdgeSet {
    std::set<std::pair<NodeId, NodeId>> seen;
    std::vector<WeightedEdge> list;

    bool add(NodeId u, NodeId v) {
        if (u == v) return false;
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second) return false;
        list.push_back({u, v, 1.0});
        return true;
    }
};

} // namespace

Dataset generate_synthetic_citation(const SyntheticSpec& spec) {
    spec.validate();
    const NodeId n = spec.num_nodes();
    const int k = static_cast<int>(spec.class_sizes.size());
    Rng rng(spec.seed, Stream::synthetic);

    Dataset data;
    data.name = "synthetic-cora";
    data.labels.num_classes = k;
    data.labels.names = spec.class_names;
    for (int c = 0; c < k; ++c) data.labels.ids.insert(data.labels.ids.end(), spec.class_sizes[c], c);
    rng.shuffle(data.labels.ids.begin(), data.labels.ids.end());

    // Sparse, unordered raw ids like the public distribution.
    std::unordered_set<std::int64_t> used;
    while (data.raw_ids.size() < static_cast<std::size_t>(n)) {
        const auto id = 31 + static_cast<std::int64_t>(rng.uniform_index(1'200'000));
        if (used.insert(id).second) data.raw_ids.push_back(std::to_string(id));
    }

    std::vector<double> propensity(static_cast<std::size_t>(n));
    for (auto& p : propensity) p = std::pow(1.0 - rng.uniform(), -1.0 / (spec.degree_tail - 1.0));

    std::vector<NodeId> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    const auto giant = std::span<const NodeId>(order).first(static_cast<std::size_t>(spec.giant_component));

    const auto label = [&](NodeId v) { return data.labels.ids[static_cast<std::size_t>(v)]; };
    const auto weighted_pick = [&](std::span<const NodeId> pool, auto&& accept) -> std::optional<NodeId> {
        std::vector<double> w;
        w.reserve(pool.size());
        for (NodeId v : pool) w.push_back(accept(v) ? propensity[static_cast<std::size_t>(v)] : 0.0);
        if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) return std::nullopt;
        return pool[rng.categorical(w)];
    };

    EdgeSet edges;
    // Giant component: each node attaches to an earlier one, homophilously and
    // preferentially by propensity.
    for (std::size_t i = 1; i < giant.size(); ++i) {
        const NodeId v = giant[i];
        const bool same = rng.uniform() < spec.homophily;
        auto earlier = giant.first(i);
        auto target = weighted_pick(earlier, [&](NodeId u) { return (label(u) == label(v)) == same; });
        if (!target) target = weighted_pick(earlier, [](NodeId) { return true; });
        edges.add(v, *target);
    }
    // Remaining nodes form small trees of 2..8 nodes.
    const auto rest = std::span<const NodeId>(order).subspan(giant.size());
    if (rest.size() == 1) edges.add(rest[0], giant[0]);
    for (std::size_t start = 0; rest.size() > 1 && start < rest.size();) {
        const std::size_t remaining = rest.size() - start;
        std::size_t size = 2 + rng.uniform_index(7);
        if (size + 2 > remaining) size = remaining;
        for (std::size_t i = 1; i < size; ++i) edges.add(rest[start + i], rest[start + rng.uniform_index(i)]);
        start += size;
    }

    // Extra edges inside the giant component from a degree-corrected block model.
    std::vector<std::vector<NodeId>> giant_by_class(static_cast<std::size_t>(k));
    for (NodeId v : giant) giant_by_class[static_cast<std::size_t>(label(v))].push_back(v);
    std::vector<Sampler> within(static_cast<std::size_t>(k));
    std::vector<double> all_w;
    for (int c = 0; c < k; ++c) {
        std::vector<double> w;
        for (NodeId v : giant_by_class[static_cast<std::size_t>(c)]) w.push_back(propensity[static_cast<std::size_t>(v)]);
        if (!w.empty()) within[static_cast<std::size_t>(c)] = Sampler(w);
    }
    for (NodeId v : giant) all_w.push_back(propensity[static_cast<std::size_t>(v)]);
    const Sampler any(all_w);

    std::int64_t attempts = 0;
    while (static_cast<std::int64_t>(edges.list.size()) < spec.edges) {
        if (++attempts > 100 * spec.edges) throw std::invalid_argument("edge target unreachable");
        const NodeId u = giant[any.draw(rng)];
        NodeId v = u;
        if (rng.uniform() < spec.homophily) {
            const auto& pool = giant_by_class[static_cast<std::size_t>(label(u))];
            v = pool[within[static_cast<std::size_t>(label(u))].draw(rng)];
        } else {
            v = giant[any.draw(rng)];
            if (label(v) == label(u)) continue;
        }
        edges.add(u, v);
    }
    data.graph = Graph::from_edges(n, edges.list);

    // Bag-of-words: Zipf background plus one topic per class over a random
    // tenth of the vocabulary (topics overlap).
    const Eigen::Index f = spec.vocabulary;
    std::vector<double> background(static_cast<std::size_t>(f));
    std::vector<Eigen::Index> rank(static_cast<std::size_t>(f));
    std::iota(rank.begin(), rank.end(), Eigen::Index{0});
    rng.shuffle(rank.begin(), rank.end());
    for (Eigen::Index j = 0; j < f; ++j)
        background[static_cast<std::size_t>(j)] = 1.0 / std::pow(static_cast<double>(rank[static_cast<std::size_t>(j)]) + 10.0, 0.8);
    const Sampler background_words(background);

    std::vector<Sampler> topics;
    const auto topic_size = std::max<Eigen::Index>(1, f / 10);
    for (int c = 0; c < k; ++c) {
        std::vector<double> w(static_cast<std::size_t>(f), 0.0);
        for (Eigen::Index t = 0; t < topic_size; ++t)
            w[rng.uniform_index(static_cast<std::uint64_t>(f))] += 1.0 / (1.0 + static_cast<double>(t) / 20.0);
        topics.emplace_back(std::move(w));
    }

    data.features = FeatureMatrix::Zero(n, f);
    const auto max_words = std::min<Eigen::Index>(f, 64);
    for (NodeId v = 0; v < n; ++v) {
        // Geometric-ish length around the target mean, at least one word.
        const double len = spec.words_per_doc * (0.5 + rng.uniform());
        const auto words = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(len)), 1, max_words);
        const auto& topic = topics[static_cast<std::size_t>(label(v))];
        Eigen::Index placed = 0;
        while (placed < words) {
            const auto j = static_cast<Eigen::Index>(rng.uniform() < spec.topic_strength ? topic.draw(rng)
                                                                                           : background_words.draw(rng));
            if (data.features(v, j) == 0.0) {
                data.features(v, j) = 1.0;
                ++placed;
            }
        }
    }
    return data;
}

} // namespace ssgcn
