#include "ssgcn/sampling.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "ssgcn/errors.hpp"

namespace ssgcn {

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::uniform: return "uniform";
    case Strategy::single_walk: return "single-walk";
    case Strategy::frontier: return "frontier";
    case Strategy::bfs: return "bfs";
    case Strategy::dfs: return "dfs";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "uniform") return Strategy::uniform;
    if (name == "single-walk" || name == "rw" || name == "random-walk") return Strategy::single_walk;
    if (name == "frontier") return Strategy::frontier;
    if (name == "bfs") return Strategy::bfs;
    if (name == "dfs") return Strategy::dfs;
    throw std::invalid_argument(fmt::format("unknown strategy `{}`", name));
}

namespace {

bool labelable(LabelMask mask, NodeId v) { return mask.empty() || mask[static_cast<std::size_t>(v)] != 0; }

std::int64_t pool_size(const Graph& g, LabelMask mask) {
    if (mask.empty()) return g.num_nodes();
    if (mask.size() != static_cast<std::size_t>(g.num_nodes()))
        throw std::invalid_argument("label mask size differs from node count");
    return std::count_if(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; });
}

void check_root(const Graph& g, NodeId root) {
    if (root < 0 || root >= g.num_nodes())
        throw std::invalid_argument(fmt::format("root {} outside [0, {})", root, g.num_nodes()));
}

void check_budget(std::int64_t budget, std::int64_t limit) {
    if (budget < 1 || budget > limit)
        throw std::invalid_argument(fmt::format("budget {} outside [1, {}]", budget, limit));
}

SampleSet make_set(Strategy s, std::int64_t budget, std::uint64_t seed) {
    SampleSet out;
    out.strategy = s;
    out.budget = budget;
    out.seed = seed;
    out.nodes.reserve(static_cast<std::size_t>(budget));
    out.pi.reserve(static_cast<std::size_t>(budget));
    return out;
}

// Traversal baselines share everything except the frontier container.
template <bool DepthFirst>
SampleSet traverse(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed, LabelMask mask) {
    check_root(g, root);
    if (budget < 1) throw std::invalid_argument("budget must be at least 1");
    pool_size(g, mask);
    SampleSet out = make_set(DepthFirst ? Strategy::dfs : Strategy::bfs, budget, seed);
    out.pi_informative = false;
    const double placeholder = 1.0 / static_cast<double>(g.num_nodes());
    Rng rng(seed, Stream::sampling);
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(g.num_nodes()), 0);

    auto visit = [&](NodeId v) {
        visited[static_cast<std::size_t>(v)] = 1;
        if (labelable(mask, v)) {
            out.nodes.push_back(v);
            out.pi.push_back(placeholder);
        }
        return static_cast<std::int64_t>(out.nodes.size()) >= budget;
    };
    auto shuffled_neighbors = [&](NodeId v) {
        auto nbrs = g.neighbors(v);
        std::vector<NodeId> order(nbrs.begin(), nbrs.end());
        rng.shuffle(order.begin(), order.end());
        return order;
    };

    if (visit(root)) return out;
    if constexpr (DepthFirst) {
        struct Frame {
            std::vector<NodeId> next;
            std::size_t index = 0;
        };
        std::vector<Frame> stack;
        stack.push_back({shuffled_neighbors(root)});
        while (!stack.empty()) {
            auto& top = stack.back();
            if (top.index == top.next.size()) {
                stack.pop_back();
                continue;
            }
            const NodeId u = top.next[top.index++];
            if (visited[static_cast<std::size_t>(u)]) continue;
            if (visit(u)) return out;
            stack.push_back({shuffled_neighbors(u)});
        }
    } else {
        std::vector<NodeId> queue{root};
        for (std::size_t head = 0; head < queue.size(); ++head) {
            for (NodeId u : shuffled_neighbors(queue[head])) {
                if (visited[static_cast<std::size_t>(u)]) continue;
                if (visit(u)) return out;
                queue.push_back(u);
            }
        }
    }
    out.shortfall = true;
    return out;
}

NodeId random_unvisited(const Graph& g, std::span<const std::uint8_t> visited, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(g.num_nodes());
    for (int attempt = 0; attempt < 64; ++attempt) {
        const auto v = static_cast<NodeId>(rng.uniform_index(n));
        if (!visited[static_cast<std::size_t>(v)]) return v;
    }
    std::vector<NodeId> open;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (!visited[static_cast<std::size_t>(v)]) open.push_back(v);
    return open[rng.uniform_index(open.size())];
}

NodeId walk_step(const Graph& g, NodeId current, Rng& rng) {
    return g.neighbors(current)[rng.categorical(g.neighbor_weights(current))];
}

} // namespace

double stationary_probability(const Graph& g, NodeId v) {
    const double total = g.total_weighted_degree();
    const double w = g.weighted_degree(v);
    if (w > 0.0 && total > 0.0) return w / total;
    return 1.0 / static_cast<double>(g.num_nodes());
}

SampleSet sample_uniform(const Graph& g, std::int64_t budget, std::uint64_t seed, LabelMask mask) {
    const auto pool_n = pool_size(g, mask);
    check_budget(budget, pool_n);
    SampleSet out = make_set(Strategy::uniform, budget, seed);
    std::vector<NodeId> pool;
    pool.reserve(static_cast<std::size_t>(pool_n));
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (labelable(mask, v)) pool.push_back(v);

    Rng rng(seed, Stream::sampling);
    const double pi = 1.0 / static_cast<double>(pool_n);
    for (std::int64_t i = 0; i < budget; ++i) {
        const auto left = static_cast<std::uint64_t>(pool_n - i);
        const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.uniform_index(left));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        out.nodes.push_back(pool[static_cast<std::size_t>(i)]);
        out.pi.push_back(pi);
    }
    return out;
}

SampleSet sample_single_walk(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed,
                             LabelMask mask) {
    check_root(g, root);
    if (budget < 1) throw std::invalid_argument("budget must be at least 1");
    pool_size(g, mask);
    SampleSet out = make_set(Strategy::single_walk, budget, seed);
    Rng rng(seed, Stream::sampling);
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(g.num_nodes()), 0);

    auto visit = [&](NodeId v) {
        if (visited[static_cast<std::size_t>(v)]) return;
        visited[static_cast<std::size_t>(v)] = 1;
        if (labelable(mask, v)) {
            out.nodes.push_back(v);
            out.pi.push_back(stationary_probability(g, v));
        }
    };

    // 50 * B * max(1, n / B)
    const auto step_cap = 50 * std::max<std::int64_t>(budget, g.num_nodes());
    NodeId current = root;
    visit(current);
    std::int64_t steps = 0;
    while (static_cast<std::int64_t>(out.nodes.size()) < budget) {
        if (steps >= step_cap || g.degree(current) == 0) {
            out.shortfall = true;
            break;
        }
        current = walk_step(g, current, rng);
        ++steps;
        visit(current);
    }
    return out;
}

std::vector<NodeId> walk_trajectory(const Graph& g, NodeId root, std::int64_t steps, std::uint64_t seed) {
    check_root(g, root);
    if (steps < 0) throw std::invalid_argument("step count must be non-negative");
    Rng rng(seed, Stream::sampling);
    std::vector<NodeId> path{root};
    path.reserve(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t t = 0; t < steps && g.degree(path.back()) > 0; ++t) path.push_back(walk_step(g, path.back(), rng));
    return path;
}

SampleSet sample_bfs(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed, LabelMask mask) {
    return traverse<false>(g, budget, root, seed, mask);
}

SampleSet sample_dfs(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed, LabelMask mask) {
    return traverse<true>(g, budget, root, seed, mask);
}

std::optional<std::size_t> select_frontier_slot(const Graph& g, std::span<const NodeId> walkers,
                                                std::span<const std::uint8_t> visited, Rng& rng) {
    std::vector<double> weights(walkers.size(), 0.0);
    std::size_t eligible = 0;
    bool any_weight = false;
    for (std::size_t i = 0; i < walkers.size(); ++i) {
        if (visited[static_cast<std::size_t>(walkers[i])]) continue;
        ++eligible;
        weights[i] = g.weighted_degree(walkers[i]);
        any_weight = any_weight || weights[i] > 0.0;
    }
    if (eligible == 0) return std::nullopt;
    if (!any_weight) {
        // All eligible positions are isolated nodes: choose uniformly among them.
        for (std::size_t i = 0; i < walkers.size(); ++i)
            weights[i] = visited[static_cast<std::size_t>(walkers[i])] ? 0.0 : 1.0;
    }
    return rng.categorical(weights);
}

SampleSet sample_frontier(const Graph& g, std::int64_t budget, int walkers, std::uint64_t seed, LabelMask mask,
                          const FrontierObserver& observer) {
    if (walkers < 1) throw std::invalid_argument("walker count must be at least 1");
    check_budget(budget, pool_size(g, mask));
    SampleSet out = make_set(Strategy::frontier, budget, seed);
    out.walkers = walkers;

    const auto n = static_cast<std::size_t>(g.num_nodes());
    Rng rng(seed, Stream::sampling);
    std::vector<std::uint8_t> visited(n, 0);
    std::size_t visited_count = 0;
    std::vector<NodeId> list(static_cast<std::size_t>(walkers));
    for (auto& v : list) v = static_cast<NodeId>(rng.uniform_index(n));

    std::vector<double> edge_weights;
    std::vector<NodeId> open_neighbors;
    FrontierStep step;
    while (static_cast<std::int64_t>(out.nodes.size()) < budget) {
        if (visited_count == n) {
            out.shortfall = true;
            break;
        }
        if (observer) {
            step = FrontierStep{};
            step.walkers_before = list;
        }

        const auto slot = select_frontier_slot(g, list, visited, rng);
        if (!slot) {
            // Every walker sits on a visited node: re-seed all of them.
            for (auto& v : list) v = random_unvisited(g, visited, rng);
            if (observer) {
                step.recovered = true;
                step.walkers_after = list;
                observer(step);
            }
            continue;
        }

        const NodeId v = list[*slot];
        visited[static_cast<std::size_t>(v)] = 1;
        ++visited_count;
        if (labelable(mask, v)) {
            out.nodes.push_back(v);
            out.pi.push_back(stationary_probability(g, v));
        }

        edge_weights.clear();
        open_neighbors.clear();
        const auto nbrs = g.neighbors(v);
        const auto ws = g.neighbor_weights(v);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            if (visited[static_cast<std::size_t>(nbrs[i])]) continue;
            open_neighbors.push_back(nbrs[i]);
            edge_weights.push_back(ws[i]);
        }
        bool recovered = false;
        if (!open_neighbors.empty()) {
            list[*slot] = open_neighbors[rng.categorical(edge_weights)];
        } else if (visited_count < n) {
            list[*slot] = random_unvisited(g, visited, rng);
            recovered = true;
        }

        if (observer) {
            step.selected_slot = slot;
            if (labelable(mask, v)) step.appended = v;
            step.recovered = recovered;
            step.walkers_after = list;
            observer(step);
        }
    }
    return out;
}

SampleSet draw_sample(const Graph& g, const SamplerParams& params, std::uint64_t seed, LabelMask mask) {
    auto root = [&]() -> NodeId {
        if (params.root) return *params.root;
        const auto pool_n = pool_size(g, mask);
        if (pool_n == 0) throw std::invalid_argument("empty label pool");
        Rng rng(seed, Stream::root);
        auto pick = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(pool_n)));
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            if (labelable(mask, v) && pick-- == 0) return v;
        return 0;
    };
    switch (params.strategy) {
    case Strategy::uniform: return sample_uniform(g, params.budget, seed, mask);
    case Strategy::single_walk: return sample_single_walk(g, params.budget, root(), seed, mask);
    case Strategy::frontier: return sample_frontier(g, params.budget, params.walkers, seed, mask);
    case Strategy::bfs: return sample_bfs(g, params.budget, root(), seed, mask);
    case Strategy::dfs: return sample_dfs(g, params.budget, root(), seed, mask);
    }
    throw std::invalid_argument("unknown strategy");
}

void write_sample_csv(const SampleSet& s, std::ostream& out, std::string_view extra_header) {
    if (!extra_header.empty()) out << extra_header;
    out << "# strategy=" << to_string(s.strategy) << " seed=" << s.seed << " budget=" << s.budget
        << " walkers=" << s.walkers << " shortfall=" << (s.shortfall ? 1 : 0)
        << " pi_informative=" << (s.pi_informative ? 1 : 0) << '\n';
    out << "node_id,pi,order_index\n";
    for (std::size_t i = 0; i < s.nodes.size(); ++i)
        out << s.nodes[i] << ',' << format_double(s.pi[i]) << ',' << i << '\n';
}

SampleSet read_sample_csv(std::istream& in) {
    SampleSet s;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# strategy=", 0) == 0) {
            std::istringstream fields(line.substr(2));
            std::string kv;
            while (fields >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const auto key = kv.substr(0, eq);
                const auto value = kv.substr(eq + 1);
                if (key == "strategy") s.strategy = parse_strategy(value);
                else if (key == "seed") s.seed = std::stoull(value);
                else if (key == "budget") s.budget = std::stoll(value);
                else if (key == "walkers") s.walkers = std::stoi(value);
                else if (key == "shortfall") s.shortfall = value == "1";
                else if (key == "pi_informative") s.pi_informative = value == "1";
            }
            continue;
        }
        if (line[0] == '#') continue;
        if (!header_seen) {
            if (line != "node_id,pi,order_index") throw ParseError("<sample>", line_no, "missing column header");
            header_seen = true;
            continue;
        }
        NodeId node = 0;
        double pi = 0.0;
        std::size_t order = 0;
        char c1 = 0, c2 = 0;
        std::istringstream row(line);
        if (!(row >> node >> c1 >> pi >> c2 >> order) || c1 != ',' || c2 != ',' || order != s.nodes.size())
            throw ParseError("<sample>", line_no, "bad sample row");
        s.nodes.push_back(node);
        s.pi.push_back(pi);
    }
    return s;
}

} // namespace ssgcn
