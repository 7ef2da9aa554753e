#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssgcn/graph.hpp"
#include "ssgcn/rng.hpp"

namespace ssgcn {

enum class Strategy { uniform, single_walk, frontier, bfs, dfs };

std::string_view to_string(Strategy s);
/// Accepts the names produced by to_string plus "rw"/"random-walk".
Strategy parse_strategy(std::string_view name);

/// Ordered labeled-node budget with inclusion probabilities.
struct SampleSet {
    Strategy strategy = Strategy::uniform;
    std::int64_t budget = 0;
    std::uint64_t seed = 0;
    int walkers = 0;               // frontier only
    std::vector<NodeId> nodes;     // distinct, in sampling order
    std::vector<double> pi;        // parallel to nodes
    bool shortfall = false;        // budget could not be reached
    /// False for BFS/DFS, whose pi is a 1/n placeholder unusable for estimation.
    bool pi_informative = true;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// Nodes that may receive a label. Walks still traverse every node; only
/// membership in the sample is restricted. An empty mask means "all nodes".
using LabelMask = std::span<const std::uint8_t>;

struct SamplerParams {
    Strategy strategy = Strategy::frontier;
    std::int64_t budget = 0;
    int walkers = 3;
    /// Root for single-walk/BFS/DFS; drawn uniformly from the label pool when unset.
    std::optional<NodeId> root;
};

SampleSet sample_uniform(const Graph& g, std::int64_t budget, std::uint64_t seed, LabelMask mask = {});
SampleSet sample_single_walk(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed,
                             LabelMask mask = {});
/// The with-replacement walk behind sample_single_walk: root followed by up to
/// `steps` moves, each to a neighbour drawn by edge weight (stops early at an
/// isolated node). Same random stream as sample_single_walk for equal seeds.
std::vector<NodeId> walk_trajectory(const Graph& g, NodeId root, std::int64_t steps, std::uint64_t seed);

SampleSet sample_bfs(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed, LabelMask mask = {});
SampleSet sample_dfs(const Graph& g, std::int64_t budget, NodeId root, std::uint64_t seed, LabelMask mask = {});

/// Snapshot handed to a frontier observer after every iteration.
struct FrontierStep {
    std::vector<NodeId> walkers_before;
    std::vector<NodeId> walkers_after;
    std::optional<std::size_t> selected_slot;   // empty for a recovery-only iteration
    std::optional<NodeId> appended;             // node added to the sample, if any
    bool recovered = false;
};
using FrontierObserver = std::function<void(const FrontierStep&)>;

/// Frontier sampling with m dependent walkers sharing a candidate list.
///
/// Per iteration: pick an unvisited walker position v with probability
/// w(v) / sum of w over unvisited positions, add v to the sample (if
/// labelable), then move that walker to an unvisited neighbour chosen by edge
/// weight. Walkers that cannot proceed (no unvisited position in the list, or
/// no unvisited neighbour) are re-seeded at uniformly random unvisited nodes.
/// pi(v) = w(v) / sum_u w(u).
SampleSet sample_frontier(const Graph& g, std::int64_t budget, int walkers, std::uint64_t seed,
                          LabelMask mask = {}, const FrontierObserver& observer = {});

/// One frontier selection: index into `walkers` of the chosen position, or
/// nullopt when every position is already visited.
std::optional<std::size_t> select_frontier_slot(const Graph& g, std::span<const NodeId> walkers,
                                                std::span<const std::uint8_t> visited, Rng& rng);

/// Dispatches on params.strategy.
SampleSet draw_sample(const Graph& g, const SamplerParams& params, std::uint64_t seed, LabelMask mask = {});

/// pi(v) = w(v) / sum_u w(u); nodes of zero weighted degree (reachable only
/// through uniform re-seeding) get 1/n.
double stationary_probability(const Graph& g, NodeId v);

/// CSV: `# strategy=... seed=... budget=...` header comment, then
/// `node_id,pi,order_index` rows.
void write_sample_csv(const SampleSet& s, std::ostream& out, std::string_view extra_header = {});
SampleSet read_sample_csv(std::istream& in);

} // namespace ssgcn
