#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ssgcn/density.hpp"
#include "ssgcn/gcn.hpp"
#include "ssgcn/graph.hpp"
#include "ssgcn/sampling.hpp"

namespace ssgcn {

/// Everything that determines an experiment's output. Serialized into the
/// header of every CSV the harness writes.
struct ExperimentSpec {
    std::string dataset = "cora";
    std::vector<Strategy> strategies{Strategy::uniform, Strategy::single_walk, Strategy::frontier};
    std::vector<double> ratios{0.005, 0.01, 0.05, 0.1};
    int walkers = 3;
    int cores = 3;
    Eigen::Index tt_rank = 8;
    /// tt-rank sweep for compress-report.
    std::vector<Eigen::Index> ranks{2, 4, 8, 16};
    int repeats = 10;
    std::uint64_t seed = 0;
    bool dense = false;
    int test_size = 1000;
    int trials = 100;
    int epochs = 200;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    Eigen::Index hidden = 16;
    int patience = 20;
    double epsilon = 1e-4;
    /// Also write one TrainReport CSV per run.
    bool reports = false;

    // Not part of the header: they do not affect results.
    std::filesystem::path out = ".";
    int threads = 0;  // 0: hardware concurrency

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Applies one `key = value` setting. Unknown keys and bad values throw
/// std::invalid_argument.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);
/// Reads `key = value` lines (`#` comments, blank lines ignored).
void load_spec_file(ExperimentSpec& spec, const std::filesystem::path& path);

/// `# ssgcn <version> <command>` followed by a `# key=value ...` line.
std::string spec_header(const ExperimentSpec& spec, std::string_view command);

/// Resolves a dataset name: an existing directory holding `*.content` and
/// `*.cites`, a directory of that name under $SSGCN_DATA, or
/// `synthetic-cora[:seed]` for the generated stand-in. Features are
/// row-normalized. Throws DataError when nothing matches.
Dataset resolve_dataset(const std::string& name);

/// Fixed evaluation protocol for one dataset: a held-out test set and the
/// complementary label pool the samplers may draw from.
struct Protocol {
    std::vector<NodeId> test_nodes;
    std::vector<std::uint8_t> label_pool;  // 1 = may be labeled

    LabelMask mask() const { return label_pool; }
};

/// Draws test_size nodes with Rng(seed, Stream::test_pool).
Protocol make_protocol(NodeId n, int test_size, std::uint64_t seed);

/// floor(ratio * n); throws std::invalid_argument when that is 0.
std::int64_t budget_for(double ratio, NodeId n);

/// One (strategy, compression, budget, seed) training run.
struct RunSpec {
    std::string method;
    Strategy strategy = Strategy::uniform;
    bool compressed = false;
    Eigen::Index tt_rank = 8;
    double ratio = 0.0;
    int repeat = 0;
};

struct RunResult {
    RunSpec spec;
    std::int64_t budget = 0;
    std::uint64_t seed = 0;
    SampleSet sample;
    TrainReport report;
};

/// Samples, trains and evaluates one run. Seed = spec.seed + run.repeat.
/// Asserts that train, validation and test nodes are pairwise disjoint.
RunResult run_training(const ExperimentSpec& spec, const Dataset& data, const GraphInput& input,
                       const Protocol& protocol, const RunSpec& run);

/// Runs body(i) for i in [0, count) on a pool of threads. Each index is an
/// independent task; the first exception is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    const auto hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto workers = static_cast<std::size_t>(std::clamp(threads > 0 ? threads : hw, 1, std::max(1, static_cast<int>(count))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

struct GridRow {
    std::string label;
    double ratio = 0.0;
    std::int64_t budget = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    int runs = 0;
};

/// Groups results by (method, ratio) in first-appearance order.
std::vector<GridRow> aggregate_accuracy(const std::vector<RunResult>& results);

// Commands. Each writes its CSVs under spec.out and returns what it wrote.

std::vector<std::filesystem::path> cmd_sample(const ExperimentSpec& spec);

struct TrainGrid {
    std::vector<RunResult> runs;
    std::vector<GridRow> rows;
};
/// Methods "GCN" (uniform sampling, dense) and "SS-GCN" (frontier sampling,
/// TT layer 1 unless spec.dense) at every ratio and repeat.
TrainGrid cmd_train(const ExperimentSpec& spec);

/// Label-density MSE for each non-traversal strategy at every ratio.
std::vector<DensityReport> cmd_density(const ExperimentSpec& spec);

/// All five strategies through the SS-GCN pipeline.
TrainGrid cmd_compare_samplers(const ExperimentSpec& spec);

struct CompressRow {
    std::string label;            // "dense" or "tt-r<rank>"
    Eigen::Index rank = 0;        // 0 for dense
    std::int64_t params = 0;
    std::int64_t dense_params = 0;
    double ratio = 1.0;
    double mean_acc = 0.0;
    double acc_delta = 0.0;       // versus the dense row
    double train_ms = 0.0;        // mean; nondeterministic
    double overhead = 0.0;        // train_ms / dense train_ms - 1; nondeterministic
};
/// Dense baseline plus one row per rank in spec.ranks, frontier sampling at
/// the largest ratio.
std::vector<CompressRow> cmd_compress_report(const ExperimentSpec& spec);

DatasetSummary cmd_summarize(const ExperimentSpec& spec);

} // namespace ssgcn
