#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ssgcn/graph.hpp"
#include "ssgcn/sampling.hpp"

namespace ssgcn {

/// Per-class label density; components are non-negative and sum to 1.
struct DensityEstimate {
    enum class Kind { truth, estimated };

    Vector theta;
    Kind kind = Kind::truth;
};

/// theta_i = fraction of nodes carrying class i.
DensityEstimate true_label_density(const Labels& labels);

/// Self-normalized inverse-probability estimate:
/// theta_i = (1/C) sum_{v in S, y(v) = i} 1/pi(v), C = sum_{v in S} 1/pi(v).
/// Throws std::invalid_argument for an empty sample, a non-positive pi, or a
/// sample whose pi is a placeholder (BFS/DFS).
DensityEstimate estimate_label_density(const SampleSet& sample, const Labels& labels);

struct DensityTrial {
    Strategy strategy;
    int walkers;
    int trial;
    Vector theta_hat;
};

struct DensityRow {
    Strategy strategy;
    int walkers;
    Vector mse;          // per class
    double mse_sum = 0;  // class-summed headline value
};

struct DensityReport {
    std::int64_t budget = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    Vector theta_true;
    std::vector<DensityRow> rows;       // one per requested strategy
    std::vector<DensityTrial> per_trial;
};

/// Repeats sampling `trials` times per strategy and measures
/// MSE_i = mean_t (theta_hat_i - theta_i)^2. Trial t of every strategy uses
/// seed base_seed + t (paired comparison). Single-walk roots are drawn
/// uniformly. Requires trials >= 30.
DensityReport density_mse_experiment(const Graph& g, const Labels& labels, std::span<const SamplerParams> strategies,
                                     std::int64_t budget, int trials, std::uint64_t base_seed);

/// `strategy,B,m,trial,class,theta_hat,theta_true`
void write_density_trials_csv(const DensityReport& report, std::ostream& out);
/// `strategy,B,m,mse_sum`
void write_density_summary_csv(const DensityReport& report, std::ostream& out);

} // namespace ssgcn
