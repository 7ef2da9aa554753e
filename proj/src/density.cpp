#include "ssgcn/density.hpp"

#include <ostream>
#include <stdexcept>

#include <fmt/core.h>

namespace ssgcn {

DensityEstimate true_label_density(const Labels& labels) {
    if (labels.num_classes < 1 || labels.ids.empty()) throw std::invalid_argument("empty labels");
    DensityEstimate out;
    out.kind = DensityEstimate::Kind::truth;
    out.theta = Vector::Zero(labels.num_classes);
    for (int c : labels.ids) out.theta(c) += 1.0;
    out.theta /= static_cast<double>(labels.ids.size());
    return out;
}

DensityEstimate estimate_label_density(const SampleSet& sample, const Labels& labels) {
    if (sample.nodes.empty()) throw std::invalid_argument("cannot estimate density from an empty sample");
    if (!sample.pi_informative)
        throw std::invalid_argument(fmt::format("{} samples carry no inclusion probabilities", to_string(sample.strategy)));
    if (sample.pi.size() != sample.nodes.size()) throw std::invalid_argument("pi/node length mismatch");

    DensityEstimate out;
    out.kind = DensityEstimate::Kind::estimated;
    out.theta = Vector::Zero(labels.num_classes);
    double normalizer = 0.0;
    for (std::size_t i = 0; i < sample.nodes.size(); ++i) {
        const double pi = sample.pi[i];
        if (!(pi > 0.0)) throw std::invalid_argument(fmt::format("non-positive pi {} for node {}", pi, sample.nodes[i]));
        const double weight = 1.0 / pi;
        out.theta(labels[sample.nodes[i]]) += weight;
        normalizer += weight;
    }
    out.theta /= normalizer;
    return out;
}

DensityReport density_mse_experiment(const Graph& g, const Labels& labels, std::span<const SamplerParams> strategies,
                                     std::int64_t budget, int trials, std::uint64_t base_seed) {
    if (trials < 30) throw std::invalid_argument("density experiments need at least 30 trials");
    for (const auto& p : strategies)
        if (p.strategy == Strategy::bfs || p.strategy == Strategy::dfs)
            throw std::invalid_argument(fmt::format("{} has no inclusion probabilities", to_string(p.strategy)));

    DensityReport report;
    report.budget = budget;
    report.trials = trials;
    report.seed = base_seed;
    report.theta_true = true_label_density(labels).theta;
    const auto k = report.theta_true.size();

    for (const auto& base : strategies) {
        SamplerParams params = base;
        params.budget = budget;
        DensityRow row{params.strategy, params.strategy == Strategy::frontier ? params.walkers : 1, Vector::Zero(k), 0.0};
        // Accumulated in trial order so the result does not depend on scheduling.
        for (int t = 0; t < trials; ++t) {
            const auto sample = draw_sample(g, params, base_seed + static_cast<std::uint64_t>(t));
            Vector theta_hat = estimate_label_density(sample, labels).theta;
            row.mse += (theta_hat - report.theta_true).cwiseAbs2();
            report.per_trial.push_back({row.strategy, row.walkers, t, std::move(theta_hat)});
        }
        row.mse /= static_cast<double>(trials);
        row.mse_sum = row.mse.sum();
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_density_trials_csv(const DensityReport& report, std::ostream& out) {
    out << "strategy,B,m,trial,class,theta_hat,theta_true\n";
    for (const auto& t : report.per_trial)
        for (Eigen::Index c = 0; c < t.theta_hat.size(); ++c)
            out << to_string(t.strategy) << ',' << report.budget << ',' << t.walkers << ',' << t.trial << ',' << c
                << ',' << format_double(t.theta_hat(c)) << ',' << format_double(report.theta_true(c)) << '\n';
}

void write_density_summary_csv(const DensityReport& report, std::ostream& out) {
    out << "strategy,B,m,mse_sum\n";
    for (const auto& r : report.rows)
        out << to_string(r.strategy) << ',' << report.budget << ',' << r.walkers << ',' << format_double(r.mse_sum)
            << '\n';
}

} // namespace ssgcn
