#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "ssgcn/errors.hpp"
#include "ssgcn/harness.hpp"
#include "ssgcn/synthetic.hpp"

namespace {

enum class Command { sample, train, density, compare, compress, summarize, synth };

struct Flags {
    std::string config;
    std::string dataset;
    std::vector<double> ratios;
    std::vector<std::string> strategies;
    std::vector<Eigen::Index> ranks;
    std::vector<std::string> settings;
    int walkers = 0;
    Eigen::Index tt_rank = 0;
    int cores = 0;
    int repeats = 0;
    int threads = -1;
    std::string seed;
    std::string out;
    bool dense = false;
    bool reports = false;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "key = value settings file (flags override it)");
    cmd->add_option("--dataset", f.dataset, "dataset directory, name under $SSGCN_DATA, or synthetic-cora[:seed]");
    cmd->add_option("--ratio", f.ratios, "sampling ratio(s) in (0, 1]")->delimiter(',');
    cmd->add_option("--strategy", f.strategies, "uniform, single-walk, frontier, bfs, dfs")->delimiter(',');
    cmd->add_option("-m,--walkers", f.walkers, "frontier walkers");
    cmd->add_option("-r,--tt-rank", f.tt_rank, "maximum TT rank");
    cmd->add_option("-d,--cores", f.cores, "number of TT cores");
    cmd->add_option("--ranks", f.ranks, "TT ranks swept by compress-report")->delimiter(',');
    cmd->add_option("--repeats", f.repeats, "seeds per grid cell");
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
    cmd->add_option("--set", f.settings, "extra key=value setting (repeatable)");
    cmd->add_flag("--dense", f.dense, "disable TT compression");
    cmd->add_flag("--reports", f.reports, "write one training report per run");
}

ssgcn::ExperimentSpec build_spec(const Flags& f) {
    ssgcn::ExperimentSpec spec;
    if (!f.config.empty()) ssgcn::load_spec_file(spec, f.config);
    for (const auto& s : f.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + s);
        ssgcn::apply_setting(spec, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!f.dataset.empty()) spec.dataset = f.dataset;
    if (!f.ratios.empty()) spec.ratios = f.ratios;
    if (!f.strategies.empty()) {
        spec.strategies.clear();
        for (const auto& s : f.strategies) spec.strategies.push_back(ssgcn::parse_strategy(s));
    }
    if (!f.ranks.empty()) spec.ranks = f.ranks;
    if (f.walkers) spec.walkers = f.walkers;
    if (f.tt_rank) spec.tt_rank = f.tt_rank;
    if (f.cores) spec.cores = f.cores;
    if (f.repeats) spec.repeats = f.repeats;
    if (f.threads >= 0) spec.threads = f.threads;
    if (!f.seed.empty()) ssgcn::apply_setting(spec, "seed", f.seed);
    if (!f.out.empty()) spec.out = f.out;
    if (f.dense) spec.dense = true;
    if (f.reports) spec.reports = true;
    spec.validate();
    return spec;
}

void run(Command command, const ssgcn::ExperimentSpec& spec) {
    switch (command) {
    case Command::sample: {
        const auto files = ssgcn::cmd_sample(spec);
        fmt::print("wrote {} sample file(s) to {}\n", files.size(), spec.out.string());
        break;
    }
    case Command::train:
    case Command::compare: {
        const auto grid = command == Command::train ? ssgcn::cmd_train(spec) : ssgcn::cmd_compare_samplers(spec);
        for (const auto& row : grid.rows)
            fmt::print("{:<12} ratio={:<6} B={:<5} acc={:.4f} +- {:.4f}\n", row.label, row.ratio, row.budget, row.mean,
                       row.stddev);
        break;
    }
    case Command::density:
        for (const auto& report : ssgcn::cmd_density(spec))
            for (const auto& row : report.rows)
                fmt::print("{:<12} B={:<5} m={} mse_sum={:.6g}\n", ssgcn::to_string(row.strategy), report.budget,
                           row.walkers, row.mse_sum);
        break;
    case Command::compress:
        for (const auto& row : ssgcn::cmd_compress_report(spec))
            fmt::print("{:<8} params={:<6} ratio={:<8.3f} acc={:.4f} delta={:+.4f} overhead={:+.1f}%\n", row.label,
                       row.params, row.ratio, row.mean_acc, row.acc_delta, 100.0 * row.overhead);
        break;
    case Command::summarize: {
        const auto s = ssgcn::cmd_summarize(spec);
        fmt::print("n={} m={} k={} f={} components={}\n", s.n, s.m, s.k, s.f, s.components);
        break;
    }
    case Command::synth: {
        ssgcn::SyntheticSpec synth;
        synth.seed = spec.seed;
        const auto data = ssgcn::generate_synthetic_citation(synth);
        std::filesystem::create_directories(spec.out);
        ssgcn::write_citation_dataset(data, spec.out / "cora.content", spec.out / "cora.cites");
        fmt::print("wrote {} nodes, {} edges to {}\n", data.graph.num_nodes(), data.graph.num_edges(),
                   spec.out.string());
        break;
    }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label-budgeted GCN training with frontier sampling and tensor-train layers"};
    app.set_version_flag("--version", SSGCN_VERSION);
    app.require_subcommand(1);

    Flags flags;
    Command command = Command::summarize;
    const std::pair<const char*, Command> commands[] = {
        {"sample", Command::sample},
        {"train", Command::train},
        {"density", Command::density},
        {"compare-samplers", Command::compare},
        {"compress-report", Command::compress},
        {"summarize", Command::summarize},
        {"synth", Command::synth},
    };
    const char* descriptions[] = {
        "write sampled node sets",
        "GCN vs SS-GCN accuracy grid",
        "label-density MSE per sampler",
        "accuracy of all five samplers",
        "compression ratio, time and accuracy over TT ranks",
        "dataset statistics",
        "write the synthetic Cora-format dataset",
    };
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, descriptions[i]);
        add_common(sub, flags);
        sub->callback([&command, c = commands[i].second] { command = c; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        run(command, build_spec(flags));
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const ssgcn::DataError& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return 2;
    } catch (const ssgcn::NumericalError& e) {
        fmt::print(stderr, "numerical error: {}\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 0;
}
