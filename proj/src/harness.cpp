#include "ssgcn/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "ssgcn/errors.hpp"
#include "ssgcn/synthetic.hpp"

namespace ssgcn {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument(fmt::format("bad value `{}` for {}", text, key));
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw std::invalid_argument(fmt::format("bad boolean `{}` for {}", text, key));
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ',';
        out += format(v);
    }
    return out;
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string ratio_tag(double ratio) { return format_double(ratio); }

Dataset load_directory(const fs::path& dir) {
    fs::path content = dir / (dir.filename().string() + ".content");
    if (!fs::exists(content)) {
        std::vector<fs::path> candidates;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".content") candidates.push_back(entry.path());
        std::sort(candidates.begin(), candidates.end());
        if (candidates.empty()) throw DataError(dir.string() + ": no *.content file");
        content = candidates.front();
    }
    fs::path cites = content;
    cites.replace_extension(".cites");
    if (!fs::exists(cites)) throw DataError(cites.string() + ": missing citation file");
    auto data = load_citation_dataset(content, cites);
    data.name = dir.filename().string();
    return data;
}

} // namespace

void ExperimentSpec::validate() const {
    if (dataset.empty()) throw std::invalid_argument("dataset must be set");
    if (strategies.empty()) throw std::invalid_argument("strategy list is empty");
    if (ratios.empty()) throw std::invalid_argument("ratio list is empty");
    for (double r : ratios)
        if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument(fmt::format("ratio {} outside (0, 1]", r));
    if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
    if (walkers < 1) throw std::invalid_argument("walkers must be at least 1");
    if (cores < 2) throw std::invalid_argument("cores must be at least 2");
    if (tt_rank < 1) throw std::invalid_argument("tt-rank must be at least 1");
    for (auto r : ranks)
        if (r < 1) throw std::invalid_argument("rank sweep entries must be at least 1");
    if (test_size < 1) throw std::invalid_argument("test size must be at least 1");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (hidden < 1) throw std::invalid_argument("hidden width must be at least 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("weight decay must be non-negative");
    if (patience < 0) throw std::invalid_argument("patience must be non-negative");
}

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "dataset") {
        spec.dataset = std::string(value);
    } else if (key == "strategies" || key == "strategy") {
        spec.strategies.clear();
        for (auto s : split_list(value)) spec.strategies.push_back(parse_strategy(s));
    } else if (key == "ratios" || key == "ratio") {
        spec.ratios.clear();
        for (auto s : split_list(value)) spec.ratios.push_back(parse_value<double>(key, s));
    } else if (key == "ranks") {
        spec.ranks.clear();
        for (auto s : split_list(value)) spec.ranks.push_back(parse_value<Eigen::Index>(key, s));
    } else if (key == "walkers") {
        spec.walkers = parse_value<int>(key, value);
    } else if (key == "cores") {
        spec.cores = parse_value<int>(key, value);
    } else if (key == "tt_rank") {
        spec.tt_rank = parse_value<Eigen::Index>(key, value);
    } else if (key == "repeats") {
        spec.repeats = parse_value<int>(key, value);
    } else if (key == "seed") {
        spec.seed = parse_value<std::uint64_t>(key, value);
    } else if (key == "dense") {
        spec.dense = parse_bool(key, value);
    } else if (key == "test_size") {
        spec.test_size = parse_value<int>(key, value);
    } else if (key == "trials") {
        spec.trials = parse_value<int>(key, value);
    } else if (key == "epochs") {
        spec.epochs = parse_value<int>(key, value);
    } else if (key == "lr" || key == "learning_rate") {
        spec.learning_rate = parse_value<double>(key, value);
    } else if (key == "weight_decay") {
        spec.weight_decay = parse_value<double>(key, value);
    } else if (key == "hidden") {
        spec.hidden = parse_value<Eigen::Index>(key, value);
    } else if (key == "patience") {
        spec.patience = parse_value<int>(key, value);
    } else if (key == "epsilon") {
        spec.epsilon = parse_value<double>(key, value);
    } else if (key == "reports") {
        spec.reports = parse_bool(key, value);
    } else if (key == "out") {
        spec.out = std::string(value);
    } else if (key == "threads") {
        spec.threads = parse_value<int>(key, value);
    } else {
        throw std::invalid_argument(fmt::format("unknown setting `{}`", key));
    }
}

void load_spec_file(ExperimentSpec& spec, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(fmt::format("{}:{}: expected key = value", path.string(), line_no));
        try {
            apply_setting(spec, view.substr(0, eq), view.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
}

std::string spec_header(const ExperimentSpec& spec, std::string_view command) {
    const auto strategies = join(spec.strategies, [](Strategy s) { return std::string(to_string(s)); });
    const auto ratios = join(spec.ratios, [](double r) { return format_double(r); });
    const auto ranks = join(spec.ranks, [](Eigen::Index r) { return std::to_string(r); });
    return fmt::format(
        "# ssgcn {} {}\n"
        "# dataset={} strategies={} ratios={} walkers={} cores={} tt_rank={} ranks={} repeats={} seed={} "
        "dense={} test_size={} trials={} epochs={} lr={} weight_decay={} hidden={} patience={} epsilon={}\n",
        SSGCN_VERSION, command, spec.dataset, strategies, ratios, spec.walkers, spec.cores, spec.tt_rank, ranks,
        spec.repeats, spec.seed, spec.dense, spec.test_size, spec.trials, spec.epochs,
        format_double(spec.learning_rate), format_double(spec.weight_decay), spec.hidden, spec.patience,
        format_double(spec.epsilon));
}

Dataset resolve_dataset(const std::string& name) {
    constexpr std::string_view synthetic = "synthetic-cora";
    if (name.starts_with(synthetic)) {
        SyntheticSpec s;
        const std::string_view rest = std::string_view(name).substr(synthetic.size());
        if (!rest.empty()) {
            if (rest.front() != ':') throw DataError("unknown dataset " + name);
            try {
                s.seed = parse_value<std::uint64_t>("synthetic seed", rest.substr(1));
            } catch (const std::invalid_argument& e) {
                throw DataError(e.what());
            }
        }
        auto data = generate_synthetic_citation(s);
        row_normalize(data.features);
        data.name = name;
        return data;
    }
    if (fs::is_directory(name)) return load_directory(name);
    std::vector<std::string> tried{name};
    if (const char* root = std::getenv("SSGCN_DATA"); root && *root) {
        const fs::path dir = fs::path(root) / name;
        if (fs::is_directory(dir)) return load_directory(dir);
        tried.push_back(dir.string());
    }
    throw DataError(fmt::format("dataset `{}` not found (tried {}); set SSGCN_DATA or use synthetic-cora", name,
                                join(tried, [](const std::string& s) { return s; })));
}

Protocol make_protocol(NodeId n, int test_size, std::uint64_t seed) {
    if (test_size < 1 || test_size >= n)
        throw std::invalid_argument(fmt::format("test size {} must lie in [1, {})", test_size, n));
    std::vector<NodeId> ids(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) ids[static_cast<std::size_t>(v)] = v;
    Rng rng(seed, Stream::test_pool);
    for (std::size_t i = 0; i < static_cast<std::size_t>(test_size); ++i)
        std::swap(ids[i], ids[i + rng.uniform_index(ids.size() - i)]);
    Protocol p;
    p.test_nodes.assign(ids.begin(), ids.begin() + test_size);
    std::sort(p.test_nodes.begin(), p.test_nodes.end());
    p.label_pool.assign(static_cast<std::size_t>(n), 1);
    for (NodeId v : p.test_nodes) p.label_pool[static_cast<std::size_t>(v)] = 0;
    return p;
}

std::int64_t budget_for(double ratio, NodeId n) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument(fmt::format("ratio {} outside (0, 1]", ratio));
    // The tiny relative slack keeps e.g. 0.07 * 100 from flooring to 6.
    const auto budget = static_cast<std::int64_t>(std::floor(ratio * static_cast<double>(n) * (1.0 + 1e-12)));
    if (budget < 1)
        throw std::invalid_argument(fmt::format("ratio {} gives an empty budget on {} nodes", ratio, n));
    return budget;
}

RunResult run_training(const ExperimentSpec& spec, const Dataset& data, const GraphInput& input,
                       const Protocol& protocol, const RunSpec& run) {
    RunResult result;
    result.spec = run;
    result.seed = spec.seed + static_cast<std::uint64_t>(run.repeat);
    result.budget = budget_for(run.ratio, data.graph.num_nodes());

    const auto t_sample = std::chrono::steady_clock::now();
    result.sample = draw_sample(data.graph, {run.strategy, result.budget, spec.walkers, std::nullopt}, result.seed,
                                protocol.mask());
    const double sample_ms = elapsed_ms(t_sample);

    TrainConfig cfg;
    cfg.epochs = spec.epochs;
    cfg.learning_rate = spec.learning_rate;
    cfg.weight_decay = spec.weight_decay;
    cfg.patience = spec.patience;
    cfg.epsilon = spec.epsilon;
    cfg.seed = result.seed;
    cfg.model.hidden = spec.hidden;
    cfg.model.compress_layer1 = run.compressed;
    cfg.model.cores = spec.cores;
    cfg.model.tt_rank = run.tt_rank;
    auto trained = train(input, data.labels, result.sample, cfg);

    std::vector<std::uint8_t> role(static_cast<std::size_t>(data.graph.num_nodes()), 0);
    auto mark = [&](std::span<const NodeId> nodes, std::uint8_t bit) {
        for (NodeId v : nodes) {
            auto& r = role[static_cast<std::size_t>(v)];
            if (r != 0) throw std::logic_error(fmt::format("node {} appears in more than one split", v));
            r = bit;
        }
    };
    mark(protocol.test_nodes, 1);
    mark(trained.train_nodes, 2);
    mark(trained.val_nodes, 4);

    const auto t_eval = std::chrono::steady_clock::now();
    result.report = std::move(trained.report);
    result.report.test_accuracy = evaluate_accuracy(trained.model, input, data.labels, protocol.test_nodes);
    result.report.eval_ms = elapsed_ms(t_eval);
    result.report.sample_ms = sample_ms;
    return result;
}

std::vector<GridRow> aggregate_accuracy(const std::vector<RunResult>& results) {
    std::vector<GridRow> rows;
    std::vector<std::vector<double>> values;
    for (const auto& r : results) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const GridRow& row) {
            return row.label == r.spec.method && row.ratio == r.spec.ratio;
        });
        if (it == rows.end()) {
            rows.push_back({r.spec.method, r.spec.ratio, r.budget, 0.0, 0.0, 0});
            values.emplace_back();
            it = rows.end() - 1;
        }
        values[static_cast<std::size_t>(it - rows.begin())].push_back(r.report.test_accuracy);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& v = values[i];
        double sum = 0.0;
        for (double x : v) sum += x;
        const double mean = sum / static_cast<double>(v.size());
        double sq = 0.0;
        for (double x : v) sq += (x - mean) * (x - mean);
        rows[i].mean = mean;
        rows[i].stddev = v.size() > 1 ? std::sqrt(sq / static_cast<double>(v.size() - 1)) : 0.0;
        rows[i].runs = static_cast<int>(v.size());
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Prepared {
    Dataset data;
    GraphInput input;
    Protocol protocol;
};

Prepared prepare(const ExperimentSpec& spec) {
    spec.validate();
    Prepared p;
    p.data = resolve_dataset(spec.dataset);
    p.input = prepare_input(symmetric_normalize(p.data.graph), p.data.features);
    p.protocol = make_protocol(p.data.graph.num_nodes(), spec.test_size, spec.seed);
    return p;
}

std::vector<RunResult> run_all(const ExperimentSpec& spec, const Prepared& p, const std::vector<RunSpec>& runs) {
    std::vector<RunResult> results(runs.size());
    parallel_for(runs.size(), spec.threads,
                 [&](std::size_t i) { results[i] = run_training(spec, p.data, p.input, p.protocol, runs[i]); });
    return results;
}

void write_grid(const std::vector<GridRow>& rows, std::ostream& out, std::string_view first_column) {
    out << first_column << ",ratio,budget,mean_acc,std_acc,runs\n";
    for (const auto& r : rows)
        out << r.label << ',' << format_double(r.ratio) << ',' << r.budget << ',' << format_double(r.mean) << ','
            << format_double(r.stddev) << ',' << r.runs << '\n';
}

void write_runs(const std::vector<RunResult>& results, std::ostream& out) {
    out << "method,strategy,compressed,tt_rank,ratio,budget,repeat,seed,sample_size,shortfall,test_acc,best_epoch,"
           "epochs_run,early_stopped,params_actual,params_dense\n";
    for (const auto& r : results)
        out << r.spec.method << ',' << to_string(r.spec.strategy) << ',' << r.spec.compressed << ','
            << (r.spec.compressed ? r.spec.tt_rank : 0) << ',' << format_double(r.spec.ratio) << ',' << r.budget << ','
            << r.spec.repeat << ',' << r.seed << ',' << r.sample.size() << ',' << r.sample.shortfall << ','
            << format_double(r.report.test_accuracy) << ',' << r.report.best_epoch << ',' << r.report.epochs.size()
            << ',' << r.report.early_stopped << ',' << r.report.params.actual << ','
            << r.report.params.dense_equivalent << '\n';
}

void write_timings(const std::vector<RunResult>& results, std::ostream& out) {
    out << "# wall-clock timings; these vary between runs\n";
    out << "method,ratio,repeat,sample_ms,train_ms,eval_ms\n";
    for (const auto& r : results)
        out << r.spec.method << ',' << format_double(r.spec.ratio) << ',' << r.spec.repeat << ','
            << fmt::format("{:.3f},{:.3f},{:.3f}", r.report.sample_ms, r.report.train_ms, r.report.eval_ms) << '\n';
}

void write_run_reports(const ExperimentSpec& spec, const std::vector<RunResult>& results, std::string_view command) {
    if (!spec.reports) return;
    const auto header = spec_header(spec, command);
    for (const auto& r : results) {
        auto out = open_output(spec.out / "reports" /
                               fmt::format("{}_r{}_s{}.csv", r.spec.method, ratio_tag(r.spec.ratio), r.seed));
        write_report_csv(r.report, out, header);
    }
}

void write_train_outputs(const ExperimentSpec& spec, const TrainGrid& grid, std::string_view command,
                         std::string_view stem, std::string_view first_column) {
    const auto header = spec_header(spec, command);
    {
        auto out = open_output(spec.out / fmt::format("{}.csv", stem));
        out << header;
        write_grid(grid.rows, out, first_column);
    }
    {
        auto out = open_output(spec.out / fmt::format("{}_runs.csv", stem));
        out << header;
        write_runs(grid.runs, out);
    }
    {
        auto out = open_output(spec.out / fmt::format("{}_timings.csv", stem));
        out << header;
        write_timings(grid.runs, out);
    }
    write_run_reports(spec, grid.runs, command);
}

} // namespace

std::vector<fs::path> cmd_sample(const ExperimentSpec& spec) {
    spec.validate();
    const auto data = resolve_dataset(spec.dataset);
    const auto protocol = make_protocol(data.graph.num_nodes(), spec.test_size, spec.seed);

    struct Job {
        Strategy strategy;
        std::int64_t budget;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (auto strategy : spec.strategies)
        for (double ratio : spec.ratios)
            for (int t = 0; t < spec.repeats; ++t)
                jobs.push_back({strategy, budget_for(ratio, data.graph.num_nodes()),
                                spec.seed + static_cast<std::uint64_t>(t)});

    std::vector<SampleSet> samples(jobs.size());
    parallel_for(jobs.size(), spec.threads, [&](std::size_t i) {
        samples[i] = draw_sample(data.graph, {jobs[i].strategy, jobs[i].budget, spec.walkers, std::nullopt},
                                 jobs[i].seed, protocol.mask());
    });

    const auto header = spec_header(spec, "sample");
    std::vector<fs::path> written;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto path = spec.out / fmt::format("sample_{}_B{}_s{}.csv", to_string(jobs[i].strategy), jobs[i].budget,
                                           jobs[i].seed);
        auto out = open_output(path);
        write_sample_csv(samples[i], out, header);
        written.push_back(std::move(path));
    }
    return written;
}

TrainGrid cmd_train(const ExperimentSpec& spec) {
    const auto p = prepare(spec);
    std::vector<RunSpec> runs;
    for (const bool ss : {false, true})
        for (double ratio : spec.ratios)
            for (int t = 0; t < spec.repeats; ++t)
                runs.push_back({ss ? "SS-GCN" : "GCN", ss ? Strategy::frontier : Strategy::uniform, ss && !spec.dense,
                                spec.tt_rank, ratio, t});
    TrainGrid grid;
    grid.runs = run_all(spec, p, runs);
    grid.rows = aggregate_accuracy(grid.runs);
    write_train_outputs(spec, grid, "train", "train_grid", "method");
    return grid;
}

std::vector<DensityReport> cmd_density(const ExperimentSpec& spec) {
    spec.validate();
    const auto data = resolve_dataset(spec.dataset);
    std::vector<SamplerParams> params;
    for (auto s : spec.strategies) params.push_back({s, 0, spec.walkers, std::nullopt});

    std::vector<DensityReport> reports(spec.ratios.size());
    parallel_for(spec.ratios.size(), spec.threads, [&](std::size_t i) {
        reports[i] = density_mse_experiment(data.graph, data.labels, params,
                                            budget_for(spec.ratios[i], data.graph.num_nodes()), spec.trials, spec.seed);
    });

    const auto header = spec_header(spec, "density");
    auto summary = open_output(spec.out / "density_summary.csv");
    summary << header << "strategy,ratio,B,m,mse_sum\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        for (const auto& row : reports[i].rows)
            summary << to_string(row.strategy) << ',' << format_double(spec.ratios[i]) << ',' << reports[i].budget
                    << ',' << row.walkers << ',' << format_double(row.mse_sum) << '\n';
        auto trials = open_output(spec.out / fmt::format("density_trials_B{}.csv", reports[i].budget));
        trials << header;
        write_density_trials_csv(reports[i], trials);
    }
    return reports;
}

TrainGrid cmd_compare_samplers(const ExperimentSpec& spec) {
    const auto p = prepare(spec);
    std::vector<RunSpec> runs;
    for (auto s : {Strategy::frontier, Strategy::uniform, Strategy::single_walk, Strategy::dfs, Strategy::bfs})
        for (double ratio : spec.ratios)
            for (int t = 0; t < spec.repeats; ++t)
                runs.push_back({std::string(to_string(s)), s, !spec.dense, spec.tt_rank, ratio, t});
    TrainGrid grid;
    grid.runs = run_all(spec, p, runs);
    grid.rows = aggregate_accuracy(grid.runs);
    write_train_outputs(spec, grid, "compare-samplers", "compare_samplers", "strategy");
    return grid;
}

std::vector<CompressRow> cmd_compress_report(const ExperimentSpec& spec) {
    const auto p = prepare(spec);
    const double ratio = *std::max_element(spec.ratios.begin(), spec.ratios.end());
    std::vector<RunSpec> runs;
    for (int t = 0; t < spec.repeats; ++t) runs.push_back({"dense", Strategy::frontier, false, 0, ratio, t});
    for (auto r : spec.ranks)
        for (int t = 0; t < spec.repeats; ++t)
            runs.push_back({fmt::format("tt-r{}", r), Strategy::frontier, true, r, ratio, t});
    const auto results = run_all(spec, p, runs);

    std::vector<CompressRow> rows;
    for (const auto& grid_row : aggregate_accuracy(results)) {
        CompressRow row;
        row.label = grid_row.label;
        row.mean_acc = grid_row.mean;
        double ms = 0.0;
        int count = 0;
        for (const auto& r : results) {
            if (r.spec.method != row.label) continue;
            row.rank = r.spec.compressed ? r.spec.tt_rank : 0;
            row.params = r.report.params.actual;
            row.dense_params = r.report.params.dense_equivalent;
            ms += r.report.train_ms;
            ++count;
        }
        row.ratio = static_cast<double>(row.dense_params) / static_cast<double>(row.params);
        row.train_ms = ms / count;
        rows.push_back(row);
    }
    for (auto& row : rows) {
        row.acc_delta = row.mean_acc - rows.front().mean_acc;
        row.overhead = row.train_ms / rows.front().train_ms - 1.0;
    }

    const auto header = spec_header(spec, "compress-report");
    {
        auto out = open_output(spec.out / "compress_report.csv");
        out << header << "config,tt_rank,ratio,budget,params_actual,params_dense,compression_ratio,mean_acc,acc_delta\n";
        for (const auto& row : rows)
            out << row.label << ',' << row.rank << ',' << format_double(ratio) << ','
                << budget_for(ratio, p.data.graph.num_nodes()) << ',' << row.params << ',' << row.dense_params << ','
                << format_double(row.ratio) << ',' << format_double(row.mean_acc) << ','
                << format_double(row.acc_delta) << '\n';
    }
    {
        auto out = open_output(spec.out / "compress_timings.csv");
        out << header << "# wall-clock timings; these vary between runs\n";
        out << "config,tt_rank,mean_train_ms,overhead\n";
        for (const auto& row : rows)
            out << row.label << ',' << row.rank << ',' << fmt::format("{:.3f},{:.4f}", row.train_ms, row.overhead)
                << '\n';
    }
    {
        auto out = open_output(spec.out / "compress_runs.csv");
        out << header;
        write_runs(results, out);
    }
    write_run_reports(spec, results, "compress-report");
    return rows;
}

DatasetSummary cmd_summarize(const ExperimentSpec& spec) {
    const auto data = resolve_dataset(spec.dataset);
    const auto summary = summarize(data);
    auto out = open_output(spec.out / "summary.csv");
    out << spec_header(spec, "summarize");
    write_summary_csv(summary, out);
    return summary;
}

} // namespace ssgcn
