#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "ssgcn/errors.hpp"
#include "ssgcn/harness.hpp"
#include "ssgcn/synthetic.hpp"
#include "test_util.hpp"

using namespace ssgcn;

namespace {

SyntheticSpec mini_spec() {
    SyntheticSpec s;
    s.seed = 4;
    s.class_names = {"a", "b", "c"};
    s.class_sizes = {60, 50, 40};
    s.vocabulary = 120;
    s.edges = 400;
    s.giant_component = 130;
    s.words_per_doc = 10.0;
    return s;
}

// Writes the mini dataset as <dir>/mini/mini.{content,cites}.
std::filesystem::path write_mini(const testutil::TempDir& dir) {
    const auto root = dir.path() / "mini";
    std::filesystem::create_directories(root);
    write_citation_dataset(generate_synthetic_citation(mini_spec()), root / "mini.content", root / "mini.cites");
    return root;
}

ExperimentSpec mini_experiment(const std::filesystem::path& data, const std::filesystem::path& out) {
    ExperimentSpec spec;
    spec.dataset = data.string();
    spec.out = out;
    spec.ratios = {0.1, 0.3};
    spec.repeats = 2;
    spec.test_size = 40;
    spec.trials = 30;
    spec.epochs = 15;
    spec.hidden = 8;
    spec.tt_rank = 2;
    spec.ranks = {2, 3};
    spec.threads = 1;
    return spec;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("settings") {
    ExperimentSpec spec;
    apply_setting(spec, " ratios ", "0.01, 0.1");
    apply_setting(spec, "strategy", "rw,frontier");
    apply_setting(spec, "dense", "yes");
    apply_setting(spec, "lr", "0.05");
    apply_setting(spec, "seed", "42");
    CHECK(spec.ratios == std::vector<double>{0.01, 0.1});
    CHECK(spec.strategies == std::vector<Strategy>{Strategy::single_walk, Strategy::frontier});
    CHECK(spec.dense);
    CHECK(spec.learning_rate == 0.05);
    CHECK(spec.seed == 42);
    CHECK_THROWS_AS(apply_setting(spec, "colour", "red"), std::invalid_argument);
    CHECK_THROWS_AS(apply_setting(spec, "walkers", "3x"), std::invalid_argument);
    CHECK_THROWS_AS(apply_setting(spec, "dense", "maybe"), std::invalid_argument);
    CHECK_THROWS_AS(apply_setting(spec, "strategy", "teleport"), std::invalid_argument);

    spec.ratios = {0.0};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = ExperimentSpec{};
    spec.cores = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    testutil::TempDir dir("settings");
    const auto file = dir.write("exp.conf", "# grid\nwalkers = 5  # more walkers\n\nratios=0.2\n");
    spec = ExperimentSpec{};
    load_spec_file(spec, file);
    CHECK(spec.walkers == 5);
    CHECK(spec.ratios == std::vector<double>{0.2});
    const auto bad = dir.write("bad.conf", "walkers = 5\nthreads\n");
    try {
        load_spec_file(spec, bad);
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("bad.conf:2:") != std::string::npos);
    }
}

TEST_CASE("settings header") {
    ExperimentSpec spec;
    const auto header = spec_header(spec, "train");
    CHECK(header.rfind("# ssgcn ", 0) == 0);
    CHECK(header.find(" train\n# dataset=cora strategies=uniform,single-walk,frontier ratios=0.005,0.01,0.05,0.1 "
                      "walkers=3 cores=3 tt_rank=8 ") != std::string::npos);
    CHECK(header.back() == '\n');
    spec.out = "/elsewhere";
    spec.threads = 7;
    CHECK(spec_header(spec, "train") == header);
}

TEST_CASE("budgets") {
    CHECK(budget_for(0.01, 2708) == 27);
    CHECK(budget_for(0.005, 2708) == 13);
    CHECK(budget_for(0.1, 2708) == 270);
    CHECK(budget_for(0.07, 100) == 7);
    CHECK(budget_for(1.0, 50) == 50);
    CHECK_THROWS_AS(budget_for(0.001, 100), std::invalid_argument);
    CHECK_THROWS_AS(budget_for(0.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(budget_for(1.5, 100), std::invalid_argument);
}

TEST_CASE("protocol") {
    const auto p = make_protocol(500, 100, 3);
    CHECK(p.test_nodes.size() == 100);
    CHECK(std::is_sorted(p.test_nodes.begin(), p.test_nodes.end()));
    CHECK(std::set<NodeId>(p.test_nodes.begin(), p.test_nodes.end()).size() == 100);
    std::size_t pool = 0;
    for (NodeId v = 0; v < 500; ++v) {
        const bool in_test = std::binary_search(p.test_nodes.begin(), p.test_nodes.end(), v);
        CHECK(p.label_pool[static_cast<std::size_t>(v)] == (in_test ? 0 : 1));
        pool += p.label_pool[static_cast<std::size_t>(v)];
    }
    CHECK(pool == 400);
    CHECK(make_protocol(500, 100, 3).test_nodes == p.test_nodes);
    CHECK(make_protocol(500, 100, 4).test_nodes != p.test_nodes);
    CHECK_THROWS_AS(make_protocol(10, 10, 0), std::invalid_argument);
}

TEST_CASE("aggregation") {
    std::vector<RunResult> results(5);
    const double accs[] = {0.5, 0.7, 0.9, 0.4, 0.4};
    for (std::size_t i = 0; i < 5; ++i) {
        results[i].spec.method = i < 3 ? "GCN" : "SS-GCN";
        results[i].spec.ratio = 0.1;
        results[i].report.test_accuracy = accs[i];
    }
    const auto rows = aggregate_accuracy(results);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].label == "GCN");
    CHECK(rows[0].mean == doctest::Approx(0.7));
    CHECK(rows[0].stddev == doctest::Approx(0.2));
    CHECK(rows[0].runs == 3);
    CHECK(rows[1].stddev == 0.0);
}

TEST_CASE("parallel_for") {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i));
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 6) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("synthetic stand-in") {
    const auto a = generate_synthetic_citation(SyntheticSpec{});
    CHECK(a.graph.num_nodes() == 2708);
    CHECK(a.graph.num_edges() == 5278);
    CHECK(a.features.cols() == 1433);
    CHECK(a.labels.num_classes == 7);
    std::vector<int> sizes(7, 0);
    for (int id : a.labels.ids) ++sizes[static_cast<std::size_t>(id)];
    std::sort(sizes.rbegin(), sizes.rend());
    CHECK(sizes == std::vector<int>{818, 426, 418, 351, 298, 217, 180});
    CHECK((a.features.array() * (a.features.array() - 1.0)).isZero(0.0));
    for (NodeId v = 0; v < a.graph.num_nodes(); ++v) CHECK(a.graph.degree(v) >= 1);

    const auto comp = connected_components(a.graph);
    std::vector<int> comp_sizes(static_cast<std::size_t>(count_components(comp)), 0);
    for (int c : comp) ++comp_sizes[static_cast<std::size_t>(c)];
    CHECK(*std::max_element(comp_sizes.begin(), comp_sizes.end()) == 2485);

    std::int64_t same = 0;
    for (NodeId u = 0; u < a.graph.num_nodes(); ++u)
        for (NodeId v : a.graph.neighbors(u)) same += a.labels[u] == a.labels[v];
    CHECK(static_cast<double>(same) / (2.0 * 5278.0) == doctest::Approx(0.72).epsilon(0.05));

    const auto b = generate_synthetic_citation(SyntheticSpec{});
    CHECK(a.graph == b.graph);
    CHECK(a.features == b.features);
    CHECK(a.raw_ids == b.raw_ids);
    SyntheticSpec other;
    other.seed = 1;
    CHECK(!(generate_synthetic_citation(other).graph == a.graph));

    SyntheticSpec bad;
    bad.edges = 10;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("dataset resolution") {
    testutil::TempDir dir("resolve");
    const auto root = write_mini(dir);
    const auto data = resolve_dataset(root.string());
    CHECK(data.name == "mini");
    CHECK(data.graph.num_nodes() == 150);
    // Row-normalized on load.
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
        const double s = data.features.row(i).sum();
        CHECK((s == 0.0 || std::abs(s - 1.0) <= 1e-12));
    }
    CHECK(resolve_dataset("synthetic-cora:3").graph.num_nodes() == 2708);
    CHECK_THROWS_AS(resolve_dataset("synthetic-cora:x"), DataError);
    CHECK_THROWS_AS(resolve_dataset("synthetic-corax"), DataError);
    CHECK_THROWS_AS(resolve_dataset((dir.path() / "missing").string()), DataError);
    std::filesystem::create_directories(dir.path() / "empty");
    CHECK_THROWS_AS(resolve_dataset((dir.path() / "empty").string()), DataError);
}

TEST_CASE("training runs keep splits disjoint") {
    testutil::TempDir dir("runs");
    const auto spec = mini_experiment(write_mini(dir), dir.path() / "out");
    const auto data = resolve_dataset(spec.dataset);
    const auto input = prepare_input(symmetric_normalize(data.graph), data.features);
    const auto protocol = make_protocol(data.graph.num_nodes(), spec.test_size, spec.seed);
    for (auto strategy : {Strategy::uniform, Strategy::single_walk, Strategy::frontier, Strategy::bfs, Strategy::dfs}) {
        const auto r = run_training(spec, data, input, protocol, {"x", strategy, true, 2, 0.3, 1});
        CHECK(r.budget == 45);
        CHECK(r.seed == 1);
        CHECK(r.sample.size() == 45);
        for (NodeId v : r.sample.nodes) CHECK(protocol.label_pool[static_cast<std::size_t>(v)] == 1);
        CHECK(r.report.test_accuracy >= 0.0);
        CHECK(r.report.test_accuracy <= 1.0);
        CHECK(r.report.params.actual < r.report.params.dense_equivalent);
    }
}

TEST_CASE("commands write deterministic outputs") {
    testutil::TempDir dir("commands");
    const auto data = write_mini(dir);
    auto spec = mini_experiment(data, dir.path() / "a");
    spec.reports = true;
    auto twin = spec;
    twin.out = dir.path() / "b";
    twin.threads = 3;

    SUBCASE("train") {
        const auto grid = cmd_train(spec);
        CHECK(grid.runs.size() == 8);
        REQUIRE(grid.rows.size() == 4);
        CHECK(grid.rows[0].label == "GCN");
        CHECK(grid.rows[3].label == "SS-GCN");
        CHECK(grid.rows[3].budget == 45);
        cmd_train(twin);
        for (const char* f : {"train_grid.csv", "train_grid_runs.csv"})
            CHECK(slurp(spec.out / f) == slurp(twin.out / f));
        CHECK(slurp(spec.out / "train_grid.csv").find("method,ratio,budget,mean_acc,std_acc,runs\nGCN,0.1,15,") !=
              std::string::npos);
        CHECK(std::filesystem::exists(spec.out / "train_grid_timings.csv"));
        CHECK(std::filesystem::exists(spec.out / "reports" / "SS-GCN_r0.3_s1.csv"));
    }
    SUBCASE("sample") {
        spec.strategies = {Strategy::frontier, Strategy::bfs};
        const auto files = cmd_sample(spec);
        CHECK(files.size() == 8);
        CHECK(files.front().filename() == "sample_frontier_B15_s0.csv");
        std::ifstream in(files.front());
        const auto s = read_sample_csv(in);
        CHECK(s.size() == 15);
    }
    SUBCASE("density") {
        spec.trials = 30;
        const auto reports = cmd_density(spec);
        REQUIRE(reports.size() == 2);
        CHECK(reports[0].rows.size() == 3);
        cmd_density(twin);
        CHECK(slurp(spec.out / "density_summary.csv") == slurp(twin.out / "density_summary.csv"));
        CHECK(std::filesystem::exists(spec.out / "density_trials_B45.csv"));
        spec.strategies = {Strategy::dfs};
        CHECK_THROWS_AS(cmd_density(spec), std::invalid_argument);
    }
    SUBCASE("compare samplers") {
        spec.ratios = {0.2};
        spec.repeats = 1;
        const auto grid = cmd_compare_samplers(spec);
        REQUIRE(grid.rows.size() == 5);
        CHECK(grid.rows[0].label == "frontier");
        CHECK(grid.rows[4].label == "bfs");
    }
    SUBCASE("compress report") {
        const auto rows = cmd_compress_report(spec);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].label == "dense");
        CHECK(rows[0].acc_delta == 0.0);
        CHECK(rows[1].label == "tt-r2");
        CHECK(rows[1].params < rows[2].params);
        CHECK(rows[1].ratio == doctest::Approx(static_cast<double>(rows[1].dense_params) / rows[1].params));
        cmd_compress_report(twin);
        CHECK(slurp(spec.out / "compress_report.csv") == slurp(twin.out / "compress_report.csv"));
    }
    SUBCASE("summarize") {
        const auto s = cmd_summarize(spec);
        CHECK(s.n == 150);
        CHECK(s.k == 3);
        CHECK(s.f == 120);
        CHECK(std::filesystem::exists(spec.out / "summary.csv"));
    }
}
