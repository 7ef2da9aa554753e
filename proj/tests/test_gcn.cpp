#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ssgcn/errors.hpp"
#include "ssgcn/gcn.hpp"
#include "test_util.hpp"

using namespace ssgcn;

namespace {

Labels make_labels(std::vector<int> ids, int k) {
    Labels l;
    l.ids = std::move(ids);
    l.num_classes = k;
    return l;
}

SampleSet as_sample(std::vector<NodeId> nodes) {
    SampleSet s;
    s.budget = static_cast<std::int64_t>(nodes.size());
    s.pi.assign(nodes.size(), 1.0);
    s.nodes = std::move(nodes);
    return s;
}

Matrix random_features(Eigen::Index n, Eigen::Index f, std::uint64_t seed) {
    Rng rng(seed, Stream::synthetic);
    Matrix x(n, f);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    return x;
}

std::vector<int> random_classes(NodeId n, int k, std::uint64_t seed) {
    Rng rng(seed, Stream::synthetic);
    std::vector<int> ids(static_cast<std::size_t>(n));
    for (auto& id : ids) id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k)));
    return ids;
}

std::vector<NodeId> all_nodes(NodeId n) {
    std::vector<NodeId> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

// Loss as a function of the parameters, for finite differences.
double total_loss(const GcnModel& model, const GraphInput& input, const Labels& labels,
                  std::span<const NodeId> rows, double wd) {
    double norm = 0.0;
    auto copy = model;
    for (auto& block : copy.parameter_blocks()) norm += block.squaredNorm();
    return cross_entropy(gcn_forward(model, input), labels, rows) + 0.5 * wd * norm;
}

void check_gradient(GcnModel model, const GraphInput& input, const Labels& labels, std::span<const NodeId> rows) {
    const double wd = 5e-3;
    const auto lg = loss_and_gradient(model, input, labels, rows, wd);
    CHECK(lg.loss == doctest::Approx(total_loss(model, input, labels, rows, wd)).epsilon(1e-12));
    auto blocks = model.parameter_blocks();
    REQUIRE(blocks.size() == lg.gradients.size());
    const double step = 1e-6;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        Vector numeric(blocks[b].size());
        for (Eigen::Index i = 0; i < blocks[b].size(); ++i) {
            const double saved = blocks[b](i);
            blocks[b](i) = saved + step;
            const double up = total_loss(model, input, labels, rows, wd);
            blocks[b](i) = saved - step;
            const double down = total_loss(model, input, labels, rows, wd);
            blocks[b](i) = saved;
            numeric(i) = (up - down) / (2 * step);
        }
        CAPTURE(b);
        CHECK((lg.gradients[b] - numeric).norm() <= 1e-4 * numeric.norm());
    }
}

// Plain gradient-descent logistic regression on rows of `features`.
Vector fit_logistic(const Matrix& features, const std::vector<NodeId>& rows, const std::vector<double>& targets) {
    Vector w = Vector::Zero(features.cols() + 1);
    for (int it = 0; it < 5000; ++it) {
        Vector grad = Vector::Zero(w.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Vector x = features.row(rows[i]).transpose();
            const double z = x.dot(w.head(x.size())) + w(x.size());
            const double err = 1.0 / (1.0 + std::exp(-z)) - targets[i];
            grad.head(x.size()) += err * x;
            grad(x.size()) += err;
        }
        w -= 0.5 * grad;
    }
    return w;
}

}  // namespace

TEST_CASE("cross entropy values") {
    const auto labels = make_labels({0, 3, 6}, 7);
    const std::vector<NodeId> rows{0, 1, 2};
    Matrix uniform = Matrix::Constant(3, 7, 1.0 / 7.0);
    CHECK(cross_entropy(uniform, labels, rows) == doctest::Approx(std::log(7.0)).epsilon(1e-14));

    Matrix perfect = Matrix::Zero(3, 7);
    for (int i = 0; i < 3; ++i) perfect(i, labels.ids[static_cast<std::size_t>(i)]) = 1.0;
    CHECK(cross_entropy(perfect, labels, rows) <= 1e-10);
    CHECK(accuracy(perfect, labels, rows) == 1.0);

    Matrix half = Matrix::Zero(1, 2);
    half << 0.5, 0.5;
    const auto two = make_labels({1}, 2);
    const std::vector<NodeId> one{0};
    CHECK(cross_entropy(half, two, one) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // Ties go to the lowest class id.
    CHECK(predicted_class(half, 0) == 0);
    CHECK(accuracy(half, two, one) == 0.0);

    Matrix zero_true = Matrix::Zero(1, 2);
    zero_true << 1.0, 0.0;
    CHECK(cross_entropy(zero_true, two, one) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy(half, two, {}), std::invalid_argument);
    CHECK_THROWS_AS(accuracy(half, two, {}), std::invalid_argument);
}

TEST_CASE("softmax rows") {
    Matrix logits = random_features(50, 7, 1) * 40.0;
    logits(0, 0) = 800.0;  // would overflow a naive exp
    softmax_rows(logits);
    CHECK(logits.allFinite());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) CHECK(std::abs(logits.row(i).sum() - 1.0) <= 1e-12);
    CHECK(logits(0, 0) == 1.0);
}

TEST_CASE("single node with equal logits") {
    const auto g = Graph::from_edges(1, {});
    GcnModel model{Layer(Matrix::Ones(1, 1)), Layer(Matrix::Constant(1, 2, 0.3))};
    const auto probs = gcn_forward(model, symmetric_normalize(g), Matrix::Ones(1, 1));
    CHECK(probs(0, 0) == 0.5);
    CHECK(probs(0, 1) == 0.5);
}

TEST_CASE("forward output rows sum to one") {
    const auto g = testutil::random_graph(40, 0.1, 3);
    const auto x = random_features(40, 30, 3);
    for (bool compress : {false, true}) {
        const auto model = make_model(30, 5, {8, compress, false, 3, 4}, 9);
        const auto probs = gcn_forward(model, symmetric_normalize(g), x);
        REQUIRE(probs.rows() == 40);
        for (Eigen::Index i = 0; i < probs.rows(); ++i) CHECK(std::abs(probs.row(i).sum() - 1.0) <= 1e-12);
    }
    const auto model = make_model(31, 5, {}, 0);
    CHECK_THROWS_AS(gcn_forward(model, symmetric_normalize(g), x), std::invalid_argument);
    CHECK_THROWS_AS(prepare_input(symmetric_normalize(g), random_features(39, 30, 1)), std::invalid_argument);
}

TEST_CASE("parameter counts") {
    const auto dense = count_parameters(make_model(1433, 7, {16, false, false, 3, 8}, 0));
    CHECK(dense.actual == 23040);
    CHECK(dense.dense_equivalent == 23040);
    const auto tt = count_parameters(make_model(1433, 7, {16, true, false, 3, 8}, 0));
    CHECK(tt.actual == 2192);
    CHECK(tt.dense_equivalent == 23040);
    CHECK(tt.ratio() == doctest::Approx(10.51).epsilon(1e-3));

    GcnModel empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    GcnModel mismatched{Layer(Matrix::Ones(4, 3)), Layer(Matrix::Ones(2, 2))};
    CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_model(0, 7, {}, 0), std::invalid_argument);
}

TEST_CASE("compressed and reconstructed dense models agree") {
    const auto g = testutil::random_graph(60, 0.08, 5);
    const auto input = prepare_input(symmetric_normalize(g), random_features(60, 50, 5));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto tt = make_model(50, 4, {16, true, true, 3, 4}, seed);
        REQUIRE(tt.layer1.compressed());
        REQUIRE(tt.layer2.compressed());
        const GcnModel dense{Layer(tt.layer1.to_dense()), Layer(tt.layer2.to_dense())};
        CHECK((gcn_forward(tt, input) - gcn_forward(dense, input)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("full model gradient matches finite differences") {
    const auto g = testutil::random_graph(10, 0.35, 8, true);
    const auto input = prepare_input(symmetric_normalize(g), random_features(10, 8, 8));
    const auto labels = make_labels(random_classes(10, 3, 8), 3);
    const std::vector<NodeId> rows{0, 2, 3, 5, 7, 8};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CAPTURE(seed);
        check_gradient(make_model(8, 3, {5, false, false, 3, 2}, seed), input, labels, rows);
        check_gradient(make_model(8, 3, {5, true, false, 3, 2}, seed), input, labels, rows);
        check_gradient(make_model(8, 3, {4, true, true, 2, 3}, seed), input, labels, rows);
    }
}

TEST_CASE("adam first step") {
    Vector theta(3);
    theta << 1.0, -2.0, 0.5;
    std::vector<Eigen::Map<Vector>> params{Eigen::Map<Vector>(theta.data(), 3)};
    Vector g(3);
    g << 0.3, -4.0, 1e-3;
    Adam adam(0.01);
    adam.step(params, {g});
    // Bias correction makes the first step lr * g / (|g| + eps).
    CHECK(theta(0) == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
    CHECK(theta(1) == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
    CHECK(theta(2) == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
}

TEST_CASE("validation split") {
    std::vector<NodeId> nodes;
    for (NodeId v = 0; v < 250; ++v) nodes.push_back(3 * v);
    const auto big = as_sample(nodes);
    TrainConfig cfg;
    auto [train_nodes, val_nodes] = split_validation(big, cfg);
    CHECK(val_nodes.size() == 100);
    CHECK(train_nodes.size() == 150);
    CHECK(std::is_sorted(train_nodes.begin(), train_nodes.end()));
    CHECK(std::is_sorted(val_nodes.begin(), val_nodes.end()));
    std::vector<NodeId> both = train_nodes;
    both.insert(both.end(), val_nodes.begin(), val_nodes.end());
    std::sort(both.begin(), both.end());
    CHECK(both == nodes);

    CHECK(split_validation(as_sample({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}), cfg).second.size() == 3);
    CHECK(split_validation(as_sample({4}), cfg).second.empty());
    cfg.validation_size = 0;
    CHECK(split_validation(big, cfg).second.empty());
    cfg.validation_size = 1000;
    CHECK(split_validation(big, cfg).first.size() == 1);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    const auto g = testutil::two_triangles();
    const Matrix x = Matrix::Identity(6, 6);
    const auto labels = make_labels({0, 0, 0, 1, 1, 1}, 2);
    CHECK_THROWS_AS(train(g, x, labels, as_sample({0, 5}), cfg), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = TrainConfig{};
    cfg.patience = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(train(g, x, labels, as_sample({}), TrainConfig{}), std::invalid_argument);
}

TEST_CASE("two-cluster toy graph") {
    const auto g = testutil::two_triangles();
    const Matrix x = Matrix::Identity(6, 6);
    const auto labels = make_labels({0, 0, 0, 1, 1, 1}, 2);
    const std::vector<NodeId> test{1, 2, 3, 4};
    const auto input = prepare_input(symmetric_normalize(g), x);

    // A logistic fit on the propagated features separates the held-out nodes.
    const Vector w = fit_logistic(input.propagated_features, {0, 5}, {0.0, 1.0});
    for (NodeId v : test) {
        const double z = input.propagated_features.row(v).dot(w.head(6)) + w(6);
        CHECK((z > 0.0) == (labels[v] == 1));
    }

    TrainConfig cfg;
    cfg.validation_size = 0;
    cfg.model.compress_layer1 = false;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        cfg.epochs = 200;
        const auto result = train(input, labels, as_sample({0, 5}), cfg);
        CHECK(result.train_nodes.size() == 2);
        CHECK(evaluate_accuracy(result.model, input, labels, test) == 1.0);
        CHECK(evaluate_accuracy(result.model, input, labels, std::vector<NodeId>{0, 5}) == 1.0);

        cfg.epochs = 10;
        const auto short_run = train(input, labels, as_sample({0, 5}), cfg);
        for (std::size_t e = 1; e < short_run.report.epochs.size(); ++e)
            CHECK(short_run.report.epochs[e].train_loss <= short_run.report.epochs[e - 1].train_loss);
    }
}

TEST_CASE("permutation equivariance") {
    const NodeId n = 30;
    const auto g = testutil::random_graph(n, 0.15, 12, true);
    const auto x = random_features(n, 12, 12);
    const auto labels = make_labels(random_classes(n, 3, 12), 3);

    std::vector<NodeId> perm = all_nodes(n);  // new id of node v
    Rng rng(4, Stream::shuffle);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<WeightedEdge> edges;
    for (NodeId u = 0; u < n; ++u) {
        const auto nb = g.neighbors(u);
        const auto wt = g.neighbor_weights(u);
        for (std::size_t i = 0; i < nb.size(); ++i) edges.push_back({perm[u], perm[nb[i]], wt[i]});
    }
    const auto pg = Graph::from_edges(n, edges);
    Matrix px(n, x.cols());
    std::vector<int> pids(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        px.row(perm[v]) = x.row(v);
        pids[static_cast<std::size_t>(perm[v])] = labels[v];
    }
    const auto plabels = make_labels(pids, 3);

    const std::vector<NodeId> train_nodes{0, 3, 4, 9, 11, 17, 20, 21, 25, 28};
    std::vector<NodeId> ptrain;
    for (NodeId v : train_nodes) ptrain.push_back(perm[v]);

    for (bool compress : {false, true}) {
        TrainConfig cfg;
        cfg.epochs = 30;
        cfg.model = {6, compress, false, 2, 3};
        cfg.seed = 2;
        const auto a = train(g, x, labels, as_sample(train_nodes), cfg);
        const auto b = train(pg, px, plabels, as_sample(ptrain), cfg);
        const auto pa = gcn_forward(a.model, symmetric_normalize(g), x);
        const auto pb = gcn_forward(b.model, symmetric_normalize(pg), px);
        for (NodeId v = 0; v < n; ++v) {
            CHECK((pa.row(v) - pb.row(perm[v])).cwiseAbs().maxCoeff() <= 1e-9);
            CHECK(predicted_class(pa, v) == predicted_class(pb, perm[v]));
        }
    }
}

TEST_CASE("untrained model is at chance level") {
    const NodeId n = 2000;
    const auto g = testutil::random_graph(n, 0.003, 21);
    const auto labels = make_labels(random_classes(n, 7, 21), 7);
    const auto model = make_model(40, 7, {}, 21);
    const double acc = evaluate_accuracy(model, symmetric_normalize(g), random_features(n, 40, 22), labels, all_nodes(n));
    CHECK(std::abs(acc - 1.0 / 7.0) <= 0.04);

    const auto one = evaluate_accuracy(model, symmetric_normalize(g), random_features(n, 40, 22), labels,
                                       std::vector<NodeId>{17});
    CHECK((one == 0.0 || one == 1.0));
    CHECK_THROWS_AS(evaluate_accuracy(model, symmetric_normalize(g), random_features(n, 40, 22), labels, {}),
                    std::invalid_argument);
}

TEST_CASE("divergence is reported with its epoch") {
    const auto g = testutil::two_triangles();
    const auto labels = make_labels({0, 0, 0, 1, 1, 1}, 2);
    TrainConfig cfg;
    cfg.learning_rate = 1e200;
    cfg.validation_size = 0;
    try {
        train(g, Matrix::Identity(6, 6), labels, as_sample({0, 5}), cfg);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.epoch() == 1);
    }
}

TEST_CASE("report csv and statistics") {
    TrainReport report;
    report.config.seed = 3;
    for (int e = 0; e < 4; ++e) report.epochs.push_back({e, 1.0 - 0.1 * e, 0.5, 0.25 * e, 2.0 - (e == 2 ? 1.5 : 0.1 * e)});
    report.best_epoch = 3;
    report.test_accuracy = 0.75;
    report.params = {2192, 23040};
    CHECK(report.epochs_to_val_accuracy(0.5) == 2);
    CHECK(!report.epochs_to_val_accuracy(0.9));
    CHECK(report.best_val_loss_trace() == std::vector<double>{2.0, 1.9, 0.5, 0.5});

    std::ostringstream out;
    write_report_csv(report, out, "# head\n");
    const auto text = out.str();
    CHECK(text.rfind("# head\n# optimizer=adam lr=0.01 weight_decay=5e-04 hidden=16", 0) == 0);
    CHECK(text.find("\nepoch,train_loss,train_acc,val_acc\n0,1,0.5,0\n1,0.9,0.5,0.25\n") != std::string::npos);
    CHECK(text.find("\nbest,0.7,0.5,0.75\n# best_epoch=3 early_stopped=0 test_acc=0.75 params_actual=2192 "
                    "params_dense=23040\n") != std::string::npos);
}

TEST_CASE("model checkpoint round trip") {
    const auto g = testutil::random_graph(25, 0.2, 30);
    const auto input = prepare_input(symmetric_normalize(g), random_features(25, 20, 30));
    for (bool compress : {false, true}) {
        const auto model = make_model(20, 4, {8, compress, false, 3, 4}, 30);
        std::stringstream buffer;
        write_model(model, buffer);
        const auto back = read_model(buffer);
        CHECK(back.layer1.compressed() == compress);
        CHECK(gcn_forward(back, input) == gcn_forward(model, input));
    }
    std::istringstream bad("ssgcn-model 1\nlayer dense 2 2\n1 2 3\n");
    CHECK_THROWS_AS(read_model(bad), DataError);
    std::istringstream chain("ssgcn-model 1\nlayer dense 2 2\n1 2 3 4\nlayer dense 3 1\n1 2 3\n");
    CHECK_THROWS_AS(read_model(chain), DataError);
}
