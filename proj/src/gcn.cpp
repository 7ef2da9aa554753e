#include "ssgcn/gcn.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "ssgcn/errors.hpp"

namespace ssgcn {

// ---------------------------------------------------------------------------
// Layer

Layer::Layer(Matrix dense) : weights_(std::move(dense)) {}
Layer::Layer(TtCores<double> cores) : weights_(std::move(cores)) {}

Eigen::Index Layer::in_dim() const {
    return compressed() ? cores().layout().in_dim : dense().rows();
}

Eigen::Index Layer::out_dim() const {
    return compressed() ? cores().layout().out_dim : dense().cols();
}

Matrix Layer::apply(const Matrix& input, TtTape<double>* tape) const {
    if (compressed()) return tt_forward(cores(), input, tape);
    if (input.cols() != dense().rows()) throw std::invalid_argument("layer input width mismatch");
    return input * dense();
}

Matrix Layer::to_dense() const {
    if (!compressed()) return dense();
    const auto& layout = cores().layout();
    return tt_reconstruct_dense(cores()).topLeftCorner(layout.in_dim, layout.out_dim);
}

std::int64_t Layer::param_count() const {
    return compressed() ? cores().param_count() : static_cast<std::int64_t>(dense().size());
}

std::vector<Eigen::Map<Vector>> Layer::parameter_blocks() {
    std::vector<Eigen::Map<Vector>> blocks;
    if (compressed()) {
        auto& tt = cores();
        for (std::size_t k = 0; k < tt.num_cores(); ++k) blocks.emplace_back(tt.core(k).data(), tt.core(k).size());
    } else {
        blocks.emplace_back(dense().data(), dense().size());
    }
    return blocks;
}

// ---------------------------------------------------------------------------
// Model

void GcnModel::validate() const {
    if (layer1.in_dim() < 1 || layer1.out_dim() < 1 || layer2.out_dim() < 1)
        throw std::invalid_argument("GCN layers must be non-empty");
    if (layer1.out_dim() != layer2.in_dim())
        throw std::invalid_argument(
            fmt::format("layer widths do not chain: {} -> {}", layer1.out_dim(), layer2.in_dim()));
}

std::vector<Eigen::Map<Vector>> GcnModel::parameter_blocks() {
    auto blocks = layer1.parameter_blocks();
    for (auto& b : layer2.parameter_blocks()) blocks.push_back(b);
    return blocks;
}

namespace {

Layer make_layer(Eigen::Index in, Eigen::Index out, bool compress, const ModelOptions& options, Rng& rng) {
    if (compress) {
        TtCores<double> tt(plan_factorization(in, out, options.cores, options.tt_rank));
        glorot_init(tt, rng);
        return Layer(std::move(tt));
    }
    // Glorot uniform: U(-s, s), s = sqrt(6 / (in + out)).
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    Matrix w(in, out);
    for (Eigen::Index j = 0; j < out; ++j)
        for (Eigen::Index i = 0; i < in; ++i) w(i, j) = (2.0 * rng.uniform() - 1.0) * s;
    return Layer(std::move(w));
}

} // namespace

GcnModel make_model(Eigen::Index features, Eigen::Index classes, const ModelOptions& options, std::uint64_t seed) {
    if (features < 1 || classes < 1 || options.hidden < 1)
        throw std::invalid_argument("GCN dimensions must be positive");
    Rng rng(seed, Stream::init);
    GcnModel model;
    model.layer1 = make_layer(features, options.hidden, options.compress_layer1, options, rng);
    model.layer2 = make_layer(options.hidden, classes, options.compress_layer2, options, rng);
    model.validate();
    return model;
}

ParamCount count_parameters(const GcnModel& model) {
    model.validate();
    return {model.layer1.param_count() + model.layer2.param_count(),
            model.layer1.dense_equivalent() + model.layer2.dense_equivalent()};
}

// ---------------------------------------------------------------------------
// Forward / loss

GraphInput prepare_input(const NormalizedAdjacency& a_norm, const FeatureMatrix& x) {
    if (a_norm.rows() != x.rows())
        throw std::invalid_argument(fmt::format("adjacency has {} rows, features {}", a_norm.rows(), x.rows()));
    GraphInput input;
    input.adjacency = a_norm.matrix;
    input.propagated_features = a_norm.matrix * x;
    return input;
}

void softmax_rows(Matrix& logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
    }
}

Matrix gcn_forward(const GcnModel& model, const GraphInput& input, ForwardCache* cache) {
    if (input.propagated_features.cols() != model.features())
        throw std::invalid_argument(fmt::format("features have {} columns, model expects {}",
                                                input.propagated_features.cols(), model.features()));
    Matrix z1 = model.layer1.apply(input.propagated_features, cache ? &cache->tape1 : nullptr);
    Matrix ah1 = input.adjacency * z1.cwiseMax(0.0);
    Matrix probs = model.layer2.apply(ah1, cache ? &cache->tape2 : nullptr);
    softmax_rows(probs);
    if (cache) {
        cache->z1 = std::move(z1);
        cache->ah1 = std::move(ah1);
        cache->probs = probs;
    }
    return probs;
}

Matrix gcn_forward(const GcnModel& model, const NormalizedAdjacency& a_norm, const FeatureMatrix& x) {
    return gcn_forward(model, prepare_input(a_norm, x));
}

double cross_entropy(const Matrix& probs, const Labels& labels, std::span<const NodeId> rows) {
    if (rows.empty()) throw std::invalid_argument("cross entropy over an empty node set");
    double total = 0.0;
    for (NodeId v : rows) total -= std::log(std::max(probs(v, labels[v]), 1e-12));
    return total / static_cast<double>(rows.size());
}

int predicted_class(const Matrix& probs, NodeId row) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c)
        if (probs(row, c) > probs(row, best)) best = c;
    return static_cast<int>(best);
}

double accuracy(const Matrix& probs, const Labels& labels, std::span<const NodeId> rows) {
    if (rows.empty()) throw std::invalid_argument("accuracy over an empty node set");
    std::size_t hits = 0;
    for (NodeId v : rows) hits += predicted_class(probs, v) == labels[v] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

void append_layer_gradient(const Layer& layer, const Matrix& layer_input, const TtTape<double>& tape,
                           const Matrix& grad_out, std::vector<Vector>& out, Matrix* grad_input) {
    if (layer.compressed()) {
        auto g = tt_backward(layer.cores(), tape, grad_out, grad_input != nullptr);
        for (auto& core : g.cores) out.emplace_back(Eigen::Map<const Vector>(core.data(), core.size()));
        if (grad_input) *grad_input = std::move(g.input);
    } else {
        Matrix gw = layer_input.transpose() * grad_out;
        out.emplace_back(Eigen::Map<const Vector>(gw.data(), gw.size()));
        if (grad_input) *grad_input = grad_out * layer.dense().transpose();
    }
}

} // namespace

LossGradient loss_and_gradient(const GcnModel& model, const GraphInput& input, const Labels& labels,
                               std::span<const NodeId> train_rows, double weight_decay) {
    ForwardCache cache;
    LossGradient out;
    out.probs = gcn_forward(model, input, &cache);
    out.data_loss = cross_entropy(out.probs, labels, train_rows);

    Matrix d_logits = Matrix::Zero(out.probs.rows(), out.probs.cols());
    const double scale = 1.0 / static_cast<double>(train_rows.size());
    for (NodeId v : train_rows) {
        d_logits.row(v) += out.probs.row(v) * scale;
        d_logits(v, labels[v]) -= scale;
    }

    std::vector<Vector> layer2_grads;
    Matrix d_ah1;
    append_layer_gradient(model.layer2, cache.ah1, cache.tape2, d_logits, layer2_grads, &d_ah1);
    // A is symmetric, so A^T d_ah1 == A d_ah1.
    Matrix d_z1 = input.adjacency * d_ah1;
    d_z1.array() *= (cache.z1.array() > 0.0).cast<double>();
    append_layer_gradient(model.layer1, input.propagated_features, cache.tape1, d_z1, out.gradients, nullptr);
    for (auto& g : layer2_grads) out.gradients.push_back(std::move(g));

    double penalty = 0.0;
    auto blocks = const_cast<GcnModel&>(model).parameter_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        penalty += blocks[b].squaredNorm();
        out.gradients[b] += weight_decay * blocks[b];
    }
    out.loss = out.data_loss + 0.5 * weight_decay * penalty;
    return out;
}

void Adam::step(std::vector<Eigen::Map<Vector>>& params, const std::vector<Vector>& grads) {
    if (m_.empty()) {
        for (const auto& g : grads) {
            m_.push_back(Vector::Zero(g.size()));
            v_.push_back(Vector::Zero(g.size()));
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t b = 0; b < params.size(); ++b) {
        m_[b] = beta1_ * m_[b] + (1.0 - beta1_) * grads[b];
        v_[b] = beta2_ * v_[b] + (1.0 - beta2_) * grads[b].cwiseAbs2();
        params[b].array() -= lr_ * (m_[b].array() / c1) / ((v_[b].array() / c2).sqrt() + eps_);
    }
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (weight_decay < 0.0) throw std::invalid_argument("weight decay must be non-negative");
    if (patience < 0) throw std::invalid_argument("patience must be non-negative");
    if (validation_size && *validation_size < 0) throw std::invalid_argument("validation size must be non-negative");
}

std::optional<int> TrainReport::epochs_to_val_accuracy(double threshold) const {
    for (const auto& e : epochs)
        if (e.val_acc >= threshold) return e.epoch;
    return std::nullopt;
}

std::vector<double> TrainReport::best_val_loss_trace() const {
    std::vector<double> trace;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : epochs) {
        best = std::min(best, e.val_loss);
        trace.push_back(best);
    }
    return trace;
}

std::pair<std::vector<NodeId>, std::vector<NodeId>> split_validation(const SampleSet& sample, const TrainConfig& cfg) {
    const auto budget = static_cast<std::int64_t>(sample.nodes.size());
    std::int64_t val = cfg.validation_size ? *cfg.validation_size
                                           : (budget >= 200 ? 100 : (2 * budget + 9) / 10);  // ceil(0.2 B)
    val = std::clamp<std::int64_t>(val, 0, std::max<std::int64_t>(budget - 1, 0));

    std::vector<std::size_t> order(sample.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed, Stream::validation);
    rng.shuffle(order.begin(), order.end());

    std::vector<std::uint8_t> is_val(sample.nodes.size(), 0);
    for (std::int64_t i = 0; i < val; ++i) is_val[order[static_cast<std::size_t>(i)]] = 1;
    std::vector<NodeId> train_nodes, val_nodes;
    for (std::size_t i = 0; i < sample.nodes.size(); ++i)
        (is_val[i] ? val_nodes : train_nodes).push_back(sample.nodes[i]);
    return {std::move(train_nodes), std::move(val_nodes)};
}

TrainResult train(const GraphInput& input, const Labels& labels, const SampleSet& train_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.nodes.empty()) throw std::invalid_argument("empty training sample");
    const auto start = std::chrono::steady_clock::now();

    TrainResult result;
    std::tie(result.train_nodes, result.val_nodes) = split_validation(train_set, cfg);
    result.model = make_model(input.propagated_features.cols(), labels.num_classes, cfg.model, cfg.seed);
    result.report.config = cfg;

    GcnModel best = result.model;
    double best_acc = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    Adam optimizer(cfg.learning_rate);
    const bool has_val = !result.val_nodes.empty();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto lg = loss_and_gradient(result.model, input, labels, result.train_nodes, cfg.weight_decay);
        if (!std::isfinite(lg.loss)) throw NumericalError(epoch, "non-finite training loss");

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = lg.data_loss;
        rec.train_acc = accuracy(lg.probs, labels, result.train_nodes);
        if (has_val) {
            rec.val_acc = accuracy(lg.probs, labels, result.val_nodes);
            rec.val_loss = cross_entropy(lg.probs, labels, result.val_nodes);
        }
        result.report.epochs.push_back(rec);

        // The record describes the parameters before this epoch's update.
        const bool better_acc = rec.val_acc > best_acc + cfg.epsilon;
        const bool better_loss = rec.val_loss < best_loss - cfg.epsilon;
        if (!has_val || better_acc || (rec.val_acc >= best_acc - cfg.epsilon && better_loss)) {
            best = result.model;
            result.report.best_epoch = epoch;
        }
        if (!has_val || better_acc || better_loss) {
            best_acc = std::max(best_acc, rec.val_acc);
            best_loss = std::min(best_loss, rec.val_loss);
            since_improvement = 0;
        } else if (++since_improvement > cfg.patience) {
            result.report.early_stopped = true;
            break;
        }

        auto params = result.model.parameter_blocks();
        optimizer.step(params, lg.gradients);
    }

    result.model = std::move(best);
    result.report.params = count_parameters(result.model);
    result.report.train_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

TrainResult train(const Graph& g, const FeatureMatrix& x, const Labels& labels, const SampleSet& train_set,
                  const TrainConfig& cfg) {
    return train(prepare_input(symmetric_normalize(g), x), labels, train_set, cfg);
}

double evaluate_accuracy(const GcnModel& model, const GraphInput& input, const Labels& labels,
                         std::span<const NodeId> eval_set) {
    if (eval_set.empty()) throw std::invalid_argument("empty evaluation set");
    return accuracy(gcn_forward(model, input), labels, eval_set);
}

double evaluate_accuracy(const GcnModel& model, const NormalizedAdjacency& a_norm, const FeatureMatrix& x,
                         const Labels& labels, std::span<const NodeId> eval_set) {
    return evaluate_accuracy(model, prepare_input(a_norm, x), labels, eval_set);
}

// ---------------------------------------------------------------------------
// Serialization

void write_report_csv(const TrainReport& report, std::ostream& out, std::string_view header) {
    if (!header.empty()) out << header;
    const auto& c = report.config;
    out << "# optimizer=adam lr=" << format_double(c.learning_rate) << " weight_decay=" << format_double(c.weight_decay)
        << " hidden=" << c.model.hidden << " epochs=" << c.epochs << " patience=" << c.patience
        << " epsilon=" << format_double(c.epsilon) << " seed=" << c.seed
        << " compress_layer1=" << c.model.compress_layer1 << " compress_layer2=" << c.model.compress_layer2
        << " cores=" << c.model.cores << " tt_rank=" << c.model.tt_rank << '\n';
    out << "epoch,train_loss,train_acc,val_acc\n";
    for (const auto& e : report.epochs)
        out << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.train_acc) << ','
            << format_double(e.val_acc) << '\n';
    if (!report.epochs.empty()) {
        const auto& b = report.epochs[static_cast<std::size_t>(report.best_epoch)];
        out << "best," << format_double(b.train_loss) << ',' << format_double(b.train_acc) << ','
            << format_double(b.val_acc) << '\n';
    }
    out << "# best_epoch=" << report.best_epoch << " early_stopped=" << report.early_stopped
        << " test_acc=" << format_double(report.test_accuracy) << " params_actual=" << report.params.actual
        << " params_dense=" << report.params.dense_equivalent << '\n';
}

namespace {

void write_values(std::ostream& out, const double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) out << (i ? " " : "") << format_double(data[i]);
    out << '\n';
}

double read_value(std::istream& in) {
    std::string token;
    if (!(in >> token)) throw DataError("model checkpoint: truncated values");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw DataError("model checkpoint: bad value `" + token + "`");
    return value;
}

void write_layer(const Layer& layer, std::ostream& out) {
    if (layer.compressed()) {
        out << "layer tt\n";
        write_tt(layer.cores(), out);
    } else {
        const auto& w = layer.dense();
        out << "layer dense " << w.rows() << ' ' << w.cols() << '\n';
        write_values(out, w.data(), w.size());  // column-major
    }
}

Layer read_layer(std::istream& in) {
    std::string tag, kind;
    if (!(in >> tag >> kind) || tag != "layer") throw DataError("model checkpoint: expected layer");
    if (kind == "tt") return Layer(read_tt(in));
    if (kind != "dense") throw DataError("model checkpoint: unknown layer kind " + kind);
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 1 || cols < 1) throw DataError("model checkpoint: bad dense shape");
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = read_value(in);
    return Layer(std::move(w));
}

} // namespace

void write_model(const GcnModel& model, std::ostream& out) {
    out << "ssgcn-model 1\n";
    write_layer(model.layer1, out);
    write_layer(model.layer2, out);
}

GcnModel read_model(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "ssgcn-model" || version != 1)
        throw DataError("model checkpoint: bad magic/version");
    GcnModel model;
    model.layer1 = read_layer(in);
    model.layer2 = read_layer(in);
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model checkpoint: ") + e.what());
    }
    return model;
}

} // namespace ssgcn
