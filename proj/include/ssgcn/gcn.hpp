#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ssgcn/graph.hpp"
#include "ssgcn/sampling.hpp"
#include "ssgcn/tt.hpp"

namespace ssgcn {

/// One weight matrix, stored densely or as TT cores.
class Layer {
public:
    Layer() = default;
    explicit Layer(Matrix dense);
    explicit Layer(TtCores<double> cores);

    Eigen::Index in_dim() const;
    Eigen::Index out_dim() const;
    bool compressed() const noexcept { return std::holds_alternative<TtCores<double>>(weights_); }

    const Matrix& dense() const { return std::get<Matrix>(weights_); }
    Matrix& dense() { return std::get<Matrix>(weights_); }
    const TtCores<double>& cores() const { return std::get<TtCores<double>>(weights_); }
    TtCores<double>& cores() { return std::get<TtCores<double>>(weights_); }

    /// input * W (TT layers go through tt_forward).
    Matrix apply(const Matrix& input, TtTape<double>* tape = nullptr) const;
    /// The logical in_dim x out_dim weight matrix.
    Matrix to_dense() const;

    std::int64_t param_count() const;
    std::int64_t dense_equivalent() const { return in_dim() * out_dim(); }

    /// Views over every trainable block (one for dense, one per TT core).
    std::vector<Eigen::Map<Vector>> parameter_blocks();

private:
    std::variant<Matrix, TtCores<double>> weights_;
};

/// Two-layer GCN: softmax(A relu(A X W1) W2).
struct GcnModel {
    Layer layer1;  // f x h
    Layer layer2;  // h x k

    /// Throws std::invalid_argument on empty or mis-chained layers.
    void validate() const;
    Eigen::Index features() const { return layer1.in_dim(); }
    Eigen::Index hidden() const { return layer1.out_dim(); }
    Eigen::Index classes() const { return layer2.out_dim(); }

    std::vector<Eigen::Map<Vector>> parameter_blocks();
};

struct ModelOptions {
    Eigen::Index hidden = 16;
    bool compress_layer1 = true;
    bool compress_layer2 = false;
    int cores = 3;
    Eigen::Index tt_rank = 8;
};

/// Glorot-initialized model (uniform for dense layers, variance-matched
/// Gaussian cores for TT layers). Draws from Rng(seed, Stream::init).
GcnModel make_model(Eigen::Index features, Eigen::Index classes, const ModelOptions& options, std::uint64_t seed);

struct ParamCount {
    std::int64_t actual = 0;
    std::int64_t dense_equivalent = 0;

    double ratio() const { return actual ? static_cast<double>(dense_equivalent) / static_cast<double>(actual) : 0.0; }
};

ParamCount count_parameters(const GcnModel& model);

/// Normalized adjacency plus the constant first-layer input A * X.
struct GraphInput {
    SparseMatrix adjacency;
    Matrix propagated_features;
};

GraphInput prepare_input(const NormalizedAdjacency& a_norm, const FeatureMatrix& x);

struct ForwardCache {
    Matrix z1;        // A X W1
    Matrix ah1;       // A relu(z1)
    Matrix probs;
    TtTape<double> tape1;
    TtTape<double> tape2;
};

/// n x k class probabilities; every row sums to 1.
Matrix gcn_forward(const GcnModel& model, const GraphInput& input, ForwardCache* cache = nullptr);
Matrix gcn_forward(const GcnModel& model, const NormalizedAdjacency& a_norm, const FeatureMatrix& x);

void softmax_rows(Matrix& logits);

/// -mean over rows of log(max(p_true, 1e-12)). Throws on an empty row set.
double cross_entropy(const Matrix& probs, const Labels& labels, std::span<const NodeId> rows);

/// Argmax accuracy over rows, ties resolved to the lowest class id.
double accuracy(const Matrix& probs, const Labels& labels, std::span<const NodeId> rows);
int predicted_class(const Matrix& probs, NodeId row);

struct LossGradient {
    double loss = 0.0;       // cross entropy + (weight_decay / 2) * |theta|^2
    double data_loss = 0.0;  // cross entropy only
    Matrix probs;
    std::vector<Vector> gradients;  // same order as GcnModel::parameter_blocks
};

LossGradient loss_and_gradient(const GcnModel& model, const GraphInput& input, const Labels& labels,
                               std::span<const NodeId> train_rows, double weight_decay);

/// Adaptive moment estimation with bias correction.
class Adam {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<Eigen::Map<Vector>>& params, const std::vector<Vector>& grads);

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Vector> m_, v_;
};

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    int patience = 20;
    /// Minimum validation-accuracy gain that counts as improvement.
    double epsilon = 1e-4;
    std::uint64_t seed = 0;
    ModelOptions model;
    /// Validation nodes carved from the training sample. Unset: 100 when the
    /// budget is at least 200, otherwise ceil(0.2 * budget).
    std::optional<int> validation_size;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double val_loss = 0.0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;
    bool early_stopped = false;
    double test_accuracy = -1.0;  // filled in by the caller after evaluation
    double sample_ms = 0.0;
    double train_ms = 0.0;
    double eval_ms = 0.0;
    ParamCount params;
    TrainConfig config;

    /// First epoch whose validation accuracy reaches threshold.
    std::optional<int> epochs_to_val_accuracy(double threshold) const;
    /// Running minimum of validation loss, one entry per epoch.
    std::vector<double> best_val_loss_trace() const;
};

struct TrainResult {
    GcnModel model;
    TrainReport report;
    std::vector<NodeId> train_nodes;
    std::vector<NodeId> val_nodes;
};

/// Splits a sample into (train, validation) with Rng(seed, Stream::validation);
/// both keep the sample's order.
std::pair<std::vector<NodeId>, std::vector<NodeId>> split_validation(const SampleSet& sample, const TrainConfig& cfg);

/// Full-graph transductive training with the loss restricted to training rows.
/// Early stopping watches validation accuracy (ties broken by validation
/// loss) and the best-validation snapshot is returned. Throws NumericalError
/// if the loss becomes non-finite.
TrainResult train(const GraphInput& input, const Labels& labels, const SampleSet& train_set, const TrainConfig& cfg);
TrainResult train(const Graph& g, const FeatureMatrix& x, const Labels& labels, const SampleSet& train_set,
                  const TrainConfig& cfg);

double evaluate_accuracy(const GcnModel& model, const GraphInput& input, const Labels& labels,
                         std::span<const NodeId> eval_set);
double evaluate_accuracy(const GcnModel& model, const NormalizedAdjacency& a_norm, const FeatureMatrix& x,
                         const Labels& labels, std::span<const NodeId> eval_set);

/// `epoch,train_loss,train_acc,val_acc` rows, a `best,...` summary row and
/// `#` footer lines with test accuracy and parameter counts.
void write_report_csv(const TrainReport& report, std::ostream& out, std::string_view header = {});

void write_model(const GcnModel& model, std::ostream& out);
GcnModel read_model(std::istream& in);

} // namespace ssgcn
