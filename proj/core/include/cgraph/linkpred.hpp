#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cgraph/graph.hpp"
#include "cgraph/graph_io.hpp"

namespace cgraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Concept embeddings sharing one dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  /// Throws DimensionMismatch on a wrong length, InvalidArgument on
  /// non-finite entries.
  void set(ConceptId id, Vector vector);

  bool contains(ConceptId id) const { return vectors_.contains(id); }
  const Vector& at(ConceptId id) const;
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  std::vector<ConceptId> ids() const;

  /// Rows in the given order. Throws MissingEmbedding.
  Matrix stack(const std::vector<ConceptId>& ordering) const;

 private:
  std::size_t dim_ = 0;
  std::map<ConceptId, Vector> vectors_;
};

/// JSON Lines `{"concept": name, "vector": [...]}`; names resolve through the graph.
EmbeddingTable read_embeddings(std::istream& in, const ConceptGraph& graph);
EmbeddingTable load_embeddings(const std::filesystem::path& path, const ConceptGraph& graph);
std::string embedding_line(std::string_view concept_name, const Vector& vector);

/// D^-1/2 A D^-1/2 with D_ii = sum_j A_ij, computed on A + I when
/// `add_self_loops`. Zero-degree rows and columns stay zero.
Matrix normalize_adjacency(const Matrix& adjacency, bool add_self_loops);
Matrix to_dense(const AdjacencyMatrix& adjacency);

struct GcnShape {
  std::size_t input_dim = 0;
  std::size_t projection_dim = 256;
  std::vector<std::size_t> layer_dims{128};
};

/// Linear projection, then ReLU graph-convolution layers, then a bilinear
/// scoring matrix: score(i, j) = sigmoid(h_i^T R h_j).
struct GcnModel {
  Matrix projection;            // input_dim x projection_dim
  std::vector<Matrix> layers;   // chained widths, last one = output_dim
  Matrix scoring;               // output_dim x output_dim
  bool add_self_loops = true;

  /// Uniform in [-scale, scale], filled projection, layers, scoring in
  /// row-major order from one seeded stream.
  static GcnModel initialize(const GcnShape& shape, std::uint64_t seed, double scale = 0.05);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(projection.rows()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(scoring.rows()); }
  std::size_t parameter_count() const;

  /// Throws DimensionMismatch on a broken chain, InvalidArgument on non-finite values.
  void validate() const;
};

/// Node representations after the last layer. Throws DimensionMismatch.
Matrix gcn_forward(const GcnModel& model, const Matrix& features, const Matrix& normalized_adjacency);

/// sigmoid(X̂ R X̂^T); entry (i, j) is the probability of edge i -> j.
Matrix score_edges(const GcnModel& model, const Matrix& node_repr);

/// Labelled pair by row index into the feature matrix.
struct IndexedPair {
  std::size_t source = 0;
  std::size_t target = 0;
  double label = 0.0;
};

struct GcnGradients {
  Matrix projection;
  std::vector<Matrix> layers;
  Matrix scoring;
};

/// Mean binary cross-entropy of the edge scores over `pairs`. When `grads` is
/// non-null it receives the analytic gradient of that loss.
double gcn_loss(const GcnModel& model, const Matrix& features, const Matrix& normalized_adjacency,
                const std::vector<IndexedPair>& pairs, GcnGradients* grads = nullptr);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  double negative_ratio = 1.0;
  double edge_threshold = 0.5;
  double momentum = 0.0;
  double init_scale = 0.05;
  bool add_self_loops = true;
  std::size_t projection_dim = 256;
  std::vector<std::size_t> layer_dims{128};

  void validate() const;
};

/// A trained GCN plus the message-passing graph it was trained on.
struct GcnPredictor {
  GcnModel model;
  std::vector<ConceptId> ordering;  // feature-matrix row order
  std::vector<Edge> message_edges;  // positive training pairs

  Matrix normalized_adjacency() const;
  /// Probability matrix over `ordering` using `embeddings` as features.
  Matrix score_all(const EmbeddingTable& embeddings) const;

  /// Versioned JSON, matrices row-major.
  std::string to_json() const;
  static GcnPredictor from_json(std::string_view json);
};

struct GcnTrainingResult {
  GcnPredictor predictor;
  std::vector<double> loss_history;  // epochs + 1 entries: before each update, then final
  std::vector<IndexedPair> training_pairs;
};

/// Full-batch gradient descent (optionally with momentum) on mean BCE. Nodes
/// are every concept in `embeddings`; message passing uses the positive
/// training pairs. When negatives fall short of negative_ratio * positives,
/// unlabelled pairs are drawn as extra negatives from the seed.
/// Throws MissingEmbedding or DegenerateLabels.
GcnTrainingResult train_gcn(const EmbeddingTable& embeddings, const std::vector<LabeledPair>& train,
                            const TrainConfig& config);

struct PairPrediction {
  ConceptId source;
  ConceptId target;
  double probability = 0.0;
  bool label = false;
};

std::vector<PairPrediction> predict_gcn(const GcnPredictor& predictor, const EmbeddingTable& embeddings,
                                        const std::vector<Edge>& pairs, double threshold = 0.5);

/// Logistic regression over [e_source; e_target].
struct ConcatClassifier {
  Vector weights;
  double bias = 0.0;

  double probability(const Vector& source, const Vector& target) const;
};

ConcatClassifier train_concat(const EmbeddingTable& embeddings, const std::vector<LabeledPair>& train,
                              const TrainConfig& config);

std::vector<PairPrediction> classify_concat(const EmbeddingTable& embeddings, const std::vector<LabeledPair>& train,
                                            const std::vector<Edge>& test_pairs, const TrainConfig& config);

}  // namespace cgraph
