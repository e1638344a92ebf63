#include "cgraph/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <unordered_map>

#include "cgraph/error.hpp"
#include "cgraph/random.hpp"
#include "cgraph/text.hpp"
#include "json.hpp"

namespace cgraph {

using json = nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

[[noreturn]] void dimension_error(const std::string& what) { throw Error(ErrorCode::DimensionMismatch, what); }

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

struct ForwardCache {
  Matrix projected;
  std::vector<Matrix> propagated;  // A_norm * H_l
  std::vector<Matrix> pre;         // A_norm * H_l * W_l
  Matrix output;
};

ForwardCache forward(const GcnModel& model, const Matrix& features, const Matrix& adj) {
  if (features.cols() != model.projection.rows()) {
    dimension_error("features are " + shape(features) + " but projection is " + shape(model.projection));
  }
  if (adj.rows() != adj.cols() || adj.rows() != features.rows()) {
    dimension_error("adjacency " + shape(adj) + " does not match " + std::to_string(features.rows()) + " nodes");
  }
  ForwardCache cache;
  cache.projected = features * model.projection;
  Matrix h = cache.projected;
  for (const auto& w : model.layers) {
    if (h.cols() != w.rows()) dimension_error("layer input " + shape(h) + " vs weight " + shape(w));
    cache.propagated.push_back(adj * h);
    cache.pre.push_back(cache.propagated.back() * w);
    h = cache.pre.back().cwiseMax(0.0);
  }
  cache.output = std::move(h);
  return cache;
}

json matrix_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw Error(ErrorCode::Format, "matrix payload does not match its shape");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

void fill_uniform(Matrix& m, Rng& rng, double scale) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-scale, scale);
  }
}

struct LabelledRows {
  std::vector<IndexedPair> pairs;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

LabelledRows index_pairs(const std::vector<LabeledPair>& train,
                         const std::unordered_map<ConceptId, std::size_t>& row_of) {
  LabelledRows rows;
  for (const auto& p : train) {
    const auto s = row_of.find(p.source);
    const auto t = row_of.find(p.target);
    if (s == row_of.end() || t == row_of.end()) {
      throw Error(ErrorCode::MissingEmbedding, "no embedding for concept " +
                                                   to_string(s == row_of.end() ? p.source : p.target));
    }
    rows.pairs.push_back({s->second, t->second, p.label ? 1.0 : 0.0});
    ++(p.label ? rows.positives : rows.negatives);
  }
  if (rows.positives == 0 || rows.negatives == 0) {
    throw Error(ErrorCode::DegenerateLabels, "training needs at least one positive and one negative pair");
  }
  return rows;
}

void sgd_step(Matrix& param, Matrix& velocity, const Matrix& grad, const TrainConfig& config) {
  if (config.momentum > 0.0) {
    velocity = config.momentum * velocity - config.learning_rate * grad;
    param += velocity;
  } else {
    param -= config.learning_rate * grad;
  }
}

}  // namespace

void EmbeddingTable::set(ConceptId id, Vector vector) {
  if (dim_ == 0 && vectors_.empty()) dim_ = static_cast<std::size_t>(vector.size());
  if (static_cast<std::size_t>(vector.size()) != dim_ || dim_ == 0) {
    throw Error(ErrorCode::DimensionMismatch, "embedding for concept " + to_string(id) + " has length " +
                                                  std::to_string(vector.size()) + ", expected " +
                                                  std::to_string(dim_));
  }
  if (!vector.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "embedding for concept " + to_string(id) + " has non-finite entries");
  }
  vectors_[id] = std::move(vector);
}

const Vector& EmbeddingTable::at(ConceptId id) const {
  const auto it = vectors_.find(id);
  if (it == vectors_.end()) throw Error(ErrorCode::MissingEmbedding, "no embedding for concept " + to_string(id));
  return it->second;
}

std::vector<ConceptId> EmbeddingTable::ids() const {
  std::vector<ConceptId> out;
  out.reserve(vectors_.size());
  for (const auto& [id, v] : vectors_) out.push_back(id);
  return out;
}

Matrix EmbeddingTable::stack(const std::vector<ConceptId>& ordering) const {
  Matrix m(static_cast<Eigen::Index>(ordering.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < ordering.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = at(ordering[i]).transpose();
  return m;
}

EmbeddingTable read_embeddings(std::istream& in, const ConceptGraph& graph) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string name;
    std::vector<double> values;
    try {
      const auto obj = json::parse(line);
      name = obj.at("concept").get<std::string>();
      values = obj.at("vector").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Format, "embedding line " + std::to_string(line_no) + ": " + e.what());
    }
    table.set(graph.resolve(name), Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const ConceptGraph& graph) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_embeddings(in, graph);
}

std::string embedding_line(std::string_view concept_name, const Vector& vector) {
  const json obj = {{"concept", std::string(concept_name)},
                    {"vector", std::vector<double>(vector.data(), vector.data() + vector.size())}};
  return obj.dump();
}

Matrix normalize_adjacency(const Matrix& adjacency, bool add_self_loops) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorCode::NonSquare, "adjacency is " + shape(adjacency));
  }
  Matrix a = adjacency;
  if (add_self_loops) a += Matrix::Identity(a.rows(), a.cols());
  const Vector degree = a.rowwise().sum();
  Vector inv_sqrt(degree.size());
  for (Eigen::Index i = 0; i < degree.size(); ++i) inv_sqrt(i) = degree(i) > 0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

Matrix to_dense(const AdjacencyMatrix& adjacency) {
  const auto n = static_cast<Eigen::Index>(adjacency.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = adjacency(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return m;
}

GcnModel GcnModel::initialize(const GcnShape& shape, std::uint64_t seed, double scale) {
  if (shape.input_dim == 0 || shape.projection_dim == 0) {
    throw Error(ErrorCode::DimensionMismatch, "input and projection widths must be positive");
  }
  Rng rng(seed);
  GcnModel model;
  model.projection.resize(static_cast<Eigen::Index>(shape.input_dim), static_cast<Eigen::Index>(shape.projection_dim));
  fill_uniform(model.projection, rng, scale);
  auto width = shape.projection_dim;
  for (const auto next : shape.layer_dims) {
    if (next == 0) throw Error(ErrorCode::DimensionMismatch, "layer widths must be positive");
    Matrix w(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(next));
    fill_uniform(w, rng, scale);
    model.layers.push_back(std::move(w));
    width = next;
  }
  model.scoring.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width));
  fill_uniform(model.scoring, rng, scale);
  return model;
}

std::size_t GcnModel::parameter_count() const {
  auto n = static_cast<std::size_t>(projection.size() + scoring.size());
  for (const auto& w : layers) n += static_cast<std::size_t>(w.size());
  return n;
}

void GcnModel::validate() const {
  auto width = projection.cols();
  for (const auto& w : layers) {
    if (w.rows() != width) dimension_error("layer weight " + shape(w) + " does not follow width " + std::to_string(width));
    width = w.cols();
  }
  if (scoring.rows() != width || scoring.cols() != width) {
    dimension_error("scoring matrix " + shape(scoring) + " does not match width " + std::to_string(width));
  }
  bool finite = projection.allFinite() && scoring.allFinite();
  for (const auto& w : layers) finite = finite && w.allFinite();
  if (!finite) throw Error(ErrorCode::InvalidArgument, "model has non-finite parameters");
}

Matrix gcn_forward(const GcnModel& model, const Matrix& features, const Matrix& normalized_adjacency) {
  return forward(model, features, normalized_adjacency).output;
}

Matrix score_edges(const GcnModel& model, const Matrix& node_repr) {
  if (node_repr.cols() != model.scoring.rows()) {
    dimension_error("node representations are " + shape(node_repr) + " but scoring is " + shape(model.scoring));
  }
  Matrix logits = node_repr * model.scoring * node_repr.transpose();
  return logits.unaryExpr([](double x) { return sigmoid(x); });
}

double gcn_loss(const GcnModel& model, const Matrix& features, const Matrix& normalized_adjacency,
                const std::vector<IndexedPair>& pairs, GcnGradients* grads) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no labelled pairs");
  const auto cache = forward(model, features, normalized_adjacency);
  const Matrix& out = cache.output;
  if (out.cols() != model.scoring.rows()) dimension_error("output width does not match scoring matrix");
  const auto n = out.rows();
  const Matrix right = out * model.scoring.transpose();  // row j: (R h_j)^T

  const double inv_m = 1.0 / static_cast<double>(pairs.size());
  double loss = 0.0;
  Matrix g = Matrix::Zero(n, n);
  for (const auto& p : pairs) {
    const auto i = static_cast<Eigen::Index>(p.source);
    const auto j = static_cast<Eigen::Index>(p.target);
    if (i >= n || j >= n) throw Error(ErrorCode::InvalidArgument, "pair index out of range");
    const double s = out.row(i).dot(right.row(j));
    loss += softplus(s) - p.label * s;
    g(i, j) += (sigmoid(s) - p.label) * inv_m;
  }
  loss *= inv_m;
  if (!grads) return loss;

  grads->scoring = out.transpose() * g * out;
  Matrix d_h = g * out * model.scoring.transpose() + g.transpose() * out * model.scoring;
  grads->layers.assign(model.layers.size(), Matrix());
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const Matrix d_pre = d_h.cwiseProduct((cache.pre[l].array() > 0.0).cast<double>().matrix());
    grads->layers[l] = cache.propagated[l].transpose() * d_pre;
    d_h = normalized_adjacency.transpose() * (d_pre * model.layers[l].transpose());
  }
  grads->projection = features.transpose() * d_h;
  return loss;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be >= 0");
  if (epochs == 0) throw Error(ErrorCode::InvalidArgument, "epochs must be positive");
  if (!(negative_ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "negative_ratio must be positive");
  if (!(edge_threshold > 0.0 && edge_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "edge_threshold must lie in (0, 1)");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
}

Matrix GcnPredictor::normalized_adjacency() const {
  std::unordered_map<ConceptId, Eigen::Index> row_of;
  for (std::size_t i = 0; i < ordering.size(); ++i) row_of[ordering[i]] = static_cast<Eigen::Index>(i);
  const auto n = static_cast<Eigen::Index>(ordering.size());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [s, t] : message_edges) a(row_of.at(s), row_of.at(t)) = 1.0;
  return normalize_adjacency(a, model.add_self_loops);
}

Matrix GcnPredictor::score_all(const EmbeddingTable& embeddings) const {
  return score_edges(model, gcn_forward(model, embeddings.stack(ordering), normalized_adjacency()));
}

std::string GcnPredictor::to_json() const {
  json layers_json = json::array();
  for (const auto& w : model.layers) layers_json.push_back(matrix_json(w));
  json order = json::array();
  for (const auto id : ordering) order.push_back(id.value());
  json edges = json::array();
  for (const auto& [s, t] : message_edges) edges.push_back({s.value(), t.value()});
  const json root = {
      {"format", "cgraph-gcn"},
      {"version", kCheckpointVersion},
      {"activation", "relu"},
      {"add_self_loops", model.add_self_loops},
      {"ordering", std::move(order)},
      {"message_edges", std::move(edges)},
      {"projection", matrix_json(model.projection)},
      {"layers", std::move(layers_json)},
      {"scoring", matrix_json(model.scoring)},
  };
  return root.dump() + "\n";
}

GcnPredictor GcnPredictor::from_json(std::string_view text) {
  GcnPredictor p;
  try {
    const auto root = json::parse(text);
    if (root.value("format", "") != "cgraph-gcn") throw Error(ErrorCode::Format, "not a cgraph GCN checkpoint");
    if (root.value("version", 0) != kCheckpointVersion) throw Error(ErrorCode::Format, "unsupported checkpoint version");
    p.model.add_self_loops = root.at("add_self_loops").get<bool>();
    for (const auto& id : root.at("ordering")) p.ordering.emplace_back(id.get<std::int64_t>());
    for (const auto& e : root.at("message_edges")) {
      p.message_edges.emplace_back(ConceptId{e.at(0).get<std::int64_t>()}, ConceptId{e.at(1).get<std::int64_t>()});
    }
    p.model.projection = matrix_from_json(root.at("projection"));
    for (const auto& w : root.at("layers")) p.model.layers.push_back(matrix_from_json(w));
    p.model.scoring = matrix_from_json(root.at("scoring"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed checkpoint: ") + e.what());
  }
  p.model.validate();
  return p;
}

GcnTrainingResult train_gcn(const EmbeddingTable& embeddings, const std::vector<LabeledPair>& train,
                            const TrainConfig& config) {
  config.validate();
  GcnTrainingResult result;
  auto& predictor = result.predictor;
  predictor.ordering = embeddings.ids();
  std::unordered_map<ConceptId, std::size_t> row_of;
  for (std::size_t i = 0; i < predictor.ordering.size(); ++i) row_of[predictor.ordering[i]] = i;

  auto rows = index_pairs(train, row_of);

  const auto wanted = static_cast<std::size_t>(std::ceil(config.negative_ratio * static_cast<double>(rows.positives)));
  if (rows.negatives < wanted) {
    std::set<std::pair<std::size_t, std::size_t>> labelled;
    for (const auto& p : rows.pairs) labelled.insert({p.source, p.target});
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t i = 0; i < predictor.ordering.size(); ++i) {
      for (std::size_t j = 0; j < predictor.ordering.size(); ++j) {
        if (i != j && !labelled.contains({i, j})) pool.emplace_back(i, j);
      }
    }
    Rng rng(mix64(config.seed ^ 0x6e65676174697665ULL));
    rng.shuffle(pool);
    pool.resize(std::min(pool.size(), wanted - rows.negatives));
    std::sort(pool.begin(), pool.end());
    for (const auto& [i, j] : pool) rows.pairs.push_back({i, j, 0.0});
  }

  std::set<Edge> positive_edges;
  for (const auto& p : train) {
    if (p.label && p.source != p.target) positive_edges.insert({p.source, p.target});
  }
  predictor.message_edges.assign(positive_edges.begin(), positive_edges.end());

  GcnShape shape{embeddings.dim(), config.projection_dim, config.layer_dims};
  predictor.model = GcnModel::initialize(shape, config.seed, config.init_scale);
  predictor.model.add_self_loops = config.add_self_loops;

  const Matrix features = embeddings.stack(predictor.ordering);
  const Matrix adj = predictor.normalized_adjacency();
  auto& model = predictor.model;

  Matrix v_proj = Matrix::Zero(model.projection.rows(), model.projection.cols());
  Matrix v_score = Matrix::Zero(model.scoring.rows(), model.scoring.cols());
  std::vector<Matrix> v_layers;
  for (const auto& w : model.layers) v_layers.push_back(Matrix::Zero(w.rows(), w.cols()));

  GcnGradients grads;
  result.loss_history.reserve(config.epochs + 1);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    result.loss_history.push_back(gcn_loss(model, features, adj, rows.pairs, &grads));
    sgd_step(model.projection, v_proj, grads.projection, config);
    for (std::size_t l = 0; l < model.layers.size(); ++l) sgd_step(model.layers[l], v_layers[l], grads.layers[l], config);
    sgd_step(model.scoring, v_score, grads.scoring, config);
  }
  result.loss_history.push_back(gcn_loss(model, features, adj, rows.pairs));
  result.training_pairs = std::move(rows.pairs);
  return result;
}

std::vector<PairPrediction> predict_gcn(const GcnPredictor& predictor, const EmbeddingTable& embeddings,
                                        const std::vector<Edge>& pairs, double threshold) {
  std::unordered_map<ConceptId, Eigen::Index> row_of;
  for (std::size_t i = 0; i < predictor.ordering.size(); ++i) row_of[predictor.ordering[i]] = static_cast<Eigen::Index>(i);
  const Matrix probs = predictor.score_all(embeddings);
  std::vector<PairPrediction> out;
  out.reserve(pairs.size());
  for (const auto& [s, t] : pairs) {
    const auto si = row_of.find(s);
    const auto ti = row_of.find(t);
    if (si == row_of.end() || ti == row_of.end()) {
      throw Error(ErrorCode::MissingEmbedding, "concept " + to_string(si == row_of.end() ? s : t) +
                                                   " was not part of the trained graph");
    }
    const double p = probs(si->second, ti->second);
    out.push_back({s, t, p, p >= threshold});
  }
  return out;
}

double ConcatClassifier::probability(const Vector& source, const Vector& target) const {
  const auto d = source.size();
  if (target.size() != d || weights.size() != 2 * d) {
    throw Error(ErrorCode::DimensionMismatch, "embedding width does not match classifier");
  }
  return sigmoid(weights.head(d).dot(source) + weights.tail(d).dot(target) + bias);
}

ConcatClassifier train_concat(const EmbeddingTable& embeddings, const std::vector<LabeledPair>& train,
                              const TrainConfig& config) {
  config.validate();
  std::unordered_map<ConceptId, std::size_t> row_of;
  const auto ids = embeddings.ids();
  for (std::size_t i = 0; i < ids.size(); ++i) row_of[ids[i]] = i;
  index_pairs(train, row_of);  // MissingEmbedding / DegenerateLabels

  const auto d = static_cast<Eigen::Index>(embeddings.dim());
  const auto m = static_cast<Eigen::Index>(train.size());
  Matrix x(m, 2 * d);
  Vector y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& p = train[static_cast<std::size_t>(r)];
    x.row(r) << embeddings.at(p.source).transpose(), embeddings.at(p.target).transpose();
    y(r) = p.label ? 1.0 : 0.0;
  }

  ConcatClassifier clf;
  Rng rng(config.seed);
  clf.weights.resize(2 * d);
  for (Eigen::Index i = 0; i < clf.weights.size(); ++i) clf.weights(i) = rng.uniform(-config.init_scale, config.init_scale);

  Vector velocity = Vector::Zero(clf.weights.size());
  double bias_velocity = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const Vector logits = (x * clf.weights).array() + clf.bias;
    const Vector residual = logits.unaryExpr([](double z) { return sigmoid(z); }) - y;
    const Vector grad_w = x.transpose() * residual * inv_m;
    const double grad_b = residual.sum() * inv_m;
    if (config.momentum > 0.0) {
      velocity = config.momentum * velocity - config.learning_rate * grad_w;
      bias_velocity = config.momentum * bias_velocity - config.learning_rate * grad_b;
      clf.weights += velocity;
      clf.bias += bias_velocity;
    } else {
      clf.weights -= config.learning_rate * grad_w;
      clf.bias -= config.learning_rate * grad_b;
    }
  }
  return clf;
}

std::vector<PairPrediction> classify_concat(const EmbeddingTable& embeddings, const std::vector<LabeledPair>& train,
                                            const std::vector<Edge>& test_pairs, const TrainConfig& config) {
  const auto clf = train_concat(embeddings, train, config);
  std::vector<PairPrediction> out;
  out.reserve(test_pairs.size());
  for (const auto& [s, t] : test_pairs) {
    const double p = clf.probability(embeddings.at(s), embeddings.at(t));
    out.push_back({s, t, p, p >= config.edge_threshold});
  }
  return out;
}

}  // namespace cgraph
