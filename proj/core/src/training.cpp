#include "ffl/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ffl/errors.hpp"

namespace ffl {

ModelSpec ModelSpec::softmax(int input_dim, int num_classes) {
  return ModelSpec{ModelKind::softmax_regression, input_dim, 0, num_classes};
}

ModelSpec ModelSpec::mlp(int input_dim, int hidden, int num_classes) {
  return ModelSpec{ModelKind::mlp1, input_dim, hidden, num_classes};
}

std::size_t ModelSpec::param_count() const {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto z = static_cast<std::size_t>(num_classes);
  if (kind == ModelKind::softmax_regression) return z * d + z;
  const auto h = static_cast<std::size_t>(hidden);
  return h * d + h + z * h + z;
}

LayerLayout ModelSpec::layout() const {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto z = static_cast<std::size_t>(num_classes);
  if (kind == ModelKind::softmax_regression) {
    std::vector<LayerSpan> spans{{0, z * d, LayerKind::weight},
                                 {z * d, z, LayerKind::bias}};
    return LayerLayout(std::move(spans), WordRange{0, z * d + z});
  }
  const auto h = static_cast<std::size_t>(hidden);
  std::vector<LayerSpan> spans{
      {0, h * d, LayerKind::weight},
      {h * d, h, LayerKind::bias},
      {h * d + h, z * h, LayerKind::weight},
      {h * d + h + z * h, z, LayerKind::bias}};
  return LayerLayout(std::move(spans), WordRange{h * d + h, z * h + z});
}

ParamWords init_params(const ModelSpec& spec, DetRng& rng) {
  std::vector<double> w(spec.param_count());
  for (auto& x : w) x = 0.1 * rng.normal();
  return ParamWords::from_doubles(w, spec.layout());
}

namespace {

void softmax_inplace(std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
}

// Forward pass; returns class probabilities, optionally capturing the hidden
// activations and pre-activations for backprop.
std::vector<double> forward(const ModelSpec& spec, std::span<const double> w,
                            std::span<const double> x,
                            std::vector<double>* hidden_act = nullptr) {
  const int d = spec.input_dim;
  const int z = spec.num_classes;
  if (spec.kind == ModelKind::softmax_regression) {
    std::vector<double> logits(z);
    for (int c = 0; c < z; ++c) {
      double s = w[static_cast<std::size_t>(z) * d + c];  // bias
      const double* row = &w[static_cast<std::size_t>(c) * d];
      for (int i = 0; i < d; ++i) s += row[i] * x[i];
      logits[c] = s;
    }
    softmax_inplace(logits);
    return logits;
  }
  const int h = spec.hidden;
  const std::size_t w1 = 0;
  const std::size_t b1 = static_cast<std::size_t>(h) * d;
  const std::size_t w2 = b1 + h;
  const std::size_t b2 = w2 + static_cast<std::size_t>(z) * h;
  std::vector<double> act(h);
  for (int j = 0; j < h; ++j) {
    double s = w[b1 + j];
    const double* row = &w[w1 + static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) s += row[i] * x[i];
    act[j] = s > 0.0 ? s : 0.0;  // ReLU
  }
  std::vector<double> logits(z);
  for (int c = 0; c < z; ++c) {
    double s = w[b2 + c];
    const double* row = &w[w2 + static_cast<std::size_t>(c) * h];
    for (int j = 0; j < h; ++j) s += row[j] * act[j];
    logits[c] = s;
  }
  if (hidden_act != nullptr) *hidden_act = std::move(act);
  softmax_inplace(logits);
  return logits;
}

// Accumulates the gradient of -log p_y at (x, y) into grad.
void accumulate_gradient(const ModelSpec& spec, std::span<const double> w,
                         std::span<const double> x, int y,
                         std::vector<double>& grad) {
  const int d = spec.input_dim;
  const int z = spec.num_classes;
  if (spec.kind == ModelKind::softmax_regression) {
    std::vector<double> p = forward(spec, w, x);
    p[y] -= 1.0;  // dL/dlogit
    for (int c = 0; c < z; ++c) {
      double* row = &grad[static_cast<std::size_t>(c) * d];
      for (int i = 0; i < d; ++i) row[i] += p[c] * x[i];
      grad[static_cast<std::size_t>(z) * d + c] += p[c];
    }
    return;
  }
  const int h = spec.hidden;
  const std::size_t b1 = static_cast<std::size_t>(h) * d;
  const std::size_t w2 = b1 + h;
  const std::size_t b2 = w2 + static_cast<std::size_t>(z) * h;
  std::vector<double> act;
  std::vector<double> p = forward(spec, w, x, &act);
  p[y] -= 1.0;
  // Output layer.
  for (int c = 0; c < z; ++c) {
    double* row = &grad[w2 + static_cast<std::size_t>(c) * h];
    for (int j = 0; j < h; ++j) row[j] += p[c] * act[j];
    grad[b2 + c] += p[c];
  }
  // Hidden layer through the ReLU gate.
  for (int j = 0; j < h; ++j) {
    if (act[j] <= 0.0) continue;
    double dj = 0.0;
    for (int c = 0; c < z; ++c) {
      dj += p[c] * w[w2 + static_cast<std::size_t>(c) * h + j];
    }
    double* row = &grad[static_cast<std::size_t>(j) * d];
    for (int i = 0; i < d; ++i) row[i] += dj * x[i];
    grad[b1 + j] += dj;
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

std::vector<double> predict_probs(const ModelSpec& spec,
                                  std::span<const double> w,
                                  std::span<const double> x) {
  return forward(spec, w, x);
}

double dataset_loss(const ModelSpec& spec, std::span<const double> w,
                    const Dataset& data, std::span<const std::size_t> batch) {
  std::vector<std::size_t> full;
  if (batch.empty()) {
    full = all_indices(data.size());
    batch = full;
  }
  double loss = 0.0;
  for (const std::size_t i : batch) {
    const auto p = forward(spec, w, data.features[i]);
    loss += -std::log(std::max(p[data.labels[i]], 1e-300));
  }
  return loss / static_cast<double>(batch.size());
}

std::vector<double> loss_gradient(const ModelSpec& spec,
                                  std::span<const double> w,
                                  const Dataset& data,
                                  std::span<const std::size_t> batch) {
  std::vector<std::size_t> full;
  if (batch.empty()) {
    full = all_indices(data.size());
    batch = full;
  }
  std::vector<double> grad(spec.param_count(), 0.0);
  for (const std::size_t i : batch) {
    accumulate_gradient(spec, w, data.features[i], data.labels[i], grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  return grad;
}

ParamWords train_local(const ParamWords& w, const ModelSpec& spec,
                       const Dataset& data, const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.eta <= 0.0) {
    throw std::domain_error("invalid training configuration");
  }
  if (data.size() == 0) throw std::domain_error("empty training set");
  if (data.dim() != static_cast<std::size_t>(spec.input_dim)) {
    throw ShapeError("dataset dimension does not match model");
  }
  std::vector<double> weights = w.to_doubles();
  std::vector<double> velocity(weights.size(), 0.0);
  DetRng rng(cfg.seed);

  auto indices = all_indices(data.size());
  for (int e = 0; e < cfg.epochs; ++e) {
    auto shuffler = rng.fork("epoch", static_cast<std::uint64_t>(e));
    shuffler.shuffle(indices);
    for (std::size_t start = 0; start < indices.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(indices.size(),
                   start + static_cast<std::size_t>(cfg.batch_size));
      std::span<const std::size_t> batch(indices.data() + start, end - start);
      const auto grad = loss_gradient(spec, weights, data, batch);
      for (std::size_t i = 0; i < weights.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] + grad[i];
        weights[i] -= cfg.eta * velocity[i];
      }
    }
  }
  for (const double v : weights) {
    if (!std::isfinite(v)) throw TrainingError("non-finite parameters");
  }
  const double final_loss = dataset_loss(spec, weights, data);
  if (!std::isfinite(final_loss)) throw TrainingError("non-finite loss");
  return ParamWords::from_doubles(weights, spec.layout());
}

EvalMetrics evaluate(const ParamWords& w, const ModelSpec& spec,
                     const Dataset& test, int src_class, int target_class) {
  if (test.size() == 0) throw std::domain_error("empty test set");
  const auto weights = w.to_doubles();
  EvalMetrics m;
  std::size_t correct = 0, src_total = 0, src_correct = 0, src_as_target = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto p = forward(spec, weights, test.features[i]);
    const int pred = static_cast<int>(
        std::max_element(p.begin(), p.end()) - p.begin());
    const int y = test.labels[i];
    loss += -std::log(std::max(p[y], 1e-300));
    if (pred == y) ++correct;
    if (y == src_class) {
      ++src_total;
      if (pred == y) ++src_correct;
      if (pred == target_class) ++src_as_target;
    }
  }
  m.test_error = loss / static_cast<double>(test.size());
  m.all_acc = static_cast<double>(correct) / static_cast<double>(test.size());
  if (src_total > 0) {
    m.src_acc = static_cast<double>(src_correct) /
                static_cast<double>(src_total);
    m.asr = static_cast<double>(src_as_target) /
            static_cast<double>(src_total);
  }
  return m;
}

Dataset synth_dataset(std::uint64_t seed, int n, int d, int z,
                      double separation) {
  if (n < 1 || d < 1 || z < 1) {
    throw std::domain_error("synth_dataset needs n, d, z >= 1");
  }
  DetRng rng(seed);
  auto center_rng = rng.fork("centers");
  // Class centers on orthogonalized random directions at radius sep/sqrt(2),
  // so every pair of centers sits `separation` apart (unit isotropic noise
  // then puts the pairwise Bayes accuracy at Phi(separation/2)).
  std::vector<std::vector<double>> centers(z, std::vector<double>(d));
  for (int c = 0; c < z; ++c) {
    auto& v = centers[c];
    for (int i = 0; i < d; ++i) v[i] = center_rng.normal();
    // Orthogonalize while directions remain available (c < d); extra classes
    // keep their raw random direction.
    for (int prev = 0; c < d && prev < c; ++prev) {
      double dot = 0.0;
      for (int i = 0; i < d; ++i) dot += v[i] * centers[prev][i];
      for (int i = 0; i < d; ++i) v[i] -= dot * centers[prev][i];
    }
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) norm2 += v[i] * v[i];
    const double inv = 1.0 / std::max(std::sqrt(norm2), 1e-12);
    for (int i = 0; i < d; ++i) v[i] *= inv;
  }
  const double radius = separation / std::sqrt(2.0);
  for (auto& v : centers) {
    for (auto& x : v) x *= radius;
  }
  auto noise_rng = rng.fork("noise");
  Dataset data;
  data.num_classes = z;
  data.features.reserve(n);
  data.labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int c = i % z;
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[j] = centers[c][j] + noise_rng.normal();
    data.features.push_back(std::move(x));
    data.labels.push_back(c);
  }
  return data;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  std::getline(in, line);  // header
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": not a number: " + cell);
      }
    }
    if (row.size() < 2) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": need at least one feature and a label");
    }
    const double label_val = row.back();
    row.pop_back();
    const int label = static_cast<int>(label_val);
    if (label < 0 || static_cast<double>(label) != label_val) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": label must be a non-negative integer");
    }
    if (!data.features.empty() && row.size() != data.dim()) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": inconsistent column count");
    }
    data.features.push_back(std::move(row));
    data.labels.push_back(label);
    data.num_classes = std::max(data.num_classes, label + 1);
  }
  if (data.features.empty()) throw FormatError(path + ": no data rows");
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  for (std::size_t i = 0; i < data.dim(); ++i) {
    out << "f" << i << ",";
  }
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const double v : data.features[i]) out << v << ",";
    out << data.labels[i] << "\n";
  }
}

std::vector<Dataset> split_uniform(const Dataset& data, int k, DetRng& rng) {
  if (k < 1) throw std::domain_error("need at least one shard");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<Dataset> shards(k);
  for (auto& s : shards) s.num_classes = data.num_classes;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    auto& shard = shards[pos % static_cast<std::size_t>(k)];
    shard.features.push_back(data.features[order[pos]]);
    shard.labels.push_back(data.labels[order[pos]]);
  }
  return shards;
}

}  // namespace ffl
