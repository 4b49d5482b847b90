#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ffl/params.hpp"
#include "ffl/rng.hpp"

namespace ffl {

struct Dataset {
  std::vector<std::vector<double>> features;  // n x d
  std::vector<int> labels;                    // values in [0, num_classes)
  int num_classes = 0;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return features.empty() ? 0 : features[0].size(); }
};

enum class ModelKind { softmax_regression, mlp1 };

// Desk-scale classifiers with analytic gradients. Parameters live in one flat
// vector: weights row-major (one row per output unit) followed by the bias of
// each layer. The last layer is always the trailing weight+bias block, which
// is what the similarity defense slices.
struct ModelSpec {
  ModelKind kind = ModelKind::softmax_regression;
  int input_dim = 2;
  int hidden = 0;  // mlp1 only
  int num_classes = 2;

  static ModelSpec softmax(int input_dim, int num_classes);
  static ModelSpec mlp(int input_dim, int hidden, int num_classes);

  std::size_t param_count() const;
  LayerLayout layout() const;
};

struct TrainConfig {
  int epochs = 1;
  int batch_size = 32;
  double eta = 0.1;
  double momentum = 0.0;
  std::uint64_t seed = 0;  // drives batch shuffling only
};

// Small random init, deterministic under the given generator.
ParamWords init_params(const ModelSpec& spec, DetRng& rng);

// Mean cross-entropy over the given examples (all of them when batch empty).
double dataset_loss(const ModelSpec& spec, std::span<const double> w,
                    const Dataset& data,
                    std::span<const std::size_t> batch = {});
// Analytic gradient of dataset_loss, same conventions.
std::vector<double> loss_gradient(const ModelSpec& spec,
                                  std::span<const double> w,
                                  const Dataset& data,
                                  std::span<const std::size_t> batch = {});
std::vector<double> predict_probs(const ModelSpec& spec,
                                  std::span<const double> w,
                                  std::span<const double> x);

// E epochs of seeded mini-batch SGD (optional momentum) in double precision;
// the result is rounded back to 32-bit parameter words. Throws TrainingError
// if the loss goes non-finite.
ParamWords train_local(const ParamWords& w, const ModelSpec& spec,
                       const Dataset& data, const TrainConfig& cfg);

struct EvalMetrics {
  double test_error = 0.0;  // mean cross-entropy
  double all_acc = 0.0;
  // Undefined when the source class is absent from the test set.
  std::optional<double> src_acc;
  std::optional<double> asr;
};

EvalMetrics evaluate(const ParamWords& w, const ModelSpec& spec,
                     const Dataset& test, int src_class, int target_class);

// Gaussian class blobs: z seeded unit directions scaled by `separation`, unit
// isotropic noise. Deterministic per seed.
Dataset synth_dataset(std::uint64_t seed, int n, int d, int z,
                      double separation);

// CSV schema: header row, numeric feature columns, final integer label column.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

// Uniform shards: example i goes to participant i % k.
std::vector<Dataset> split_uniform(const Dataset& data, int k, DetRng& rng);

}  // namespace ffl
