#include "ffl/training.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"

#include "ffl/rng.hpp"

using namespace ffl;

namespace {

Dataset tiny_dataset(DetRng& rng, int n, int d, int z) {
  Dataset data;
  data.num_classes = z;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    data.features.push_back(std::move(x));
    data.labels.push_back(static_cast<int>(rng.below(z)));
  }
  return data;
}

double gradcheck_rel_error(const ModelSpec& spec, const Dataset& data,
                           DetRng& rng) {
  std::vector<double> w(spec.param_count());
  for (auto& v : w) v = rng.uniform(-0.5, 0.5);
  const auto analytic = loss_gradient(spec, w, data);

  const double h = 1e-3;
  std::vector<double> fd(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    fd[i] = (dataset_loss(spec, wp, data) - dataset_loss(spec, wm, data)) /
            (2 * h);
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
    den += fd[i] * fd[i];
  }
  return std::sqrt(num / std::max(den, 1e-30));
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("model layouts") {
  const auto sm = ModelSpec::softmax(4, 3);
  CHECK(sm.param_count() == 15);
  CHECK(sm.layout().total_words() == 15);
  CHECK(sm.layout().last_layer() == WordRange{0, 15});

  const auto mlp = ModelSpec::mlp(4, 5, 3);
  CHECK(mlp.param_count() == 4 * 5 + 5 + 5 * 3 + 3);
  CHECK(mlp.layout().last_layer() == WordRange{25, 18});
  CHECK(mlp.layout().spans().size() == 4);
}

TEST_CASE("analytic gradients match finite differences") {
  DetRng rng(61);
  auto data = tiny_dataset(rng, 12, 4, 3);
  CHECK(gradcheck_rel_error(ModelSpec::softmax(4, 3), data, rng) < 1e-4);
  CHECK(gradcheck_rel_error(ModelSpec::mlp(4, 6, 3), data, rng) < 1e-4);
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  DetRng rng(62);
  const auto spec = ModelSpec::softmax(3, 2);
  const auto data = tiny_dataset(rng, 8, 3, 2);
  auto init_rng = rng.fork("init");
  const auto w = init_params(spec, init_rng);
  TrainConfig cfg;
  cfg.eta = 0.0;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  CHECK(train_local(w, spec, data, cfg) == w);
}

TEST_CASE("one small step decreases the example loss") {
  DetRng rng(63);
  const auto spec = ModelSpec::mlp(3, 4, 2);
  Dataset one = tiny_dataset(rng, 1, 3, 2);
  auto init_rng = rng.fork("init");
  const auto w = init_params(spec, init_rng);
  TrainConfig cfg;
  cfg.eta = 0.01;
  cfg.epochs = 1;
  cfg.batch_size = 1;
  const auto w2 = train_local(w, spec, one, cfg);
  CHECK(dataset_loss(spec, w2.to_doubles(), one) <
        dataset_loss(spec, w.to_doubles(), one));
}

TEST_CASE("full-batch descent is monotone for small eta") {
  DetRng rng(64);
  const auto spec = ModelSpec::softmax(4, 2);
  const auto data = synth_dataset(99, 60, 4, 2, 3.0);
  auto init_rng = rng.fork("init");
  auto w = init_params(spec, init_rng);
  TrainConfig cfg;
  cfg.eta = 0.05;
  cfg.epochs = 1;
  cfg.batch_size = static_cast<int>(data.size());
  double prev = dataset_loss(spec, w.to_doubles(), data);
  for (int step = 0; step < 50; ++step) {
    w = train_local(w, spec, data, cfg);
    const double cur = dataset_loss(spec, w.to_doubles(), data);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("training is bit-deterministic") {
  DetRng rng(65);
  const auto spec = ModelSpec::mlp(4, 5, 2);
  const auto data = tiny_dataset(rng, 20, 4, 2);
  auto init_rng = rng.fork("init");
  const auto w = init_params(spec, init_rng);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.eta = 0.1;
  cfg.momentum = 0.5;
  cfg.seed = 777;
  const auto a = train_local(w, spec, data, cfg);
  const auto b = train_local(w, spec, data, cfg);
  CHECK(a == b);
}

TEST_CASE("evaluation metrics") {
  // One feature, two classes; weights push class 1 for x > 0.
  const auto spec = ModelSpec::softmax(1, 2);
  Dataset test;
  test.num_classes = 2;
  test.features = {{-1.0}, {-2.0}, {1.0}, {2.0}};
  test.labels = {0, 0, 1, 1};
  // logits: class0 = -5x, class1 = 5x: perfect separation.
  const auto w = ParamWords::from_doubles(std::vector<double>{-5, 5, 0, 0},
                                          spec.layout());
  const auto m = evaluate(w, spec, test, 1, 0);
  CHECK(m.all_acc == 1.0);
  CHECK(*m.src_acc == 1.0);
  CHECK(*m.asr == 0.0);

  // Flipped weights map every source example onto the target.
  const auto w_bad = ParamWords::from_doubles(std::vector<double>{5, -5, 0, 0},
                                              spec.layout());
  const auto mb = evaluate(w_bad, spec, test, 1, 0);
  CHECK(*mb.src_acc == 0.0);
  CHECK(*mb.asr == 1.0);

  // Missing source class: undefined markers.
  Dataset no_src = test;
  no_src.labels = {0, 0, 0, 0};
  const auto mn = evaluate(w, spec, no_src, 1, 0);
  CHECK(!mn.src_acc.has_value());
  CHECK(!mn.asr.has_value());
}

TEST_CASE("constant predictor on balanced labels scores about half") {
  const auto spec = ModelSpec::softmax(2, 2);
  const int n = 4000;
  Dataset test;
  test.num_classes = 2;
  DetRng rng(66);
  for (int i = 0; i < n; ++i) {
    test.features.push_back({rng.uniform(), rng.uniform()});
    test.labels.push_back(static_cast<int>(rng.below(2)));
  }
  const auto w = ParamWords::zeros(spec.layout());
  const auto m = evaluate(w, spec, test, 0, 1);
  const double bound = 3.0 * std::sqrt(0.25 / n);
  CHECK(std::abs(m.all_acc - 0.5) < bound);
}

TEST_CASE("synthetic blobs separate") {
  const auto data = synth_dataset(7, 200, 2, 2, 10.0);
  const auto again = synth_dataset(7, 200, 2, 2, 10.0);
  CHECK(data.features == again.features);
  CHECK(data.labels == again.labels);

  const auto spec = ModelSpec::softmax(2, 2);
  DetRng rng(67);
  auto w = init_params(spec, rng);
  TrainConfig cfg;
  cfg.eta = 0.5;
  cfg.epochs = 1;
  cfg.batch_size = static_cast<int>(data.size());
  for (int step = 0; step < 100; ++step) {
    w = train_local(w, spec, data, cfg);
  }
  const auto m = evaluate(w, spec, data, 0, 1);
  CHECK(m.all_acc >= 0.99);
}

TEST_CASE("csv round trip and errors") {
  DetRng rng(68);
  auto data = tiny_dataset(rng, 15, 3, 2);
  const auto path =
      (std::filesystem::temp_directory_path() / "ffl_test_data.csv").string();
  save_csv(data, path);
  const auto loaded = load_csv(path);
  CHECK(loaded.labels == data.labels);
  REQUIRE(loaded.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      CHECK(loaded.features[i][j] == doctest::Approx(data.features[i][j])
                                         .epsilon(1e-15));
    }
  }
  std::remove(path.c_str());

  const auto bad_path =
      (std::filesystem::temp_directory_path() / "ffl_bad.csv").string();
  {
    std::FILE* f = std::fopen(bad_path.c_str(), "w");
    std::fputs("a,b,label\n1.0,2.0,0\n1.0,oops,1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_csv(bad_path),
                       doctest::Contains(":3:"), FormatError);
  std::remove(bad_path.c_str());
}

TEST_CASE("uniform split covers the dataset") {
  DetRng rng(69);
  const auto data = synth_dataset(3, 103, 2, 2, 4.0);
  auto split_rng = rng.fork("split");
  const auto shards = split_uniform(data, 10, split_rng);
  std::size_t total = 0;
  for (const auto& s : shards) {
    total += s.size();
    CHECK(s.size() >= 10);
    CHECK(s.num_classes == 2);
  }
  CHECK(total == data.size());
}

}  // TEST_SUITE
