#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "autofield/error.hpp"
#include "autofield/grad_check.hpp"
#include "autofield/model.hpp"
#include "autofield/ops.hpp"
#include "autofield/rng.hpp"

using namespace autofield;

namespace {

Batch make_batch(std::vector<std::uint32_t> indices, std::vector<std::uint8_t> labels,
                 std::size_t n_fields, SplitTag tag = SplitTag::train) {
  Batch batch;
  batch.tag = tag;
  batch.size = labels.size();
  batch.n_fields = n_fields;
  batch.indices = std::move(indices);
  batch.labels = std::move(labels);
  return batch;
}

Batch random_batch(std::size_t batch_size, const std::vector<std::uint32_t>& cardinalities,
                   Rng::Engine& engine) {
  Batch batch;
  batch.tag = SplitTag::train;
  batch.size = batch_size;
  batch.n_fields = cardinalities.size();
  for (std::size_t b = 0; b < batch_size; ++b) {
    for (std::uint32_t card : cardinalities) {
      batch.indices.push_back(static_cast<std::uint32_t>(uniform_below(engine, card)));
    }
    batch.labels.push_back(uniform01(engine) < 0.5 ? 1 : 0);
  }
  return batch;
}

ModelConfig small_config(std::size_t n_fields, std::size_t dim = 3,
                         std::vector<std::size_t> hidden = {5, 4}) {
  ModelConfig config;
  config.n_fields = n_fields;
  config.embedding_dim = dim;
  config.hidden = std::move(hidden);
  config.dropout_rate = 0.0;
  config.active_fields.resize(n_fields);
  std::iota(config.active_fields.begin(), config.active_fields.end(), 0);
  return config;
}

}  // namespace

TEST_CASE("embedding lookup equals the dense one-hot matrix product") {
  // The gather must be exactly x_n^T A_n where x_n is one-hot: row index ->
  // row of the table.
  Rng rng(101);
  std::vector<std::uint32_t> cards{4, 5};
  ModelConfig config = small_config(2, 3, {4});
  RecModel model(config, cards, rng);

  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(6, cards, engine);
  auto record = model.forward(batch, {}, /*training=*/false, nullptr);

  for (std::size_t field = 0; field < 2; ++field) {
    const Tensor* table = model.params().find("embed." + std::to_string(field));
    REQUIRE(table != nullptr);
    REQUIRE(table->value.rows() == cards[field]);
    REQUIRE(table->value.cols() == 3);
    for (std::size_t b = 0; b < batch.size; ++b) {
      // Dense product: one_hot(index) * A = A.row(index).
      std::vector<double> one_hot(cards[field], 0.0);
      one_hot[batch.index(b, field)] = 1.0;
      for (std::size_t d = 0; d < 3; ++d) {
        double dense = 0.0;
        for (std::size_t r = 0; r < cards[field]; ++r) {
          dense += one_hot[r] * table->value(r, d);
        }
        CHECK(record.embedded(b, field * 3 + d) == doctest::Approx(dense).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("all-zero dense weights predict one half") {
  Rng rng(5);
  std::vector<std::uint32_t> cards{3, 3, 3};
  RecModel model(small_config(3), cards, rng);
  for (auto& tensor : model.params()) {
    if (tensor.name.rfind("embed.", 0) != 0) tensor.value.fill(0.0);
  }
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(4, cards, engine);
  auto scores = model.predict(batch, {});
  for (double s : scores) CHECK(s == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero gates sever all input dependence") {
  Rng rng(6);
  std::vector<std::uint32_t> cards{8, 8, 8, 8};
  RecModel model(small_config(4), cards, rng);
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(16, cards, engine);
  std::vector<double> gates(4, 0.0);
  auto scores = model.predict(batch, gates);
  // With every field gated off only the biases remain, so every row scores
  // the same.
  for (double s : scores) CHECK(s == doctest::Approx(scores[0]).epsilon(1e-15));
}

TEST_CASE("evaluation forward is deterministic and ignores dropout") {
  Rng rng(7);
  std::vector<std::uint32_t> cards{6, 6};
  ModelConfig config = small_config(2);
  config.dropout_rate = 0.5;
  RecModel model(config, cards, rng);
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(5, cards, engine);
  auto a = model.predict(batch, {});
  auto b = model.predict(batch, {});
  CHECK(a == b);

  // Training mode with dropout differs across calls (fresh masks).
  auto dropout_engine = rng.stream("test.dropout");
  auto r1 = model.forward(batch, {}, true, &dropout_engine);
  auto r2 = model.forward(batch, {}, true, &dropout_engine);
  CHECK(r1.predictions.values() != r2.predictions.values());
}

TEST_CASE("prediction of an example depends only on its own row") {
  Rng rng(8);
  std::vector<std::uint32_t> cards{5, 7, 4};
  RecModel model(small_config(3), cards, rng);
  auto engine = rng.stream("test.batch");
  Batch big = random_batch(10, cards, engine);
  auto scores = model.predict(big, {});

  // Slice row 4 into a singleton batch: identical score.
  Batch single;
  single.tag = big.tag;
  single.size = 1;
  single.n_fields = 3;
  single.indices = {big.index(4, 0), big.index(4, 1), big.index(4, 2)};
  single.labels = {big.labels[4]};
  auto one = model.predict(single, {});
  CHECK(one[0] == doctest::Approx(scores[4]).epsilon(1e-15));
}

TEST_CASE("adapt_architecture narrows the first dense layer to K blocks") {
  ModelConfig base;
  base.n_fields = 22;
  base.embedding_dim = 16;
  base.hidden = {16, 8};
  base.active_fields.resize(22);
  std::iota(base.active_fields.begin(), base.active_fields.end(), 0);
  CHECK(base.first_layer_width() == 352);

  ModelConfig narrowed = adapt_architecture(base, {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20});
  CHECK(narrowed.first_layer_width() == 176);
  CHECK(narrowed.n_fields == 22);
  CHECK(narrowed.active_fields.size() == 11);
  CHECK(narrowed.hidden == base.hidden);

  // Input width scales with the kept-field count K, not the schema size N.
  Rng rng(1);
  std::vector<std::uint32_t> cards(22, 4);
  RecModel model(narrowed, cards, rng);
  const Tensor* first = model.params().find("dense.0.weight");
  REQUIRE(first != nullptr);
  CHECK(first->value.rows() == 176);
  CHECK(first->value.cols() == 16);
}

TEST_CASE("dropped fields own no parameters at all") {
  Rng rng(2);
  ModelConfig base = small_config(5);
  ModelConfig narrowed = adapt_architecture(base, {1, 4});
  std::vector<std::uint32_t> cards{3, 3, 3, 3, 3};
  RecModel model(narrowed, cards, rng);
  CHECK(model.params().find("embed.1") != nullptr);
  CHECK(model.params().find("embed.4") != nullptr);
  CHECK(model.params().find("embed.0") == nullptr);
  CHECK(model.params().find("embed.2") == nullptr);
  CHECK(model.params().find("embed.3") == nullptr);

  // Batches still arrive with all 5 columns; the model gathers only its own.
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(3, cards, engine);
  auto scores = model.predict(batch, {});
  CHECK(scores.size() == 3);

  // Changing a dropped field's column leaves predictions untouched.
  Batch mutated = batch;
  for (std::size_t b = 0; b < 3; ++b) {
    mutated.indices[b * 5 + 2] = (batch.index(b, 2) + 1) % 3;
  }
  CHECK(model.predict(mutated, {}) == scores);
}

TEST_CASE("model validates config and batch shapes") {
  Rng rng(3);
  ModelConfig config = small_config(2);
  config.active_fields = {0, 0};  // duplicate
  std::vector<std::uint32_t> cards{3, 3};
  CHECK_THROWS_AS(RecModel(config, cards, rng), ConfigError);

  config = small_config(2);
  config.active_fields = {0, 5};  // out of range
  CHECK_THROWS_AS(RecModel(config, cards, rng), ConfigError);

  config = small_config(2);
  config.dropout_rate = 1.0;
  CHECK_THROWS_AS(RecModel(config, cards, rng), ConfigError);

  RecModel model(small_config(2), cards, rng);
  Batch bad = make_batch({0, 1, 2}, {0}, 3);  // 3 fields, model expects 2
  CHECK_THROWS_AS(model.predict(bad, {}), ContractViolation);

  Batch oob = make_batch({0, 7}, {0}, 2);  // index 7 >= cardinality 3
  CHECK_THROWS_AS(model.predict(oob, {}), ContractViolation);

  Batch ok = make_batch({0, 1}, {0}, 2);
  std::vector<double> bad_gates{0.5};  // one gate, two active fields
  CHECK_THROWS_AS(model.predict(ok, bad_gates), ContractViolation);
}

TEST_CASE("forward records are single-use and owner-checked") {
  Rng rng(4);
  std::vector<std::uint32_t> cards{3, 3};
  RecModel a(small_config(2), cards, rng);
  RecModel b(small_config(2), cards, rng);
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(4, cards, engine);

  auto record = a.forward(batch, {}, false, nullptr);
  Matrix dpred(4, 1, 0.1);
  (void)a.backward(record, dpred);
  CHECK_THROWS_AS(a.backward(record, dpred), ContractViolation);  // consumed

  auto record_b = b.forward(batch, {}, false, nullptr);
  CHECK_THROWS_AS(a.backward(record_b, dpred), ContractViolation);  // wrong owner
}

TEST_CASE("gate gradient of a masked field is zero and scales with its embedding") {
  Rng rng(9);
  std::vector<std::uint32_t> cards{4, 4, 4};
  RecModel model(small_config(3), cards, rng);
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(8, cards, engine);

  std::vector<double> gates{0.7, 0.0, 0.3};
  auto record = model.forward(batch, gates, false, nullptr);
  BceResult loss = bce_loss(record.predictions, batch.labels);
  auto dgates = model.backward(record, loss.dpredictions);
  REQUIRE(dgates.size() == 3);

  // dL/dgate_1 is generally nonzero even though gate_1 = 0: the gradient is
  // sum(upstream * embedded), and embedded ignores the gate. Check against
  // finite differences instead of asserting zero.
  for (std::size_t k = 0; k < 3; ++k) {
    const double h = 1e-6;
    auto eval = [&](double delta) {
      std::vector<double> g = gates;
      g[k] += delta;
      auto probe = model.forward(batch, g, false, nullptr);
      return bce_loss(probe.predictions, batch.labels).loss;
    };
    double fd = (eval(h) - eval(-h)) / (2 * h);
    CHECK(dgates[k] == doctest::Approx(fd).epsilon(1e-5));
  }

  // But an all-zero embedding table forces a zero gate gradient.
  model.params().find("embed.2")->value.fill(0.0);
  auto record2 = model.forward(batch, gates, false, nullptr);
  BceResult loss2 = bce_loss(record2.predictions, batch.labels);
  auto dgates2 = model.backward(record2, loss2.dpredictions);
  CHECK(dgates2[2] == 0.0);
}

TEST_CASE("masked-off embedding receives zero parameter gradient") {
  Rng rng(10);
  std::vector<std::uint32_t> cards{4, 4};
  RecModel model(small_config(2), cards, rng);
  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(8, cards, engine);

  std::vector<double> gates{1.0, 0.0};  // field 1 fully gated off
  auto record = model.forward(batch, gates, false, nullptr);
  BceResult loss = bce_loss(record.predictions, batch.labels);
  model.params().zero_grads();
  (void)model.backward(record, loss.dpredictions);

  const Tensor* blocked = model.params().find("embed.1");
  for (double g : blocked->grad.values()) CHECK(g == 0.0);
  // The kept field trains.
  const Tensor* open = model.params().find("embed.0");
  double magnitude = 0.0;
  for (double g : open->grad.values()) magnitude += std::abs(g);
  CHECK(magnitude > 0.0);
}

TEST_CASE("full backward pass matches finite differences including frozen dropout") {
  Rng rng(1234);
  std::vector<std::uint32_t> cards{5, 3, 7};
  ModelConfig config = small_config(3, 4, {6, 5});
  config.dropout_rate = 0.25;
  RecModel model(config, cards, rng);

  auto engine = rng.stream("test.batch");
  Batch batch = random_batch(6, cards, engine);
  std::vector<double> gates{0.9, 0.5, 0.2};

  // Sample dropout masks once, then freeze them so the loss is deterministic.
  auto mask_engine = rng.stream("test.mask");
  auto sample = model.forward(batch, gates, true, &mask_engine);
  std::vector<Matrix> frozen = sample.dropout_masks;
  REQUIRE(frozen.size() == 2);

  auto loss_fn = [&]() {
    auto record = model.forward(batch, gates, true, nullptr, &frozen);
    return bce_loss(record.predictions, batch.labels).loss;
  };

  model.params().zero_grads();
  auto record = model.forward(batch, gates, true, nullptr, &frozen);
  BceResult loss = bce_loss(record.predictions, batch.labels);
  auto dgates = model.backward(record, loss.dpredictions);

  auto pick = rng.stream("test.pick");
  GradCheckReport report = finite_diff_check(loss_fn, model.params(), /*coords_per_tensor=*/20,
                                             pick, 1e-5);
  INFO("worst: " << report.worst_parameter << "[" << report.worst_index
                 << "] analytic=" << report.worst_analytic
                 << " numeric=" << report.worst_numeric);
  CHECK(report.max_rel_error < 1e-5);
  CHECK(report.coords_checked > 0);

  // Gate gradients against finite differences through the same frozen path.
  for (std::size_t k = 0; k < 3; ++k) {
    const double h = 1e-6;
    auto eval = [&](double delta) {
      std::vector<double> g = gates;
      g[k] += delta;
      auto probe = model.forward(batch, g, true, nullptr, &frozen);
      return bce_loss(probe.predictions, batch.labels).loss;
    };
    double fd = (eval(h) - eval(-h)) / (2 * h);
    CHECK(dgates[k] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("training with dropout requires an engine") {
  Rng rng(11);
  std::vector<std::uint32_t> cards{3, 3};
  ModelConfig config = small_config(2);
  config.dropout_rate = 0.5;
  RecModel model(config, cards, rng);
  Batch batch = make_batch({0, 1}, {1}, 2);
  CHECK_THROWS_AS(model.forward(batch, {}, true, nullptr), ContractViolation);
}

TEST_CASE("identical seed reproduces identical initialization") {
  std::vector<std::uint32_t> cards{4, 4};
  RecModel a(small_config(2), cards, Rng(55));
  RecModel b(small_config(2), cards, Rng(55));
  REQUIRE(a.params().count() == b.params().count());
  for (std::size_t i = 0; i < a.params().count(); ++i) {
    CHECK(a.params()[i].name == b.params()[i].name);
    CHECK(a.params()[i].value == b.params()[i].value);
  }
  RecModel c(small_config(2), cards, Rng(56));
  CHECK_FALSE(a.params()[0].value == c.params()[0].value);
}
