#include <cmath>
#include <filesystem>

#include "common/digest.hpp"
#include "common/errors.hpp"
#include "doctest.h"
#include "encoder/checkpoint.hpp"
#include "support/fixtures.hpp"
#include "trainer/adam.hpp"
#include "trainer/trainer.hpp"

using namespace mgh;
using namespace mgh::train;
using num::Tensor;
using testing::mock_triplets;

namespace {

TrainConfig tiny_config() {
  TrainConfig c;
  c.encoder.num_layers = 1;
  c.encoder.num_heads = 2;
  c.encoder.model_dim = 8;
  c.encoder.ff_dim = 16;
  c.encoder.max_seq_len = 96;
  c.encoder.seed = 11;
  c.batch_size = 4;
  c.grad_accum = 1;
  c.total_steps = 8;
  c.warmup_steps = 0;
  c.learning_rate = 1e-2;
  c.instruct = false;
  return c;
}

double mean(const std::vector<StepLog>& log, std::size_t from, std::size_t to) {
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += log[i].loss;
  return s / static_cast<double>(to - from);
}

}  // namespace

TEST_CASE("adam leaves parameters alone under zero gradient") {
  std::vector<enc::NamedTensor> p = {{"w", Tensor::vector({1.0, -2.0})}};
  const std::vector<Tensor> g = {Tensor({2})};
  Adam adam;
  for (int i = 0; i < 3; ++i) adam.step(p, g, 0.1);
  CHECK(p[0].value == Tensor::vector({1.0, -2.0}));
}

TEST_CASE("adam matches a scalar reference") {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.05;
  const std::vector<double> grads = {0.3, -1.2, 0.7, 0.0, 2.5};
  double x = 0.4, m = 0, v = 0;
  std::vector<enc::NamedTensor> p = {{"x", Tensor::vector({0.4})}};
  Adam adam;
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const double g = grads[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    x -= lr * mh / (std::sqrt(vh) + eps);
    const std::vector<Tensor> gt = {Tensor::vector({g})};
    adam.step(p, gt, lr);
    CHECK(std::abs(p[0].value[0] - x) < 1e-15);
    if (t == 1) CHECK(std::abs(p[0].value[0] - (0.4 - lr * g / (std::abs(g) + eps))) < 1e-15);
  }
  CHECK(adam.steps() == grads.size());
}

TEST_CASE("adam rejects mismatched gradients") {
  std::vector<enc::NamedTensor> p = {{"w", Tensor::vector({1.0, 2.0})}};
  Adam adam;
  const std::vector<Tensor> wrong_shape = {Tensor({3})};
  CHECK_THROWS_AS(adam.step(p, wrong_shape, 0.1), ContractError);
  const std::vector<Tensor> wrong_count = {};
  CHECK_THROWS_AS(adam.step(p, wrong_count, 0.1), ContractError);
}

TEST_CASE("equal optimizers stay equal") {
  std::vector<enc::NamedTensor> p1 = {{"w", Tensor::vector({1.0, 2.0})}}, p2 = p1;
  Adam a, b;
  for (int i = 0; i < 4; ++i) {
    const std::vector<Tensor> g = {Tensor::vector({0.1 * i, -0.3})};
    a.step(p1, g, 0.01);
    b.step(p2, g, 0.01);
  }
  CHECK(p1[0].value == p2[0].value);
  CHECK(a.first_moment() == b.first_moment());
  CHECK(a.second_moment() == b.second_moment());
}

TEST_CASE("instruction wrapping") {
  synth::TaskSpec t{synth::TaskCategory::sts, "find paraphrases"};
  CHECK(wrap_query(t, "hello", true) == "Instruct: find paraphrases\nQuery: hello");
  CHECK(wrap_query(t, "hello", false) == "hello");
  CHECK(wrap_query({}, "hello", true) == "hello");
}

TEST_CASE("learning rate warmup") {
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.warmup_steps = 10;
  CHECK(c.lr_at(1) == doctest::Approx(1e-4));
  CHECK(c.lr_at(5) == doctest::Approx(5e-4));
  CHECK(c.lr_at(10) == 1e-3);
  CHECK(c.lr_at(300) == 1e-3);
}

TEST_CASE("batch walk wraps over the dataset") {
  CHECK(batch_indices(1, 0, 4, 2, 10) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(batch_indices(1, 1, 4, 2, 10) == std::vector<std::size_t>{4, 5, 6, 7});
  CHECK(batch_indices(2, 0, 4, 2, 10) == std::vector<std::size_t>{8, 9, 0, 1});
}

TEST_CASE("training on easiest negatives lowers the loss") {
  auto cfg = tiny_config();
  cfg.strategy = cur::Strategy::fixed;
  cfg.fixed_level = 4;
  cfg.total_steps = 20;
  cfg.encoder.seed = 11;
  const auto data = mock_triplets(64, 11);
  const auto r = train::train(cfg, data);
  REQUIRE(r.manifest.losses.size() == 20);
  CHECK(mean(r.manifest.losses, 15, 20) < mean(r.manifest.losses, 0, 5));
  for (const auto& s : r.manifest.losses) {
    CHECK(std::isfinite(s.loss));
    CHECK(s.level == 4);
  }
}

TEST_CASE("same config twice gives identical loss logs") {
  const auto data = mock_triplets(16, 2);
  const auto a = train::train(tiny_config(), data), b = train::train(tiny_config(), data);
  CHECK(format_loss_log(a.manifest.losses) == format_loss_log(b.manifest.losses));
  CHECK(enc::serialize_checkpoint(a.model) == enc::serialize_checkpoint(b.model));
}

TEST_CASE("config errors") {
  auto c = tiny_config();
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(train::train(c, mock_triplets(8, 1)), ConfigError);
  c.loss.in_batch_negatives = false;
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(train::train(tiny_config(), mock_triplets(3, 1)), ConfigError);
}

TEST_CASE("accumulated micro-batches equal one concatenated batch") {
  const auto data = mock_triplets(24, 3);
  auto accum = tiny_config();
  accum.loss.in_batch_negatives = false;
  accum.batch_size = 2;
  accum.grad_accum = 4;
  accum.total_steps = 4;
  auto whole = accum;
  whole.batch_size = 8;
  whole.grad_accum = 1;
  const auto a = train::train(accum, data), b = train::train(whole, data);
  double worst = 0;
  for (std::size_t i = 0; i < a.model.params().size(); ++i)
    worst = std::max(worst, num::max_abs_diff(a.model.params()[i].value, b.model.params()[i].value));
  CHECK(worst < 1e-9);
  for (std::size_t s = 0; s < 4; ++s)
    CHECK(std::abs(a.manifest.losses[s].loss - b.manifest.losses[s].loss) < 1e-9);
}

TEST_CASE("each step uses the negative of its scheduled level") {
  const auto data = mock_triplets(8, 4);
  auto cfg = tiny_config();
  cfg.total_steps = 4;
  const auto r = train::train(cfg, data);
  const auto sched = cur::Schedule::build(cfg.schedule_spec());
  for (std::size_t s = 1; s <= 4; ++s) CHECK(r.manifest.losses[s - 1].level == sched.level_at(s));
  CHECK(r.manifest.losses[0].level == 4);

  // Step 1 loss is the loss of the initial model on the level-4 negatives.
  const auto init = enc::init_params(cfg.encoder);
  auto step1 = [&](int level) {
    std::vector<Example> batch;
    for (auto i : batch_indices(1, 0, cfg.batch_size, 1, data.size()))
      batch.push_back(make_example(data[i], level, cfg.instruct));
    return batch_gradients(init, batch, cfg.pooling, cfg.loss).loss;
  };
  CHECK(r.manifest.losses[0].loss == step1(4));
  CHECK(r.manifest.losses[0].loss != step1(1));
  CHECK(make_example(data[0], 2, false).negative == data[0].negatives[1]);
}

TEST_CASE("manifest and checkpoints on disk") {
  const auto dir = testing::scratch_dir("trainer_run");
  auto cfg = tiny_config();
  cfg.checkpoint_every = 4;
  const auto r = train::train(cfg, mock_triplets(8, 5), dir);
  CHECK(std::filesystem::exists(dir / "step-4.ckpt"));
  // The final step is saved as model.ckpt only.
  CHECK(!std::filesystem::exists(dir / "step-8.ckpt"));
  CHECK(std::filesystem::exists(dir / "model.ckpt"));
  CHECK(r.manifest.checkpoint_sha256 == sha256_file(dir / "model.ckpt"));
  const auto j = r.manifest.to_json();
  CHECK(j["loss_log"].size() == 8);
  CHECK(j["schedule"]["blocks"][0]["level"] == 4);
  CHECK(j["status"] == "ok");
}

TEST_CASE("train config json round trip") {
  auto c = tiny_config();
  c.strategy = cur::Strategy::reverse;
  c.loss.temperature = 20;
  const auto back = train_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(TrainConfig().loss.temperature == 50.0);
  CHECK_THROWS_AS(train_config_from_json({{"epochs", 3}}), ConfigError);
}

TEST_CASE("loss log format") {
  const auto s = format_loss_log({{1, 4, 0.5}, {2, 3, 0.25}});
  CHECK(s == "step\tlevel\tloss\n1\t4\t0.5\n2\t3\t0.25\n");
}
