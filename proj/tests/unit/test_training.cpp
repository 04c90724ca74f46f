#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "coseg/corpus/characters.hpp"
#include "coseg/corpus/story.hpp"
#include "coseg/corpus/vocabulary.hpp"
#include "coseg/numerics/checkpoint.hpp"
#include "coseg/training/example.hpp"
#include "coseg/training/trainer.hpp"
#include "test_support.hpp"

using namespace coseg;
using namespace coseg::training;
using coseg::testing::TempDir;

namespace {

model::ModelConfig small_config(std::size_t vocab, std::size_t H = 8) {
  model::ModelConfig c;
  c.embed_dim = 8;
  c.hidden_dim = H;
  c.vocab_size = vocab;
  c.breakpoints = {0, H / 2, H};
  return c;
}

TrainConfig quick_train(std::size_t epochs = 2) {
  TrainConfig t;
  t.lr = 0.5;
  t.batch_size = 4;
  t.epochs = epochs;
  t.seed = 3;
  return t;
}

struct FixtureData {
  std::vector<corpus::Story> stories;
  corpus::Vocabulary vocab;
  std::vector<Example> train, val;
};

const FixtureData& fixture_data() {
  static const FixtureData data = [] {
    FixtureData d;
    d.stories = corpus::load_stories_jsonl(coseg::testing::fixture("stories.jsonl"));
    for (auto& s : d.stories) corpus::annotate_characters(s);
    std::vector<const corpus::Story*> ptrs;
    for (const auto& s : d.stories) ptrs.push_back(&s);
    d.vocab = corpus::Vocabulary::build(ptrs, 1);
    std::size_t i = 0;
    for (const auto& s : d.stories) {
      if (auto ex = make_example(s, d.vocab, true)) (i++ % 4 == 0 ? d.val : d.train).push_back(*ex);
    }
    return d;
  }();
  return data;
}

std::vector<double> flat_values(const ParameterStore& store) {
  std::vector<double> out;
  for (const auto& p : store) out.insert(out.end(), p->value.data().begin(), p->value.data().end());
  return out;
}

/// One hand-built example over a vocabulary of size V.
Example toy_example() {
  Example e;
  e.story_id = "toy";
  e.character_id = "tom";
  e.input.context = {{5, 6, 7}, {8, 9}};
  e.input.character.experiences = {{6, 4, 5}, {9, 4, 8, 5}};
  e.input.character.character_token = 5;
  e.target = {5, 10, 7, 3};
  return e;
}

}  // namespace

TEST(TrainConfig, ValidateAndRoundTrip) {
  TrainConfig t;
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.momentum, 0.9);
  t.momentum = 1.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.momentum = 0.5;
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.batch_size = 7;
  t.lr = 0.25;
  KeyValues kv;
  t.write(kv);
  const TrainConfig back = TrainConfig::read(kv);
  EXPECT_EQ(back.batch_size, 7u);
  EXPECT_EQ(back.lr, 0.25);
  EXPECT_EQ(back.momentum, 0.5);
}

TEST(Examples, FixtureTrainExamplesAreSufficient) {
  const auto& d = fixture_data();
  ASSERT_FALSE(d.train.empty());
  for (const auto& e : d.train) {
    EXPECT_GE(e.experience_count(), 2u);
    EXPECT_EQ(e.target.back(), corpus::Vocabulary::kEos);
    const auto* story = &*std::find_if(d.stories.begin(), d.stories.end(),
                                       [&](const corpus::Story& s) { return s.id == e.story_id; });
    const auto gt = extraction::ground_truth_character(*story);
    ASSERT_TRUE(gt.has_value());
    EXPECT_EQ(gt->canonical_id, e.character_id);
  }
}

TEST(Examples, InsufficientStoriesNeedOptIn) {
  const auto& d = fixture_data();
  std::size_t zero = 0;
  for (const auto& s : d.stories) {
    auto loose = make_example(s, d.vocab, false);
    ASSERT_TRUE(loose.has_value());
    if (loose->experience_count() < 2) EXPECT_FALSE(make_example(s, d.vocab, true).has_value());
    zero += loose->experience_count() == 0;
  }
  EXPECT_EQ(zero, 4u);
}

TEST(TrainStep, ZeroLearningRateLeavesParametersUnchanged) {
  model::CosegModel m(small_config(11), 1);
  TrainConfig t = quick_train();
  t.lr = 0.0;
  Trainer trainer(m, t);
  const Example e = toy_example();
  const Example* batch[] = {&e};
  const auto before = flat_values(m.params());
  const double l1 = trainer.train_step(batch).loss;
  const double l2 = trainer.train_step(batch).loss;
  EXPECT_EQ(flat_values(m.params()), before);
  EXPECT_EQ(l1, l2);
}

TEST(TrainStep, IdenticalBatchHasSingleExampleLoss) {
  model::CosegModel a(small_config(11), 2), b(small_config(11), 2);
  Trainer ta(a, quick_train()), tb(b, quick_train());
  const Example e = toy_example();
  const Example* one[] = {&e};
  const Example* four[] = {&e, &e, &e, &e};
  const auto ra = ta.train_step(one);
  const auto rb = tb.train_step(four);
  EXPECT_NEAR(ra.loss, rb.loss, 1e-12);
  // Mean loss: the gradient and the update are also identical.
  const auto va = flat_values(a.params()), vb = flat_values(b.params());
  for (std::size_t i = 0; i < va.size(); ++i) ASSERT_NEAR(va[i], vb[i], 1e-12);
}

TEST(TrainStep, EmptyBatchThrows) {
  model::CosegModel m(small_config(11), 1);
  Trainer trainer(m, quick_train());
  EXPECT_THROW(trainer.train_step({}), std::invalid_argument);
}

TEST(TrainStep, RepeatedSingleExampleLossDecreases) {
  // Monotone after a warmup on at least 9 of 10 seeds at H = 16.
  int monotone = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    model::ModelConfig c = small_config(11, 16);
    c.init_scale = 0.3;
    model::CosegModel m(c, seed);
    TrainConfig t = quick_train();
    t.lr = 0.2;
    Trainer trainer(m, t);
    const Example e = toy_example();
    const Example* batch[] = {&e};
    std::vector<double> losses;
    for (int i = 0; i < 60; ++i) losses.push_back(trainer.train_step(batch).loss);
    bool ok = true;
    for (std::size_t i = 21; i < losses.size(); ++i) ok = ok && losses[i] <= losses[i - 1] + 1e-9;
    monotone += ok && losses.back() < losses.front();
  }
  EXPECT_GE(monotone, 9);
}

TEST(TrainStep, NonFiniteStepsAreSkippedThenAbort) {
  model::CosegModel m(small_config(11), 1);
  Trainer trainer(m, quick_train());
  m.params().get("output.b").value[5] = std::numeric_limits<double>::quiet_NaN();
  const Example e = toy_example();
  const Example* batch[] = {&e};
  const auto before = flat_values(m.params());
  EXPECT_FALSE(trainer.train_step(batch).applied);
  EXPECT_FALSE(trainer.train_step(batch).applied);
  EXPECT_EQ(trainer.consecutive_skips(), 2u);
  EXPECT_THROW(trainer.train_step(batch), DivergenceError);
  // NaN != NaN, so compare the finite entries only.
  const auto after = flat_values(m.params());
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (std::isfinite(before[i])) EXPECT_EQ(after[i], before[i]);
  }
}

TEST(Validate, EmptySetThrows) {
  model::CosegModel m(small_config(11), 1);
  EXPECT_THROW(validate(m, {}), std::invalid_argument);
}

TEST(Validate, UniformLogitsGiveVocabularySize) {
  for (std::size_t V : {11u, 37u, 200u}) {
    model::CosegModel m(small_config(V), 1);
    m.params().get("output.W").value.fill(0.0);
    m.params().get("output.b").value.fill(0.0);
    const Example e = toy_example();
    const std::vector<Example> set(3, e);
    const auto ppl = evaluate_perplexity(m, set);
    EXPECT_NEAR(ppl.ppl, double(V), 1e-9 * double(V));
    EXPECT_EQ(ppl.tokens, 12u);
  }
}

TEST(Validate, SmallInitIsNearUniform) {
  // Default init keeps logits small, so PPL is within 2% of V.
  model::CosegModel m(small_config(101), 4);
  const std::vector<Example> set(1, toy_example());
  EXPECT_NEAR(validate(m, set), 101.0, 0.02 * 101.0);
}

TEST(Validate, FrozenModelIsDeterministic) {
  const auto& d = fixture_data();
  model::CosegModel m(small_config(d.vocab.size()), 9);
  EXPECT_EQ(validate(m, d.val), validate(m, d.val));
}

TEST(Validate, MemorisedExampleReachesPplOne) {
  model::ModelConfig c = small_config(11, 16);
  c.init_scale = 0.3;
  model::CosegModel m(c, 1);
  TrainConfig t = quick_train();
  t.lr = 1.0;
  Trainer trainer(m, t);
  const Example e = toy_example();
  const Example* batch[] = {&e};
  for (int i = 0; i < 300; ++i) trainer.train_step(batch);
  EXPECT_LE(validate(m, std::vector<Example>{e}), 1.05);
  auto out = m.generate(e.input, 10);
  EXPECT_EQ(out, e.target);
}

TEST(Batches, PartitionAndDeterminism) {
  const auto& d = fixture_data();
  const auto b1 = make_batches(d.train, 4, 3, 1);
  const auto b2 = make_batches(d.train, 4, 3, 1);
  const auto b3 = make_batches(d.train, 4, 3, 2);
  EXPECT_EQ(b1, b2);
  EXPECT_NE(b1, b3);
  std::set<const Example*> seen;
  for (const auto& b : b1) {
    EXPECT_LE(b.size(), 4u);
    EXPECT_FALSE(b.empty());
    for (auto* e : b) EXPECT_TRUE(seen.insert(e).second);
  }
  EXPECT_EQ(seen.size(), d.train.size());
  EXPECT_THROW(make_batches(d.train, 0, 3, 1), std::invalid_argument);
}

TEST(Fit, EpochsZeroLeavesModelUnchanged) {
  const auto& d = fixture_data();
  model::CosegModel m(small_config(d.vocab.size()), 1);
  const auto before = flat_values(m.params());
  TempDir dir("fit0");
  auto r = fit(m, d.train, d.val, quick_train(0), {dir.path(), false, {}});
  EXPECT_EQ(flat_values(m.params()), before);
  EXPECT_EQ(r.epochs_run, 0u);
  EXPECT_EQ(r.best_val_ppl, r.initial_val_ppl);
}

TEST(Fit, EmptyValidationThrows) {
  const auto& d = fixture_data();
  model::CosegModel m(small_config(d.vocab.size()), 1);
  TempDir dir("fitv");
  EXPECT_THROW(fit(m, d.train, {}, quick_train(), {dir.path(), false, {}}), std::invalid_argument);
}

TEST(Fit, PatienceOneStopsAndCheckpointReloads) {
  const auto& d = fixture_data();
  model::CosegModel m(small_config(d.vocab.size()), 1);
  TrainConfig t = quick_train(30);
  t.patience = 1;
  t.lr = 3.0;  // large enough to stall quickly
  TempDir dir("fitp");
  auto r = fit(m, d.train, d.val, t, {dir.path(), false, {}});
  EXPECT_LE(r.epochs_run, 30u);
  ASSERT_TRUE(std::filesystem::exists(r.best_checkpoint));
  ASSERT_TRUE(std::filesystem::exists(r.last_checkpoint));
  auto loaded = load_model_checkpoint(r.best_checkpoint);
  EXPECT_NEAR(validate(loaded.model, d.val), r.best_val_ppl, 1e-9);
  const auto log = read_training_log(dir / "train_log.csv");
  EXPECT_EQ(log.size(), r.epochs_run + 1);  // row 0 is the untrained baseline
  EXPECT_EQ(log.front().epoch, 0u);
  if (r.early_stopped) {
    ASSERT_GE(log.size(), 2u);
    EXPECT_GT(log.back().val_ppl, r.best_val_ppl - 1e-12);
  }
}

TEST(Fit, TrainingImprovesValidation) {
  const auto& d = fixture_data();
  model::CosegModel m(small_config(d.vocab.size()), 1);
  TempDir dir("fiti");
  auto r = fit(m, d.train, d.val, quick_train(4), {dir.path(), false, {}});
  EXPECT_LT(r.best_val_ppl, r.initial_val_ppl);
}

TEST(Fit, ResumeMatchesUninterruptedRun) {
  const auto& d = fixture_data();
  TempDir full("full"), part("part");
  model::CosegModel a(small_config(d.vocab.size()), 5);
  auto ra = fit(a, d.train, d.val, quick_train(4), {full.path(), false, {}});

  model::CosegModel b(small_config(d.vocab.size()), 5);
  fit(b, d.train, d.val, quick_train(2), {part.path(), false, {}});
  model::CosegModel c(small_config(d.vocab.size()), 99);  // overwritten by resume
  auto rc = fit(c, d.train, d.val, quick_train(4), {part.path(), true, {}});

  ASSERT_EQ(ra.log.size(), 5u);
  ASSERT_EQ(rc.log.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(ra.log[i].val_ppl, rc.log[i].val_ppl, 1e-9) << "epoch " << i;
    EXPECT_NEAR(ra.log[i].train_loss, rc.log[i].train_loss, 1e-9);
  }
  EXPECT_EQ(flat_values(a.params()), flat_values(c.params()));
}

TEST(Fit, SameSeedSameLog) {
  const auto& d = fixture_data();
  TempDir d1("s1"), d2("s2");
  model::CosegModel a(small_config(d.vocab.size()), 5), b(small_config(d.vocab.size()), 5);
  auto ra = fit(a, d.train, d.val, quick_train(2), {d1.path(), false, {}});
  auto rb = fit(b, d.train, d.val, quick_train(2), {d2.path(), false, {}});
  ASSERT_EQ(ra.log.size(), rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    EXPECT_EQ(ra.log[i].train_loss, rb.log[i].train_loss);
    EXPECT_EQ(ra.log[i].val_ppl, rb.log[i].val_ppl);
    EXPECT_EQ(ra.log[i].lr, rb.log[i].lr);
  }
  EXPECT_EQ(coseg::testing::read_file(d1 / "best.ckpt"), coseg::testing::read_file(d2 / "best.ckpt"));
}

TEST(Checkpoint, ModelRoundTripAndConfig) {
  const auto& d = fixture_data();
  model::ModelConfig c = small_config(d.vocab.size());
  c.fusion = model::Fusion::Cat;
  model::CosegModel m(c, 4);
  TempDir dir("ck");
  TrainConfig t = quick_train();
  save_model_checkpoint(dir / "m.ckpt", m, t, {{"data", "somewhere"}});
  auto loaded = load_model_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(loaded.model.config().fusion, model::Fusion::Cat);
  EXPECT_EQ(loaded.config.at("data"), "somewhere");
  EXPECT_FALSE(loaded.state.has_value());
  EXPECT_EQ(flat_values(loaded.model.params()), flat_values(m.params()));
  EXPECT_EQ(validate(loaded.model, d.val), validate(m, d.val));
}

TEST(TrainingLog, CsvRoundTrip) {
  TempDir dir("log");
  std::vector<EpochLog> log{{1, 2.5, 30.25, 0.1, 0.5}, {2, 2.0, 20.0, 0.05, 0.25}};
  write_training_log(dir / "l.csv", log);
  const auto text = coseg::testing::read_file(dir / "l.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,train_loss,val_ppl,lr,wall_seconds");
  const auto back = read_training_log(dir / "l.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].epoch, 2u);
  EXPECT_DOUBLE_EQ(back[1].val_ppl, 20.0);
}
