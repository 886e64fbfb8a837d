#include <gtest/gtest.h>

#include <cmath>

#include "ocltx/data/gaussian_blobs.hpp"
#include "ocltx/data/split_sequence.hpp"
#include "ocltx/errors.hpp"
#include "ocltx/model/checkpoint.hpp"
#include "ocltx/streams/trainer.hpp"
#include "properties.hpp"

using namespace ocltx;

namespace {

model::ModelConfig tiny(int K = 4, int F = 3) {
    model::ModelConfig c;
    c.width = 8;
    c.depth = 1;
    c.num_query_heads = 2;
    c.key_dim = 4;
    c.value_dim = 4;
    c.window = 16;
    c.num_classes = K;
    c.feature_dim = F;
    c.ffw_multiplier = 2;
    c.rotary_dims = 2;
    return c;
}

std::shared_ptr<data::SplitSequence> blobs(int tasks, int per_task, std::uint64_t seed) {
    auto base = std::make_shared<data::BaseDataset>(data::gaussian_blob_dataset(9, 3, 0.3, seed, 30));
    return std::make_shared<data::SplitSequence>(base, data::SequenceSpec{tasks, per_task, 4, seed});
}

std::shared_ptr<data::InMemorySource> constant_label(std::size_t n, int K, int label) {
    std::vector<data::AnnotatedExample> ex(n);
    for (std::size_t i = 0; i < n; ++i) {
        ex[i].example = {{0.1f * float(i % 3), -0.2f, 0.5f}, label};
        ex[i].within_task_pos = int(i);
    }
    return std::make_shared<data::InMemorySource>(ex, K, 3);
}

}  // namespace

TEST(TrainerConfig, DefaultLearningRateIsAlphaOverWidth) {
    streams::TrainerConfig t;
    t.alpha0 = 3e-2;
    EXPECT_DOUBLE_EQ(t.effective_learning_rate(64), 3e-2 / 64);
    t.learning_rate = 0.5;
    EXPECT_DOUBLE_EQ(t.effective_learning_rate(64), 0.5);
}

TEST(TrainerConfig, ValidationNamesField) {
    streams::TrainerConfig t;
    t.num_streams = 0;
    try {
        t.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "trainer.num_streams");
    }
}

TEST(ResetProbability, Examples) {
    EXPECT_EQ(streams::reset_probability(10, 10), 1.0);
    EXPECT_EQ(streams::reset_probability(0, 10), 1.0);
    EXPECT_EQ(streams::reset_probability(5, 10), 1.0);
    EXPECT_DOUBLE_EQ(streams::reset_probability(40, 10), 0.25);
    EXPECT_LT(streams::reset_probability(std::int64_t(1) << 40, 10), 1e-10);
}

TEST(MaybeReset, ClearsReaderAndCaches) {
    auto src = blobs(2, 20, 1);
    auto c = tiny();
    streams::StreamState<float> s(1, src, c, 3);
    auto chunk = s.reader.next_chunk(5);
    std::vector<model::Example> ex;
    for (auto& a : chunk) ex.push_back(a.example);
    model::forward_chunk(c, model::init_params<float>(c, 1), std::span<const model::Example>(ex), s.caches);
    EXPECT_TRUE(streams::maybe_reset(s, 5, 5));
    EXPECT_EQ(s.reader.position(), 0);
    EXPECT_EQ(s.caches.total_tokens_seen(), 0);
}

TEST(ReplayLaw, ExactlyUniformOverPastChunks) {
    // Dynamic-programming oracle: after n turns the replayed chunk is uniform
    // over chunks 0..n-1.
    for (std::int64_t turns : {2, 5, 200}) {
        auto law = props::replay_chunk_law(turns, 10);
        const auto n = turns - 1;
        for (std::int64_t j = 0; j < n; ++j) EXPECT_NEAR(law[std::size_t(j)], 1.0 / double(n), 1e-12);
        EXPECT_NEAR(law[std::size_t(n)], 0.0, 1e-15);
    }
}

TEST(ReplayLaw, MonteCarloMatchesExactLaw) {
    auto hist = props::simulate_replay(400, 10, 4000, 11);
    auto law = props::replay_chunk_law(40, 10);
    EXPECT_LT(props::binned_tv(hist, law, 5), 0.03);
    EXPECT_EQ(hist.back(), 0u);  // never replays the chunk stream 0 just read
}

TEST(TrainSequence, StepCountsAndMetricCoverage) {
    auto c = tiny();
    auto src = blobs(10, 100, 2);
    streams::TrainerConfig t;
    t.num_streams = 4;
    t.chunk_size = 10;
    auto p = model::init_params<float>(c, 1);
    auto r = streams::train_sequence(c, p, src, t);
    EXPECT_EQ(r.stream0_steps, 100);
    EXPECT_EQ(r.replay_steps, 300);
    EXPECT_EQ(r.gradient_steps, 400);
    ASSERT_EQ(r.log.size(), 1000u);
    for (std::size_t i = 0; i < r.log.size(); ++i) EXPECT_EQ(r.log.records[i].position, std::int64_t(i));
    r.log.validate();
}

TEST(TrainSequence, SingleStreamTakesCeilTOverSSteps) {
    auto c = tiny();
    auto src = blobs(1, 95, 3);
    streams::TrainerConfig t;
    t.chunk_size = 10;
    auto p = model::init_params<float>(c, 1);
    auto r = streams::train_sequence(c, p, src, t);
    EXPECT_EQ(r.gradient_steps, 10);
    EXPECT_EQ(r.log.size(), 95u);
}

TEST(TrainSequence, FirstChunkLossIsLogK) {
    auto c = tiny(7);
    auto base = std::make_shared<data::BaseDataset>(data::gaussian_blob_dataset(9, 3, 0.3, 4, 30));
    auto src = std::make_shared<data::SplitSequence>(base, data::SequenceSpec{1, 40, 7, 4});
    streams::TrainerConfig t;
    t.chunk_size = 20;
    auto p = model::init_params<float>(c, 5);
    auto r = streams::train_sequence(c, p, src, t);
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(r.log.records[std::size_t(i)].nll, std::log(7.0), 1e-6);
}

TEST(TrainSequence, BitwiseReproducible) {
    auto c = tiny();
    streams::TrainerConfig t;
    t.num_streams = 3;
    t.chunk_size = 7;
    t.seed = 9;
    auto run = [&] {
        auto p = model::init_params<float>(c, 2);
        return streams::train_sequence(c, p, blobs(3, 50, 5), t).log;
    };
    auto a = run(), b = run();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.records[i].nll, b.records[i].nll);
        EXPECT_EQ(a.records[i].correct, b.records[i].correct);
    }
}

TEST(TrainSequence, LearnsConstantLabel) {
    auto c = tiny(2);
    streams::TrainerConfig t;
    t.chunk_size = 1;
    t.learning_rate = 1e-2;
    auto p = model::init_params<float>(c, 3);
    auto r = streams::train_sequence(c, p, constant_label(500, 2, 1), t);
    int correct = 0;
    for (std::size_t i = 400; i < 500; ++i) correct += r.log.records[i].correct;
    EXPECT_EQ(correct, 100);
}

TEST(TrainSequence, PredictionsPrecedeTraining) {
    // The metric at each position must not depend on that example's label.
    auto c = tiny();
    streams::TrainerConfig t;
    t.num_streams = 2;
    t.chunk_size = 5;
    auto run = [&](int flip) {
        std::vector<data::AnnotatedExample> ex;
        auto src = blobs(1, 30, 6);
        for (std::int64_t i = 0; i < 30; ++i) ex.push_back(src->at(i));
        if (flip >= 0) ex[std::size_t(flip)].example.label = (ex[std::size_t(flip)].example.label + 1) % 4;
        auto p = model::init_params<float>(c, 4);
        return streams::train_sequence(c, p, std::make_shared<data::InMemorySource>(ex, 4, 3), t).log;
    };
    auto base = run(-1);
    for (int flip : {7, 13, 22}) {
        auto log = run(flip);
        for (int i = 0; i <= flip; ++i) {
            // same logits up to the flipped position; nll at `flip` uses the new label
            if (i < flip) EXPECT_EQ(log.records[std::size_t(i)].nll, base.records[std::size_t(i)].nll) << flip;
        }
    }
}

TEST(TrainSequence, GradientStopFreezesParameters) {
    auto c = tiny();
    auto src = blobs(2, 50, 7);
    streams::TrainerConfig t;
    t.num_streams = 2;
    t.chunk_size = 10;
    t.update_gate = [](std::int64_t end) { return end <= 0; };
    auto p = model::init_params<float>(c, 8);
    auto init = model::init_params<float>(c, 8);
    auto r = streams::train_sequence(c, p, src, t);
    EXPECT_EQ(r.gradient_steps, 0);
    EXPECT_EQ(r.replay_steps, 0);
    auto a = p.list(), b = init.list();
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) ASSERT_EQ(a[i].values()[j], b[i].values()[j]);
    for (const auto& rec : r.log.records) EXPECT_NEAR(rec.nll, std::log(4.0), 1e-6);
}

TEST(TrainSequence, ErrorsOnShortSourceAndMismatchedClasses) {
    auto c = tiny();
    streams::TrainerConfig t;
    t.total_examples = 1000;
    auto p = model::init_params<float>(c, 1);
    EXPECT_THROW(streams::train_sequence(c, p, blobs(1, 20, 1), t), DataError);
    auto c5 = tiny(5);
    auto p5 = model::init_params<float>(c5, 1);
    EXPECT_THROW(streams::train_sequence(c5, p5, blobs(1, 20, 1), streams::TrainerConfig{}), ConfigError);
}

TEST(TrainSequence, NonFiniteLossAbortsWithPosition) {
    auto c = tiny();
    std::vector<data::AnnotatedExample> ex(30);
    for (std::size_t i = 0; i < ex.size(); ++i) ex[i].example = {{0.1f, 0.2f, i == 17 ? NAN : 0.3f}, 1};
    auto src = std::make_shared<data::InMemorySource>(ex, 4, 3);
    streams::TrainerConfig t;
    t.chunk_size = 5;
    auto p = model::init_params<float>(c, 1);
    try {
        streams::train_sequence(c, p, src, t);
        FAIL();
    } catch (const NonFiniteError& e) {
        EXPECT_EQ(e.stream(), 0);
        EXPECT_EQ(e.position(), 15);
    }
}

TEST(TrainSequence, WritesCheckpoints) {
    auto dir = std::filesystem::temp_directory_path() / "ocltx_trainer_ckpt";
    std::filesystem::remove_all(dir);
    auto c = tiny();
    streams::TrainerConfig t;
    t.chunk_size = 10;
    t.checkpoint_every = 2;
    t.checkpoint_path = dir / "model.ckpt";
    auto p = model::init_params<float>(c, 1);
    streams::train_sequence(c, p, blobs(1, 50, 2), t);
    auto q = model::load_checkpoint<float>(t.checkpoint_path);
    EXPECT_EQ(q.w_head.values()[0], p.w_head.values()[0]);
    std::filesystem::remove_all(dir);
}
