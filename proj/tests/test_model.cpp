#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ocltx/errors.hpp"
#include "ocltx/model/checkpoint.hpp"
#include "ocltx/model/config.hpp"
#include "ocltx/model/kv_cache.hpp"
#include "ocltx/model/params.hpp"
#include "ocltx/model/transformer.hpp"
#include "ocltx/numerics/grad_check.hpp"
#include "ocltx/numerics/ops.hpp"
#include "grad_suite.hpp"
#include "reference_model.hpp"
#include "test_support.hpp"

using namespace ocltx;
using model::Variant;
using num::Tensor;

TEST(ModelConfig, ValidateNamesField) {
    model::ModelConfig c;
    c.window = -1;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "model.window");
    }
    c = {};
    c.rotary_dims = 3;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ModelConfig, TextRoundTrip) {
    auto c = support::small_config(Variant::two_token, 9);
    c.use_features = false;
    model::ModelConfig d;
    std::istringstream in(model::to_text(c));
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find(" = ");
        ASSERT_TRUE(model::set_model_field(d, line.substr(0, eq), line.substr(eq + 3)));
    }
    EXPECT_EQ(model::to_text(d), model::to_text(c));
    EXPECT_FALSE(model::set_model_field(d, "trainer.chunk_size", "3"));
    EXPECT_THROW(model::set_model_field(d, "model.colour", "3"), ConfigError);
    EXPECT_THROW(model::set_model_field(d, "model.width", "wide"), ConfigError);
}

TEST(KvCacheFloats, Examples) {
    EXPECT_EQ(model::kv_cache_floats(8, 128, 1024), 1048576);
    EXPECT_EQ(model::kv_cache_floats(1, 1, 0), 0);
    EXPECT_EQ(model::kv_cache_floats(4, 64, 512), 131072);
}

TEST(KvCache, RingKeepsMostRecent) {
    model::KvCache<double> cache(3, 1, 2);
    for (int i = 0; i < 5; ++i) {
        std::vector<double> k{double(i)}, v{double(i), -double(i)};
        cache.push(k, v);
    }
    EXPECT_EQ(cache.size(), 3u);
    EXPECT_EQ(cache.total_tokens_seen(), 5);
    EXPECT_EQ(cache.oldest_position(), 2);
    EXPECT_EQ(cache.ordered_keys(), (std::vector<double>{2, 3, 4}));
    EXPECT_EQ(cache.ordered_values(), (std::vector<double>{2, -2, 3, -3, 4, -4}));
    cache.clear();
    EXPECT_EQ(cache.size(), 0u);
    EXPECT_EQ(cache.total_tokens_seen(), 0);
}

TEST(KvCache, PushRowsEqualsRepeatedPush) {
    model::KvCache<double> a(4, 2, 1), b(4, 2, 1);
    std::vector<double> keys, values;
    for (int i = 0; i < 7; ++i) {
        keys.insert(keys.end(), {double(i), double(10 * i)});
        values.push_back(-double(i));
        std::vector<double> k{double(i), double(10 * i)}, v{-double(i)};
        a.push(k, v);
    }
    b.push_rows(keys, values, 7);
    EXPECT_EQ(a.ordered_keys(), b.ordered_keys());
    EXPECT_EQ(a.ordered_values(), b.ordered_values());
    EXPECT_EQ(a.write_cursor(), b.write_cursor());
    EXPECT_EQ(a.total_tokens_seen(), b.total_tokens_seen());
}

TEST(KvCache, ZeroCapacityOnlyCounts) {
    model::KvCache<float> c(0, 2, 2);
    std::vector<float> k{1, 2}, v{3, 4};
    c.push(k, v);
    EXPECT_EQ(c.size(), 0u);
    EXPECT_EQ(c.total_tokens_seen(), 1);
}

TEST(KvCache, OneKeyAndValuePerTokenRegardlessOfHeads) {
    for (int heads : {1, 4}) {
        auto c = support::small_config(Variant::pi, 32);
        c.num_query_heads = heads;
        auto p = model::init_params<float>(c, 1);
        auto caches = model::make_caches<float>(c);
        auto seq = support::random_examples(10, c.num_classes, c.feature_dim, 2);
        model::forward_chunk(c, p, std::span<const model::Example>(seq), caches);
        EXPECT_EQ(caches.stored_floats(), std::size_t(c.depth * 10 * (c.key_dim + c.value_dim)));
    }
}

TEST(EmbedInputs, TokenCounts) {
    auto seq = support::random_examples(3, 5, 6, 3);
    auto pi = support::small_config(Variant::pi);
    auto p = model::init_params<double>(pi, 1);
    auto e = model::embed_inputs(pi, p, std::span<const model::Example>(seq), 0);
    EXPECT_EQ(e.tokens.rows(), 3u);
    EXPECT_EQ(e.privileged.rows(), 3u);

    auto tt = support::small_config(Variant::two_token);
    auto q = model::init_params<double>(tt, 1);
    auto f = model::embed_inputs(tt, q, std::span<const model::Example>(seq), 4);
    EXPECT_EQ(f.tokens.rows(), 6u);
    EXPECT_FALSE(f.privileged.defined());
    EXPECT_EQ(f.positions, (std::vector<std::int64_t>{4, 5, 6, 7, 8, 9}));
}

TEST(EmbedInputs, DeterministicAndChecksFeatureWidth) {
    auto c = support::small_config(Variant::pi);
    auto p = model::init_params<double>(c, 1);
    auto seq = support::random_examples(1, 5, 6, 3);
    std::vector<model::Example> twice{seq[0], seq[0]};
    auto e = model::embed_inputs(c, p, std::span<const model::Example>(twice), 0);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(e.tokens.at(0, j), e.tokens.at(1, j));
    twice[1].features.pop_back();
    EXPECT_THROW(model::embed_inputs(c, p, std::span<const model::Example>(twice), 0), DimensionError);
}

TEST(AttentionMask, Examples) {
    std::vector<std::int64_t> q0{0};
    auto m = model::build_attention_mask(Variant::pi, q0, q0, 4);
    EXPECT_FALSE(m.at(0, 0));
    auto t = model::build_attention_mask(Variant::two_token, q0, q0, 4);
    EXPECT_TRUE(t.at(0, 0));

    std::vector<std::int64_t> q5{5}, keys{0, 1, 2, 3, 4, 5};
    auto w = model::build_attention_mask(Variant::pi, q5, keys, 2);
    for (std::size_t k = 0; k < keys.size(); ++k) EXPECT_EQ(w.at(0, k), k == 3 || k == 4) << k;
}

TEST(InitParams, SeedDeterminism) {
    auto c = support::small_config(Variant::pi);
    auto a = model::init_params<float>(c, 7).list(), b = model::init_params<float>(c, 7).list(),
         d = model::init_params<float>(c, 8).list();
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].shape(), b[i].shape());
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            EXPECT_EQ(a[i].values()[j], b[i].values()[j]);
            differs = differs || a[i].values()[j] != d[i].values()[j];
        }
    }
    EXPECT_TRUE(differs);
}

TEST(InitParams, LabelProjectionsOnlyForPi) {
    auto pi = model::init_params<float>(support::small_config(Variant::pi), 1);
    auto tt = model::init_params<float>(support::small_config(Variant::two_token), 1);
    EXPECT_TRUE(pi.blocks[0].w_k_label.defined());
    EXPECT_FALSE(tt.blocks[0].w_k_label.defined());
    EXPECT_TRUE(tt.label_embedding.defined());
    EXPECT_EQ(pi.blocks[0].w_k.shape(), (num::Shape{8, 4}));  // one shared key projection
}

TEST(ForwardChunk, InitialLossIsLogK) {
    for (auto v : {Variant::pi, Variant::two_token}) {
        auto c = support::small_config(v);
        auto p = model::init_params<float>(c, 3);
        auto caches = model::make_caches<float>(c);
        auto seq = support::random_examples(7, c.num_classes, c.feature_dim, 4);
        auto logits = model::forward_chunk(c, p, std::span<const model::Example>(seq), caches);
        EXPECT_EQ(logits.shape(), (num::Shape{7, 5}));
        std::vector<int> labels;
        for (auto& e : seq) labels.push_back(e.label);
        auto nll = num::cross_entropy(logits, std::span<const int>(labels));
        for (float x : nll.values())
            EXPECT_NEAR(x, std::log(5.0), 1e-6);
    }
}

TEST(ForwardChunk, HandSetTinyModelMatchesLoopReference) {
    model::ModelConfig c;
    c.variant = Variant::pi;
    c.width = 2;
    c.depth = 1;
    c.num_query_heads = 1;
    c.key_dim = 1;
    c.value_dim = 1;
    c.window = 4;
    c.num_classes = 2;
    c.feature_dim = 2;
    c.ffw_multiplier = 1;
    c.rotary_dims = 0;
    auto p = model::init_params<double>(c, 0);
    auto set = [](Tensor<double>& t, std::vector<double> v) {
        auto m = t.mutable_values();
        ASSERT_EQ(m.size(), v.size());
        std::copy(v.begin(), v.end(), m.begin());
    };
    set(p.w_in, {1.0, 0.5, -0.5, 2.0});
    auto& b = p.blocks[0];
    set(b.ln_scale, {1.5, 0.5});
    set(b.ln_offset, {0.1, -0.2});
    set(b.w_up, {0.3, -0.7, 1.1, 0.2});
    set(b.w_down, {0.6, 0.4, -0.3, 0.9});
    set(b.w_q, {0.8, -1.2});
    set(b.w_k, {0.5, 0.25});
    set(b.w_v, {-1.0, 2.0});
    set(b.w_k_label, {0.3, -0.4});
    set(b.w_v_label, {1.5, -0.5});
    set(b.w_out, {0.7, -0.9});
    set(p.final_ln_scale, {1.0, 2.0});
    set(p.final_ln_offset, {0.0, 0.5});
    set(p.w_head, {1.0, -1.0, 0.5, 2.0});

    std::vector<model::Example> seq{{{0.2f, -1.0f}, 1}, {{1.5f, 0.25f}, 0}};
    auto expected = ref::logits(c, p, seq);
    auto caches = model::make_caches<double>(c);
    auto got = model::forward_chunk(c, p, std::span<const model::Example>(seq), caches);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(got.at(i, j), expected[i][j], 1e-12);
    // the second token attends to the first, so the two rows differ in structure
    EXPECT_NE(got.at(1, 0), got.at(1, 1));
}

TEST(ForwardChunk, RandomConfigsMatchLoopReferenceWhenChunked) {
    for (auto v : {Variant::pi, Variant::two_token}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto c = support::small_config(v, 5 + int(seed) * 3);
            auto p = support::random_params<double>(c, seed);
            auto seq = support::random_examples(13, c.num_classes, c.feature_dim, seed + 10);
            auto expected = ref::logits(c, p, seq);
            auto got = support::chunked_logits(c, p, seq, 4);
            for (std::size_t i = 0; i < seq.size(); ++i)
                for (int j = 0; j < c.num_classes; ++j)
                    EXPECT_NEAR(got[i][j], expected[i][j], 1e-10) << model::to_string(v) << " seed " << seed;
        }
    }
}

TEST(ForwardChunk, NoImageAblationUsesConstantToken) {
    auto c = support::small_config(Variant::pi);
    c.use_features = false;
    auto p = support::random_params<double>(c, 1);
    auto seq = support::random_examples(6, c.num_classes, c.feature_dim, 2);
    auto a = support::chunked_logits(c, p, seq, 3);
    for (auto& e : seq) e.features.assign(e.features.size(), 42.0f);
    EXPECT_EQ(a, support::chunked_logits(c, p, seq, 3));
    EXPECT_EQ(a, (support::chunked_logits(c, p, seq, 3)));
    auto expected = ref::logits(c, p, seq);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(a[i][0], expected[i][0], 1e-10);
}

TEST(BlockForward, ZeroLabelProjectionsEqualPlainBlock) {
    auto c = support::small_config(Variant::pi);
    auto p = support::random_params<double>(c, 2);
    auto& b = p.blocks[0];
    b.w_k_label.mutable_values();
    for (auto& x : b.w_k_label.mutable_values()) x = 0;
    for (auto& x : b.w_v_label.mutable_values()) x = 0;
    auto seq = support::random_examples(5, c.num_classes, c.feature_dim, 3);
    auto e = model::embed_inputs(c, p, std::span<const model::Example>(seq), 0);
    model::KvCache<double> c1(c.window, c.key_dim, c.value_dim), c2(c.window, c.key_dim, c.value_dim);
    auto with = model::block_forward(c, b, e.tokens, e.privileged, e.positions, c1);
    auto without = model::block_forward(c, b, e.tokens, Tensor<double>(), e.positions, c2);
    for (std::size_t i = 0; i < with.size(); ++i) EXPECT_EQ(with.values()[i], without.values()[i]);
}

TEST(BlockForward, ZeroWindowLeavesResidualPlusFeedForward) {
    auto c = support::small_config(Variant::pi, 0);
    auto p = support::random_params<double>(c, 3);
    auto& b = p.blocks[0];
    auto seq = support::random_examples(4, c.num_classes, c.feature_dim, 4);
    auto e = model::embed_inputs(c, p, std::span<const model::Example>(seq), 0);
    model::KvCache<double> cache(0, c.key_dim, c.value_dim);
    auto y = model::block_forward(c, b, e.tokens, e.privileged, e.positions, cache);
    auto hb = num::layer_norm(e.tokens, b.ln_scale, b.ln_offset);
    auto expected = num::add(e.tokens, num::matmul(num::gelu(num::matmul(hb, b.w_up)), b.w_down));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.values()[i], expected.values()[i], 1e-14);
}

TEST(BlockForward, ErrorsOnCacheMismatch) {
    auto c = support::small_config(Variant::pi);
    auto p = model::init_params<double>(c, 1);
    auto seq = support::random_examples(2, c.num_classes, c.feature_dim, 4);
    auto e = model::embed_inputs(c, p, std::span<const model::Example>(seq), 0);
    model::KvCache<double> wrong(c.window + 1, c.key_dim, c.value_dim);
    EXPECT_THROW(model::block_forward(c, p.blocks[0], e.tokens, e.privileged, e.positions, wrong), ConfigError);

    auto caches = model::make_caches<double>(c);
    std::vector<double> k(std::size_t(c.key_dim)), v(std::size_t(c.value_dim));
    caches.block(1).push(k, v);
    EXPECT_THROW(model::forward_chunk(c, p, std::span<const model::Example>(seq), caches), StateError);
}

TEST(ForwardChunk, ZeroDiagonalInEveryBlockAndHead) {
    auto c = support::small_config(Variant::pi, 6);
    auto p = support::random_params<float>(c, 5);
    auto seq = support::random_examples(12, c.num_classes, c.feature_dim, 6);
    auto caches = model::make_caches<float>(c);
    for (int chunk = 0; chunk < 3; ++chunk) {
        model::ForwardTrace<float> trace;
        model::forward_chunk(c, p, std::span<const model::Example>(seq.data() + 4 * chunk, 4), caches, &trace);
        for (const auto& bt : trace.blocks) {
            for (std::size_t q = 0; q < bt.query_positions.size(); ++q)
                for (std::size_t k = 0; k < bt.key_positions.size(); ++k)
                    if (bt.key_positions[k] >= bt.query_positions[q])
                        for (int h = 0; h < c.num_query_heads; ++h)
                            EXPECT_EQ(bt.attention.at(q * std::size_t(c.num_query_heads) + std::size_t(h), k), 0.0f);
        }
    }
}

TEST(ForwardChunk, BlockLossGradientsMatchCentralDifferences) {
    for (auto v : {Variant::pi, Variant::two_token})
        EXPECT_LT(gradsuite::block_loss_gradient_error(v, 11), 1e-4) << model::to_string(v);
}

TEST(Checkpoint, RoundTripAndFormatErrors) {
    auto dir = std::filesystem::temp_directory_path() / "ocltx_ckpt_test";
    std::filesystem::create_directories(dir);
    auto c = support::small_config(Variant::two_token, 7);
    auto p = support::random_params<float>(c, 4);
    model::save_checkpoint(dir / "a.ckpt", c, p);
    model::ModelConfig loaded_cfg;
    auto q = model::load_checkpoint<float>(dir / "a.ckpt", &loaded_cfg);
    EXPECT_EQ(model::to_text(loaded_cfg), model::to_text(c));
    auto a = p.list(), b = q.list();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) EXPECT_EQ(a[i].values()[j], b[i].values()[j]);

    {
        std::ofstream bad(dir / "bad.ckpt");
        bad << "NOT A CHECKPOINT\n";
    }
    EXPECT_THROW(model::load_checkpoint<float>(dir / "bad.ckpt"), FormatError);

    auto size = std::filesystem::file_size(dir / "a.ckpt");
    std::filesystem::copy_file(dir / "a.ckpt", dir / "short.ckpt", std::filesystem::copy_options::overwrite_existing);
    std::filesystem::resize_file(dir / "short.ckpt", size - 4);
    EXPECT_THROW(model::load_checkpoint<float>(dir / "short.ckpt"), FormatError);
    std::filesystem::remove_all(dir);
}
