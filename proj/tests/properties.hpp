#pragma once

// Property checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "ocltx/data/source.hpp"
#include "ocltx/eval/macs.hpp"
#include "ocltx/model/transformer.hpp"
#include "ocltx/numerics/mac_counter.hpp"
#include "ocltx/streams/trainer.hpp"
#include "test_support.hpp"

namespace props {

using ocltx::model::Example;
using ocltx::model::ModelConfig;
using ocltx::model::Variant;

struct Violation {
    double max_diff = 0.0;  // largest |logit difference| where zero is required
    std::size_t checks = 0;
};

// Logits of the sequence fed in chunks of 8 through the cache.
inline std::vector<std::vector<float>> logits_of(const ModelConfig& c, const ocltx::model::ModelParams<float>& p,
                                                 const std::vector<Example>& seq) {
    return support::chunked_logits(c, p, seq, 8);
}

inline void compare_prefix(const std::vector<std::vector<float>>& a, const std::vector<std::vector<float>>& b,
                           std::size_t upto, Violation& v) {
    for (std::size_t i = 0; i < upto; ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) v.max_diff = std::max(v.max_diff, double(std::abs(a[i][j] - b[i][j])));
    ++v.checks;
}

// pi: changing y_t leaves logits at positions <= t untouched and changing x_t
// leaves logits at positions < t untouched. two_token: changing y_t leaves the
// logits of x positions <= t untouched.
inline Violation label_and_input_causality(Variant variant, std::uint64_t seed, std::size_t n = 32) {
    auto c = support::small_config(variant, 1024);
    auto p = support::random_params<float>(c, seed);
    auto seq = support::random_examples(n, c.num_classes, c.feature_dim, seed + 100);
    const auto base = logits_of(c, p, seq);
    Violation v;
    std::mt19937_64 rng(seed + 7);
    for (std::size_t t = 0; t < n; ++t) {
        auto y = seq;
        y[t].label = (y[t].label + 1 + int(rng() % std::uint64_t(c.num_classes - 1))) % c.num_classes;
        compare_prefix(base, logits_of(c, p, y), t + 1, v);
        if (variant == Variant::pi) {
            auto x = seq;
            for (auto& f : x[t].features) f += 1.0f + float(rng() % 5);
            compare_prefix(base, logits_of(c, p, x), t, v);
        }
    }
    return v;
}

// Examples whose tokens are all more than depth * C tokens older than t
// cannot influence the logits at t. For depth 1 this is the C-token window.
inline Violation window_causality(Variant variant, int depth, std::uint64_t seed, std::size_t n = 32) {
    auto c = support::small_config(variant, 5);
    c.depth = depth;
    auto p = support::random_params<float>(c, seed);
    auto seq = support::random_examples(n, c.num_classes, c.feature_dim, seed + 200);
    const auto base = logits_of(c, p, seq);
    const std::int64_t tpe = c.tokens_per_example(), reach = std::int64_t(depth) * c.window;
    Violation v;
    for (std::size_t s = 0; s < n; ++s) {
        auto mod = seq;
        for (auto& f : mod[s].features) f = -f + 3.0f;
        mod[s].label = (mod[s].label + 2) % c.num_classes;
        const auto out = logits_of(c, p, mod);
        // newest token of example s vs the (x) token of example t
        const std::int64_t newest = std::int64_t(s) * tpe + tpe - 1;
        for (std::size_t t = s; t < n; ++t) {
            if (std::int64_t(t) * tpe - newest <= reach) continue;
            for (std::size_t j = 0; j < out[t].size(); ++j)
                v.max_diff = std::max(v.max_diff, double(std::abs(out[t][j] - base[t][j])));
            ++v.checks;
        }
    }
    return v;
}

// Attention weight of every token on itself (pi) must be exactly zero.
inline Violation zero_diagonal(std::uint64_t seed, std::size_t n = 32) {
    auto c = support::small_config(Variant::pi, 12);
    auto p = support::random_params<float>(c, seed);
    auto seq = support::random_examples(n, c.num_classes, c.feature_dim, seed + 300);
    auto caches = ocltx::model::make_caches<float>(c);
    Violation v;
    for (std::size_t s = 0; s < n; s += 8) {
        ocltx::model::ForwardTrace<float> trace;
        ocltx::model::forward_chunk(c, p, std::span<const Example>(seq.data() + s, 8), caches, &trace);
        for (const auto& bt : trace.blocks)
            for (std::size_t q = 0; q < bt.query_positions.size(); ++q)
                for (std::size_t k = 0; k < bt.key_positions.size(); ++k)
                    if (bt.key_positions[k] == bt.query_positions[q])
                        for (int h = 0; h < c.num_query_heads; ++h) {
                            v.max_diff = std::max(
                                v.max_diff,
                                double(bt.attention.at(q * std::size_t(c.num_query_heads) + std::size_t(h), k)));
                            ++v.checks;
                        }
    }
    return v;
}

// Largest |chunked - monolithic| logit difference, single precision.
inline double chunking_gap(Variant variant, std::uint64_t seed, std::size_t n = 64, std::size_t chunk = 8,
                           int window = 128) {
    auto c = support::small_config(variant, window);
    c.width = 16;
    c.num_query_heads = 4;
    c.key_dim = 8;
    c.value_dim = 8;
    c.rotary_dims = 4;
    auto p = support::random_params<float>(c, seed);
    auto seq = support::random_examples(n, c.num_classes, c.feature_dim, seed + 400);
    auto chunked = support::chunked_logits(c, p, seq, chunk);
    auto mono = support::chunked_logits(c, p, seq, n);
    double gap = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < mono[i].size(); ++j) gap = std::max(gap, double(std::abs(chunked[i][j] - mono[i][j])));
    return gap;
}

// Final-turn replay chunk start of one replay stream driven by the real
// maybe_reset, without any model: returns a histogram over chunk indices.
inline std::vector<std::size_t> simulate_replay(std::int64_t total, int chunk, int trials, std::uint64_t seed) {
    std::vector<ocltx::data::AnnotatedExample> ex(static_cast<std::size_t>(total));
    for (auto& e : ex) e.example = {{0.0f}, 0};
    auto src = std::make_shared<ocltx::data::InMemorySource>(ex, 1, 1);
    ModelConfig c;
    c.depth = 1;
    c.window = 0;
    c.num_classes = 1;
    c.feature_dim = 1;
    const std::int64_t turns = (total + chunk - 1) / chunk;
    std::vector<std::size_t> hist(std::size_t(turns), 0);
    for (int trial = 0; trial < trials; ++trial) {
        ocltx::streams::StreamState<float> replay(1, src, c, ocltx::data::mix_seed(seed, std::uint64_t(trial)));
        std::int64_t start = 0;
        for (std::int64_t turn = 0; turn < turns; ++turn) {
            const std::int64_t lead = turn * chunk, lead_end = std::min(total, lead + chunk);
            ocltx::streams::maybe_reset(replay, lead, chunk);
            start = replay.reader.position();
            const auto len = std::min<std::int64_t>(chunk, lead_end - start);
            if (len > 0) replay.reader.next_chunk(std::size_t(len));
        }
        ++hist[std::size_t(start / chunk)];
    }
    return hist;
}

// Exact law of the replay chunk index at each turn given the reset rule.
inline std::vector<double> replay_chunk_law(std::int64_t turns, int chunk) {
    std::vector<double> law{1.0};  // turn 0: chunk 0
    for (std::int64_t n = 1; n < turns; ++n) {
        const double r = ocltx::streams::reset_probability(n * chunk, chunk);
        std::vector<double> next(std::size_t(n + 1), 0.0);
        next[0] = r;
        for (std::size_t j = 0; j < law.size(); ++j) next[j + 1] += (1 - r) * law[j];
        law = std::move(next);
    }
    return law;
}

// Total-variation distance on `bins` equal ranges of chunk indices.
inline double binned_tv(const std::vector<std::size_t>& hist, const std::vector<double>& law, std::size_t bins) {
    double n = 0;
    for (auto h : hist) n += double(h);
    const std::size_t width = (hist.size() + bins - 1) / bins;
    double tv = 0;
    for (std::size_t b = 0; b < bins; ++b) {
        double emp = 0, exp = 0;
        for (std::size_t j = b * width; j < std::min(hist.size(), (b + 1) * width); ++j) {
            emp += double(hist[j]) / n;
            exp += j < law.size() ? law[j] : 0.0;
        }
        tv += std::abs(emp - exp);
    }
    return tv / 2;
}

struct MacComparison {
    std::uint64_t analytic = 0;
    std::uint64_t instrumented = 0;
    std::uint64_t backward = 0;
};

inline ModelConfig random_config(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return lo + int(rng() % std::uint64_t(hi - lo + 1)); };
    ModelConfig c;
    c.variant = pick(0, 1) ? Variant::pi : Variant::two_token;
    c.width = 4 * pick(1, 6);
    c.depth = pick(1, 3);
    c.num_query_heads = pick(1, 4);
    c.key_dim = 2 * pick(1, 4);
    c.value_dim = pick(1, 7);
    c.window = pick(0, 40);
    c.num_classes = pick(2, 9);
    c.feature_dim = pick(1, 12);
    c.ffw_multiplier = pick(1, 4);
    c.rotary_dims = 2 * pick(0, c.key_dim / 2);
    c.use_features = pick(0, 3) != 0;
    return c;
}

// Runs a training-style sequence of chunks of random sizes and compares the
// operation-level MAC counter with the analytic count, chunk by chunk.
inline MacComparison compare_macs(const ModelConfig& c, std::uint64_t seed, std::size_t total = 60) {
    auto p = ocltx::model::init_params<double>(c, seed);
    for (auto& t : p.list()) t.set_requires_grad(true);
    auto seq = support::random_examples(total, c.num_classes, c.feature_dim, seed + 500);
    auto caches = ocltx::model::make_caches<double>(c);
    std::mt19937_64 rng(seed);
    MacComparison out;
    for (std::size_t s = 0; s < total;) {
        const std::size_t n = std::min<std::size_t>(total - s, 1 + rng() % 13);
        ocltx::num::reset_mac_counter();
        auto logits = ocltx::model::forward_chunk(c, p, std::span<const Example>(seq.data() + s, n), caches);
        out.instrumented += ocltx::num::mac_counter().forward;
        out.analytic += ocltx::eval::macs_forward(c, std::int64_t(n), std::int64_t(s));
        ocltx::num::sum(logits).backward();
        out.backward += ocltx::num::mac_counter().backward;
        s += n;
    }
    return out;
}

}  // namespace props
