#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "eevo/dvp.hpp"
#include "eevo/errors.hpp"
#include "eevo/exit_policy.hpp"
#include "test_util.hpp"

using eevo::Matrix;
using eevo::PrunedVocab;

TEST_CASE("prune selects rows by top-k logits") {
    std::mt19937 rng(41);
    const Matrix w = test_util::random_matrix(rng, 4, 2);
    const std::vector<float> logits{0.1f, 2.3f, -1.0f, 0.5f};

    const PrunedVocab pv = eevo::prune(w, logits, 2, 1);
    CHECK(pv.token_ids == std::vector<eevo::TokenId>{1, 3});
    CHECK(pv.source_exit == 1);
    CHECK(pv.rows.rows == 2);
    CHECK(std::memcmp(pv.rows.row(0), w.row(1), 2 * sizeof(float)) == 0);
    CHECK(std::memcmp(pv.rows.row(1), w.row(3), 2 * sizeof(float)) == 0);

    const PrunedVocab one = eevo::prune(w, logits, 1, 2);
    CHECK(one.token_ids == std::vector<eevo::TokenId>{1});

    CHECK_THROWS_AS(eevo::prune(w, logits, 0, 1), eevo::InvalidInput);
    CHECK_THROWS_AS(eevo::prune(w, logits, 5, 1), eevo::InvalidInput);
    CHECK_THROWS_AS(eevo::prune(w, std::vector<float>{1.0f}, 1, 1), eevo::InvalidInput);
}

TEST_CASE("prune with K = d_vocab is a row permutation of W") {
    std::mt19937 rng(42);
    const Matrix w = test_util::random_matrix(rng, 12, 6);
    const auto logits = test_util::random_vector(rng, 12);
    const PrunedVocab pv = eevo::prune(w, logits, 12, 2);

    std::vector<eevo::TokenId> ids = pv.token_ids;
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        CHECK(ids[i] == static_cast<eevo::TokenId>(i));
    }
    for (std::size_t i = 0; i < pv.size(); ++i) {
        CHECK(std::memcmp(pv.rows.row(i), w.row(static_cast<std::size_t>(pv.token_ids[i])),
                          w.cols * sizeof(float)) == 0);
    }
}

TEST_CASE("project_pruned reproduces full-projection entries bit-exactly") {
    std::mt19937 rng(43);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d_vocab = 4 + rep % 29;
        const std::size_t d_model = 2 + rep % 13;
        const Matrix w = test_util::random_matrix(rng, d_vocab, d_model);
        const auto selector = test_util::random_vector(rng, d_vocab);
        const auto h = test_util::random_vector(rng, d_model);
        std::uniform_int_distribution<std::size_t> k_dist(1, d_vocab);
        const std::size_t k = k_dist(rng);

        const PrunedVocab pv = eevo::prune(w, selector, k, 1);
        const auto pruned = eevo::project_pruned(pv, h);
        const auto full = eevo::matvec(w, h);
        for (std::size_t i = 0; i < k; ++i) {
            // Bitwise, not approximate: same kernel over the same bytes.
            CHECK(pruned[i] == full[static_cast<std::size_t>(pv.token_ids[i])]);
        }
    }
}

TEST_CASE("project_pruned of the zero state is zero") {
    std::mt19937 rng(44);
    const Matrix w = test_util::random_matrix(rng, 8, 4);
    const auto logits = test_util::random_vector(rng, 8);
    const PrunedVocab pv = eevo::prune(w, logits, 3, 1);
    const std::vector<float> zero(4, 0.0f);
    for (float v : eevo::project_pruned(pv, zero)) {
        CHECK(v == 0.0f);
    }
    CHECK_THROWS_AS(eevo::project_pruned(pv, std::vector<float>(5, 0.0f)), eevo::InvalidInput);
}

TEST_CASE("remap restores original ids") {
    std::mt19937 rng(45);
    const Matrix w = test_util::random_matrix(rng, 4, 2);
    const PrunedVocab pv = eevo::prune(w, std::vector<float>{0.1f, 2.3f, -1.0f, 0.5f}, 2, 1);
    CHECK(eevo::remap(pv, 0) == 1);
    CHECK(eevo::remap(pv, 1) == 3);
    CHECK_THROWS_AS(eevo::remap(pv, 2), eevo::InvalidInput);
}

TEST_CASE("pruned confidences dominate full-vocabulary confidences") {
    // When the top-2 indices survive pruning, renormalizing over a subset
    // can only concentrate mass: both measures are >= their full values.
    std::mt19937 rng(46);
    int strict_possible = 0;
    for (int rep = 0; rep < 400; ++rep) {
        const std::size_t n = 8 + rep % 57;
        std::uniform_int_distribution<std::size_t> k_dist(2, n);
        const std::size_t k = k_dist(rng);
        const auto logits = test_util::random_vector(rng, n, 1.5f);

        const auto order = eevo::top_k(logits, k);  // contains the top-2 since k >= 2
        std::vector<float> pruned_logits(k);
        for (std::size_t i = 0; i < k; ++i) {
            pruned_logits[i] = logits[order[i]];
        }
        const auto full_probs = eevo::softmax(logits);
        const auto pruned_probs = eevo::softmax(pruned_logits);

        const float full_max = eevo::confidence(full_probs, eevo::ConfidenceMeasure::max_softmax);
        const float pruned_max =
            eevo::confidence(pruned_probs, eevo::ConfidenceMeasure::max_softmax);
        const float full_diff = eevo::confidence(full_probs, eevo::ConfidenceMeasure::top2_diff);
        const float pruned_diff =
            eevo::confidence(pruned_probs, eevo::ConfidenceMeasure::top2_diff);

        if (k < n) {
            CHECK(pruned_max > full_max);
            CHECK(pruned_diff >= full_diff);
            ++strict_possible;
        } else {
            // K = d_vocab is a permutation: equal up to summation order.
            CHECK(pruned_max == doctest::Approx(full_max).epsilon(1e-6));
            CHECK(pruned_diff == doctest::Approx(full_diff).epsilon(1e-6));
        }
    }
    CHECK(strict_possible > 300);  // the sweep actually exercised pruning
}
