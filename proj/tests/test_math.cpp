#include <doctest.h>

#include <numeric>
#include <random>

#include "eevo/errors.hpp"
#include "eevo/math.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using eevo::Matrix;
using test_util::close;

TEST_CASE("matvec identity and small cases") {
    Matrix id(3, 3);
    id.at(0, 0) = id.at(1, 1) = id.at(2, 2) = 1.0f;
    const std::vector<float> h{1.0f, 2.0f, 3.0f};
    CHECK(eevo::matvec(id, h) == std::vector<float>{1.0f, 2.0f, 3.0f});

    Matrix m(2, 2);
    m.data = {1.0f, 2.0f, 3.0f, 4.0f};
    CHECK(eevo::matvec(m, std::vector<float>{1.0f, 1.0f}) == std::vector<float>{3.0f, 7.0f});

    CHECK_THROWS_AS(eevo::matvec(m, h), eevo::InvalidInput);
}

TEST_CASE("matvec matches the double-precision oracle") {
    std::mt19937 rng(11);
    const Matrix w = test_util::random_matrix(rng, 8, 4);
    const std::vector<float> h = test_util::random_vector(rng, 4);
    const auto got = eevo::matvec(w, h);
    const auto want = oracle::matvec(w, h);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(close(got[i], want[i], 1e-6));
    }
}

TEST_CASE("matvec is linear") {
    std::mt19937 rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix w = test_util::random_matrix(rng, 6, 5);
        const auto h1 = test_util::random_vector(rng, 5);
        const auto h2 = test_util::random_vector(rng, 5);
        const float a = 0.75f;
        std::vector<float> combo(5);
        for (std::size_t i = 0; i < 5; ++i) {
            combo[i] = a * h1[i] + h2[i];
        }
        const auto lhs = eevo::matvec(w, combo);
        const auto r1 = eevo::matvec(w, h1);
        const auto r2 = eevo::matvec(w, h2);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            CHECK(close(lhs[i], a * r1[i] + r2[i], 1e-5));
        }
    }
}

TEST_CASE("softmax basics") {
    const auto p = eevo::softmax(std::vector<float>{0.0f, 0.0f});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));

    const auto q = eevo::softmax(std::vector<float>{3.0f, 3.0f, 3.0f, 3.0f});
    for (float v : q) {
        CHECK(v == doctest::Approx(0.25));
    }

    // Max subtraction keeps large logits finite.
    const auto r = eevo::softmax(std::vector<float>{1000.0f, 0.0f});
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] >= 0.0f);
    CHECK(std::isfinite(r[0]));

    CHECK_THROWS_AS(eevo::softmax(std::vector<float>{}), eevo::InvalidInput);
}

TEST_CASE("softmax sums to one and is shift invariant") {
    std::mt19937 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        // Logits on a dyadic grid so the shifted inputs are exact floats
        // and the check sees the algorithm, not input rounding.
        std::uniform_int_distribution<int> grid(-2048, 2048);
        std::vector<float> l(1 + rep % 40);
        for (float& v : l) {
            v = static_cast<float>(grid(rng)) / 256.0f;
        }
        const auto p = eevo::softmax(l);
        float sum = 0.0f;
        for (float v : p) {
            CHECK(v > 0.0f);
            CHECK(v <= 1.0f);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

        std::vector<float> shifted(l.size());
        for (std::size_t i = 0; i < l.size(); ++i) {
            shifted[i] = l[i] + 2.5f;
        }
        const auto ps = eevo::softmax(shifted);
        CHECK(eevo::argmax(p) == eevo::argmax(ps));
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(std::abs(static_cast<double>(p[i]) - static_cast<double>(ps[i])) <= 1e-9);
        }
    }
}

TEST_CASE("top_k ordering and tie-breaks") {
    const std::vector<float> l{0.1f, 2.3f, -1.0f, 0.5f};
    CHECK(eevo::top_k(l, 2) == std::vector<std::size_t>{1, 3});

    const std::vector<float> ties{5.0f, 5.0f, 5.0f};
    CHECK(eevo::top_k(ties, 2) == std::vector<std::size_t>{0, 1});

    CHECK_THROWS_AS(eevo::top_k(l, 0), eevo::InvalidInput);
    CHECK_THROWS_AS(eevo::top_k(l, 5), eevo::InvalidInput);
}

TEST_CASE("top_k with k = n is a stable descending permutation") {
    std::mt19937 rng(14);
    for (int rep = 0; rep < 30; ++rep) {
        auto v = test_util::random_vector(rng, 12);
        // Force some duplicates.
        v[3] = v[7];
        v[1] = v[9];
        const auto order = eevo::top_k(v, v.size());
        CHECK(order == oracle::top_k_by_sort(v, v.size()));

        auto sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            CHECK(sorted[i] == i);
        }

        // Deterministic under repetition.
        CHECK(eevo::top_k(v, 5) == eevo::top_k(v, 5));
    }
}

TEST_CASE("layer_norm basics and oracle") {
    const std::vector<float> ones(4, 1.0f);
    const auto z = eevo::layer_norm(std::vector<float>{1.0f, 1.0f, 1.0f, 1.0f}, ones);
    for (float v : z) {
        CHECK(v == doctest::Approx(0.0));
    }

    const auto pm = eevo::layer_norm(std::vector<float>{1.0f, -1.0f},
                                     std::vector<float>{1.0f, 1.0f});
    CHECK(pm[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(pm[1] == doctest::Approx(-1.0).epsilon(1e-3));

    std::mt19937 rng(15);
    const auto h = test_util::random_vector(rng, 16);
    const auto gain = test_util::random_vector(rng, 16);
    const auto got = eevo::layer_norm(h, gain);
    const auto want = oracle::layer_norm(h, gain);
    double mean = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(close(got[i], want[i], 1e-6));
    }
    const auto centered = eevo::layer_norm(h, std::vector<float>(16, 1.0f));
    for (float v : centered) {
        mean += v;
    }
    CHECK(std::abs(mean / 16.0) <= 1e-6);

    CHECK_THROWS_AS(eevo::layer_norm(h, std::vector<float>(4, 1.0f)), eevo::InvalidInput);
}

TEST_CASE("argmax lowest index wins") {
    CHECK(eevo::argmax(std::vector<float>{1.0f, 3.0f, 3.0f}) == 1);
    CHECK(eevo::argmax(std::vector<float>{-1.0f}) == 0);
    CHECK_THROWS_AS(eevo::argmax(std::vector<float>{}), eevo::InvalidInput);
}
