#include "qdeloc/errors.hpp"
#include "qdeloc/permutations.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>
#include <map>
#include <queue>

using namespace qdeloc;
using namespace qdeloc::perm;

namespace {

// Minimum number of transpositions needed to write p, by breadth-first search on the Cayley graph.
int transposition_distance(const Permutation &p) {
    const int q = p.order();
    std::map<std::vector<int>, int> dist;
    std::vector<int> start(p.images().begin(), p.images().end());
    std::queue<std::vector<int>> frontier;
    dist[start] = 0;
    frontier.push(start);
    while (!frontier.empty()) {
        auto cur = frontier.front();
        frontier.pop();
        bool sorted = true;
        for (int k = 0; k < q; ++k) sorted = sorted && cur[static_cast<std::size_t>(k)] == k;
        if (sorted) return dist[cur];
        for (int i = 0; i < q; ++i)
            for (int j = i + 1; j < q; ++j) {
                auto next = cur;
                std::swap(next[static_cast<std::size_t>(i)], next[static_cast<std::size_t>(j)]);
                if (dist.emplace(next, dist[cur] + 1).second) frontier.push(next);
            }
    }
    return -1;
}

// Independent route: invert the full q! x q! Gram matrix in double precision.
Eigen::MatrixXd full_gram_inverse(const PermutationTable &t, double D) {
    const int n = t.size();
    Eigen::MatrixXd g(n, n);
    for (int s = 0; s < n; ++s)
        for (int u = 0; u < n; ++u) g(s, u) = std::pow(D, t.cycle_count(t.compose(s, t.inverse(u))));
    return g.inverse();
}

} // namespace

TEST_CASE("build_group enumerates S_q canonically") {
    SUBCASE("q=1") {
        auto t = build_group(1);
        CHECK(t.size() == 1);
        CHECK(t.cycle_count(0) == 1);
    }
    SUBCASE("q=2") {
        auto t = build_group(2);
        REQUIRE(t.size() == 2);
        CHECK(t.cycle_count(0) == 2);
        CHECK(t.cycle_count(1) == 1);
        CHECK(t.cycle_index() == 1);
    }
    SUBCASE("q=3 class sizes") {
        auto t = build_group(3);
        REQUIRE(t.size() == 6);
        std::map<std::vector<int>, int> sizes;
        for (int c = 0; c < t.class_count(); ++c)
            sizes[t.class_cycle_type(c)] = static_cast<int>(t.class_members(c).size());
        CHECK(sizes[{1, 1, 1}] == 1);
        CHECK(sizes[{2, 1}] == 3);
        CHECK(sizes[{3}] == 2);
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(build_group(0), CapacityError);
        CHECK_THROWS_AS(build_group(7), CapacityError);
    }
}

TEST_CASE("group table is consistent with image maps") {
    for (int q = 1; q <= 5; ++q) {
        auto t = build_group(q);
        long fact = 1;
        for (int k = 2; k <= q; ++k) fact *= k;
        CHECK(t.size() == fact);
        CHECK(t.element(0) == Permutation::identity(q));
        CHECK(t.cycle_count(0) == q);
        CHECK(t.cycle_count(t.cycle_index()) == 1);
        for (int i = 0; i < t.size(); ++i) {
            CHECK(t.compose(i, t.inverse(i)) == 0);
            CHECK(t.cycle_count(i) == t.cycle_count(t.inverse(i)));
            if (i > 0) CHECK(t.element(i - 1) < t.element(i));
        }
        // associativity on a sample of triples
        for (int a = 0; a < t.size(); a += 3)
            for (int b = 0; b < t.size(); b += 5)
                for (int c = 0; c < t.size(); c += 7)
                    CHECK(t.compose(t.compose(a, b), c) == t.compose(a, t.compose(b, c)));
    }
}

TEST_CASE("cycle count equals q minus transposition distance") {
    for (int q = 1; q <= 4; ++q) {
        auto t = build_group(q);
        for (const auto &p : t.elements()) CHECK(p.cycle_count() == q - transposition_distance(p));
    }
}

TEST_CASE("Permutation rejects non-bijections") {
    CHECK_THROWS_AS(Permutation({0, 0, 1}), DomainError);
    CHECK_THROWS_AS(Permutation({0, 3}), DomainError);
}

TEST_CASE("weingarten small cases") {
    SUBCASE("q=1") {
        auto t = build_group(1);
        for (std::int64_t D : {2, 3, 7}) {
            auto wg = weingarten(t, D);
            CHECK(wg.exact(0) == Rational(1, D));
        }
    }
    SUBCASE("q=2, D=4") {
        auto t = build_group(2);
        auto wg = weingarten(t, 4);
        CHECK(wg.exact(0) == Rational(1, 15));
        CHECK(wg.exact(1) == Rational(-1, 60));
        CHECK(wg.sum() == Rational(1, 20));
        CHECK(wg.sum() == weingarten_sum_rule(4, 2));
    }
    SUBCASE("singular when D < q") {
        CHECK_THROWS_AS(weingarten(build_group(3), 2), DegeneracyError);
        CHECK_THROWS_AS(weingarten(build_group(4), 3), DegeneracyError);
        CHECK_THROWS_AS(weingarten(build_group(2), 1), DomainError);
    }
}

TEST_CASE("weingarten solves the Gram system and matches a dense inverse") {
    for (int q = 1; q <= 4; ++q) {
        auto t = build_group(q);
        for (std::int64_t D = std::max<std::int64_t>(2, q); D <= 16; ++D) {
            CAPTURE(q);
            CAPTURE(D);
            auto wg = weingarten(t, D);
            CHECK(wg.gram_residual(t) < 1e-12);
            CHECK(wg.sum() == weingarten_sum_rule(D, q));
            const auto inv = full_gram_inverse(t, static_cast<double>(D));
            for (int s = 0; s < t.size(); ++s)
                for (int u = 0; u < t.size(); ++u) {
                    const double expected = inv(s, u);
                    CHECK(dual_weight(t, wg, s, u) == doctest::Approx(expected).epsilon(1e-9).scale(1e-12));
                }
        }
    }
}

TEST_CASE("Weingarten is a class function") {
    auto t = build_group(4);
    auto wg = weingarten(t, 9);
    for (int s = 0; s < t.size(); ++s)
        for (int r = 0; r < t.size(); ++r) {
            const int conj = t.compose(t.compose(r, s), t.inverse(r));
            CHECK(wg.exact(conj) == wg.exact(s));
        }
}

TEST_CASE("dual_weight") {
    auto t2 = build_group(2);
    auto wg2 = weingarten(t2, 4);
    CHECK(dual_weight(t2, wg2, 0, 0) == doctest::Approx(1.0 / 15));
    CHECK(dual_weight(t2, wg2, 1, 1) == doctest::Approx(1.0 / 15));
    CHECK(dual_weight(t2, wg2, 0, 1) == doctest::Approx(-1.0 / 60));

    // q=3, D=9: all 36 pairs depend on sigma tau^-1 only through its cycle type.
    auto t3 = build_group(3);
    auto wg3 = weingarten(t3, 9);
    const auto inv = full_gram_inverse(t3, 9.0);
    std::map<std::vector<int>, double> by_type;
    for (int s = 0; s < 6; ++s)
        for (int u = 0; u < 6; ++u) {
            const auto type = t3.element(t3.compose(s, t3.inverse(u))).cycle_type();
            const double v = dual_weight(t3, wg3, s, u);
            auto [it, inserted] = by_type.emplace(type, v);
            if (!inserted) CHECK(v == it->second);
            CHECK(v == doctest::Approx(inv(s, u)).epsilon(1e-10));
        }
    CHECK(by_type.size() == 3);
    CHECK_THROWS_AS(dual_weight(t2, wg3, 0, 0), ConfigError);
}

TEST_CASE("q=5 and q=6 tables remain exact") {
    for (int q : {5, 6}) {
        auto t = build_group(q);
        auto wg = weingarten(t, 36);
        CHECK(wg.sum() == weingarten_sum_rule(36, q));
    }
    auto t5 = build_group(5);
    CHECK(weingarten(t5, 16).gram_residual(t5) < 1e-12);
}

TEST_CASE("json dump") {
    auto t = build_group(2);
    auto j = weingarten(t, 4).to_json(t);
    CHECK(j["D"] == 4);
    CHECK(j["q"] == 2);
    REQUIRE(j["entries"].size() == 2);
    CHECK(j["entries"][0]["cycle_type"] == std::vector<int>{1, 1});
    CHECK(j["entries"][0]["value_num"] == "1");
    CHECK(j["entries"][0]["value_den"] == "15");
    CHECK(j["entries"][1]["value_num"] == "-1");
    CHECK(j["entries"][1]["value_den"] == "60");
}
