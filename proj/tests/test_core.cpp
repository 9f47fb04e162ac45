#include "matchsim/core.hpp"

#include <algorithm>
#include <set>

#include "doctest.h"
#include "test_util.hpp"

using namespace matchsim::core;
using test_util::brute_force_stable;
using test_util::make_assortative;
using test_util::make_k2;
using test_util::random_market;

TEST_CASE("preference derivation on the Knuth 2x2 market") {
    const Market k2 = make_k2();
    const Preferences p = derive_preferences(k2);
    CHECK(p.food[0] == std::vector<int>{0, 1});
    CHECK(p.food[1] == std::vector<int>{1, 0});
    CHECK(p.color[0] == std::vector<int>{1, 0});
    CHECK(p.color[1] == std::vector<int>{0, 1});
    CHECK(k2.rank({Side::Food, 0}, 0) == 1);
    CHECK(k2.rank({Side::Color, 0}, 0) == 2);
}

TEST_CASE("1x1 market ranks the single opposite agent") {
    const Market m({{100}}, {{100}});
    const Preferences p = derive_preferences(m);
    CHECK(p.food[0] == std::vector<int>{0});
    CHECK(p.color[0] == std::vector<int>{0});
}

TEST_CASE("duplicate payoffs are rejected") {
    CHECK_THROWS_AS(Market({{300, 200, 200}, {100, 200, 300}, {300, 100, 200}},
                           {{100, 200, 300}, {200, 300, 100}, {300, 100, 200}}),
                    DuplicatePayoffError);
    // Duplicates within a color's column are equally invalid.
    CHECK_THROWS_AS(Market({{300, 200}, {100, 250}}, {{100, 200}, {100, 300}}),
                    DuplicatePayoffError);
    CHECK_THROWS_AS(Market({{0, 100}, {100, 50}}, {{100, 200}, {150, 300}}),
                    std::invalid_argument);
}

TEST_CASE("blocking pairs on the Knuth market") {
    const Market k2 = make_k2();

    Matching partial(2, 2);
    partial.match(0, 0);  // only (f1, c1) matched
    auto bps = blocking_pairs(k2, partial);
    std::set<std::pair<int, int>> got(bps.begin(), bps.end());
    CHECK(got == std::set<std::pair<int, int>>{{1, 0}, {1, 1}});

    Matching food_opt(2, 2);
    food_opt.match(0, 0);
    food_opt.match(1, 1);
    CHECK(blocking_pairs(k2, food_opt).empty());

    Matching empty(2, 2);
    CHECK(blocking_pairs(k2, empty).size() == 4);  // everyone gains from 0
}

TEST_CASE("deferred acceptance on the Knuth market") {
    const Market k2 = make_k2();

    auto food_run = deferred_acceptance(k2, Side::Food);
    CHECK(food_run.matching.partner_of_food(0) == 0);
    CHECK(food_run.matching.partner_of_food(1) == 1);
    CHECK(food_run.offers_made == 2);
    CHECK(food_run.matches_formed == 2);

    auto color_run = deferred_acceptance(k2, Side::Color);
    CHECK(color_run.matching.partner_of_food(0) == 1);
    CHECK(color_run.matching.partner_of_food(1) == 0);
    CHECK(color_run.offers_made == 2);
    CHECK(color_run.matches_formed == 2);
}

TEST_CASE("assortative 3x3 resolves to the diagonal from either side") {
    const Market m = make_assortative(3);
    const auto f = deferred_acceptance(m, Side::Food).matching;
    const auto c = deferred_acceptance(m, Side::Color).matching;
    for (int i = 0; i < 3; ++i) {
        CHECK(f.partner_of_food(i) == i);
        CHECK(c.partner_of_food(i) == i);
    }
    CHECK(brute_force_stable(m).size() == 1);
}

TEST_CASE("DA output is stable on random markets, both sides, n in 2..8") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const int n = 2 + static_cast<int>(seed % 7);
        const Market m = random_market(n, 0x1000 + seed);
        CHECK(blocking_pairs(m, deferred_acceptance(m, Side::Food).matching).empty());
        CHECK(blocking_pairs(m, deferred_acceptance(m, Side::Color).matching).empty());
    }
}

TEST_CASE("DA handles unbalanced markets") {
    const Market m = random_market(3, 5, 77);
    const auto res = deferred_acceptance(m, Side::Food).matching;
    CHECK(blocking_pairs(m, res).empty());
    CHECK(res.n_matched_pairs() == 3);
    const auto res_c = deferred_acceptance(m, Side::Color).matching;
    CHECK(blocking_pairs(m, res_c).empty());
    CHECK(res_c.n_matched_pairs() == 3);
}

TEST_CASE("enumeration equals brute force on random markets up to n = 6") {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const int n = 2 + static_cast<int>(seed % 5);
        const Market m = random_market(n, 0x2000 + seed);
        const StableSet ss = enumerate_stable_matchings(m);
        auto oracle = brute_force_stable(m);
        REQUIRE(ss.size() == static_cast<int>(oracle.size()));
        for (const auto& mu : oracle) CHECK(ss.contains(mu));
        CHECK(ss.food_optimal() == deferred_acceptance(m, Side::Food).matching);
        CHECK(ss.color_optimal() == deferred_acceptance(m, Side::Color).matching);
    }
}

TEST_CASE("enumeration: Knuth market has exactly the two DA outcomes") {
    const StableSet ss = enumerate_stable_matchings(make_k2());
    CHECK(ss.size() == 2);
    CHECK(ss.food_partners[0] == std::vector<int>{0, 1});
    CHECK(ss.color_partners[0] == std::vector<int>{1, 0});
}

TEST_CASE("enumeration cap") {
    CHECK_THROWS_AS(enumerate_stable_matchings(random_market(5, 9), 4), EnumerationCapExceeded);
}

TEST_CASE("extremal optimality across the enumerated set") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const int n = 3 + static_cast<int>(seed % 6);
        const Market m = random_market(n, 0x3000 + seed);
        const StableSet ss = enumerate_stable_matchings(m);
        const auto& mu_f = ss.food_optimal();
        const auto& mu_c = ss.color_optimal();
        for (const auto& mu : ss.matchings) {
            for (int f = 0; f < n; ++f) {
                CHECK(m.payoff_food(f, mu_f.partner_of_food(f)) >=
                      m.payoff_food(f, mu.partner_of_food(f)));
                CHECK(m.payoff_food(f, mu.partner_of_food(f)) >=
                      m.payoff_food(f, mu_c.partner_of_food(f)));
            }
            for (int c = 0; c < n; ++c) {
                CHECK(m.payoff_color(mu_c.partner_of_color(c), c) >=
                      m.payoff_color(mu.partner_of_color(c), c));
                CHECK(m.payoff_color(mu.partner_of_color(c), c) >=
                      m.payoff_color(mu_f.partner_of_color(c), c));
            }
        }
    }
}

TEST_CASE("opposition of interests on the enumerated lattice") {
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        const int n = 4 + static_cast<int>(seed % 4);
        const Market m = random_market(n, 0x4000 + seed);
        const StableSet ss = enumerate_stable_matchings(m);
        auto food_welfare = [&](const Matching& mu) {
            long s = 0;
            for (int f = 0; f < n; ++f) s += m.payoff_food(f, mu.partner_of_food(f));
            return s;
        };
        auto color_welfare = [&](const Matching& mu) {
            long s = 0;
            for (int c = 0; c < n; ++c) s += m.payoff_color(mu.partner_of_color(c), c);
            return s;
        };
        // matchings are sorted by decreasing food welfare; color welfare must
        // not decrease along the list when all welfare values are distinct.
        for (int i = 1; i < ss.size(); ++i) {
            const long fw_prev = food_welfare(ss.matchings[i - 1]);
            const long fw = food_welfare(ss.matchings[i]);
            const long cw_prev = color_welfare(ss.matchings[i - 1]);
            const long cw = color_welfare(ss.matchings[i]);
            if (fw_prev != fw && cw_prev != cw) {
                CHECK(fw_prev > fw);
                CHECK(cw_prev < cw);
            }
        }
    }
}

TEST_CASE("median of a unique stable matching is that matching") {
    const Market m = make_assortative(4);
    const StableSet ss = enumerate_stable_matchings(m);
    REQUIRE(ss.size() == 1);
    const auto med = median_stable_matchings(ss, m);
    REQUIRE(med.size() == 1);
    CHECK(med[0] == ss.matchings[0]);
}

TEST_CASE("even K: both generalized medians, K2 returns both matchings") {
    const Market k2 = make_k2();
    const StableSet ss = enumerate_stable_matchings(k2);
    const auto med = median_stable_matchings(ss, k2);
    REQUIRE(med.size() == 2);
    CHECK(med[0] == ss.food_optimal());
    CHECK(med[1] == ss.color_optimal());
}

TEST_CASE("median membership for odd-K random markets") {
    int odd_seen = 0;
    for (std::uint64_t seed = 0; odd_seen < 40 && seed < 4000; ++seed) {
        const int n = 4 + static_cast<int>(seed % 4);
        const Market m = random_market(n, 0x5000 + seed);
        const StableSet ss = enumerate_stable_matchings(m);
        if (ss.size() % 2 == 0) continue;
        ++odd_seen;
        const auto med = median_stable_matchings(ss, m);
        REQUIRE(med.size() == 1);
        CHECK(ss.contains(med[0]));
    }
    CHECK(odd_seen == 40);
}

TEST_CASE("classify_matching labels") {
    const Market k2 = make_k2();
    const StableSet ss = enumerate_stable_matchings(k2);

    auto cls = classify_matching(ss, k2, ss.food_optimal());
    CHECK(cls.label == MatchingLabel::FoodOptimal);
    CHECK(cls.is_median);  // K = 2: extremal matchings are the generalized medians

    Matching partial(2, 2);
    partial.match(0, 0);
    CHECK(classify_matching(ss, k2, partial).label == MatchingLabel::Unstable);

    const Market a3 = make_assortative(3);
    const StableSet ss3 = enumerate_stable_matchings(a3);
    CHECK(classify_matching(ss3, a3, ss3.food_optimal()).label == MatchingLabel::UniqueStable);
}

TEST_CASE("payoff statistics") {
    const Market k2 = make_k2();
    Matching mu(2, 2);
    mu.match(0, 0);
    mu.match(1, 1);
    const auto st = payoff_stats(k2, mu);
    CHECK(st.total_welfare == 600);
    CHECK(st.food_welfare == 400);
    CHECK(st.color_welfare == 200);
    CHECK(st.mean == doctest::Approx(150.0));
    CHECK(st.coefficient_of_variation.has_value());

    // Perfectly egalitarian: CoV and Gini are both zero.
    const Market eq({{400, 100}, {100, 400}}, {{400, 100}, {100, 400}});
    Matching diag(2, 2);
    diag.match(0, 0);
    diag.match(1, 1);
    const auto st_eq = payoff_stats(eq, diag);
    CHECK(st_eq.total_welfare == 400 * 4);
    CHECK(st_eq.coefficient_of_variation.value() == doctest::Approx(0.0));
    CHECK(st_eq.gini.value() == doctest::Approx(0.0));

    const auto st_empty = payoff_stats(k2, Matching(2, 2));
    CHECK(st_empty.total_welfare == 0);
    CHECK_FALSE(st_empty.coefficient_of_variation.has_value());
    CHECK_FALSE(st_empty.gini.has_value());
}

TEST_CASE("unbalanced enumeration against direct stability search") {
    // 3 foods x 4 colors: enumerate injections by brute force.
    const Market m = random_market(3, 4, 1234);
    const StableSet ss = enumerate_stable_matchings(m);
    std::vector<int> choice{0, 1, 2, 3};
    int stable_count = 0;
    std::sort(choice.begin(), choice.end());
    do {
        Matching mu(3, 4);
        for (int f = 0; f < 3; ++f) mu.match(f, choice[f]);
        if (is_stable(m, mu)) {
            ++stable_count;
            CHECK(ss.contains(mu));
        }
    } while (std::next_permutation(choice.begin(), choice.end()));
    CHECK(ss.size() == stable_count);
}
