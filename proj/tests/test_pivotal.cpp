#include "simtol/pivotal.hpp"

#include "simtol/io.hpp"
#include "simtol/oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace simtol;
using namespace simtol::pivotal;

namespace {

std::vector<std::u32string> table5() {
    return io::read_string_file(std::string(FIXTURE_DIR) + "/table5_data.txt");
}

std::vector<PositionalGram> grams_at(const std::vector<std::pair<std::string, int>>& v) {
    std::vector<PositionalGram> out;
    for (const auto& [t, p] : v)
        out.push_back({u32(t), p});
    return out;
}

std::set<std::string> picked_texts(const std::vector<PositionalGram>& grams,
                                   const std::vector<size_t>& picked) {
    std::set<std::string> out;
    for (size_t k : picked)
        out.insert(narrow(grams[k].text));
    return out;
}

} // namespace

TEST_CASE("optimal pivot selection on the Example 5.5 query") {
    // pre(s) grams by position with the prefix-index weights.
    auto grams = grams_at({{"yo", 1}, {"ot", 2}, {"ub", 4}, {"co", 7}, {"om", 8}});
    std::vector<long long> weights = {3, 0, 2, 1, 2};
    auto picked = select_pivots(grams, weights, 3, 2);
    REQUIRE(picked.has_value());
    long long total = 0;
    for (size_t k : *picked)
        total += weights[k];
    CHECK(total == 3);
    CHECK(picked_texts(grams, *picked) == std::set<std::string>{"ot", "ub", "co"});
}

TEST_CASE("optimal pivot selection on the Example 5.6 data record") {
    auto grams = grams_at({{"ut", 1}, {"ub", 3}, {"bb", 4}, {"co", 7}, {"ou", 8}});
    std::vector<long long> weights = {3, 3, 1, 3, 3};
    auto picked = select_pivots(grams, weights, 3, 2);
    REQUIRE(picked.has_value());
    long long total = 0;
    for (size_t k : *picked)
        total += weights[k];
    CHECK(total == 7);
    CHECK(picked_texts(grams, *picked) == std::set<std::string>{"ut", "bb", "co"});
}

TEST_CASE("pivot selection edge cases") {
    auto grams = grams_at({{"aa", 1}, {"bb", 3}, {"cc", 5}});
    auto one = select_pivots(grams, {5, 1, 7}, 1, 2);
    REQUIRE(one.has_value());
    CHECK(picked_texts(grams, *one) == std::set<std::string>{"bb"});

    // No disjoint pair exists among overlapping grams.
    auto tight = grams_at({{"aa", 1}, {"ab", 2}});
    CHECK_FALSE(select_pivots(tight, {1, 1}, 2, 2).has_value());
}

TEST_CASE("pivot selection matches the exhaustive oracle") {
    std::mt19937 rng(71);
    std::uniform_int_distribution<int> taud(0, 3);
    std::uniform_int_distribution<long long> wd(0, 9);
    for (int trial = 0; trial < 3000; ++trial) {
        int q = 2 + trial % 2;
        int tau = taud(rng);
        int n = std::min(13, q * tau + 1);
        std::set<int> positions;
        std::uniform_int_distribution<int> pd(1, 30);
        while ((int)positions.size() < n)
            positions.insert(pd(rng));
        std::vector<PositionalGram> grams;
        std::vector<long long> weights;
        std::vector<std::pair<int, long long>> pw;
        for (int p : positions) {
            long long w = wd(rng);
            grams.push_back({random_string(rng, q, q, 3), p});
            weights.push_back(w);
            pw.emplace_back(p, w);
        }
        auto got = select_pivots(grams, weights, tau + 1, q);
        auto want = oracle::brute_pivots(pw, tau + 1, q);
        REQUIRE(got.has_value() == want.has_value());
        if (!want)
            continue;
        long long total = 0;
        for (size_t k : *got)
            total += weights[k];
        CHECK(total == want->weight);
        // Picked grams are pairwise disjoint.
        for (size_t a = 0; a < got->size(); ++a)
            for (size_t b = a + 1; b < got->size(); ++b)
                CHECK(std::abs(grams[(*got)[a]].pos - grams[(*got)[b]].pos) >= q);
    }
}

TEST_CASE("substring edit distance fixtures") {
    auto r5 = u32("yoytubeca");
    auto v = substring_ed(u32("ot"), r5, 2, 2, 2);
    REQUIRE(v.has_value());
    CHECK(*v == 1); // window "yoytu"
    v = substring_ed(u32("om"), r5, 8, 2, 2);
    REQUIRE(v.has_value());
    CHECK(*v == 2); // window "beca"
    v = substring_ed(u32("ub"), r5, 5, 2, 2);
    REQUIRE(v.has_value());
    CHECK(*v == 0); // verbatim occurrence inside the window
    CHECK_FALSE(substring_ed(u32("om"), r5, 8, 2, 1).has_value()); // budget exceeded
}

TEST_CASE("banded substring edit distance never undercuts the window minimum") {
    std::mt19937 rng(73);
    for (int trial = 0; trial < 2000; ++trial) {
        int q = 2 + trial % 3;
        int tau = trial % 4;
        auto r = random_string(rng, q, 24, 3);
        std::uniform_int_distribution<int> pd(1, (int)r.size());
        int g_pos = pd(rng);
        auto g = random_string(rng, q, q, 3);
        int start = std::max(1, g_pos - tau);
        int end = std::min((int)r.size(), g_pos + q - 1 + tau);
        auto window = r.substr(start - 1, end - start + 1);
        int brute = oracle::brute_sed(g, window);
        auto banded = substring_ed(g, r, g_pos, tau, (int)g.size() + 1);
        REQUIRE(banded.has_value());
        CHECK(*banded >= brute);
        // A verbatim occurrence at the centre is always found exactly.
        if (g_pos + q - 1 <= (int)r.size()) {
            auto centred = r.substr(g_pos - 1, q);
            auto hit = substring_ed(centred, r, g_pos, tau, (int)q);
            REQUIRE(hit.has_value());
            CHECK(*hit == 0);
        }
    }
}

TEST_CASE("alignment filter on the Table 5.1 example") {
    auto r5 = u32("yoytubeca");
    // The paper's first-fit pivots for the query: ot@2, ub@4, om@8.
    auto pivots = grams_at({{"ot", 2}, {"ub", 4}, {"om", 8}});
    CHECK_FALSE(alignment_filter(pivots, r5, 2)); // 1 + 0 + 2 > 2: PRUNE

    auto self = u32("yotubecom");
    CHECK(alignment_filter(pivots, self, 2)); // all seds 0
}

TEST_CASE("index structure over Table 5.1") {
    SearchIndex index(table5(), 2, 3);
    // r4 = youtbecom (id 3). Under the lexicographic tie rule its ordered
    // grams are tb, om, be, co, ou, ut, yo, ec.
    auto texts = [&](std::vector<std::u32string> v) {
        std::vector<std::string> out;
        for (auto& t : v)
            out.push_back(narrow(t));
        return out;
    };
    CHECK(texts(index.prefix_texts(3, 0)) == std::vector<std::string>{"tb"});
    CHECK(texts(index.prefix_texts(3, 1)) == std::vector<std::string>{"be", "om", "tb"});
    CHECK(texts(index.prefix_texts(3, 2)) ==
          std::vector<std::string>{"be", "co", "om", "ou", "tb"});
    CHECK(texts(index.prefix_texts(3, 3)) ==
          std::vector<std::string>{"be", "co", "om", "ou", "tb", "ut", "yo"});

    CHECK(texts(index.pivot_texts(3, 0)) == std::vector<std::string>{"tb"});
    CHECK(texts(index.pivot_texts(3, 1)) == std::vector<std::string>{"om", "tb"});
    CHECK(texts(index.pivot_texts(3, 2)) == std::vector<std::string>{"om", "ou", "tb"});
    CHECK(texts(index.pivot_texts(3, 3)) == std::vector<std::string>{"be", "om", "ut", "yo"});

    // tau_max = 0: the pivotal side holds each record's single rarest gram.
    SearchIndex zero(table5(), 2, 0);
    CHECK(texts(zero.pivot_texts(0, 0)) == std::vector<std::string>{"im"});
    CHECK(texts(zero.pivot_texts(2, 0)) == std::vector<std::string>{"bb"});

    CHECK_THROWS_WITH_AS(SearchIndex({u32("ab"), u32("x")}, 2, 1),
                         doctest::Contains("ids: 2"), std::invalid_argument);
}

TEST_CASE("prefix levels union to the occurrence-completed static prefix") {
    std::mt19937 rng(79);
    for (int trial = 0; trial < 40; ++trial) {
        int q = 2;
        int tau_max = 1 + trial % 3;
        std::vector<std::u32string> recs;
        for (int i = 0; i < 25; ++i)
            recs.push_back(random_string(rng, q + 1, 18, 3));
        SearchIndex index(recs, q, tau_max);
        for (uint32_t id = 0; id < recs.size(); ++id) {
            auto og = ordered_grams(recs[id], q, index.order());
            int support = std::min(tau_max, ((int)og.size() - 1) / q);
            for (int tau = 0; tau <= support; ++tau) {
                // Reference: q*tau+1 smallest grams, with every occurrence of
                // a text whose first occurrence is inside the cutoff.
                int cap = std::min((int)og.size(), q * tau + 1);
                std::vector<std::u32string> want;
                int t = 0;
                while (t < (int)og.size()) {
                    int run_end = t;
                    while (run_end + 1 < (int)og.size() && og[run_end + 1].text == og[t].text)
                        ++run_end;
                    if (t < cap)
                        for (int u = t; u <= run_end; ++u)
                            want.push_back(og[u].text);
                    t = run_end + 1;
                }
                std::sort(want.begin(), want.end());
                CHECK(index.prefix_texts(id, tau) == want);
            }
        }
    }
}

TEST_CASE("search on the Table 5.1 fixture") {
    auto data = table5();
    for (int tau_max : {2, 3}) {
        SearchIndex index(data, 2, tau_max);
        SearchStats stats;
        auto hits = index.search(u32("yotubecom"), 2, {}, &stats);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].id == 3); // r4
        CHECK(hits[0].ed == 2);
        CHECK(stats.candidates == 3); // pre-alignment candidates r3, r4, r5
    }
}

TEST_CASE("search with tau 0 finds the identical record") {
    auto data = table5();
    SearchIndex index(data, 2, 2);
    auto hits = index.search(u32("ubuntucom"), 0);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == 1);
    CHECK(hits[0].ed == 0);
    CHECK_THROWS_AS(index.search(u32("ubuntucom"), 3), std::invalid_argument);
}

TEST_CASE("search equals the oracle with every filter configuration") {
    std::mt19937 rng(83);
    std::vector<std::u32string> recs;
    for (int i = 0; i < 250; ++i)
        recs.push_back(random_string(rng, 2, 24, 4));
    SearchIndex optimal_index(recs, 2, 3);
    SearchIndex random_index(recs, 2, 3, PivotMode::Random);
    for (int tau : {1, 2, 3}) {
        for (int qi = 0; qi < 60; ++qi) {
            auto query = qi % 2 ? random_string(rng, 2, 24, 4)
                                : perturb(rng, recs[(size_t)qi * 3], 1 + qi % 4, 4);
            if (query.size() < 2)
                query = u32("ab");
            auto want = oracle::brute_search(recs, query, tau);
            std::sort(want.begin(), want.end());
            for (const auto* index : {&optimal_index, &random_index})
                for (bool align : {true, false})
                    for (auto mode : {PivotMode::Optimal, PivotMode::Random}) {
                        SearchOptions opt;
                        opt.alignment = align;
                        opt.query_pivots = mode;
                        SearchStats stats;
                        auto got = index->search(query, tau, opt, &stats);
                        REQUIRE(got.size() == want.size());
                        for (size_t k = 0; k < got.size(); ++k) {
                            CHECK(got[k].id == want[k].id);
                            CHECK(got[k].ed == want[k].ed);
                        }
                        CHECK(stats.candidates >= (long long)want.size());
                    }
        }
    }
}

TEST_CASE("search handles short records and short queries") {
    // Records whose gram counts cannot carry the threshold's prefix.
    std::vector<std::u32string> recs = {u32("ab"), u32("abc"), u32("abcdefg"), u32("zzzz")};
    SearchIndex index(recs, 2, 2);
    for (int tau : {0, 1, 2})
        for (const char* qs : {"ab", "abd", "abcdef", "a", "zz"}) {
            auto want = oracle::brute_search(recs, u32(qs), tau);
            auto got = index.search(u32(qs), tau);
            REQUIRE(got.size() == want.size());
            for (size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k].id == want[k].id);
                CHECK(got[k].ed == want[k].ed);
            }
        }
}
