#include "simtol/passjoin.hpp"

#include "simtol/io.hpp"
#include "simtol/oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace simtol;
using namespace simtol::passjoin;

namespace {

std::vector<std::u32string> table3() {
    return io::read_string_file(std::string(FIXTURE_DIR) + "/table3_strings.txt");
}

std::vector<std::string> segment_texts(const std::u32string& s, const std::vector<Segment>& segs) {
    std::vector<std::string> out;
    for (const auto& g : segs)
        out.push_back(narrow(s.substr(g.start - 1, g.len)));
    return out;
}

std::set<std::pair<int, int>> selected_set(int s_len, int l, int tau, Strategy st) {
    std::set<std::pair<int, int>> out; // (slot, start)
    auto per_slot = select_substrings(s_len, l, tau, st);
    for (size_t i = 0; i < per_slot.size(); ++i)
        for (int p : per_slot[i])
            out.insert({(int)i, p});
    return out;
}

void check_pairs(const std::vector<JoinPair>& got, const std::vector<oracle::Pair>& want,
                 bool eds) {
    REQUIRE(got.size() == want.size());
    for (size_t k = 0; k < got.size(); ++k) {
        CHECK(got[k].a == want[k].a);
        CHECK(got[k].b == want[k].b);
        if (eds)
            CHECK(got[k].eds == doctest::Approx(want[k].value));
        else
            CHECK((double)got[k].ed == doctest::Approx(want[k].value));
    }
}

} // namespace

TEST_CASE("even partition") {
    auto segs = partition_even(9, 3);
    REQUIRE(segs.has_value());
    CHECK(segment_texts(u32("vankatesh"), *segs) ==
          std::vector<std::string>{"va", "nk", "at", "esh"});

    auto whole = partition_even(5, 0);
    REQUIRE(whole.has_value());
    REQUIRE(whole->size() == 1);
    CHECK((*whole)[0].start == 1);
    CHECK((*whole)[0].len == 5);

    auto even = partition_even(12, 3); // divisible: all segments equal
    REQUIRE(even.has_value());
    for (const auto& g : *even)
        CHECK(g.len == 3);

    CHECK_FALSE(partition_even(3, 3).has_value()); // |s| <= tau
}

TEST_CASE("multi-match substring selection on the worked example") {
    auto per_slot = select_substrings(10, 9, 3, Strategy::MultiMatch);
    REQUIRE(per_slot.size() == 4);
    auto s = u32("avataresha");
    auto texts = [&](int slot, int len) {
        std::vector<std::string> out;
        for (int p : per_slot[slot])
            out.push_back(narrow(s.substr(p - 1, len)));
        return out;
    };
    CHECK(texts(0, 2) == std::vector<std::string>{"av"});
    CHECK(texts(1, 2) == std::vector<std::string>{"va", "at", "ta"});
    CHECK(texts(2, 2) == std::vector<std::string>{"ar", "re", "es"});
    CHECK(texts(3, 3) == std::vector<std::string>{"sha"});

    int total = 0;
    for (const auto& v : per_slot)
        total += (int)v.size();
    CHECK(total == 8); // floor((tau^2 - delta^2)/2) + tau + 1 = 4 + 4

    // tau = 0: every strategy selects exactly the whole string per slot.
    for (auto st : {Strategy::Length, Strategy::Shift, Strategy::Position, Strategy::MultiMatch}) {
        auto sel = select_substrings(7, 7, 0, st);
        REQUIRE(sel.size() == 1);
        CHECK(sel[0] == std::vector<int>{1});
    }
}

TEST_CASE("multi-match count formula holds when no clamping applies") {
    for (int tau = 0; tau <= 5; ++tau)
        for (int delta = 0; delta <= tau; ++delta)
            for (int l = tau + 1; l + delta <= 60; ++l) {
                int s_len = l + delta;
                auto per_slot = select_substrings(s_len, l, tau, Strategy::MultiMatch);
                auto segs = partition_even(l, tau);
                REQUIRE(segs.has_value());
                bool clamped = false;
                for (size_t i = 0; i < segs->size(); ++i) {
                    int pi = (*segs)[i].start, li = (*segs)[i].len;
                    int slot = (int)i + 1;
                    int lo = std::max(pi - (slot - 1), pi + delta - (tau + 1 - slot));
                    int hi = std::min(pi + (slot - 1), pi + delta + (tau + 1 - slot));
                    if (lo < 1 || hi > s_len - li + 1)
                        clamped = true;
                }
                if (clamped)
                    continue;
                long long total = 0;
                for (const auto& v : per_slot)
                    total += (long long)v.size();
                CHECK(total == (long long)((tau * tau - delta * delta) / 2 + tau + 1));
            }
}

TEST_CASE("selection containment chain") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> taud(0, 5);
    for (int trial = 0; trial < 2000; ++trial) {
        int tau = taud(rng);
        std::uniform_int_distribution<int> ld(tau + 1, 40);
        int l = ld(rng);
        std::uniform_int_distribution<int> dd(0, tau);
        int s_len = l + dd(rng);
        auto wm = selected_set(s_len, l, tau, Strategy::MultiMatch);
        auto wp = selected_set(s_len, l, tau, Strategy::Position);
        auto wf = selected_set(s_len, l, tau, Strategy::Shift);
        auto wl = selected_set(s_len, l, tau, Strategy::Length);
        CHECK(std::includes(wp.begin(), wp.end(), wm.begin(), wm.end()));
        CHECK(std::includes(wf.begin(), wf.end(), wp.begin(), wp.end()));
        CHECK(std::includes(wl.begin(), wl.end(), wf.begin(), wf.end()));
    }
}

TEST_CASE("extension verification") {
    // s5/s6 share the slot-3 segment " cha"; the left parts already need
    // more than tau_l = min(3 - 2, 2) = 1 edits.
    auto r = u32("kaushuk chadhui");
    auto s = u32("caushik chakrabar");
    auto segs = partition_even((int)r.size(), 3);
    REQUIRE(segs.has_value());
    CHECK(narrow(r.substr((*segs)[2].start - 1, (*segs)[2].len)) == " cha");
    CHECK_FALSE(extension_verify(r, s, 3, (*segs)[2].start, (*segs)[2].len, 8, 3).has_value());

    // Identical strings matched on slot 1 verify with zero edits.
    auto x = u32("abcdefgh");
    auto xsegs = partition_even((int)x.size(), 2);
    auto d = extension_verify(x, x, 1, (*xsegs)[0].start, (*xsegs)[0].len, 1, 2);
    REQUIRE(d.has_value());
    CHECK(*d == 0);
}

TEST_CASE("join_ed on Table 3.1") {
    auto recs = table3();
    auto pairs = join_ed(recs, 3);
    bool has = false;
    for (const auto& p : pairs)
        has = has || (p.a == 2 && p.b == 5 && p.ed == 3);
    CHECK(has); // kaushik chakrab / caushik chakrabar
    check_pairs(pairs, oracle::brute_join_ed(recs, 3), false);
}

TEST_CASE("join_ed with tau 0 finds exact duplicates only") {
    std::vector<std::u32string> recs = {u32("dup"), u32("other"), u32("dup")};
    auto pairs = join_ed(recs, 0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 2);
    CHECK(pairs[0].ed == 0);
}

TEST_CASE("join_ed equals the oracle across strategies and prefix sharing") {
    std::mt19937 rng(37);
    std::vector<std::u32string> recs;
    for (int i = 0; i < 250; ++i)
        recs.push_back(random_string(rng, 2, 25, 4));
    for (int i = 0; i < 50; ++i) // planted near-duplicates
        recs.push_back(perturb(rng, recs[(size_t)i * 3], 1 + i % 3, 4));
    recs.push_back(u32(""));
    recs.push_back(u32("a"));

    for (int tau : {1, 2, 3}) {
        auto want = oracle::brute_join_ed(recs, tau);
        std::vector<std::vector<JoinPair>> runs;
        for (auto st : {Strategy::Length, Strategy::Shift, Strategy::Position,
                        Strategy::MultiMatch}) {
            JoinOptions opt;
            opt.strategy = st;
            runs.push_back(join_ed(recs, tau, opt));
            check_pairs(runs.back(), want, false);
        }
        for (size_t k = 1; k < runs.size(); ++k)
            CHECK(runs[k] == runs[0]); // identical output for every strategy

        JoinOptions no_share;
        no_share.share_prefix = false;
        CHECK(join_ed(recs, tau, no_share) == runs.back());

        JoinStats stats;
        join_ed(recs, tau, {}, &stats);
        CHECK(stats.live_lengths <= tau + 1); // index sweep memory bound
    }
}

TEST_CASE("join_ed R-S join equals the oracle") {
    std::mt19937 rng(41);
    std::vector<std::u32string> r, s;
    for (int i = 0; i < 120; ++i)
        r.push_back(random_string(rng, 2, 20, 4));
    for (int i = 0; i < 100; ++i)
        s.push_back(i % 3 ? random_string(rng, 2, 20, 4) : perturb(rng, r[(size_t)i], 2, 4));
    for (int tau : {1, 2}) {
        auto want = oracle::brute_join_ed(r, s, tau);
        check_pairs(join_ed(r, s, tau), want, false);
        JoinOptions threaded;
        threaded.threads = 3;
        check_pairs(join_ed(r, s, tau, threaded), want, false);
    }
}

TEST_CASE("join_eds on Table 3.1") {
    auto recs = table3();
    auto pairs = join_eds(recs, 0.82);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == 2);
    CHECK(pairs[0].b == 5);
    CHECK(pairs[0].ed == 3);
    CHECK(pairs[0].eds == doctest::Approx(14.0 / 17.0));
}

TEST_CASE("join_eds with delta 1 finds exact duplicates only") {
    std::vector<std::u32string> recs = {u32("same"), u32("same"), u32("sam")};
    auto pairs = join_eds(recs, 1.0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 1);
}

TEST_CASE("join_eds equals the oracle") {
    std::mt19937 rng(43);
    std::vector<std::u32string> recs;
    for (int i = 0; i < 150; ++i)
        recs.push_back(random_string(rng, 4, 30, 4));
    for (int i = 0; i < 50; ++i)
        recs.push_back(perturb(rng, recs[(size_t)i * 2], 1 + i % 2, 4));
    for (double delta : {0.75, 0.85})
        check_pairs(join_eds(recs, delta), oracle::brute_join_eds(recs, delta), true);
}

TEST_CASE("join parameter validation") {
    CHECK_THROWS_AS(join_ed({}, -1), std::invalid_argument);
    CHECK_THROWS_AS(join_eds({u32("")}, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(join_eds({u32("ok")}, 0.0), std::invalid_argument);
}
