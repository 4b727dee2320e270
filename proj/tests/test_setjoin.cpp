#include "simtol/setjoin.hpp"

#include "simtol/io.hpp"
#include "simtol/oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace simtol;
using namespace simtol::setjoin;

namespace {

// Fig 4.1(a): the even universe split for l=9, m=4 over x1..x15.
Scheme fig41_scheme() {
    Scheme s;
    s.m = 4;
    s.slot = [](uint32_t id) { return std::min<int>(((int)id - 1) / 4, 3); };
    return s;
}

std::vector<std::vector<std::string>> table4() {
    return io::read_set_file(std::string(FIXTURE_DIR) + "/table4_sets.txt");
}

std::vector<std::vector<std::string>> random_sets(std::mt19937& rng, int n, int universe,
                                                  int min_size, int max_size) {
    std::vector<std::vector<std::string>> out;
    std::uniform_int_distribution<int> size(min_size, max_size);
    std::uniform_int_distribution<int> elem(1, universe);
    for (int i = 0; i < n; ++i) {
        std::set<int> s;
        int target = size(rng);
        while ((int)s.size() < target)
            s.insert(elem(rng));
        std::vector<std::string> rec;
        for (int e : s)
            rec.push_back("t" + std::to_string(e));
        out.push_back(std::move(rec));
    }
    // Planted near-duplicates: copy a record and toggle a couple of elements.
    for (int i = 0; i + 4 < n; i += 5) {
        auto rec = out[(size_t)i];
        if (rec.size() > 2)
            rec.pop_back();
        rec.push_back("t" + std::to_string(elem(rng)));
        std::sort(rec.begin(), rec.end());
        rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<std::vector<uint32_t>> as_ids(const std::vector<std::vector<std::string>>& raw) {
    std::unordered_map<std::string, uint32_t> m;
    std::vector<std::vector<uint32_t>> out;
    for (const auto& rec : raw) {
        std::vector<uint32_t> v;
        for (const auto& t : rec) {
            auto [it, _] = m.emplace(t, (uint32_t)m.size());
            v.push_back(it->second);
        }
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        out.push_back(std::move(v));
    }
    return out;
}

void check_pairs(const std::vector<JoinPair>& got, const std::vector<oracle::Pair>& want) {
    REQUIRE(got.size() == want.size());
    for (size_t k = 0; k < got.size(); ++k) {
        CHECK(got[k].a == want[k].a);
        CHECK(got[k].b == want[k].b);
        CHECK(got[k].value == doctest::Approx(want[k].value));
    }
}

} // namespace

TEST_CASE("partition parameters (Table 4.2)") {
    CHECK(max_mismatch(SimFn::Jac, 0.73, 9) == 3);              // H_9 = 3, m = 4
    CHECK(pair_mismatch(SimFn::Jac, 0.73, 9, 11) + 1 == 4);     // H(9,11)+1 = 4
    for (long long l : {1, 8, 30}) {
        CHECK(max_mismatch(SimFn::Jac, 1.0, l) == 0);
        CHECK(pair_mismatch(SimFn::Jac, 1.0, l, l) == 0);
    }
    auto b = partner_size_range(SimFn::Jac, 0.5, 10);
    CHECK(b.lower == 5);
    CHECK(b.upper == 20);
}

TEST_CASE("partition_set under the Fig 4.1(a) scheme") {
    // X1 = {x1,x2,x5,x6,x7,x10,x11,x13,x14} with element id = subscript.
    std::vector<uint32_t> x1 = {1, 2, 5, 6, 7, 10, 11, 13, 14};
    auto frags = partition_set(x1, fig41_scheme());
    REQUIRE(frags.size() == 4);
    CHECK(frags[0] == Fragment{1, 2});
    CHECK(frags[1] == Fragment{5, 6, 7});
    CHECK(frags[2] == Fragment{10, 11});
    CHECK(frags[3] == Fragment{13, 14});

    auto empty = partition_set({}, fig41_scheme());
    REQUIRE(empty.size() == 4);
    for (const auto& f : empty)
        CHECK(f.empty());
}

TEST_CASE("homomorphism: symmetric differences decompose slot-wise") {
    std::mt19937 rng(47);
    std::uniform_int_distribution<int> md(1, 7);
    std::uniform_int_distribution<int> elem(0, 99);
    std::vector<uint64_t> hashes(100);
    for (size_t i = 0; i < hashes.size(); ++i)
        hashes[i] = std::mt19937_64(i * 1234567 + 7)();
    for (int trial = 0; trial < 300; ++trial) {
        int m = md(rng);
        Scheme scheme = hash_scheme(m, hashes);
        std::set<uint32_t> xs, ys;
        for (int k = 0; k < 30; ++k) {
            xs.insert((uint32_t)elem(rng));
            ys.insert((uint32_t)elem(rng));
        }
        std::vector<uint32_t> x(xs.begin(), xs.end()), y(ys.begin(), ys.end());
        auto fx = partition_set(x, scheme), fy = partition_set(y, scheme);
        auto sym_diff = [](const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
            std::vector<uint32_t> d;
            std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                          std::back_inserter(d));
            return (long long)d.size();
        };
        long long total = 0;
        for (int i = 0; i < m; ++i)
            total += sym_diff(fx[i], fy[i]);
        CHECK(total == sym_diff(x, y));
    }
}

TEST_CASE("one deletions") {
    auto d = one_deletions({5, 6, 7});
    std::set<Fragment> got(d.begin(), d.end());
    CHECK(got == std::set<Fragment>{{5, 6}, {6, 7}, {5, 7}});
    CHECK(one_deletions({}).empty());
    auto singleton = one_deletions({42});
    REQUIRE(singleton.size() == 1);
    CHECK(singleton[0].empty()); // the empty fragment
}

TEST_CASE("optimal allocation on the Example 4.3 costs") {
    // Costs derived from Fig 4.1's indexes for X5 against R9 (they reproduce
    // the thesis's printed cost table cell for cell).
    std::vector<CostTriple> costs = {{0, 0, 0}, {0, 1, 3}, {0, 1, 2}, {0, 3, 4}};
    auto a = optimal_allocation(costs, 4);
    REQUIRE(a.has_value());
    CHECK(a->v == std::vector<uint8_t>{2, 0, 2, 0});
    CHECK(a->cost == 2);

    std::vector<CostTriple> zero(5, CostTriple{0, 0, 0});
    auto z = optimal_allocation(zero, 6);
    REQUIRE(z.has_value());
    CHECK(z->cost == 0);
    long long sum = 0;
    for (auto v : z->v)
        sum += v;
    CHECK(sum == 6);

    CHECK_FALSE(optimal_allocation(costs, 9).has_value()); // target > 2m
}

TEST_CASE("greedy allocation on the Example 4.4 increments") {
    std::vector<CostTriple> costs = {{0, 0, 0}, {0, 1, 3}, {0, 1, 2}, {0, 3, 4}};
    auto a = greedy_allocation(costs, 4);
    REQUIRE(a.has_value());
    CHECK(a->v == std::vector<uint8_t>{2, 1, 1, 0});
    // The thesis quotes cost 3 here, but its own cost table prices this
    // allocation at 2 (see the decisions ledger); either way <= 2x optimal.
    CHECK(a->cost == 2);

    std::vector<CostTriple> flat = {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
    auto f = greedy_allocation(flat, 3);
    REQUIRE(f.has_value());
    auto o = optimal_allocation(flat, 3);
    CHECK(f->cost == o->cost); // equal increments: any tie-break is optimal
}

TEST_CASE("allocation: optimal equals brute force, greedy within factor two") {
    std::mt19937 rng(53);
    std::uniform_int_distribution<int> md(1, 8);
    std::uniform_int_distribution<long long> cd(0, 20);
    for (int trial = 0; trial < 1500; ++trial) {
        int m = md(rng);
        std::vector<CostTriple> costs(m);
        for (auto& c : costs) {
            long long c1 = cd(rng), c2 = c1 + cd(rng);
            c = {0, c1, c2};
        }
        std::uniform_int_distribution<long long> td(0, 2 * m);
        long long target = td(rng);
        std::vector<std::array<long long, 3>> oc(m);
        for (int i = 0; i < m; ++i)
            oc[i] = {costs[i][0], costs[i][1], costs[i][2]};
        auto want = oracle::brute_allocation(oc, target);
        auto opt = optimal_allocation(costs, target);
        auto greedy = greedy_allocation(costs, target);
        REQUIRE(opt.has_value() == want.has_value());
        if (!want)
            continue;
        CHECK(opt->cost == want->cost);
        long long sum = 0;
        for (auto v : opt->v)
            sum += v;
        CHECK(sum == target);
        REQUIRE(greedy.has_value());
        sum = 0;
        for (auto v : greedy->v)
            sum += v;
        CHECK(sum == target);
        CHECK(opt->cost <= greedy->cost);
        CHECK(greedy->cost <= 2 * opt->cost);
    }
}

TEST_CASE("group boundaries") {
    CHECK(group_boundaries(7, 10, 0.7) == std::vector<long long>{7});
    CHECK(group_boundaries(7, 10, 0.8) == std::vector<long long>{7, 9});
    CHECK(group_boundaries(7, 10, 1.0) == std::vector<long long>{7, 8, 9, 10});
    CHECK_THROWS_AS(group_boundaries(1, 5, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(group_boundaries(1, 5, 1.1), std::invalid_argument);
}

TEST_CASE("join_set on Table 4.1") {
    auto pairs = join_set(table4(), SimFn::Jac, 0.73);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 4);
    CHECK(pairs[0].value == doctest::Approx(9.0 / 11.0));
}

TEST_CASE("join_set with delta 1 finds identical sets only") {
    std::vector<std::vector<std::string>> recs = {{"a", "b"}, {"b", "a"}, {"a"}};
    auto pairs = join_set(recs, SimFn::Jac, 1.0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].a == 0);
    CHECK(pairs[0].b == 1);
}

TEST_CASE("join_set equals the oracle for every sim, selection and alpha") {
    std::mt19937 rng(59);
    auto recs = random_sets(rng, 150, 120, 3, 30);
    auto ids = as_ids(recs);
    for (SimFn fn : {SimFn::Jac, SimFn::Cos, SimFn::Dice})
        for (double delta : {0.75, 0.85}) {
            auto want = oracle::brute_join_set(ids, fn, delta);
            std::vector<JoinPair> first;
            bool have_first = false;
            for (auto sel : {Selection::AllOnes, Selection::Optimal, Selection::Greedy})
                for (double alpha : {0.5, 0.7, 1.0}) {
                    if (sel == Selection::AllOnes && alpha != 1.0)
                        continue;
                    JoinOptions opt;
                    opt.selection = sel;
                    opt.alpha = alpha;
                    auto got = join_set(recs, fn, delta, opt);
                    check_pairs(got, want);
                    if (!have_first) {
                        first = got;
                        have_first = true;
                    } else {
                        CHECK(got == first); // result-set invariance
                    }
                }
        }
}

TEST_CASE("probed list length ordering: optimal <= greedy <= all-ones") {
    std::mt19937 rng(61);
    auto recs = random_sets(rng, 200, 80, 3, 25);
    for (SimFn fn : {SimFn::Jac, SimFn::Dice}) {
        JoinStats ones, opt, greedy;
        JoinOptions o;
        o.selection = Selection::AllOnes;
        join_set(recs, fn, 0.7, o, &ones);
        o.selection = Selection::Optimal;
        join_set(recs, fn, 0.7, o, &opt);
        o.selection = Selection::Greedy;
        join_set(recs, fn, 0.7, o, &greedy);
        CHECK(opt.probed_length <= greedy.probed_length);
        CHECK(greedy.probed_length <= ones.probed_length);
    }
}

TEST_CASE("join_set R-S join equals the oracle") {
    std::mt19937 rng(67);
    auto r = random_sets(rng, 100, 80, 3, 20);
    auto s = random_sets(rng, 80, 80, 3, 20);
    auto all = r;
    all.insert(all.end(), s.begin(), s.end());
    auto ids = as_ids(all);
    std::vector<std::vector<uint32_t>> ri(ids.begin(), ids.begin() + r.size());
    std::vector<std::vector<uint32_t>> si(ids.begin() + r.size(), ids.end());
    auto want = oracle::brute_join_set(ri, si, SimFn::Jac, 0.7);
    check_pairs(join_set(r, s, SimFn::Jac, 0.7), want);
    JoinOptions threaded;
    threaded.threads = 3;
    check_pairs(join_set(r, s, SimFn::Jac, 0.7, threaded), want);
}

TEST_CASE("join_set parameter validation") {
    std::vector<std::vector<std::string>> recs = {{"a"}};
    JoinOptions opt;
    opt.selection = Selection::AllOnes;
    opt.alpha = 0.8;
    CHECK_THROWS_AS(join_set(recs, SimFn::Jac, 0.8, opt), std::invalid_argument);
    CHECK_THROWS_AS(join_set(recs, SimFn::Ed, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(join_set({{}}, SimFn::Jac, 0.8), std::invalid_argument);
    opt = {};
    opt.alpha = 0.3;
    CHECK_THROWS_AS(join_set(recs, SimFn::Jac, 0.8, opt), std::invalid_argument);
}
