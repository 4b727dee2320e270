#include "simtol/core.hpp"
#include "simtol/faerie.hpp"
#include "simtol/io.hpp"
#include "simtol/oracle.hpp"
#include "simtol/passjoin.hpp"
#include "simtol/pivotal.hpp"
#include "simtol/setjoin.hpp"
#include "simtol/tokenize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>
#include <unordered_map>

namespace {

using namespace simtol;

struct Output {
    std::ofstream file;
    std::ostream* out = &std::cout;

    void open(const std::string& path) {
        if (path.empty())
            return;
        file.open(path, std::ios::binary);
        if (!file)
            throw std::runtime_error("cannot open output file " + path);
        out = &file;
    }
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void report(const std::string& cmd, long long results, long long candidates, long long probed,
            double ms, const std::string& params) {
    std::cerr << "# " << cmd << " results=" << results << " candidates=" << candidates
              << " probed=" << probed << " time_ms=" << (long long)ms << " " << params << "\n";
}

SimFn parse_sim(const std::string& s) {
    if (s == "jac") return SimFn::Jac;
    if (s == "cos") return SimFn::Cos;
    if (s == "dice") return SimFn::Dice;
    if (s == "ed") return SimFn::Ed;
    if (s == "eds") return SimFn::Eds;
    throw CLI::ValidationError("--sim", "unknown similarity function: " + s);
}

int default_threads() {
    if (const char* env = std::getenv("SIMTOL_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1)
            return v;
    }
    return 1;
}

struct ExtractArgs {
    std::string dict, doc, sim = "jac", pruning = "batch", out;
    int tau = -1, q = 2;
    double delta = -1;
    bool use_oracle = false;
};

int run_extract(const ExtractArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    SimilaritySpec spec;
    spec.fn = parse_sim(a.sim);
    spec.q = a.q;
    if (spec.fn == SimFn::Ed) {
        if (a.tau < 0)
            throw std::invalid_argument("ed requires --tau");
        spec.tau = a.tau;
    } else {
        if (a.delta < 0)
            throw std::invalid_argument(std::string(sim_fn_name(spec.fn)) + " requires --delta");
        spec.delta = a.delta;
    }
    spec.validate();

    auto dict = io::read_string_file(a.dict);
    auto docs = io::read_string_file(a.doc);
    std::u32string document;
    for (size_t i = 0; i < docs.size(); ++i) {
        if (i)
            document.push_back(U'\n');
        document += docs[i];
    }

    Output out;
    out.open(a.out);
    long long results = 0, candidates = 0, probed = 0;
    if (a.use_oracle) {
        auto hits = oracle::brute_extract(dict, document, spec);
        for (const auto& h : hits)
            *out.out << h.entity + 1 << '\t' << h.start << '\t' << h.end << '\t'
                     << io::format_value(h.value) << '\n';
        results = (long long)hits.size();
    } else {
        faerie::Pruning pruning = faerie::Pruning::BatchBinary;
        if (a.pruning == "lazy")
            pruning = faerie::Pruning::Lazy;
        else if (a.pruning == "bucket")
            pruning = faerie::Pruning::Bucket;
        else if (a.pruning != "batch")
            throw std::invalid_argument("unknown pruning level: " + a.pruning);
        auto index = faerie::build_entity_index(dict, spec);
        faerie::ExtractStats stats;
        auto hits = faerie::extract(index, document, pruning, &stats);
        for (const auto& h : hits)
            *out.out << h.entity + 1 << '\t' << h.start << '\t' << h.end << '\t'
                     << io::format_value(h.value) << '\n';
        results = stats.results;
        candidates = stats.candidates;
        probed = stats.probed_length;
    }
    report("extract", results, candidates, probed, elapsed_ms(t0),
           "sim=" + a.sim + " q=" + std::to_string(a.q) +
               (spec.fn == SimFn::Ed ? " tau=" + std::to_string(spec.tau)
                                     : " delta=" + io::format_value(spec.delta)) +
               " pruning=" + a.pruning + (a.use_oracle ? " oracle" : ""));
    return 0;
}

struct JoinEdArgs {
    std::string input, input2, strategy = "multimatch", out;
    int tau = 0, threads = 1;
    bool use_oracle = false, no_share = false;
};

int run_join_ed(const JoinEdArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = io::read_string_file(a.input);
    Output out;
    out.open(a.out);

    passjoin::JoinOptions opt;
    opt.threads = a.threads;
    opt.share_prefix = !a.no_share;
    if (a.strategy == "length")
        opt.strategy = passjoin::Strategy::Length;
    else if (a.strategy == "shift")
        opt.strategy = passjoin::Strategy::Shift;
    else if (a.strategy == "position")
        opt.strategy = passjoin::Strategy::Position;
    else if (a.strategy == "multimatch")
        opt.strategy = passjoin::Strategy::MultiMatch;
    else
        throw std::invalid_argument("unknown strategy: " + a.strategy);

    long long results = 0, candidates = 0, probed = 0;
    if (a.use_oracle) {
        std::vector<oracle::Pair> pairs;
        if (a.input2.empty()) {
            pairs = oracle::brute_join_ed(r, a.tau);
        } else {
            auto s = io::read_string_file(a.input2);
            pairs = oracle::brute_join_ed(r, s, a.tau);
        }
        for (const auto& p : pairs)
            *out.out << p.a + 1 << '\t' << p.b + 1 << '\t' << io::format_value(p.value) << '\n';
        results = (long long)pairs.size();
    } else {
        passjoin::JoinStats stats;
        std::vector<passjoin::JoinPair> pairs;
        if (a.input2.empty()) {
            pairs = passjoin::join_ed(r, a.tau, opt, &stats);
        } else {
            auto s = io::read_string_file(a.input2);
            pairs = passjoin::join_ed(r, s, a.tau, opt, &stats);
        }
        for (const auto& p : pairs)
            *out.out << p.a + 1 << '\t' << p.b + 1 << '\t' << io::format_value((double)p.ed)
                     << '\n';
        results = (long long)pairs.size();
        candidates = stats.candidates;
        probed = stats.probes;
    }
    report("join-ed", results, candidates, probed, elapsed_ms(t0),
           "tau=" + std::to_string(a.tau) + " strategy=" + a.strategy +
               " threads=" + std::to_string(a.threads) + (a.use_oracle ? " oracle" : ""));
    return 0;
}

struct JoinEdsArgs {
    std::string input, out;
    double delta = 0;
    bool use_oracle = false;
};

int run_join_eds(const JoinEdsArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = io::read_string_file(a.input);
    for (size_t i = 0; i < r.size(); ++i)
        if (r[i].empty())
            throw std::runtime_error(a.input + ":" + std::to_string(i + 1) +
                                     ": empty record not allowed under eds");
    Output out;
    out.open(a.out);
    long long results = 0, candidates = 0, probed = 0;
    if (a.use_oracle) {
        auto pairs = oracle::brute_join_eds(r, a.delta);
        for (const auto& p : pairs)
            *out.out << p.a + 1 << '\t' << p.b + 1 << '\t' << io::format_value(p.value) << '\n';
        results = (long long)pairs.size();
    } else {
        passjoin::JoinStats stats;
        auto pairs = passjoin::join_eds(r, a.delta, {}, &stats);
        for (const auto& p : pairs)
            *out.out << p.a + 1 << '\t' << p.b + 1 << '\t' << io::format_value(p.eds) << '\n';
        results = (long long)pairs.size();
        candidates = stats.candidates;
        probed = stats.probes;
    }
    report("join-eds", results, candidates, probed, elapsed_ms(t0),
           "delta=" + io::format_value(a.delta) + (a.use_oracle ? " oracle" : ""));
    return 0;
}

struct JoinSetArgs {
    std::string input, input2, sim = "jac", selection = "optimal", out;
    double delta = 0, alpha = 1.0;
    int threads = 1;
    bool use_oracle = false;
};

int run_join_set(const JoinSetArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> warnings;
    auto r = io::read_set_file(a.input, &warnings);
    for (size_t i = 0; i < r.size(); ++i)
        if (r[i].empty())
            throw std::runtime_error(a.input + ":" + std::to_string(i + 1) + ": empty set record");
    std::vector<std::vector<std::string>> s;
    if (!a.input2.empty()) {
        s = io::read_set_file(a.input2, &warnings);
        for (size_t i = 0; i < s.size(); ++i)
            if (s[i].empty())
                throw std::runtime_error(a.input2 + ":" + std::to_string(i + 1) +
                                         ": empty set record");
    }
    for (const auto& w : warnings)
        std::cerr << "# warning: " << w << "\n";

    SimFn fn = parse_sim(a.sim);
    Output out;
    out.open(a.out);
    long long results = 0, candidates = 0, probed = 0;

    auto collapse = [](const std::vector<std::vector<std::string>>& raw) {
        return raw; // read_set_file already collapsed duplicates
    };
    if (a.use_oracle) {
        // The oracle needs interned ids; reuse the engine's public pieces by
        // mapping tokens to ids here.
        std::unordered_map<std::string, uint32_t> ids;
        auto to_ids = [&](const std::vector<std::vector<std::string>>& raw) {
            std::vector<std::vector<uint32_t>> out_sets;
            for (const auto& rec : raw) {
                std::vector<uint32_t> v;
                for (const auto& t : rec) {
                    auto [it, _] = ids.emplace(t, (uint32_t)ids.size());
                    v.push_back(it->second);
                }
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
                out_sets.push_back(std::move(v));
            }
            return out_sets;
        };
        auto ri = to_ids(collapse(r));
        std::vector<oracle::Pair> pairs;
        if (a.input2.empty()) {
            pairs = oracle::brute_join_set(ri, fn, a.delta);
        } else {
            auto si = to_ids(collapse(s));
            pairs = oracle::brute_join_set(ri, si, fn, a.delta);
        }
        for (const auto& p : pairs)
            *out.out << p.a + 1 << '\t' << p.b + 1 << '\t' << io::format_value(p.value) << '\n';
        results = (long long)pairs.size();
    } else {
        setjoin::JoinOptions opt;
        opt.alpha = a.alpha;
        opt.threads = a.threads;
        if (a.selection == "ones")
            opt.selection = setjoin::Selection::AllOnes;
        else if (a.selection == "optimal")
            opt.selection = setjoin::Selection::Optimal;
        else if (a.selection == "greedy")
            opt.selection = setjoin::Selection::Greedy;
        else
            throw std::invalid_argument("unknown selection: " + a.selection);
        setjoin::JoinStats stats;
        auto pairs = a.input2.empty() ? setjoin::join_set(r, fn, a.delta, opt, &stats)
                                      : setjoin::join_set(r, s, fn, a.delta, opt, &stats);
        for (const auto& p : pairs)
            *out.out << p.a + 1 << '\t' << p.b + 1 << '\t' << io::format_value(p.value) << '\n';
        results = (long long)pairs.size();
        candidates = stats.candidates;
        probed = stats.probed_length;
    }
    report("join-set", results, candidates, probed, elapsed_ms(t0),
           "sim=" + a.sim + " delta=" + io::format_value(a.delta) + " selection=" + a.selection +
               " alpha=" + io::format_value(a.alpha) + " threads=" + std::to_string(a.threads) +
               (a.use_oracle ? " oracle" : ""));
    return 0;
}

struct SearchArgs {
    std::string data, queries, pivots = "optimal", out;
    int tau = 0, tau_max = -1, q = 2, threads = 1;
    bool no_align = false, use_oracle = false;
};

int run_search(const SearchArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    auto data = io::read_string_file(a.data);
    auto queries = io::read_string_file(a.queries);
    Output out;
    out.open(a.out);
    long long results = 0, candidates = 0, probed = 0;

    if (a.use_oracle) {
        for (size_t qi = 0; qi < queries.size(); ++qi) {
            auto hits = oracle::brute_search(data, queries[qi], a.tau);
            for (const auto& h : hits)
                *out.out << qi + 1 << '\t' << h.id + 1 << '\t' << io::format_value((double)h.ed)
                         << '\n';
            results += (long long)hits.size();
        }
    } else {
        int tau_max = a.tau_max < 0 ? a.tau : a.tau_max;
        pivotal::PivotMode mode =
            a.pivots == "random" ? pivotal::PivotMode::Random : pivotal::PivotMode::Optimal;
        if (a.pivots != "random" && a.pivots != "optimal")
            throw std::invalid_argument("unknown pivot mode: " + a.pivots);
        pivotal::SearchIndex index(data, a.q, tau_max, mode);
        pivotal::SearchOptions opt;
        opt.query_pivots = mode;
        opt.alignment = !a.no_align;

        int threads = std::max(1, a.threads);
        std::vector<std::vector<pivotal::SearchHit>> hits(queries.size());
        std::vector<pivotal::SearchStats> stats(queries.size());
        auto work = [&](int w) {
            for (size_t qi = w; qi < queries.size(); qi += threads)
                hits[qi] = index.search(queries[qi], a.tau, opt, &stats[qi]);
        };
        if (threads == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < threads; ++w)
                pool.emplace_back(work, w);
            for (auto& t : pool)
                t.join();
        }
        for (size_t qi = 0; qi < queries.size(); ++qi) {
            for (const auto& h : hits[qi])
                *out.out << qi + 1 << '\t' << h.id + 1 << '\t' << io::format_value((double)h.ed)
                         << '\n';
            results += (long long)hits[qi].size();
            candidates += stats[qi].candidates;
            probed += stats[qi].probed_entries;
        }
    }
    report("search", results, candidates, probed, elapsed_ms(t0),
           "tau=" + std::to_string(a.tau) + " q=" + std::to_string(a.q) + " pivots=" + a.pivots +
               (a.no_align ? " no-align" : "") + " threads=" + std::to_string(a.threads) +
               (a.use_oracle ? " oracle" : ""));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"error-tolerant string and set similarity toolkit"};
    app.require_subcommand(1);

    ExtractArgs ea;
    auto* extract = app.add_subcommand("extract", "approximate dictionary entity extraction");
    extract->add_option("--dict", ea.dict, "entity dictionary file")->required();
    extract->add_option("--doc", ea.doc, "document file")->required();
    extract->add_option("--sim", ea.sim, "jac|cos|dice|ed|eds");
    extract->add_option("--tau", ea.tau, "edit-distance threshold (ed)");
    extract->add_option("--delta", ea.delta, "fractional threshold");
    extract->add_option("-q,--gram", ea.q, "gram length");
    extract->add_option("--pruning", ea.pruning, "lazy|bucket|batch");
    extract->add_option("--out", ea.out, "output file (default stdout)");
    extract->add_flag("--oracle", ea.use_oracle, "run the brute-force reference instead");

    JoinEdArgs ja;
    auto* join_ed = app.add_subcommand("join-ed", "edit-distance similarity join");
    join_ed->add_option("--input", ja.input, "record file")->required();
    join_ed->add_option("--input2", ja.input2, "probe-side record file (R-S join)");
    join_ed->add_option("--tau", ja.tau, "edit-distance threshold")->required();
    join_ed->add_option("--strategy", ja.strategy, "length|shift|position|multimatch");
    join_ed->add_option("--threads", ja.threads, "probe-side workers (R-S join)");
    join_ed->add_option("--out", ja.out, "output file");
    join_ed->add_flag("--no-share-prefix", ja.no_share, "disable shared-prefix verification");
    join_ed->add_flag("--oracle", ja.use_oracle, "run the brute-force reference instead");

    JoinEdsArgs ea2;
    auto* join_eds = app.add_subcommand("join-eds", "edit-similarity join");
    join_eds->add_option("--input", ea2.input, "record file")->required();
    join_eds->add_option("--delta", ea2.delta, "edit-similarity threshold")->required();
    join_eds->add_option("--out", ea2.out, "output file");
    join_eds->add_flag("--oracle", ea2.use_oracle, "run the brute-force reference instead");

    JoinSetArgs sa;
    auto* join_set = app.add_subcommand("join-set", "set similarity join");
    join_set->add_option("--input", sa.input, "set file")->required();
    join_set->add_option("--input2", sa.input2, "probe-side set file (R-S join)");
    join_set->add_option("--sim", sa.sim, "jac|cos|dice");
    join_set->add_option("--delta", sa.delta, "similarity threshold")->required();
    join_set->add_option("--selection", sa.selection, "ones|optimal|greedy");
    join_set->add_option("--alpha", sa.alpha, "multi-length grouping factor in [0.5,1]");
    join_set->add_option("--threads", sa.threads, "probe-side workers (R-S join)");
    join_set->add_option("--out", sa.out, "output file");
    join_set->add_flag("--oracle", sa.use_oracle, "run the brute-force reference instead");

    SearchArgs ra;
    auto* search = app.add_subcommand("search", "threshold string similarity search");
    search->add_option("--data", ra.data, "data record file")->required();
    search->add_option("--queries", ra.queries, "query file")->required();
    search->add_option("--tau", ra.tau, "query threshold")->required();
    search->add_option("--tau-max", ra.tau_max, "maximum supported threshold (default: tau)");
    search->add_option("-q,--gram", ra.q, "gram length");
    search->add_option("--pivots", ra.pivots, "optimal|random");
    search->add_option("--threads", ra.threads, "query workers");
    search->add_option("--out", ra.out, "output file");
    search->add_flag("--no-align-filter", ra.no_align, "disable the alignment filter");
    search->add_flag("--oracle", ra.use_oracle, "run the brute-force reference instead");

    ja.threads = sa.threads = ra.threads = default_threads();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*extract)
            return run_extract(ea);
        if (*join_ed)
            return run_join_ed(ja);
        if (*join_eds)
            return run_join_eds(ea2);
        if (*join_set)
            return run_join_set(sa);
        if (*search)
            return run_search(ra);
    } catch (const std::invalid_argument& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
