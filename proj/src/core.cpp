#include "simtol/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace simtol {

namespace {
constexpr double kGuard = 1e-9;
constexpr int kInf = std::numeric_limits<int>::max() / 4;
} // namespace

const char* sim_fn_name(SimFn fn) {
    switch (fn) {
    case SimFn::Jac: return "jac";
    case SimFn::Cos: return "cos";
    case SimFn::Dice: return "dice";
    case SimFn::Ed: return "ed";
    case SimFn::Eds: return "eds";
    }
    return "?";
}

bool is_fractional(SimFn fn) { return fn != SimFn::Ed; }

void SimilaritySpec::validate() const {
    if (q < 1)
        throw std::invalid_argument("gram length q must be >= 1");
    if (fn == SimFn::Ed) {
        if (tau < 0)
            throw std::invalid_argument("edit-distance threshold tau must be >= 0");
    } else {
        if (!(delta > 0.0 && delta <= 1.0))
            throw std::invalid_argument("fractional threshold must lie in (0,1]");
    }
}

long long guarded_ceil(double x) { return static_cast<long long>(std::ceil(x - kGuard)); }
long long guarded_floor(double x) { return static_cast<long long>(std::floor(x + kGuard)); }

OverlapThreshold overlap_threshold(const SimilaritySpec& spec, long long e, long long s) {
    switch (spec.fn) {
    case SimFn::Jac:
        return {guarded_ceil((double)(e + s) * spec.delta / (1.0 + spec.delta))};
    case SimFn::Cos:
        return {guarded_ceil(std::sqrt((double)e * (double)s) * spec.delta)};
    case SimFn::Dice:
        return {guarded_ceil((double)(e + s) * spec.delta / 2.0)};
    case SimFn::Ed:
        return {std::max(e, s) - (long long)spec.tau * spec.q};
    case SimFn::Eds: {
        double m = (double)std::max(e, s);
        return {guarded_ceil(m - (m + spec.q - 1) * (1.0 - spec.delta) * spec.q)};
    }
    }
    return {};
}

SizeBounds token_count_bounds(const SimilaritySpec& spec, long long e) {
    SizeBounds b;
    switch (spec.fn) {
    case SimFn::Jac:
        b.lower = guarded_ceil((double)e * spec.delta);
        b.upper = guarded_floor((double)e / spec.delta);
        break;
    case SimFn::Cos:
        b.lower = guarded_ceil((double)e * spec.delta * spec.delta);
        b.upper = guarded_floor((double)e / (spec.delta * spec.delta));
        break;
    case SimFn::Dice:
        b.lower = guarded_ceil((double)e * spec.delta / (2.0 - spec.delta));
        b.upper = guarded_floor((double)e * (2.0 - spec.delta) / spec.delta);
        break;
    case SimFn::Ed:
        b.lower = e - spec.tau;
        b.upper = e + spec.tau;
        break;
    case SimFn::Eds:
        b.lower = guarded_ceil((double)(e + spec.q - 1) * spec.delta - (spec.q - 1));
        b.upper = guarded_floor((double)(e + spec.q - 1) / spec.delta - (spec.q - 1));
        break;
    }
    b.lower = std::max<long long>(1, b.lower);
    return b;
}

long long lazy_threshold(const SimilaritySpec& spec, long long e) {
    switch (spec.fn) {
    case SimFn::Jac:
        return guarded_ceil((double)e * spec.delta);
    case SimFn::Cos:
        return guarded_ceil((double)e * spec.delta * spec.delta);
    case SimFn::Dice:
        return guarded_ceil((double)e * spec.delta / (2.0 - spec.delta));
    case SimFn::Ed:
        return e - (long long)spec.tau * spec.q;
    case SimFn::Eds:
        return guarded_ceil((double)e -
                            (double)(e + spec.q - 1) * (1.0 - spec.delta) / spec.delta * spec.q);
    }
    return 0;
}

long long multiset_overlap(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    long long overlap = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++overlap, ++i, ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return overlap;
}

double set_similarity(SimFn fn, const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("set similarity undefined for empty records");
    double overlap = (double)multiset_overlap(a, b);
    switch (fn) {
    case SimFn::Jac:
        return overlap / (double)(a.size() + b.size() - (size_t)overlap);
    case SimFn::Cos:
        return overlap / std::sqrt((double)a.size() * (double)b.size());
    case SimFn::Dice:
        return 2.0 * overlap / (double)(a.size() + b.size());
    default:
        throw std::invalid_argument("set similarity requires JAC/COS/DICE");
    }
}

double eds_value(long long ed, size_t len_a, size_t len_b) {
    size_t m = std::max(len_a, len_b);
    if (m == 0)
        throw std::invalid_argument("EDS undefined for two empty strings");
    return 1.0 - (double)ed / (double)m;
}

std::optional<int> bounded_edit_distance(std::u32string_view a, std::u32string_view b, int bound) {
    if (bound < 0)
        return std::nullopt;
    if (a.size() > b.size())
        std::swap(a, b);
    int n = (int)a.size(), m = (int)b.size();
    int d = m - n;
    if (d > bound)
        return std::nullopt;
    int lo = (bound - d) / 2, hi = (bound + d) / 2;
    int width = lo + hi + 1;

    // prev[k] holds M(i-1, j) with k = j - (i-1) + lo.
    std::vector<int> prev(width, kInf), cur(width, kInf);
    for (int j = 0; j <= std::min(m, hi); ++j)
        prev[j + lo] = j;
    for (int i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), kInf);
        int jb = std::max(0, i - lo), je = std::min(m, i + hi);
        bool alive = false;
        for (int j = jb; j <= je; ++j) {
            int k = j - i + lo;
            int best = kInf;
            if (j >= 1) {
                int kd = k; // (j-1) - (i-1) + lo
                if (prev[kd] < kInf)
                    best = std::min(best, prev[kd] + (a[i - 1] == b[j - 1] ? 0 : 1));
            }
            int ku = k + 1; // j - (i-1) + lo
            if (ku < width && prev[ku] < kInf)
                best = std::min(best, prev[ku] + 1);
            if (k >= 1 && cur[k - 1] < kInf)
                best = std::min(best, cur[k - 1] + 1);
            cur[k] = best;
            if (best + std::abs((m - j) - (n - i)) <= bound)
                alive = true;
        }
        if (!alive)
            return std::nullopt;
        std::swap(prev, cur);
    }
    int k = m - n + lo;
    if (k >= 0 && k < width && prev[k] <= bound)
        return prev[k];
    return std::nullopt;
}

void BandedVerifier::reset(std::u32string_view query, int bound) {
    query_.assign(query.begin(), query.end());
    bound_ = std::max(bound, -1);
    lo_ = hi_ = std::max(bound, 0);
    rows_.clear();
    rows_done_ = 0;
    data_len_ = SIZE_MAX;
    dead_row_ = SIZE_MAX;
    if (bound_ >= 0) {
        int width = lo_ + hi_ + 1;
        rows_.emplace_back(width, kInf);
        for (int j = 0; j <= std::min((int)query_.size(), hi_); ++j)
            rows_[0][j + lo_] = j;
    }
}

bool BandedVerifier::compute_row(size_t i, std::u32string_view data) {
    int m = (int)query_.size(), n = (int)data.size();
    int width = lo_ + hi_ + 1;
    if (rows_.size() <= i)
        rows_.emplace_back();
    auto& cur = rows_[i];
    cur.assign(width, kInf);
    const auto& prev = rows_[i - 1];
    int jb = std::max(0, (int)i - lo_), je = std::min(m, (int)i + hi_);
    bool alive = false;
    for (int j = jb; j <= je; ++j) {
        int k = j - (int)i + lo_;
        int best = kInf;
        if (j >= 1 && prev[k] < kInf)
            best = std::min(best, prev[k] + (data[i - 1] == query_[j - 1] ? 0 : 1));
        if (k + 1 < width && prev[k + 1] < kInf)
            best = std::min(best, prev[k + 1] + 1);
        if (k >= 1 && cur[k - 1] < kInf)
            best = std::min(best, cur[k - 1] + 1);
        cur[k] = best;
        if (best + std::abs((m - j) - (n - (int)i)) <= bound_)
            alive = true;
    }
    return alive;
}

std::optional<int> BandedVerifier::distance(std::u32string_view data, size_t reuse) {
    if (bound_ < 0)
        return std::nullopt;
    int n = (int)data.size(), m = (int)query_.size();
    if (std::abs(n - m) > bound_)
        return std::nullopt;
    // Cached rows embed the early-termination decision, which depends on the
    // data length; reuse is therefore restricted to data of one length.
    if (data_len_ != data.size()) {
        data_len_ = data.size();
        reuse = 0;
    }
    reuse = std::min({reuse, rows_done_, data.size()});
    if (dead_row_ <= reuse)
        return std::nullopt;

    for (size_t i = reuse + 1; i <= (size_t)n; ++i) {
        if (!compute_row(i, data)) {
            rows_done_ = i;
            dead_row_ = i;
            return std::nullopt;
        }
        rows_done_ = i;
    }
    if (n == 0)
        rows_done_ = 0;
    dead_row_ = SIZE_MAX;
    int width = lo_ + hi_ + 1;
    int k = m - n + lo_;
    if (k >= 0 && k < width && rows_[n][k] <= bound_)
        return rows_[n][k];
    return std::nullopt;
}

} // namespace simtol
