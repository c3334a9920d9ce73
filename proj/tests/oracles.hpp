#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stagecraft/character.hpp"

// Direct-formula reference implementations, written independently of the
// library code they check.
namespace oracle {

// Alpha from the full item covariance matrix: k/(k-1) * (1 - trace / sum).
inline double cronbach_alpha(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t k = rows.front().size();
    std::vector<long double> mean(k, 0.0L);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < k; ++j) mean[j] += r[j];
    for (auto& m : mean) m /= static_cast<long double>(n);
    long double trace = 0.0L, total = 0.0L;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            long double cov = 0.0L;
            for (const auto& r : rows) cov += (r[a] - mean[a]) * (r[b] - mean[b]);
            cov /= static_cast<long double>(n - 1);
            total += cov;
            if (a == b) trace += cov;
        }
    }
    const long double kk = static_cast<long double>(k);
    return static_cast<double>(kk / (kk - 1.0L) * (1.0L - trace / total));
}

// Textbook sums-of-products form in extended precision.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    long double num = n * sxy - sx * sy;
    long double den = std::sqrt(n * sxx - sx * sx) * std::sqrt(n * syy - sy * sy);
    return static_cast<double>(num / den);
}

// Plain double arithmetic so exact ties stay exact ties.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Full stable sort of every entry, then the first k. Returns (round, seq) pairs.
inline std::vector<std::pair<int, std::int64_t>> top_k(const std::vector<stagecraft::MemoryEntry>& mem,
                                                       const std::vector<double>& q, int k) {
    std::vector<std::pair<double, const stagecraft::MemoryEntry*>> all;
    for (const auto& e : mem) all.push_back({cosine(q, e.embedding), &e});
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        if (a.second->round != b.second->round) return a.second->round > b.second->round;
        return a.second->seq > b.second->seq;
    });
    std::vector<std::pair<int, std::int64_t>> out;
    for (int i = 0; i < k && i < static_cast<int>(all.size()); ++i) out.push_back({all[i].second->round, all[i].second->seq});
    return out;
}

inline double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

}  // namespace oracle
