// Retrieval quality metrics over ranked lists plus a timing/memory
// benchmark for the index. Relevance is label equality between query
// and gallery item. All per-ranking functions take a 0/1 relevance
// vector in rank order; evaluate_retrieval drives them from an index
// and label lists and aggregates a serializable report.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "hamming.hpp"

namespace xmh {

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

// AP = (1/R_total) * sum over relevant ranks of precision at that rank.
// R_total counts relevant items in the whole gallery, not the ranking
// prefix. Zero relevant items yields 0 and sets the warning flag.
inline double average_precision(const std::vector<int>& rel_ranked, std::size_t total_relevant,
                                bool* no_relevant = nullptr) {
    if (no_relevant) *no_relevant = (total_relevant == 0);
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rel_ranked.size(); ++i) {
        if (rel_ranked[i]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(total_relevant);
}

inline double mean_average_precision(const std::vector<double>& per_query_ap) {
    if (per_query_ap.empty())
        throw std::invalid_argument("mean_average_precision: need at least one query");
    double s = 0.0;
    for (double ap : per_query_ap) s += ap;
    return s / static_cast<double>(per_query_ap.size());
}

// fraction of relevant items in the top min(k, length) positions
inline double precision_at_k(const std::vector<int>& rel_ranked, std::size_t k) {
    if (k < 1) throw std::invalid_argument("precision_at_k: k must be at least 1");
    std::size_t cut = std::min(k, rel_ranked.size());
    if (cut == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cut; ++i)
        if (rel_ranked[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(cut);
}

// one point per rank position: recall = hits/R_total, precision = hits/rank
inline std::vector<PrPoint> pr_curve(const std::vector<int>& rel_ranked,
                                     std::size_t total_relevant) {
    if (total_relevant == 0) throw std::invalid_argument("pr_curve: no relevant items");
    std::vector<PrPoint> pts(rel_ranked.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rel_ranked.size(); ++i) {
        if (rel_ranked[i]) ++hits;
        pts[i].recall = static_cast<double>(hits) / static_cast<double>(total_relevant);
        pts[i].precision = static_cast<double>(hits) / static_cast<double>(i + 1);
    }
    return pts;
}

// Mean over queries of the precision within the Hamming ball of the
// given radius. A query whose ball is empty contributes 0 rather than
// being skipped, so code collapse shows up as a penalty.
inline double hd2_precision(const PackedCodeIndex& idx, const PackedCodeIndex& queries,
                            const std::vector<int>& query_labels,
                            const std::vector<int>& gallery_labels, std::size_t radius = 2) {
    if (queries.m != idx.m)
        throw std::invalid_argument("hd2_precision: query code length does not match index");
    if (query_labels.size() != queries.n || gallery_labels.size() != idx.n)
        throw std::invalid_argument("hd2_precision: label counts disagree with codes");
    if (queries.n == 0) throw std::invalid_argument("hd2_precision: no queries");
    double sum = 0.0;
    for (std::size_t q = 0; q < queries.n; ++q) {
        auto ball = search_radius(idx, queries.code_ptr(q), radius);
        if (ball.empty()) continue; // contributes 0
        std::size_t rel = 0;
        for (const auto& hit : ball)
            if (gallery_labels[hit.position] == query_labels[q]) ++rel;
        sum += static_cast<double>(rel) / static_cast<double>(ball.size());
    }
    return sum / static_cast<double>(queries.n);
}

struct BenchmarkResult {
    double median_seconds = 0.0; // per-query wall time
    double iqr_seconds = 0.0;
    std::size_t repetitions = 0;
    std::size_t num_queries = 0;
    std::size_t k = 0;
    std::size_t memory_bytes = 0;  // full index: packed words + ids
    std::size_t payload_bytes = 0; // code content only, m bits per code
};

namespace detail {

inline double percentile(std::vector<double>& sorted_vals, double p) {
    if (sorted_vals.empty()) return 0.0;
    double pos = p * static_cast<double>(sorted_vals.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted_vals.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted_vals[lo] * (1.0 - frac) + sorted_vals[hi] * frac;
}

} // namespace detail

// Times search_topk per query, repetitions complete passes. Reports the
// median and interquartile range over all (query, repetition) timings.
inline BenchmarkResult benchmark(const PackedCodeIndex& idx, const PackedCodeIndex& queries,
                                 std::size_t repetitions, std::size_t k = 10) {
    if (repetitions < 3)
        throw std::invalid_argument("benchmark: repetitions must be at least 3");
    if (queries.m != idx.m)
        throw std::invalid_argument("benchmark: query code length does not match index");
    using clock = std::chrono::steady_clock;
    std::vector<double> times;
    times.reserve(repetitions * queries.n);
    std::size_t sink = 0; // keeps the scan from being optimized away
    for (std::size_t r = 0; r < repetitions; ++r) {
        for (std::size_t q = 0; q < queries.n; ++q) {
            auto t0 = clock::now();
            auto hits = search_topk(idx, queries.code_ptr(q), k);
            auto t1 = clock::now();
            sink += hits.empty() ? 0 : hits.front().distance;
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
    }
    volatile std::size_t guard = sink; // keep the timed calls observable
    (void)guard;
    std::sort(times.begin(), times.end());
    BenchmarkResult res;
    res.median_seconds = detail::percentile(times, 0.5);
    res.iqr_seconds = detail::percentile(times, 0.75) - detail::percentile(times, 0.25);
    res.repetitions = repetitions;
    res.num_queries = queries.n;
    res.k = k;
    res.memory_bytes = idx.memory_bytes();
    res.payload_bytes = code_payload_bytes(idx.n, idx.m);
    return res;
}

struct MetricsReport {
    double map = 0.0;
    std::size_t num_queries = 0;
    std::size_t queries_without_relevant = 0;
    std::vector<std::pair<std::size_t, double>> precision_at_k; // (k, value)
    std::vector<PrPoint> pr_points; // macro-averaged over queries on a recall grid
    double hd2 = 0.0;
    std::size_t hd2_radius = 2;
    std::vector<double> per_query_ap;
    bool has_benchmark = false;
    BenchmarkResult bench;
};

// Full protocol: rank the whole gallery for every query, then AP/MAP,
// precision at the requested cutoffs, a macro-averaged PR curve on a
// fixed recall grid and ball precision at the given radius.
inline MetricsReport evaluate_retrieval(const PackedCodeIndex& idx, const PackedCodeIndex& queries,
                                        const std::vector<int>& query_labels,
                                        const std::vector<int>& gallery_labels,
                                        const std::vector<std::size_t>& k_values,
                                        std::size_t radius = 2, std::size_t num_threads = 0) {
    if (queries.m != idx.m)
        throw std::invalid_argument("evaluate_retrieval: query code length does not match index");
    if (query_labels.size() != queries.n)
        throw std::invalid_argument("evaluate_retrieval: query labels misaligned with codes");
    if (gallery_labels.size() != idx.n)
        throw std::invalid_argument("evaluate_retrieval: gallery labels misaligned with index");
    if (queries.n == 0) throw std::invalid_argument("evaluate_retrieval: no queries");

    auto rankings = search_topk_batch(idx, queries, idx.n, num_threads);

    MetricsReport rep;
    rep.num_queries = queries.n;
    rep.hd2_radius = radius;

    // interpolated precision grid for the macro-averaged curve
    const std::size_t grid_n = 101;
    std::vector<double> grid_sum(grid_n, 0.0);
    std::size_t grid_queries = 0;

    std::vector<std::size_t> class_count;
    for (int y : gallery_labels) {
        if (y >= 0 && static_cast<std::size_t>(y) >= class_count.size())
            class_count.resize(static_cast<std::size_t>(y) + 1, 0);
        if (y >= 0) ++class_count[static_cast<std::size_t>(y)];
    }

    for (std::size_t q = 0; q < queries.n; ++q) {
        const auto& ranking = rankings[q];
        std::vector<int> rel(ranking.size());
        for (std::size_t i = 0; i < ranking.size(); ++i)
            rel[i] = (gallery_labels[ranking[i].position] == query_labels[q]) ? 1 : 0;
        int qy = query_labels[q];
        std::size_t total_rel =
            (qy >= 0 && static_cast<std::size_t>(qy) < class_count.size())
                ? class_count[static_cast<std::size_t>(qy)]
                : 0;
        bool warned = false;
        rep.per_query_ap.push_back(average_precision(rel, total_rel, &warned));
        if (warned) {
            ++rep.queries_without_relevant;
        } else {
            // interpolated precision at recall level r is the best
            // precision at any rank whose recall reaches r
            auto pts = pr_curve(rel, total_rel);
            std::vector<double> suffix_max(pts.size());
            double best = 0.0;
            for (std::size_t j = pts.size(); j-- > 0;) {
                best = std::max(best, pts[j].precision);
                suffix_max[j] = best;
            }
            std::size_t j = 0;
            for (std::size_t g = 0; g < grid_n; ++g) {
                double r = static_cast<double>(g) / static_cast<double>(grid_n - 1);
                while (j < pts.size() && pts[j].recall < r) ++j;
                if (j < pts.size()) grid_sum[g] += suffix_max[j];
                // full rankings always reach recall 1, so j stays in range
            }
            ++grid_queries;
        }
    }

    rep.map = mean_average_precision(rep.per_query_ap);
    for (std::size_t k : k_values) {
        double sum = 0.0;
        for (std::size_t q = 0; q < queries.n; ++q) {
            const auto& ranking = rankings[q];
            std::vector<int> rel(ranking.size());
            for (std::size_t i = 0; i < ranking.size(); ++i)
                rel[i] = (gallery_labels[ranking[i].position] == query_labels[q]) ? 1 : 0;
            sum += precision_at_k(rel, k);
        }
        rep.precision_at_k.emplace_back(k, sum / static_cast<double>(queries.n));
    }
    if (grid_queries > 0) {
        rep.pr_points.resize(grid_n);
        for (std::size_t g = 0; g < grid_n; ++g) {
            rep.pr_points[g].recall = static_cast<double>(g) / static_cast<double>(grid_n - 1);
            rep.pr_points[g].precision = grid_sum[g] / static_cast<double>(grid_queries);
        }
    }
    rep.hd2 = hd2_precision(idx, queries, query_labels, gallery_labels, radius);
    return rep;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

inline std::string metrics_to_json(const MetricsReport& rep) {
    std::string s = "{\n";
    s += "  \"map\": " + detail::fmt_double(rep.map) + ",\n";
    s += "  \"num_queries\": " + std::to_string(rep.num_queries) + ",\n";
    s += "  \"queries_without_relevant\": " + std::to_string(rep.queries_without_relevant) +
         ",\n";
    s += "  \"precision_at_k\": [";
    for (std::size_t i = 0; i < rep.precision_at_k.size(); ++i) {
        if (i) s += ", ";
        s += "{\"k\": " + std::to_string(rep.precision_at_k[i].first) +
             ", \"value\": " + detail::fmt_double(rep.precision_at_k[i].second) + "}";
    }
    s += "],\n";
    s += "  \"hd_precision\": {\"radius\": " + std::to_string(rep.hd2_radius) +
         ", \"value\": " + detail::fmt_double(rep.hd2) + "},\n";
    s += "  \"pr_curve\": [";
    for (std::size_t i = 0; i < rep.pr_points.size(); ++i) {
        if (i) s += ", ";
        s += "{\"recall\": " + detail::fmt_double(rep.pr_points[i].recall) +
             ", \"precision\": " + detail::fmt_double(rep.pr_points[i].precision) + "}";
    }
    s += "]";
    if (rep.has_benchmark) {
        s += ",\n  \"benchmark\": {";
        s += "\"median_seconds_per_query\": " + detail::fmt_double(rep.bench.median_seconds);
        s += ", \"iqr_seconds\": " + detail::fmt_double(rep.bench.iqr_seconds);
        s += ", \"repetitions\": " + std::to_string(rep.bench.repetitions);
        s += ", \"k\": " + std::to_string(rep.bench.k);
        s += ", \"memory_bytes\": " + std::to_string(rep.bench.memory_bytes);
        s += ", \"payload_bytes\": " + std::to_string(rep.bench.payload_bytes);
        s += "}";
    }
    s += "\n}\n";
    return s;
}

inline std::string per_query_ap_csv(const MetricsReport& rep) {
    std::string s = "query,ap\n";
    for (std::size_t q = 0; q < rep.per_query_ap.size(); ++q)
        s += std::to_string(q) + "," + detail::fmt_double(rep.per_query_ap[q]) + "\n";
    return s;
}

inline std::string pr_curve_csv(const MetricsReport& rep) {
    std::string s = "recall,precision\n";
    for (const auto& p : rep.pr_points)
        s += detail::fmt_double(p.recall) + "," + detail::fmt_double(p.precision) + "\n";
    return s;
}

} // namespace xmh
