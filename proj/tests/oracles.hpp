#pragma once

// Independent reference implementations used only by the tests: dense
// all-pairs distances, discretized disc measures, brute-force center search,
// random instance generators, and small statistics helpers. Nothing here may
// call the library's search routines, so disagreements point at real bugs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "netclutter/geodesics.hpp"
#include "netclutter/network.hpp"

namespace testutil {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// All-pairs shortest paths over the augmented graph's nodes, cubic and dumb.
inline std::vector<std::vector<double>> floyd_warshall(const netclutter::AugmentedGraph& g) {
    const int n = g.node_count();
    std::vector<std::vector<double>> d(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n), kInf));
    for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0.0;
    for (const auto& e : g.sub_edges()) {
        auto& duv = d[static_cast<size_t>(e.u)][static_cast<size_t>(e.v)];
        duv = std::min(duv, e.length);
        auto& dvu = d[static_cast<size_t>(e.v)][static_cast<size_t>(e.u)];
        dvu = std::min(dvu, e.length);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            const double dik = d[static_cast<size_t>(i)][static_cast<size_t>(k)];
            if (dik == kInf) continue;
            for (int j = 0; j < n; ++j) {
                const double alt = dik + d[static_cast<size_t>(k)][static_cast<size_t>(j)];
                if (alt < d[static_cast<size_t>(i)][static_cast<size_t>(j)])
                    d[static_cast<size_t>(i)][static_cast<size_t>(j)] = alt;
            }
        }
    return d;
}

// All-pairs over the base vertices only, from the raw segment table.
inline std::vector<std::vector<double>> base_all_pairs(const netclutter::LinearNetwork& net) {
    const int n = net.vertex_count();
    std::vector<std::vector<double>> d(static_cast<size_t>(n),
                                       std::vector<double>(static_cast<size_t>(n), kInf));
    for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0.0;
    for (const auto& s : net.segments()) {
        auto& dab = d[static_cast<size_t>(s.a)][static_cast<size_t>(s.b)];
        dab = std::min(dab, s.length);
        auto& dba = d[static_cast<size_t>(s.b)][static_cast<size_t>(s.a)];
        dba = std::min(dba, s.length);
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            const double dik = d[static_cast<size_t>(i)][static_cast<size_t>(k)];
            if (dik == kInf) continue;
            for (int j = 0; j < n; ++j) {
                const double alt = dik + d[static_cast<size_t>(k)][static_cast<size_t>(j)];
                if (alt < d[static_cast<size_t>(i)][static_cast<size_t>(j)])
                    d[static_cast<size_t>(i)][static_cast<size_t>(j)] = alt;
            }
        }
    return d;
}

// Network distance between two arbitrary locations, using only the base
// all-pairs table: the within-segment route plus the four endpoint routes.
inline double oracle_point_distance(const netclutter::LinearNetwork& net,
                                    const std::vector<std::vector<double>>& base,
                                    const netclutter::NetPoint& p,
                                    const netclutter::NetPoint& q) {
    const auto& sp = net.segment(p.segment_id);
    const auto& sq = net.segment(q.segment_id);
    double best = kInf;
    if (p.segment_id == q.segment_id) best = std::abs(p.offset - q.offset);
    const double pa = p.offset, pb = sp.length - p.offset;
    const double qa = q.offset, qb = sq.length - q.offset;
    const double combos[4] = {
        pa + base[static_cast<size_t>(sp.a)][static_cast<size_t>(sq.a)] + qa,
        pa + base[static_cast<size_t>(sp.a)][static_cast<size_t>(sq.b)] + qb,
        pb + base[static_cast<size_t>(sp.b)][static_cast<size_t>(sq.a)] + qa,
        pb + base[static_cast<size_t>(sp.b)][static_cast<size_t>(sq.b)] + qb,
    };
    for (double c : combos) best = std::min(best, c);
    return best;
}

inline double oracle_vertex_point_distance(const netclutter::LinearNetwork& net,
                                           const std::vector<std::vector<double>>& base,
                                           int vertex, const netclutter::NetPoint& q) {
    const auto& sq = net.segment(q.segment_id);
    const double via_a =
        base[static_cast<size_t>(vertex)][static_cast<size_t>(sq.a)] + q.offset;
    const double via_b =
        base[static_cast<size_t>(vertex)][static_cast<size_t>(sq.b)] + (sq.length - q.offset);
    return std::min(via_a, via_b);
}

// Disc measure on a fixed arclength grid, summed over the base segments.
// `dist(sample)` must give the network distance from the query location to an
// arbitrary sample location. Network distance is 1-Lipschitz along a segment,
// so a cell whose midpoint clears the radius by at least half a cell is
// decided outright; only cells straddling the disc frontier are refined, which
// keeps the oracle's own quantization error far below the comparison
// tolerances regardless of how many segment boundaries the disc crosses.
template <typename DistFn>
double disc_oracle(const netclutter::LinearNetwork& net, double r, double step, DistFn dist) {
    double total = 0.0;
    for (const auto& s : net.segments()) {
        const int m = std::max(1, static_cast<int>(std::ceil(s.length / step)));
        const double cell = s.length / m;
        double covered = 0.0;
        for (int j = 0; j < m; ++j) {
            const double lo = j * cell;
            const double d = dist(netclutter::NetPoint{s.id, lo + 0.5 * cell});
            if (d <= r - 0.5 * cell) {
                covered += cell;
            } else if (d <= r + 0.5 * cell) {
                constexpr int kSub = 64;
                const double subcell = cell / kSub;
                for (int q = 0; q < kSub; ++q) {
                    const double t = lo + (q + 0.5) * subcell;
                    if (dist(netclutter::NetPoint{s.id, t}) <= r) covered += subcell;
                }
            }
        }
        total += covered;
    }
    return total;
}

inline double disc_oracle_from_point(const netclutter::LinearNetwork& net,
                                     const std::vector<std::vector<double>>& base,
                                     const netclutter::NetPoint& p, double r, double step) {
    return disc_oracle(net, r, step, [&](const netclutter::NetPoint& q) {
        return oracle_point_distance(net, base, p, q);
    });
}

inline double disc_oracle_from_vertex(const netclutter::LinearNetwork& net,
                                      const std::vector<std::vector<double>>& base, int vertex,
                                      double r, double step) {
    return disc_oracle(net, r, step, [&](const netclutter::NetPoint& q) {
        return oracle_vertex_point_distance(net, base, vertex, q);
    });
}

// Smallest enclosing-disc radius by brute force over densely sampled centers
// and sample targets. Connected networks only (the caller splits components).
inline double circumradius_dense(const netclutter::LinearNetwork& net, double step) {
    const auto base = base_all_pairs(net);
    std::vector<netclutter::NetPoint> samples;
    for (const auto& s : net.segments()) {
        const int m = std::max(1, static_cast<int>(std::ceil(s.length / step)));
        for (int j = 0; j <= m; ++j)
            samples.push_back({s.id, s.length * j / m});
    }
    double best = kInf;
    for (const auto& c : samples) {
        double ecc = 0.0;
        for (const auto& q : samples)
            ecc = std::max(ecc, oracle_point_distance(net, base, c, q));
        best = std::min(best, ecc);
    }
    return best;
}

// --- random instances ---------------------------------------------------

inline netclutter::LinearNetwork random_network(std::mt19937_64& rng, int max_segments = 12) {
    std::uniform_real_distribution<double> coord(0.0, 20.0);
    std::uniform_int_distribution<int> nv_dist(3, 9);
    std::uniform_int_distribution<int> ns_dist(1, max_segments);
    const int nv = nv_dist(rng);
    std::vector<std::pair<double, double>> pool(static_cast<size_t>(nv));
    for (auto& p : pool) p = {coord(rng), coord(rng)};
    // a second far-away cluster now and then, so components stay exercised
    std::bernoulli_distribution detached(0.3);
    const bool two_clusters = detached(rng);
    if (two_clusters)
        for (size_t i = pool.size() / 2; i < pool.size(); ++i) {
            pool[i].first += 200.0;
            pool[i].second += 200.0;
        }
    const int ns = ns_dist(rng);
    std::uniform_int_distribution<int> pick(0, nv - 1);
    std::bernoulli_distribution dup_edge(0.15);
    std::vector<netclutter::RawSegment> raw;
    while (static_cast<int>(raw.size()) < ns) {
        if (!raw.empty() && dup_edge(rng)) {
            raw.push_back(raw[static_cast<size_t>(
                std::uniform_int_distribution<int>(0, static_cast<int>(raw.size()) - 1)(rng))]);
            continue;
        }
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        raw.push_back({pool[static_cast<size_t>(i)].first, pool[static_cast<size_t>(i)].second,
                       pool[static_cast<size_t>(j)].first, pool[static_cast<size_t>(j)].second});
    }
    return netclutter::build_network(raw, 1e-9, "unit");
}

inline std::vector<netclutter::NetPoint> random_points(const netclutter::LinearNetwork& net,
                                                       std::mt19937_64& rng,
                                                       int max_points = 15, int min_points = 2) {
    std::uniform_int_distribution<int> n_dist(min_points, max_points);
    std::uniform_int_distribution<int> seg(0, net.segment_count() - 1);
    std::bernoulli_distribution at_end(0.1), duplicate(0.1);
    const int n = n_dist(rng);
    std::vector<netclutter::NetPoint> pts;
    for (int i = 0; i < n; ++i) {
        if (!pts.empty() && duplicate(rng)) {
            pts.push_back(pts[static_cast<size_t>(
                std::uniform_int_distribution<int>(0, static_cast<int>(pts.size()) - 1)(rng))]);
            continue;
        }
        const int s = seg(rng);
        const double len = net.segment(s).length;
        double off = std::uniform_real_distribution<double>(0.0, len)(rng);
        if (at_end(rng)) off = (off < len / 2) ? 0.0 : len;
        pts.push_back({s, off});
    }
    return pts;
}

// --- statistics helpers ---------------------------------------------------

inline std::vector<double> ranks(std::span<const double> v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return v[static_cast<size_t>(a)] < v[static_cast<size_t>(b)];
    });
    std::vector<double> r(v.size());
    size_t i = 0;
    while (i < idx.size()) {
        size_t j = i;
        while (j + 1 < idx.size() && v[static_cast<size_t>(idx[j + 1])] ==
                                         v[static_cast<size_t>(idx[i])])
            ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) r[static_cast<size_t>(idx[k])] = mean_rank;
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const auto rx = ranks(x), ry = ranks(y);
    return pearson(rx, ry);
}

// Exact one-sided permutation p-value for a negative rank correlation between
// the values and their positions 1..n. Enumerates every permutation, so
// callers keep n <= 8.
inline double spearman_perm_p_negative(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<double> pos(n);
    std::iota(pos.begin(), pos.end(), 1.0);
    const double observed = spearman_rho(pos, values);
    std::vector<double> perm(values.begin(), values.end());
    std::sort(perm.begin(), perm.end());
    long long total = 0, as_extreme = 0;
    do {
        ++total;
        if (spearman_rho(pos, perm) <= observed + 1e-12) ++as_extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(as_extreme) / static_cast<double>(total);
}

// 1-D two-means split; returns (gap between the two cluster means) divided by
// the pooled within-cluster standard deviation. Values well above ~2 mean the
// sample is strongly two-lumped.
inline double two_means_separation(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    double c1 = v.front(), c2 = v.back();
    std::vector<char> in2(v.size(), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        double s1 = 0, s2 = 0;
        long long n1 = 0, n2 = 0;
        for (size_t i = 0; i < v.size(); ++i) {
            const char grp = std::abs(v[i] - c1) <= std::abs(v[i] - c2) ? 0 : 1;
            if (grp != in2[i]) {
                in2[i] = grp;
                changed = true;
            }
            if (grp) {
                s2 += v[i];
                ++n2;
            } else {
                s1 += v[i];
                ++n1;
            }
        }
        if (n1 == 0 || n2 == 0) return 0.0;
        c1 = s1 / static_cast<double>(n1);
        c2 = s2 / static_cast<double>(n2);
        if (!changed) break;
    }
    double ss = 0;
    long long n1 = 0, n2 = 0;
    for (size_t i = 0; i < v.size(); ++i) {
        const double c = in2[i] ? c2 : c1;
        ss += (v[i] - c) * (v[i] - c);
        (in2[i] ? n2 : n1)++;
    }
    if (n1 == 0 || n2 == 0) return 0.0;
    const double pooled_sd = std::sqrt(ss / static_cast<double>(v.size()));
    if (pooled_sd == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(c2 - c1) / pooled_sd;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil
