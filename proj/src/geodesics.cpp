#include "netclutter/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <utility>

#include "netclutter/parallel.hpp"

namespace netclutter {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

AugmentedGraph::AugmentedGraph(const LinearNetwork& net, std::span<const NetPoint> pts)
    : net_(&net) {
    const int nv = net.vertex_count();
    const int np = static_cast<int>(pts.size());
    for (const auto& p : pts) net.validate_point(p);

    // Interior insertions per segment, deduplicated by exact offset.
    // (segment, offset) -> synthetic node id, assigned in sorted order so the
    // graph layout is independent of point ordering.
    std::map<std::pair<int, double>, int> interior;
    point_node_.assign(static_cast<size_t>(np), -1);
    for (int i = 0; i < np; ++i) {
        const NetPoint& p = pts[static_cast<size_t>(i)];
        const Segment& seg = net.segment(p.segment_id);
        if (p.offset == 0.0) {
            point_node_[static_cast<size_t>(i)] = seg.a;
        } else if (p.offset == seg.length) {
            point_node_[static_cast<size_t>(i)] = seg.b;
        } else {
            interior.emplace(std::make_pair(p.segment_id, p.offset), -1);
        }
    }
    int next_node = nv;
    for (auto& [key, node] : interior) node = next_node++;
    for (int i = 0; i < np; ++i) {
        if (point_node_[static_cast<size_t>(i)] >= 0) continue;
        const NetPoint& p = pts[static_cast<size_t>(i)];
        point_node_[static_cast<size_t>(i)] = interior.at({p.segment_id, p.offset});
    }

    node_component_.assign(static_cast<size_t>(next_node), -1);
    for (int v = 0; v < nv; ++v) node_component_[static_cast<size_t>(v)] = net.component(v);

    multiplicity_.assign(static_cast<size_t>(next_node), 0);
    for (int node : point_node_) ++multiplicity_[static_cast<size_t>(node)];

    // Split each segment at its interior insertion points.
    const int ns = net.segment_count();
    chain_offsets_.assign(static_cast<size_t>(ns) + 1, 0);
    auto it = interior.begin();
    std::vector<std::pair<double, int>> cuts;
    for (int sid = 0; sid < ns; ++sid) {
        const Segment& seg = net.segment(sid);
        cuts.clear();
        while (it != interior.end() && it->first.first == sid) {
            cuts.emplace_back(it->first.second, it->second);
            ++it;
        }
        const int comp = net.component(seg.a);
        int prev_node = seg.a;
        double prev_off = 0.0;
        auto emit = [&](int to_node, double to_off) {
            sub_edges_.push_back({prev_node, to_node, to_off - prev_off, sid});
            chain_flat_.push_back(static_cast<int>(sub_edges_.size()) - 1);
            prev_node = to_node;
            prev_off = to_off;
        };
        for (const auto& [off, node] : cuts) {
            node_component_[static_cast<size_t>(node)] = comp;
            emit(node, off);
        }
        emit(seg.b, seg.length);
        chain_offsets_[static_cast<size_t>(sid) + 1] = static_cast<int>(chain_flat_.size());
    }
    for (const auto& e : sub_edges_) max_sub_edge_length_ = std::max(max_sub_edge_length_, e.length);

    // Incidence lists over sub-edges.
    std::vector<int> degree(static_cast<size_t>(next_node), 0);
    for (const auto& e : sub_edges_) {
        ++degree[static_cast<size_t>(e.u)];
        if (e.u != e.v) ++degree[static_cast<size_t>(e.v)];
    }
    incident_offsets_.assign(static_cast<size_t>(next_node) + 1, 0);
    for (int v = 0; v < next_node; ++v)
        incident_offsets_[static_cast<size_t>(v) + 1] =
            incident_offsets_[static_cast<size_t>(v)] + degree[static_cast<size_t>(v)];
    incident_flat_.assign(static_cast<size_t>(incident_offsets_.back()), 0);
    std::vector<int> cursor(incident_offsets_.begin(), incident_offsets_.end() - 1);
    for (size_t idx = 0; idx < sub_edges_.size(); ++idx) {
        const auto& e = sub_edges_[idx];
        incident_flat_[static_cast<size_t>(cursor[static_cast<size_t>(e.u)]++)] =
            static_cast<int>(idx);
        if (e.u != e.v)
            incident_flat_[static_cast<size_t>(cursor[static_cast<size_t>(e.v)]++)] =
                static_cast<int>(idx);
    }
}

std::span<const int> AugmentedGraph::segment_chain(int segment_id) const {
    const auto lo = static_cast<size_t>(chain_offsets_[static_cast<size_t>(segment_id)]);
    const auto hi = static_cast<size_t>(chain_offsets_[static_cast<size_t>(segment_id) + 1]);
    return {chain_flat_.data() + lo, hi - lo};
}

std::span<const int> AugmentedGraph::incident(int node) const {
    const auto lo = static_cast<size_t>(incident_offsets_[static_cast<size_t>(node)]);
    const auto hi = static_cast<size_t>(incident_offsets_[static_cast<size_t>(node) + 1]);
    return {incident_flat_.data() + lo, hi - lo};
}

AugmentedGraph insert_points(const LinearNetwork& net, std::span<const NetPoint> pts) {
    return AugmentedGraph(net, pts);
}

namespace {

// Reusable single-source search state. Validity of dist entries is tracked by
// an epoch stamp, so reuse across many sources costs no re-initialisation.
struct SearchScratch {
    std::vector<double> dist;
    std::vector<std::uint32_t> node_epoch;
    std::vector<std::uint32_t> edge_epoch;
    std::vector<int> touched_edges;
    std::vector<double> neighbour_d;
    std::uint32_t epoch = 0;

    using HeapItem = std::pair<double, int>;
    std::vector<HeapItem> heap;  // min-heap via std::push_heap with greater<>

    void heap_push(double key, int node) {
        heap.emplace_back(key, node);
        std::push_heap(heap.begin(), heap.end(), std::greater<>{});
    }

    HeapItem heap_pop() {
        std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
        HeapItem top = heap.back();
        heap.pop_back();
        return top;
    }

    void attach(const AugmentedGraph& g) {
        dist.assign(static_cast<size_t>(g.node_count()), kInf);
        node_epoch.assign(static_cast<size_t>(g.node_count()), 0);
        edge_epoch.assign(static_cast<size_t>(g.sub_edge_count()), 0);
        epoch = 0;
    }

    double d(int node) const {
        return node_epoch[static_cast<size_t>(node)] == epoch ? dist[static_cast<size_t>(node)]
                                                              : kInf;
    }

    void set_d(int node, double value) {
        node_epoch[static_cast<size_t>(node)] = epoch;
        dist[static_cast<size_t>(node)] = value;
    }

    // Truncated search from source. Settles every node whose distance is at
    // most the final cutoff. The cutoff starts at initial_cutoff; once
    // need_neighbours entries have been collected (point multiplicities,
    // source's own point excluded) it tightens to the distance at which the
    // count was reached. Pass need_neighbours <= 0 to disable tightening.
    // Records each settled distance batch in neighbour_d (one entry per
    // pattern point encountered) and stamps every incident sub-edge of every
    // settled node into touched_edges.
    void run(const AugmentedGraph& g, int source, int need_neighbours,
             double initial_cutoff = kInf) {
        ++epoch;
        if (epoch == 0) {  // wrapped, wipe stale stamps
            std::fill(node_epoch.begin(), node_epoch.end(), 0u);
            std::fill(edge_epoch.begin(), edge_epoch.end(), 0u);
            epoch = 1;
        }
        touched_edges.clear();
        neighbour_d.clear();
        heap.clear();
        double cutoff = initial_cutoff;
        int still_needed = need_neighbours;
        set_d(source, 0.0);
        heap_push(0.0, source);
        while (!heap.empty()) {
            const auto [key, u] = heap_pop();
            if (key > cutoff) break;
            if (key > d(u)) continue;  // stale entry
            int mult = g.point_multiplicity(u);
            if (u == source) --mult;
            if (still_needed > 0 && mult > 0) {
                for (int c = 0; c < mult; ++c) neighbour_d.push_back(key);
                still_needed -= mult;
                if (still_needed <= 0) cutoff = key;
            }
            for (int eid : g.incident(u)) {
                if (edge_epoch[static_cast<size_t>(eid)] != epoch) {
                    edge_epoch[static_cast<size_t>(eid)] = epoch;
                    touched_edges.push_back(eid);
                }
                const auto& e = g.sub_edges()[static_cast<size_t>(eid)];
                const int w = e.u == u ? e.v : e.u;
                const double nd = key + e.length;
                if (nd < d(w)) {
                    set_d(w, nd);
                    heap_push(nd, w);
                }
            }
        }
    }

    // Covered length of the closed radius-r disc, summed over touched
    // sub-edges. Untouched edges have both ends beyond the search cutoff and
    // contribute nothing as long as r does not exceed the cutoff.
    double coverage(const AugmentedGraph& g, double r) const {
        double total = 0.0;
        for (int eid : touched_edges) {
            const auto& e = g.sub_edges()[static_cast<size_t>(eid)];
            const double da = d(e.u);
            const double db = d(e.v);
            double covered = 0.0;
            if (da < r) covered += r - da;
            if (db < r) covered += r - db;
            total += std::min(e.length, covered);
        }
        return total;
    }
};

}  // namespace

std::vector<double> distances_from(const AugmentedGraph& g, int source_node) {
    if (source_node < 0 || source_node >= g.node_count())
        throw ValidationError("source node out of range");
    SearchScratch s;
    s.attach(g);
    s.run(g, source_node, -1);
    std::vector<double> out(static_cast<size_t>(g.node_count()));
    for (int v = 0; v < g.node_count(); ++v) out[static_cast<size_t>(v)] = s.d(v);
    return out;
}

double knn_distance(const AugmentedGraph& g, int point_index, int k) {
    if (point_index < 0 || point_index >= g.point_count())
        throw ValidationError("point index out of range");
    if (k < 1) throw ValidationError("k must be >= 1");
    SearchScratch s;
    s.attach(g);
    s.run(g, g.point_node(point_index), k);
    if (static_cast<int>(s.neighbour_d.size()) < k) return kInf;
    return s.neighbour_d[static_cast<size_t>(k) - 1];
}

double disc_volume(const AugmentedGraph& g, int node, double r) {
    if (node < 0 || node >= g.node_count()) throw ValidationError("node out of range");
    if (!(r >= 0.0)) throw ValidationError("disc radius must be >= 0");
    SearchScratch s;
    s.attach(g);
    s.run(g, node, 0, r);
    return s.coverage(g, r);
}

KnnProfile knn_profile(const AugmentedGraph& g, std::span<const int> ks, int threads) {
    if (ks.empty()) throw ValidationError("at least one k value required");
    int k_max = 0;
    for (int k : ks) {
        if (k < 1) throw ValidationError("k must be >= 1");
        k_max = std::max(k_max, k);
    }
    const int np = g.point_count();
    KnnProfile out;
    out.ks.assign(ks.begin(), ks.end());
    out.d.setConstant(np, static_cast<Eigen::Index>(ks.size()), kInf);
    out.s.setConstant(np, static_cast<Eigen::Index>(ks.size()),
                      std::numeric_limits<double>::quiet_NaN());

    threads = resolve_threads(threads);
    std::vector<SearchScratch> scratch(static_cast<size_t>(threads));
    for (auto& s : scratch) s.attach(g);

    parallel_for(np, threads, [&](std::int64_t i, int worker) {
        SearchScratch& s = scratch[static_cast<size_t>(worker)];
        s.run(g, g.point_node(static_cast<int>(i)), k_max);
        for (size_t j = 0; j < ks.size(); ++j) {
            const int k = ks[j];
            if (static_cast<int>(s.neighbour_d.size()) < k) continue;
            const double dk = s.neighbour_d[static_cast<size_t>(k) - 1];
            out.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dk;
            out.s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.coverage(g, dk);
        }
    });
    return out;
}

KnnProfile knn_profile(const LinearNetwork& net, std::span<const NetPoint> pts,
                       std::span<const int> ks, int threads) {
    AugmentedGraph g(net, pts);
    return knn_profile(g, ks, threads);
}

std::vector<VolumeSample> knn_volumes(const AugmentedGraph& g, int k, int threads) {
    const int ks[1] = {k};
    KnnProfile prof = knn_profile(g, ks, threads);
    std::vector<VolumeSample> out(static_cast<size_t>(g.point_count()));
    for (int i = 0; i < g.point_count(); ++i)
        out[static_cast<size_t>(i)] = {i, k, prof.d(i, 0), prof.s(i, 0)};
    return out;
}

std::vector<VolumeSample> knn_volumes(const LinearNetwork& net, std::span<const NetPoint> pts,
                                      int k, int threads) {
    AugmentedGraph g(net, pts);
    return knn_volumes(g, k, threads);
}

double circumradius(const LinearNetwork& net) {
    // Candidate centers: every vertex plus every segment midpoint. The true
    // optimum can sit anywhere in a segment interior, so this is an upper
    // bound, off by at most half the longest segment.
    std::vector<NetPoint> mids;
    mids.reserve(static_cast<size_t>(net.segment_count()));
    for (const auto& seg : net.segments()) mids.push_back({seg.id, seg.length / 2.0});
    AugmentedGraph g(net, mids);

    std::vector<double> best(static_cast<size_t>(net.component_count()), kInf);
    SearchScratch s;
    s.attach(g);
    for (int u = 0; u < g.node_count(); ++u) {
        const int comp = g.node_component(u);
        s.run(g, u, -1);
        // Farthest network point from u: on a sub-edge with end distances
        // d_a, d_b the maximum of min(d_a + t, d_b + len - t) over the edge
        // is (d_a + d_b + len) / 2.
        double ecc = 0.0;
        for (const auto& e : g.sub_edges()) {
            if (g.node_component(e.u) != comp) continue;
            const double da = s.d(e.u);
            const double db = s.d(e.v);
            ecc = std::max(ecc, (da + db + e.length) / 2.0);
        }
        best[static_cast<size_t>(comp)] = std::min(best[static_cast<size_t>(comp)], ecc);
    }
    double out = kInf;
    for (double b : best) out = std::min(out, b);
    return out;
}

}  // namespace netclutter
