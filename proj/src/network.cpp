#include "netclutter/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

namespace netclutter {

namespace {

struct CellKey {
    long long cx, cy;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    size_t operator()(const CellKey& k) const noexcept {
        auto h = static_cast<unsigned long long>(k.cx) * 0x9e3779b97f4a7c15ull;
        h ^= static_cast<unsigned long long>(k.cy) + 0x517cc1b727220a95ull + (h << 6) + (h >> 2);
        return static_cast<size_t>(h);
    }
};

// Greedy endpoint snapper: a query point adopts the first existing vertex
// within tol, so surviving vertices are pairwise farther than tol apart.
class VertexSnapper {
public:
    explicit VertexSnapper(double tol) : tol_(tol), cell_(tol > 0 ? tol : 1.0) {}

    int lookup_or_insert(double x, double y, std::vector<Vertex>& vertices) {
        if (tol_ <= 0.0) {
            const auto key = exact_key(x, y);
            auto it = exact_.find(key);
            if (it != exact_.end()) return it->second;
            const int id = static_cast<int>(vertices.size());
            vertices.push_back({id, x, y});
            exact_.emplace(key, id);
            return id;
        }
        const long long cx = static_cast<long long>(std::floor(x / cell_));
        const long long cy = static_cast<long long>(std::floor(y / cell_));
        for (long long dx = -1; dx <= 1; ++dx) {
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = grid_.find(CellKey{cx + dx, cy + dy});
                if (it == grid_.end()) continue;
                for (int id : it->second) {
                    const Vertex& v = vertices[static_cast<size_t>(id)];
                    if (std::hypot(v.x - x, v.y - y) <= tol_) return id;
                }
            }
        }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back({id, x, y});
        grid_[CellKey{cx, cy}].push_back(id);
        return id;
    }

private:
    static std::string exact_key(double x, double y) {
        std::string k(sizeof(double) * 2, '\0');
        std::memcpy(k.data(), &x, sizeof(double));
        std::memcpy(k.data() + sizeof(double), &y, sizeof(double));
        return k;
    }

    double tol_;
    double cell_;
    std::unordered_map<CellKey, std::vector<int>, CellHash> grid_;
    std::unordered_map<std::string, int> exact_;
};

void require_finite(const RawSegment& s) {
    if (!std::isfinite(s.x1) || !std::isfinite(s.y1) || !std::isfinite(s.x2) ||
        !std::isfinite(s.y2)) {
        throw ValidationError("segment has a non-finite coordinate");
    }
}

}  // namespace

double default_merge_tol(std::span<const RawSegment> raw) {
    double lox = std::numeric_limits<double>::infinity(), loy = lox;
    double hix = -lox, hiy = -lox;
    for (const auto& s : raw) {
        require_finite(s);
        lox = std::min({lox, s.x1, s.x2});
        loy = std::min({loy, s.y1, s.y2});
        hix = std::max({hix, s.x1, s.x2});
        hiy = std::max({hiy, s.y1, s.y2});
    }
    if (raw.empty()) return 0.0;
    return 1e-6 * std::hypot(hix - lox, hiy - loy);
}

LinearNetwork build_network(std::span<const RawSegment> raw, double merge_tol,
                            std::string unit) {
    if (raw.empty()) throw ValidationError("cannot build a network from zero segments");
    if (!(merge_tol >= 0.0)) throw ValidationError("merge_tol must be >= 0");

    LinearNetwork net;
    net.unit_ = std::move(unit);
    VertexSnapper snap(merge_tol);
    for (const auto& s : raw) {
        require_finite(s);
        const int a = snap.lookup_or_insert(s.x1, s.y1, net.vertices_);
        const int b = snap.lookup_or_insert(s.x2, s.y2, net.vertices_);
        if (a == b) {
            ++net.dropped_zero_length_;
            continue;
        }
        const Vertex& va = net.vertices_[static_cast<size_t>(a)];
        const Vertex& vb = net.vertices_[static_cast<size_t>(b)];
        const double len = std::hypot(vb.x - va.x, vb.y - va.y);
        const int id = static_cast<int>(net.segments_.size());
        net.segments_.push_back({id, a, b, len});
    }
    if (net.segments_.empty())
        throw ValidationError("all segments degenerate after endpoint snapping");
    net.finalize();
    return net;
}

LinearNetwork build_network(std::span<const RawSegment> raw, std::string unit) {
    return build_network(raw, default_merge_tol(raw), std::move(unit));
}

LinearNetwork LinearNetwork::from_parts(std::vector<Vertex> vertices,
                                        std::vector<Segment> segments,
                                        std::string unit,
                                        std::optional<double> check_tol) {
    LinearNetwork net;
    net.unit_ = std::move(unit);
    net.vertices_ = std::move(vertices);
    net.segments_ = std::move(segments);
    const int nv = net.vertex_count();
    for (int i = 0; i < nv; ++i) {
        const Vertex& v = net.vertices_[static_cast<size_t>(i)];
        if (v.id != i) throw ValidationError("vertex ids must be dense from 0");
        if (!std::isfinite(v.x) || !std::isfinite(v.y))
            throw ValidationError("vertex has a non-finite coordinate");
    }
    double tol = 0.0;
    if (check_tol) {
        tol = *check_tol;
    } else {
        double lox = 0, loy = 0, hix = 0, hiy = 0;
        bool first = true;
        for (const auto& v : net.vertices_) {
            if (first) { lox = hix = v.x; loy = hiy = v.y; first = false; continue; }
            lox = std::min(lox, v.x); hix = std::max(hix, v.x);
            loy = std::min(loy, v.y); hiy = std::max(hiy, v.y);
        }
        tol = 1e-6 * std::hypot(hix - lox, hiy - loy);
    }
    for (size_t i = 0; i < net.segments_.size(); ++i) {
        const Segment& s = net.segments_[i];
        if (s.id != static_cast<int>(i)) throw ValidationError("segment ids must be dense from 0");
        if (s.a < 0 || s.a >= nv || s.b < 0 || s.b >= nv)
            throw ValidationError("segment references an unknown vertex");
        if (!(s.length > 0.0) || !std::isfinite(s.length))
            throw ValidationError("segment length must be positive and finite");
        if (s.a == s.b) continue;  // self-loop, checked below in finalize
        const Vertex& va = net.vertices_[static_cast<size_t>(s.a)];
        const Vertex& vb = net.vertices_[static_cast<size_t>(s.b)];
        const double d = std::hypot(vb.x - va.x, vb.y - va.y);
        if (std::abs(d - s.length) > tol + 1e-9 * std::max(1.0, s.length))
            throw ValidationError("segment length disagrees with endpoint coordinates");
    }
    net.finalize();
    return net;
}

void LinearNetwork::finalize() {
    const int nv = vertex_count();
    std::vector<int> degree(static_cast<size_t>(nv), 0);
    self_loop_count_ = 0;
    total_length_ = 0.0;
    for (const auto& s : segments_) {
        total_length_ += s.length;
        if (s.a == s.b) {
            ++self_loop_count_;
            ++degree[static_cast<size_t>(s.a)];
        } else {
            ++degree[static_cast<size_t>(s.a)];
            ++degree[static_cast<size_t>(s.b)];
        }
    }
    incident_offsets_.assign(static_cast<size_t>(nv) + 1, 0);
    for (int v = 0; v < nv; ++v)
        incident_offsets_[static_cast<size_t>(v) + 1] =
            incident_offsets_[static_cast<size_t>(v)] + degree[static_cast<size_t>(v)];
    incident_flat_.assign(static_cast<size_t>(incident_offsets_.back()), 0);
    std::vector<int> cursor(incident_offsets_.begin(), incident_offsets_.end() - 1);
    for (const auto& s : segments_) {
        incident_flat_[static_cast<size_t>(cursor[static_cast<size_t>(s.a)]++)] = s.id;
        if (s.a != s.b)
            incident_flat_[static_cast<size_t>(cursor[static_cast<size_t>(s.b)]++)] = s.id;
    }

    // Component labels by BFS over vertices in id order.
    component_.assign(static_cast<size_t>(nv), -1);
    component_count_ = 0;
    std::vector<int> queue;
    for (int start = 0; start < nv; ++start) {
        if (component_[static_cast<size_t>(start)] >= 0) continue;
        const int c = component_count_++;
        queue.assign(1, start);
        component_[static_cast<size_t>(start)] = c;
        while (!queue.empty()) {
            const int v = queue.back();
            queue.pop_back();
            for (int sid : incident(v)) {
                const Segment& s = segments_[static_cast<size_t>(sid)];
                const int w = s.a == v ? s.b : s.a;
                if (component_[static_cast<size_t>(w)] < 0) {
                    component_[static_cast<size_t>(w)] = c;
                    queue.push_back(w);
                }
            }
        }
    }
    component_length_.assign(static_cast<size_t>(component_count_), 0.0);
    for (const auto& s : segments_)
        component_length_[static_cast<size_t>(component_[static_cast<size_t>(s.a)])] += s.length;
}

std::span<const int> LinearNetwork::incident(int vertex_id) const {
    const auto lo = static_cast<size_t>(incident_offsets_[static_cast<size_t>(vertex_id)]);
    const auto hi = static_cast<size_t>(incident_offsets_[static_cast<size_t>(vertex_id) + 1]);
    return {incident_flat_.data() + lo, hi - lo};
}

double LinearNetwork::component_length(int component_id) const {
    return component_length_[static_cast<size_t>(component_id)];
}

Vertex LinearNetwork::locate(const NetPoint& p) const {
    validate_point(p);
    const Segment& s = segment(p.segment_id);
    const Vertex& va = vertex(s.a);
    const Vertex& vb = vertex(s.b);
    const double t = s.length > 0 ? p.offset / s.length : 0.0;
    return {-1, va.x + t * (vb.x - va.x), va.y + t * (vb.y - va.y)};
}

void LinearNetwork::validate_point(const NetPoint& p) const {
    if (p.segment_id < 0 || p.segment_id >= segment_count())
        throw ValidationError("point references unknown segment " + std::to_string(p.segment_id));
    const double len = segment(p.segment_id).length;
    if (!(p.offset >= 0.0) || !(p.offset <= len))
        throw ValidationError("point offset outside [0, segment length]");
}

SubNetwork::SubNetwork(const LinearNetwork& parent, std::vector<int> segment_ids,
                       bool allow_empty)
    : parent_(&parent), segment_ids_(std::move(segment_ids)) {
    std::sort(segment_ids_.begin(), segment_ids_.end());
    segment_ids_.erase(std::unique(segment_ids_.begin(), segment_ids_.end()),
                       segment_ids_.end());
    if (segment_ids_.empty() && !allow_empty)
        throw ValidationError("empty sub-network (pass allow_empty to permit)");
    for (int id : segment_ids_) {
        if (id < 0 || id >= parent.segment_count())
            throw ValidationError("sub-network references unknown segment " + std::to_string(id));
        total_length_ += parent.segment(id).length;
    }
}

bool SubNetwork::contains(int segment_id) const {
    return std::binary_search(segment_ids_.begin(), segment_ids_.end(), segment_id);
}

double total_length(const LinearNetwork& net) { return net.total_length(); }
double total_length(const SubNetwork& sub) { return sub.total_length(); }

SubNetwork extract_subnetwork(const LinearNetwork& net, std::vector<int> segment_ids,
                              bool allow_empty) {
    return SubNetwork(net, std::move(segment_ids), allow_empty);
}

InducedNetwork induce_network(const LinearNetwork& net, std::span<const int> segment_ids) {
    InducedNetwork out;
    std::vector<int> ids(segment_ids.begin(), segment_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) throw ValidationError("cannot induce a network from zero segments");

    std::vector<int> vmap(static_cast<size_t>(net.vertex_count()), -1);
    std::vector<Vertex> vertices;
    std::vector<Segment> segments;
    auto map_vertex = [&](int old_id) {
        int& m = vmap[static_cast<size_t>(old_id)];
        if (m < 0) {
            m = static_cast<int>(vertices.size());
            Vertex v = net.vertex(old_id);
            out.vertex_parent_id.push_back(v.id);
            v.id = m;
            vertices.push_back(v);
        }
        return m;
    };
    for (int sid : ids) {
        if (sid < 0 || sid >= net.segment_count())
            throw ValidationError("unknown segment id " + std::to_string(sid));
        Segment s = net.segment(sid);
        const int new_id = static_cast<int>(segments.size());
        out.segment_parent_id.push_back(s.id);
        out.segment_induced_id.emplace(s.id, new_id);
        s.id = new_id;
        s.a = map_vertex(s.a);
        s.b = map_vertex(s.b);
        segments.push_back(s);
    }
    // Lengths are copied verbatim, so skip the coordinate re-check.
    out.net = LinearNetwork::from_parts(std::move(vertices), std::move(segments), net.unit(),
                                        std::numeric_limits<double>::infinity());
    return out;
}

}  // namespace netclutter
