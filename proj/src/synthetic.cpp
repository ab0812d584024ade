#include "netclutter/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace netclutter {

namespace {

// Connected segment region grown breadth-first from a seed segment until the
// cumulative length reaches target. Neighbour order is by segment id, so the
// result is deterministic and growing the target only ever extends the set.
std::vector<int> grow_region(const LinearNetwork& net, int seed_segment, double target) {
    std::vector<bool> seen(static_cast<size_t>(net.segment_count()), false);
    std::vector<int> out;
    std::deque<int> queue{seed_segment};
    seen[static_cast<size_t>(seed_segment)] = true;
    double sum = 0.0;
    while (!queue.empty() && sum < target) {
        const int sid = queue.front();
        queue.pop_front();
        out.push_back(sid);
        sum += net.segment(sid).length;
        const Segment& s = net.segment(sid);
        std::vector<int> next;
        for (int v : {s.a, s.b})
            for (int nb : net.incident(v))
                if (!seen[static_cast<size_t>(nb)]) {
                    seen[static_cast<size_t>(nb)] = true;
                    next.push_back(nb);
                }
        std::sort(next.begin(), next.end());
        for (int nb : next) queue.push_back(nb);
    }
    return out;
}

int central_segment(const LinearNetwork& net) {
    double lox = net.vertex(0).x, hix = lox, loy = net.vertex(0).y, hiy = loy;
    for (const auto& v : net.vertices()) {
        lox = std::min(lox, v.x);
        hix = std::max(hix, v.x);
        loy = std::min(loy, v.y);
        hiy = std::max(hiy, v.y);
    }
    const double cx = (lox + hix) / 2.0, cy = (loy + hiy) / 2.0;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& s : net.segments()) {
        const Vertex& a = net.vertex(s.a);
        const Vertex& b = net.vertex(s.b);
        const double d = std::hypot((a.x + b.x) / 2.0 - cx, (a.y + b.y) / 2.0 - cy);
        if (d < best_d) {
            best_d = d;
            best = s.id;
        }
    }
    return best;
}

}  // namespace

LinearNetwork make_grid(int rows, int cols, double edge_length) {
    if (rows < 2 || cols < 2) throw ValidationError("grid needs at least 2x2 vertices");
    if (!(edge_length > 0.0)) throw ValidationError("edge_length must be positive");
    std::vector<Vertex> vertices;
    vertices.reserve(static_cast<size_t>(rows) * static_cast<size_t>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            vertices.push_back({r * cols + c, c * edge_length, r * edge_length});
    std::vector<Segment> segments;
    auto vid = [cols](int r, int c) { return r * cols + c; };
    int id = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c + 1 < cols; ++c)
            segments.push_back({id++, vid(r, c), vid(r, c + 1), edge_length});
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r + 1 < rows; ++r)
            segments.push_back({id++, vid(r, c), vid(r + 1, c), edge_length});
    return LinearNetwork::from_parts(std::move(vertices), std::move(segments), "unit");
}

LinearNetwork make_chain(int n_segments, double total_length) {
    if (n_segments < 1) throw ValidationError("chain needs at least one segment");
    if (!(total_length > 0.0)) throw ValidationError("total_length must be positive");
    const double step = total_length / n_segments;
    std::vector<Vertex> vertices;
    for (int i = 0; i <= n_segments; ++i) vertices.push_back({i, i * step, 0.0});
    std::vector<Segment> segments;
    for (int i = 0; i < n_segments; ++i) segments.push_back({i, i, i + 1, step});
    return LinearNetwork::from_parts(std::move(vertices), std::move(segments), "unit");
}

RegionedNetwork make_grid_loops(double total_length, int rows, int cols, double feature_length,
                                double nested_length) {
    const int edges = rows * (cols - 1) + cols * (rows - 1);
    const double edge_length = total_length / edges;
    RegionedNetwork out{make_grid(rows, cols, edge_length), {}, {}};
    const int seed = central_segment(out.net);
    out.feature_ids = grow_region(out.net, seed, feature_length);
    out.nested_ids = grow_region(out.net, seed, nested_length);
    return out;
}

RegionedNetwork make_branching_tree(int depth, double total_length, double feature_length) {
    if (depth < 1) throw ValidationError("tree depth must be >= 1");
    if (depth > 12) throw ValidationError("tree depth above 12 is unreasonably large");
    std::vector<Vertex> vertices;
    std::vector<Segment> segments;
    vertices.push_back({0, 0.0, 0.0});

    struct Tip {
        int vertex;
        double x, y, angle, length;
        int level;
    };
    // Unit trunk going up, children rotated +-25 degrees and shrunk.
    constexpr double kSpread = 25.0 * std::numbers::pi / 180.0;
    constexpr double kDecay = 0.72;
    std::deque<Tip> tips{{0, 0.0, 0.0, std::numbers::pi / 2.0, 1.0, 0}};
    double raw_total = 0.0;
    int first_branch_root = -1;  // tip vertex of the trunk's left child
    while (!tips.empty()) {
        const Tip t = tips.front();
        tips.pop_front();
        const double nx = t.x + t.length * std::cos(t.angle);
        const double ny = t.y + t.length * std::sin(t.angle);
        const int nv = static_cast<int>(vertices.size());
        vertices.push_back({nv, nx, ny});
        segments.push_back({static_cast<int>(segments.size()), t.vertex, nv,
                            std::hypot(nx - t.x, ny - t.y)});
        raw_total += segments.back().length;
        if (t.level == 1 && first_branch_root < 0) first_branch_root = nv;
        if (t.level < depth) {
            tips.push_back({nv, nx, ny, t.angle + kSpread, t.length * kDecay, t.level + 1});
            tips.push_back({nv, nx, ny, t.angle - kSpread, t.length * kDecay, t.level + 1});
        }
    }
    const double scale = total_length / raw_total;
    for (auto& v : vertices) {
        v.x *= scale;
        v.y *= scale;
    }
    for (auto& s : segments) s.length *= scale;
    RegionedNetwork out;
    out.net = LinearNetwork::from_parts(std::move(vertices), std::move(segments), "unit");
    // Feature region: grow down the first level-1 branch.
    int seed = 0;
    for (const auto& s : out.net.segments())
        if (s.b == first_branch_root || s.a == first_branch_root) {
            seed = s.id;
            break;
        }
    out.feature_ids = grow_region(out.net, seed, feature_length);
    return out;
}

RegionedNetwork make_two_road_grid(double total_length, int rows, int cols, double road1_length,
                                   double road2_length) {
    const int edges = rows * (cols - 1) + cols * (rows - 1);
    const double edge_length = total_length / edges;
    RegionedNetwork out{make_grid(rows, cols, edge_length), {}, {}};
    // Horizontal edge ids were laid out row-major first, so the edges of row
    // r start at r * (cols - 1).
    auto take_row = [&](int row, double target) {
        std::vector<int> ids;
        double sum = 0.0;
        for (int c = 0; c + 1 < cols && sum < target; ++c) {
            const int id = row * (cols - 1) + c;
            ids.push_back(id);
            sum += out.net.segment(id).length;
        }
        return ids;
    };
    const int row1 = rows / 4;
    const int row2 = (3 * rows) / 4;
    out.feature_ids = take_row(row1, road1_length);
    out.nested_ids = take_row(row2, road2_length);
    return out;
}

}  // namespace netclutter
