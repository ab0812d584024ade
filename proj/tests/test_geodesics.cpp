#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "netclutter/geodesics.hpp"
#include "netclutter/mixture.hpp"
#include "netclutter/rng.hpp"
#include "netclutter/simulate.hpp"
#include "netclutter/synthetic.hpp"
#include "oracles.hpp"

using namespace netclutter;

namespace {

LinearNetwork one_segment(double len) {
    return build_network(std::vector<RawSegment>{{0, 0, len, 0}}, 1e-9, "unit");
}

LinearNetwork y_network() {
    // three length-5 arms meeting at a hub
    return build_network(std::vector<RawSegment>{{0, 0, 5, 0}, {0, 0, -5, 0}, {0, 0, 0, 5}},
                         1e-9, "unit");
}

}  // namespace

TEST_CASE("an interior point splits its segment into a two-edge chain") {
    const auto net = one_segment(10.0);
    const std::vector<NetPoint> pts = {{0, 4.0}};
    const AugmentedGraph g(net, pts);
    CHECK(g.sub_edge_count() == 2);
    const auto chain = g.segment_chain(0);
    REQUIRE(chain.size() == 2);
    CHECK(g.sub_edges()[static_cast<size_t>(chain[0])].length == doctest::Approx(4.0));
    CHECK(g.sub_edges()[static_cast<size_t>(chain[1])].length == doctest::Approx(6.0));
    CHECK(g.point_node(0) >= net.vertex_count());
}

TEST_CASE("co-located points share one node but keep their indices") {
    const auto net = one_segment(10.0);
    const std::vector<NetPoint> pts = {{0, 4.0}, {0, 4.0}, {0, 7.0}};
    const AugmentedGraph g(net, pts);
    CHECK(g.point_node(0) == g.point_node(1));
    CHECK(g.point_node(0) != g.point_node(2));
    CHECK(g.point_multiplicity(g.point_node(0)) == 2);
    CHECK(g.sub_edge_count() == 3);
}

TEST_CASE("points at a segment end reuse the endpoint vertex") {
    const auto net = one_segment(10.0);
    const std::vector<NetPoint> pts = {{0, 0.0}, {0, 10.0}};
    const AugmentedGraph g(net, pts);
    CHECK(g.point_node(0) == net.segment(0).a);
    CHECK(g.point_node(1) == net.segment(0).b);
    CHECK(g.sub_edge_count() == 1);
    CHECK(g.node_count() == net.vertex_count());
}

TEST_CASE("splitting conserves the total measure") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 30; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng);
        const AugmentedGraph g(net, pts);
        double sum = 0.0;
        for (const auto& e : g.sub_edges()) sum += e.length;
        CHECK(sum == doctest::Approx(net.total_length()).epsilon(1e-12));
        for (int sid = 0; sid < net.segment_count(); ++sid) {
            double chain_sum = 0.0;
            for (int eid : g.segment_chain(sid))
                chain_sum += g.sub_edges()[static_cast<size_t>(eid)].length;
            CHECK(chain_sum == doctest::Approx(net.segment(sid).length).epsilon(1e-12));
        }
    }
}

TEST_CASE("distances along a simple chain add up") {
    const auto net =
        build_network(std::vector<RawSegment>{{0, 0, 3, 0}, {3, 0, 7, 0}}, 1e-9, "unit");
    const std::vector<NetPoint> pts = {{0, 0.0}, {1, 4.0}};
    const AugmentedGraph g(net, pts);
    const auto d = distances_from(g, g.point_node(0));
    CHECK(d[static_cast<size_t>(g.point_node(0))] == 0.0);
    CHECK(d[static_cast<size_t>(g.point_node(1))] == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("search distances agree with a dense all-pairs oracle") {
    std::mt19937_64 rng(102);
    for (int rep = 0; rep < 40; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng);
        const AugmentedGraph g(net, pts);
        const auto fw = testutil::floyd_warshall(g);
        for (int i = 0; i < g.point_count(); ++i) {
            const auto d = distances_from(g, g.point_node(i));
            for (int v = 0; v < g.node_count(); ++v) {
                const double expect = fw[static_cast<size_t>(g.point_node(i))][static_cast<size_t>(v)];
                if (std::isinf(expect))
                    CHECK(std::isinf(d[static_cast<size_t>(v)]));
                else
                    CHECK(std::abs(d[static_cast<size_t>(v)] - expect) <= 1e-9);
            }
        }
    }
}

TEST_CASE("insertion does not bend point-to-point distances") {
    // compare against a formula using only base-vertex distances
    std::mt19937_64 rng(103);
    for (int rep = 0; rep < 40; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng);
        const AugmentedGraph g(net, pts);
        const auto base = testutil::base_all_pairs(net);
        for (int i = 0; i < g.point_count(); ++i) {
            const auto d = distances_from(g, g.point_node(i));
            for (int j = 0; j < g.point_count(); ++j) {
                const double expect = testutil::oracle_point_distance(
                    net, base, pts[static_cast<size_t>(i)], pts[static_cast<size_t>(j)]);
                const double got = d[static_cast<size_t>(g.point_node(j))];
                if (std::isinf(expect))
                    CHECK(std::isinf(got));
                else
                    CHECK(std::abs(got - expect) <= 1e-9);
            }
        }
    }
}

TEST_CASE("distances are symmetric and satisfy the triangle inequality") {
    std::mt19937_64 rng(104);
    for (int rep = 0; rep < 15; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng, 10);
        const AugmentedGraph g(net, pts);
        const int n = g.point_count();
        std::vector<std::vector<double>> d(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto row = distances_from(g, g.point_node(i));
            d[static_cast<size_t>(i)].resize(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j)
                d[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    row[static_cast<size_t>(g.point_node(j))];
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double dij = d[static_cast<size_t>(i)][static_cast<size_t>(j)];
                const double dji = d[static_cast<size_t>(j)][static_cast<size_t>(i)];
                if (std::isinf(dij))
                    CHECK(std::isinf(dji));
                else
                    CHECK(std::abs(dij - dji) <= 1e-9);
                for (int k = 0; k < n; ++k) {
                    const double via =
                        d[static_cast<size_t>(i)][static_cast<size_t>(k)] +
                        d[static_cast<size_t>(k)][static_cast<size_t>(j)];
                    if (!std::isinf(via)) CHECK(dij <= via + 1e-9);
                }
            }
    }
}

TEST_CASE("self-loop segments carry correct distances") {
    // a stick of length 6 ending in a loop of length 9
    std::vector<Vertex> vs = {{0, 0.0, 0.0}, {1, 6.0, 0.0}};
    std::vector<Segment> ss = {{0, 0, 1, 6.0}, {1, 1, 1, 9.0}};
    const auto net = LinearNetwork::from_parts(vs, ss, "unit");
    const std::vector<NetPoint> pts = {{0, 0.0}, {1, 2.0}, {1, 7.0}};
    const AugmentedGraph g(net, pts);
    const auto base = testutil::base_all_pairs(net);
    const auto d0 = distances_from(g, g.point_node(0));
    // around the loop: 2 one way, 7 the other
    CHECK(d0[static_cast<size_t>(g.point_node(1))] == doctest::Approx(8.0));
    CHECK(d0[static_cast<size_t>(g.point_node(2))] == doctest::Approx(8.0));
    const auto d1 = distances_from(g, g.point_node(1));
    CHECK(d1[static_cast<size_t>(g.point_node(2))] == doctest::Approx(4.0));
    CHECK(testutil::oracle_point_distance(net, base, pts[1], pts[2]) == doctest::Approx(4.0));
}

TEST_CASE("k-th neighbour distances on tiny examples") {
    const auto net = one_segment(10.0);
    {
        const std::vector<NetPoint> pts = {{0, 2.0}, {0, 9.0}};
        const AugmentedGraph g(net, pts);
        CHECK(knn_distance(g, 0, 1) == doctest::Approx(7.0));
        CHECK(std::isinf(knn_distance(g, 0, 2)));
    }
    {
        const std::vector<NetPoint> pts = {{0, 5.0}, {0, 5.0}, {0, 5.0}};
        const AugmentedGraph g(net, pts);
        CHECK(knn_distance(g, 0, 2) == 0.0);
    }
}

TEST_CASE("k-th neighbour distances match a brute-force sort") {
    std::mt19937_64 rng(105);
    for (int rep = 0; rep < 40; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng);
        const AugmentedGraph g(net, pts);
        const auto base = testutil::base_all_pairs(net);
        const int n = g.point_count();
        for (int i = 0; i < n; ++i) {
            std::vector<double> others;
            for (int j = 0; j < n; ++j)
                if (j != i)
                    others.push_back(testutil::oracle_point_distance(
                        net, base, pts[static_cast<size_t>(i)], pts[static_cast<size_t>(j)]));
            std::sort(others.begin(), others.end());
            double prev = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double got = knn_distance(g, i, k);
                if (k > static_cast<int>(others.size()) ||
                    std::isinf(others[static_cast<size_t>(k - 1)])) {
                    CHECK(std::isinf(got));
                    continue;
                }
                CHECK(std::abs(got - others[static_cast<size_t>(k - 1)]) <= 1e-9);
                CHECK(got >= prev - 1e-12);  // nondecreasing in k
                prev = got;
            }
        }
    }
}

TEST_CASE("disc measure on one segment follows the interval formula exactly") {
    const auto net = one_segment(10.0);
    {
        const std::vector<NetPoint> pts = {{0, 5.0}};
        const AugmentedGraph g(net, pts);
        CHECK(disc_volume(g, g.point_node(0), 3.0) == 6.0);
        CHECK(disc_volume(g, g.point_node(0), 0.0) == 0.0);
        CHECK_THROWS_AS(disc_volume(g, g.point_node(0), -1.0), ValidationError);
    }
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> off(0.01, 9.99), rad(0.0, 12.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double o = off(rng);
        const double r = rad(rng);
        const std::vector<NetPoint> pts = {{0, o}};
        const AugmentedGraph g(net, pts);
        const double expect = std::min(o, r) + std::min(10.0 - o, r);
        CHECK(disc_volume(g, g.point_node(0), r) == expect);
    }
}

TEST_CASE("disc measure spreads into every arm of a junction") {
    const auto net = y_network();
    // one unit from the hub, radius 2: own arm covers 2 toward the leaf and 1
    // back to the hub, then 1 into each of the other two arms
    const std::vector<NetPoint> pts = {{0, 1.0}};
    const AugmentedGraph g(net, pts);
    CHECK(disc_volume(g, g.point_node(0), 2.0) == doctest::Approx(5.0).epsilon(1e-12));
    const auto base = testutil::base_all_pairs(net);
    const double oracle = testutil::disc_oracle_from_point(net, base, pts[0], 2.0, 1e-3);
    CHECK(std::abs(disc_volume(g, g.point_node(0), 2.0) - oracle) <= 2e-3);
}

TEST_CASE("disc measure agrees with a discretization oracle on random instances") {
    std::mt19937_64 rng(107);
    int queries = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng, 8);
        const AugmentedGraph g(net, pts);
        const auto base = testutil::base_all_pairs(net);
        for (int i = 0; i < std::min(3, g.point_count()); ++i) {
            const auto d = distances_from(g, g.point_node(i));
            double dmax = 0.0;
            for (double v : d)
                if (std::isfinite(v)) dmax = std::max(dmax, v);
            for (const double frac : {0.2, 0.55}) {
                const double r = dmax * frac;
                const double got = disc_volume(g, g.point_node(i), r);
                const double oracle = testutil::disc_oracle_from_point(
                    net, base, pts[static_cast<size_t>(i)], r, 1e-3);
                CHECK(std::abs(got - oracle) <= 2e-3);
                ++queries;
            }
        }
    }
    CHECK(queries > 50);
}

TEST_CASE("a radius past the eccentricity covers the whole component") {
    const auto net = y_network();
    const std::vector<NetPoint> pts = {{0, 1.0}};
    const AugmentedGraph g(net, pts);
    CHECK(disc_volume(g, g.point_node(0), 11.0) ==
          doctest::Approx(net.total_length()).epsilon(1e-12));

    // disconnected case: only the component of the query is covered
    const std::vector<RawSegment> two = {{0, 0, 10, 0}, {100, 100, 110, 100}};
    const auto pair_net = build_network(two, 1e-9, "unit");
    const std::vector<NetPoint> p2 = {{0, 5.0}};
    const AugmentedGraph g2(pair_net, p2);
    CHECK(disc_volume(g2, g2.point_node(0), 1000.0) == doctest::Approx(10.0));
}

TEST_CASE("disc measure is nondecreasing in the radius") {
    std::mt19937_64 rng(108);
    const auto net = testutil::random_network(rng);
    const auto pts = testutil::random_points(net, rng, 6);
    const AugmentedGraph g(net, pts);
    const int node = g.point_node(0);
    double prev = 0.0;
    for (double r = 0.0; r <= 40.0; r += 0.37) {
        const double v = disc_volume(g, node, r);
        CHECK(v >= prev - 1e-12);
        CHECK(v <= net.component_length(g.node_component(node)) + 1e-12);
        prev = v;
    }
}

TEST_CASE("neighbour volumes at the k-th radius bracket k points") {
    std::mt19937_64 rng(109);
    for (int rep = 0; rep < 25; ++rep) {
        const auto net = testutil::random_network(rng);
        const auto pts = testutil::random_points(net, rng, 12, 4);
        const AugmentedGraph g(net, pts);
        const auto base = testutil::base_all_pairs(net);
        const int n = g.point_count();
        const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
        const auto samples = knn_volumes(g, k);
        for (int i = 0; i < n; ++i) {
            const auto& vs = samples[static_cast<size_t>(i)];
            CHECK(vs.point_index == i);
            if (std::isinf(vs.d_k)) {
                CHECK(std::isnan(vs.s_k));
                continue;
            }
            int closed = 0, open = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dd = testutil::oracle_point_distance(
                    net, base, pts[static_cast<size_t>(i)], pts[static_cast<size_t>(j)]);
                if (dd <= vs.d_k + 1e-9) ++closed;
                if (dd < vs.d_k - 1e-9) ++open;
            }
            CHECK(closed >= k);
            CHECK(open < k);
            CHECK(vs.s_k >= vs.d_k - 1e-9);
            CHECK(vs.s_k <= net.total_length() + 1e-9);
        }
    }
}

TEST_CASE("equally spaced points have twice-the-gap second-neighbour volumes") {
    const auto net = one_segment(100.0);
    const double h = 1.0;
    std::vector<NetPoint> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({0, 48.0 + h * i});
    const AugmentedGraph g(net, pts);
    const auto samples = knn_volumes(g, 2);
    const auto& middle = samples[2];
    CHECK(middle.d_k == doctest::Approx(h).epsilon(1e-12));
    CHECK(middle.s_k == doctest::Approx(2 * h).epsilon(1e-12));
    const auto first = knn_volumes(g, 1)[2];
    CHECK(first.d_k == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("volume computation is identical across worker counts") {
    std::mt19937_64 rng(110);
    const auto grid = make_grid(6, 6, 25.0);
    std::vector<NetPoint> pts;
    std::uniform_int_distribution<int> seg(0, grid.segment_count() - 1);
    for (int i = 0; i < 120; ++i) {
        const int s = seg(rng);
        pts.push_back({s, std::uniform_real_distribution<double>(0.0, grid.segment(s).length)(rng)});
    }
    const std::vector<int> ks = {1, 3, 7};
    const auto serial = knn_profile(grid, pts, ks, 1);
    const auto parallel = knn_profile(grid, pts, ks, 4);
    REQUIRE(serial.s.rows() == parallel.s.rows());
    for (Eigen::Index i = 0; i < serial.s.rows(); ++i)
        for (Eigen::Index j = 0; j < serial.s.cols(); ++j) {
            CHECK(serial.d(i, j) == parallel.d(i, j));
            CHECK(serial.s(i, j) == parallel.s(i, j));
        }
}

TEST_CASE("mean fifth-neighbour volume tracks the gamma law on a long line") {
    // stationary pattern at rate 0.02: fifth-neighbour volumes average K/rate
    const auto net = make_chain(200, 20000.0);
    SplitRng root(2024);
    double sum = 0.0;
    long long count = 0;
    double pooled_s = 0.0;
    long long pooled_n = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto rng = root.substream(static_cast<std::uint64_t>(rep));
        const auto pts = rpoislpp(net, 0.02, rng);
        if (pts.size() < 6) continue;
        const auto samples = knn_volumes(net, pts, 5, 2);
        for (const auto& vs : samples) {
            if (!std::isfinite(vs.s_k)) continue;
            sum += vs.s_k;
            ++count;
            pooled_s += vs.s_k;
            ++pooled_n;
        }
    }
    REQUIRE(count > 1000);
    const double mean = sum / static_cast<double>(count);
    CHECK(mean == doctest::Approx(250.0).epsilon(0.10));
    const double rate = 5.0 * static_cast<double>(pooled_n) / pooled_s;
    CHECK(rate == doctest::Approx(0.02).epsilon(0.10));
}

TEST_CASE("high-order neighbour volumes split into two lumps on a mixed pattern") {
    // clutter over the whole grid, a dense feature patch inside it
    const auto geo = make_grid_loops();
    SplitRng root(77);
    auto rng = root.substream(0);
    std::vector<Layer> layers(2);
    layers[0].role = Label::clutter;
    layers[0].points = rpoislpp(geo.net, 0.013, rng);
    layers[1].role = Label::feature;
    const SubNetwork feature(geo.net, geo.feature_ids);
    layers[1].points = rpoislpp(feature, 0.067, rng);
    const auto pattern = superpose(layers);
    REQUIRE(pattern.points.size() > 400);

    const std::vector<int> ks = {27, 28, 29, 30, 31, 32};
    const auto profile = knn_profile(geo.net, pattern.points, ks, 2);
    for (size_t j = 0; j < ks.size(); ++j) {
        std::vector<double> vols;
        for (Eigen::Index i = 0; i < profile.s.rows(); ++i)
            if (std::isfinite(profile.s(i, static_cast<Eigen::Index>(j))))
                vols.push_back(profile.s(i, static_cast<Eigen::Index>(j)));
        CHECK(testutil::two_means_separation(vols) > 2.0);
    }
}
