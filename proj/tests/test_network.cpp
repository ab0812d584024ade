#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "netclutter/network.hpp"
#include "netclutter/synthetic.hpp"
#include "oracles.hpp"

using namespace netclutter;

namespace {

std::vector<RawSegment> vshape() {
    return {{0, 0, 1, 0}, {1, 0, 1, 1}};
}

}  // namespace

TEST_CASE("segments sharing an endpoint merge to one vertex") {
    const auto net = build_network(vshape(), 1e-6, "unit");
    CHECK(net.vertex_count() == 3);
    CHECK(net.segment_count() == 2);
    CHECK(net.total_length() == doctest::Approx(2.0));
    CHECK(net.component_count() == 1);
}

TEST_CASE("endpoints within the merge tolerance snap together") {
    const std::vector<RawSegment> raw = {{0, 0, 1, 0}, {1 + 1e-9, 0, 2, 0}};
    const auto net = build_network(raw, 1e-6, "unit");
    CHECK(net.vertex_count() == 3);
    CHECK(net.segment_count() == 2);

    const auto apart = build_network(raw, 1e-12, "unit");
    CHECK(apart.vertex_count() == 4);
    CHECK(apart.component_count() == 2);
}

TEST_CASE("degenerate input is rejected or dropped") {
    CHECK_THROWS_AS(build_network(std::vector<RawSegment>{}, 1e-6, "unit"), ValidationError);
    const std::vector<RawSegment> nan_seg = {{0, 0, std::nan(""), 0}};
    CHECK_THROWS_AS(build_network(nan_seg, 1e-6, "unit"), ValidationError);

    // zero-length after snapping: dropped and counted
    const std::vector<RawSegment> with_null = {{0, 0, 5, 0}, {5, 0, 5, 0}};
    const auto net = build_network(with_null, 1e-6, "unit");
    CHECK(net.segment_count() == 1);
    CHECK(net.dropped_zero_length() == 1);

    const std::vector<RawSegment> all_null = {{1, 1, 1, 1}};
    CHECK_THROWS_AS(build_network(all_null, 1e-6, "unit"), ValidationError);
}

TEST_CASE("total length sums segments and ignores ordering") {
    std::vector<RawSegment> raw = {{0, 0, 3, 0}, {3, 0, 3, 4}, {3, 4, 10, 4}};
    const auto a = build_network(raw, 1e-6, "unit");
    std::reverse(raw.begin(), raw.end());
    const auto b = build_network(raw, 1e-6, "unit");
    CHECK(a.total_length() == doctest::Approx(b.total_length()).epsilon(1e-12));
    CHECK(a.total_length() == doctest::Approx(14.0));

    const auto one = build_network(std::vector<RawSegment>{{0, 0, 10, 0}}, 1e-6, "unit");
    CHECK(one.total_length() == 10.0);
}

TEST_CASE("rebuilding from emitted geometry reproduces lengths") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const auto net = testutil::random_network(rng);
        std::vector<RawSegment> raw;
        for (const auto& s : net.segments()) {
            const auto& va = net.vertex(s.a);
            const auto& vb = net.vertex(s.b);
            raw.push_back({va.x, va.y, vb.x, vb.y});
        }
        const auto again = build_network(raw, 1e-9, "unit");
        REQUIRE(again.segment_count() == net.segment_count());
        CHECK(again.vertex_count() == net.vertex_count());
        for (int i = 0; i < net.segment_count(); ++i)
            CHECK(again.segment(i).length == doctest::Approx(net.segment(i).length).epsilon(1e-12));
    }
}

TEST_CASE("segment lengths agree with endpoint coordinates") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const auto net = testutil::random_network(rng);
        for (const auto& s : net.segments()) {
            const auto& va = net.vertex(s.a);
            const auto& vb = net.vertex(s.b);
            const double d = std::hypot(va.x - vb.x, va.y - vb.y);
            CHECK(std::abs(d - s.length) < 1e-6);
        }
    }
}

TEST_CASE("subnetworks partition the total length") {
    std::mt19937_64 rng(43);
    const auto net = testutil::random_network(rng, 12);
    std::vector<int> inside, outside;
    for (int i = 0; i < net.segment_count(); ++i)
        (i % 2 == 0 ? inside : outside).push_back(i);
    const auto sub = extract_subnetwork(net, inside);
    const auto rest = extract_subnetwork(net, outside, true);
    CHECK(sub.total_length() + rest.total_length() ==
          doctest::Approx(net.total_length()).epsilon(1e-12));
}

TEST_CASE("subnetwork extraction validates its ids") {
    const auto net = build_network(vshape(), 1e-6, "unit");
    std::vector<int> all = {0, 1};
    CHECK(extract_subnetwork(net, all).total_length() ==
          doctest::Approx(net.total_length()));
    CHECK_THROWS_AS(extract_subnetwork(net, std::vector<int>{7}), ValidationError);
    CHECK_THROWS_AS(extract_subnetwork(net, std::vector<int>{}), ValidationError);
    CHECK(extract_subnetwork(net, std::vector<int>{}, true).total_length() == 0.0);
}

TEST_CASE("duplicate edges and self-loops are kept and flagged") {
    // two parallel edges between the same pair
    const std::vector<RawSegment> multi = {{0, 0, 4, 0}, {0, 0, 4, 0}};
    const auto net = build_network(multi, 1e-6, "unit");
    CHECK(net.vertex_count() == 2);
    CHECK(net.segment_count() == 2);
    CHECK(net.total_length() == doctest::Approx(8.0));

    std::vector<Vertex> vs = {{0, 0.0, 0.0}, {1, 6.0, 0.0}};
    std::vector<Segment> ss = {{0, 0, 1, 6.0}, {1, 1, 1, 9.0}};
    const auto looped = LinearNetwork::from_parts(vs, ss, "unit");
    CHECK(looped.self_loop_count() == 1);
    CHECK(looped.total_length() == doctest::Approx(15.0));
    CHECK(looped.component_count() == 1);
}

TEST_CASE("from_parts validates ids and lengths") {
    std::vector<Vertex> vs = {{0, 0.0, 0.0}, {1, 3.0, 0.0}};
    CHECK_THROWS_AS(
        LinearNetwork::from_parts(vs, std::vector<Segment>{{0, 0, 1, -3.0}}, "unit"),
        ValidationError);
    CHECK_THROWS_AS(
        LinearNetwork::from_parts(vs, std::vector<Segment>{{0, 0, 5, 3.0}}, "unit"),
        ValidationError);
    // stated length far from the coordinate distance
    CHECK_THROWS_AS(
        LinearNetwork::from_parts(vs, std::vector<Segment>{{0, 0, 1, 30.0}}, "unit"),
        ValidationError);
}

TEST_CASE("point locations are validated and located") {
    const auto net = build_network(vshape(), 1e-6, "unit");
    CHECK_NOTHROW(net.validate_point({0, 0.5}));
    CHECK_THROWS_AS(net.validate_point({0, 1.5}), ValidationError);
    CHECK_THROWS_AS(net.validate_point({9, 0.0}), ValidationError);
    CHECK_THROWS_AS(net.validate_point({0, -0.1}), ValidationError);
    const Vertex at = net.locate({1, 0.25});
    CHECK(at.x == doctest::Approx(1.0));
    CHECK(at.y == doctest::Approx(0.25));
}

TEST_CASE("smallest enclosing radius on simple shapes") {
    const auto one = build_network(std::vector<RawSegment>{{0, 0, 10, 0}}, 1e-6, "unit");
    CHECK(circumradius(one) == doctest::Approx(5.0));

    // three arms of length 5 meeting at a hub: the hub sees every leaf at 5
    const std::vector<RawSegment> y = {{0, 0, 5, 0}, {0, 0, -5, 0}, {0, 0, 0, 5}};
    const auto ynet = build_network(y, 1e-6, "unit");
    CHECK(circumradius(ynet) == doctest::Approx(5.0));
    CHECK(circumradius(ynet) == doctest::Approx(testutil::circumradius_dense(ynet, 0.05)).epsilon(1e-6));

    // disconnected: the better component wins
    const std::vector<RawSegment> two = {{0, 0, 10, 0}, {100, 100, 110, 100}};
    const auto pair = build_network(two, 1e-6, "unit");
    CHECK(pair.component_count() == 2);
    CHECK(circumradius(pair) == doctest::Approx(5.0));
}

TEST_CASE("dense center search stays within the half-segment bound") {
    std::mt19937_64 rng(44);
    for (int rep = 0; rep < 8; ++rep) {
        const auto net = testutil::random_network(rng, 7);
        if (net.component_count() != 1) continue;
        double longest = 0.0;
        for (const auto& s : net.segments()) longest = std::max(longest, s.length);
        const double exact_ish = testutil::circumradius_dense(net, 0.02);
        const double approx = circumradius(net);
        CHECK(approx >= exact_ish - 0.03);          // never better than the optimum
        CHECK(approx <= exact_ish + longest / 2 + 0.03);  // candidate-set upper bound
    }
}

TEST_CASE("inducing on every segment reproduces the parent") {
    std::mt19937_64 rng(45);
    const auto net = testutil::random_network(rng);
    std::vector<int> all(static_cast<size_t>(net.segment_count()));
    std::iota(all.begin(), all.end(), 0);
    const auto ind = induce_network(net, all);
    REQUIRE(ind.net.segment_count() == net.segment_count());
    REQUIRE(ind.net.vertex_count() == net.vertex_count());
    for (int i = 0; i < net.segment_count(); ++i) {
        CHECK(ind.net.segment(i).length == net.segment(i).length);
        CHECK(ind.segment_parent_id[static_cast<size_t>(i)] == i);
    }
}

TEST_CASE("induced subnetworks renumber densely and keep exact lengths") {
    const std::vector<RawSegment> raw = {{0, 0, 1, 0}, {1, 0, 2, 0}, {2, 0, 3, 0}, {3, 0, 4, 0}};
    const auto net = build_network(raw, 1e-6, "unit");
    const std::vector<int> wanted = {3, 1};
    const auto ind = induce_network(net, wanted);
    CHECK(ind.net.segment_count() == 2);
    CHECK(ind.net.vertex_count() == 4);  // two disjoint pieces
    CHECK(ind.net.component_count() == 2);
    CHECK(ind.segment_induced_id.at(1) == 0);
    CHECK(ind.segment_induced_id.at(3) == 1);
    CHECK(ind.net.segment(0).length == net.segment(1).length);
}

TEST_CASE("built-in geometries have the advertised measure") {
    const auto grid = make_grid_loops();
    CHECK(grid.net.total_length() == doctest::Approx(31150.0).epsilon(1e-9));
    CHECK(grid.net.component_count() == 1);
    const auto feature = extract_subnetwork(grid.net, grid.feature_ids);
    CHECK(feature.total_length() == doctest::Approx(2991.0).epsilon(0.05));
    const auto nested = extract_subnetwork(grid.net, grid.nested_ids);
    CHECK(nested.total_length() == doctest::Approx(11731.0).epsilon(0.05));
    // the tighter region sits inside the wider one
    for (int id : grid.feature_ids)
        CHECK(std::find(grid.nested_ids.begin(), grid.nested_ids.end(), id) !=
              grid.nested_ids.end());

    const auto tree = make_branching_tree();
    CHECK(tree.net.total_length() == doctest::Approx(1934.0).epsilon(1e-9));
    CHECK(tree.net.component_count() == 1);
    CHECK(tree.net.segment_count() + 1 == tree.net.vertex_count());  // a tree
    const auto tf = extract_subnetwork(tree.net, tree.feature_ids);
    CHECK(tf.total_length() == doctest::Approx(778.0).epsilon(0.05));

    const auto roads = make_two_road_grid();
    CHECK(roads.net.total_length() == doctest::Approx(128690.0).epsilon(1e-9));
    const auto r1 = extract_subnetwork(roads.net, roads.feature_ids);
    const auto r2 = extract_subnetwork(roads.net, roads.nested_ids);
    CHECK(r1.total_length() == doctest::Approx(8320.0).epsilon(0.05));
    CHECK(r2.total_length() == doctest::Approx(3680.0).epsilon(0.05));
    // the two roads share no segment
    for (int id : roads.feature_ids)
        CHECK(std::find(roads.nested_ids.begin(), roads.nested_ids.end(), id) ==
              roads.nested_ids.end());
}
