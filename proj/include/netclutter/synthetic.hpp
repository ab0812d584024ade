#pragma once

#include <vector>

#include "netclutter/network.hpp"

namespace netclutter {

// Deterministic stand-in geometries for simulation studies. Real road and
// dendrite data is not bundled, so designs run on these instead: a loop-rich
// grid, a binary tree, and a grid carrying two disjoint "road" paths, each
// scaled to a requested total length.

// rows x cols lattice of vertices, every horizontal and vertical edge
// present, each of length edge_length.
LinearNetwork make_grid(int rows, int cols, double edge_length);

// Straight line subdivided into n_segments equal pieces.
LinearNetwork make_chain(int n_segments, double total_length);

struct RegionedNetwork {
    LinearNetwork net;
    // Connected segment set grown from the center (or the first road).
    std::vector<int> feature_ids;
    // Larger region containing feature_ids (loop grid), or the second
    // disjoint road (two-road grid); empty otherwise.
    std::vector<int> nested_ids;
};

// 14x14 lattice scaled so the 364 edges sum to total_length, with a central
// connected feature region of roughly feature_length and a larger nested
// region of roughly nested_length around it.
RegionedNetwork make_grid_loops(double total_length = 31150.0, int rows = 14, int cols = 14,
                                double feature_length = 2991.0, double nested_length = 11731.0);

// Symmetric binary tree of the given depth (2^(depth+1) - 1 segments),
// scaled to total_length; the feature region grows down one first-level
// branch to roughly feature_length.
RegionedNetwork make_branching_tree(int depth = 8, double total_length = 1934.0,
                                    double feature_length = 778.0);

// rows x cols lattice scaled to total_length with two disjoint horizontal
// road paths: feature_ids of roughly road1_length and nested_ids of roughly
// road2_length.
RegionedNetwork make_two_road_grid(double total_length = 128690.0, int rows = 8, int cols = 42,
                                   double road1_length = 8320.0, double road2_length = 3680.0);

}  // namespace netclutter
