#pragma once

#include <filesystem>
#include <memory>

#include "netclutter/simulate.hpp"
#include "netclutter/synthetic.hpp"

namespace netclutter {

// A design file (JSON) names a geometry, the intensity layers, the replicate
// count, the k policies to score, and a seed. Geometries are either built-in
// generators (grid_loops, tree, two_road_grid, grid, chain) or a network
// file; generator geometries expose named regions ("feature", "nested") that
// layers can target, file geometries take explicit segment id lists.
struct LoadedDesign {
    std::shared_ptr<RegionedNetwork> geometry;  // keeps spec.network alive
    DesignSpec spec;
};

LoadedDesign load_design(const std::filesystem::path& path);

}  // namespace netclutter
