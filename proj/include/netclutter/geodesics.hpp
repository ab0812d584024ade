#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "netclutter/network.hpp"
#include "netclutter/types.hpp"

namespace netclutter {

// K-th nearest-neighbour distance and disc volume for one point of a pattern.
// d_k is +inf when fewer than k other points are reachable; s_k is then NaN.
struct VolumeSample {
    int point_index = 0;
    int k = 0;
    double d_k = 0.0;
    double s_k = 0.0;
};

// Network with a point pattern inserted as graph nodes. Each point splits its
// host segment, so shortest paths between pattern points run over ordinary
// weighted-graph edges. Nodes 0..V-1 are the base vertices; synthetic nodes
// follow. Co-located points (identical segment and offset) share one node,
// and points at offset 0 or at full segment length reuse the endpoint vertex.
class AugmentedGraph {
public:
    struct SubEdge {
        int u = 0;
        int v = 0;
        double length = 0.0;
        int segment_id = 0;
    };

    AugmentedGraph(const LinearNetwork& net, std::span<const NetPoint> pts);

    const LinearNetwork& base() const { return *net_; }
    int node_count() const { return static_cast<int>(node_component_.size()); }
    int point_count() const { return static_cast<int>(point_node_.size()); }
    int sub_edge_count() const { return static_cast<int>(sub_edges_.size()); }
    const std::vector<SubEdge>& sub_edges() const { return sub_edges_; }

    int point_node(int point_index) const { return point_node_[static_cast<size_t>(point_index)]; }
    // How many pattern points sit exactly at this node.
    int point_multiplicity(int node) const { return multiplicity_[static_cast<size_t>(node)]; }
    int node_component(int node) const { return node_component_[static_cast<size_t>(node)]; }
    double component_length(int component_id) const {
        return net_->component_length(component_id);
    }

    // Ordered sub-edge ids forming the chain of one original segment.
    std::span<const int> segment_chain(int segment_id) const;
    // Sub-edge ids incident to a node.
    std::span<const int> incident(int node) const;

    // Longest sub-edge incident to any node, a safe search-radius slack.
    double max_sub_edge_length() const { return max_sub_edge_length_; }

private:
    const LinearNetwork* net_;
    std::vector<SubEdge> sub_edges_;
    std::vector<int> chain_flat_, chain_offsets_;
    std::vector<int> incident_flat_, incident_offsets_;
    std::vector<int> point_node_;
    std::vector<int> multiplicity_;
    std::vector<int> node_component_;
    double max_sub_edge_length_ = 0.0;
};

AugmentedGraph insert_points(const LinearNetwork& net, std::span<const NetPoint> pts);

// Exact single-source shortest-path distances to every node; +inf when
// unreachable.
std::vector<double> distances_from(const AugmentedGraph& g, int source_node);

// K-th smallest distance from point i to the other points of the pattern.
// Returns +inf when fewer than k neighbours are reachable.
double knn_distance(const AugmentedGraph& g, int point_index, int k);

// Length measure of the closed radius-r disc around a node.
double disc_volume(const AugmentedGraph& g, int node, double r);

// d_k and s_k for every point, at a single k. One truncated shortest-path
// search per point; points are processed in parallel when threads > 1 and the
// output order is by point index either way.
std::vector<VolumeSample> knn_volumes(const LinearNetwork& net, std::span<const NetPoint> pts,
                                      int k, int threads = 1);

// Same quantities over a whole set of k values, sharing one search per point.
// d(i, j) and s(i, j) correspond to point i at ks[j]. Entries are +inf / NaN
// where fewer than ks[j] neighbours are reachable.
struct KnnProfile {
    std::vector<int> ks;
    Eigen::MatrixXd d;
    Eigen::MatrixXd s;
};

KnnProfile knn_profile(const LinearNetwork& net, std::span<const NetPoint> pts,
                       std::span<const int> ks, int threads = 1);

std::vector<VolumeSample> knn_volumes(const AugmentedGraph& g, int k, int threads = 1);
KnnProfile knn_profile(const AugmentedGraph& g, std::span<const int> ks, int threads = 1);

}  // namespace netclutter
