#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "netclutter/types.hpp"

namespace netclutter {

/// One raw straight segment given by its endpoint coordinates.
struct RawSegment {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

/// A linear network: finite union of straight segments, stored as a measured
/// graph. Immutable after construction; safe for concurrent reads.
class LinearNetwork {
public:
    LinearNetwork() = default;

    /// Assemble from explicit parts. Lengths must agree with vertex
    /// coordinates within `check_tol`, except for self-loops (a == b), which
    /// are kept with their stated length and counted in self_loop_count().
    static LinearNetwork from_parts(std::vector<Vertex> vertices,
                                    std::vector<Segment> segments,
                                    std::string unit = {},
                                    std::optional<double> check_tol = std::nullopt);

    std::span<const Vertex> vertices() const { return vertices_; }
    std::span<const Segment> segments() const { return segments_; }
    const Vertex& vertex(int id) const { return vertices_[static_cast<size_t>(id)]; }
    const Segment& segment(int id) const { return segments_[static_cast<size_t>(id)]; }
    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int segment_count() const { return static_cast<int>(segments_.size()); }

    /// Segment ids incident to a vertex (self-loops listed once).
    std::span<const int> incident(int vertex_id) const;

    double total_length() const { return total_length_; }

    /// Connected-component label of a vertex, dense in [0, component_count).
    int component(int vertex_id) const { return component_[static_cast<size_t>(vertex_id)]; }
    int component_count() const { return component_count_; }

    /// Sum of segment lengths within one component.
    double component_length(int component_id) const;

    int dropped_zero_length() const { return dropped_zero_length_; }
    int self_loop_count() const { return self_loop_count_; }
    const std::string& unit() const { return unit_; }

    /// Planar coordinates of a network location.
    Vertex locate(const NetPoint& p) const;

    /// Throws ValidationError unless p lies on a segment of this network
    /// with 0 <= offset <= length.
    void validate_point(const NetPoint& p) const;

    friend LinearNetwork build_network(std::span<const RawSegment>, double, std::string);

private:
    void finalize();

    std::vector<Vertex> vertices_;
    std::vector<Segment> segments_;
    std::vector<int> incident_flat_;
    std::vector<int> incident_offsets_;
    std::vector<int> component_;
    std::vector<double> component_length_;
    int component_count_ = 0;
    double total_length_ = 0.0;
    int dropped_zero_length_ = 0;
    int self_loop_count_ = 0;
    std::string unit_;
};

/// View of a subset of a network's segments.
class SubNetwork {
public:
    SubNetwork(const LinearNetwork& parent, std::vector<int> segment_ids,
               bool allow_empty = false);

    const LinearNetwork& parent() const { return *parent_; }
    std::span<const int> segment_ids() const { return segment_ids_; }
    double total_length() const { return total_length_; }
    bool contains(int segment_id) const;

private:
    const LinearNetwork* parent_ = nullptr;
    std::vector<int> segment_ids_;  // sorted ascending
    double total_length_ = 0.0;
};

/// Snap endpoints within merge_tol to shared vertices, drop zero-length
/// segments, and assemble the measured graph. merge_tol must be >= 0.
LinearNetwork build_network(std::span<const RawSegment> raw, double merge_tol,
                            std::string unit = {});

/// As above with the default tolerance 1e-6 x bounding-box diagonal.
LinearNetwork build_network(std::span<const RawSegment> raw, std::string unit = {});

double default_merge_tol(std::span<const RawSegment> raw);

double total_length(const LinearNetwork& net);
double total_length(const SubNetwork& sub);

SubNetwork extract_subnetwork(const LinearNetwork& net, std::vector<int> segment_ids,
                              bool allow_empty = false);

/// Radius of the smallest network disc containing the whole network, taken
/// per connected component and minimised over components. Centre candidates
/// are vertices plus segment midpoints, so the result is an upper bound on
/// the continuous optimum within half the longest segment.
double circumradius(const LinearNetwork& net);

/// A network induced by a subset of segments, with dense re-numbered ids and
/// mappings back to the parent. Passing every segment id reproduces the
/// parent exactly, ids included.
struct InducedNetwork {
    LinearNetwork net;
    std::vector<int> segment_parent_id;   // induced segment id -> parent id
    std::vector<int> vertex_parent_id;    // induced vertex id -> parent id
    std::unordered_map<int, int> segment_induced_id;  // parent id -> induced id
};

InducedNetwork induce_network(const LinearNetwork& net, std::span<const int> segment_ids);

}  // namespace netclutter
