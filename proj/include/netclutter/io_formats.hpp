#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netclutter/geodesics.hpp"
#include "netclutter/k_selection.hpp"
#include "netclutter/mixture.hpp"
#include "netclutter/network.hpp"
#include "netclutter/simulate.hpp"

namespace netclutter {

enum class FileFormat { auto_detect, geojson, csv };

FileFormat format_from_string(std::string_view s);

// FNV-1a over a canonical string; used to stamp outputs with a config hash.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

// Doubles are printed with enough digits to round-trip exactly.
std::string format_double(double v);

// --- networks ---------------------------------------------------------

// GeoJSON FeatureCollection of LineString / MultiLineString features, or a
// bare geometry. Polylines split into straight segments. The optional
// "unit" member of the top level or feature properties is recorded.
LinearNetwork read_network_geojson(const std::filesystem::path& path,
                                   std::optional<double> merge_tol = std::nullopt);

// CSV with header x1,y1,x2,y2 (comment lines start with '#').
LinearNetwork read_network_csv(const std::filesystem::path& path,
                               std::optional<double> merge_tol = std::nullopt,
                               const std::string& unit = "unit");

LinearNetwork read_network(const std::filesystem::path& path,
                           FileFormat format = FileFormat::auto_detect,
                           std::optional<double> merge_tol = std::nullopt,
                           const std::string& unit = "unit");

// Segment table id,a,b,length; vertex table appended as comments would not
// round-trip, so vertices get their own file when asked.
void write_segments_csv(const LinearNetwork& net, const std::filesystem::path& path);
void write_vertices_csv(const LinearNetwork& net, const std::filesystem::path& path);

// --- point patterns ---------------------------------------------------

struct SnapReport {
    int accepted = 0;
    std::vector<int> rejected_rows;  // 1-based data row numbers
    double max_snap_distance = 0.0;
};

struct PatternLoad {
    std::vector<NetPoint> points;
    std::vector<std::optional<Label>> labels;  // present when the file had them
    SnapReport snap;
};

// CSV point pattern. Exact placement with header segment_id,offset; planar
// with header x,y, where each point snaps to the nearest network location by
// perpendicular projection, rejected beyond snap_tol. Files with both column
// sets (such as emitted labelled tables) load by the exact columns. A label
// column is carried through when present.
PatternLoad read_points_csv(const std::filesystem::path& path, const LinearNetwork& net,
                            double snap_tol);

// GeoJSON Point / MultiPoint features, snapped like the planar CSV path.
PatternLoad read_points_geojson(const std::filesystem::path& path, const LinearNetwork& net,
                                double snap_tol);

PatternLoad read_points(const std::filesystem::path& path, const LinearNetwork& net,
                        FileFormat format = FileFormat::auto_detect, double snap_tol = 10.0);

void write_points_csv(const LinearNetwork& net, std::span<const NetPoint> pts,
                      std::span<const Label> labels,  // empty = no label column
                      const std::filesystem::path& path);

// index,segment_id,offset,x,y,s_k,delta,label rows for a classified pattern.
void write_labelled_csv(const LinearNetwork& net, std::span<const NetPoint> pts,
                        const Eigen::ArrayXd& volumes, const Classification& cls,
                        const std::filesystem::path& path);

void write_volumes_csv(std::span<const VolumeSample> samples, const std::filesystem::path& path);

void write_entropy_csv(const EntropyCurve& curve, const std::filesystem::path& path);

// --- zone partitions ---------------------------------------------------

// CSV with header segment_id,zone_id; every network segment must appear
// exactly once.
std::vector<std::pair<int, std::string>> read_partition_csv(const std::filesystem::path& path);

// --- rates tables -------------------------------------------------------

void write_rates_csv(const RatesReport& report, const std::filesystem::path& path);
std::string rates_to_json(const RatesReport& report);
void write_rep_outcomes_csv(const RatesReport& report, const std::filesystem::path& path);

}  // namespace netclutter
