#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "netclutter/io_formats.hpp"
#include "netclutter/k_selection.hpp"
#include "netclutter/mixture.hpp"
#include "netclutter/network.hpp"

namespace netclutter {

struct RunConfig {
    std::filesystem::path network_path;
    FileFormat network_format = FileFormat::auto_detect;
    std::optional<double> merge_tol;
    std::string unit = "unit";

    std::filesystem::path points_path;
    FileFormat points_format = FileFormat::auto_detect;
    double snap_tol = 10.0;

    KPolicy k_policy;
    EmOptions em;

    std::filesystem::path out_dir = ".";
    std::optional<std::filesystem::path> partition_path;
    bool allow_partial = false;

    int threads = 1;
    std::uint64_t seed = 0;        // stamped on outputs for reproducibility
    double time_budget_sec = 0.0;  // 0 disables the budget
    int hist_bins = 30;
};

// Stable hash of the fields that influence results, stamped on every output.
std::string config_hash(const RunConfig& config);

// Volume computation, fit, and labelling for one pattern on one network.
// The entropy curve and segmented fit are present under the automatic k
// policy only.
struct CoreResult {
    int k_used = 0;
    EntropyCurve curve;
    std::optional<SegmentedFit> seg;
    Eigen::ArrayXd d_k;
    Eigen::ArrayXd volumes;
    Classification classification;
};

CoreResult run_core(const LinearNetwork& net, std::span<const NetPoint> pts,
                    const KPolicy& policy, const EmOptions& em, int threads);

struct PipelineResult {
    CoreResult core;
    SnapReport snap;
    std::vector<std::filesystem::path> artifacts;
};

// End-to-end batch run: ingest network and points, choose k, compute
// volumes, fit, classify, and write the artifact set (fit JSON, labelled
// CSV, volumes CSV, histograms, and in automatic mode the entropy curve
// with its changepoint fit) under config.out_dir.
PipelineResult pipeline(const RunConfig& config);

struct ZoneOutcome {
    std::string zone_id;
    int n_points = 0;
    std::string status;  // ok | skipped: reason | failed: reason
    int k_used = 0;
};

struct PartitionedResult {
    // One entry per input point; empty where the point's zone did not run.
    std::vector<std::optional<Label>> labels;
    std::vector<std::string> point_zone;
    std::vector<ZoneOutcome> zones;
    int zones_ok = 0;
    bool partial = false;
    SnapReport snap;
    std::vector<std::filesystem::path> artifacts;
};

// Runs the pipeline independently inside each zone of a segment partition
// and unions the per-zone labels. Zones with too few points are skipped and
// reported; any skip or failure makes the result partial, which is an error
// unless config.allow_partial is set.
PartitionedResult classify_partitioned(const RunConfig& config);

}  // namespace netclutter
