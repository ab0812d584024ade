#include "netclutter/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "netclutter/svg.hpp"

namespace netclutter {

using nlohmann::json;

namespace {

class Budget {
public:
    explicit Budget(double seconds) : limit_(seconds), start_(clock::now()) {}

    void check(const char* stage) const {
        if (limit_ <= 0.0) return;
        const double used =
            std::chrono::duration<double>(clock::now() - start_).count();
        if (used > limit_)
            throw TimeBudgetError(std::string("time budget exceeded during ") + stage + " (" +
                                  std::to_string(used) + "s of " + std::to_string(limit_) +
                                  "s)");
    }

private:
    using clock = std::chrono::steady_clock;
    double limit_;
    clock::time_point start_;
};

std::string policy_tag(const KPolicy& p) {
    return p.mode == KMode::fixed ? "fixed:" + std::to_string(p.fixed_k)
                                  : "auto:" + std::to_string(p.k_max);
}

json fit_to_json(const CoreResult& core, const RunConfig& config, size_t n_points) {
    const MixtureFit& fit = core.classification.fit;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["config_hash"] = config_hash(config);
    j["seed"] = config.seed;
    j["k"] = core.k_used;
    j["k_policy"] = policy_tag(config.k_policy);
    j["lambda1"] = fit.lambda1;
    j["lambda2"] = fit.lambda2;
    j["p"] = fit.p;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["loglik"] = fit.loglik_trace;
    j["entropy"] = entropy(fit.delta);
    j["n_points"] = n_points;
    j["n_feature"] = std::count(core.classification.labels.begin(),
                                core.classification.labels.end(), Label::feature);
    j["tie"] = core.classification.tie;
    if (core.seg) {
        j["changepoint"] = {{"psi", core.seg->psi},     {"beta", core.seg->beta},
                            {"gamma", core.seg->gamma}, {"rss", core.seg->rss},
                            {"flat", core.seg->flat},   {"rising", core.seg->rising}};
    }
    return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

std::string config_hash(const RunConfig& config) {
    std::ostringstream ss;
    ss << config.network_path.string() << '|' << static_cast<int>(config.network_format) << '|'
       << (config.merge_tol ? format_double(*config.merge_tol) : "default") << '|' << config.unit
       << '|' << config.points_path.string() << '|' << static_cast<int>(config.points_format)
       << '|' << format_double(config.snap_tol) << '|' << policy_tag(config.k_policy) << '|'
       << format_double(config.em.tol) << '|' << config.em.max_iter << '|'
       << (config.partition_path ? config.partition_path->string() : "") << '|' << config.seed;
    return hex64(fnv1a64(ss.str()));
}

CoreResult run_core(const LinearNetwork& net, std::span<const NetPoint> pts,
                    const KPolicy& policy, const EmOptions& em, int threads) {
    CoreResult core;
    const int n = static_cast<int>(pts.size());

    int k = 0;
    std::vector<int> ks;
    if (policy.mode == KMode::fixed) {
        if (policy.fixed_k < 1) throw ValidationError("fixed k must be >= 1");
        if (n < policy.fixed_k + 1)
            throw ValidationError("insufficient points: need at least k + 1 = " +
                                  std::to_string(policy.fixed_k + 1) + ", have " +
                                  std::to_string(n));
        k = policy.fixed_k;
        ks = {k};
    } else {
        if (policy.k_max < 2) throw ValidationError("k_max must be >= 2");
        if (n < policy.k_max + 1)
            throw ValidationError("insufficient points: need at least k_max + 1 = " +
                                  std::to_string(policy.k_max + 1) + ", have " +
                                  std::to_string(n));
        ks.resize(static_cast<size_t>(policy.k_max));
        std::iota(ks.begin(), ks.end(), 1);
    }

    const KnnProfile profile = knn_profile(net, pts, ks, threads);

    if (policy.mode == KMode::automatic) {
        core.curve = entropy_curve(profile, em);
        core.seg = fit_segmented(core.curve);
        k = core.seg->k_hat;
    }
    core.k_used = k;

    const Eigen::Index col =
        policy.mode == KMode::fixed ? 0 : static_cast<Eigen::Index>(k - 1);
    core.d_k = profile.d.col(col).array();
    core.volumes = profile.s.col(col).array();

    for (Eigen::Index i = 0; i < core.volumes.size(); ++i) {
        if (std::isinf(core.d_k[i]))
            throw ValidationError("point " + std::to_string(i) + " has fewer than " +
                                  std::to_string(k) + " reachable neighbours");
        if (!(core.volumes[i] > 0.0))
            throw DegenerateFitError("point " + std::to_string(i) +
                                     " has zero disc volume (co-located points)");
    }

    MixtureFit fit = em_fit(core.volumes, k, std::nullopt, em.tol, em.max_iter);
    if (fit.degenerate)
        throw DegenerateFitError("mixture fit collapsed to a single component");
    core.classification = classify(fit, core.volumes);
    return core;
}

namespace {

// Shared artifact writing for whole-network runs.
void write_core_artifacts(const LinearNetwork& net, std::span<const NetPoint> pts,
                          const CoreResult& core, const RunConfig& config,
                          std::vector<std::filesystem::path>& artifacts) {
    const auto dir = config.out_dir;
    const auto labelled = dir / "labelled.csv";
    write_labelled_csv(net, pts, core.volumes, core.classification, labelled);
    artifacts.push_back(labelled);

    std::vector<VolumeSample> samples(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        const auto ei = static_cast<Eigen::Index>(i);
        samples[i] = {static_cast<int>(i), core.k_used, core.d_k[ei], core.volumes[ei]};
    }
    const auto volumes_path = dir / "volumes.csv";
    write_volumes_csv(samples, volumes_path);
    artifacts.push_back(volumes_path);

    const auto fit_path = dir / "fit.json";
    write_json(fit_to_json(core, config, pts.size()), fit_path);
    artifacts.push_back(fit_path);

    const std::vector<double> vol_vec(core.volumes.data(),
                                      core.volumes.data() + core.volumes.size());
    const HistogramBins bins = histogram_bins(vol_vec, config.hist_bins);
    const auto hist_csv = dir / ("hist_k" + std::to_string(core.k_used) + ".csv");
    const auto hist_svg = dir / ("hist_k" + std::to_string(core.k_used) + ".svg");
    write_histogram_csv(bins, hist_csv);
    svg_histogram(bins, "disc volumes at k=" + std::to_string(core.k_used), "s_k", hist_svg);
    artifacts.push_back(hist_csv);
    artifacts.push_back(hist_svg);

    if (core.seg) {
        const auto entropy_csv = dir / "entropy.csv";
        write_entropy_csv(core.curve, entropy_csv);
        artifacts.push_back(entropy_csv);
        std::vector<double> xs(core.curve.ks.begin(), core.curve.ks.end());
        const auto entropy_svg = dir / "entropy.svg";
        svg_line_plot(xs, core.curve.entropies, core.seg, "separation entropy by k", "k",
                      "entropy", entropy_svg);
        artifacts.push_back(entropy_svg);
    }
}

}  // namespace

PipelineResult pipeline(const RunConfig& config) {
    Budget budget(config.time_budget_sec);
    const LinearNetwork net =
        read_network(config.network_path, config.network_format, config.merge_tol, config.unit);
    budget.check("network ingestion");
    PatternLoad load =
        read_points(config.points_path, net, config.points_format, config.snap_tol);
    budget.check("point ingestion");
    if (load.points.empty()) throw ValidationError("no usable points after ingestion");

    PipelineResult result;
    result.snap = load.snap;
    result.core = run_core(net, load.points, config.k_policy, config.em, config.threads);
    budget.check("classification");
    write_core_artifacts(net, load.points, result.core, config, result.artifacts);
    return result;
}

PartitionedResult classify_partitioned(const RunConfig& config) {
    if (!config.partition_path) throw ValidationError("no partition file given");
    Budget budget(config.time_budget_sec);
    const LinearNetwork net =
        read_network(config.network_path, config.network_format, config.merge_tol, config.unit);
    PatternLoad load =
        read_points(config.points_path, net, config.points_format, config.snap_tol);
    if (load.points.empty()) throw ValidationError("no usable points after ingestion");
    budget.check("ingestion");

    const auto rows = read_partition_csv(*config.partition_path);
    std::vector<std::string> segment_zone(static_cast<size_t>(net.segment_count()));
    std::vector<bool> seen(static_cast<size_t>(net.segment_count()), false);
    for (const auto& [sid, zone] : rows) {
        if (sid < 0 || sid >= net.segment_count())
            throw ValidationError("partition references unknown segment " + std::to_string(sid));
        if (seen[static_cast<size_t>(sid)])
            throw ValidationError("segment " + std::to_string(sid) + " appears twice in partition");
        seen[static_cast<size_t>(sid)] = true;
        segment_zone[static_cast<size_t>(sid)] = zone;
    }
    for (int sid = 0; sid < net.segment_count(); ++sid)
        if (!seen[static_cast<size_t>(sid)])
            throw ValidationError("partition misses segment " + std::to_string(sid));

    // Zones in sorted name order, segments in id order within each.
    std::map<std::string, std::vector<int>> zones;
    for (int sid = 0; sid < net.segment_count(); ++sid)
        zones[segment_zone[static_cast<size_t>(sid)]].push_back(sid);

    PartitionedResult result;
    result.snap = load.snap;
    result.labels.assign(load.points.size(), std::nullopt);
    result.point_zone.resize(load.points.size());
    for (size_t i = 0; i < load.points.size(); ++i)
        result.point_zone[i] = segment_zone[static_cast<size_t>(load.points[i].segment_id)];

    const int min_needed = (config.k_policy.mode == KMode::fixed ? config.k_policy.fixed_k
                                                                 : config.k_policy.k_max) +
                           1;

    json zone_json = json::array();
    for (const auto& [zone_id, segment_ids] : zones) {
        ZoneOutcome outcome;
        outcome.zone_id = zone_id;
        std::vector<int> member_points;
        for (size_t i = 0; i < load.points.size(); ++i)
            if (result.point_zone[i] == zone_id) member_points.push_back(static_cast<int>(i));
        outcome.n_points = static_cast<int>(member_points.size());

        if (outcome.n_points < min_needed) {
            outcome.status = "skipped: needs at least " + std::to_string(min_needed) +
                             " points, has " + std::to_string(outcome.n_points);
            result.zones.push_back(outcome);
            continue;
        }
        try {
            const InducedNetwork induced = induce_network(net, segment_ids);
            std::vector<NetPoint> zone_pts;
            zone_pts.reserve(member_points.size());
            for (int pi : member_points) {
                const NetPoint& p = load.points[static_cast<size_t>(pi)];
                zone_pts.push_back(
                    {induced.segment_induced_id.at(p.segment_id), p.offset});
            }
            const CoreResult core =
                run_core(induced.net, zone_pts, config.k_policy, config.em, config.threads);
            for (size_t j = 0; j < member_points.size(); ++j)
                result.labels[static_cast<size_t>(member_points[j])] =
                    core.classification.labels[j];
            outcome.k_used = core.k_used;
            outcome.status = "ok";
            ++result.zones_ok;
        } catch (const TimeBudgetError&) {
            throw;
        } catch (const std::runtime_error& err) {
            outcome.status = std::string("failed: ") + err.what();
        }
        result.zones.push_back(outcome);
        budget.check("zone classification");
    }

    result.partial = result.zones_ok < static_cast<int>(result.zones.size());

    // Artifacts: per-point labelled table with zone column, zone summary.
    const auto dir = config.out_dir;
    const auto labelled = dir / "labelled_zones.csv";
    {
        if (labelled.has_parent_path())
            std::filesystem::create_directories(labelled.parent_path());
        std::ofstream out(labelled);
        if (!out) throw IoError("cannot write " + labelled.string());
        out << "index,segment_id,offset,x,y,zone_id,label\n";
        for (size_t i = 0; i < load.points.size(); ++i) {
            const Vertex at = net.locate(load.points[i]);
            out << i << ',' << load.points[i].segment_id << ','
                << format_double(load.points[i].offset) << ',' << format_double(at.x) << ','
                << format_double(at.y) << ',' << result.point_zone[i] << ','
                << (result.labels[i] ? to_string(*result.labels[i]) : "") << '\n';
        }
    }
    result.artifacts.push_back(labelled);

    for (const auto& z : result.zones)
        zone_json.push_back({{"zone", z.zone_id},
                             {"points", z.n_points},
                             {"status", z.status},
                             {"k", z.k_used}});
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["config_hash"] = config_hash(config);
    summary["seed"] = config.seed;
    summary["zones"] = std::move(zone_json);
    summary["zones_ok"] = result.zones_ok;
    summary["partial"] = result.partial;
    const auto zones_path = dir / "zones.json";
    write_json(summary, zones_path);
    result.artifacts.push_back(zones_path);
    return result;
}

}  // namespace netclutter
