#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "netclutter/design.hpp"
#include "netclutter/geodesics.hpp"
#include "netclutter/io_formats.hpp"
#include "netclutter/k_selection.hpp"
#include "netclutter/mixture.hpp"
#include "netclutter/network.hpp"
#include "netclutter/pipeline.hpp"
#include "netclutter/rng.hpp"
#include "netclutter/simulate.hpp"
#include "netclutter/svg.hpp"
#include "netclutter/synthetic.hpp"

namespace nc = netclutter;
using nlohmann::json;

namespace {

void emit_error(const std::string& type, const std::string& message) {
    json j;
    j["schema_version"] = nc::kSchemaVersion;
    j["error"] = {{"type", type}, {"message", message}};
    std::cerr << j.dump() << '\n';
}

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format = "csv";

    bool json_out() const { return format == "json"; }
};

struct NetworkOpts {
    std::string path;
    std::string format = "auto";
    std::optional<double> merge_tol;
    std::string unit = "unit";

    void attach(CLI::App* sub) {
        sub->add_option("--network", path, "network file (GeoJSON or CSV x1,y1,x2,y2)")
            ->required();
        sub->add_option("--network-format", format, "auto|geojson|csv")
            ->capture_default_str();
        sub->add_option("--merge-tol", merge_tol,
                        "endpoint snap tolerance (default 1e-6 x bbox diagonal)");
        sub->add_option("--unit", unit, "length unit label")->capture_default_str();
    }

    nc::LinearNetwork load() const {
        return nc::read_network(path, nc::format_from_string(format), merge_tol, unit);
    }
};

struct PointOpts {
    std::string path;
    std::string format = "auto";
    double snap_tol = 10.0;

    void attach(CLI::App* sub) {
        sub->add_option("--points", path,
                        "point pattern (CSV x,y or segment_id,offset; GeoJSON points)")
            ->required();
        sub->add_option("--points-format", format, "auto|geojson|csv")->capture_default_str();
        sub->add_option("--snap-tol", snap_tol, "max planar snap distance for x,y points")
            ->capture_default_str();
    }
};

struct SynthOpts {
    std::string kind;

    void attach(CLI::App* sub) {
        sub->add_option("--synthetic", kind,
                        "built-in geometry: grid_loops, tree, two_road_grid");
    }

    nc::RegionedNetwork build() const {
        if (kind == "grid_loops") return nc::make_grid_loops();
        if (kind == "tree") return nc::make_branching_tree();
        if (kind == "two_road_grid") return nc::make_two_road_grid();
        throw nc::ValidationError("unknown synthetic geometry '" + kind + "'");
    }
};

void report_snaps(const nc::SnapReport& snap) {
    if (!snap.rejected_rows.empty()) {
        std::cerr << "warning: " << snap.rejected_rows.size()
                  << " points beyond the snap tolerance were dropped (first at data row "
                  << snap.rejected_rows.front() << ")\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"classify feature points among clutter on a linear network"};
    app.require_subcommand(1);
    GlobalOpts global;
    app.add_option("--seed", global.seed, "root random seed")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads (0 = hardware)")
        ->capture_default_str();
    app.add_option("--format", global.format, "stdout report format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    int exit_code = 0;

    // ---- net: inspect or convert a network file ----
    auto* net_cmd = app.add_subcommand("net", "summarise a network file");
    net_cmd->fallthrough();
    NetworkOpts net_net;
    net_net.attach(net_cmd);
    std::string net_out, net_vertices_out;
    bool net_circum = false;
    net_cmd->add_option("--out", net_out, "write segment table CSV here");
    net_cmd->add_option("--vertices-out", net_vertices_out, "write vertex table CSV here");
    net_cmd->add_flag("--circumradius", net_circum, "also compute the circumradius");
    net_cmd->callback([&] {
        const nc::LinearNetwork net = net_net.load();
        json j;
        j["schema_version"] = nc::kSchemaVersion;
        j["vertices"] = net.vertex_count();
        j["segments"] = net.segment_count();
        j["total_length"] = net.total_length();
        j["components"] = net.component_count();
        j["self_loops"] = net.self_loop_count();
        j["dropped_zero_length"] = net.dropped_zero_length();
        j["unit"] = net.unit();
        if (net_circum) j["circumradius"] = nc::circumradius(net);
        if (!net_out.empty()) nc::write_segments_csv(net, net_out);
        if (!net_vertices_out.empty()) nc::write_vertices_csv(net, net_vertices_out);
        if (global.json_out()) {
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "vertices: " << net.vertex_count() << "\nsegments: "
                      << net.segment_count() << "\ntotal_length: "
                      << nc::format_double(net.total_length()) << ' ' << net.unit()
                      << "\ncomponents: " << net.component_count()
                      << "\nself_loops: " << net.self_loop_count()
                      << "\ndropped_zero_length: " << net.dropped_zero_length() << '\n';
            if (net_circum)
                std::cout << "circumradius: " << nc::format_double(nc::circumradius(net))
                          << '\n';
        }
    });

    // ---- simulate: draw Poisson patterns ----
    auto* sim_cmd = app.add_subcommand("simulate", "draw a Poisson pattern on a network");
    sim_cmd->fallthrough();
    std::string sim_design;
    NetworkOpts sim_net;
    SynthOpts sim_synth;
    double sim_lambda = 0.0;
    int sim_rep = 0;
    std::string sim_out = "pattern.csv";
    sim_cmd->add_option("--design", sim_design, "design file (JSON); draws one replicate");
    sim_cmd->add_option("--network", sim_net.path, "network file for --lambda mode");
    sim_cmd->add_option("--network-format", sim_net.format, "auto|geojson|csv");
    sim_cmd->add_option("--merge-tol", sim_net.merge_tol, "endpoint snap tolerance");
    sim_cmd->add_option("--unit", sim_net.unit, "length unit label");
    sim_synth.attach(sim_cmd);
    sim_cmd->add_option("--lambda", sim_lambda, "intensity (points per unit length)");
    sim_cmd->add_option("--rep", sim_rep, "replicate index (selects the RNG substream)")
        ->capture_default_str();
    sim_cmd->add_option("--out", sim_out, "output pattern CSV")->capture_default_str();
    sim_cmd->callback([&] {
        if (!sim_design.empty()) {
            const nc::LoadedDesign design = nc::load_design(sim_design);
            const std::uint64_t seed = global.seed != 0 ? global.seed : design.spec.seed;
            std::mt19937_64 rng =
                nc::SplitRng(seed).substream(static_cast<std::uint64_t>(sim_rep));
            std::vector<nc::Layer> layers;
            for (const auto& dl : design.spec.layers) {
                nc::Layer layer;
                layer.role = dl.role;
                if (dl.region_ids) {
                    const nc::SubNetwork region(*design.spec.network, *dl.region_ids, false);
                    layer.points = nc::rpoislpp(region, dl.lambda, rng);
                } else {
                    layer.points = nc::rpoislpp(*design.spec.network, dl.lambda, rng);
                }
                layers.push_back(std::move(layer));
            }
            const nc::LabelledPattern pattern = nc::superpose(layers);
            nc::write_points_csv(*design.spec.network, pattern.points, pattern.truth, sim_out);
            if (global.json_out()) {
                json j;
                j["schema_version"] = nc::kSchemaVersion;
                j["design"] = design.spec.name;
                j["rep"] = sim_rep;
                j["seed"] = seed;
                j["points"] = pattern.points.size();
                j["out"] = sim_out;
                std::cout << j.dump(2) << '\n';
            } else {
                std::cout << "wrote " << pattern.points.size() << " points to " << sim_out
                          << '\n';
            }
            return;
        }
        if (!(sim_lambda > 0.0))
            throw nc::ValidationError("simulate needs --design or --lambda > 0");
        nc::LinearNetwork net = [&] {
            if (!sim_synth.kind.empty()) return std::move(sim_synth.build().net);
            if (sim_net.path.empty())
                throw nc::ValidationError("simulate needs --network or --synthetic");
            return sim_net.load();
        }();
        std::mt19937_64 rng =
            nc::SplitRng(global.seed).substream(static_cast<std::uint64_t>(sim_rep));
        const std::vector<nc::NetPoint> pts = nc::rpoislpp(net, sim_lambda, rng);
        nc::write_points_csv(net, pts, {}, sim_out);
        if (global.json_out()) {
            json j;
            j["schema_version"] = nc::kSchemaVersion;
            j["lambda"] = sim_lambda;
            j["seed"] = global.seed;
            j["rep"] = sim_rep;
            j["total_length"] = net.total_length();
            j["points"] = pts.size();
            j["out"] = sim_out;
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "wrote " << pts.size() << " points to " << sim_out << '\n';
        }
    });

    // ---- volumes: neighbour distances and disc volumes at one k ----
    auto* vol_cmd = app.add_subcommand("volumes", "k-th neighbour disc volumes per point");
    vol_cmd->fallthrough();
    NetworkOpts vol_net;
    PointOpts vol_pts;
    vol_net.attach(vol_cmd);
    vol_pts.attach(vol_cmd);
    int vol_k = 0;
    std::string vol_out = "volumes.csv";
    vol_cmd->add_option("--k", vol_k, "neighbour order")->required();
    vol_cmd->add_option("--out", vol_out, "output CSV")->capture_default_str();
    vol_cmd->callback([&] {
        const nc::LinearNetwork net = vol_net.load();
        const nc::PatternLoad load = nc::read_points(
            vol_pts.path, net, nc::format_from_string(vol_pts.format), vol_pts.snap_tol);
        report_snaps(load.snap);
        if (static_cast<int>(load.points.size()) < vol_k + 1)
            throw nc::ValidationError("insufficient points: need at least k + 1");
        const auto samples = nc::knn_volumes(net, load.points, vol_k, global.threads);
        for (const auto& s : samples)
            if (std::isinf(s.d_k))
                throw nc::ValidationError(
                    "point " + std::to_string(s.point_index) + " has fewer than " +
                    std::to_string(vol_k) + " reachable neighbours");
        nc::write_volumes_csv(samples, vol_out);
        if (global.json_out()) {
            json j;
            j["schema_version"] = nc::kSchemaVersion;
            j["k"] = vol_k;
            j["points"] = samples.size();
            j["out"] = vol_out;
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "wrote " << samples.size() << " volumes to " << vol_out << '\n';
        }
    });

    // ---- select-k: entropy curve and changepoint ----
    auto* sel_cmd = app.add_subcommand("select-k", "choose k from the entropy changepoint");
    sel_cmd->fallthrough();
    NetworkOpts sel_net;
    PointOpts sel_pts;
    sel_net.attach(sel_cmd);
    sel_pts.attach(sel_cmd);
    int sel_kmax = 35;
    double sel_em_tol = 1e-8;
    int sel_em_iter = 1000;
    std::string sel_out = "netclutter_out";
    sel_cmd->add_option("--k-max", sel_kmax, "largest k on the curve")->capture_default_str();
    sel_cmd->add_option("--em-tol", sel_em_tol, "EM convergence tolerance")
        ->capture_default_str();
    sel_cmd->add_option("--em-max-iter", sel_em_iter, "EM iteration cap")
        ->capture_default_str();
    sel_cmd->add_option("--out", sel_out, "artifact directory")->capture_default_str();
    sel_cmd->callback([&] {
        const nc::LinearNetwork net = sel_net.load();
        const nc::PatternLoad load = nc::read_points(
            sel_pts.path, net, nc::format_from_string(sel_pts.format), sel_pts.snap_tol);
        report_snaps(load.snap);
        const nc::EmOptions em{sel_em_tol, sel_em_iter};
        const nc::EntropyCurve curve =
            nc::entropy_curve(net, load.points, sel_kmax, global.threads, em);
        const nc::SegmentedFit fit = nc::fit_segmented(curve);
        const std::filesystem::path dir = sel_out;
        nc::write_entropy_csv(curve, dir / "entropy.csv");
        std::vector<double> xs(curve.ks.begin(), curve.ks.end());
        nc::svg_line_plot(xs, curve.entropies, fit, "separation entropy by k", "k", "entropy",
                          dir / "entropy.svg");
        json j;
        j["schema_version"] = nc::kSchemaVersion;
        j["k_hat"] = fit.k_hat;
        j["psi"] = fit.psi;
        j["beta"] = fit.beta;
        j["gamma"] = fit.gamma;
        j["rss"] = fit.rss;
        j["flat"] = fit.flat;
        j["rising"] = fit.rising;
        j["degenerate_ks"] = curve.degenerate_ks;
        std::ofstream jf(dir / "changepoint.json");
        jf << j.dump(2) << '\n';
        if (global.json_out())
            std::cout << j.dump(2) << '\n';
        else
            std::cout << "k_hat: " << fit.k_hat << " (psi " << fit.psi << ")\n";
    });

    // ---- classify / classify-zones ----
    nc::RunConfig cls_cfg;
    NetworkOpts cls_net;
    PointOpts cls_pts;
    int cls_k = 0;
    bool cls_auto = false;
    int cls_kmax = 35;
    std::string cls_partition;

    auto attach_classify = [&](CLI::App* sub) {
        sub->fallthrough();
        cls_net.attach(sub);
        cls_pts.attach(sub);
        sub->add_option("--k", cls_k, "fixed neighbour order");
        sub->add_flag("--auto", cls_auto, "select k from the entropy changepoint");
        sub->add_option("--k-max", cls_kmax, "largest k for --auto")->capture_default_str();
        sub->add_option("--em-tol", cls_cfg.em.tol, "EM convergence tolerance")
            ->capture_default_str();
        sub->add_option("--em-max-iter", cls_cfg.em.max_iter, "EM iteration cap")
            ->capture_default_str();
        sub->add_option("--out", cls_cfg.out_dir, "artifact directory")
            ->capture_default_str();
        sub->add_option("--time-budget", cls_cfg.time_budget_sec,
                        "abort after this many seconds (0 = off)")
            ->capture_default_str();
        sub->add_option("--hist-bins", cls_cfg.hist_bins, "histogram bin count")
            ->capture_default_str();
    };

    auto fill_classify_config = [&] {
        cls_cfg.network_path = cls_net.path;
        cls_cfg.network_format = nc::format_from_string(cls_net.format);
        cls_cfg.merge_tol = cls_net.merge_tol;
        cls_cfg.unit = cls_net.unit;
        cls_cfg.points_path = cls_pts.path;
        cls_cfg.points_format = nc::format_from_string(cls_pts.format);
        cls_cfg.snap_tol = cls_pts.snap_tol;
        cls_cfg.threads = global.threads;
        cls_cfg.seed = global.seed;
        if (cls_auto) {
            cls_cfg.k_policy = {nc::KMode::automatic, 0, cls_kmax};
        } else {
            if (cls_k < 1)
                throw nc::ValidationError("pass --k N or --auto");
            cls_cfg.k_policy = {nc::KMode::fixed, cls_k, cls_kmax};
        }
    };

    auto* cls_cmd = app.add_subcommand("classify", "label points as feature or clutter");
    cls_cfg.out_dir = "netclutter_out";
    attach_classify(cls_cmd);
    cls_cmd->callback([&] {
        fill_classify_config();
        const nc::PipelineResult result = nc::pipeline(cls_cfg);
        report_snaps(result.snap);
        const nc::MixtureFit& fit = result.core.classification.fit;
        json j;
        j["schema_version"] = nc::kSchemaVersion;
        j["k"] = result.core.k_used;
        j["lambda1"] = fit.lambda1;
        j["lambda2"] = fit.lambda2;
        j["p"] = fit.p;
        j["converged"] = fit.converged;
        j["n_points"] = result.core.classification.labels.size();
        j["n_feature"] =
            std::count(result.core.classification.labels.begin(),
                       result.core.classification.labels.end(), nc::Label::feature);
        j["artifacts"] = json::array();
        for (const auto& a : result.artifacts) j["artifacts"].push_back(a.string());
        if (global.json_out())
            std::cout << j.dump(2) << '\n';
        else
            std::cout << "k: " << result.core.k_used << "\nlambda1: " << fit.lambda1
                      << "\nlambda2: " << fit.lambda2 << "\np: " << fit.p
                      << "\nfeature points: " << j["n_feature"].get<long long>() << " of "
                      << result.core.classification.labels.size() << "\nartifacts in: "
                      << cls_cfg.out_dir.string() << '\n';
    });

    auto* zone_cmd =
        app.add_subcommand("classify-zones", "run the classifier independently per zone");
    attach_classify(zone_cmd);
    zone_cmd->add_option("--partition", cls_partition, "CSV segment_id,zone_id")->required();
    zone_cmd->add_flag("--allow-partial", cls_cfg.allow_partial,
                       "accept skipped or failed zones (exit 4)");
    zone_cmd->callback([&] {
        fill_classify_config();
        cls_cfg.partition_path = cls_partition;
        const nc::PartitionedResult result = nc::classify_partitioned(cls_cfg);
        report_snaps(result.snap);
        json j;
        j["schema_version"] = nc::kSchemaVersion;
        j["zones"] = result.zones.size();
        j["zones_ok"] = result.zones_ok;
        j["partial"] = result.partial;
        for (const auto& z : result.zones)
            if (z.status != "ok")
                j["problems"].push_back({{"zone", z.zone_id}, {"status", z.status}});
        if (global.json_out())
            std::cout << j.dump(2) << '\n';
        else {
            std::cout << "zones ok: " << result.zones_ok << " of " << result.zones.size()
                      << '\n';
            for (const auto& z : result.zones)
                if (z.status != "ok") std::cout << "  " << z.zone_id << ": " << z.status << '\n';
        }
        if (result.partial) {
            bool any_failed = false;
            for (const auto& z : result.zones)
                if (z.status.rfind("failed", 0) == 0) any_failed = true;
            if (cls_cfg.allow_partial) {
                exit_code = 4;
            } else {
                emit_error(any_failed ? "degenerate" : "validation",
                           "some zones were skipped or failed; pass --allow-partial to accept");
                exit_code = any_failed ? 3 : 2;
            }
        }
    });

    // ---- rates: replicate a design and tabulate classification rates ----
    auto* rates_cmd = app.add_subcommand("rates", "classification rates over design replicates");
    rates_cmd->fallthrough();
    std::string rates_design;
    std::optional<int> rates_reps;
    std::optional<std::uint64_t> rates_seed;
    std::string rates_out = "netclutter_out";
    rates_cmd->add_option("--design", rates_design, "design file (JSON)")->required();
    rates_cmd->add_option("--reps", rates_reps, "override replicate count");
    rates_cmd->add_option("--design-seed", rates_seed, "override the design seed");
    rates_cmd->add_option("--out", rates_out, "artifact directory")->capture_default_str();
    rates_cmd->callback([&] {
        nc::LoadedDesign design = nc::load_design(rates_design);
        if (rates_reps) design.spec.reps = *rates_reps;
        if (rates_seed) design.spec.seed = *rates_seed;
        else if (global.seed != 0) design.spec.seed = global.seed;
        const nc::RatesReport report = nc::run_design(design.spec, global.threads);
        const std::filesystem::path dir = rates_out;
        nc::write_rates_csv(report, dir / (report.design_name + "_rates.csv"));
        nc::write_rep_outcomes_csv(report, dir / (report.design_name + "_reps.csv"));
        {
            std::filesystem::create_directories(dir);
            std::ofstream jf(dir / (report.design_name + "_rates.json"));
            jf << nc::rates_to_json(report) << '\n';
        }
        if (global.json_out()) {
            std::cout << nc::rates_to_json(report) << '\n';
        } else {
            std::cout << "design " << report.design_name << ", " << report.reps
                      << " reps, mean points " << report.mean_total_points << '\n';
            for (const auto& pr : report.policies) {
                std::cout << "  " << pr.policy_label << ": ";
                if (pr.mean_acc)
                    std::cout << "tpr " << (pr.mean_tpr ? std::to_string(*pr.mean_tpr) : "na")
                              << ", fpr " << (pr.mean_fpr ? std::to_string(*pr.mean_fpr) : "na")
                              << ", acc " << std::to_string(*pr.mean_acc);
                else
                    std::cout << "no successful reps";
                if (pr.k_mean) std::cout << ", k_mean " << *pr.k_mean;
                if (pr.failures > 0) std::cout << ", failures " << pr.failures;
                std::cout << '\n';
            }
        }
    });

    // ---- hist: volume histograms over a k range ----
    auto* hist_cmd = app.add_subcommand("hist", "disc-volume histograms for a range of k");
    hist_cmd->fallthrough();
    NetworkOpts hist_net;
    PointOpts hist_pts;
    hist_net.attach(hist_cmd);
    hist_pts.attach(hist_cmd);
    int hist_from = 0, hist_to = 0, hist_bins = 30;
    std::string hist_out = "netclutter_out";
    hist_cmd->add_option("--k-from", hist_from, "first k")->required();
    hist_cmd->add_option("--k-to", hist_to, "last k")->required();
    hist_cmd->add_option("--bins", hist_bins, "bin count")->capture_default_str();
    hist_cmd->add_option("--out", hist_out, "artifact directory")->capture_default_str();
    hist_cmd->callback([&] {
        if (hist_from < 1 || hist_to < hist_from)
            throw nc::ValidationError("need 1 <= k-from <= k-to");
        const nc::LinearNetwork net = hist_net.load();
        const nc::PatternLoad load = nc::read_points(
            hist_pts.path, net, nc::format_from_string(hist_pts.format), hist_pts.snap_tol);
        report_snaps(load.snap);
        if (static_cast<int>(load.points.size()) < hist_to + 1)
            throw nc::ValidationError("insufficient points: need at least k-to + 1");
        std::vector<int> ks;
        for (int k = hist_from; k <= hist_to; ++k) ks.push_back(k);
        const nc::KnnProfile profile = nc::knn_profile(net, load.points, ks, global.threads);
        const std::filesystem::path dir = hist_out;
        for (size_t j = 0; j < ks.size(); ++j) {
            std::vector<double> vols;
            vols.reserve(static_cast<size_t>(profile.s.rows()));
            for (Eigen::Index i = 0; i < profile.s.rows(); ++i) {
                const double v = profile.s(i, static_cast<Eigen::Index>(j));
                if (std::isfinite(v)) vols.push_back(v);
            }
            if (vols.empty())
                throw nc::ValidationError("no finite volumes at k=" + std::to_string(ks[j]));
            const nc::HistogramBins bins = nc::histogram_bins(vols, hist_bins);
            nc::write_histogram_csv(bins, dir / ("hist_k" + std::to_string(ks[j]) + ".csv"));
            nc::svg_histogram(bins, "disc volumes at k=" + std::to_string(ks[j]), "s_k",
                              dir / ("hist_k" + std::to_string(ks[j]) + ".svg"));
        }
        if (global.json_out()) {
            json j;
            j["schema_version"] = nc::kSchemaVersion;
            j["k_from"] = hist_from;
            j["k_to"] = hist_to;
            j["out"] = hist_out;
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << "wrote " << ks.size() << " histograms to " << hist_out << '\n';
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const nc::ValidationError& e) {
        emit_error("validation", e.what());
        return 2;
    } catch (const nc::IoError& e) {
        emit_error("io", e.what());
        return 2;
    } catch (const nc::DegenerateFitError& e) {
        emit_error("degenerate", e.what());
        return 3;
    } catch (const nc::TimeBudgetError& e) {
        emit_error("time_budget", e.what());
        return 4;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return exit_code;
}
