#include "netclutter/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netclutter/geodesics.hpp"
#include "netclutter/parallel.hpp"
#include "netclutter/rng.hpp"

namespace netclutter {

namespace {

std::vector<NetPoint> poisson_on_segments(const LinearNetwork& net,
                                          std::span<const int> segment_ids, double lambda,
                                          std::mt19937_64& rng) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ValidationError("lambda must be positive and finite");
    double total = 0.0;
    std::vector<double> cumulative;
    cumulative.reserve(segment_ids.size());
    for (int sid : segment_ids) {
        total += net.segment(sid).length;
        cumulative.push_back(total);
    }
    const double mean = lambda * total;
    if (mean > 1e8) throw ValidationError("expected point count above 1e8, refusing");
    std::poisson_distribution<long long> count_dist(mean);
    const long long n = count_dist(rng);
    std::uniform_real_distribution<double> pick(0.0, total);
    std::vector<NetPoint> out;
    out.reserve(static_cast<size_t>(n));
    for (long long i = 0; i < n; ++i) {
        const double u = pick(rng);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const size_t idx = std::min(static_cast<size_t>(it - cumulative.begin()),
                                    cumulative.size() - 1);
        const int sid = segment_ids[idx];
        const double lo = idx == 0 ? 0.0 : cumulative[idx - 1];
        const double len = net.segment(sid).length;
        const double offset = std::clamp(u - lo, 0.0, len);
        out.push_back({sid, offset});
    }
    return out;
}

}  // namespace

std::vector<NetPoint> rpoislpp(const LinearNetwork& net, double lambda, std::mt19937_64& rng) {
    std::vector<int> ids(static_cast<size_t>(net.segment_count()));
    std::iota(ids.begin(), ids.end(), 0);
    return poisson_on_segments(net, ids, lambda, rng);
}

std::vector<NetPoint> rpoislpp(const SubNetwork& region, double lambda, std::mt19937_64& rng) {
    return poisson_on_segments(region.parent(), region.segment_ids(), lambda, rng);
}

LabelledPattern superpose(std::span<const Layer> layers) {
    LabelledPattern out;
    for (const auto& layer : layers) {
        for (const auto& p : layer.points) {
            out.points.push_back(p);
            out.truth.push_back(layer.role);
        }
    }
    return out;
}

Confusion confusion(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) throw ValidationError("truth/predicted length mismatch");
    if (truth.empty()) throw ValidationError("confusion needs at least one point");
    Confusion c;
    for (size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == Label::feature;
        const bool p = predicted[i] == Label::feature;
        if (t && p) ++c.tp;
        else if (!t && p) ++c.fp;
        else if (!t && !p) ++c.tn;
        else ++c.fn;
    }
    if (c.tp + c.fn > 0) c.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.fp + c.tn > 0) c.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
    c.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(truth.size());
    return c;
}

std::string policy_label(const KPolicy& policy) {
    if (policy.mode == KMode::fixed) return "fixed" + std::to_string(policy.fixed_k);
    return "auto" + std::to_string(policy.k_max);
}

namespace {

void validate_design(const DesignSpec& spec) {
    if (spec.network == nullptr) throw ValidationError("design has no network");
    if (spec.reps < 1) throw ValidationError("reps must be >= 1");
    if (spec.layers.empty()) throw ValidationError("design needs at least one layer");
    bool has_clutter = false, has_feature = false;
    for (const auto& layer : spec.layers) {
        if (!(layer.lambda > 0.0) || !std::isfinite(layer.lambda))
            throw ValidationError("layer lambda must be positive and finite");
        if (layer.region_ids) {
            if (layer.region_ids->empty()) throw ValidationError("layer region is empty");
            for (int sid : *layer.region_ids)
                if (sid < 0 || sid >= spec.network->segment_count())
                    throw ValidationError("layer region references unknown segment");
        }
        (layer.role == Label::clutter ? has_clutter : has_feature) = true;
    }
    if (!has_clutter || !has_feature)
        throw ValidationError("design needs at least one clutter and one feature layer");
    if (spec.k_policies.empty()) throw ValidationError("design needs at least one k policy");
    for (const auto& pol : spec.k_policies) {
        if (pol.mode == KMode::fixed && pol.fixed_k < 1)
            throw ValidationError("fixed k must be >= 1");
        if (pol.mode == KMode::automatic && pol.k_max < 2)
            throw ValidationError("k_max must be >= 2");
    }
}

struct RepResult {
    std::vector<RepOutcome> per_policy;
};

}  // namespace

RatesReport run_design(const DesignSpec& spec, int threads) {
    validate_design(spec);
    const LinearNetwork& net = *spec.network;

    // Union of k values any policy needs, so one neighbour pass per rep
    // serves them all.
    int k_top = 0;
    for (const auto& pol : spec.k_policies)
        k_top = std::max(k_top, pol.mode == KMode::fixed ? pol.fixed_k : pol.k_max);
    std::vector<int> all_ks(static_cast<size_t>(k_top));
    std::iota(all_ks.begin(), all_ks.end(), 1);

    const SplitRng root(spec.seed);
    std::vector<RepResult> results(static_cast<size_t>(spec.reps));

    parallel_for(spec.reps, threads, [&](std::int64_t rep, int) {
        std::mt19937_64 rng = root.substream(static_cast<std::uint64_t>(rep));
        std::vector<Layer> layers;
        layers.reserve(spec.layers.size());
        for (const auto& dl : spec.layers) {
            Layer layer;
            layer.role = dl.role;
            if (dl.region_ids) {
                const SubNetwork region(net, *dl.region_ids, false);
                layer.points = rpoislpp(region, dl.lambda, rng);
            } else {
                layer.points = rpoislpp(net, dl.lambda, rng);
            }
            layers.push_back(std::move(layer));
        }
        const LabelledPattern pattern = superpose(layers);
        const long long n = static_cast<long long>(pattern.points.size());
        const long long n_feat = static_cast<long long>(
            std::count(pattern.truth.begin(), pattern.truth.end(), Label::feature));

        RepResult& res = results[static_cast<size_t>(rep)];
        res.per_policy.resize(spec.k_policies.size());

        std::optional<KnnProfile> profile;
        if (n >= 2) {
            const AugmentedGraph graph(net, pattern.points);
            profile = knn_profile(graph, all_ks, 1);
        }

        for (size_t pi = 0; pi < spec.k_policies.size(); ++pi) {
            const KPolicy& pol = spec.k_policies[pi];
            RepOutcome& out = res.per_policy[pi];
            out.n_points = n;
            out.n_feature_truth = n_feat;
            try {
                int k = 0;
                if (pol.mode == KMode::fixed) {
                    k = pol.fixed_k;
                    if (n < k + 1) throw ValidationError("insufficient points for fixed k");
                } else {
                    if (n < pol.k_max + 1)
                        throw ValidationError("insufficient points for k_max");
                    KnnProfile sub;
                    sub.ks.assign(all_ks.begin(), all_ks.begin() + pol.k_max);
                    sub.d = profile->d.leftCols(pol.k_max);
                    sub.s = profile->s.leftCols(pol.k_max);
                    const EntropyCurve curve = entropy_curve(sub, spec.em);
                    k = fit_segmented(curve).k_hat;
                }
                out.k_used = k;
                const Eigen::ArrayXd volumes = profile->s.col(k - 1).array();
                for (Eigen::Index i = 0; i < volumes.size(); ++i)
                    if (!(volumes[i] > 0.0) || !std::isfinite(volumes[i]))
                        throw DegenerateFitError("unusable volume at the chosen k");
                MixtureFit fit = em_fit(volumes, k, std::nullopt, spec.em.tol, spec.em.max_iter);
                if (fit.degenerate) throw DegenerateFitError("mixture fit collapsed");
                const Classification cls = classify(fit, volumes);
                const Confusion c = confusion(pattern.truth, cls.labels);
                out.tpr = c.tpr;
                out.fpr = c.fpr;
                out.acc = c.acc;
            } catch (const std::runtime_error& err) {
                out.failed = true;
                out.failure_reason = err.what();
            }
        }
    });

    RatesReport report;
    report.design_name = spec.name;
    report.seed = spec.seed;
    report.reps = spec.reps;
    for (const auto& dl : spec.layers) {
        LayerInfo info;
        info.role = dl.role;
        info.lambda = dl.lambda;
        if (dl.region_ids) {
            for (int sid : *dl.region_ids) info.region_length += net.segment(sid).length;
        } else {
            info.region_length = net.total_length();
        }
        info.expected_count = dl.lambda * info.region_length;
        report.layers.push_back(info);
    }
    double total_points = 0.0, total_feature = 0.0;
    for (const auto& res : results) {
        total_points += static_cast<double>(res.per_policy.front().n_points);
        total_feature += static_cast<double>(res.per_policy.front().n_feature_truth);
    }
    report.mean_total_points = total_points / spec.reps;
    report.mean_feature_points = total_feature / spec.reps;

    for (size_t pi = 0; pi < spec.k_policies.size(); ++pi) {
        PolicyRates pr;
        pr.policy = spec.k_policies[pi];
        pr.policy_label = policy_label(pr.policy);
        pr.reps.reserve(static_cast<size_t>(spec.reps));
        double sum_tpr = 0, sum_fpr = 0, sum_acc = 0, sum_k = 0, sum_k2 = 0;
        int n_tpr = 0, n_fpr = 0, n_acc = 0, n_ok = 0;
        for (const auto& res : results) {
            const RepOutcome& out = res.per_policy[pi];
            pr.reps.push_back(out);
            if (out.failed) {
                ++pr.failures;
                continue;
            }
            ++n_ok;
            sum_k += out.k_used;
            sum_k2 += static_cast<double>(out.k_used) * out.k_used;
            if (out.tpr) {
                sum_tpr += *out.tpr;
                ++n_tpr;
            }
            if (out.fpr) {
                sum_fpr += *out.fpr;
                ++n_fpr;
            }
            sum_acc += out.acc;
            ++n_acc;
        }
        if (n_tpr > 0) pr.mean_tpr = sum_tpr / n_tpr;
        if (n_fpr > 0) pr.mean_fpr = sum_fpr / n_fpr;
        if (n_acc > 0) pr.mean_acc = sum_acc / n_acc;
        if (pr.policy.mode == KMode::automatic && n_ok > 0) {
            pr.k_mean = sum_k / n_ok;
            if (n_ok > 1) {
                const double var =
                    (sum_k2 - sum_k * sum_k / n_ok) / static_cast<double>(n_ok - 1);
                pr.k_sd = std::sqrt(std::max(0.0, var));
            } else {
                pr.k_sd = 0.0;
            }
        }
        report.policies.push_back(std::move(pr));
    }
    return report;
}

}  // namespace netclutter
