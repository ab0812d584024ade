#include "netclutter/k_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace netclutter {

EntropyCurve entropy_curve(const KnnProfile& profile, const EmOptions& em) {
    EntropyCurve curve;
    const Eigen::Index n = profile.s.rows();
    for (size_t j = 0; j < profile.ks.size(); ++j) {
        const int k = profile.ks[j];
        const Eigen::ArrayXd volumes = profile.s.col(static_cast<Eigen::Index>(j)).array();
        bool usable = n >= 2;
        for (Eigen::Index i = 0; i < n && usable; ++i)
            usable = volumes[i] > 0.0 && std::isfinite(volumes[i]);
        if (!usable) {
            curve.degenerate_ks.push_back(k);
            continue;
        }
        MixtureFit fit = em_fit(volumes, k, std::nullopt, em.tol, em.max_iter);
        if (fit.degenerate) {
            curve.degenerate_ks.push_back(k);
            continue;
        }
        curve.ks.push_back(k);
        curve.entropies.push_back(entropy(fit.delta));
    }
    return curve;
}

EntropyCurve entropy_curve(const LinearNetwork& net, std::span<const NetPoint> pts, int k_max,
                           int threads, const EmOptions& em) {
    if (k_max < 2) throw ValidationError("k_max must be >= 2");
    if (static_cast<int>(pts.size()) < k_max + 1)
        throw ValidationError("insufficient points: need at least k_max + 1");
    std::vector<int> ks(static_cast<size_t>(k_max));
    std::iota(ks.begin(), ks.end(), 1);
    const KnnProfile profile = knn_profile(net, pts, ks, threads);
    return entropy_curve(profile, em);
}

SegmentedFit fit_segmented(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("xs/ys length mismatch");
    const int n = static_cast<int>(xs.size());
    if (n < 4) throw ValidationError("segmented fit needs at least 4 points");
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw ValidationError("segmented fit needs finite data");

    const double x_min = *std::min_element(xs.begin(), xs.end());
    const double x_max = *std::max_element(xs.begin(), xs.end());

    // The grid is laid out in tenths with integer indices so candidate
    // changepoints like 6.0 are hit exactly.
    const long long lo10 = std::llround(x_min * 10.0);
    const long long hi10 = std::llround(x_max * 10.0);

    SegmentedFit best;
    bool have_best = false;
    Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
    Eigen::MatrixXd design(n, 2);
    design.col(0).setOnes();

    for (long long j10 = lo10; j10 <= hi10; ++j10) {
        const double psi = static_cast<double>(j10) / 10.0;
        int below = 0;
        for (int i = 0; i < n; ++i) {
            const double x = xs[i];
            const double reg = x < psi ? x - psi : 0.0;
            design(i, 1) = reg;
            if (x < psi) ++below;
        }
        double beta, gamma, rss;
        if (below == 0) {
            beta = y.mean();
            gamma = 0.0;
            rss = (y.array() - beta).square().sum();
        } else {
            const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
            beta = coef[0];
            gamma = coef[1];
            rss = (y - design * coef).squaredNorm();
        }
        if (!have_best || rss < best.rss) {
            have_best = true;
            best.beta = beta;
            best.gamma = gamma;
            best.psi = psi;
            best.rss = rss;
            best.flat = below == 0;
        }
    }

    best.rising = best.gamma > 0.0;
    const double clamped = std::clamp(best.psi, x_min, x_max);
    best.k_hat = static_cast<int>(std::llround(clamped));
    best.k_hat = std::clamp(best.k_hat, static_cast<int>(std::llround(x_min)),
                            static_cast<int>(std::llround(x_max)));
    return best;
}

SegmentedFit fit_segmented(const EntropyCurve& curve) {
    std::vector<double> xs(curve.ks.begin(), curve.ks.end());
    return fit_segmented(xs, curve.entropies);
}

int select_k(const LinearNetwork& net, std::span<const NetPoint> pts, const KPolicy& policy,
             int threads, const EmOptions& em) {
    if (policy.mode == KMode::fixed) {
        if (policy.fixed_k < 1) throw ValidationError("fixed k must be >= 1");
        return policy.fixed_k;
    }
    const EntropyCurve curve = entropy_curve(net, pts, policy.k_max, threads, em);
    return fit_segmented(curve).k_hat;
}

}  // namespace netclutter
