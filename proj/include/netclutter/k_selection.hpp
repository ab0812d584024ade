#pragma once

#include <span>
#include <vector>

#include "netclutter/geodesics.hpp"
#include "netclutter/mixture.hpp"
#include "netclutter/network.hpp"

namespace netclutter {

// Separation entropy per k. Entries exist only for the k values whose
// mixture fit succeeded; the rest are listed in degenerate_ks.
struct EntropyCurve {
    std::vector<int> ks;
    std::vector<double> entropies;
    std::vector<int> degenerate_ks;
};

// Least-squares fit of a line that bends to a flat plateau at psi:
// E[Y|x] = beta + gamma * (x - psi) for x < psi, and beta afterwards.
struct SegmentedFit {
    double beta = 0.0;
    double gamma = 0.0;
    double psi = 0.0;
    double rss = 0.0;
    int k_hat = 0;
    bool flat = false;    // best candidate has no active slope points
    bool rising = false;  // gamma > 0, an odd shape worth flagging
};

// Fits and entropies for k = 1..k_max, from one shared neighbour-distance
// pass. Needs at least k_max + 1 points.
EntropyCurve entropy_curve(const LinearNetwork& net, std::span<const NetPoint> pts, int k_max,
                           int threads = 1, const EmOptions& em = {});

// Same computation over an existing profile (columns are the profile's ks).
EntropyCurve entropy_curve(const KnnProfile& profile, const EmOptions& em = {});

// Exhaustive changepoint search on a 0.1-step grid over [min k, max k]; each
// candidate is an ordinary least-squares solve and the smallest-RSS psi wins
// (first hit on ties, so the smallest psi). k_hat is round(psi) clamped to
// the k range. Needs at least 4 curve points.
SegmentedFit fit_segmented(const EntropyCurve& curve);
SegmentedFit fit_segmented(std::span<const double> xs, std::span<const double> ys);

enum class KMode { fixed, automatic };

struct KPolicy {
    KMode mode = KMode::automatic;
    int fixed_k = 0;   // used when mode == fixed
    int k_max = 35;    // curve extent when mode == automatic
};

// Either the fixed k verbatim, or round(psi) of the fitted entropy curve.
int select_k(const LinearNetwork& net, std::span<const NetPoint> pts, const KPolicy& policy,
             int threads = 1, const EmOptions& em = {});

}  // namespace netclutter
