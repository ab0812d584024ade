#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "netclutter/types.hpp"

namespace netclutter {

// Density of a Gamma(k, rate) variable at x, integer shape. Internals work in
// log space so large shapes stay finite.
double log_gamma_pdf(double x, int k, double rate);
double gamma_pdf(double x, int k, double rate);

// Closed-form rate estimate n*k / sum(volumes).
double mle_rate(std::span<const double> volumes, int k);
double mle_rate(const Eigen::ArrayXd& volumes, int k);

struct EmInit {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double p = 0.5;
};

struct EmOptions {
    double tol = 1e-8;
    int max_iter = 1000;
};

// Two-component same-shape Gamma mixture fit. Component 1 is the
// feature candidate: after label normalisation lambda1 >= lambda2, so
// component 1 concentrates on the smaller volumes. delta holds the posterior
// probability of component 1 per observation. loglik_trace has the
// log-likelihood at the initial parameters followed by one entry per
// iteration.
struct MixtureFit {
    int shape = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double p = 0.0;
    Eigen::ArrayXd delta;
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
};

// Posterior weight of component 1 for each volume, computed from log
// densities so extreme rates cannot overflow.
Eigen::ArrayXd em_e_step(const Eigen::ArrayXd& volumes, int k, double lambda1, double lambda2,
                         double p);

// Weighted rate-and-mixing update. With delta identically 1 the lambda1
// update reproduces mle_rate(volumes, k) bitwise.
EmInit em_m_step(const Eigen::ArrayXd& volumes, int k, const Eigen::ArrayXd& delta);

// Observed-data log-likelihood of the mixture.
double mixture_loglik(const Eigen::ArrayXd& volumes, int k, double lambda1, double lambda2,
                      double p);

// EM iteration until the relative log-likelihood change drops below tol or
// max_iter is hit. Default start splits the volumes at the median: the lower
// half seeds the high-rate component. A collapsing component (total weight
// at 0 or n, or a non-finite rate) stops the loop with degenerate set and
// converged false.
MixtureFit em_fit(const Eigen::ArrayXd& volumes, int k, std::optional<EmInit> init = std::nullopt,
                  double tol = 1e-8, int max_iter = 1000);
MixtureFit em_fit(std::span<const double> volumes, int k,
                  std::optional<EmInit> init = std::nullopt, double tol = 1e-8,
                  int max_iter = 1000);

struct Classification {
    std::vector<Label> labels;
    MixtureFit fit;
    int k = 0;
    // Set when lambda1 == lambda2: the tie rule labelled every point feature.
    bool tie = false;
};

// Volume below which component 1's density wins; equal rates give +inf (the
// tie rule sends everything to feature).
double density_crossing(const MixtureFit& fit);

// Highest-density labelling: feature where component 1's density is at least
// component 2's. Refuses a fit flagged degenerate.
Classification classify(const MixtureFit& fit, const Eigen::ArrayXd& volumes);

// Separation entropy -sum delta_i * log2(delta_i), with 0 log 0 = 0.
double entropy(const Eigen::ArrayXd& delta);
double entropy(std::span<const double> delta);

}  // namespace netclutter
