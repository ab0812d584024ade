#include "netclutter/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netclutter {

namespace {

void validate_shape_rate(int k, double rate, const char* what) {
    if (k < 1) throw ValidationError("shape k must be >= 1");
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw ValidationError(std::string(what) + " must be positive and finite");
}

void validate_volumes(const Eigen::ArrayXd& volumes) {
    if (volumes.size() == 0) throw ValidationError("volumes must be nonempty");
    for (Eigen::Index i = 0; i < volumes.size(); ++i) {
        const double s = volumes[i];
        if (!(s > 0.0) || !std::isfinite(s))
            throw ValidationError("volumes must be positive and finite");
    }
}

// log p * f(x; k, rate) pair for both components, as arrays.
struct LogWeighted {
    Eigen::ArrayXd a;  // log(p)   + log f(x; k, lambda1)
    Eigen::ArrayXd b;  // log(1-p) + log f(x; k, lambda2)
};

LogWeighted log_weighted_densities(const Eigen::ArrayXd& volumes, int k, double lambda1,
                                   double lambda2, double p) {
    const double lg = std::lgamma(static_cast<double>(k));
    const double c1 = std::log(p) + k * std::log(lambda1) - lg;
    const double c2 = std::log1p(-p) + k * std::log(lambda2) - lg;
    LogWeighted out;
    if (k == 1) {
        out.a = c1 - lambda1 * volumes;
        out.b = c2 - lambda2 * volumes;
    } else {
        const Eigen::ArrayXd logx = volumes.log();
        out.a = c1 + (k - 1) * logx - lambda1 * volumes;
        out.b = c2 + (k - 1) * logx - lambda2 * volumes;
    }
    return out;
}

double rate_from_weighted(const Eigen::ArrayXd& volumes, int k, const Eigen::ArrayXd& weight) {
    return static_cast<double>(k) * weight.sum() / (volumes * weight).sum();
}

}  // namespace

double log_gamma_pdf(double x, int k, double rate) {
    validate_shape_rate(k, rate, "rate");
    if (!(x > 0.0) || !std::isfinite(x))
        throw ValidationError("gamma density needs x > 0 and finite");
    double v = k * std::log(rate) - rate * x - std::lgamma(static_cast<double>(k));
    if (k > 1) v += (k - 1) * std::log(x);
    return v;
}

double gamma_pdf(double x, int k, double rate) { return std::exp(log_gamma_pdf(x, k, rate)); }

double mle_rate(const Eigen::ArrayXd& volumes, int k) {
    if (k < 1) throw ValidationError("shape k must be >= 1");
    validate_volumes(volumes);
    return rate_from_weighted(volumes, k, Eigen::ArrayXd::Ones(volumes.size()));
}

double mle_rate(std::span<const double> volumes, int k) {
    Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(volumes.data(),
                                                        static_cast<Eigen::Index>(volumes.size()));
    return mle_rate(v, k);
}

Eigen::ArrayXd em_e_step(const Eigen::ArrayXd& volumes, int k, double lambda1, double lambda2,
                         double p) {
    validate_shape_rate(k, lambda1, "lambda1");
    validate_shape_rate(k, lambda2, "lambda2");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must lie in [0,1]");
    validate_volumes(volumes);
    // Identical components: the density ratio is 1 regardless of x, so the
    // posterior is the prior, exactly.
    if (lambda1 == lambda2) return Eigen::ArrayXd::Constant(volumes.size(), p);
    const LogWeighted lw = log_weighted_densities(volumes, k, lambda1, lambda2, p);
    // delta = 1 / (1 + exp(b - a)); the endpoint mixing weights behave via
    // log(0) = -inf (delta 0 or 1 exactly).
    Eigen::ArrayXd delta(volumes.size());
    for (Eigen::Index i = 0; i < volumes.size(); ++i) {
        const double gap = lw.b[i] - lw.a[i];
        if (std::isnan(gap)) {
            // both weighted densities underflowed to -inf; split evenly
            delta[i] = 0.5;
        } else {
            delta[i] = 1.0 / (1.0 + std::exp(gap));
        }
    }
    return delta;
}

EmInit em_m_step(const Eigen::ArrayXd& volumes, int k, const Eigen::ArrayXd& delta) {
    if (k < 1) throw ValidationError("shape k must be >= 1");
    if (delta.size() != volumes.size()) throw ValidationError("delta/volumes length mismatch");
    validate_volumes(volumes);
    EmInit out;
    const Eigen::ArrayXd anti = 1.0 - delta;
    out.lambda1 = rate_from_weighted(volumes, k, delta);
    out.lambda2 = rate_from_weighted(volumes, k, anti);
    out.p = delta.sum() / static_cast<double>(volumes.size());
    return out;
}

double mixture_loglik(const Eigen::ArrayXd& volumes, int k, double lambda1, double lambda2,
                      double p) {
    const LogWeighted lw = log_weighted_densities(volumes, k, lambda1, lambda2, p);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < volumes.size(); ++i) {
        const double m = std::max(lw.a[i], lw.b[i]);
        if (m == -std::numeric_limits<double>::infinity()) {
            ll = -std::numeric_limits<double>::infinity();
            break;
        }
        ll += m + std::log(std::exp(lw.a[i] - m) + std::exp(lw.b[i] - m));
    }
    return ll;
}

MixtureFit em_fit(const Eigen::ArrayXd& volumes, int k, std::optional<EmInit> init, double tol,
                  int max_iter) {
    if (k < 1) throw ValidationError("shape k must be >= 1");
    if (volumes.size() < 2) throw ValidationError("em_fit needs at least 2 volumes");
    validate_volumes(volumes);
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");

    MixtureFit fit;
    fit.shape = k;
    const Eigen::Index n = volumes.size();

    if (init) {
        validate_shape_rate(k, init->lambda1, "lambda1");
        validate_shape_rate(k, init->lambda2, "lambda2");
        if (!(init->p > 0.0 && init->p < 1.0))
            throw ValidationError("initial p must lie strictly inside (0,1)");
        fit.lambda1 = init->lambda1;
        fit.lambda2 = init->lambda2;
        fit.p = init->p;
    } else {
        // Median split: the smaller volumes seed the high-rate component.
        std::vector<double> sorted(volumes.data(), volumes.data() + n);
        std::sort(sorted.begin(), sorted.end());
        const size_t half = sorted.size() / 2;
        double lower = 0.0, upper = 0.0;
        for (size_t i = 0; i < half; ++i) lower += sorted[i];
        for (size_t i = half; i < sorted.size(); ++i) upper += sorted[i];
        fit.lambda1 = k * static_cast<double>(half) / lower;
        fit.lambda2 = k * static_cast<double>(sorted.size() - half) / upper;
        fit.p = 0.5;
    }

    double ll = mixture_loglik(volumes, k, fit.lambda1, fit.lambda2, fit.p);
    fit.loglik_trace.push_back(ll);
    const double weight_floor = 1e-12 * static_cast<double>(n);

    for (int it = 0; it < max_iter; ++it) {
        fit.delta = em_e_step(volumes, k, fit.lambda1, fit.lambda2, fit.p);
        const double w = fit.delta.sum();
        if (w < weight_floor || w > static_cast<double>(n) - weight_floor) {
            fit.degenerate = true;
            break;
        }
        const EmInit next = em_m_step(volumes, k, fit.delta);
        if (!std::isfinite(next.lambda1) || !std::isfinite(next.lambda2) ||
            !(next.lambda1 > 0.0) || !(next.lambda2 > 0.0)) {
            fit.degenerate = true;
            break;
        }
        fit.lambda1 = next.lambda1;
        fit.lambda2 = next.lambda2;
        fit.p = next.p;
        ++fit.iterations;
        const double prev = ll;
        ll = mixture_loglik(volumes, k, fit.lambda1, fit.lambda2, fit.p);
        fit.loglik_trace.push_back(ll);
        if (std::abs(ll - prev) < tol * std::max(1.0, std::abs(prev))) {
            fit.converged = true;
            break;
        }
    }

    // Refresh posteriors at the final parameters, then normalise labels so
    // component 1 carries the higher rate.
    if (!fit.degenerate) {
        fit.delta = em_e_step(volumes, k, fit.lambda1, fit.lambda2, fit.p);
        if (fit.lambda1 < fit.lambda2) {
            std::swap(fit.lambda1, fit.lambda2);
            fit.p = 1.0 - fit.p;
            fit.delta = 1.0 - fit.delta;
        }
    }
    return fit;
}

MixtureFit em_fit(std::span<const double> volumes, int k, std::optional<EmInit> init, double tol,
                  int max_iter) {
    Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(volumes.data(),
                                                        static_cast<Eigen::Index>(volumes.size()));
    return em_fit(v, k, init, tol, max_iter);
}

double density_crossing(const MixtureFit& fit) {
    if (fit.lambda1 == fit.lambda2) return std::numeric_limits<double>::infinity();
    return fit.shape * (std::log(fit.lambda1) - std::log(fit.lambda2)) /
           (fit.lambda1 - fit.lambda2);
}

Classification classify(const MixtureFit& fit, const Eigen::ArrayXd& volumes) {
    if (fit.degenerate) throw DegenerateFitError("cannot classify from a degenerate fit");
    validate_shape_rate(fit.shape, fit.lambda1, "lambda1");
    validate_shape_rate(fit.shape, fit.lambda2, "lambda2");
    validate_volumes(volumes);
    Classification out;
    out.fit = fit;
    out.k = fit.shape;
    out.tie = fit.lambda1 == fit.lambda2;
    out.labels.resize(static_cast<size_t>(volumes.size()));
    for (Eigen::Index i = 0; i < volumes.size(); ++i) {
        const double l1 = log_gamma_pdf(volumes[i], fit.shape, fit.lambda1);
        const double l2 = log_gamma_pdf(volumes[i], fit.shape, fit.lambda2);
        out.labels[static_cast<size_t>(i)] = l1 >= l2 ? Label::feature : Label::clutter;
    }
    return out;
}

double entropy(const Eigen::ArrayXd& delta) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
        const double d = delta[i];
        if (!(d >= 0.0 && d <= 1.0)) throw ValidationError("delta values must lie in [0,1]");
        if (d > 0.0) e -= d * std::log2(d);
    }
    return e;
}

double entropy(std::span<const double> delta) {
    Eigen::ArrayXd d = Eigen::Map<const Eigen::ArrayXd>(delta.data(),
                                                        static_cast<Eigen::Index>(delta.size()));
    return entropy(d);
}

}  // namespace netclutter
