#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "netclutter/k_selection.hpp"
#include "netclutter/mixture.hpp"
#include "netclutter/network.hpp"

namespace netclutter {

struct LabelledPattern {
    std::vector<NetPoint> points;
    std::vector<Label> truth;
};

// Homogeneous Poisson pattern: the count is Poisson(lambda * total length),
// each point lands on a segment with probability proportional to its length,
// uniformly along it. Refuses expected counts above 1e8.
std::vector<NetPoint> rpoislpp(const LinearNetwork& net, double lambda, std::mt19937_64& rng);
std::vector<NetPoint> rpoislpp(const SubNetwork& region, double lambda, std::mt19937_64& rng);

struct Layer {
    std::vector<NetPoint> points;
    Label role = Label::clutter;
};

// Concatenates layers in order, carrying each layer's role as ground truth.
LabelledPattern superpose(std::span<const Layer> layers);

// Feature = positive. tpr or fpr is absent when its denominator is empty.
struct Confusion {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> tpr, fpr;
    double acc = 0.0;
};

Confusion confusion(std::span<const Label> truth, std::span<const Label> predicted);

// One intensity layer of a simulation design. Empty region means the full
// network.
struct DesignLayer {
    std::optional<std::vector<int>> region_ids;
    double lambda = 0.0;
    Label role = Label::clutter;
};

struct DesignSpec {
    std::string name;
    const LinearNetwork* network = nullptr;
    std::vector<DesignLayer> layers;
    int reps = 100;
    std::vector<KPolicy> k_policies;
    std::uint64_t seed = 0;
    EmOptions em;
};

struct RepOutcome {
    bool failed = false;
    std::string failure_reason;
    std::optional<double> tpr, fpr;
    double acc = 0.0;
    int k_used = 0;
    long long n_points = 0;
    long long n_feature_truth = 0;
};

struct PolicyRates {
    KPolicy policy;
    std::string policy_label;
    std::vector<RepOutcome> reps;
    int failures = 0;
    std::optional<double> mean_tpr, mean_fpr, mean_acc;
    std::optional<double> k_mean, k_sd;  // automatic policy only
};

struct LayerInfo {
    Label role = Label::clutter;
    double lambda = 0.0;
    double region_length = 0.0;
    double expected_count = 0.0;
};

struct RatesReport {
    std::string design_name;
    std::uint64_t seed = 0;
    int reps = 0;
    std::vector<LayerInfo> layers;
    double mean_total_points = 0.0;
    double mean_feature_points = 0.0;
    std::vector<PolicyRates> policies;
};

std::string policy_label(const KPolicy& policy);

// Runs every replicate of a design under every k policy: simulate, compute
// volumes, fit the mixture, classify, score against the simulation truth.
// Replicate r always consumes RNG substream r of the design seed, so results
// are identical for any worker count. Failed replicates (too few points,
// degenerate fit) are excluded from the averages and counted.
RatesReport run_design(const DesignSpec& spec, int threads = 1);

}  // namespace netclutter
