#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "netclutter/k_selection.hpp"

namespace netclutter {

// Self-contained SVG writers so plots need no external tooling. Every plot
// has a CSV twin written elsewhere; these are the visual copies.

// Scatter-with-line of (x, y) pairs. When fit is given, the piecewise
// regression line is drawn dashed with a vertical marker at the changepoint.
void svg_line_plot(std::span<const double> xs, std::span<const double> ys,
                   const std::optional<SegmentedFit>& fit, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::filesystem::path& path);

struct HistogramBins {
    std::vector<double> edges;   // n_bins + 1
    std::vector<long long> counts;  // n_bins
};

HistogramBins histogram_bins(std::span<const double> values, int n_bins);

void write_histogram_csv(const HistogramBins& bins, const std::filesystem::path& path);

void svg_histogram(const HistogramBins& bins, const std::string& title,
                   const std::string& x_label, const std::filesystem::path& path);

}  // namespace netclutter
