#include "netclutter/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "netclutter/io_formats.hpp"

namespace netclutter {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 64;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 48;

struct Scale {
    double lo, hi;
    double px_lo, px_hi;
    double operator()(double v) const {
        if (hi == lo) return (px_lo + px_hi) / 2.0;
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

std::ofstream open_svg(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out;
}

void draw_frame(std::ofstream& out, const Scale& sx, const Scale& sy, const std::string& title,
                const std::string& x_label, const std::string& y_label) {
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
        << kWidth - kMarginLeft - kMarginRight << "\" height=\""
        << kHeight - kMarginTop - kMarginBottom
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(title) << "</text>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << kHeight / 2 << ")\">" << escape_xml(y_label)
        << "</text>\n";
    // four ticks per axis
    for (int i = 0; i <= 3; ++i) {
        const double fx = sx.lo + (sx.hi - sx.lo) * i / 3.0;
        const double px = sx(fx);
        out << "<line x1=\"" << num(px) << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
            << num(px) << "\" y2=\"" << kHeight - kMarginBottom + 5
            << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << num(px) << "\" y=\"" << kHeight - kMarginBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << num(fx) << "</text>\n";
        const double fy = sy.lo + (sy.hi - sy.lo) * i / 3.0;
        const double py = sy(fy);
        out << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << num(py) << "\" x2=\""
            << kMarginLeft << "\" y2=\"" << num(py) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(py + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
            << "</text>\n";
    }
}

}  // namespace

void svg_line_plot(std::span<const double> xs, std::span<const double> ys,
                   const std::optional<SegmentedFit>& fit, const std::string& title,
                   const std::string& x_label, const std::string& y_label,
                   const std::filesystem::path& path) {
    if (xs.size() != ys.size() || xs.empty())
        throw ValidationError("line plot needs equally many xs and ys");
    double x_lo = xs[0], x_hi = xs[0], y_lo = ys[0], y_hi = ys[0];
    for (size_t i = 0; i < xs.size(); ++i) {
        x_lo = std::min(x_lo, xs[i]);
        x_hi = std::max(x_hi, xs[i]);
        y_lo = std::min(y_lo, ys[i]);
        y_hi = std::max(y_hi, ys[i]);
    }
    const double pad = (y_hi - y_lo) * 0.08 + 1e-12;
    y_lo -= pad;
    y_hi += pad;
    const Scale sx{x_lo, x_hi, static_cast<double>(kMarginLeft),
                   static_cast<double>(kWidth - kMarginRight)};
    const Scale sy{y_lo, y_hi, static_cast<double>(kHeight - kMarginBottom),
                   static_cast<double>(kMarginTop)};
    auto out = open_svg(path);
    draw_frame(out, sx, sy, title, x_label, y_label);

    out << "<polyline fill=\"none\" stroke=\"#1660a8\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i) out << num(sx(xs[i])) << ',' << num(sy(ys[i])) << ' ';
    out << "\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
        out << "<circle cx=\"" << num(sx(xs[i])) << "\" cy=\"" << num(sy(ys[i]))
            << "\" r=\"3\" fill=\"#1660a8\"/>\n";

    if (fit) {
        // piecewise model: sloped until psi, flat after
        const double y_at = [&](double x) {
            return x < fit->psi ? fit->beta + fit->gamma * (x - fit->psi) : fit->beta;
        }(x_lo);
        out << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
            << "stroke-dasharray=\"6 4\" points=\"" << num(sx(x_lo)) << ',' << num(sy(y_at))
            << ' ';
        if (fit->psi > x_lo && fit->psi < x_hi)
            out << num(sx(fit->psi)) << ',' << num(sy(fit->beta)) << ' ';
        out << num(sx(x_hi)) << ',' << num(sy(fit->beta)) << "\"/>\n";
        if (fit->psi >= x_lo && fit->psi <= x_hi) {
            out << "<line x1=\"" << num(sx(fit->psi)) << "\" y1=\"" << kMarginTop << "\" x2=\""
                << num(sx(fit->psi)) << "\" y2=\"" << kHeight - kMarginBottom
                << "\" stroke=\"#c0392b\" stroke-width=\"1\" stroke-dasharray=\"2 3\"/>\n";
            out << "<text x=\"" << num(sx(fit->psi) + 4) << "\" y=\"" << kMarginTop + 14
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#c0392b\">psi="
                << num(fit->psi) << "</text>\n";
        }
    }
    out << "</svg>\n";
}

HistogramBins histogram_bins(std::span<const double> values, int n_bins) {
    if (values.empty()) throw ValidationError("histogram needs data");
    if (n_bins < 1) throw ValidationError("histogram needs at least one bin");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;
    HistogramBins bins;
    bins.edges.resize(static_cast<size_t>(n_bins) + 1);
    for (int i = 0; i <= n_bins; ++i)
        bins.edges[static_cast<size_t>(i)] = lo + (hi - lo) * i / n_bins;
    bins.counts.assign(static_cast<size_t>(n_bins), 0);
    for (double v : values) {
        int b = static_cast<int>((v - lo) / (hi - lo) * n_bins);
        b = std::clamp(b, 0, n_bins - 1);
        ++bins.counts[static_cast<size_t>(b)];
    }
    return bins;
}

void write_histogram_csv(const HistogramBins& bins, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "bin_lo,bin_hi,count\n";
    for (size_t i = 0; i < bins.counts.size(); ++i)
        out << format_double(bins.edges[i]) << ',' << format_double(bins.edges[i + 1]) << ','
            << bins.counts[i] << '\n';
}

void svg_histogram(const HistogramBins& bins, const std::string& title,
                   const std::string& x_label, const std::filesystem::path& path) {
    long long max_count = 1;
    for (long long c : bins.counts) max_count = std::max(max_count, c);
    const Scale sx{bins.edges.front(), bins.edges.back(), static_cast<double>(kMarginLeft),
                   static_cast<double>(kWidth - kMarginRight)};
    const Scale sy{0.0, static_cast<double>(max_count),
                   static_cast<double>(kHeight - kMarginBottom),
                   static_cast<double>(kMarginTop)};
    auto out = open_svg(path);
    draw_frame(out, sx, sy, title, x_label, "count");
    for (size_t i = 0; i < bins.counts.size(); ++i) {
        const double x0 = sx(bins.edges[i]);
        const double x1 = sx(bins.edges[i + 1]);
        const double y = sy(static_cast<double>(bins.counts[i]));
        out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\""
            << num(std::max(0.5, x1 - x0 - 1.0)) << "\" height=\""
            << num(static_cast<double>(kHeight - kMarginBottom) - y)
            << "\" fill=\"#1660a8\" fill-opacity=\"0.7\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace netclutter
