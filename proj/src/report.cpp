#include "vrstream/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "vrstream/error.hpp"

namespace vrstream {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    return out;
}

} // namespace

void write_report_csv(const std::string& path, const std::vector<report_row>& rows) {
    std::ofstream out = open_out(path);
    out << "scheme,user,chunk,reward,normalized_reward,missed_fov_tiles\n";
    for (const auto& r : rows)
        out << r.scheme << ',' << r.user << ',' << r.chunk << ',' << fmt(r.reward) << ','
            << fmt(r.normalized_reward) << ',' << r.missed_fov_tiles << '\n';
    if (!out) throw io_error("failed writing " + path);
}

void write_aggregate_csv(const std::string& path, const std::vector<aggregate_row>& rows) {
    std::ofstream out = open_out(path);
    out << "scheme,user,mean_reward\n";
    for (const auto& r : rows)
        out << r.scheme << ',' << r.user << ',' << fmt(r.mean_reward) << '\n';
    if (!out) throw io_error("failed writing " + path);
}

void write_learning_curve_csv(const std::string& path, const std::vector<double>& curve) {
    std::ofstream out = open_out(path);
    out << "iteration,mean_reward\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out << i + 1 << ',' << fmt(curve[i]) << '\n';
    if (!out) throw io_error("failed writing " + path);
}

namespace {

constexpr double kWidth = 860.0, kHeight = 520.0;
constexpr double kLeft = 70.0, kRight = 690.0, kTop = 46.0, kBottom = 466.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

struct axis_range {
    double lo = 0.0, hi = 1.0;
    double scale(double v, double px_lo, double px_hi) const {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

axis_range fit(double lo, double hi, double pad_frac) {
    if (!(lo <= hi)) { lo = 0.0; hi = 1.0; }
    double span = hi - lo;
    if (span <= 0.0) span = std::max(std::fabs(hi), 1.0);
    return {lo - pad_frac * span, hi + pad_frac * span};
}

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

} // namespace

void write_lines_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<plot_series>& series) {
    if (series.empty()) throw data_error("nothing to plot");
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    bool any = false;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            xlo = std::min(xlo, x); xhi = std::max(xhi, x);
            ylo = std::min(ylo, y); yhi = std::max(yhi, y);
            any = true;
        }
    if (!any) throw data_error("nothing to plot");
    const axis_range ax = fit(xlo, xhi, 0.02);
    const axis_range ay = fit(ylo, yhi, 0.05);

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(title) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft
        << "\" height=\"" << kBottom - kTop << "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int t = 0; t <= 5; ++t) {
        const double fx = ax.lo + (ax.hi - ax.lo) * t / 5.0;
        const double fy = ay.lo + (ay.hi - ay.lo) * t / 5.0;
        const double px = ax.scale(fx, kLeft, kRight);
        const double py = ay.scale(fy, kBottom, kTop);
        out << "<line x1=\"" << fmt(px, "%.6g") << "\" y1=\"" << kTop << "\" x2=\""
            << fmt(px, "%.6g") << "\" y2=\"" << kBottom
            << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(py, "%.6g") << "\" x2=\"" << kRight
            << "\" y2=\"" << fmt(py, "%.6g") << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(px, "%.6g") << "\" y=\"" << kBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(fx, "%.4g") << "</text>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(py + 4, "%.6g")
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(fy, "%.4g") << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape_xml(x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 " << (kTop + kBottom) / 2 << ")\">"
        << escape_xml(y_label) << "</text>\n";

    const std::size_t n_colors = sizeof(kPalette) / sizeof(kPalette[0]);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % n_colors];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[i].points)
            out << fmt(ax.scale(x, kLeft, kRight), "%.6g") << ','
                << fmt(ay.scale(y, kBottom, kTop), "%.6g") << ' ';
        out << "\"/>\n";
        const double ly = kTop + 16 + 20 * static_cast<double>(i);
        out << "<line x1=\"" << kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kRight + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kRight + 46 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[i].label)
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw io_error("failed writing " + path);
}

} // namespace vrstream
