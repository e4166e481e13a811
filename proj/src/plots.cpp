#include "echovel/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "echovel/geometry.hpp"

namespace echovel {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct BoxSummary {
    double min, q1, median, q3, max;
};

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

BoxSummary box_summary(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {v.front(), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), v.back()};
}

}  // namespace

std::string histogram_svg(const std::vector<double>& a, const std::vector<double>& b,
                          const std::string& label_a, const std::string& label_b) {
    if (a.empty() || b.empty()) {
        throw InvalidInput("histogram needs two non-empty samples");
    }
    double lo = std::min(*std::min_element(a.begin(), a.end()),
                         *std::min_element(b.begin(), b.end()));
    double hi = std::max(*std::max_element(a.begin(), a.end()),
                         *std::max_element(b.begin(), b.end()));
    if (hi == lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    const std::size_t pooled = a.size() + b.size();
    const int bins = std::max(8, std::min(40, static_cast<int>(std::sqrt(
                                                  static_cast<double>(pooled)))));
    const double bin_w = (hi - lo) / bins;

    auto histogram = [&](const std::vector<double>& v) {
        std::vector<int> counts(bins, 0);
        for (double x : v) {
            int idx = static_cast<int>((x - lo) / bin_w);
            idx = std::max(0, std::min(bins - 1, idx));
            ++counts[idx];
        }
        return counts;
    };
    const auto ca = histogram(a);
    const auto cb = histogram(b);
    const int peak = std::max(*std::max_element(ca.begin(), ca.end()),
                              *std::max_element(cb.begin(), cb.end()));

    const double width = 720, height = 420;
    const double px0 = 60, px1 = width - 20;
    const double py0 = 40, py1 = 280;
    const double plot_w = px1 - px0, plot_h = py1 - py0;
    auto xpos = [&](double v) { return px0 + (v - lo) / (hi - lo) * plot_w; };
    auto bar_h = [&](int c) { return plot_h * static_cast<double>(c) / peak; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << px0 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
        << "speed distribution: " << label_a << " vs " << label_b << "</text>\n";

    auto draw_bars = [&](const std::vector<int>& counts, const char* color, double shift) {
        for (int i = 0; i < bins; ++i) {
            if (counts[i] == 0) continue;
            const double x = xpos(lo + i * bin_w) + shift;
            const double h = bar_h(counts[i]);
            svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(py1 - h) << "\" width=\""
                << fmt(plot_w / bins / 2.0 - 1.0) << "\" height=\"" << fmt(h) << "\" fill=\""
                << color << "\" fill-opacity=\"0.7\"/>\n";
        }
    };
    draw_bars(ca, "#1f77b4", 0.0);
    draw_bars(cb, "#d62728", plot_w / bins / 2.0);

    svg << "<line x1=\"" << px0 << "\" y1=\"" << py1 << "\" x2=\"" << px1 << "\" y2=\"" << py1
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double v = lo + (hi - lo) * k / 5.0;
        svg << "<text x=\"" << fmt(xpos(v)) << "\" y=\"" << (py1 + 16)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(v)
            << "</text>\n";
    }

    auto draw_box = [&](const std::vector<double>& v, const char* color, double ypos,
                        const std::string& label) {
        const BoxSummary s = box_summary(v);
        svg << "<line x1=\"" << fmt(xpos(s.min)) << "\" y1=\"" << ypos << "\" x2=\""
            << fmt(xpos(s.max)) << "\" y2=\"" << ypos << "\" stroke=\"" << color << "\"/>\n";
        svg << "<rect x=\"" << fmt(xpos(s.q1)) << "\" y=\"" << (ypos - 10) << "\" width=\""
            << fmt(xpos(s.q3) - xpos(s.q1)) << "\" height=\"20\" fill=\"" << color
            << "\" fill-opacity=\"0.4\" stroke=\"" << color << "\"/>\n";
        svg << "<line x1=\"" << fmt(xpos(s.median)) << "\" y1=\"" << (ypos - 10) << "\" x2=\""
            << fmt(xpos(s.median)) << "\" y2=\"" << (ypos + 10) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << (px0 - 50) << "\" y=\"" << (ypos + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    };
    draw_box(a, "#1f77b4", 330.0, label_a);
    draw_box(b, "#d62728", 380.0, label_b);

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace echovel
