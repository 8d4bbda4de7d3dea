#include "rkm/cli/svg.hpp"

#include "rkm/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace rkm::cli {
namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v, const char* spec = "%.4g")
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi)
{
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return out;
}

void widen(double& lo, double& hi)
{
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo)) * 0.5;
        lo -= pad;
        hi += pad;
        return;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

} // namespace

std::string render_scatter(const std::vector<ScatterPoint>& points, const ScatterStyle& style)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            continue;
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    if (!std::isfinite(x0)) {
        x0 = y0 = 0.0;
        x1 = y1 = 1.0;
    }
    widen(x0, x1);
    widen(y0, y1);

    const double left = 70, right = 120, top = 40, bottom = 50;
    const double pw = style.width - left - right;
    const double ph = style.height - top - bottom;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
        << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << style.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(style.title)
        << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (double t : ticks(x0, x1)) {
        const double px = sx(t);
        svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt(px) << "\" y2=\"" << top + ph + 4
            << "\" stroke=\"#333\"/><text x=\"" << fmt(px) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
            << fmt(t) << "</text>\n";
    }
    for (double t : ticks(y0, y1)) {
        const double py = sy(t);
        svg << "<line x1=\"" << left - 4 << "\" y1=\"" << fmt(py) << "\" x2=\"" << left << "\" y2=\"" << fmt(py)
            << "\" stroke=\"#333\"/><text x=\"" << left - 7 << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
    }
    if (y0 < 0.0 && y1 > 0.0)
        svg << "<line x1=\"" << left << "\" y1=\"" << fmt(sy(0.0)) << "\" x2=\"" << left + pw << "\" y2=\"" << fmt(sy(0.0))
            << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";

    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << style.height - 12 << "\" text-anchor=\"middle\">"
        << xml_escape(style.x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << xml_escape(style.y_label) << "</text>\n";

    std::map<int, std::size_t> counts;
    for (const auto& p : points)
        ++counts[p.group];
    // One <g> per group keeps the per-point markup short.
    for (const auto& [group, count] : counts) {
        const char* color = kPalette[static_cast<std::size_t>(std::abs(group)) % kPalette.size()];
        svg << "<g fill=\"" << color << "\" fill-opacity=\"0.75\">\n";
        for (const auto& p : points)
            if (p.group == group && std::isfinite(p.x) && std::isfinite(p.y))
                svg << "<circle cx=\"" << fmt(sx(p.x), "%.1f") << "\" cy=\"" << fmt(sy(p.y), "%.1f") << "\" r=\"2\"/>\n";
        svg << "</g>\n";
    }

    double ly = top + 10;
    for (const auto& [group, count] : counts) {
        const char* color = kPalette[static_cast<std::size_t>(std::abs(group)) % kPalette.size()];
        svg << "<circle cx=\"" << left + pw + 16 << "\" cy=\"" << ly << "\" r=\"4\" fill=\"" << color << "\"/><text x=\""
            << left + pw + 26 << "\" y=\"" << ly + 4 << "\">label " << group << " (" << count << ")</text>\n";
        ly += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << contents;
    if (!out)
        throw IoError("write failed for " + path);
}

} // namespace rkm::cli
