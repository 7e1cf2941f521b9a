#include "pfsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pfsim {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// black -> blue -> yellow -> white ramp on t in [0,1]
std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.35) {
        double u = t / 0.35;
        r = 0;
        g = 0;
        b = static_cast<int>(40 + 180 * u);
    } else if (t < 0.75) {
        double u = (t - 0.35) / 0.40;
        r = static_cast<int>(255 * u);
        g = static_cast<int>(220 * u);
        b = static_cast<int>(220 * (1.0 - u));
    } else {
        double u = (t - 0.75) / 0.25;
        r = 255;
        g = static_cast<int>(220 + 35 * u);
        b = static_cast<int>(255 * u);
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string svg_heatmap(const CorrelationMap& map, const std::string& title) {
    const int ns = static_cast<int>(map.signal_axis.size());
    const int ni = static_cast<int>(map.idler_axis.size());
    if (ns < 1 || ni < 1) throw std::invalid_argument("svg_heatmap: empty map");
    const double plot_w = 480.0, plot_h = 480.0, margin = 60.0;
    const double cw = plot_w / ns, ch = plot_h / ni;
    double vmax = *std::max_element(map.values.begin(), map.values.end());
    if (!(vmax > 0.0)) vmax = 1.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot_w + 2 * margin
       << "\" height=\"" << plot_h + 2 * margin << "\">\n";
    os << "<text x=\"" << margin << "\" y=\"" << margin - 20
       << "\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    for (int is = 0; is < ns; ++is)
        for (int ii = 0; ii < ni; ++ii) {
            double v = map.values[static_cast<std::size_t>(is) * ni + ii] / vmax;
            // idler index grows upward on the page
            os << "<rect x=\"" << num(margin + is * cw) << "\" y=\""
               << num(margin + plot_h - (ii + 1) * ch) << "\" width=\"" << num(cw + 0.5)
               << "\" height=\"" << num(ch + 0.5) << "\" fill=\"" << heat_color(v) << "\"/>\n";
        }
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << margin << "\" y=\"" << margin + plot_h + 30
       << "\" font-family=\"sans-serif\" font-size=\"12\">signal "
       << num(map.signal_axis.front() * 1e3) << " .. " << num(map.signal_axis.back() * 1e3)
       << " mrad</text>\n";
    os << "<text x=\"10\" y=\"" << margin - 5
       << "\" font-family=\"sans-serif\" font-size=\"12\">idler "
       << num(map.idler_axis.front() * 1e3) << " .. " << num(map.idler_axis.back() * 1e3)
       << " mrad</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string svg_profile(const Profile& profile, const std::string& title) {
    if (profile.x.size() < 2) throw std::invalid_argument("svg_profile: too few points");
    const double plot_w = 560.0, plot_h = 360.0, margin = 60.0;
    double xmin = profile.x.front(), xmax = profile.x.back();
    double ymin = *std::min_element(profile.value.begin(), profile.value.end());
    double ymax = *std::max_element(profile.value.begin(), profile.value.end());
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    ymin = std::min(ymin, 0.0);
    auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) { return margin + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot_w + 2 * margin
       << "\" height=\"" << plot_h + 2 * margin << "\">\n";
    os << "<text x=\"" << margin << "\" y=\"" << margin - 20
       << "\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot_w
       << "\" height=\"" << plot_h << "\" fill=\"white\" stroke=\"black\"/>\n";
    if (ymin < 0.0 && ymax > 0.0)
        os << "<line x1=\"" << margin << "\" y1=\"" << num(py(0.0)) << "\" x2=\""
           << margin + plot_w << "\" y2=\"" << num(py(0.0))
           << "\" stroke=\"#bbbbbb\"/>\n";
    for (size_t i = 0; i < profile.x.size(); ++i) {
        if (i < profile.error.size() && profile.error[i] > 0.0)
            os << "<line x1=\"" << num(px(profile.x[i])) << "\" y1=\""
               << num(py(profile.value[i] - profile.error[i])) << "\" x2=\""
               << num(px(profile.x[i])) << "\" y2=\""
               << num(py(profile.value[i] + profile.error[i]))
               << "\" stroke=\"#888888\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#c02020\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < profile.x.size(); ++i)
        os << num(px(profile.x[i])) << "," << num(py(profile.value[i])) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << margin + plot_w / 2 - 40 << "\" y=\"" << margin + plot_h + 35
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << num(xmin * 1e3) << " .. "
       << num(xmax * 1e3) << " mrad</text>\n";
    os << "</svg>\n";
    return os.str();
}

void save_svg(const std::string& svg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path);
    out << svg;
}

}  // namespace pfsim
