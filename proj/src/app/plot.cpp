#include "tcsim/app/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tcsim/csv.hpp"
#include "tcsim/error.hpp"

namespace tcsim::app {

namespace {

double parse_number(const std::string& text, std::size_t line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v))
        throw ParseError("sweep CSV line " + std::to_string(line) + ": bad number '" + text + "'");
    return v;
}

std::string fmt(double v, int precision = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string shortest(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

Curve parse_curve(std::string_view csv_text) {
    auto rows = csv::parse(csv_text);
    if (rows.empty() || rows[0].fields.size() != 2 || rows[0].fields[1] != "f_score" ||
        (rows[0].fields[0] != "k" && rows[0].fields[0] != "threshold"))
        throw ParseError("sweep CSV: expected header 'k,f_score' or 'threshold,f_score'");
    Curve c;
    c.x_label = rows[0].fields[0];
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.fields.size() != 2) throw ParseError("sweep CSV line " + std::to_string(r.line) + ": expected 2 fields");
        c.x.push_back(parse_number(r.fields[0], r.line));
        c.f.push_back(parse_number(r.fields[1], r.line));
    }
    if (c.x.empty()) throw ValidationError("sweep CSV has no data rows");
    const bool prefer_last = c.x_label == "threshold";
    for (std::size_t i = 1; i < c.f.size(); ++i)
        if (c.f[i] > c.f[c.best] || (prefer_last && c.f[i] == c.f[c.best])) c.best = i;
    return c;
}

std::string curve_csv(const Curve& c) {
    std::string out = c.x_label + ",f_score\n";
    for (std::size_t i = 0; i < c.x.size(); ++i) out += shortest(c.x[i]) + "," + shortest(c.f[i]) + "\n";
    return out;
}

std::string curve_svg(const Curve& c, std::string_view title) {
    constexpr double width = 640, height = 400, left = 60, right = 20, top = 40, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    double x_min = *std::min_element(c.x.begin(), c.x.end());
    double x_max = *std::max_element(c.x.begin(), c.x.end());
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double f) { return top + (1.0 - f) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";
    // Axes with F-score gridlines every 0.2.
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double f = i / 5.0;
        svg << "<line x1=\"" << left << "\" y1=\"" << fmt(sy(f)) << "\" x2=\"" << left + plot_w << "\" y2=\""
            << fmt(sy(f)) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << fmt(sy(f) + 4) << "\" text-anchor=\"end\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << fmt(f, 1) << "</text>\n";
    }
    svg << "<text x=\"" << left << "\" y=\"" << height - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << shortest(c.x.front()) << "</text>\n";
    svg << "<text x=\"" << left + plot_w << "\" y=\"" << height - 12
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << shortest(c.x.back())
        << "</text>\n";
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(c.x_label)
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">F-score</text>\n";

    // A single point is drawn as one zero-length segment.
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < c.x.size(); ++i) svg << (i ? " " : "") << fmt(sx(c.x[i])) << "," << fmt(sy(c.f[i]));
    if (c.x.size() == 1) svg << " " << fmt(sx(c.x[0])) << "," << fmt(sy(c.f[0]));
    svg << "\"/>\n";

    const double bx = sx(c.x[c.best]), by = sy(c.f[c.best]);
    svg << "<circle class=\"best\" cx=\"" << fmt(bx) << "\" cy=\"" << fmt(by)
        << "\" r=\"5\" fill=\"#d62728\" data-x=\"" << shortest(c.x[c.best]) << "\" data-f=\"" << shortest(c.f[c.best])
        << "\"/>\n";
    svg << "<text x=\"" << fmt(bx + 8) << "\" y=\"" << fmt(std::max(by - 8, top + 12.0))
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">max F=" << fmt(c.f[c.best], 4) << " at "
        << xml_escape(c.x_label) << "=" << shortest(c.x[c.best]) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace tcsim::app
