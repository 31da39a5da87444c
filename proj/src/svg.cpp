#include "netfactor/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace netfactor::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

}  // namespace

std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xLabel,
                      const std::string& yLabel) {
    const double W = 640, H = 420, left = 70, right = 160, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    Range xr, yr;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xr.add(s.x[i]);
            const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
            yr.add(s.y[i] - e);
            yr.add(s.y[i] + e);
        }
    xr.finish();
    yr.finish();
    auto X = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto Y = [&](double v) { return top + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
        o << "<text x=\"" << num(X(xv)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">" << tick(xv)
          << "</text>\n";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
          << "</text>\n";
        o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << num(Y(yv)) << "\" y2=\"" << num(Y(yv))
          << "\" stroke=\"#ddd\"/>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 18) << "\" text-anchor=\"middle\">"
      << escape(xLabel) << "</text>\n";
    o << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(yLabel) << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
        std::ostringstream path;
        bool started = false;
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            if (!std::isfinite(sr.y[i]) || !std::isfinite(sr.x[i])) continue;
            path << (started ? " L" : "M") << num(X(sr.x[i])) << ',' << num(Y(sr.y[i]));
            started = true;
        }
        if (started)
            o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        for (std::size_t i = 0; i < sr.x.size(); ++i) {
            if (!std::isfinite(sr.y[i]) || !std::isfinite(sr.x[i])) continue;
            if (i < sr.err.size() && std::isfinite(sr.err[i]) && sr.err[i] > 0)
                o << "<line x1=\"" << num(X(sr.x[i])) << "\" x2=\"" << num(X(sr.x[i])) << "\" y1=\""
                  << num(Y(sr.y[i] - sr.err[i])) << "\" y2=\"" << num(Y(sr.y[i] + sr.err[i])) << "\" stroke=\"" << color
                  << "\"/>\n";
            o << "<circle cx=\"" << num(X(sr.x[i])) << "\" cy=\"" << num(Y(sr.y[i])) << "\" r=\"3.5\" fill=\"" << color
              << "\"/>\n";
        }
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        o << "<rect x=\"" << num(left + pw + 12) << "\" y=\"" << num(ly - 9) << "\" width=\"12\" height=\"12\" fill=\""
          << color << "\"/>\n";
        o << "<text x=\"" << num(left + pw + 30) << "\" y=\"" << num(ly + 1) << "\">" << escape(sr.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string bar_plot(const std::vector<Bar>& bars, const std::string& title, const std::string& valueLabel) {
    const double rowH = 20, left = 170, right = 40, top = 40, bottom = 50, W = 640;
    const double H = top + bottom + rowH * static_cast<double>(std::max<std::size_t>(bars.size(), 1));
    const double pw = W - left - right;
    Range r;
    r.add(0.0);
    for (const auto& b : bars) r.add(b.value);
    r.finish();
    auto X = [&](double v) { return left + (v - r.lo) / (r.hi - r.lo) * pw; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << num(H)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double y = top + rowH * static_cast<double>(i);
        const double x0 = X(std::min(0.0, bars[i].value));
        const double x1 = X(std::max(0.0, bars[i].value));
        o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y + 3) << "\" width=\"" << num(std::max(x1 - x0, 0.5))
          << "\" height=\"" << num(rowH - 6) << "\" fill=\"" << (bars[i].highlighted ? "#d62728" : "#9e9e9e")
          << "\"/>\n";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + rowH / 2 + 4) << "\" text-anchor=\"end\">"
          << escape(bars[i].label) << "</text>\n";
    }
    const double axisY = top + rowH * static_cast<double>(bars.size());
    o << "<line x1=\"" << num(X(0.0)) << "\" x2=\"" << num(X(0.0)) << "\" y1=\"" << top << "\" y2=\"" << num(axisY)
      << "\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = r.lo + (r.hi - r.lo) * t / 4.0;
        o << "<text x=\"" << num(X(v)) << "\" y=\"" << num(axisY + 16) << "\" text-anchor=\"middle\">" << tick(v)
          << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(axisY + 36) << "\" text-anchor=\"middle\">"
      << escape(valueLabel) << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

}  // namespace netfactor::svg
