#include "contractlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "contractlab/errors.hpp"

namespace contractlab {

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Round step of the form {1, 2, 5} x 10^k giving about n intervals.
double nice_step(double span, int n)
{
    const double raw = span / n;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (f * p >= raw) return f * p;
    return 10.0 * p;
}

} // namespace

std::string render_svg(const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                       const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       int width, int height)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const SvgSeries& s : series) {
        if (s.x.size() != s.y.size()) throw DomainError("svg series '" + s.label + "' has mismatched lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    for (const SvgMarker& m : markers) {
        x0 = std::min(x0, m.x);
        x1 = std::max(x1, m.x);
        y0 = std::min(y0, m.y);
        y1 = std::max(y1, m.y);
    }
    if (!(x1 > x0) || !(y1 > y0)) throw DomainError("svg plot needs a non-degenerate data range");
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - y0) / (y1 - y0) * ph; };

    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double dx = nice_step(x1 - x0, 6), dy = nice_step(y1 - y0, 6);
    for (double t = std::ceil(x0 / dx) * dx; t <= x1 + 1e-12 * dx; t += dx) {
        o << "<line x1=\"" << sx(t) << "\" y1=\"" << mt + ph << "\" x2=\"" << sx(t) << "\" y2=\"" << mt + ph + 5
          << "\" stroke=\"black\"/>";
        o << "<text x=\"" << sx(t) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">" << t << "</text>\n";
    }
    for (double t = std::ceil(y0 / dy) * dy; t <= y1 + 1e-12 * dy; t += dy) {
        o << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(t) << "\" x2=\"" << ml << "\" y2=\"" << sy(t)
          << "\" stroke=\"black\"/>";
        o << "<text x=\"" << ml - 8 << "\" y=\"" << sy(t) + 4 << "\" text-anchor=\"end\">" << t << "</text>\n";
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << escape(xlabel)
      << "</text>\n";
    o << "<text x=\"15\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << mt + ph / 2 << ")\">" << escape(ylabel) << "</text>\n";
    int legend = 0;
    for (const SvgSeries& s : series) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << sx(s.x[i]) << "," << sy(s.y[i]);
        o << "\"/>\n";
        if (!s.label.empty()) {
            const double ly = mt + 15 + 15 * legend++;
            o << "<line x1=\"" << ml + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + 30 << "\" y2=\"" << ly - 4
              << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>";
            o << "<text x=\"" << ml + 35 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
        }
    }
    for (const SvgMarker& m : markers) {
        o << "<circle cx=\"" << sx(m.x) << "\" cy=\"" << sy(m.y) << "\" r=\"3\" fill=\"black\"/>";
        o << "<text x=\"" << sx(m.x) + 5 << "\" y=\"" << sy(m.y) - 5 << "\">" << escape(m.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace contractlab
