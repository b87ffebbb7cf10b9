#include "slic/eval/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "slic/manifest.hpp"

namespace slic {

namespace {

constexpr double kW = 720, kH = 460;
constexpr double kLeft = 70, kRight = 24, kTop = 48, kBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Round the range outward to tidy tick steps.
void nice_range(double& lo, double& hi, double& step) {
  if (!(hi > lo)) {
    double pad = (std::abs(lo) > 1e-12) ? std::abs(lo) * 0.1 : 1.0;
    lo -= pad;
    hi += pad;
  }
  double span = hi - lo;
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double norm = raw / mag;
  double s = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  step = s * mag;
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("write_svg_chart: x/y length mismatch");
    for (double v : s.x) {
      xlo = std::min(xlo, v);
      xhi = std::max(xhi, v);
    }
    for (double v : s.y) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  if (!std::isfinite(xlo) || !std::isfinite(ylo)) {
    xlo = 0;
    xhi = 1;
    ylo = 0;
    yhi = 1;
  }
  double xstep, ystep;
  nice_range(xlo, xhi, xstep);
  nice_range(ylo, yhi, ystep);

  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double v) { return kTop + ph - (v - ylo) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title) << "</text>\n";

  // grid + ticks
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (double v = xlo; v <= xhi + xstep * 0.5; v += xstep) {
    double x = px(v);
    os << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
       << kTop + ph << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << num(v) << "</text>\n";
  }
  for (double v = ylo; v <= yhi + ystep * 0.5; v += ystep) {
    double y = py(v);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw
       << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  os << "</g>\n";

  // axes
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
     << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << xml_escape(xlabel) << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
     << "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << xml_escape(ylabel)
     << "</text>\n";

  // series
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }

  // legend
  double ly = kTop + 10;
  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    os << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << ly << "\" x2=\""
       << kLeft + pw - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + pw - 120 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(series[si].label)
       << "</text>\n";
    ly += 18;
  }

  os << "</svg>\n";
  write_text_atomic(path, os.str());
}

}  // namespace slic
