#include "draformer/svg_plot.hpp"

#include "draformer/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace draformer {

namespace {

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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::vector<PlotLine>& lines, int width, int height) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& l : lines) {
    if (l.x.size() != l.y.size()) throw DimensionError("line_plot_svg: x and y lengths differ for '" + l.label + "'");
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
      x0 = std::min(x0, l.x[i]);
      x1 = std::max(x1, l.x[i]);
      y0 = std::min(y0, l.y[i]);
      y1 = std::max(y1, l.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 60, right = 20, top = 40, bottom = 40;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
     << escape(title) << "</text>\n";
  os << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  os << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = y0 + (y1 - y0) * i / 4.0;
    const double xv = x0 + (x1 - x0) * i / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
    os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << num(xv)
       << "</text>\n";
  }
  os << "</g>\n";
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& l = lines[k];
    os << "<polyline fill=\"none\" stroke=\"" << escape(l.color) << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < l.x.size(); ++i) {
      if (!std::isfinite(l.x[i]) || !std::isfinite(l.y[i])) continue;
      os << (first ? "" : " ") << num(sx(l.x[i])) << ',' << num(sy(l.y[i]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(k) + 6;
    os << "<line x1=\"" << left + pw - 130 << "\" y1=\"" << ly << "\" x2=\"" << left + pw - 110 << "\" y2=\"" << ly
       << "\" stroke=\"" << escape(l.color) << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw - 104 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(l.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string prediction_svg(const std::string& title, const Matrix& history, const Matrix& actual,
                           const Matrix& predicted, Index variable) {
  if (variable < 0 || variable >= history.cols() || actual.cols() != history.cols() ||
      predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw DimensionError("prediction_svg: inconsistent window shapes or variable index");
  }
  PlotLine hist{"history", "#555555", {}, {}};
  PlotLine truth{"ground truth", "#1f77b4", {}, {}};
  PlotLine pred{"prediction", "#d62728", {}, {}};
  const Index L = history.rows();
  for (Index t = 0; t < L; ++t) {
    hist.x.push_back(static_cast<double>(t));
    hist.y.push_back(history(t, variable));
  }
  // Both future lines start at the last observed point so they join the history.
  for (PlotLine* line : {&truth, &pred}) {
    line->x.push_back(static_cast<double>(L - 1));
    line->y.push_back(history(L - 1, variable));
  }
  for (Index t = 0; t < actual.rows(); ++t) {
    truth.x.push_back(static_cast<double>(L + t));
    truth.y.push_back(actual(t, variable));
    pred.x.push_back(static_cast<double>(L + t));
    pred.y.push_back(predicted(t, variable));
  }
  return line_plot_svg(title, {hist, truth, pred});
}

}  // namespace draformer
