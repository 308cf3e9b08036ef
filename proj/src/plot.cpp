#include "fwdrd/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace fwdrd::plot {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x1 == x0 ? 0.5 : (x - x0) / (x1 - x0)) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y1 == y0 ? 0.5 : (y - y0) / (y1 - y0)) * (kHeight - kTop - kBottom);
  }
};

void header(std::ostream& out, const Frame& f, const std::string& title, const std::string& xl,
            const std::string& yl) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  const double xa = kLeft, xb = kWidth - kRight, ya = kHeight - kBottom, yb = kTop;
  out << "<line x1=\"" << xa << "\" y1=\"" << ya << "\" x2=\"" << xb << "\" y2=\"" << ya
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << xa << "\" y1=\"" << ya << "\" x2=\"" << xa << "\" y2=\"" << yb
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << ya + 16 << "\" text-anchor=\"middle\">" << label(xv)
        << "</text>\n";
    out << "<text x=\"" << xa - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << label(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (xa + xb) / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
      << escape(xl) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (ya + yb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (ya + yb) / 2 << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

void write_mrc_svg(const std::vector<Mrc>& curves, std::ostream& out, const std::string& title) {
  Frame f{0, 1, 0, 1};
  bool any = false;
  for (const auto& c : curves)
    for (std::size_t s : c.sizes) {
      const auto x = static_cast<double>(s);
      f.x0 = any ? std::min(f.x0, x) : x;
      f.x1 = any ? std::max(f.x1, x) : x;
      any = true;
    }
  header(out, f, title, "cache size (blocks)", "miss ratio");
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* color = kPalette[i % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < c.sizes.size(); ++j)
      out << (j ? " " : "") << num(f.px(static_cast<double>(c.sizes[j]))) << ',' << num(f.py(c.ratios[j]));
    out << "\"><title>" << escape(c.policy) << "</title></polyline>\n";
    const double ly = kTop + 20.0 * static_cast<double>(i);
    out << "<line x1=\"" << kWidth - kRight + 15 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 46 << "\" y=\"" << ly + 4 << "\">" << escape(c.policy)
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_scatter_svg(const std::vector<std::pair<double, double>>& points, std::ostream& out,
                       const std::string& title, const std::string& x_label, const std::string& y_label) {
  Frame f{0, 1, 0, 1};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [x, y] = points[i];
    f.x0 = i ? std::min(f.x0, x) : x;
    f.x1 = i ? std::max(f.x1, x) : x;
    f.y0 = i ? std::min(f.y0, y) : std::min(0.0, y);
    f.y1 = i ? std::max(f.y1, y) : y;
  }
  header(out, f, title, x_label, y_label);
  for (const auto& [x, y] : points)
    out << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y)) << "\" r=\"1.5\" fill=\"#1f77b4\"/>\n";
  out << "</svg>\n";
}

}  // namespace fwdrd::plot
