#include "advmg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "advmg/errors.hpp"

namespace advmg {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 140.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 48.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
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

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish(double fallback_lo, double fallback_hi) {
    if (!(lo <= hi)) {
      lo = fallback_lo;
      hi = fallback_hi;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

class Canvas {
 public:
  Canvas(const PlotOptions& o, Range x, Range y, bool logy)
      : o_(o), x_(x), y_(y), logy_(logy) {
    plot_w_ = o.width - kMarginLeft - kMarginRight;
    plot_h_ = o.height - kMarginTop - kMarginBottom;
  }

  double px(double x) const { return kMarginLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w_; }
  double py(double y) const {
    const double v = logy_ ? std::log10(y) : y;
    return kMarginTop + (1.0 - (v - y_.lo) / (y_.hi - y_.lo)) * plot_h_;
  }
  double left() const { return kMarginLeft; }
  double right() const { return kMarginLeft + plot_w_; }
  double top() const { return kMarginTop; }
  double bottom() const { return kMarginTop + plot_h_; }

  void axes(std::ostringstream& out) const {
    out << "<rect x=\"" << num(left()) << "\" y=\"" << num(top()) << "\" width=\"" << num(plot_w_)
        << "\" height=\"" << num(plot_h_) << "\" fill=\"none\" stroke=\"#000\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = x_.lo + (x_.hi - x_.lo) * t / 4.0;
      const double X = px(xv);
      out << "<line x1=\"" << num(X) << "\" y1=\"" << num(bottom()) << "\" x2=\"" << num(X)
          << "\" y2=\"" << num(bottom() + 5) << "\" stroke=\"#000\"/>\n";
      out << "<text x=\"" << num(X) << "\" y=\"" << num(bottom() + 18)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << label(xv) << "</text>\n";
      const double yv = y_.lo + (y_.hi - y_.lo) * t / 4.0;
      const double Y = kMarginTop + (1.0 - t / 4.0) * plot_h_;
      out << "<line x1=\"" << num(left() - 5) << "\" y1=\"" << num(Y) << "\" x2=\"" << num(left())
          << "\" y2=\"" << num(Y) << "\" stroke=\"#000\"/>\n";
      out << "<text x=\"" << num(left() - 8) << "\" y=\"" << num(Y + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">"
          << (logy_ ? "1e" + label(yv) : label(yv)) << "</text>\n";
    }
    out << "<text x=\"" << num((left() + right()) / 2) << "\" y=\"" << num(o_.height - 8.0)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xml_escape(o_.xlabel) << "</text>\n";
    out << "<text x=\"14\" y=\"" << num((top() + bottom()) / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
        << num((top() + bottom()) / 2) << ")\">" << xml_escape(o_.ylabel) << "</text>\n";
    out << "<text x=\"" << num(o_.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(o_.title) << "</text>\n";
  }

 private:
  const PlotOptions& o_;
  Range x_;
  Range y_;
  bool logy_;
  double plot_w_ = 0;
  double plot_h_ = 0;
};

bool keep(PlotKind kind, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  return kind != PlotKind::Semilogy || y > 0.0;
}

}  // namespace

std::string emit_svg(const std::vector<Series>& series, PlotKind kind, const PlotOptions& options) {
  for (const auto& s : series)
    if (s.x.size() != s.y.size()) throw DimensionMismatch("emit_svg: x and y lengths differ");

  const bool logy = kind == PlotKind::Semilogy;
  Range xr;
  Range yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!keep(kind, s.x[i], s.y[i])) continue;
      xr.include(s.x[i]);
      yr.include(logy ? std::log10(s.y[i]) : s.y[i]);
    }
  }
  if (kind == PlotKind::Eigenscatter) {
    for (double v : {-1.05, 1.05}) {
      xr.include(v);
      yr.include(v);
    }
  }
  if (kind == PlotKind::Stemplot) {
    yr.include(0.0);
    for (double m : options.markers) xr.include(m);
  }
  xr.finish(0.0, 1.0);
  yr.finish(0.0, 1.0);
  if (kind == PlotKind::Eigenscatter) {
    // Equal extents so the unit circle stays round.
    const double lo = std::min(xr.lo, yr.lo);
    const double hi = std::max(xr.hi, yr.hi);
    xr = {lo, hi};
    yr = {lo, hi};
  }

  PlotOptions opts = options;
  if (kind == PlotKind::Eigenscatter)
    opts.height = opts.width - static_cast<int>(kMarginLeft + kMarginRight - kMarginTop - kMarginBottom);
  const Canvas canvas(opts, xr, yr, logy);

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  canvas.axes(out);

  if (kind == PlotKind::Eigenscatter) {
    const double cx = canvas.px(0.0);
    const double cy = canvas.py(0.0);
    out << "<ellipse class=\"unit-circle\" cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" rx=\""
        << num(canvas.px(1.0) - cx) << "\" ry=\"" << num(cy - canvas.py(1.0))
        << "\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (double m : opts.markers) {
    const double X = canvas.px(m);
    out << "<line class=\"marker\" x1=\"" << num(X) << "\" y1=\"" << num(canvas.top()) << "\" x2=\""
        << num(X) << "\" y2=\"" << num(canvas.bottom())
        << "\" stroke=\"#555\" stroke-dasharray=\"6 4\"/>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    out << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    if (kind == PlotKind::Semilogy) {
      out << "<polyline fill=\"none\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!keep(kind, s.x[i], s.y[i])) continue;
        out << (first ? "" : " ") << num(canvas.px(s.x[i])) << ',' << num(canvas.py(s.y[i]));
        first = false;
      }
      out << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!keep(kind, s.x[i], s.y[i])) continue;
      const double X = canvas.px(s.x[i]);
      const double Y = canvas.py(s.y[i]);
      if (kind == PlotKind::Stemplot)
        out << "<line x1=\"" << num(X) << "\" y1=\"" << num(canvas.py(0.0)) << "\" x2=\"" << num(X)
            << "\" y2=\"" << num(Y) << "\"/>\n";
      out << "<circle cx=\"" << num(X) << "\" cy=\"" << num(Y) << "\" r=\"2.5\"/>\n";
    }
    out << "</g>\n";
    const double ly = canvas.top() + 14.0 + 16.0 * static_cast<double>(si);
    out << "<text x=\"" << num(canvas.right() + 10) << "\" y=\"" << num(ly)
        << "\" font-size=\"11\" fill=\"" << color << "\">" << xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const std::filesystem::path& path, const std::vector<Series>& series, PlotKind kind,
               const PlotOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << emit_svg(series, kind, options);
}

}  // namespace advmg
