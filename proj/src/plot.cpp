#include "relest/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "relest/error.hpp"
#include "relest/report.hpp"

namespace relest {

namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

// Round-number ticks covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(t);
  return out;
}

struct Frame {
  double x0, x1, y0, y1;  // data range
  double w, h;            // canvas
  double px(double x) const { return kMarginLeft + (x - x0) / (x1 - x0) * (w - kMarginLeft - kMarginRight); }
  double py(double y) const { return h - kMarginBottom - (y - y0) / (y1 - y0) * (h - kMarginTop - kMarginBottom); }
};

void header(std::ostringstream& out, PlotSize size, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size.width << "\" height=\"" << size.height
      << "\" viewBox=\"0 0 " << size.width << ' ' << size.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(size.width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << title << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel,
          bool x_ticks) {
  const double left = kMarginLeft;
  const double right = f.w - kMarginRight;
  const double top = kMarginTop;
  const double bottom = f.h - kMarginBottom;
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(right) << "\" y2=\""
      << num(bottom) << "\"/>\n";
  out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\"" << num(bottom)
      << "\"/>\n";
  out << "</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double t : ticks(f.y0, f.y1)) {
    const double y = f.py(t);
    out << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\"" << num(y)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
        << "</text>\n";
  }
  if (x_ticks) {
    for (double t : ticks(f.x0, f.x1)) {
      const double x = f.px(t);
      out << "<line x1=\"" << num(x) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(bottom + 4) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << num(x) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\">" << tick_label(t)
          << "</text>\n";
    }
  }
  out << "</g>\n";
  out << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(f.h - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xlabel << "</text>\n";
  out << "<text x=\"18\" y=\"" << num((top + bottom) / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 18 " << num((top + bottom) / 2) << ")\">" << ylabel << "</text>\n";
}

}  // namespace

std::string render_trace_svg(std::span<const double> samples, PlotSize size) {
  if (samples.empty()) throw InputError("cannot plot an empty chain");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InputError("chain contains non-finite samples");
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it;
  double hi = *hi_it;
  // A constant chain still needs a visible range; pad symmetrically.
  const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1.0, std::abs(lo) * 0.1);
  lo -= pad;
  hi += pad;

  const double n = static_cast<double>(samples.size());
  Frame f{0.0, std::max(1.0, n - 1.0), lo, hi, static_cast<double>(size.width), static_cast<double>(size.height)};

  std::ostringstream out;
  header(out, size, "θ samples");
  axes(out, f, "Iteration", "θ", true);

  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
  const auto plot_w = static_cast<std::size_t>(std::max(1.0, f.w - kMarginLeft - kMarginRight));
  if (samples.size() <= 2 * plot_w) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i) out << ' ';
      out << num(f.px(static_cast<double>(i))) << ',' << num(f.py(samples[i]));
    }
  } else {
    // One column per pixel: draw min then max of the bucket (order of occurrence kept).
    bool first = true;
    for (std::size_t b = 0; b < plot_w; ++b) {
      const std::size_t begin = b * samples.size() / plot_w;
      const std::size_t end = (b + 1) * samples.size() / plot_w;
      if (begin == end) continue;
      std::size_t imin = begin;
      std::size_t imax = begin;
      for (std::size_t i = begin; i < end; ++i) {
        if (samples[i] < samples[imin]) imin = i;
        if (samples[i] > samples[imax]) imax = i;
      }
      for (std::size_t i : {std::min(imin, imax), std::max(imin, imax)}) {
        if (!first) out << ' ';
        first = false;
        out << num(f.px(static_cast<double>(i))) << ',' << num(f.py(samples[i]));
      }
    }
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

void emit_trace_plot(const McmcChain& chain, const std::filesystem::path& path, PlotSize size) {
  write_text_file(path, render_trace_svg(chain.samples, size));
}

std::string render_bench_svg(const BenchTable& table, PlotSize size) {
  if (table.rows.empty()) throw InputError("cannot plot an empty table");
  double hi = 0.0;
  for (const auto& r : table.rows) hi = std::max(hi, r.avg_error_pct + r.std_dev);
  if (hi <= 0.0) hi = 1.0;
  hi *= 1.1;
  const double m = static_cast<double>(table.rows.size());
  Frame f{0.0, m, 0.0, hi, static_cast<double>(size.width), static_cast<double>(size.height)};

  std::ostringstream out;
  header(out, size, "Average error by method");
  axes(out, f, "Method", "Average Error (%)", false);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const double xl = f.px(i + 0.2);
    const double xr = f.px(i + 0.8);
    const double xc = f.px(i + 0.5);
    const double top = f.py(r.avg_error_pct);
    out << "<rect x=\"" << num(xl) << "\" y=\"" << num(top) << "\" width=\"" << num(xr - xl) << "\" height=\""
        << num(f.py(0.0) - top) << "\" fill=\"steelblue\"/>\n";
    const double ylo = f.py(std::max(0.0, r.avg_error_pct - r.std_dev));
    const double yhi = f.py(r.avg_error_pct + r.std_dev);
    out << "<g stroke=\"black\"><line x1=\"" << num(xc) << "\" y1=\"" << num(ylo) << "\" x2=\"" << num(xc)
        << "\" y2=\"" << num(yhi) << "\"/><line x1=\"" << num(xc - 6) << "\" y1=\"" << num(yhi) << "\" x2=\""
        << num(xc + 6) << "\" y2=\"" << num(yhi) << "\"/></g>\n";
    out << "<text x=\"" << num(xc) << "\" y=\"" << num(f.py(0.0) + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << to_string(r.method)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace relest
