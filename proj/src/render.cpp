#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eegdecode/error.hpp"
#include "eegdecode/render.hpp"

namespace eegdecode {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
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

void write_text(const std::filesystem::path& out, const std::string& text) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw DataError("cannot write " + out.string());
  f << text;
}

std::string header(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

}  // namespace

std::string diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const double white[3] = {255, 255, 255};
  const double red[3] = {178, 24, 43};
  const double blue[3] = {33, 102, 172};
  const double* end = t >= 0.0 ? red : blue;
  const double a = std::abs(t);
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) rgb[i] = static_cast<int>(std::lround(white[i] + a * (end[i] - white[i])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string topomap_svg(const std::vector<std::string>& electrodes, const std::vector<double>& values,
                        const Montage& montage, const std::string& title) {
  if (electrodes.size() != values.size()) throw DataError("topomap: one value per electrode required");
  if (electrodes.empty()) throw DataError("topomap: no electrodes");
  double vmax = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw DataError("topomap: non-finite value for electrode '" + electrodes[i] + "'");
    if (!montage.index_of(electrodes[i])) throw DataError("topomap: electrode '" + electrodes[i] + "' is not in the montage");
    vmax = std::max(vmax, std::abs(values[i]));
  }
  const double scale = vmax > 0.0 ? vmax : 1.0;

  constexpr double kW = 420, kH = 400, kCx = 180, kCy = 210, kR = 150;
  std::ostringstream s;
  s << header(kW, kH);
  if (!title.empty()) s << "<text x=\"" << num(kW / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  s << "<g class=\"head\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\">\n";
  s << "<circle cx=\"" << num(kCx) << "\" cy=\"" << num(kCy) << "\" r=\"" << num(kR) << "\"/>\n";
  s << "<polyline points=\"" << num(kCx - 12) << "," << num(kCy - kR + 1) << " " << num(kCx) << "," << num(kCy - kR - 16)
    << " " << num(kCx + 12) << "," << num(kCy - kR + 1) << "\"/>\n";
  s << "<ellipse cx=\"" << num(kCx - kR - 6) << "\" cy=\"" << num(kCy) << "\" rx=\"6\" ry=\"22\"/>\n";
  s << "<ellipse cx=\"" << num(kCx + kR + 6) << "\" cy=\"" << num(kCy) << "\" rx=\"6\" ry=\"22\"/>\n";
  s << "</g>\n<g class=\"electrodes\" stroke=\"#333333\" stroke-width=\"0.8\">\n";
  for (std::size_t i = 0; i < electrodes.size(); ++i) {
    const auto& p = montage.position(electrodes[i]);
    const double theta = std::acos(std::clamp(p.z(), -1.0, 1.0));
    const double rho = std::hypot(p.x(), p.y());
    const double r = kR * theta / (std::numbers::pi / 2.0);
    const double px = kCx + (rho > 0.0 ? r * p.x() / rho : 0.0);
    const double py = kCy - (rho > 0.0 ? r * p.y() / rho : 0.0);
    s << "<circle class=\"electrode\" cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"7\" fill=\""
      << diverging_color(values[i] / scale) << "\"><title>" << escape(electrodes[i]) << " " << values[i]
      << "</title></circle>\n";
  }
  s << "</g>\n<g class=\"legend\">\n";
  constexpr int kSteps = 21;
  constexpr double kBarX = 370, kBarTop = 80, kBarH = 260;
  for (int k = 0; k < kSteps; ++k) {
    const double t = 1.0 - 2.0 * k / (kSteps - 1);
    s << "<rect x=\"" << num(kBarX) << "\" y=\"" << num(kBarTop + k * kBarH / kSteps) << "\" width=\"16\" height=\""
      << num(kBarH / kSteps + 0.5) << "\" fill=\"" << diverging_color(t) << "\"/>\n";
  }
  s << "<text x=\"" << num(kBarX + 8) << "\" y=\"" << num(kBarTop - 6) << "\" text-anchor=\"middle\">" << num(scale)
    << "</text>\n";
  s << "<text x=\"" << num(kBarX + 8) << "\" y=\"" << num(kBarTop + kBarH + 14) << "\" text-anchor=\"middle\">"
    << num(-scale) << "</text>\n";
  s << "</g>\n</svg>\n";
  return s.str();
}

void render_topomap(const std::vector<std::string>& electrodes, const std::vector<double>& values,
                    const Montage& montage, const std::filesystem::path& out, const std::string& title) {
  write_text(out, topomap_svg(electrodes, values, montage, title));
}

std::string accuracy_plot_svg(const std::vector<AccuracySeries>& series, const std::string& title) {
  if (series.empty()) throw DataError("accuracy plot: no data");
  for (const auto& sr : series) {
    if (sr.accuracies.empty()) throw DataError("accuracy plot: series '" + sr.label + "' is empty");
    for (double a : sr.accuracies) {
      if (!std::isfinite(a)) throw DataError("accuracy plot: non-finite accuracy");
    }
  }
  constexpr double kLeft = 60, kTop = 40, kPlotH = 300, kColW = 90;
  const double width = kLeft + kColW * static_cast<double>(series.size()) + 20;
  const double height = kTop + kPlotH + 70;
  const auto ypos = [&](double acc) { return kTop + kPlotH * (1.0 - std::clamp(acc, 0.0, 1.0)); };

  std::ostringstream s;
  s << header(width, height);
  if (!title.empty()) s << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  s << "<g class=\"axes\" stroke=\"#000000\" fill=\"none\">\n<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop)
    << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(kTop + kPlotH) << "\"/>\n<line x1=\"" << num(kLeft) << "\" y1=\""
    << num(kTop + kPlotH) << "\" x2=\"" << num(width - 20) << "\" y2=\"" << num(kTop + kPlotH) << "\"/>\n</g>\n";
  s << "<g class=\"ticks\">\n";
  for (int k = 0; k <= 10; k += 2) {
    const double v = k / 10.0;
    s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(ypos(v) + 4) << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  s << "<line class=\"chance\" x1=\"" << num(kLeft) << "\" y1=\"" << num(ypos(0.5)) << "\" x2=\"" << num(width - 20)
    << "\" y2=\"" << num(ypos(0.5)) << "\" stroke=\"#999999\" stroke-dasharray=\"4,3\"/>\n</g>\n";
  for (std::size_t c = 0; c < series.size(); ++c) {
    const auto& sr = series[c];
    const double cx = kLeft + kColW * (static_cast<double>(c) + 0.5);
    s << "<g class=\"series\">\n";
    if (!sr.baseline.empty()) {
      const auto q = quartiles(sr.baseline);
      s << "<rect class=\"baseline-band\" x=\"" << num(cx - 30) << "\" y=\"" << num(ypos(q.q3)) << "\" width=\"60\" height=\""
        << num(ypos(q.q1) - ypos(q.q3)) << "\" fill=\"#d0d0d0\"/>\n";
      for (std::size_t i = 0; i < sr.baseline.size(); ++i) {
        const double dx = 10.0 + 14.0 * ((static_cast<double>(i % 5) / 4.0) - 0.5);
        s << "<circle class=\"baseline-dot\" cx=\"" << num(cx + dx) << "\" cy=\"" << num(ypos(sr.baseline[i]))
          << "\" r=\"2.5\" fill=\"#808080\"/>\n";
      }
    }
    for (std::size_t i = 0; i < sr.accuracies.size(); ++i) {
      const double dx = -10.0 + 14.0 * ((static_cast<double>(i % 5) / 4.0) - 0.5);
      s << "<circle class=\"accuracy-dot\" cx=\"" << num(cx + dx) << "\" cy=\"" << num(ypos(sr.accuracies[i]))
        << "\" r=\"3\" fill=\"#1f4e9c\"/>\n";
    }
    const auto q = quartiles(sr.accuracies);
    s << "<line class=\"median\" x1=\"" << num(cx - 24) << "\" y1=\"" << num(ypos(q.median)) << "\" x2=\"" << num(cx + 4)
      << "\" y2=\"" << num(ypos(q.median)) << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(cx) << "\" y=\"" << num(kTop + kPlotH + 16) << "\" text-anchor=\"middle\">" << escape(sr.label)
      << "</text>\n</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void render_accuracy_plot(const std::vector<AccuracySeries>& series, const std::filesystem::path& out,
                          const std::string& title) {
  write_text(out, accuracy_plot_svg(series, title));
}

std::string sweep_plot_svg(const SweepResult& sweep, const std::string& title) {
  if (sweep.points.empty()) throw DataError("sweep plot: no points");
  constexpr double kLeft = 60, kTop = 40, kPlotW = 460, kPlotH = 280;
  const double width = kLeft + kPlotW + 30;
  const double height = kTop + kPlotH + 60;
  const double max_count = sweep.points.back().n_features;
  const auto xpos = [&](double n) {
    return max_count > 1 ? kLeft + kPlotW * (n - 1.0) / (max_count - 1.0) : kLeft + kPlotW / 2;
  };
  const auto ypos = [&](double acc) { return kTop + kPlotH * (1.0 - std::clamp(acc, 0.0, 1.0)); };
  const auto band = [&](bool scrambled) {
    std::string pts;
    for (const auto& p : sweep.points) {
      pts += num(xpos(p.n_features)) + "," + num(ypos((scrambled ? p.scrambled : p.real).q3)) + " ";
    }
    for (auto it = sweep.points.rbegin(); it != sweep.points.rend(); ++it) {
      pts += num(xpos(it->n_features)) + "," + num(ypos((scrambled ? it->scrambled : it->real).q1)) + " ";
    }
    pts.pop_back();
    return pts;
  };
  const auto line = [&](bool scrambled) {
    std::string pts;
    for (const auto& p : sweep.points) pts += num(xpos(p.n_features)) + "," + num(ypos((scrambled ? p.scrambled : p.real).median)) + " ";
    pts.pop_back();
    return pts;
  };

  std::ostringstream s;
  s << header(width, height);
  if (!title.empty()) s << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  s << "<g class=\"axes\" stroke=\"#000000\" fill=\"none\">\n<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop)
    << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(kTop + kPlotH) << "\"/>\n<line x1=\"" << num(kLeft) << "\" y1=\""
    << num(kTop + kPlotH) << "\" x2=\"" << num(kLeft + kPlotW) << "\" y2=\"" << num(kTop + kPlotH) << "\"/>\n</g>\n";
  for (int k = 0; k <= 10; k += 2) {
    s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(ypos(k / 10.0) + 4) << "\" text-anchor=\"end\">" << num(k / 10.0)
      << "</text>\n";
  }
  s << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kTop + kPlotH + 16) << "\" text-anchor=\"middle\">1</text>\n";
  s << "<text x=\"" << num(kLeft + kPlotW) << "\" y=\"" << num(kTop + kPlotH + 16) << "\" text-anchor=\"middle\">"
    << sweep.points.back().n_features << "</text>\n";
  s << "<text x=\"" << num(kLeft + kPlotW / 2) << "\" y=\"" << num(kTop + kPlotH + 36)
    << "\" text-anchor=\"middle\">number of features</text>\n";
  s << "<polygon class=\"scrambled-band\" points=\"" << band(true) << "\" fill=\"#d0d0d0\" fill-opacity=\"0.7\"/>\n";
  s << "<polyline class=\"scrambled-median\" points=\"" << line(true) << "\" fill=\"none\" stroke=\"#808080\" stroke-width=\"1.5\"/>\n";
  s << "<polygon class=\"iqr-band\" points=\"" << band(false) << "\" fill=\"#9ecae1\" fill-opacity=\"0.6\"/>\n";
  s << "<polyline class=\"median\" points=\"" << line(false) << "\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\"/>\n";
  for (const auto& p : sweep.points) {
    if (!p.test.p_lt_0_003) continue;
    s << "<text class=\"significance\" x=\"" << num(xpos(p.n_features)) << "\" y=\"" << num(ypos(p.real.q3) - 4)
      << "\" text-anchor=\"middle\">" << (p.test.p_lt_0_0006 ? "**" : "*") << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void render_sweep_plot(const SweepResult& sweep, const std::filesystem::path& out, const std::string& title) {
  write_text(out, sweep_plot_svg(sweep, title));
}

}  // namespace eegdecode
