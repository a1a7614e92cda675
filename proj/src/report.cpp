#include "rainfall/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rainfall::report {
namespace {

using eval::EvaluationSummary;
using eval::SummaryCell;

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  std::string s(buf);
  if (s == "-0.0" || s == "-0.00" || s == "-0") s.erase(0, 1);
  return s;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string header_row(const EvaluationSummary& s) {
  std::string h = "method";
  for (double p : s.quantiles.probabilities) h += "," + eval::format_probability(p);
  return h;
}

std::string class_cell(const SummaryCell& c) {
  return c.cls ? std::string(1, eval::classification_code(*c.cls)) : std::string("NA");
}

std::size_t label_width(const EvaluationSummary& s) {
  std::size_t w = 6;
  for (auto m : s.methods) w = std::max(w, eval::method_label(m).size());
  return w + 2;
}

}  // namespace

std::string median_table_csv(const EvaluationSummary& s) {
  std::ostringstream out;
  out << header_row(s) << ",n_sites,n_failed\n";
  for (auto m : s.methods) {
    out << eval::method_key(m);
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) {
      const auto& c = s.at(m, j);
      out << ',' << (c.stats ? shortest(c.stats->median) : "NA");
    }
    const auto& first = s.at(m, 0);
    out << ',' << (first.n_sites + first.n_excluded) << ',' << first.n_failed << '\n';
  }
  return out.str();
}

std::string median_table_text(const EvaluationSummary& s) {
  const std::size_t lw = label_width(s);
  constexpr std::size_t cw = 10;
  std::vector<double> best(s.quantiles.size(), INFINITY);
  for (auto m : s.methods)
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) {
      const auto& c = s.at(m, j);
      if (c.stats) best[j] = std::min(best[j], std::fabs(std::round(c.stats->median * 1e4) / 1e4));
    }
  std::ostringstream out;
  out << "Median D (x 1e-3); * marks the smallest magnitude per column\n";
  out << pad_right("Method", lw);
  for (double p : s.quantiles.probabilities) out << pad_left(eval::format_probability(p), cw);
  out << '\n';
  for (auto m : s.methods) {
    out << pad_right(std::string(eval::method_label(m)), lw);
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) {
      const auto& c = s.at(m, j);
      std::string cell = "NA ";
      if (c.stats) {
        const bool is_best = std::fabs(std::round(c.stats->median * 1e4) / 1e4) == best[j];
        cell = fixed(c.stats->median * 1e3, 1) + (is_best ? "*" : " ");
      }
      out << pad_left(cell, cw);
    }
    out << '\n';
  }
  return out.str();
}

std::string classification_csv(const EvaluationSummary& s) {
  std::ostringstream out;
  out << header_row(s) << '\n';
  for (auto m : s.methods) {
    out << eval::method_key(m);
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) out << ',' << class_cell(s.at(m, j));
    out << '\n';
  }
  return out.str();
}

std::string classification_text(const EvaluationSummary& s) {
  const std::size_t lw = label_width(s);
  constexpr std::size_t cw = 7;
  std::ostringstream out;
  out << "U = IQR of D below 0, O = above 0, N = contains 0\n";
  out << pad_right("Method", lw);
  for (double p : s.quantiles.probabilities) out << pad_left(eval::format_probability(p), cw);
  out << '\n';
  for (auto m : s.methods) {
    out << pad_right(std::string(eval::method_label(m)), lw);
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) out << pad_left(class_cell(s.at(m, j)), cw);
    out << '\n';
  }
  return out.str();
}

std::string boxplot_csv(const EvaluationSummary& s) {
  std::ostringstream out;
  out << "method,p,n_sites,n_failed,n_excluded,min,whisker_low,q1,median,q3,whisker_high,max,n_outliers,class\n";
  for (auto m : s.methods) {
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) {
      const auto& c = s.at(m, j);
      out << eval::method_key(m) << ',' << eval::format_probability(c.p) << ',' << c.n_sites << ',' << c.n_failed
          << ',' << c.n_excluded;
      if (c.stats) {
        const auto& b = *c.stats;
        for (double v : {b.min, b.whisker_low, b.q1, b.median, b.q3, b.whisker_high, b.max}) out << ',' << shortest(v);
        out << ',' << b.outliers;
      } else {
        out << ",NA,NA,NA,NA,NA,NA,NA,0";
      }
      out << ',' << class_cell(c) << '\n';
    }
  }
  return out.str();
}

std::string boxplot_svg(const EvaluationSummary& s, const std::vector<std::size_t>& p_indices,
                        const std::string& title) {
  constexpr double panel_w = 720, panel_h = 220, left = 70, top = 40, gap = 50;
  const double width = left + panel_w + 20;
  const double height = top + static_cast<double>(p_indices.size()) * (panel_h + gap);

  // Common transformed y-range over all panels, always including 0.
  double lo = 0.0, hi = 0.0;
  for (auto m : s.methods)
    for (std::size_t j : p_indices) {
      const auto& c = s.at(m, j);
      if (!c.stats) continue;
      lo = std::min(lo, eval::asinh_axis_transform(c.stats->min));
      hi = std::max(hi, eval::asinh_axis_transform(c.stats->max));
    }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\"" << fixed(height, 0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << fixed(left, 0) << "\" y=\"20\" font-size=\"14\">" << title
      << " (axis: asinh(8x))</text>\n";
  const double nm = static_cast<double>(std::max<std::size_t>(1, s.methods.size()));
  const double slot = panel_w / nm;
  const std::vector<double> ticks = {-2, -1, -0.5, -0.2, -0.1, 0, 0.1, 0.2, 0.5, 1, 2};

  for (std::size_t k = 0; k < p_indices.size(); ++k) {
    const std::size_t j = p_indices[k];
    const double y0 = top + static_cast<double>(k) * (panel_h + gap);
    auto ypos = [&](double d) { return y0 + panel_h * (hi - eval::asinh_axis_transform(d)) / (hi - lo); };
    out << "<g>\n<rect x=\"" << fixed(left, 1) << "\" y=\"" << fixed(y0, 1) << "\" width=\"" << fixed(panel_w, 1)
        << "\" height=\"" << fixed(panel_h, 1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << fixed(left + 4, 1) << "\" y=\"" << fixed(y0 + 14, 1) << "\">p = "
        << eval::format_probability(s.quantiles.probabilities[j]) << "</text>\n";
    for (double t : ticks) {
      const double tt = eval::asinh_axis_transform(t);
      if (tt < lo || tt > hi) continue;
      const double y = ypos(t);
      out << "<line x1=\"" << fixed(left - 4, 1) << "\" y1=\"" << fixed(y, 1) << "\" x2=\"" << fixed(left, 1)
          << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"#444\"/>\n";
      out << "<text x=\"" << fixed(left - 6, 1) << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">"
          << shortest(t) << "</text>\n";
    }
    out << "<line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(ypos(0), 1) << "\" x2=\"" << fixed(left + panel_w, 1)
        << "\" y2=\"" << fixed(ypos(0), 1) << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
    for (std::size_t i = 0; i < s.methods.size(); ++i) {
      const auto& c = s.at(s.methods[i], j);
      const double cx = left + (static_cast<double>(i) + 0.5) * slot;
      out << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(y0 + panel_h + 14, 1)
          << "\" text-anchor=\"middle\" font-size=\"9\">" << eval::method_label(s.methods[i]) << "</text>\n";
      if (!c.stats) continue;
      const auto& b = *c.stats;
      const double bw = 0.5 * slot;
      out << "<line x1=\"" << fixed(cx, 1) << "\" y1=\"" << fixed(ypos(b.whisker_low), 1) << "\" x2=\"" << fixed(cx, 1)
          << "\" y2=\"" << fixed(ypos(b.whisker_high), 1) << "\" stroke=\"#222\"/>\n";
      out << "<rect x=\"" << fixed(cx - bw / 2, 1) << "\" y=\"" << fixed(ypos(b.q3), 1) << "\" width=\""
          << fixed(bw, 1) << "\" height=\"" << fixed(std::max(0.5, ypos(b.q1) - ypos(b.q3)), 1)
          << "\" fill=\"#cfe0f3\" stroke=\"#222\"/>\n";
      out << "<line x1=\"" << fixed(cx - bw / 2, 1) << "\" y1=\"" << fixed(ypos(b.median), 1) << "\" x2=\""
          << fixed(cx + bw / 2, 1) << "\" y2=\"" << fixed(ypos(b.median), 1)
          << "\" stroke=\"#b00\" stroke-width=\"2\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::filesystem::path> write_bundle(const EvaluationSummary& s, const std::filesystem::path& dir,
                                                bool svg) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& body) {
    write_text_file(dir / name, body);
    written.push_back(dir / name);
  };
  emit(kMedianCsv, median_table_csv(s));
  emit(kMedianText, median_table_text(s));
  emit(kClassCsv, classification_csv(s));
  emit(kClassText, classification_text(s));
  emit(kBoxplotCsv, boxplot_csv(s));
  if (svg) {
    std::vector<std::size_t> low, moderate, heavy;
    for (std::size_t j = 0; j < s.quantiles.size(); ++j) {
      const double p = s.quantiles.probabilities[j];
      (p < 0.2 ? low : p <= 0.8 ? moderate : heavy).push_back(j);
    }
    const std::pair<const char*, std::vector<std::size_t>*> groups[] = {
        {"low", &low}, {"moderate", &moderate}, {"heavy", &heavy}};
    for (const auto& [name, idx] : groups) {
      if (idx->empty()) continue;
      const std::string file = std::string("boxplots_") + name + ".svg";
      write_text_file(dir / file, boxplot_svg(s, *idx, std::string("D by method, ") + name + " rainfall quantiles"));
      written.push_back(dir / file);
    }
  }
  return written;
}

}  // namespace rainfall::report
