#include "cope/cli/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace cope::cli {

namespace {

std::string cell(double v) { return fmt::format("{:.6f}", v); }

void estimate_cells(std::string& out, const stats::MetricEstimate& e) {
  out += "," + cell(e.point);
  out += "," + (e.ci_95 ? cell(e.ci_95->lo) : std::string());
  out += "," + (e.ci_95 ? cell(e.ci_95->hi) : std::string());
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

}  // namespace

std::string metrics_csv(const std::vector<stats::MetricReport>& reports) {
  std::string out =
      "model,n,excluded,mae,mae_ci_lo,mae_ci_hi,acc,acc_ci_lo,acc_ci_hi,within1_acc,within1_acc_ci_lo,"
      "within1_acc_ci_hi\n";
  for (const auto& r : reports) {
    out += r.model + "," + std::to_string(r.n) + "," + std::to_string(r.excluded);
    estimate_cells(out, r.mae);
    estimate_cells(out, r.acc);
    estimate_cells(out, r.within1_acc);
    out += "\n";
  }
  return out;
}

std::string forest_svg(const stats::SubgroupReport& report, const std::string& title) {
  constexpr int kLabelWidth = 230;
  constexpr int kPlotWidth = 420;
  constexpr int kRowHeight = 24;
  constexpr int kTop = 56;
  constexpr int kRight = 90;

  double hi = 0.5;
  for (const auto& row : report.rows) {
    if (row.mae) hi = std::max(hi, *row.mae);
    if (row.ci) hi = std::max(hi, row.ci->hi);
  }
  hi = std::ceil(hi * 2.0) / 2.0;
  auto x_of = [&](double v) { return kLabelWidth + v / hi * kPlotWidth; };

  // Axis headers take a row each.
  int rows = 0;
  std::string last_axis;
  for (const auto& row : report.rows) {
    if (row.axis != last_axis) {
      ++rows;
      last_axis = row.axis;
    }
    ++rows;
  }
  const int height = kTop + rows * kRowHeight + 50;
  const int width = kLabelWidth + kPlotWidth + kRight;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      width, height, width, height);
  svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  svg += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{}</text>\n", 10,
                     xml_escape(title));
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">MAE (95% CI)</text>\n",
                     kLabelWidth + kPlotWidth / 2, height - 12);
  svg += fmt::format("<text x=\"{}\" y=\"{}\">n</text>\n", kLabelWidth + kPlotWidth + 20, kTop - 8);

  const int axis_y = kTop + rows * kRowHeight;
  svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", kLabelWidth, axis_y,
                     kLabelWidth + kPlotWidth, axis_y);
  for (double t = 0.0; t <= hi + 1e-9; t += 0.5) {
    const double x = x_of(t);
    svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{}\" x2=\"{:.1f}\" y2=\"{}\" stroke=\"#ddd\"/>\n", x, kTop, x, axis_y);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.1f}</text>\n", x, axis_y + 16, t);
  }

  int y = kTop;
  last_axis.clear();
  for (const auto& row : report.rows) {
    if (row.axis != last_axis) {
      svg += fmt::format("<text x=\"10\" y=\"{}\" font-weight=\"bold\">{}</text>\n", y + 16, xml_escape(row.axis));
      y += kRowHeight;
      last_axis = row.axis;
    }
    const int cy = y + kRowHeight / 2;
    svg += fmt::format("<text x=\"24\" y=\"{}\">{}</text>\n", cy + 4, xml_escape(row.band));
    if (row.ci) {
      svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{}\" x2=\"{:.1f}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
                         x_of(row.ci->lo), cy, x_of(row.ci->hi), cy);
    }
    if (row.mae) {
      svg += fmt::format(
          "<rect x=\"{:.1f}\" y=\"{}\" width=\"8\" height=\"8\" fill=\"#1f4e79\"><title>{} {}: MAE {:.2f}</title></rect>\n",
          x_of(*row.mae) - 4, cy - 4, xml_escape(row.axis), xml_escape(row.band), *row.mae);
    }
    svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLabelWidth + kPlotWidth + 20, cy + 4, row.n);
    y += kRowHeight;
  }
  svg += "</svg>\n";
  return svg;
}

ojson report_json(const std::vector<stats::MetricReport>& reports,
                  const std::optional<stats::SubgroupReport>& forest) {
  ojson j;
  ojson models = ojson::array();
  for (const auto& r : reports) models.push_back(stats::to_json(r));
  j["metrics"] = models;
  j["forest"] = forest ? stats::to_json(*forest) : ojson(nullptr);
  return j;
}

}  // namespace cope::cli
