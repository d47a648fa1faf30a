#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sabre/errors.hpp"
#include "sabre/eval/report.hpp"

namespace sabre::eval {

namespace {

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')
      out += ch;
    else
      out += '_';
  }
  return out.empty() ? std::string("unnamed") : out;
}

// Exact same textual form the JSON report uses for this number.
std::string exact(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::vector<std::string> emit_plots(const RobustnessReport& r, const std::string& dir) {
  std::vector<std::string> written;
  if (r.rows.empty()) return written;
  std::filesystem::create_directories(dir);

  for (const ConfigRow& row : r.rows) {
    const std::string name =
        sanitize(row.dataset) + "_" + sanitize(row.representation) + "_" + sanitize(row.config);
    const std::string path = (std::filesystem::path(dir) / (name + ".svg")).string();

    const int width = 720, height = 400;
    const int plot_x = 60, plot_y = 60, plot_w = 520, plot_h = 280;
    double max_cost = 1.0;
    for (const AttackCell& c : row.attacks) max_cost = std::max(max_cost, c.mean_cost);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\" stroke=\"none\"/>\n";
    svg << "<text x=\"20\" y=\"24\" font-size=\"14\" font-family=\"monospace\">" << row.dataset
        << " / " << row.representation << " / " << row.config << "</text>\n";
    svg << "<text x=\"20\" y=\"44\" font-size=\"12\" font-family=\"monospace\">accuracy_pct="
        << exact(row.accuracy_pct) << "</text>\n";
    svg << "<line x1=\"" << plot_x << "\" y1=\"" << plot_y + plot_h << "\" x2=\""
        << plot_x + plot_w << "\" y2=\"" << plot_y + plot_h
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << plot_x << "\" y1=\"" << plot_y << "\" x2=\"" << plot_x << "\" y2=\""
        << plot_y + plot_h << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    const int n = static_cast<int>(row.attacks.size());
    const double slot = n > 0 ? static_cast<double>(plot_w) / n : plot_w;
    for (int i = 0; i < n; ++i) {
      const AttackCell& c = row.attacks[i];
      const double frac = c.mean_cost / max_cost;
      const double bar_h = frac * (plot_h - 20);
      const double bx = plot_x + i * slot + slot * 0.2;
      const double bw = slot * 0.45;
      svg << "<rect x=\"" << bx << "\" y=\"" << plot_y + plot_h - bar_h << "\" width=\"" << bw
          << "\" height=\"" << bar_h << "\" fill=\"#4878a8\"/>\n";
      // AUC marker on a secondary 0..1 axis.
      const double ay = plot_y + plot_h - c.auc * (plot_h - 20);
      svg << "<circle cx=\"" << bx + bw / 2 << "\" cy=\"" << ay
          << "\" r=\"4\" fill=\"#a84848\"/>\n";
      svg << "<text x=\"" << plot_x + i * slot + 4 << "\" y=\"" << plot_y + plot_h + 16 + (i % 2) * 14
          << "\" font-size=\"10\" font-family=\"monospace\">" << c.attack << "</text>\n";
      svg << "<text x=\"" << 600 << "\" y=\"" << 70 + i * 18
          << "\" font-size=\"10\" font-family=\"monospace\">" << c.attack << " auc="
          << exact(c.auc) << (c.auc_degenerate ? "*" : "") << " cost=" << exact(c.mean_cost)
          << "</text>\n";
    }
    svg << "<text x=\"20\" y=\"" << height - 10
        << "\" font-size=\"10\" font-family=\"monospace\">bars: mean gradient cost (max "
        << exact(max_cost) << "); dots: fooling AUC on [0,1]</text>\n";
    svg << "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("emit_plots: cannot open " + path);
    f << svg.str();
    if (!f) throw IoError("emit_plots: write failed for " + path);
    written.push_back(path);
  }
  return written;
}

}  // namespace sabre::eval
