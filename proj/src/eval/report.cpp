#include "sabre/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sabre/errors.hpp"

namespace sabre::eval {

const char* const kAucDefinition =
    "area under the fooling-success-rate curve: budgets sorted ascending, mapped to evenly "
    "spaced positions on [0,1], trapezoidal rule; a single-budget cell degrades to the raw "
    "success rate and is flagged degenerate";

RobustnessReport::RobustnessReport() : auc_definition(kAucDefinition) {}

std::vector<AttackCell> summarize_sweep(const std::vector<attacks::SweepRun>& runs) {
  // Group by algorithm, preserving per-spec budget points.
  std::map<std::string, AttackCell> by_attack;
  for (const attacks::SweepRun& run : runs) {
    const std::string name = attacks::algorithm_name(run.spec.algorithm);
    AttackCell& cell = by_attack[name];
    cell.attack = name;
    BudgetPoint pt;
    pt.budget = attacks::spec_budget(run.spec);
    pt.total = static_cast<int>(run.outcomes.size());
    for (const attacks::AdvOutcome& o : run.outcomes)
      if (o.success) ++pt.successes;
    cell.curve.push_back(pt);
    cell.outcomes += pt.total;
  }

  std::vector<AttackCell> cells;
  for (auto& [name, cell] : by_attack) {
    std::sort(cell.curve.begin(), cell.curve.end(),
              [](const BudgetPoint& a, const BudgetPoint& b) { return a.budget < b.budget; });
    const AucCell auc = fooling_auc_or_rate(cell.curve);
    cell.auc = auc.value;
    cell.auc_degenerate = auc.degenerate;
    std::vector<double> costs;
    for (const attacks::SweepRun& run : runs) {
      if (attacks::algorithm_name(run.spec.algorithm) != name) continue;
      for (const attacks::AdvOutcome& o : run.outcomes) costs.push_back(o.gradient_cost);
    }
    const CostSummary cs = cost_summary(costs);
    cell.mean_cost = cs.mean;
    cell.median_cost = cs.median;
    cells.push_back(std::move(cell));
  }
  return cells;
}

namespace {

nlohmann::json cell_to_json(const AttackCell& c) {
  nlohmann::json curve = nlohmann::json::array();
  for (const BudgetPoint& p : c.curve)
    curve.push_back({{"budget", p.budget}, {"successes", p.successes}, {"total", p.total}});
  return {{"attack", c.attack},
          {"auc", c.auc},
          {"auc_degenerate", c.auc_degenerate},
          {"mean_cost", c.mean_cost},
          {"median_cost", c.median_cost},
          {"outcomes", c.outcomes},
          {"curve", curve}};
}

AttackCell cell_from_json(const nlohmann::json& j) {
  AttackCell c;
  c.attack = j.at("attack").get<std::string>();
  c.auc = j.at("auc").get<double>();
  c.auc_degenerate = j.at("auc_degenerate").get<bool>();
  c.mean_cost = j.at("mean_cost").get<double>();
  c.median_cost = j.at("median_cost").get<double>();
  c.outcomes = j.at("outcomes").get<int>();
  for (const nlohmann::json& p : j.at("curve")) {
    BudgetPoint pt;
    pt.budget = p.at("budget").get<double>();
    pt.successes = p.at("successes").get<int>();
    pt.total = p.at("total").get<int>();
    c.curve.push_back(pt);
  }
  return c;
}

}  // namespace

nlohmann::json transfer_to_json(const TransferMatrix& tm) {
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& row : tm.ratio) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : row) {
      if (v)
        r.push_back(*v);
      else
        r.push_back(nullptr);
    }
    ratios.push_back(std::move(r));
  }
  return {{"models", tm.model_names}, {"ratios", ratios}};
}

TransferMatrix transfer_from_json(const nlohmann::json& j) {
  TransferMatrix tm;
  tm.model_names = j.at("models").get<std::vector<std::string>>();
  for (const nlohmann::json& row : j.at("ratios")) {
    std::vector<std::optional<double>> r;
    for (const nlohmann::json& v : row) {
      if (v.is_null())
        r.push_back(std::nullopt);
      else
        r.push_back(v.get<double>());
    }
    tm.ratio.push_back(std::move(r));
  }
  return tm;
}

nlohmann::json report_to_json(const RobustnessReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ConfigRow& row : r.rows) {
    nlohmann::json cells = nlohmann::json::array();
    for (const AttackCell& c : row.attacks) cells.push_back(cell_to_json(c));
    rows.push_back({{"dataset", row.dataset},
                    {"representation", row.representation},
                    {"config", row.config},
                    {"accuracy_pct", row.accuracy_pct},
                    {"attacks", cells}});
  }
  nlohmann::json j = {{"auc_definition", r.auc_definition},
                      {"metadata", {{"seed", r.seed}, {"model_hash", r.model_hash}}},
                      {"rows", rows}};
  if (r.transfer)
    j["transfer"] = transfer_to_json(*r.transfer);
  else
    j["transfer"] = nullptr;
  return j;
}

RobustnessReport report_from_json(const nlohmann::json& j) {
  RobustnessReport r;
  r.auc_definition = j.at("auc_definition").get<std::string>();
  r.seed = j.at("metadata").at("seed").get<std::uint64_t>();
  r.model_hash = j.at("metadata").at("model_hash").get<std::string>();
  for (const nlohmann::json& jr : j.at("rows")) {
    ConfigRow row;
    row.dataset = jr.at("dataset").get<std::string>();
    row.representation = jr.at("representation").get<std::string>();
    row.config = jr.at("config").get<std::string>();
    row.accuracy_pct = jr.at("accuracy_pct").get<double>();
    for (const nlohmann::json& jc : jr.at("attacks")) row.attacks.push_back(cell_from_json(jc));
    r.rows.push_back(std::move(row));
  }
  if (j.contains("transfer") && !j.at("transfer").is_null())
    r.transfer = transfer_from_json(j.at("transfer"));
  return r;
}

namespace {

std::string format_auc(const AttackCell& c) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << c.auc;
  if (c.auc_degenerate) os << "*";
  return os.str();
}

std::string format_cost(double cost) {
  if (std::abs(cost - std::round(cost)) < 1e-9) {
    std::ostringstream os;
    os << static_cast<long long>(std::llround(cost));
    return os.str();
  }
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << cost;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string report_to_csv(const RobustnessReport& r) {
  std::set<std::string> attack_names;
  for (const ConfigRow& row : r.rows)
    for (const AttackCell& c : row.attacks) attack_names.insert(c.attack);

  std::ostringstream os;
  os << "dataset,representation,config,accuracy_pct";
  for (const std::string& a : attack_names) os << "," << csv_escape(a);
  os << "\n";

  for (const ConfigRow& row : r.rows) {
    os << csv_escape(row.dataset) << "," << csv_escape(row.representation) << ","
       << csv_escape(row.config) << "," << format_cost(row.accuracy_pct);
    for (const std::string& a : attack_names) {
      os << ",";
      const AttackCell* cell = nullptr;
      for (const AttackCell& c : row.attacks)
        if (c.attack == a) cell = &c;
      if (cell != nullptr)
        os << csv_escape(format_auc(*cell) + ", " + format_cost(cell->mean_cost));
    }
    os << "\n";
  }
  return os.str();
}

void emit_report_json(const RobustnessReport& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("emit_report_json: cannot open " + path);
  f << report_to_json(r).dump(2) << "\n";
  if (!f) throw IoError("emit_report_json: write failed for " + path);
}

void emit_report_csv(const RobustnessReport& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("emit_report_csv: cannot open " + path);
  f << report_to_csv(r);
  if (!f) throw IoError("emit_report_csv: write failed for " + path);
}

}  // namespace sabre::eval
