#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ringlab::cli {

Row& Row::add(const std::string& name, double v) {
  cells.emplace_back(name, v);
  return *this;
}
Row& Row::add(const std::string& name, int v) {
  cells.emplace_back(name, static_cast<long long>(v));
  return *this;
}
Row& Row::add(const std::string& name, bool v) {
  cells.emplace_back(name, v);
  return *this;
}
Row& Row::add(const std::string& name, const std::string& v) {
  cells.emplace_back(name, v);
  return *this;
}
Row& Row::add(const std::string& name, cplx v) {
  add(name + "_re", v.real());
  return add(name + "_im", v.imag());
}
Row& Row::add(const Check& c) {
  add(c.name + "_hyp", c.hypotheses);
  add(c.name + "_lhs", c.lhs);
  add(c.name + "_rhs", c.rhs);
  return add(c.name + "_holds", c.holds);
}

std::vector<std::string> Table::columns() const {
  std::vector<std::string> cols;
  std::set<std::string> seen;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.cells)
      if (seen.insert(k).second) cols.push_back(k);
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "1" : "0";
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void Output::check(int row, Row& r, const Check& c) {
  r.add(c);
  checks.emplace_back(row, c);
}

int Output::checks_exit_code() const {
  for (const auto& [row, c] : checks)
    if (c.violated()) return 1;
  return 0;
}

std::string to_csv(const Table& t) {
  const auto cols = t.columns();
  std::ostringstream out;
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : t.rows) {
    std::map<std::string, const Cell*> byname;
    for (const auto& [k, v] : r.cells) byname[k] = &v;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      if (auto it = byname.find(cols[i]); it != byname.end()) out << format_cell(*it->second);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(format_double(*d));
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  if (const auto* b = std::get_if<bool>(&c)) return *b;
  return std::get<std::string>(c);
}

}  // namespace

nlohmann::json to_json(const Output& o) {
  nlohmann::json j;
  j["subcommand"] = o.subcommand;
  j["version"] = RINGLAB_VERSION;
  j["exit_code"] = o.exit_code;
  j["metadata"] = o.metadata;
  j["columns"] = o.table.columns();
  auto rows = nlohmann::json::array();
  for (const auto& r : o.table.rows) {
    auto jr = nlohmann::json::object();
    for (const auto& [k, v] : r.cells) jr[k] = cell_json(v);
    rows.push_back(jr);
  }
  j["rows"] = rows;
  auto checks = nlohmann::json::array();
  for (const auto& [row, c] : o.checks)
    checks.push_back({{"row", row},
                      {"name", c.name},
                      {"hypotheses", c.hypotheses},
                      {"lhs", cell_json(c.lhs)},
                      {"rhs", cell_json(c.rhs)},
                      {"holds", c.holds},
                      {"violated", c.violated()}});
  j["checks"] = checks;
  auto plots = nlohmann::json::array();
  for (const auto& [name, t] : o.plotdata) plots.push_back("plotdata/" + name + ".csv");
  j["plotdata"] = plots;
  return j;
}

void write_outputs(const Output& o, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::configuration, "cannot create output directory " + dir.string());
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorKind::configuration, "cannot write " + p.string());
    f << text;
  };
  write(dir / "report.csv", to_csv(o.table));
  write(dir / "report.json", to_json(o).dump(2) + "\n");
  if (!o.plotdata.empty()) {
    std::filesystem::create_directories(dir / "plotdata", ec);
    for (const auto& [name, t] : o.plotdata) write(dir / "plotdata" / (name + ".csv"), to_csv(t));
  }
}

}  // namespace ringlab::cli
