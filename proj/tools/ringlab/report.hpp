#pragma once

#include <ringlab/pipeline.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace ringlab::cli {

using Cell = std::variant<double, long long, bool, std::string>;

/// One CSV row as ordered (column, value) pairs.
struct Row {
  std::vector<std::pair<std::string, Cell>> cells;

  Row& add(const std::string& name, double v);
  Row& add(const std::string& name, int v);
  Row& add(const std::string& name, bool v);
  Row& add(const std::string& name, const std::string& v);
  Row& add(const std::string& name, const char* v) { return add(name, std::string(v)); }
  /// Writes name_re and name_im.
  Row& add(const std::string& name, cplx v);
  /// Writes the check as <name>_hyp, _lhs, _rhs, _holds.
  Row& add(const Check& c);
};

/// Column set is the union over rows in first-seen order; missing cells stay empty.
struct Table {
  std::vector<Row> rows;
  std::vector<std::string> columns() const;
};

/// 17 significant digits, scientific notation.
std::string format_double(double v);
std::string format_cell(const Cell& c);

struct Output {
  std::string subcommand;
  Table table;
  std::vector<std::pair<int, Check>> checks;  ///< (row, check)
  std::map<std::string, Table> plotdata;
  nlohmann::json metadata = nlohmann::json::object();
  int exit_code = 0;

  /// Adds a check to both the CSV row and the check list.
  void check(int row, Row& r, const Check& c);
  int checks_exit_code() const;
};

std::string to_csv(const Table& t);
nlohmann::json to_json(const Output& o);
void write_outputs(const Output& o, const std::filesystem::path& dir);

}  // namespace ringlab::cli
