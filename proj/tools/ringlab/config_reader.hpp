#pragma once

#include <ringlab/error.hpp>
#include <ringlab/pipeline.hpp>

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

namespace ringlab::cli {

using json = nlohmann::json;

/// Strict view of a JSON object: every key must be consumed before finish().
class Section {
 public:
  Section(const json& j, std::string path);

  bool has(const std::string& key) const;
  const json& raw(const std::string& key);
  Section sub(const std::string& key);

  double num(const std::string& key);
  double num(const std::string& key, double def);
  int integer(const std::string& key);
  int integer(const std::string& key, int def);
  bool flag(const std::string& key, bool def);
  std::string str(const std::string& key);
  std::string str(const std::string& key, const std::string& def);
  cplx complex(const std::string& key);
  cplx complex(const std::string& key, cplx def);
  std::vector<double> nums(const std::string& key);
  std::vector<cplx> complexes(const std::string& key);

  /// Throws a configuration error naming any key that was never read.
  void finish() const;
  const std::string& path() const { return path_; }

 private:
  const json& at(const std::string& key);
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

cplx to_complex(const json& v, const std::string& where);

json load_config(const std::string& file);

ScenarioConfig parse_scenario(Section& root);
NoiseSpec parse_noise(Section s);
TailSpec parse_tail(Section s);
ObservationSetup parse_observation(Section s);

std::string to_string(SweepAxis a);

}  // namespace ringlab::cli
