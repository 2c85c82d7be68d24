#pragma once

#include "marten/evolution.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace marten::io {

// Temperature table: one row per scheduled time, '#' comments allowed.
//   <t> <theta>                    uniform temperature
//   <t> <theta_0> ... <theta_M-1>  one value per element
inline Schedule read_temperature_table(std::istream& in, std::size_t n_elements) {
  Schedule s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!ss.eof()) throw InvalidInput("temperature table line " + std::to_string(line_no) + ": expected numbers");
    if (row.empty()) continue;
    if (row.size() == 2) {
      s.theta.push_back(ScalarP0::constant(n_elements, row[1]));
    } else if (row.size() == n_elements + 1) {
      ScalarP0 t;
      t.values = Eigen::Map<const Eigen::VectorXd>(row.data() + 1, static_cast<Eigen::Index>(n_elements));
      s.theta.push_back(std::move(t));
    } else {
      throw InvalidInput("temperature table line " + std::to_string(line_no) + ": expected 2 or " +
                         std::to_string(n_elements + 1) + " values, got " + std::to_string(row.size()));
    }
    s.times.push_back(row[0]);
  }
  s.validate(n_elements);
  return s;
}

}  // namespace marten::io
