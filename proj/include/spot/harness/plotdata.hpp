#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "spot/errors.hpp"
#include "spot/harness/experiment.hpp"
#include "spot/metrics.hpp"

namespace spot::harness {

struct PlotData {
  std::vector<long> t;
  std::vector<double> cum_regret;
  std::vector<double> cum_violation;
  SqrtFit regret_fit;
  SqrtFit violation_fit;  // on [cum_violation]_+
};

/// Reads the cumulative columns of an episode log.
inline PlotData read_plot_data(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw StructuralError("plotdata: empty log");
  int col_t = -1, col_r = -1, col_v = -1, k = 0;
  {
    std::stringstream header(line);
    for (std::string name; std::getline(header, name, ','); ++k) {
      if (name == "t") col_t = k;
      if (name == "cum_regret") col_r = k;
      if (name == "cum_violation") col_v = k;
    }
  }
  if (col_t < 0 || col_r < 0 || col_v < 0)
    throw StructuralError("plotdata: log lacks t, cum_regret or cum_violation columns");

  PlotData data;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (static_cast<int>(cells.size()) <= std::max({col_t, col_r, col_v}))
      throw StructuralError("plotdata: short row " + std::to_string(row));
    try {
      data.t.push_back(std::stol(cells[col_t]));
      data.cum_regret.push_back(std::stod(cells[col_r]));
      data.cum_violation.push_back(std::stod(cells[col_v]));
    } catch (const std::exception&) {
      throw StructuralError("plotdata: malformed number in row " + std::to_string(row));
    }
  }
  if (data.t.size() >= 100) {
    data.regret_fit = sqrt_fit(data.cum_regret);
    data.violation_fit = sqrt_fit(positive_part(data.cum_violation));
  }
  return data;
}

/// Columns t,sqrt_t,cum_regret,cum_violation_plus; every `stride`-th row and
/// always the last one.
inline void write_plot_data(std::ostream& os, const PlotData& data, long stride = 1) {
  if (stride < 1) throw DomainError("plotdata: stride must be >= 1");
  os << "t,sqrt_t,cum_regret,cum_violation_plus\n";
  for (std::size_t k = 0; k < data.t.size(); ++k) {
    if ((k + 1) % static_cast<std::size_t>(stride) != 0 && k + 1 != data.t.size()) continue;
    os << data.t[k] << ',' << fmt(std::sqrt(double(data.t[k]))) << ',' << fmt(data.cum_regret[k])
       << ',' << fmt(std::max(0.0, data.cum_violation[k])) << '\n';
  }
}

}  // namespace spot::harness
