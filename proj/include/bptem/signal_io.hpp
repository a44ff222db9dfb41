#pragma once

#include <bptem/grid.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bptem {

// %.17g text for a double; round-trips exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const Signal& s) {
  os << "t,value\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << fmt_double(s.grid().time(i)) << ',' << fmt_double(s[i]) << '\n';
}

inline void write_csv(std::ostream& os, const IQPair& iq) {
  os << "t,xi,xq\n";
  for (std::size_t i = 0; i < iq.grid().n; ++i)
    os << fmt_double(iq.grid().time(i)) << ',' << fmt_double(iq.xi()[i]) << ','
       << fmt_double(iq.xq()[i]) << '\n';
}

namespace detail {

inline std::vector<std::vector<double>> read_columns(std::istream& is, const std::string& header,
                                                     std::size_t ncol) {
  std::string line;
  if (!std::getline(is, line) || line != header)
    throw ShapeError("csv: expected header '" + header + "'");
  std::vector<std::vector<double>> cols(ncol);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= ncol) throw ShapeError("csv: too many columns");
      cols[c++].push_back(std::stod(cell));
    }
    if (c != ncol) throw ShapeError("csv: too few columns");
  }
  return cols;
}

inline TimeGrid grid_from_times(const std::vector<double>& t) {
  if (t.size() < 2) throw ShapeError("csv: need at least two rows");
  return TimeGrid(t.front(), (t.back() - t.front()) / static_cast<double>(t.size() - 1), t.size());
}

} // namespace detail

inline Signal read_signal_csv(std::istream& is) {
  auto cols = detail::read_columns(is, "t,value", 2);
  return Signal(detail::grid_from_times(cols[0]), std::move(cols[1]));
}

inline IQPair read_iq_csv(std::istream& is) {
  auto cols = detail::read_columns(is, "t,xi,xq", 3);
  return IQPair(detail::grid_from_times(cols[0]), std::move(cols[1]), std::move(cols[2]));
}

} // namespace bptem
