#pragma once

#include <bptem/signal_io.hpp>
#include <bptem/tem.hpp>

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace bptem {

inline void write_firing(std::ostream& os, const FiringSequence& f) {
  const auto& p = f.params();
  os << "# kappa=" << fmt_double(p.kappa) << " delta=" << fmt_double(p.delta) << " b=" << fmt_double(p.b)
     << " c=" << fmt_double(p.c) << " t_start=" << fmt_double(f.t_start()) << " t_end=" << fmt_double(f.t_end())
     << '\n';
  for (double t : f.times()) os << fmt_double(t) << '\n';
}

inline FiringSequence read_firing(std::istream& is) {
  std::map<std::string, double> kv;
  std::vector<double> times;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        kv[tok.substr(0, eq)] = std::stod(tok.substr(eq + 1));
      }
      continue;
    }
    times.push_back(std::stod(line));
  }
  for (const char* key : {"kappa", "delta", "b", "c", "t_start", "t_end"})
    if (!kv.count(key)) throw ParameterError(std::string("read_firing: header lacks ") + key);
  TemParams p{kv["kappa"], kv["delta"], kv["b"], kv["c"]};
  p.check();
  return FiringSequence(std::move(times), p, kv["t_start"], kv["t_end"]);
}

} // namespace bptem
