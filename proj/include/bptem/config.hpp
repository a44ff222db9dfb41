#pragma once

#include <bptem/operators.hpp>
#include <bptem/pocs.hpp>
#include <bptem/signal_io.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

// Experiment configuration: an INI file of `key = value` lines in sections.
// Every key has a default; unknown keys are rejected so typos do not pass silently.
namespace bptem {

enum class DecoderKind { closed_form, apocs };

inline const char* to_string(DecoderKind k) { return k == DecoderKind::apocs ? "apocs" : "closed_form"; }

struct ExperimentConfig {
  struct {
    double f0 = 50.0, f1 = 10.0, f2 = 2.5;
    double bandwidth = 30.0;
    double amplitude = 1.0;
  } signal;
  TemParams tem{1.0, 1.0 / 120.0, 3.0, 2.0};
  struct {
    double t_start = -4.0, t_end = 4.0;
    double oversampling = 8.0;
  } window;
  struct {
    DecoderKind kind = DecoderKind::closed_form;
    IterConfig iter{};
    std::optional<GainConvention> gain;  // empty: pick by idempotency
    double rcond = 1e-10;
    double trim = 0.9;
  } decoder;
  struct {
    double bl_delta = 1.0 / 260.0;
    double bl_cutoff = 0.0;  // 0: f0 + bandwidth/2
    double iq_bl_delta = 1.0 / 60.0;
  } feasibility;
  struct {
    double f0_start = 15.0, f0_stop = 1500.0;
    double f0_step = 15.0, f0_step_full = 1.5;
    std::vector<double> f0_list;  // overrides start/stop/step when non-empty
    std::vector<double> deltas{1.0 / 120.0, 1.0 / 240.0, 1.0 / 360.0};
  } freq_sweep;
  struct {
    double delta = 1.0 / 240.0;
    std::vector<double> f0_list{50.0, 600.0};
    std::vector<double> snr_list{5.0, 15.0, 25.0};
    std::vector<std::string> kinds{"bandpass", "white"};
    double white_oversampling = 32.0;
    int trials = 20, trials_full = 100;
  } noise_sweep;
  struct {
    double delta = 1.0 / 240.0;
    std::vector<double> f0_list{50.0, 150.0, 600.0, 1050.0, 1500.0};
    std::vector<int> bits{2, 4, 6, 8, 12, 52};
    int trials = 5, trials_full = 100;
  } quant_sweep;
  struct {
    double f0 = 600.0;
    double snr_db = 15.0;
    std::string noise = "white";
    std::vector<double> rates{65.0, 100.0, 200.0, 500.0, 1000.0};
    int trials = 20, trials_full = 100;
  } baseline;
  struct {
    std::uint64_t base_seed = 1;
    unsigned threads = 1;
    bool full = false;
    bool gnuplot = true;
  } run;

  BandSpec band() const { return BandSpec(signal.f0, signal.bandwidth); }
};

namespace detail {

// "0.5", "1/120", "inf", "-inf"
inline double parse_number(const std::string& raw, const std::string& key) {
  std::string s;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  try {
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (auto slash = s.find('/'); slash != std::string::npos) {
      std::size_t p1 = 0, p2 = 0;
      const std::string a = s.substr(0, slash), b = s.substr(slash + 1);
      const double num = std::stod(a, &p1);
      const double den = std::stod(b, &p2);
      if (p1 != a.size() || p2 != b.size() || den == 0.0) throw std::invalid_argument("fraction");
      return num / den;
    }
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " = '" + raw + "' is not a number");
  }
}

inline std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

class Reader {
public:
  explicit Reader(const boost::property_tree::ptree& pt) {
    for (const auto& [section, body] : pt) {
      if (body.empty()) throw ConfigError("config: key '" + section + "' must be inside a [section]");
      for (const auto& [key, val] : body) values_[section + "." + key] = val.get_value<std::string>();
    }
  }

  void number(const std::string& key, double& out) {
    if (auto v = take(key)) out = parse_number(*v, key);
  }
  void integer(const std::string& key, int& out) {
    if (auto v = take(key)) out = to_int(*v, key);
  }
  void seed(const std::string& key, std::uint64_t& out) {
    if (auto v = take(key)) {
      try {
        std::size_t pos = 0;
        if (v->find('-') != std::string::npos) throw std::invalid_argument("seed");
        out = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("seed");
      } catch (const std::exception&) {
        throw ConfigError("config: " + key + " must be a non-negative integer");
      }
    }
  }
  void flag(const std::string& key, bool& out) {
    if (auto v = take(key)) {
      if (*v == "1" || *v == "true" || *v == "yes") out = true;
      else if (*v == "0" || *v == "false" || *v == "no") out = false;
      else throw ConfigError("config: " + key + " must be true or false");
    }
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = take(key)) out = *v;
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (auto v = take(key)) {
      out.clear();
      for (auto& item : split_list(*v)) out.push_back(parse_number(item, key));
    }
  }
  void integers(const std::string& key, std::vector<int>& out) {
    if (auto v = take(key)) {
      out.clear();
      for (auto& item : split_list(*v)) out.push_back(to_int(item, key));
    }
  }
  void texts(const std::string& key, std::vector<std::string>& out) {
    if (auto v = take(key)) out = split_list(*v);
  }
  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = it->second;
    values_.erase(it);
    return v;
  }
  void require_consumed() const {
    if (!values_.empty()) throw ConfigError("config: unknown key '" + values_.begin()->first + "'");
  }

private:
  static int to_int(const std::string& s, const std::string& key) {
    const double d = parse_number(s, key);
    if (!(std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e9))
      throw ConfigError("config: " + key + " must be an integer");
    return static_cast<int>(d);
  }
  std::map<std::string, std::string> values_;
};

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}
inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s;
}
inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

} // namespace detail

// Checks every invariant the experiments rely on; throws ConfigError.
inline void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  auto positive = [&](double v, const std::string& key) { need(v > 0.0 && std::isfinite(v), key + " must be > 0"); };
  positive(c.signal.f0, "signal.f0");
  positive(c.signal.f1, "signal.f1");
  positive(c.signal.f2, "signal.f2");
  positive(c.signal.bandwidth, "signal.bandwidth");
  need(std::isfinite(c.signal.amplitude) && c.signal.amplitude >= 0.0, "signal.amplitude must be >= 0");
  need(c.signal.f0 >= 0.5 * c.signal.bandwidth, "signal.f0 must be >= bandwidth/2");
  try {
    c.tem.check();
    c.decoder.iter.check();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  need(c.window.t_end > c.window.t_start, "window.t_end must exceed window.t_start");
  need(c.window.oversampling >= 1.0, "window.oversampling must be >= 1");
  need(c.decoder.rcond > 0.0 && c.decoder.rcond < 1.0, "decoder.rcond must be in (0, 1)");
  need(c.decoder.trim > 0.0 && c.decoder.trim <= 1.0, "decoder.trim must be in (0, 1]");
  positive(c.feasibility.bl_delta, "feasibility.bl_delta");
  positive(c.feasibility.iq_bl_delta, "feasibility.iq_bl_delta");
  need(c.feasibility.bl_cutoff >= 0.0, "feasibility.bl_cutoff must be >= 0");

  const auto& fs = c.freq_sweep;
  if (fs.f0_list.empty()) {
    positive(fs.f0_step, "freq_sweep.f0_step");
    positive(fs.f0_step_full, "freq_sweep.f0_step_full");
    need(fs.f0_stop >= fs.f0_start, "freq_sweep.f0_stop must be >= f0_start");
    need(fs.f0_start >= 0.5 * c.signal.bandwidth, "freq_sweep.f0_start must be >= bandwidth/2");
  }
  for (double f : fs.f0_list) need(f >= 0.5 * c.signal.bandwidth, "freq_sweep.f0_list entries must be >= bandwidth/2");
  need(!fs.deltas.empty(), "freq_sweep.deltas must not be empty");
  for (double d : fs.deltas) positive(d, "freq_sweep.deltas");

  const auto& ns = c.noise_sweep;
  positive(ns.delta, "noise_sweep.delta");
  need(!ns.f0_list.empty() && !ns.snr_list.empty() && !ns.kinds.empty(), "noise_sweep axes must not be empty");
  for (double f : ns.f0_list) need(f >= 0.5 * c.signal.bandwidth, "noise_sweep.f0_list entries must be >= bandwidth/2");
  for (double s : ns.snr_list) need(!std::isnan(s) && s != -std::numeric_limits<double>::infinity(), "noise_sweep.snr_list entries must be finite or inf");
  for (const auto& k : ns.kinds) need(k == "white" || k == "bandpass", "noise_sweep.kinds entries must be white or bandpass");
  need(ns.white_oversampling >= 1.0, "noise_sweep.white_oversampling must be >= 1");
  need(ns.trials >= 1 && ns.trials_full >= 1, "noise_sweep trials must be >= 1");

  const auto& qs = c.quant_sweep;
  positive(qs.delta, "quant_sweep.delta");
  need(!qs.f0_list.empty() && !qs.bits.empty(), "quant_sweep axes must not be empty");
  for (double f : qs.f0_list) need(f >= 0.5 * c.signal.bandwidth, "quant_sweep.f0_list entries must be >= bandwidth/2");
  for (int b : qs.bits) need(b >= 1 && b <= 1000, "quant_sweep.bits entries must be in [1, 1000]");
  need(qs.trials >= 1 && qs.trials_full >= 1, "quant_sweep trials must be >= 1");

  const auto& bl = c.baseline;
  need(bl.f0 >= 0.5 * c.signal.bandwidth, "baseline.f0 must be >= bandwidth/2");
  need(!std::isnan(bl.snr_db) && bl.snr_db != -std::numeric_limits<double>::infinity(), "baseline.snr_db must be finite or inf");
  need(bl.noise == "white" || bl.noise == "bandpass", "baseline.noise must be white or bandpass");
  need(!bl.rates.empty(), "baseline.rates must not be empty");
  for (double r : bl.rates) positive(r, "baseline.rates");
  need(bl.trials >= 1 && bl.trials_full >= 1, "baseline trials must be >= 1");
  need(c.run.threads >= 1, "run.threads must be >= 1");
}

inline ExperimentConfig parse_config(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  detail::Reader r(pt);
  ExperimentConfig c;
  r.number("signal.f0", c.signal.f0);
  r.number("signal.f1", c.signal.f1);
  r.number("signal.f2", c.signal.f2);
  r.number("signal.bandwidth", c.signal.bandwidth);
  r.number("signal.amplitude", c.signal.amplitude);
  r.number("tem.kappa", c.tem.kappa);
  r.number("tem.delta", c.tem.delta);
  r.number("tem.b", c.tem.b);
  r.number("tem.c", c.tem.c);
  r.number("window.t_start", c.window.t_start);
  r.number("window.t_end", c.window.t_end);
  r.number("window.oversampling", c.window.oversampling);
  if (auto v = r.take("decoder.kind")) {
    if (*v == "closed_form") c.decoder.kind = DecoderKind::closed_form;
    else if (*v == "apocs") c.decoder.kind = DecoderKind::apocs;
    else throw ConfigError("config: decoder.kind must be closed_form or apocs");
  }
  r.integer("decoder.max_iter", c.decoder.iter.max_iter);
  r.number("decoder.rel_tol", c.decoder.iter.rel_tol);
  if (auto v = r.take("decoder.gain")) {
    if (*v == "auto") c.decoder.gain.reset();
    else if (*v == "unit") c.decoder.gain = GainConvention::unit;
    else if (*v == "doubled") c.decoder.gain = GainConvention::doubled;
    else throw ConfigError("config: decoder.gain must be auto, unit or doubled");
  }
  r.number("decoder.rcond", c.decoder.rcond);
  r.number("decoder.trim", c.decoder.trim);
  r.number("feasibility.bl_delta", c.feasibility.bl_delta);
  r.number("feasibility.bl_cutoff", c.feasibility.bl_cutoff);
  r.number("feasibility.iq_bl_delta", c.feasibility.iq_bl_delta);
  r.number("freq_sweep.f0_start", c.freq_sweep.f0_start);
  r.number("freq_sweep.f0_stop", c.freq_sweep.f0_stop);
  r.number("freq_sweep.f0_step", c.freq_sweep.f0_step);
  r.number("freq_sweep.f0_step_full", c.freq_sweep.f0_step_full);
  r.numbers("freq_sweep.f0_list", c.freq_sweep.f0_list);
  r.numbers("freq_sweep.deltas", c.freq_sweep.deltas);
  r.number("noise_sweep.delta", c.noise_sweep.delta);
  r.numbers("noise_sweep.f0_list", c.noise_sweep.f0_list);
  r.numbers("noise_sweep.snr_list", c.noise_sweep.snr_list);
  r.texts("noise_sweep.kinds", c.noise_sweep.kinds);
  r.number("noise_sweep.white_oversampling", c.noise_sweep.white_oversampling);
  r.integer("noise_sweep.trials", c.noise_sweep.trials);
  r.integer("noise_sweep.trials_full", c.noise_sweep.trials_full);
  r.number("quant_sweep.delta", c.quant_sweep.delta);
  r.numbers("quant_sweep.f0_list", c.quant_sweep.f0_list);
  r.integers("quant_sweep.bits", c.quant_sweep.bits);
  r.integer("quant_sweep.trials", c.quant_sweep.trials);
  r.integer("quant_sweep.trials_full", c.quant_sweep.trials_full);
  r.number("baseline.f0", c.baseline.f0);
  r.number("baseline.snr_db", c.baseline.snr_db);
  r.text("baseline.noise", c.baseline.noise);
  r.numbers("baseline.rates", c.baseline.rates);
  r.integer("baseline.trials", c.baseline.trials);
  r.integer("baseline.trials_full", c.baseline.trials_full);
  r.seed("run.base_seed", c.run.base_seed);
  int threads = static_cast<int>(c.run.threads);
  r.integer("run.threads", threads);
  if (threads < 1) throw ConfigError("config: run.threads must be >= 1");
  c.run.threads = static_cast<unsigned>(threads);
  r.flag("run.full", c.run.full);
  r.flag("run.gnuplot", c.run.gnuplot);
  r.require_consumed();
  validate(c);
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

// Canonical INI form of the effective configuration.
inline void write_config(std::ostream& os, const ExperimentConfig& c) {
  using detail::join;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const char* k, double v) { kv(k, fmt_double(v)); };
  os << "[signal]\n";
  num("f0", c.signal.f0);
  num("f1", c.signal.f1);
  num("f2", c.signal.f2);
  num("bandwidth", c.signal.bandwidth);
  num("amplitude", c.signal.amplitude);
  os << "\n[tem]\n";
  num("kappa", c.tem.kappa);
  num("delta", c.tem.delta);
  num("b", c.tem.b);
  num("c", c.tem.c);
  os << "\n[window]\n";
  num("t_start", c.window.t_start);
  num("t_end", c.window.t_end);
  num("oversampling", c.window.oversampling);
  os << "\n[decoder]\n";
  kv("kind", to_string(c.decoder.kind));
  kv("max_iter", std::to_string(c.decoder.iter.max_iter));
  num("rel_tol", c.decoder.iter.rel_tol);
  kv("gain", c.decoder.gain ? to_string(*c.decoder.gain) : "auto");
  num("rcond", c.decoder.rcond);
  num("trim", c.decoder.trim);
  os << "\n[feasibility]\n";
  num("bl_delta", c.feasibility.bl_delta);
  num("bl_cutoff", c.feasibility.bl_cutoff);
  num("iq_bl_delta", c.feasibility.iq_bl_delta);
  os << "\n[freq_sweep]\n";
  num("f0_start", c.freq_sweep.f0_start);
  num("f0_stop", c.freq_sweep.f0_stop);
  num("f0_step", c.freq_sweep.f0_step);
  num("f0_step_full", c.freq_sweep.f0_step_full);
  kv("f0_list", join(c.freq_sweep.f0_list));
  kv("deltas", join(c.freq_sweep.deltas));
  os << "\n[noise_sweep]\n";
  num("delta", c.noise_sweep.delta);
  kv("f0_list", join(c.noise_sweep.f0_list));
  kv("snr_list", join(c.noise_sweep.snr_list));
  kv("kinds", join(c.noise_sweep.kinds));
  num("white_oversampling", c.noise_sweep.white_oversampling);
  kv("trials", std::to_string(c.noise_sweep.trials));
  kv("trials_full", std::to_string(c.noise_sweep.trials_full));
  os << "\n[quant_sweep]\n";
  num("delta", c.quant_sweep.delta);
  kv("f0_list", join(c.quant_sweep.f0_list));
  kv("bits", join(c.quant_sweep.bits));
  kv("trials", std::to_string(c.quant_sweep.trials));
  kv("trials_full", std::to_string(c.quant_sweep.trials_full));
  os << "\n[baseline]\n";
  num("f0", c.baseline.f0);
  num("snr_db", c.baseline.snr_db);
  kv("noise", c.baseline.noise);
  kv("rates", join(c.baseline.rates));
  kv("trials", std::to_string(c.baseline.trials));
  kv("trials_full", std::to_string(c.baseline.trials_full));
  os << "\n[run]\n";
  kv("base_seed", std::to_string(c.run.base_seed));
  kv("threads", std::to_string(c.run.threads));
  kv("full", c.run.full ? "true" : "false");
  kv("gnuplot", c.run.gnuplot ? "true" : "false");
}

} // namespace bptem
