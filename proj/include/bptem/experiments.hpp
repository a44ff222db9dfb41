#pragma once

#include <bptem/apocs.hpp>
#include <bptem/closed_form.hpp>
#include <bptem/config.hpp>
#include <bptem/metrics.hpp>
#include <bptem/noise.hpp>
#include <bptem/pocs.hpp>
#include <bptem/signal_io.hpp>
#include <bptem/tem.hpp>
#include <bptem/tem_io.hpp>
#include <bptem/test_signal.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

// The experiment commands behind the CLI. Each writes its CSV tables, a
// config echo and a diagnostics file into the output directory.
namespace bptem {

namespace fs = std::filesystem;

// ---- shared pieces ---------------------------------------------------------

// Simulation grid rate: oversampled signal band, and at least four samples per
// shortest firing interval so every interval spans several grid steps.
inline double simulation_rate(double f_hi, double oversampling, const TemParams& p) {
  return std::max(oversampling * 2.0 * f_hi, 4.0 * firing_rate_bounds(p).max_rate);
}

inline TimeGrid simulation_grid(const ExperimentConfig& cfg, double f_hi, double oversampling, const TemParams& p) {
  return make_grid(cfg.window.t_start, cfg.window.t_end, simulation_rate(f_hi, oversampling, p));
}

inline TemParams with_delta(TemParams p, double delta) {
  p.delta = delta;
  return p;
}

// Raise c (and b with it, keeping b - c) so a noisy input stays within the bound.
inline TemParams params_for(const Signal& s, TemParams p) {
  double m = 0.0;
  for (double v : s.values()) m = std::max(m, std::abs(v));
  if (m > p.c) {
    p.b += m - p.c;
    p.c = m;
  }
  return p;
}

struct TestSignal {
  TimeGrid grid;
  Signal x;
  IQPair iq;
};

inline TestSignal make_test_signal(const ExperimentConfig& cfg, double f0, const TimeGrid& g) {
  auto [x, iq] = gen_test_signal(f0, cfg.signal.f1, cfg.signal.f2, g);
  const double a = cfg.signal.amplitude;
  if (a == 1.0) return {g, std::move(x), std::move(iq)};
  std::vector<double> xs(x.values().begin(), x.values().end()), xi(iq.xi().begin(), iq.xi().end()),
      xq(iq.xq().begin(), iq.xq().end());
  for (auto& v : xs) v *= a;
  for (auto& v : xi) v *= a;
  for (auto& v : xq) v *= a;
  return {g, Signal(g, std::move(xs)), IQPair(g, std::move(xi), std::move(xq))};
}

struct Decoded {
  IQPair iq;
  Signal signal;
  int iterations = 0;
  bool converged = true;
  bool monotone = true;
  GainConvention convention = GainConvention::unit;
  double final_residual = 0.0;
  std::size_t rank = 0;
  std::vector<double> residual_history;
};

inline Decoded decode(DecoderKind kind, const FiringSequence& f, const MeasurementSequence& y, const BandSpec& band,
                      const TimeGrid& g, const ExperimentConfig& cfg, bool record = false) {
  if (kind == DecoderKind::apocs) {
    auto it = cfg.decoder.iter;
    it.record_trajectory = it.record_trajectory || record;
    auto r = apocs(f, y, band, g, it, cfg.decoder.gain);
    return {std::move(r.iq),         std::move(r.signal),    r.diag.iterations, r.diag.converged,
            r.diag.monotone,         r.diag.convention,      r.diag.final_residual, 0,
            std::move(r.diag.residual_history)};
  }
  auto sys = build_closed_form(f, y, band, g);
  auto sol = solve_closed_form_full(sys, cfg.decoder.rcond);
  Decoded d{sol.iq, modulate(sol.iq, band.f0)};
  d.rank = sol.rank;
  if (record) {
    VectorState w(g, {sol.iq.xi().begin(), sol.iq.xi().end()}, {sol.iq.xq().begin(), sol.iq.xq().end()});
    d.final_residual = IqDataSet(g, f, y, band.f0).distance(w);
  }
  return d;
}

inline double sndr_or_nan(const Signal& ref, const Signal& rec, double trim) {
  try {
    return sndr_db(ref, rec, trim).sndr_db;
  } catch (const MetricError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Integrator state: starts at -delta, rises by (1/kappa) * integral of (s + b), resets at each firing.
inline Signal integrator_trace(const Signal& s, const FiringSequence& f) {
  const auto& g = s.grid();
  const auto& p = f.params();
  auto t = f.times();
  std::vector<double> out(g.n);
  std::vector<double> cum(g.n, 0.0);  // cumulative integral of (s + b) from t_start
  for (std::size_t i = 1; i < g.n; ++i) cum[i] = cum[i - 1] + 0.5 * g.dt * (s[i - 1] + s[i] + 2.0 * p.b);
  auto cum_at = [&](double tt) {
    const double pos = std::clamp((tt - g.t_start) / g.dt, 0.0, static_cast<double>(g.n - 1));
    const auto c = std::min(static_cast<std::size_t>(pos), g.n - 2);
    const double u = pos - static_cast<double>(c);
    const double a = s[c] + p.b, d = s[c + 1] - s[c];
    return cum[c] + g.dt * u * (a + 0.5 * d * u);
  };
  std::size_t k = 0;
  double base = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double ti = g.time(i);
    while (k < t.size() && t[k] <= ti) base = cum_at(t[k++]);
    out[i] = -p.delta + (cum[i] - base) / p.kappa;
  }
  return Signal(g, std::move(out));
}

// Valid bandpass sampling: some integer m >= 1 with 2 f_hi/m <= fs <= 2 f_lo/(m-1).
inline bool bandpass_rate_valid(double fs, double f_lo, double f_hi) {
  const double eps = 1e-9;
  if (fs >= 2.0 * f_hi * (1.0 - eps)) return true;
  const double width = f_hi - f_lo;
  const auto m_max = static_cast<long long>(std::floor(f_hi / width + eps));
  for (long long m = 2; m <= m_max; ++m) {
    const double lo = 2.0 * f_hi / static_cast<double>(m);
    const double hi = 2.0 * f_lo / static_cast<double>(m - 1);
    if (fs >= lo * (1.0 - eps) && fs <= hi * (1.0 + eps)) return true;
  }
  return false;
}

inline std::string fmt_num(double v) { return std::isnan(v) ? std::string("nan") : fmt_double(v); }

inline std::string verdict_line(const TemParams& p, const BandSpec& band) {
  return "# validation delta=" + fmt_double(p.delta) + " b=" + fmt_double(p.b) + " c=" + fmt_double(p.c) +
         " B_BP=" + fmt_double(band.b_bp) + ": " + describe(validate_params(p, band));
}

class CsvFile {
public:
  CsvFile(const fs::path& path, const std::vector<std::string>& header_comments, const std::string& columns)
      : os_(path, std::ios::binary) {
    if (!os_) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& h : header_comments) os_ << h << '\n';
    os_ << columns << '\n';
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    std::size_t i = 0;
    ((os_ << (i++ ? "," : "") << cell(cells)), ...);
    os_ << '\n';
  }

private:
  static std::string cell(double v) { return fmt_num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ofstream os_;
};

template <typename T>
inline void write_file(const fs::path& path, const T& obj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_csv(os, obj);
}

inline void write_firing_file(const fs::path& path, const FiringSequence& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_firing(os, f);
}

struct CommandReport {
  std::vector<std::string> warnings;
  nlohmann::ordered_json diagnostics;
};

inline void finish(const fs::path& out, const std::string& command, const ExperimentConfig& cfg, CommandReport& rep,
                   std::chrono::steady_clock::time_point t0) {
  {
    std::ofstream os(out / "config_echo.ini", std::ios::binary);
    write_config(os, cfg);
  }
  rep.diagnostics["command"] = command;
  rep.diagnostics["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.diagnostics["warnings"] = rep.warnings;
  std::ofstream os(out / (command + "_diagnostics.json"), std::ios::binary);
  os << rep.diagnostics.dump(2) << '\n';
}

inline std::vector<std::string> common_header(const std::string& command, const ExperimentConfig& cfg) {
  return {"# bptem " + command, "# base_seed=" + std::to_string(cfg.run.base_seed) +
                                    (cfg.run.full ? " axes=full" : " axes=desk")};
}

// ---- feasibility -----------------------------------------------------------

struct FeasibilityRow {
  std::string run, decoder;
  double delta = 0.0;
  std::size_t firings = 0;
  double min_interval = 0.0, max_interval = 0.0;
  int iterations = 0;
  double sndr_x = 0.0, sndr_i = 0.0, sndr_q = 0.0;
};

struct FeasibilityResult {
  std::vector<FeasibilityRow> rows;
  CommandReport report;
};

inline std::pair<double, double> interval_extent(const FiringSequence& f) {
  auto t = f.times();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    lo = std::min(lo, t[k + 1] - t[k]);
    hi = std::max(hi, t[k + 1] - t[k]);
  }
  if (t.size() < 2) lo = std::numeric_limits<double>::quiet_NaN(), hi = lo;
  return {lo, hi};
}

inline FeasibilityResult run_feasibility(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  FeasibilityResult res;
  auto& diag = res.report.diagnostics;
  const auto band = cfg.band();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double trim = cfg.decoder.trim;

  // BP-TEM
  const auto p = cfg.tem;
  const auto bp_grid = simulation_grid(cfg, band.upper(), cfg.window.oversampling, p);
  const auto bp = make_test_signal(cfg, band.f0, bp_grid);
  const auto f = encode(bp.x, p);
  const auto y = measurements(f);
  auto ap = decode(DecoderKind::apocs, f, y, band, bp_grid, cfg, true);
  auto cf = decode(DecoderKind::closed_form, f, y, band, bp_grid, cfg, true);
  auto [bp_lo, bp_hi] = interval_extent(f);
  auto bp_row = [&](const char* dec, const Decoded& d) {
    return FeasibilityRow{"bp_tem", dec, p.delta, f.size(), bp_lo, bp_hi, d.iterations,
                          sndr_or_nan(bp.x, d.signal, trim), sndr_or_nan(bp.iq.in_phase(), d.iq.in_phase(), trim),
                          sndr_or_nan(bp.iq.quadrature(), d.iq.quadrature(), trim)};
  };
  res.rows.push_back(bp_row("apocs", ap));
  res.rows.push_back(bp_row("closed_form", cf));
  write_file(out / "bp_tem_reference.csv", bp.x);
  write_file(out / "bp_tem_iq_reference.csv", bp.iq);
  write_file(out / "bp_tem_reconstruction.csv", ap.signal);
  write_file(out / "bp_tem_iq.csv", ap.iq);
  write_file(out / "bp_tem_iq_closed_form.csv", cf.iq);
  write_file(out / "bp_tem_integrator.csv", integrator_trace(bp.x, f));
  write_firing_file(out / "bp_tem_firing.txt", f);
  diag["bp_tem"] = {{"grid_n", bp_grid.n},
                    {"grid_dt", bp_grid.dt},
                    {"firings", f.size()},
                    {"apocs_iterations", ap.iterations},
                    {"apocs_converged", ap.converged},
                    {"apocs_monotone", ap.monotone},
                    {"apocs_final_residual", ap.final_residual},
                    {"operator_convention", to_string(ap.convention)},
                    {"closed_form_rank", cf.rank},
                    {"closed_form_residual", cf.final_residual}};

  // BL-TEM on the whole signal, treated as lowpass up to f0 + B/2
  const double bl_cut = cfg.feasibility.bl_cutoff > 0.0 ? cfg.feasibility.bl_cutoff : band.upper();
  const auto pbl = with_delta(p, cfg.feasibility.bl_delta);
  const auto bl_grid = simulation_grid(cfg, bl_cut, cfg.window.oversampling, pbl);
  const auto bl = make_test_signal(cfg, band.f0, bl_grid);
  const auto fbl = encode(bl.x, pbl);
  const auto ybl = measurements(fbl);
  auto pbl_res = pocs_bandlimited(fbl, ybl, bl_grid, bl_cut, cfg.decoder.iter);
  if (!pbl_res.sufficient_condition_met)
    res.report.warnings.push_back("bl_tem: 2*cutoff exceeds the minimum firing rate; recovery is not guaranteed");
  auto [bl_lo, bl_hi] = interval_extent(fbl);
  res.rows.push_back({"bl_tem", "pocs", pbl.delta, fbl.size(), bl_lo, bl_hi, pbl_res.iterations,
                      sndr_or_nan(bl.x, pbl_res.signal, trim), nan, nan});
  write_file(out / "bl_tem_reference.csv", bl.x);
  write_file(out / "bl_tem_reconstruction.csv", pbl_res.signal);
  write_file(out / "bl_tem_integrator.csv", integrator_trace(bl.x, fbl));
  write_firing_file(out / "bl_tem_firing.txt", fbl);

  // BL-TEM on each of x^I and x^Q
  const double iq_cut = 0.5 * band.b_bp;
  const auto piq = with_delta(p, cfg.feasibility.iq_bl_delta);
  const auto iq_grid = simulation_grid(cfg, iq_cut, cfg.window.oversampling, piq);
  IQPair iq_ref = gen_test_iq(cfg.signal.f1, cfg.signal.f2, iq_grid);
  {
    std::vector<double> xi(iq_ref.xi().begin(), iq_ref.xi().end()), xq(iq_ref.xq().begin(), iq_ref.xq().end());
    for (auto& v : xi) v *= cfg.signal.amplitude;
    for (auto& v : xq) v *= cfg.signal.amplitude;
    iq_ref = IQPair(iq_grid, std::move(xi), std::move(xq));
  }
  const auto fi = encode(iq_ref.in_phase(), piq);
  const auto fq = encode(iq_ref.quadrature(), piq);
  auto ri = pocs_bandlimited(fi, measurements(fi), iq_grid, iq_cut, cfg.decoder.iter);
  auto rq = pocs_bandlimited(fq, measurements(fq), iq_grid, iq_cut, cfg.decoder.iter);
  IQPair iq_rec(iq_grid, {ri.signal.values().begin(), ri.signal.values().end()},
                {rq.signal.values().begin(), rq.signal.values().end()});
  auto [iq_lo, iq_hi] = interval_extent(fi);
  res.rows.push_back({"bl_tem_iq", "pocs", piq.delta, fi.size() + fq.size(), iq_lo, iq_hi,
                      std::max(ri.iterations, rq.iterations), nan,
                      sndr_or_nan(iq_ref.in_phase(), ri.signal, trim), sndr_or_nan(iq_ref.quadrature(), rq.signal, trim)});
  write_file(out / "bl_tem_iq_reference.csv", iq_ref);
  write_file(out / "bl_tem_iq.csv", iq_rec);
  write_firing_file(out / "bl_tem_iq_firing_i.txt", fi);
  write_firing_file(out / "bl_tem_iq_firing_q.txt", fq);

  auto hdr = common_header("feasibility", cfg);
  hdr.push_back(verdict_line(p, band));
  CsvFile csv(out / "feasibility_summary.csv", hdr,
              "run,decoder,delta,firings,min_interval,max_interval,iterations,sndr_x_db,sndr_i_db,sndr_q_db");
  for (const auto& r : res.rows)
    csv.row(r.run, r.decoder, r.delta, r.firings, r.min_interval, r.max_interval, r.iterations, r.sndr_x, r.sndr_i,
            r.sndr_q);

  if (cfg.run.gnuplot) {
    std::ofstream gp(out / "feasibility.gp", std::ios::binary);
    gp << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't [s]'\n"
          "plot 'bp_tem_reference.csv' using 1:2 with lines title 'x', \\\n"
          "     'bp_tem_reconstruction.csv' using 1:2 with lines title 'BP-TEM APOCS'\n";
  }
  finish(out, "feasibility", cfg, res.report, t0);
  return res;
}

// ---- freq-sweep ------------------------------------------------------------

struct FreqSweepRow {
  double delta = 0.0, f0 = 0.0;
  std::size_t firings = 0;
  int iterations = 0;
  double sndr_x = 0.0, sndr_i = 0.0, sndr_q = 0.0;
};

struct FreqSweepResult {
  std::vector<FreqSweepRow> rows;
  CommandReport report;
};

inline std::vector<double> freq_axis(const ExperimentConfig& cfg) {
  const auto& s = cfg.freq_sweep;
  std::vector<double> f0s = s.f0_list;
  if (f0s.empty()) {
    const double step = cfg.run.full ? s.f0_step_full : s.f0_step;
    const auto count = static_cast<std::size_t>(std::floor((s.f0_stop - s.f0_start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) f0s.push_back(s.f0_start + static_cast<double>(i) * step);
  }
  std::sort(f0s.begin(), f0s.end());
  f0s.erase(std::unique(f0s.begin(), f0s.end()), f0s.end());
  return f0s;
}

// One noiseless encode/decode at carrier f0 with threshold delta.
inline FreqSweepRow freq_cell(const ExperimentConfig& cfg, double delta, double f0) {
  const BandSpec band(f0, cfg.signal.bandwidth);
  const auto p = with_delta(cfg.tem, delta);
  const auto g = simulation_grid(cfg, band.upper(), cfg.window.oversampling, p);
  const auto s = make_test_signal(cfg, f0, g);
  const auto f = encode(s.x, p);
  const auto y = measurements(f);
  auto d = decode(cfg.decoder.kind, f, y, band, g, cfg);
  const double trim = cfg.decoder.trim;
  return {delta,
          f0,
          f.size(),
          d.iterations,
          sndr_or_nan(s.x, d.signal, trim),
          sndr_or_nan(s.iq.in_phase(), d.iq.in_phase(), trim),
          sndr_or_nan(s.iq.quadrature(), d.iq.quadrature(), trim)};
}

inline FreqSweepResult run_freq_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  FreqSweepResult res;
  auto deltas = cfg.freq_sweep.deltas;
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  const auto f0s = freq_axis(cfg);
  res.rows.resize(deltas.size() * f0s.size());
  parallel_for(res.rows.size(), cfg.run.threads, [&](std::size_t i) {
    res.rows[i] = freq_cell(cfg, deltas[i / f0s.size()], f0s[i % f0s.size()]);
  });

  auto hdr = common_header("freq-sweep", cfg);
  hdr.push_back(std::string("# decoder=") + to_string(cfg.decoder.kind));
  for (double d : deltas) hdr.push_back(verdict_line(with_delta(cfg.tem, d), BandSpec(f0s.back(), cfg.signal.bandwidth)));
  CsvFile csv(out / "freq_sweep.csv", hdr, "delta,f0,firings,iterations,sndr_db,sndr_i_db,sndr_q_db");
  for (const auto& r : res.rows) csv.row(r.delta, r.f0, r.firings, r.iterations, r.sndr_x, r.sndr_i, r.sndr_q);
  if (cfg.run.gnuplot) {
    std::ofstream gp(out / "freq_sweep.gp", std::ios::binary);
    gp << "set datafile separator ','\nset xlabel 'f0 [Hz]'\nset ylabel 'SNDR [dB]'\n"
          "plot for [d in '";
    for (std::size_t i = 0; i < deltas.size(); ++i) gp << (i ? " " : "") << fmt_double(deltas[i]);
    gp << "'] 'freq_sweep.csv' using ($1==d+0 ? $2 : 1/0):5 with linespoints title 'delta='.d\n";
  }
  auto& diag = res.report.diagnostics;
  diag["decoder"] = to_string(cfg.decoder.kind);
  diag["cells"] = res.rows.size();
  diag["grid_rule"] = "rate = max(oversampling*2*(f0+B/2), 4*max firing rate)";
  finish(out, "freq-sweep", cfg, res.report, t0);
  return res;
}

// ---- noise-sweep -----------------------------------------------------------

struct NoiseSweepRow {
  std::string kind;
  double f0 = 0.0, snr_in = 0.0;
  double sndr_mean = 0.0, sndr_std = 0.0;
  int trials = 0;
};

struct NoiseSweepResult {
  std::vector<NoiseSweepRow> rows;
  CommandReport report;
};

// Noisy encode/decode trial; returns SNDR against the clean signal.
inline double noise_trial(const ExperimentConfig& cfg, const std::string& kind, double f0, double snr, double delta,
                          std::uint64_t seed) {
  const BandSpec band(f0, cfg.signal.bandwidth);
  const auto p0 = with_delta(cfg.tem, delta);
  const bool white = kind == "white" && snr != no_noise;
  const double os = white ? cfg.noise_sweep.white_oversampling : cfg.window.oversampling;
  const auto g = simulation_grid(cfg, band.upper(), os, p0);
  const auto s = make_test_signal(cfg, f0, g);
  const auto nk = kind == "white" ? NoiseKind::white_noise() : NoiseKind::bandpass_noise(band);
  const auto xn = add_noise(s.x, snr, nk, seed);
  const auto p = params_for(xn, p0);
  const auto f = encode(xn, p);
  const auto y = measurements(f);
  auto d = decode(cfg.decoder.kind, f, y, band, g, cfg);
  return sndr_db(s.x, d.signal, cfg.decoder.trim).sndr_db;
}

inline NoiseSweepResult run_noise_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  const auto& ns = cfg.noise_sweep;
  const int trials = cfg.run.full ? ns.trials_full : ns.trials;
  auto kinds = ns.kinds;
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  auto f0s = ns.f0_list;
  std::sort(f0s.begin(), f0s.end());
  f0s.erase(std::unique(f0s.begin(), f0s.end()), f0s.end());
  auto snrs = ns.snr_list;
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());

  const std::size_t cells = kinds.size() * f0s.size() * snrs.size();
  const auto T = static_cast<std::size_t>(trials);
  std::vector<double> values(cells * T);
  parallel_for(values.size(), cfg.run.threads, [&](std::size_t i) {
    const std::size_t cell = i / T, t = i % T;
    const auto& kind = kinds[cell / (f0s.size() * snrs.size())];
    const double f0 = f0s[(cell / snrs.size()) % f0s.size()];
    const double snr = snrs[cell % snrs.size()];
    const std::uint64_t seed = cfg.run.base_seed + t;
    try {
      values[i] = noise_trial(cfg, kind, f0, snr, ns.delta, seed);
    } catch (const std::exception& e) {
      throw TrialError(seed, e.what());
    }
  });

  NoiseSweepResult res;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    auto mc = monte_carlo([&](std::uint64_t seed) { return values[cell * T + (seed - cfg.run.base_seed)]; }, T,
                          cfg.run.base_seed);
    res.rows.push_back({kinds[cell / (f0s.size() * snrs.size())], f0s[(cell / snrs.size()) % f0s.size()],
                        snrs[cell % snrs.size()], mc.mean, mc.stddev, trials});
  }

  auto hdr = common_header("noise-sweep", cfg);
  hdr.push_back(std::string("# decoder=") + to_string(cfg.decoder.kind) + " white_oversampling=" +
                fmt_double(ns.white_oversampling) + " trials=" + std::to_string(trials));
  hdr.push_back(verdict_line(with_delta(cfg.tem, ns.delta), BandSpec(f0s.back(), cfg.signal.bandwidth)));
  CsvFile csv(out / "noise_sweep.csv", hdr, "kind,f0,snr_in_db,sndr_rec_db,sndr_std_db,trials");
  for (const auto& r : res.rows) csv.row(r.kind, r.f0, r.snr_in, r.sndr_mean, r.sndr_std, r.trials);
  if (cfg.run.gnuplot) {
    std::ofstream gp(out / "noise_sweep.gp", std::ios::binary);
    gp << "set datafile separator ','\nset xlabel 'SNR_IN [dB]'\nset ylabel 'SNDR_REC [dB]'\n"
          "plot 'noise_sweep.csv' using 3:4 with points title 'SNDR_REC', x title 'SNR_IN'\n";
  }
  auto& diag = res.report.diagnostics;
  diag["decoder"] = to_string(cfg.decoder.kind);
  diag["cells"] = cells;
  diag["trials"] = trials;
  diag["encoder_bound_rule"] = "c raised to max|x+w| when exceeded, b = c + (b0 - c0)";
  finish(out, "noise-sweep", cfg, res.report, t0);
  return res;
}

// ---- quant-sweep -----------------------------------------------------------

struct QuantSweepRow {
  double f0 = 0.0;
  int n_bits = 0;
  double step = 0.0;
  double sndr_mean = 0.0, sndr_std = 0.0, sndr_unquantized = 0.0;
  int trials = 0;
  std::size_t collisions = 0;
};

struct QuantSweepResult {
  std::vector<QuantSweepRow> rows;
  CommandReport report;
};

inline QuantSweepResult run_quant_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  const auto& qs = cfg.quant_sweep;
  const int trials = cfg.run.full ? qs.trials_full : qs.trials;
  const auto T = static_cast<std::size_t>(trials);
  auto f0s = qs.f0_list;
  std::sort(f0s.begin(), f0s.end());
  f0s.erase(std::unique(f0s.begin(), f0s.end()), f0s.end());
  auto bits = qs.bits;
  std::sort(bits.begin(), bits.end());
  bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
  const auto p = with_delta(cfg.tem, qs.delta);

  // task layout: per f0, one unquantized run then bits x trials quantized runs
  const std::size_t per_f0 = 1 + bits.size() * T;
  std::vector<double> values(f0s.size() * per_f0);
  std::vector<std::size_t> collisions(values.size(), 0);
  parallel_for(values.size(), cfg.run.threads, [&](std::size_t i) {
    const double f0 = f0s[i / per_f0];
    const std::size_t j = i % per_f0;
    const BandSpec band(f0, cfg.signal.bandwidth);
    const auto g = simulation_grid(cfg, band.upper(), cfg.window.oversampling, p);
    const auto s = make_test_signal(cfg, f0, g);
    auto f = encode(s.x, p);
    std::uint64_t seed = 0;
    if (j > 0) {
      const int nb = bits[(j - 1) / T];
      seed = cfg.run.base_seed + (j - 1) % T;
      try {
        f = quantize_times(f, nb, seed, &collisions[i]);
      } catch (const std::exception& e) {
        throw TrialError(seed, e.what());
      }
    }
    try {
      const auto y = measurements(f);
      auto d = decode(cfg.decoder.kind, f, y, band, g, cfg);
      values[i] = sndr_db(s.x, d.signal, cfg.decoder.trim).sndr_db;
    } catch (const TrialError&) {
      throw;
    } catch (const std::exception& e) {
      if (j == 0) throw;
      throw TrialError(seed, e.what());
    }
  });

  QuantSweepResult res;
  for (std::size_t a = 0; a < f0s.size(); ++a) {
    const double unq = values[a * per_f0];
    for (std::size_t b = 0; b < bits.size(); ++b) {
      const std::size_t base = a * per_f0 + 1 + b * T;
      auto mc = monte_carlo([&](std::uint64_t seed) { return values[base + (seed - cfg.run.base_seed)]; }, T,
                            cfg.run.base_seed);
      std::size_t col = 0;
      for (std::size_t t = 0; t < T; ++t) col += collisions[base + t];
      res.rows.push_back({f0s[a], bits[b], quantization_step(p, bits[b]), mc.mean, mc.stddev, unq, trials, col});
    }
  }

  auto hdr = common_header("quant-sweep", cfg);
  hdr.push_back(std::string("# decoder=") + to_string(cfg.decoder.kind) + " trials=" + std::to_string(trials));
  hdr.push_back(verdict_line(p, BandSpec(f0s.back(), cfg.signal.bandwidth)));
  CsvFile csv(out / "quant_sweep.csv", hdr,
              "f0,n_bits,quant_step,sndr_db,sndr_std_db,sndr_unquantized_db,trials,collisions");
  for (const auto& r : res.rows)
    csv.row(r.f0, r.n_bits, r.step, r.sndr_mean, r.sndr_std, r.sndr_unquantized, r.trials, r.collisions);
  if (cfg.run.gnuplot) {
    std::ofstream gp(out / "quant_sweep.gp", std::ios::binary);
    gp << "set datafile separator ','\nset xlabel 'f0 [Hz]'\nset ylabel 'bits'\nset zlabel 'SNDR [dB]'\n"
          "splot 'quant_sweep.csv' using 1:2:4 with points title 'SNDR'\n";
  }
  std::size_t total_col = 0;
  for (auto c : collisions) total_col += c;
  if (total_col) res.report.warnings.push_back("quant-sweep: " + std::to_string(total_col) + " firing-time collisions repaired");
  auto& diag = res.report.diagnostics;
  diag["decoder"] = to_string(cfg.decoder.kind);
  diag["trials"] = trials;
  diag["collisions"] = total_col;
  finish(out, "quant-sweep", cfg, res.report, t0);
  return res;
}

// ---- baseline-uniform ------------------------------------------------------

struct BaselineRow {
  double rate = 0.0;
  double sndr_mean = 0.0, sndr_std = 0.0;
  int trials = 0;
  bool valid = true;
};

struct BaselineResult {
  std::vector<BaselineRow> rows;
  CommandReport report;
};

// Keeps every M-th grid sample, zero-stuffs back onto the grid and applies the
// ideal bandpass: interpolation from uniform samples at rate 1/(M dt).
inline Signal uniform_bandpass_reconstruction(const Signal& x, std::size_t M, const BandSpec& band) {
  if (M < 1) throw ParameterError("uniform_bandpass_reconstruction: M must be >= 1");
  const auto& g = x.grid();
  std::vector<double> z(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; i += M) z[i] = static_cast<double>(M) * x[i];
  return Signal(g, bandpass(z, g, band.lower(), band.upper()));
}

// Uniform samples of the noisy signal at rate fs, rebuilt by zero-stuffing onto a
// fine grid and ideal bandpass filtering. The fine grid rate is an integer
// multiple of fs so the samples sit on grid points.
inline double baseline_trial(const ExperimentConfig& cfg, double fs_rate, std::uint64_t seed) {
  const auto& bc = cfg.baseline;
  const BandSpec band(bc.f0, cfg.signal.bandwidth);
  const double fine = cfg.window.oversampling * 2.0 * band.upper();
  const auto M = static_cast<std::size_t>(std::ceil(fine / fs_rate));
  const auto ns = static_cast<std::size_t>(std::floor((cfg.window.t_end - cfg.window.t_start) * fs_rate + 1e-9));
  if (ns < 2) throw ParameterError("baseline: window too short for the sample rate");
  const TimeGrid g(cfg.window.t_start, 1.0 / (fs_rate * static_cast<double>(M)), ns * M);
  const auto s = make_test_signal(cfg, bc.f0, g);
  const auto nk = bc.noise == "white" ? NoiseKind::white_noise() : NoiseKind::bandpass_noise(band);
  const auto xn = add_noise(s.x, bc.snr_db, nk, seed);
  return sndr_db(s.x, uniform_bandpass_reconstruction(xn, M, band), cfg.decoder.trim).sndr_db;
}

inline BaselineResult run_baseline_uniform(const ExperimentConfig& cfg, const fs::path& out) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  const auto& bc = cfg.baseline;
  const int trials = cfg.run.full ? bc.trials_full : bc.trials;
  const auto T = static_cast<std::size_t>(trials);
  auto rates = bc.rates;
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  const BandSpec band(bc.f0, cfg.signal.bandwidth);

  std::vector<double> values(rates.size() * T);
  parallel_for(values.size(), cfg.run.threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.run.base_seed + i % T;
    try {
      values[i] = baseline_trial(cfg, rates[i / T], seed);
    } catch (const std::exception& e) {
      throw TrialError(seed, e.what());
    }
  });

  BaselineResult res;
  for (std::size_t r = 0; r < rates.size(); ++r) {
    auto mc = monte_carlo([&](std::uint64_t seed) { return values[r * T + (seed - cfg.run.base_seed)]; }, T,
                          cfg.run.base_seed);
    const bool ok = bandpass_rate_valid(rates[r], band.lower(), band.upper());
    if (!ok) res.report.warnings.push_back("baseline: rate " + fmt_double(rates[r]) + " Hz aliases the band");
    res.rows.push_back({rates[r], mc.mean, mc.stddev, trials, ok});
  }

  auto hdr = common_header("baseline-uniform", cfg);
  hdr.push_back("# f0=" + fmt_double(bc.f0) + " B_BP=" + fmt_double(band.b_bp) + " noise=" + bc.noise +
                " snr_in_db=" + fmt_double(bc.snr_db) + " trials=" + std::to_string(trials));
  CsvFile csv(out / "baseline_uniform.csv", hdr, "sample_rate,sndr_db,sndr_std_db,trials,aliasing");
  for (const auto& r : res.rows) csv.row(r.rate, r.sndr_mean, r.sndr_std, r.trials, r.valid ? "none" : "in_band");
  if (cfg.run.gnuplot) {
    std::ofstream gp(out / "baseline_uniform.gp", std::ios::binary);
    gp << "set datafile separator ','\nset logscale x\nset xlabel 'fs [Hz]'\nset ylabel 'SNDR [dB]'\n"
          "plot 'baseline_uniform.csv' using 1:2 with linespoints title 'uniform sampling'\n";
  }
  res.report.diagnostics["trials"] = trials;
  finish(out, "baseline-uniform", cfg, res.report, t0);
  return res;
}

} // namespace bptem
