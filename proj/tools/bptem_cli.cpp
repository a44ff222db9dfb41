// bptem_cli: runs one experiment and writes its tables to --out.

#include <bptem/experiments.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  bool full = false;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "INI config file (defaults when omitted)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_flag("--full", o.full, "use the full sweep axes and trial counts");
  cmd->add_option("--seed", o.seed, "base seed for noise and quantization");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

bptem::ExperimentConfig load(const Options& o) {
  bptem::ExperimentConfig cfg;
  if (!o.config.empty()) {
    std::ifstream is(o.config);
    if (!is) throw bptem::ConfigError("config: cannot open " + o.config);
    cfg = bptem::parse_config(is);
  }
  if (o.full) cfg.run.full = true;
  if (o.seed) cfg.run.base_seed = *o.seed;
  if (o.threads) cfg.run.threads = *o.threads;
  bptem::validate(cfg);
  return cfg;
}

void print_warnings(const bptem::CommandReport& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandpass time-encoding experiments"};
  app.require_subcommand(1);
  Options o;
  auto* feas = app.add_subcommand("feasibility", "encode and reconstruct the test signal");
  auto* freq = app.add_subcommand("freq-sweep", "SNDR versus carrier frequency");
  auto* noise = app.add_subcommand("noise-sweep", "SNDR versus input SNR");
  auto* quant = app.add_subcommand("quant-sweep", "SNDR versus firing-time quantization");
  auto* base = app.add_subcommand("baseline-uniform", "uniform bandpass sampling comparator");
  for (auto* c : {feas, freq, noise, quant, base}) add_common(c, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load(o);
    const std::filesystem::path out(o.out);
    if (feas->parsed()) {
      auto r = bptem::run_feasibility(cfg, out);
      print_warnings(r.report);
      for (const auto& row : r.rows)
        std::cout << row.run << " (" << row.decoder << "): firings=" << row.firings << " sndr_x=" << row.sndr_x
                  << " dB\n";
    } else if (freq->parsed()) {
      auto r = bptem::run_freq_sweep(cfg, out);
      print_warnings(r.report);
      std::cout << r.rows.size() << " rows written to " << (out / "freq_sweep.csv").string() << '\n';
    } else if (noise->parsed()) {
      auto r = bptem::run_noise_sweep(cfg, out);
      print_warnings(r.report);
      std::cout << r.rows.size() << " rows written to " << (out / "noise_sweep.csv").string() << '\n';
    } else if (quant->parsed()) {
      auto r = bptem::run_quant_sweep(cfg, out);
      print_warnings(r.report);
      std::cout << r.rows.size() << " rows written to " << (out / "quant_sweep.csv").string() << '\n';
    } else if (base->parsed()) {
      auto r = bptem::run_baseline_uniform(cfg, out);
      print_warnings(r.report);
      std::cout << r.rows.size() << " rows written to " << (out / "baseline_uniform.csv").string() << '\n';
    }
  } catch (const bptem::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bptem::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
