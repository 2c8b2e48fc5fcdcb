// Command-line front end: simulate, estimate, sweep, analyze-leakage.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hmimo/harness.hpp"

namespace fs = std::filesystem;
using namespace hmimo;

namespace {

struct Options {
  std::string config;
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;
  std::string snr_db;
  std::string domain;
  std::string estimator;
  std::string out = "out";
  std::optional<unsigned> threads;
};

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "+inf") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) throw CLI::ValidationError("--snr-db", "bad SNR value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--snr-db", "empty list");
  return out;
}

Scenario resolve(const Options& o) {
  Scenario s = o.config.empty() ? preset(o.preset) : load_scenario(o.config, o.preset);
  if (o.seed) s.seeds = {*o.seed};
  if (!o.snr_db.empty()) s.snr_grid_db = parse_snr_list(o.snr_db);
  if (!o.domain.empty()) s.domain = parse_domain_selection(o.domain);
  if (!o.estimator.empty()) s.estimators = {parse_estimator(o.estimator)};
  if (o.threads) s.threads = *o.threads;
  s.validate();
  return s;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", (dir / name).string()));
  return f;
}

template <class F>
void write_file(const fs::path& dir, const std::string& name, F&& fill) {
  std::ofstream f = open_out(dir, name);
  fill(f);
}

void write_manifest(const fs::path& dir, const std::string& command, const Scenario& s,
                    const std::vector<std::string>& outputs, const nlohmann::json& extra = {}) {
  nlohmann::json m;
  m["tool"] = "hmimo";
  m["version"] = HMIMO_VERSION;
  m["command"] = command;
  m["scenario"] = to_json(s);
  m["outputs"] = outputs;
  if (!extra.is_null()) m["details"] = extra;
  write_file(dir, "manifest.json", [&](std::ostream& f) { f << m.dump(2) << "\n"; });
}

void write_run_outputs(const fs::path& dir, const std::string& command, const Scenario& s,
                       const std::vector<RunRecord>& records) {
  write_file(dir, "results.csv", [&](std::ostream& f) { write_results_csv(f, records); });
  write_file(dir, "traces.csv", [&](std::ostream& f) { write_traces_csv(f, records); });
  write_file(dir, "timings.csv", [&](std::ostream& f) { write_timings_csv(f, records); });
  const auto summary = aggregate(records);
  write_file(dir, "summary.csv", [&](std::ostream& f) { write_summary_csv(f, summary); });
  write_manifest(dir, command, s, {"results.csv", "summary.csv", "traces.csv", "timings.csv"},
                 {{"records", records.size()}});
  for (const auto& r : summary)
    fmt::print("{:<10} {:<5} {:<14} snr={:>5}  median_nmse={:.4e}  median_iters={}\n", to_string(r.domain),
               to_string(r.estimator), r.variance_mode, format_snr(r.snr_db), r.median_nmse, r.median_iterations);
}

int cmd_simulate(const Options& o) {
  Scenario s = resolve(o);
  s.domain = DomainSelection::wavenumber;
  check_memory(s, 1);
  const PreparedScenario p = prepare(s);
  const std::uint64_t seed = s.seeds.front();
  const ChannelRealization ch = scenario_channel(p, seed);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  {
    auto f = open_out(dir, "channel.csv");
    f << "n_x,n_y,re,im\n";
    for (Eigen::Index i = 0; i < ch.spatial.size(); ++i) {
      const auto [nx, ny] = antenna_from_flat(s.array, static_cast<std::size_t>(i));
      f << fmt::format("{},{},{:.17g},{:.17g}\n", nx, ny, ch.spatial[i].real(), ch.spatial[i].imag());
    }
  }
  {
    auto f = open_out(dir, "wavenumber_coeffs.csv");
    f << "lx,ly,re,im\n";
    for (std::size_t l = 0; l < p.index_set.size(); ++l) {
      const cplx h = ch.wavenumber_coeffs[static_cast<Eigen::Index>(l)];
      f << fmt::format("{},{},{:.17g},{:.17g}\n", p.index_set[l].lx, p.index_set[l].ly, h.real(), h.imag());
    }
  }
  write_file(dir, "variance_profile.csv", [&](std::ostream& f) { write_variance_csv(f, p.profile); });
  write_manifest(dir, "simulate", s, {"channel.csv", "wavenumber_coeffs.csv", "variance_profile.csv"},
                 {{"seed", seed}, {"index_count", p.index_set.size()}, {"channel_energy", ch.spatial.squaredNorm()}});
  fmt::print("seed {}: N = {}, L = {}, ||H||^2 = {:.6g}, wrote {}\n", seed, s.array.element_count(),
             p.index_set.size(), ch.spatial.squaredNorm(), dir.string());
  return 0;
}

int cmd_estimate(const Options& o) {
  Scenario s = resolve(o);
  s.seeds = {s.seeds.front()};
  s.snr_grid_db = {s.snr_grid_db.front()};
  const auto records = run_scenario(s);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_run_outputs(dir, "estimate", s, records);
  return 0;
}

int cmd_sweep(const Options& o) {
  const Scenario s = resolve(o);
  const auto records = run_scenario(s);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  write_run_outputs(dir, "sweep", s, records);
  return 0;
}

int cmd_leakage(const Options& o) {
  Scenario s = resolve(o);
  s.domain = DomainSelection::both;
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto table = spacing_table();
  write_file(dir, "spacing_table.csv", [&](std::ostream& f) { write_spacing_csv(f, table); });
  fmt::print("{:>8} {:>22} {:>22}\n", "spacing", "dimensionality_ratio", "mismatch_probability");
  for (const auto& r : table)
    fmt::print("{:>8} {:>22.4g} {:>22.4g}\n", r.spacing, r.dimensionality_ratio, r.mismatch_probability);

  check_memory(s, 1);
  const PreparedScenario p = prepare(s);
  const LeakageReport rep = analyze_leakage(p);
  write_file(dir, "leakage_power.csv", [&](std::ostream& f) { write_leakage_power_csv(f, p, rep); });
  write_file(dir, "leakage_summary.csv", [&](std::ostream& f) { write_leakage_summary_csv(f, rep); });
  write_manifest(dir, "analyze-leakage", s, {"spacing_table.csv", "leakage_power.csv", "leakage_summary.csv"},
                 {{"significant", rep.significant},
                  {"median_wavenumber_fraction", rep.median_wavenumber_fraction},
                  {"median_angular_fraction", rep.median_angular_fraction}});
  fmt::print("top-{} captured power (median over {} seeds): wavenumber {:.4f}, angular {:.4f}\n", rep.significant,
             rep.realizations.size(), rep.median_wavenumber_fraction, rep.median_angular_fraction);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holographic MIMO channel simulation and wavenumber-domain estimation"};
  app.set_version_flag("--version", HMIMO_VERSION);
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON scenario file")->check(CLI::ExistingFile);
    sub->add_option("--preset", o.preset, "Base scenario")->check(CLI::IsMember({"desk", "paper"}));
    sub->add_option("--seed", o.seed, "Use this single run seed");
    sub->add_option("--snr-db", o.snr_db, "Comma-separated SNR list in dB (\"inf\" for noiseless)");
    sub->add_option("--domain", o.domain, "Sparsifying domain")
        ->check(CLI::IsMember({"angular", "wavenumber", "both"}));
    sub->add_option("--estimator", o.estimator, "Run only this estimator")->check(CLI::IsMember({"gcse", "omp"}));
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--threads", o.threads, "Worker threads (results do not depend on this)");
  };

  auto* sim = app.add_subcommand("simulate", "Draw one channel and dump it");
  auto* est = app.add_subcommand("estimate", "Run a single (seed, SNR) cell");
  auto* swp = app.add_subcommand("sweep", "Run every seed and SNR of the scenario");
  auto* lk = app.add_subcommand("analyze-leakage", "Angular vs wavenumber power leakage");
  for (auto* sub : {sim, est, swp, lk}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (est->parsed()) return cmd_estimate(o);
    if (swp->parsed()) return cmd_sweep(o);
    if (lk->parsed()) return cmd_leakage(o);
  } catch (const ResourceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}
