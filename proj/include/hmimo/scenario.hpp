#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hmimo/array_geometry.hpp"
#include "hmimo/channel_model.hpp"
#include "hmimo/estimators.hpp"
#include "hmimo/measurement.hpp"

namespace hmimo {

enum class DomainSelection { angular, wavenumber, both };
enum class EstimatorKind { gcse, omp };
/// clustered: coefficients drawn from the integrated VMF profile.
/// block: a random connected patch of `block_size` wavenumber indices with
/// unit-variance coefficients.
enum class ChannelKind { clustered, block };

std::string_view to_string(DomainSelection d);
std::string_view to_string(EstimatorKind e);
std::string_view to_string(ChannelKind c);
DomainSelection parse_domain_selection(std::string_view s);
EstimatorKind parse_estimator(std::string_view s);
ChannelKind parse_channel_kind(std::string_view s);

std::vector<Domain> expand(DomainSelection d);

struct OmpConfig {
  int sparsity = 8;
  double residual_tol = 0.0;
};

struct Scenario {
  std::string name = "desk";
  UpaConfig array;
  AngularSpectrum spectrum;
  CombinerConfig combiner;  // seed is ignored; derived per run seed
  GcseConfig gcse;
  OmpConfig omp;
  std::vector<double> snr_grid_db;
  std::vector<std::uint64_t> seeds;
  DomainSelection domain = DomainSelection::both;
  std::vector<EstimatorKind> estimators{EstimatorKind::gcse, EstimatorKind::omp};
  ChannelKind channel = ChannelKind::clustered;
  int block_size = 8;
  std::size_t mc_samples = 1000000;
  std::uint64_t variance_seed = 1;
  SnrConvention snr_convention = SnrConvention::total;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;
  /// Refuse to start above this estimated working set; 0 reads MemAvailable.
  double memory_limit_bytes = 0.0;

  /// Throws std::invalid_argument describing the first violated rule.
  void validate() const;
};

/// N_x = N_y = 16, spacing 1/4, 64 feeds, four clusters.
Scenario desk_preset();
/// N_x = N_y = 129, spacing 1/4, 1000 feeds at 7 GHz.
Scenario paper_preset();
Scenario preset(std::string_view name);

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
void apply_json(Scenario& base, const nlohmann::json& j);

/// Reads a JSON config file. A top-level "preset" key picks the base
/// scenario, else `fallback_preset` is used.
Scenario load_scenario(const std::filesystem::path& path, std::string_view fallback_preset = "desk");

nlohmann::json to_json(const Scenario& s);

/// "inf" for +infinity, shortest round-trip text otherwise.
std::string format_snr(double snr_db);

}  // namespace hmimo
