#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmimo/channel_model.hpp"
#include "hmimo/dictionaries.hpp"
#include "hmimo/estimators.hpp"
#include "hmimo/graphcut_emrf.hpp"
#include "hmimo/measurement.hpp"
#include "hmimo/scenario.hpp"

namespace hmimo {

/// Dictionary, MRF and prior variances for one sparsifying domain.
struct DomainContext {
  Dictionary dict;
  EmrfGraph graph;
  /// Psi^H Psi^f projection used to map wavenumber variances into this
  /// domain; empty for the wavenumber domain itself.
  cmat from_wavenumber;
};

/// Immutable state shared by every cell of a scenario.
struct PreparedScenario {
  Scenario scenario;
  WavenumberIndexSet index_set;
  VarianceProfile profile;
  std::map<Domain, DomainContext> domains;
};

struct MemoryEstimate {
  double shared_bytes = 0.0;
  double per_worker_bytes = 0.0;
  unsigned workers = 1;
  double total() const { return shared_bytes + per_worker_bytes * workers; }
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MemoryEstimate estimate_memory(const Scenario& s, std::size_t cells);
/// Throws ResourceError with the size breakdown when the estimate exceeds the limit.
void check_memory(const Scenario& s, std::size_t cells);

PreparedScenario prepare(const Scenario& s);

/// Channel for one run seed, from the scenario's channel kind.
ChannelRealization scenario_channel(const PreparedScenario& p, std::uint64_t seed);

/// Prior coefficient variances for `domain` given wavenumber variances.
std::vector<double> domain_prior(const PreparedScenario& p, Domain domain, const std::vector<double>& wavenumber_var);

struct RunRecord {
  std::string scenario;
  Domain domain = Domain::wavenumber;
  EstimatorKind estimator = EstimatorKind::gcse;
  /// GCSE variance mode, or "none" for OMP.
  std::string variance_mode = "none";
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  double nmse = 0.0;
  int iterations = 0;
  std::size_t support_size = 0;
  int fallback_iterations = 0;
  double final_residual = 0.0;
  double noise_variance = 0.0;
  std::string trace_id;
  std::vector<double> residual_trace;
  double wall_time_s = 0.0;
};

/// All domain x estimator runs of one (seed, snr) cell; they share one observation.
std::vector<RunRecord> run_cell(const PreparedScenario& p, std::uint64_t seed, double snr_db);

/// Every cell, ordered by (seed, snr, domain, estimator) as listed in the scenario.
std::vector<RunRecord> run_scenario(const PreparedScenario& p);
std::vector<RunRecord> run_scenario(const Scenario& s);

struct SummaryRow {
  Domain domain;
  EstimatorKind estimator;
  std::string variance_mode;
  double snr_db;
  std::size_t runs;
  double median_nmse;
  double mean_nmse;
  double median_iterations;
  double mean_iterations;
};

/// Per (domain, estimator, variance mode, snr) statistics; independent of record order.
std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records);

void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_traces_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_timings_csv(std::ostream& os, const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct SpacingRow {
  double spacing;
  double dimensionality_ratio;
  double mismatch_probability;
};

/// Rows for spacing 1/2, 1/4 and 1/8.
std::vector<SpacingRow> spacing_table();
void write_spacing_csv(std::ostream& os, const std::vector<SpacingRow>& rows);

struct LeakageRealization {
  std::uint64_t seed;
  cvec wavenumber_coeffs;
  cvec angular_coeffs;
  double wavenumber_fraction;
  double angular_fraction;
};

struct LeakageReport {
  /// Number of wavenumber indices holding at least 1% of the profile power.
  std::size_t significant;
  std::vector<LeakageRealization> realizations;
  double median_wavenumber_fraction;
  double median_angular_fraction;
};

std::size_t significant_index_count(const VarianceProfile& profile, double fraction = 0.01);

LeakageReport analyze_leakage(const PreparedScenario& p);

/// Columns: seed, domain, index_x, index_y, power.
void write_leakage_power_csv(std::ostream& os, const PreparedScenario& p, const LeakageReport& r);
/// Columns: seed, significant, wavenumber_fraction, angular_fraction.
void write_leakage_summary_csv(std::ostream& os, const LeakageReport& r);

double median(std::vector<double> v);

}  // namespace hmimo
