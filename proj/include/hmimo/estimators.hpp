#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "hmimo/dictionaries.hpp"
#include "hmimo/graphcut_emrf.hpp"
#include "hmimo/types.hpp"

namespace hmimo {

enum class VarianceMode { oracle_profile, empirical };

std::string_view to_string(VarianceMode m);
VarianceMode parse_variance_mode(std::string_view s);

struct GcseConfig {
  int max_iters = 10;
  double residual_tol = 0.0;
  int sparsity = 8;          // K~
  double eta = 0.3;
  VarianceMode variance_mode = VarianceMode::empirical;
  /// Use the measurement-domain noise floor ||r||^2 / #zeros and the
  /// per-vertex sigma^2 floors instead of the coefficient-domain rules.
  bool literal_evidence = false;

  void validate(Eigen::Index columns) const;
};

/// Sensing matrix C Psi together with the synthesis dictionary Psi. The
/// dictionary is not owned and must outlive the model.
struct SparseModel {
  cmat sensing;
  const cmat* synthesis = nullptr;

  static SparseModel from(const cmat& combiner, const Dictionary& dict);
  Eigen::Index columns() const { return sensing.cols(); }
};

struct EstimationResult {
  cvec coeffs;
  SupportVector support;
  cvec spatial_estimate;
  std::vector<double> residual_trace;
  int iterations = 0;
  /// Iterations where the cut selected nothing and the top-K~ guard fired.
  int fallback_iterations = 0;
};

/// Keeps the k largest-magnitude entries; ties go to the lower index.
cvec trim(const cvec& v, std::size_t k);

/// Minimum-norm least squares on the +1 columns, scattered back and trimmed to k.
cvec ls_on_support(const cmat& sensing, const cvec& y, const SupportVector& support, std::size_t k);

struct EvidenceInputs {
  const cmat* sensing = nullptr;
  const cvec* residual = nullptr;
  const cvec* prev_coeffs = nullptr;
  const SupportVector* prev_support = nullptr;
  VarianceMode mode = VarianceMode::empirical;
  /// Prior coefficient variances, required in oracle_profile mode.
  const std::vector<double>* prior_variances = nullptr;
  int sparsity = 1;
  bool literal = false;
};

/// Matched-filter evidence h_prev + <a_l, r> / ||a_l||^2 and the variances
/// that enter the data terms.
VertexEvidence proxy_evidence(const EvidenceInputs& in);

struct GcseIterate {
  int iteration;
  const VertexEvidence& evidence;
  const UnaryEnergies& unary;
  const SupportVector& cut;
  bool fallback;
};

using GcseObserver = std::function<void(const GcseIterate&)>;

EstimationResult gcse(const cvec& y, const SparseModel& model, const EmrfGraph& graph, const GcseConfig& cfg,
                      const std::vector<double>* prior_variances = nullptr, const GcseObserver& observer = {});

EstimationResult omp(const cvec& y, const SparseModel& model, int k, double residual_tol);

/// ||estimate - truth||^2 / ||truth||^2.
double nmse(const cvec& estimate, const cvec& truth);

}  // namespace hmimo
