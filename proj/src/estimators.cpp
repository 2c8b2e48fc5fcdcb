#include "hmimo/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace hmimo {

std::string_view to_string(VarianceMode m) { return m == VarianceMode::empirical ? "empirical" : "oracle_profile"; }

VarianceMode parse_variance_mode(std::string_view s) {
  if (s == "empirical") return VarianceMode::empirical;
  if (s == "oracle_profile" || s == "oracle") return VarianceMode::oracle_profile;
  throw std::invalid_argument("unknown variance mode '" + std::string(s) + "'");
}

void GcseConfig::validate(Eigen::Index columns) const {
  if (max_iters < 1) throw std::invalid_argument("GcseConfig: max_iters must be at least 1");
  if (sparsity < 1 || sparsity > columns)
    throw std::invalid_argument(fmt::format("GcseConfig: sparsity {} outside [1, {}]", sparsity, columns));
  if (!(eta >= 0.0)) throw std::invalid_argument("GcseConfig: eta must be nonnegative");
  if (!(residual_tol >= 0.0)) throw std::invalid_argument("GcseConfig: residual_tol must be nonnegative");
}

SparseModel SparseModel::from(const cmat& combiner, const Dictionary& dict) {
  if (combiner.cols() != dict.rows())
    throw std::invalid_argument("SparseModel: combiner width does not match the dictionary height");
  return {combiner * dict.matrix, &dict.matrix};
}

namespace {

std::vector<std::size_t> order_by_magnitude(const cvec& v) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::norm(v[a]) > std::norm(v[b]); });
  return idx;
}

}  // namespace

cvec trim(const cvec& v, std::size_t k) {
  if (k >= static_cast<std::size_t>(v.size())) return v;
  const auto order = order_by_magnitude(v);
  cvec out = cvec::Zero(v.size());
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = v[order[i]];
  return out;
}

cvec ls_on_support(const cmat& sensing, const cvec& y, const SupportVector& support, std::size_t k) {
  if (static_cast<Eigen::Index>(support.labels.size()) != sensing.cols())
    throw std::invalid_argument("ls_on_support: support length does not match the column count");
  if (y.size() != sensing.rows()) throw std::invalid_argument("ls_on_support: observation length mismatch");
  std::vector<Eigen::Index> cols;
  for (std::size_t i = 0; i < support.labels.size(); ++i)
    if (support.labels[i] > 0) cols.push_back(static_cast<Eigen::Index>(i));
  cvec out = cvec::Zero(sensing.cols());
  if (cols.empty()) return out;
  const cmat sub = sensing(Eigen::all, cols);
  const cvec x = sub.completeOrthogonalDecomposition().solve(y);
  for (std::size_t i = 0; i < cols.size(); ++i) out[cols[i]] = x[static_cast<Eigen::Index>(i)];
  return trim(out, k);
}

VertexEvidence proxy_evidence(const EvidenceInputs& in) {
  if (!in.sensing || !in.residual || !in.prev_coeffs || !in.prev_support)
    throw std::invalid_argument("proxy_evidence: missing input");
  const cmat& A = *in.sensing;
  const cvec& r = *in.residual;
  const Eigen::Index M = A.cols();
  if (r.size() != A.rows() || in.prev_coeffs->size() != M ||
      static_cast<Eigen::Index>(in.prev_support->labels.size()) != M)
    throw std::invalid_argument("proxy_evidence: shape mismatch");

  const rvec col_sq = A.colwise().squaredNorm().transpose();
  const cvec corr = A.adjoint() * r;
  cvec rc(M);
  for (Eigen::Index l = 0; l < M; ++l) rc[l] = col_sq[l] > 0.0 ? corr[l] / col_sq[l] : cplx(0.0, 0.0);

  VertexEvidence ev;
  ev.evidence = *in.prev_coeffs + rc;

  const auto& labels = in.prev_support->labels;
  const auto zeros = static_cast<Eigen::Index>(std::count(labels.begin(), labels.end(), -1));
  double eps;
  if (in.literal) {
    eps = r.squaredNorm() / static_cast<double>(zeros > 0 ? zeros : M);
  } else {
    // Mean residual correlation power over the zero-labeled vertices.
    double acc = 0.0;
    for (Eigen::Index l = 0; l < M; ++l)
      if (zeros == 0 || labels[l] < 0) acc += std::norm(rc[l]);
    eps = acc / static_cast<double>(zeros > 0 ? zeros : M);
  }
  const double peak = ev.evidence.cwiseAbs2().maxCoeff();
  ev.eps_sq = std::max({eps, 1e-24 * peak, 1e-300});

  ev.sigma_sq.resize(M);
  if (in.mode == VarianceMode::oracle_profile) {
    if (!in.prior_variances || static_cast<Eigen::Index>(in.prior_variances->size()) != M)
      throw std::invalid_argument("proxy_evidence: oracle mode needs one prior variance per column");
    for (Eigen::Index l = 0; l < M; ++l) {
      const double s = (*in.prior_variances)[static_cast<std::size_t>(l)];
      ev.sigma_sq[l] = in.literal ? std::max(s, ev.eps_sq) : s + ev.eps_sq;
    }
  } else if (in.literal) {
    for (Eigen::Index l = 0; l < M; ++l) ev.sigma_sq[l] = std::max(std::norm(ev.evidence[l]), ev.eps_sq * (1 + 1e-6));
  } else {
    // Shared active-coefficient power: evidence energy above the floor,
    // spread over the K~ expected nonzeros.
    const double excess = ev.evidence.squaredNorm() - static_cast<double>(M) * ev.eps_sq;
    const double s = std::max(excess / static_cast<double>(std::max(in.sparsity, 1)), 0.0) + ev.eps_sq * (1 + 1e-6);
    ev.sigma_sq.setConstant(s);
  }
  return ev;
}

EstimationResult gcse(const cvec& y, const SparseModel& model, const EmrfGraph& graph, const GcseConfig& cfg,
                      const std::vector<double>* prior_variances, const GcseObserver& observer) {
  const cmat& A = model.sensing;
  const Eigen::Index M = A.cols();
  cfg.validate(M);
  if (static_cast<Eigen::Index>(graph.size()) != M)
    throw std::invalid_argument("gcse: graph vertex count does not match the sensing columns");
  if (y.size() != A.rows()) throw std::invalid_argument("gcse: observation length mismatch");

  EstimationResult res;
  res.coeffs = cvec::Zero(M);
  res.support = SupportVector::all(static_cast<std::size_t>(M), -1);
  cvec r = y;
  const auto k = static_cast<std::size_t>(cfg.sparsity);

  while (res.iterations < cfg.max_iters && r.norm() >= cfg.residual_tol) {
    ++res.iterations;
    EvidenceInputs in;
    in.sensing = &A;
    in.residual = &r;
    in.prev_coeffs = &res.coeffs;
    in.prev_support = &res.support;
    in.mode = cfg.variance_mode;
    in.prior_variances = prior_variances;
    in.sparsity = cfg.sparsity;
    in.literal = cfg.literal_evidence;
    const VertexEvidence ev = proxy_evidence(in);
    const UnaryEnergies unary = vertex_energies(ev);

    SupportVector cut = min_cut_support(graph, unary);
    SupportVector chosen = cut;
    const bool fallback = cut.count_positive() == 0;
    if (fallback) {
      ++res.fallback_iterations;
      const auto order = order_by_magnitude(ev.evidence);
      for (std::size_t i = 0; i < k; ++i) chosen.labels[order[i]] = 1;
    }
    if (observer) observer(GcseIterate{res.iterations, ev, unary, cut, fallback});

    res.support = std::move(chosen);
    res.coeffs = ls_on_support(A, y, res.support, k);
    r = y - A * res.coeffs;
    res.residual_trace.push_back(r.norm());
  }
  if (model.synthesis) res.spatial_estimate = *model.synthesis * res.coeffs;
  return res;
}

EstimationResult omp(const cvec& y, const SparseModel& model, int k, double residual_tol) {
  const cmat& A = model.sensing;
  const Eigen::Index M = A.cols();
  if (k < 1) throw std::invalid_argument("omp: k must be at least 1");
  if (y.size() != A.rows()) throw std::invalid_argument("omp: observation length mismatch");
  const rvec col_norm = A.colwise().norm().transpose();

  EstimationResult res;
  res.coeffs = cvec::Zero(M);
  res.support = SupportVector::all(static_cast<std::size_t>(M), -1);
  std::vector<Eigen::Index> selected;
  cvec r = y;
  const auto limit = std::min<Eigen::Index>(k, M);
  while (static_cast<Eigen::Index>(selected.size()) < limit && r.norm() > residual_tol) {
    const cvec corr = A.adjoint() * r;
    Eigen::Index best = -1;
    double best_val = -1.0;
    for (Eigen::Index l = 0; l < M; ++l) {
      if (res.support.labels[l] > 0 || col_norm[l] == 0.0) continue;
      const double c = std::abs(corr[l]) / col_norm[l];
      if (c > best_val) {
        best_val = c;
        best = l;
      }
    }
    if (best < 0) break;
    selected.push_back(best);
    res.support.labels[best] = 1;
    const cmat sub = A(Eigen::all, selected);
    const cvec x = sub.completeOrthogonalDecomposition().solve(y);
    res.coeffs.setZero();
    for (std::size_t i = 0; i < selected.size(); ++i) res.coeffs[selected[i]] = x[static_cast<Eigen::Index>(i)];
    r = y - A * res.coeffs;
    res.residual_trace.push_back(r.norm());
    ++res.iterations;
  }
  if (model.synthesis) res.spatial_estimate = *model.synthesis * res.coeffs;
  return res;
}

double nmse(const cvec& estimate, const cvec& truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("nmse: length mismatch");
  const double t = truth.squaredNorm();
  if (t == 0.0) throw std::invalid_argument("nmse: truth is zero");
  return (estimate - truth).squaredNorm() / t;
}

}  // namespace hmimo
