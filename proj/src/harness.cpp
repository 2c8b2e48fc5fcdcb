#include "hmimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "hmimo/random.hpp"

namespace hmimo {

namespace {

unsigned resolve_threads(unsigned requested, std::size_t jobs) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(t, jobs)));
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          f(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double mem_available_bytes() {
  std::ifstream in("/proc/meminfo");
  std::string key;
  double kb = 0.0;
  std::string unit;
  while (in >> key >> kb >> unit)
    if (key == "MemAvailable:") return kb * 1024.0;
  return 0.0;
}

std::string gib(double bytes) { return fmt::format("{:.2f} GiB", bytes / (1024.0 * 1024.0 * 1024.0)); }

}  // namespace

MemoryEstimate estimate_memory(const Scenario& s, std::size_t cells) {
  const double n = s.array.element_count();
  const double l = kPi * s.array.aperture_x() * s.array.aperture_y() + 4.0 * (s.array.aperture_x() + s.array.aperture_y());
  const double nf = s.combiner.n_feeds;
  const double c = sizeof(cplx);
  MemoryEstimate m;
  m.workers = resolve_threads(s.threads, cells);
  double widest = 0.0;
  for (Domain d : expand(s.domain)) {
    const double cols = d == Domain::angular ? n : l;
    m.shared_bytes += n * cols * c;
    if (d == Domain::angular) m.shared_bytes += n * l * c;  // wavenumber-to-angular map
    widest = std::max(widest, cols);
  }
  // Combiner factors and product, then the sensing matrix and one LS copy of it.
  m.per_worker_bytes = 2.0 * nf * n * c + 2.0 * nf * widest * c;
  return m;
}

void check_memory(const Scenario& s, std::size_t cells) {
  const MemoryEstimate m = estimate_memory(s, cells);
  const double limit = s.memory_limit_bytes > 0.0 ? s.memory_limit_bytes : mem_available_bytes();
  if (limit <= 0.0) return;
  if (m.total() > limit)
    throw ResourceError(fmt::format(
        "scenario '{}' needs about {} ({} shared + {} x {} workers) but only {} is available; "
        "reduce the array size, restrict --domain, or lower threads",
        s.name, gib(m.total()), gib(m.shared_bytes), m.workers, gib(m.per_worker_bytes), gib(limit)));
}

PreparedScenario prepare(const Scenario& s) {
  s.validate();
  PreparedScenario p;
  p.scenario = s;
  p.index_set = build_index_set(s.array);
  if (s.channel == ChannelKind::clustered)
    p.profile = integrate_variances(s.spectrum, p.index_set, s.mc_samples, s.variance_seed,
                                    resolve_threads(s.threads, 64));
  else
    p.profile = make_profile(p.index_set, std::vector<double>(p.index_set.size(), 0.0));

  const Dictionary wdict = wavenumber_dictionary(s.array, p.index_set);
  for (Domain d : expand(s.domain)) {
    DomainContext ctx;
    if (d == Domain::wavenumber) {
      ctx.dict = wdict;
    } else {
      ctx.dict = angular_dictionary(s.array);
      ctx.from_wavenumber = ctx.dict.matrix.adjoint() * wdict.matrix;
    }
    ctx.graph = build_emrf(ctx.dict.labels, s.gcse.eta);
    p.domains.emplace(d, std::move(ctx));
  }
  return p;
}

namespace {

// Random connected patch of `size` indices grown from a uniform start vertex.
std::vector<std::size_t> connected_patch(const WavenumberIndexSet& set, std::size_t size, Rng& rng) {
  const std::size_t L = set.size();
  std::vector<bool> in(L, false);
  std::vector<std::size_t> patch;
  std::set<std::size_t> frontier;
  auto take = [&](std::size_t v) {
    in[v] = true;
    patch.push_back(v);
    frontier.erase(v);
    const auto& w = set[v];
    const int nbr[4][2] = {{w.lx - 1, w.ly}, {w.lx + 1, w.ly}, {w.lx, w.ly - 1}, {w.lx, w.ly + 1}};
    for (const auto& q : nbr) {
      const long k = set.find(q[0], q[1]);
      if (k >= 0 && !in[static_cast<std::size_t>(k)]) frontier.insert(static_cast<std::size_t>(k));
    }
  };
  take(static_cast<std::size_t>(rng.next_u64() % L));
  while (patch.size() < size && !frontier.empty()) {
    auto it = frontier.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.next_u64() % frontier.size()));
    take(*it);
  }
  std::sort(patch.begin(), patch.end());
  return patch;
}

std::uint64_t noise_seed(std::uint64_t seed, double snr_db) {
  return derive_seed(seed, {static_cast<std::uint64_t>(Stream::noise), std::bit_cast<std::uint64_t>(snr_db)});
}

}  // namespace

ChannelRealization scenario_channel(const PreparedScenario& p, std::uint64_t seed) {
  const Scenario& s = p.scenario;
  if (s.channel == ChannelKind::clustered) return draw_channel(p.profile, s.array, derive_seed(seed, Stream::channel));
  Rng rng(derive_seed(seed, Stream::support));
  const auto patch = connected_patch(p.index_set, static_cast<std::size_t>(s.block_size), rng);
  ChannelRealization ch;
  ch.seed = seed;
  ch.wavenumber_coeffs = cvec::Zero(static_cast<Eigen::Index>(p.index_set.size()));
  for (std::size_t v : patch) ch.wavenumber_coeffs[static_cast<Eigen::Index>(v)] = rng.complex_normal(1.0);
  ch.spatial = synthesize_spatial(s.array, p.index_set, ch.wavenumber_coeffs);
  return ch;
}

std::vector<double> domain_prior(const PreparedScenario& p, Domain domain, const std::vector<double>& wvar) {
  if (domain == Domain::wavenumber) return wvar;
  const cmat& B = p.domains.at(domain).from_wavenumber;
  std::vector<double> out(static_cast<std::size_t>(B.rows()), 0.0);
  for (Eigen::Index n = 0; n < B.rows(); ++n) {
    double acc = 0.0;
    for (Eigen::Index l = 0; l < B.cols(); ++l) acc += std::norm(B(n, l)) * wvar[static_cast<std::size_t>(l)];
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

std::vector<RunRecord> run_cell(const PreparedScenario& p, std::uint64_t seed, double snr_db) {
  const Scenario& s = p.scenario;
  const ChannelRealization ch = scenario_channel(p, seed);
  CombinerConfig cc = s.combiner;
  cc.seed = derive_seed(seed, Stream::combiner);
  const Combiner comb = build_combiner(s.array, cc);
  const Observation obs = observe(comb.matrix, ch, snr_db, noise_seed(seed, snr_db), s.snr_convention);

  std::vector<double> wvar;
  if (s.channel == ChannelKind::clustered) {
    wvar = p.profile.variances;
  } else {
    wvar.resize(p.index_set.size());
    for (std::size_t l = 0; l < wvar.size(); ++l) wvar[l] = std::norm(ch.wavenumber_coeffs[l]) > 0.0 ? 1.0 : 0.0;
  }

  std::vector<RunRecord> out;
  for (Domain d : expand(s.domain)) {
    const DomainContext& ctx = p.domains.at(d);
    const SparseModel model = SparseModel::from(comb.matrix, ctx.dict);
    const std::vector<double> prior = domain_prior(p, d, wvar);
    for (EstimatorKind e : s.estimators) {
      const auto t0 = std::chrono::steady_clock::now();
      const EstimationResult r = e == EstimatorKind::gcse
                                     ? gcse(obs.y, model, ctx.graph, s.gcse, &prior)
                                     : omp(obs.y, model, s.omp.sparsity, s.omp.residual_tol);
      const auto t1 = std::chrono::steady_clock::now();
      RunRecord rec;
      rec.scenario = s.name;
      rec.domain = d;
      rec.estimator = e;
      if (e == EstimatorKind::gcse) rec.variance_mode = to_string(s.gcse.variance_mode);
      rec.seed = seed;
      rec.snr_db = snr_db;
      rec.nmse = nmse(r.spatial_estimate, ch.spatial);
      rec.iterations = r.iterations;
      rec.support_size = static_cast<std::size_t>((r.coeffs.array() != cplx(0.0, 0.0)).count());
      rec.fallback_iterations = r.fallback_iterations;
      rec.final_residual = r.residual_trace.empty() ? obs.y.norm() : r.residual_trace.back();
      rec.noise_variance = obs.noise_variance;
      rec.trace_id = fmt::format("{}_{}_{}_{}", seed, format_snr(snr_db), to_string(d), to_string(e));
      rec.residual_trace = r.residual_trace;
      rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<RunRecord> run_scenario(const PreparedScenario& p) {
  const Scenario& s = p.scenario;
  const std::size_t n_snr = s.snr_grid_db.size();
  const std::size_t cells = s.seeds.size() * n_snr;
  std::vector<std::vector<RunRecord>> slots(cells);
  parallel_for(cells, resolve_threads(s.threads, cells), [&](std::size_t i) {
    slots[i] = run_cell(p, s.seeds[i / n_snr], s.snr_grid_db[i % n_snr]);
  });
  std::vector<RunRecord> out;
  for (auto& v : slots)
    for (auto& r : v) out.push_back(std::move(r));
  return out;
}

std::vector<RunRecord> run_scenario(const Scenario& s) {
  s.validate();
  check_memory(s, s.seeds.size() * s.snr_grid_db.size());
  return run_scenario(prepare(s));
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

double sorted_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  using Key = std::tuple<int, int, std::string, double>;
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : records) {
    auto& g = groups[{static_cast<int>(r.domain), static_cast<int>(r.estimator), r.variance_mode, r.snr_db}];
    g.first.push_back(r.nmse);
    g.second.push_back(static_cast<double>(r.iterations));
  }
  std::vector<SummaryRow> out;
  for (const auto& [k, g] : groups)
    out.push_back({static_cast<Domain>(std::get<0>(k)), static_cast<EstimatorKind>(std::get<1>(k)), std::get<2>(k),
                   std::get<3>(k), g.first.size(), median(g.first), sorted_mean(g.first), median(g.second),
                   sorted_mean(g.second)});
  return out;
}

void write_results_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "scenario,domain,estimator,variance_mode,seed,snr_db,nmse,iterations,support_size,fallback_iterations,"
        "final_residual,noise_variance,trace_id\n";
  for (const auto& r : records)
    os << fmt::format("{},{},{},{},{},{},{:.17g},{},{},{},{:.17g},{:.17g},{}\n", r.scenario, to_string(r.domain),
                      to_string(r.estimator), r.variance_mode, r.seed, format_snr(r.snr_db), r.nmse, r.iterations,
                      r.support_size, r.fallback_iterations, r.final_residual, r.noise_variance, r.trace_id);
}

void write_traces_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "trace_id,iteration,residual_norm\n";
  for (const auto& r : records)
    for (std::size_t i = 0; i < r.residual_trace.size(); ++i)
      os << fmt::format("{},{},{:.17g}\n", r.trace_id, i + 1, r.residual_trace[i]);
}

void write_timings_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "trace_id,wall_time_s\n";
  for (const auto& r : records) os << fmt::format("{},{:.6f}\n", r.trace_id, r.wall_time_s);
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "domain,estimator,variance_mode,snr_db,runs,median_nmse,mean_nmse,median_nmse_db,median_iterations,"
        "mean_iterations\n";
  for (const auto& r : rows)
    os << fmt::format("{},{},{},{},{},{:.17g},{:.17g},{:.6f},{},{:.17g}\n", to_string(r.domain),
                      to_string(r.estimator), r.variance_mode, format_snr(r.snr_db), r.runs, r.median_nmse,
                      r.mean_nmse, 10.0 * std::log10(r.median_nmse), r.median_iterations, r.mean_iterations);
}

std::vector<SpacingRow> spacing_table() {
  std::vector<SpacingRow> rows;
  for (double s : {0.5, 0.25, 0.125}) rows.push_back({s, dimensionality_ratio(s), mismatch_probability(s)});
  return rows;
}

void write_spacing_csv(std::ostream& os, const std::vector<SpacingRow>& rows) {
  os << "spacing,dimensionality_ratio,mismatch_probability\n";
  for (const auto& r : rows)
    os << fmt::format("{},{:.4g},{:.4g}\n", r.spacing, r.dimensionality_ratio, r.mismatch_probability);
}

std::size_t significant_index_count(const VarianceProfile& profile, double fraction) {
  const double total = profile.total();
  return static_cast<std::size_t>(std::count_if(profile.variances.begin(), profile.variances.end(),
                                                [&](double v) { return v >= fraction * total; }));
}

LeakageReport analyze_leakage(const PreparedScenario& p) {
  if (!p.domains.count(Domain::angular) || !p.domains.count(Domain::wavenumber))
    throw std::invalid_argument("analyze_leakage: the scenario must include both domains");
  const auto& ang = p.domains.at(Domain::angular).dict;
  const auto& wav = p.domains.at(Domain::wavenumber).dict;
  LeakageReport rep;
  rep.significant = p.scenario.channel == ChannelKind::clustered ? significant_index_count(p.profile)
                                                                 : static_cast<std::size_t>(p.scenario.block_size);
  rep.significant = std::max<std::size_t>(rep.significant, 1);
  std::vector<double> wf, af;
  for (std::uint64_t seed : p.scenario.seeds) {
    const ChannelRealization ch = scenario_channel(p, seed);
    LeakageRealization r;
    r.seed = seed;
    r.wavenumber_coeffs = project(wav, ch.spatial);
    r.angular_coeffs = project(ang, ch.spatial);
    r.wavenumber_fraction = captured_power_fraction(r.wavenumber_coeffs, rep.significant);
    r.angular_fraction = captured_power_fraction(r.angular_coeffs, rep.significant);
    wf.push_back(r.wavenumber_fraction);
    af.push_back(r.angular_fraction);
    rep.realizations.push_back(std::move(r));
  }
  rep.median_wavenumber_fraction = median(wf);
  rep.median_angular_fraction = median(af);
  return rep;
}

void write_leakage_power_csv(std::ostream& os, const PreparedScenario& p, const LeakageReport& r) {
  os << "seed,domain,index_x,index_y,power\n";
  const auto& al = p.domains.at(Domain::angular).dict.labels;
  const auto& wl = p.domains.at(Domain::wavenumber).dict.labels;
  for (const auto& z : r.realizations) {
    for (std::size_t i = 0; i < wl.size(); ++i)
      os << fmt::format("{},wavenumber,{},{},{:.17g}\n", z.seed, wl[i].lx, wl[i].ly, std::norm(z.wavenumber_coeffs[i]));
    for (std::size_t i = 0; i < al.size(); ++i)
      os << fmt::format("{},angular,{},{},{:.17g}\n", z.seed, al[i].lx, al[i].ly, std::norm(z.angular_coeffs[i]));
  }
}

void write_leakage_summary_csv(std::ostream& os, const LeakageReport& r) {
  os << "seed,significant,wavenumber_fraction,angular_fraction\n";
  for (const auto& z : r.realizations)
    os << fmt::format("{},{},{:.17g},{:.17g}\n", z.seed, r.significant, z.wavenumber_fraction, z.angular_fraction);
}

}  // namespace hmimo
