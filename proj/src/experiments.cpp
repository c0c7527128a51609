#include "speclab/experiments.hpp"
#include "speclab/alignment.hpp"
#include "speclab/invariant_subspace.hpp"
#include "speclab/kpca.hpp"
#include "speclab/laplacian.hpp"
#include "speclab/linalg.hpp"

#include "text.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

// OpenBLAS would otherwise pick its own thread count; trial-level threads
// are ours. Weak so that other LAPACK backends still link.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace speclab {

std::string_view to_string(Pipeline p) { return p == Pipeline::Laplacian ? "laplacian" : "kpca"; }

// ---------------------------------------------------------------- config

Config Config::parse(const std::string& content) {
  Config c;
  c.values_ = text::parse_key_values(content);
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("config file '" + path.string() + "' not found");
  }
  return parse(text::read_file(path.string()));
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : text::parse_double(it->second, key);
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : text::parse_int(it->second, key);
}

std::vector<double> Config::get_doubles(const std::string& key, std::vector<double> fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : text::parse_doubles(it->second, key);
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "pipeline", "kernel",  "bandwidth",  "offset", "value",      "table_distances", "table_values",
      "domain_lo", "domain_hi", "density", "mixture", "K",         "n_grid",          "trials",
      "seed",     "oracle_m", "eval_points", "gap_floor", "taus",  "threads",         "oracle_path",
      "n"};
  return keys;
}

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// "lo_1..lo_p,hi_1..hi_p,weight" per component, components separated by ';'.
std::vector<MixtureComponent> parse_mixture(const std::string& s, Eigen::Index dim) {
  std::vector<MixtureComponent> comps;
  for (const auto& part : text::split(s, ';')) {
    if (part.empty()) continue;
    const auto v = text::parse_doubles(part, "mixture");
    if (static_cast<Eigen::Index>(v.size()) != 2 * dim + 1) {
      throw ConfigError("mixture: each component needs " + std::to_string(2 * dim + 1) + " numbers");
    }
    MixtureComponent c;
    c.box.lo = Eigen::Map<const Vector>(v.data(), dim);
    c.box.hi = Eigen::Map<const Vector>(v.data() + dim, dim);
    c.weight = v.back();
    comps.push_back(std::move(c));
  }
  return comps;
}

}  // namespace

RateStudyConfig rate_study_config_from(const Config& cfg) {
  cfg.require_known(config_keys());
  RateStudyConfig rc;
  const std::string pipeline = cfg.get("pipeline", "laplacian");
  if (pipeline == "laplacian") {
    rc.pipeline = Pipeline::Laplacian;
  } else if (pipeline == "kpca") {
    rc.pipeline = Pipeline::Kpca;
  } else {
    throw ConfigError("unknown pipeline '" + pipeline + "'");
  }

  KernelParams& kp = rc.kernel;
  kp.family = kernel_family_from_string(cfg.get("kernel", "gaussian"));
  kp.bandwidth = cfg.get_double("bandwidth", kp.bandwidth);
  kp.offset = cfg.get_double("offset", kp.offset);
  kp.value = cfg.get_double("value", kp.value);
  kp.table_distances = cfg.get_doubles("table_distances", {});
  kp.table_values = cfg.get_doubles("table_values", {});
  kp.domain.lo = to_vector(cfg.get_doubles("domain_lo", {0.0}));
  kp.domain.hi = to_vector(cfg.get_doubles("domain_hi", {1.0}));
  kp.domain.validate();
  kp.require_positive_lower_bound = rc.pipeline == Pipeline::Laplacian;

  const std::string density = cfg.get("density", "uniform");
  if (density == "uniform") {
    rc.density = DensitySpec::uniform(kp.domain);
  } else if (density == "mixture") {
    if (!cfg.has("mixture")) throw ConfigError("density=mixture needs a 'mixture' key");
    rc.density = DensitySpec::mixture(kp.domain, parse_mixture(cfg.get("mixture", ""), kp.domain.dim()));
  } else {
    throw ConfigError("unknown density '" + density + "'");
  }

  rc.K = cfg.get_int("K", rc.K);
  if (cfg.has("n_grid")) {
    rc.n_grid.clear();
    for (const auto& part : text::split(cfg.get("n_grid", ""), ',')) {
      rc.n_grid.push_back(static_cast<Eigen::Index>(text::parse_int(part, "n_grid")));
    }
  }
  rc.trials = static_cast<int>(cfg.get_int("trials", rc.trials));
  const long long seed = cfg.get_int("seed", static_cast<long long>(rc.seed));
  if (seed < 0) throw ConfigError("seed must be non-negative");
  rc.seed = static_cast<std::uint64_t>(seed);
  rc.oracle_m = cfg.get_int("oracle_m", rc.oracle_m);
  rc.eval_points = cfg.get_int("eval_points", rc.eval_points);
  rc.gap_floor = cfg.get_double("gap_floor", rc.gap_floor);
  rc.taus = cfg.get_doubles("taus", rc.taus);
  rc.threads = static_cast<int>(cfg.get_int("threads", rc.threads));
  if (cfg.has("oracle_path")) rc.oracle_path = cfg.get("oracle_path", "");
  return rc;
}

void RateStudyConfig::validate() const {
  if (K < 1) throw ConfigError("K must be at least 1");
  if (n_grid.size() < 4) throw ConfigError("n_grid needs at least 4 levels");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] <= K) throw ConfigError("n_grid levels must exceed K");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
  }
  if (trials < 20) throw ConfigError("trials must be at least 20");
  if (oracle_m < 16 * K) throw ConfigError("oracle_m must be at least 16 K");
  if (eval_points != 0 && eval_points < 2) throw ConfigError("eval_points must be 0 (default) or >= 2");
  if (!(gap_floor > 0.0)) throw ConfigError("gap_floor must be positive");
  if (taus.empty()) throw ConfigError("taus must not be empty");
  for (double t : taus) {
    if (!(t > 0.0)) throw ConfigError("taus must be positive");
  }
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (pipeline == Pipeline::Laplacian && kernel.family == KernelFamily::Linear) {
    throw ConfigError("the linear kernel is only admitted by the kpca pipeline");
  }
}

// ---------------------------------------------------------------- rate study

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& n_and_error) {
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (const auto& [n, err] : n_and_error) {
    if (!(err > 0.0) || !(n > 0.0) || !std::isfinite(err)) {
      fit.notes.push_back("excluded n=" + text::format_double(n) + " (error " + text::format_double(err) + ")");
      continue;
    }
    xs.push_back(std::log(n));
    ys.push_back(std::log(err));
  }
  if (xs.size() < 3) throw ConfigError("fit_slope: need at least 3 points with positive error");
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_slope: n values must not all coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

PopulationOracle study_oracle(const RateStudyConfig& config) {
  const OperatorKind kind =
      config.pipeline == Pipeline::Laplacian ? OperatorKind::NormalizedLaplacian : OperatorKind::Covariance;
  if (config.oracle_path) {
    PopulationOracle oracle = load_oracle(*config.oracle_path);
    if (oracle.kind() != kind) throw ConfigError("stored oracle was built for a different pipeline");
    if (oracle.K() != config.K) throw ConfigError("stored oracle has a different K");
    return oracle;
  }
  return build_oracle(make_kernel(config.kernel), config.density, config.oracle_m, config.K,
                      {kind, config.gap_floor});
}

namespace {

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

TrialRow run_trial(const RateStudyConfig& config, const KernelSpec& kernel, const PopulationOracle& oracle,
                   const PointMatrix& eval_grid, const Matrix& pop_on_eval, Eigen::Index n, int trial) {
  TrialRow row;
  row.pipeline = config.pipeline;
  row.n = n;
  row.trial = trial;
  row.seed = derive_seed(config.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial));
  try {
    auto samples = std::make_shared<const SampleSet>(config.density.sample(n, row.seed));
    ConsistencyReport rep;
    if (config.pipeline == Pipeline::Laplacian) {
      const LaplacianFit fit = fit_laplacian_embedding(samples, kernel, config.K);
      row.gap = fit.eigensystem.eigengap;
      rep = consistency_error(oracle, fit.embedding, eval_grid, pop_on_eval);
    } else {
      const KpcaSystem sys = kpca_fit(samples, kernel, config.K);
      row.gap = sys.eigengap();
      rep = consistency_error(oracle, sys, eval_grid, pop_on_eval);
    }
    row.error = rep.error;
    row.sv_max = rep.alignment.singular_values(0);
    row.sv_min = rep.alignment.singular_values(rep.alignment.singular_values.size() - 1);
    row.q_gap = rep.alignment.frobenius_gap;
    if (!rep.alignment.singular_values_below_two) row.status = "ok_sv_ge_2";
  } catch (const std::exception& e) {
    row.error = std::numeric_limits<double>::quiet_NaN();
    row.status = sanitize(std::string("failed: ") + e.what());
  }
  return row;
}

bool row_ok(const TrialRow& r) { return r.status.rfind("ok", 0) == 0; }

}  // namespace

RateStudyResult run_rate_study(const RateStudyConfig& config) {
  config.validate();
  return run_rate_study(config, study_oracle(config));
}

RateStudyResult run_rate_study(const RateStudyConfig& config, const PopulationOracle& oracle) {
  config.validate();
  if (oracle.K() != config.K) throw ConfigError("oracle K differs from the configuration");
  if (openblas_set_num_threads) openblas_set_num_threads(1);

  const KernelSpec kernel = make_kernel(config.kernel);
  const DomainBox& domain = config.density.domain();
  const Eigen::Index per_dim = config.eval_points ? config.eval_points : default_eval_points(domain.dim());
  const PointMatrix eval_grid = make_eval_grid(domain, per_dim);
  const Matrix pop_on_eval = oracle.evaluate(eval_grid);

  // One slot per (n, trial); workers fill disjoint slots, so the output does
  // not depend on scheduling.
  std::vector<std::pair<Eigen::Index, int>> tasks;
  for (Eigen::Index n : config.n_grid)
    for (int t = 0; t < config.trials; ++t) tasks.emplace_back(n, t);
  RateStudyResult result;
  result.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      result.rows[i] = run_trial(config, kernel, oracle, eval_grid, pop_on_eval, tasks[i].first, tasks[i].second);
    }
  };
  const int nthreads = std::min<int>(config.threads, static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.oracle_eigengap = oracle.eigengap();
  result.eval_points = eval_grid.rows();
  std::vector<double> scaled;
  std::vector<std::pair<double, double>> medians;
  bool all_tiny = true;
  for (Eigen::Index n : config.n_grid) {
    std::vector<double> errs;
    for (const auto& r : result.rows) {
      if (r.n == n && row_ok(r)) {
        errs.push_back(r.error);
        scaled.push_back(r.error * std::sqrt(static_cast<double>(n)));
      }
    }
    std::sort(errs.begin(), errs.end());
    LevelSummary s;
    s.n = n;
    s.ok_trials = static_cast<int>(errs.size());
    s.median = quantile(errs, 0.5);
    s.q10 = quantile(errs, 0.1);
    s.q90 = quantile(errs, 0.9);
    result.levels.push_back(s);
    medians.emplace_back(static_cast<double>(n), s.median);
    if (!errs.empty() && errs.back() > 1e-10) all_tiny = false;
  }

  if (all_tiny) {
    result.fit_note = "degenerate: all errors at or below 1e-10, slope fit skipped";
  } else {
    try {
      result.fit = fit_slope(medians);
      for (const auto& note : result.fit->notes) result.fit_note += note + "; ";
    } catch (const ConfigError& e) {
      result.fit_note = e.what();
    }
  }

  std::sort(scaled.begin(), scaled.end());
  result.fitted_C = quantile(scaled, 0.5);
  for (double tau : config.taus) {
    Exceedance ex;
    ex.tau = tau;
    ex.threshold_scale = result.fitted_C * std::sqrt(tau);
    for (const auto& r : result.rows) {
      if (!row_ok(r)) continue;
      ++ex.total;
      if (r.error > ex.threshold_scale / std::sqrt(static_cast<double>(r.n))) ++ex.exceed;
    }
    result.exceedance.push_back(ex);
  }
  return result;
}

void write_rate_study(const RateStudyResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("rate_study.csv");
    out << "pipeline,n,trial,seed,error,gap,sv_min,sv_max,q_gap,status\n";
    for (const auto& r : result.rows) {
      out << to_string(r.pipeline) << ',' << r.n << ',' << r.trial << ',' << r.seed << ','
          << text::format_double(r.error) << ',' << text::format_double(r.gap) << ','
          << text::format_double(r.sv_min) << ',' << text::format_double(r.sv_max) << ','
          << text::format_double(r.q_gap) << ',' << r.status << '\n';
    }
  }
  {
    auto out = open("summary.csv");
    out << "n,median,q10,q90,ok_trials\n";
    for (const auto& s : result.levels) {
      out << s.n << ',' << text::format_double(s.median) << ',' << text::format_double(s.q10) << ','
          << text::format_double(s.q90) << ',' << s.ok_trials << '\n';
    }
  }
  {
    auto out = open("fit.txt");
    if (result.fit) {
      out << "slope=" << text::format_double(result.fit->slope) << '\n'
          << "intercept=" << text::format_double(result.fit->intercept) << '\n'
          << "r_squared=" << text::format_double(result.fit->r_squared) << '\n';
    } else {
      out << "slope=undefined\n";
    }
    out << "fit_note=" << result.fit_note << '\n'
        << "fitted_C=" << text::format_double(result.fitted_C) << '\n'
        << "oracle_eigengap=" << text::format_double(result.oracle_eigengap) << '\n'
        << "eval_points=" << result.eval_points << '\n'
        << "error_definition=sup over the evaluation grid after closed-form Procrustes Q (upper bound on the inf over Q)\n";
    for (const auto& ex : result.exceedance) {
      out << "exceedance_tau_" << text::format_double(ex.tau) << '=' << ex.exceed << '/' << ex.total << '\n';
    }
  }
}

// ---------------------------------------------------------------- nk demo

Matrix random_gapped_symmetric(Eigen::Index N, Eigen::Index K, double min_gap, SplitMix64& rng) {
  if (K < 1 || K >= N) throw ConfigError("random_gapped_symmetric: need 1 <= K < N");
  if (!(min_gap > 0.0) || min_gap >= 2.0) throw ConfigError("random_gapped_symmetric: need 0 < min_gap < 2");
  Vector lambda(N);
  const double split = 1.0;
  for (Eigen::Index i = 0; i < K; ++i) lambda(i) = rng.uniform(split + 0.5 * min_gap, 2.0);
  for (Eigen::Index i = K; i < N; ++i) lambda(i) = rng.uniform(0.0, split - 0.5 * min_gap);
  const Matrix U = linalg::random_orthogonal(N, rng);
  Matrix T = U * lambda.asDiagonal() * U.transpose();
  return 0.5 * (T + T.transpose());
}

std::string run_nk_demo(const NkDemoOptions& opts) {
  if (opts.n < 2 || opts.K < 1 || opts.K >= opts.n) throw ConfigError("nk-demo: need 1 <= k < n");
  if (!(opts.eps >= 0.0)) throw ConfigError("nk-demo: eps must be non-negative");
  SplitMix64 rng(opts.seed);
  const Matrix T = random_gapped_symmetric(opts.n, opts.K, 0.2, rng);
  Matrix E = linalg::random_symmetric(opts.n, rng);
  E *= opts.eps / E.norm();

  const nk::BlockOperator blocks = nk::block_partition(T, E, opts.K);
  const nk::NewtonResult res = nk::newton_solve(blocks);
  const nk::ContourSpec contour = nk::make_contour(T, opts.K);
  const nk::TheoremConstants consts = nk::theorem_constants(nk::euclidean_constant_inputs(blocks, contour));

  std::ostringstream out;
  auto put = [&](const std::string& key, double v) { out << key << '=' << text::format_double(v) << '\n'; };
  out << "n=" << opts.n << "\nK=" << opts.K << '\n';
  put("eps", opts.eps);
  out << "seed=" << opts.seed << '\n';
  put("eigengap", blocks.eigengap());
  out << res.certificate.to_text();
  put("C1", consts.C1);
  put("C2", consts.C2);
  put("C3", consts.C3);
  put("eta", contour.eta);
  put("eta_sampled", contour.eta_sampled);
  put("contour_length", contour.length());
  put("perturbation_bound", contour.perturbation_bound());
  if (E.norm() < contour.perturbation_bound()) {
    out << "count_in_contour=" << nk::count_in_contour(T + E, contour) << '\n';
  } else {
    out << "count_in_contour=skipped\n";
  }
  if (!res.Y) {
    out << "newton=not_attempted\n";
    return out.str();
  }
  const Matrix& Y = *res.Y;
  out << "newton=converged\niterations=" << res.iterations << '\n';
  put("residual", res.residual);
  put("norm_Y", Y.norm());
  put("y_bound", res.certificate.y_bound());
  put("invariance_residual", nk::verify_invariance(blocks, Y));
  const auto loc = nk::eigenvalue_location(blocks, Y);
  out << "eigenvalues_located=" << loc.all_contained() << '\n'
      << "real_spectrum=" << loc.real_spectrum << '\n';
  if (linalg::spectral_norm(Y) < 1.0) {
    const auto o = nk::orthonormalize(blocks.V1(), blocks.V2(), Y);
    const Matrix V1 = blocks.V1();
    const AlignmentResult al = procrustes_align(o.W.transpose() * V1);
    const double err = uniform_error(V1, o.W, al.Q);
    put("aligned_error_2inf", err);
    put("C2_times_normE", consts.C2 * E.norm());
    out << "within_C1=" << (E.norm() <= consts.C1) << '\n'
        << "theorem_bound_holds=" << (err <= consts.C2 * E.norm()) << '\n';
  }
  return out.str();
}

}  // namespace speclab
