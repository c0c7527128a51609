#include "speclab/alignment.hpp"
#include "speclab/experiments.hpp"
#include "speclab/kpca.hpp"
#include "speclab/laplacian.hpp"

#include "text.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace speclab {

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "key=value configuration file");
  cmd->add_option("--seed", a.seed, "base seed (overrides the config)");
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
}

Config load_config(const CommonArgs& a) {
  Config cfg = a.config.empty() ? Config{} : Config::load(a.config);
  if (a.seed) cfg.set("seed", std::to_string(*a.seed));
  return cfg;
}

std::filesystem::path out_dir(const CommonArgs& a) {
  std::filesystem::create_directories(a.out);
  return a.out;
}

PointMatrix study_eval_grid(const RateStudyConfig& rc) {
  const DomainBox& d = rc.density.domain();
  return make_eval_grid(d, rc.eval_points ? rc.eval_points : default_eval_points(d.dim()));
}

void write_eigvals(const std::filesystem::path& path, const Vector& eigvals) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "k,eigenvalue\n";
  for (Eigen::Index k = 0; k < eigvals.size(); ++k) out << k + 1 << ',' << text::format_double(eigvals(k)) << '\n';
}

int cmd_oracle(const CommonArgs& a) {
  RateStudyConfig rc = rate_study_config_from(load_config(a));
  rc.oracle_path.reset();
  const PopulationOracle oracle = study_oracle(rc);
  const auto dir = out_dir(a);
  save_oracle(oracle, dir / "oracle");
  const PointMatrix grid = study_eval_grid(rc);
  write_embedding_csv(dir / "oracle_eval.csv", grid, oracle.evaluate(grid));
  write_eigvals(dir / "oracle_eigvals.csv", oracle.eigvals());
  std::cout << "nodes=" << oracle.grid().size() << "\neigengap=" << text::format_double(oracle.eigengap())
            << "\northonormality_residual=" << text::format_double(oracle.orthonormality_residual()) << '\n';
  return 0;
}

std::shared_ptr<const SampleSet> draw(const RateStudyConfig& rc, const Config& cfg) {
  const auto n = static_cast<Eigen::Index>(cfg.get_int("n", 800));
  return std::make_shared<const SampleSet>(rc.density.sample(n, rc.seed));
}

int cmd_embed(const CommonArgs& a) {
  const Config cfg = load_config(a);
  RateStudyConfig rc = rate_study_config_from(cfg);
  const auto samples = draw(rc, cfg);
  const LaplacianFit fit = fit_laplacian_embedding(samples, make_kernel(rc.kernel), rc.K);
  const auto dir = out_dir(a);
  const PointMatrix grid = study_eval_grid(rc);
  write_embedding_csv(dir / "embedding.csv", grid, fit.embedding.evaluate(grid));
  write_embedding_csv(dir / "samples.csv", samples->points, fit.eigensystem.eigvecs);
  write_eigvals(dir / "eigvals.csv", fit.eigensystem.eigvals);
  std::cout << "n=" << samples->n() << "\neigengap=" << text::format_double(fit.eigensystem.eigengap) << '\n';
  for (Eigen::Index k = 0; k < fit.embedding.size(); ++k) {
    const auto& f = fit.embedding[static_cast<std::size_t>(k)];
    std::cout << "f" << k + 1 << "_restriction_residual=" << text::format_double(f.restriction_residual())
              << "\nf" << k + 1 << "_empirical_norm=" << text::format_double(f.empirical_norm()) << '\n';
  }
  return 0;
}

int cmd_kpca(const CommonArgs& a) {
  Config cfg = load_config(a);
  if (!cfg.has("pipeline")) cfg.set("pipeline", "kpca");
  RateStudyConfig rc = rate_study_config_from(cfg);
  const auto samples = draw(rc, cfg);
  const KpcaSystem sys = kpca_fit(samples, make_kernel(rc.kernel), rc.K);
  const auto dir = out_dir(a);
  const PointMatrix grid = study_eval_grid(rc);
  write_embedding_csv(dir / "kpca.csv", grid, sys.evaluate(grid));
  write_embedding_csv(dir / "samples.csv", samples->points, sys.eigvecs());
  write_eigvals(dir / "eigvals.csv", sys.eigvals());
  std::cout << "n=" << samples->n() << "\neigengap=" << text::format_double(sys.eigengap())
            << "\nrestriction_residual=" << text::format_double(sys.restriction_residual())
            << "\nnorm_residual=" << text::format_double(sys.norm_residual()) << '\n';
  return 0;
}

int cmd_align(const CommonArgs& a, int random_candidates) {
  const Config cfg = load_config(a);
  const RateStudyConfig rc = rate_study_config_from(cfg);
  const PopulationOracle oracle = study_oracle(rc);
  const KernelSpec kernel = make_kernel(rc.kernel);
  const auto samples = draw(rc, cfg);
  const PointMatrix grid = study_eval_grid(rc);
  ConsistencyReport rep;
  Matrix sample_on_grid;
  if (rc.pipeline == Pipeline::Laplacian) {
    const LaplacianFit fit = fit_laplacian_embedding(samples, kernel, rc.K);
    rep = consistency_error(oracle, fit.embedding, grid);
    sample_on_grid = fit.embedding.evaluate(grid);
  } else {
    const KpcaSystem sys = kpca_fit(samples, kernel, rc.K);
    rep = consistency_error(oracle, sys, grid);
    sample_on_grid = sys.evaluate(grid);
  }
  const auto dir = out_dir(a);
  std::ofstream out(dir / "alignment.txt");
  if (!out) throw ConfigError("cannot write alignment.txt");
  std::ostringstream s;
  s << "pipeline=" << to_string(rc.pipeline) << "\nn=" << samples->n() << "\nseed=" << rc.seed
    << "\nerror=" << text::format_double(rep.error)
    << "\nerror_definition=sup over " << rep.eval_points
    << " grid points after closed-form Procrustes Q (upper bound on the inf over Q)"
    << "\nsingular_values=" << text::join(rep.alignment.singular_values)
    << "\nq_gap=" << text::format_double(rep.alignment.frobenius_gap)
    << "\nsingular_values_below_two=" << rep.alignment.singular_values_below_two
    << "\nQ=" << text::join(Vector(Eigen::Map<const Vector>(rep.alignment.Q.data(), rep.alignment.Q.size())))
    << '\n';
  if (random_candidates > 0) {
    const double best = random_search_2inf(oracle.evaluate(grid), sample_on_grid, rep.alignment.Q,
                                           random_candidates, rc.seed);
    s << "random_search_candidates=" << random_candidates << "\nrandom_search_error=" << text::format_double(best)
      << '\n';
  }
  out << s.str();
  std::cout << s.str();
  return 0;
}

int cmd_rate_study(const CommonArgs& a, std::optional<int> threads) {
  Config cfg = load_config(a);
  if (threads) cfg.set("threads", std::to_string(*threads));
  const RateStudyConfig rc = rate_study_config_from(cfg);
  const RateStudyResult result = run_rate_study(rc);
  write_rate_study(result, out_dir(a));
  if (result.fit) std::cout << "slope=" << text::format_double(result.fit->slope) << '\n';
  else std::cout << "slope=undefined (" << result.fit_note << ")\n";
  for (const auto& s : result.levels) {
    std::cout << "n=" << s.n << " median=" << text::format_double(s.median) << " ok=" << s.ok_trials << '\n';
  }
  return 0;
}

int cmd_nk_demo(const NkDemoOptions& opts, const std::string& out) {
  const std::string report = run_nk_demo(opts);
  std::cout << report;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(std::filesystem::path(out) / "nk_demo.txt");
    if (!f) throw ConfigError("cannot write nk_demo.txt");
    f << report;
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Spectral embedding consistency lab"};
  app.require_subcommand(1);

  CommonArgs oracle_args, embed_args, kpca_args, align_args, study_args;
  add_common(app.add_subcommand("oracle", "build and save the population oracle"), oracle_args);
  add_common(app.add_subcommand("embed", "normalized Laplacian embedding of one sample"), embed_args);
  add_common(app.add_subcommand("kpca", "kernel PCA of one sample"), kpca_args);
  auto* align = app.add_subcommand("align", "align one sample embedding with the oracle");
  add_common(align, align_args);
  int random_candidates = 0;
  align->add_option("--random-search", random_candidates, "also try this many random orthogonal Q");
  auto* study = app.add_subcommand("rate-study", "Monte Carlo consistency rate study");
  add_common(study, study_args);
  std::optional<int> threads;
  study->add_option("--threads", threads, "worker threads (overrides the config)");

  auto* nk = app.add_subcommand("nk-demo", "Newton-Kantorovich certificate on a random instance");
  NkDemoOptions nk_opts;
  std::string nk_out;
  nk->add_option("--n", nk_opts.n, "matrix dimension")->capture_default_str();
  nk->add_option("--k", nk_opts.K, "invariant subspace dimension")->capture_default_str();
  nk->add_option("--eps", nk_opts.eps, "Frobenius norm of the perturbation")->capture_default_str();
  nk->add_option("--seed", nk_opts.seed, "seed")->capture_default_str();
  nk->add_option("--out", nk_out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("oracle")) return cmd_oracle(oracle_args);
    if (app.got_subcommand("embed")) return cmd_embed(embed_args);
    if (app.got_subcommand("kpca")) return cmd_kpca(kpca_args);
    if (app.got_subcommand("align")) return cmd_align(align_args, random_candidates);
    if (app.got_subcommand("rate-study")) return cmd_rate_study(study_args, threads);
    if (app.got_subcommand("nk-demo")) return cmd_nk_demo(nk_opts, nk_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace speclab
