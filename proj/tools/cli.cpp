#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "fdpburst/asymptotics.hpp"
#include "fdpburst/error.hpp"
#include "fdpburst/factorfit.hpp"
#include "fdpburst/gauss.hpp"
#include "fdpburst/io.hpp"
#include "fdpburst/montecarlo.hpp"
#include "manifest.hpp"

namespace fdpburst::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  std::size_t grid = SimesOptions{}.n_grid;
};

std::size_t resolve_threads(const std::optional<std::size_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FDPBURST_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("FDPBURST_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse '" + cell + "' as a number");
    }
  }
  return out;
}

int cmd_simulate(const Common& c, std::size_t bins, const std::vector<std::string>& argv) {
  ExperimentConfig config = io::load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  RunOptions opts;
  opts.threads = resolve_threads(c.threads);
  opts.simes.n_grid = c.grid;

  const fs::path out(c.out);
  make_out_dir(out);
  const ExperimentResult r = run_experiment(config, opts);

  io::write_replicates_csv(out / "replicates.csv", r.outcomes, config.loadings.k);
  io::write_text(out / "summary.json", io::experiment_summary_json(config, r) + "\n");

  const double root_m = std::sqrt(static_cast<double>(config.m));
  auto write_hist = [&](const std::string& name, bool fdp) {
    std::vector<double> values;
    values.reserve(r.outcomes.size());
    std::function<double(double)> density;
    const MomentComparison* mc = nullptr;
    double limit = 0.0;
    if (r.comparison) {
      mc = fdp ? &r.comparison->fdp : &r.comparison->fpr;
      limit = fdp ? r.comparison->fdp_limit : r.comparison->fpr_limit;
      if (!mc->available) mc = nullptr;
    }
    for (const auto& o : r.outcomes) {
      const double x = fdp ? o.fdp : o.fpr;
      values.push_back(mc ? root_m * (x - limit) : x);
    }
    if (mc) {
      const double sd = std::sqrt(mc->predicted_var);
      density = [sd](double z) { return gauss::std_pdf(z / sd) / sd; };
    }
    if (values.empty()) return;
    io::write_histogram_csv(out / name, histogram(values, bins), density);
  };
  write_hist("hist_fdp.csv", true);
  write_hist("hist_fpr.csv", false);

  ManifestInput m;
  m.command = "simulate";
  m.argv = argv;
  m.config_json = io::config_to_json(config);
  m.seed = config.seed;
  m.has_seed = true;
  m.files = {"replicates.csv", "summary.json"};
  if (!r.outcomes.empty()) {
    m.files.push_back("hist_fdp.csv");
    m.files.push_back("hist_fpr.csv");
  }
  write_manifest(out, m);

  std::cout << "replicates " << r.summary.replicates << "  fdr_hat " << r.summary.fdr_hat
            << "  se " << r.summary.fdr_se << "\n";
  if (r.asymptotics) {
    std::cout << "tau* " << r.asymptotics->tau_star << "  regime " << to_string(r.asymptotics->regime)
              << "\n";
    for (const auto& w : r.asymptotics->warnings) std::cerr << "warning: " << w << "\n";
  }
  return kOk;
}

int cmd_asymptotics(const Common& c, const std::vector<std::string>& w_specs, std::size_t points,
                    const std::vector<std::string>& argv) {
  ExperimentConfig config = io::load_config(c.config);
  if (c.seed) config.seed = *c.seed;
  std::vector<std::vector<double>> ws;
  for (const auto& s : w_specs) ws.push_back(parse_vector(s, "--w"));
  if (ws.empty()) {
    if (config.latent_mode == LatentMode::marginal) {
      throw ConfigError(
          "asymptotic predictions are conditional on the latent factor; pass --w in marginal mode");
    }
    ws.push_back(config.w);
  }
  for (const auto& w : ws) {
    if (w.size() != config.loadings.k) {
      throw ConfigError("--w has " + std::to_string(w.size()) + " entries, expected k = " +
                        std::to_string(config.loadings.k));
    }
  }
  SimesOptions simes;
  simes.n_grid = c.grid;

  const fs::path out(c.out);
  make_out_dir(out);
  Json results = Json::array();
  std::string curve = "w_index,t,G,F0,F1,simes_line\n";
  const double q = config.q;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const AsymptoticSummary s = analyze(config, ws[i], simes);
    results.push_back(Json{{"w", ws[i]}, {"summary", Json::parse(io::asymptotic_summary_json(s))}});
    const LimitFunctions lf(config.loadings, ws[i], config.mu_a, config.schedule.limit());
    for (std::size_t p = 0; p < points; ++p) {
      // log-spaced on [1e-6, 1]
      const double t = std::pow(10.0, -6.0 + 6.0 * static_cast<double>(p) / static_cast<double>(points - 1));
      curve += std::to_string(i) + ',' + io::format_real(t) + ',' + io::format_real(lf.G(t)) + ',' +
               io::format_real(lf.F(0, t)) + ',' + io::format_real(lf.F(1, t)) + ',' +
               io::format_real(std::min(t / q, 1.0)) + '\n';
    }
    std::cout << "w[" << i << "]  tau* " << s.tau_star << "  regime " << to_string(s.regime);
    if (s.regime == Regime::clt) {
      std::cout << "  fdp_limit " << s.fdp_limit << "  sigma_L^2 " << s.sigma_L_sq;
    }
    std::cout << "\n";
    for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
  }
  Json doc;
  doc["schema_version"] = io::kSchemaVersion;
  doc["results"] = std::move(results);
  io::write_text(out / "asymptotics.json", doc.dump(2) + "\n");
  io::write_text(out / "g_curve.csv", curve);

  ManifestInput m;
  m.command = "asymptotics";
  m.argv = argv;
  m.config_json = io::config_to_json(config);
  m.files = {"asymptotics.json", "g_curve.csv"};
  write_manifest(out, m);
  return kOk;
}

int cmd_fit_factor(const std::string& matrix, std::size_t k, std::size_t replication,
                   const std::string& out_dir, const std::vector<std::string>& argv) {
  const DenseMatrix y = io::read_matrix_csv(matrix);
  const FittedFactorModel model = fit(y, k);
  const ReplicatedLoadings groups = to_loading_groups(model, replication);

  const fs::path out(out_dir);
  make_out_dir(out);
  io::write_loadings_csv(out / "loadings.csv", groups.loadings);
  Json j;
  j["n"] = y.rows;
  j["m_rows"] = y.cols;
  j["k"] = k;
  j["sigma_e"] = model.sigma_e;
  j["implied_s_l"] = model.implied_s_l;
  j["singular_values"] = model.singular_values;
  j["groups"] = groups.loadings.groups.size();
  j["replication"] = replication;
  j["m"] = groups.m;
  io::write_text(out / "fit.json", j.dump(2) + "\n");

  ManifestInput m;
  m.command = "fit-factor";
  m.argv = argv;
  m.files = {"loadings.csv", "fit.json"};
  write_manifest(out, m);
  std::cout << "sigma_e " << model.sigma_e << "  implied S_L " << model.implied_s_l << "  groups "
            << groups.loadings.groups.size() << "  m " << groups.m << "\n";
  return kOk;
}

int cmd_compare(const std::string& replicates, const std::string& summary, const std::string& out) {
  const auto outcomes = io::read_replicates_csv(replicates);
  const io::SavedSummary saved = io::read_summary_json(summary);
  if (!saved.has_asymptotics) {
    throw ConfigError("summary has no asymptotic predictions (marginal-mode run)");
  }
  const CltComparison c = compare_to_clt(outcomes, saved.asymptotics, saved.m);
  io::write_text(out, io::comparison_json(c) + "\n");
  std::cout << "fdp: var_ratio " << c.fdp.var_ratio << "  mean_z " << c.fdp.mean_z << "  ks "
            << c.fdp.ks_distance << " (1% critical " << c.fdp.ks_critical_1pct << ")\n";
  return kOk;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "fdpburst: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("fdpburst");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, char** argv) {
  CLI::App app{"Benjamini-Hochberg FDP simulation and asymptotics under factor-model dependence",
               "fdpburst"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FDPBURST_VERSION);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", common.config, "experiment JSON")->required();
    sub->add_option("--out", common.out, "output directory")->required();
    sub->add_option("--threads", common.threads, "worker threads (default: FDPBURST_THREADS or all cores)")
        ->check(CLI::Range(1, 4096));
    sub->add_option("--seed", common.seed, "override the config seed");
    sub->add_option("--grid", common.grid, "Simes search grid size")->check(CLI::Range(2, 100000000));
  };

  std::size_t bins = 50;
  auto* sim = app.add_subcommand("simulate", "run replicated BH experiments");
  add_common(sim, true);
  sim->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);

  std::vector<std::string> w_specs;
  std::size_t points = 400;
  auto* asym = app.add_subcommand("asymptotics", "conditional limits at one or more w");
  add_common(asym, true);
  asym->add_option("--w", w_specs, "latent factor value, comma separated; repeat for several")
      ->allow_extra_args(false);
  asym->add_option("--points", points, "G(t) samples per w")->check(CLI::Range(2, 10000000));

  std::string matrix;
  std::size_t k = 0;
  std::size_t replication = 1;
  auto* ff = app.add_subcommand("fit-factor", "fit a rank-k factor model to a data matrix");
  ff->add_option("--matrix", matrix, "CSV, rows = subjects, columns = hypotheses")->required();
  ff->add_option("--k", k, "rank")->required();
  ff->add_option("--replication", replication, "copies of each loading row")->check(CLI::PositiveNumber);
  ff->add_option("--out", common.out, "output directory")->required();

  std::string rep_path, summary_path, cmp_out;
  auto* cmp = app.add_subcommand("compare", "recompute the CLT comparison from saved outputs");
  cmp->add_option("--replicates", rep_path, "replicates.csv")->required();
  cmp->add_option("--summary", summary_path, "summary.json")->required();
  cmp->add_option("--out", cmp_out, "comparison JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }
  const std::vector<std::string> args(argv + 1, argv + argc);

  try {
    if (sim->parsed()) return cmd_simulate(common, bins, args);
    if (asym->parsed()) return cmd_asymptotics(common, w_specs, points, args);
    if (ff->parsed()) return cmd_fit_factor(matrix, k, replication, common.out, args);
    if (cmp->parsed()) return cmd_compare(rep_path, summary_path, cmp_out);
  } catch (const ParseError& e) {
    return report("input error", e, kConfigFailure);
  } catch (const ConfigError& e) {
    return report("config error", e, kConfigFailure);
  } catch (const DomainError& e) {
    return report("config error", e, kConfigFailure);
  } catch (const SolverError& e) {
    return report("solver error", e, kSolverFailure);
  } catch (const FitError& e) {
    return report("fit error", e, kSolverFailure);
  } catch (const IoError& e) {
    return report("I/O error", e, kIoFailure);
  } catch (const std::exception& e) {
    return report("error", e, kIoFailure);
  }
  return kConfigFailure;
}

}  // namespace fdpburst::cli
