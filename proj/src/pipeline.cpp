#include "vibrom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "vibrom/metrics.hpp"

namespace fs = std::filesystem;

namespace vibrom {

namespace {

std::vector<int> to_int_list(const std::vector<double>& v) {
  std::vector<int> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(static_cast<int>(std::lround(x)));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << text;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StaleArtifactError("missing artifact: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void check_hash(const std::string& path, const std::string& expected) {
  std::string stored = read_text(path);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r'))
    stored.pop_back();
  if (stored != expected)
    throw StaleArtifactError("stale artifact: " + path + " was produced with config " +
                             stored + ", current config is " + expected);
}

std::string snapshot_dir(const PipelineConfig& cfg) { return cfg.out_dir + "/snapshots"; }

// Benchmark + modal data shared by every command.
struct Context {
  FomSystem sys;
  EigenBasis basis;
  Eigen::VectorXd functional;  // master modal projector M * phi_master
  SecondOrderForm form;
};

Context make_context(const PipelineConfig& cfg) {
  Context ctx;
  ctx.sys = build_benchmark(cfg.benchmark, cfg.benchmark_params);
  ctx.basis = eigen_solve(ctx.sys, ctx.sys.n_dofs);
  if (cfg.master_mode < 0 || cfg.master_mode >= ctx.sys.n_dofs)
    throw ConfigError("run.master_mode out of range for benchmark " + cfg.benchmark);
  ctx.functional = ctx.sys.mass * ctx.basis.modes.col(cfg.master_mode);
  ctx.form = fom_form(ctx.sys);
  return ctx;
}

// Orbit at a target arc abscissa: linear interpolation between the
// bracketing stored points, then a corrector solve orthogonal to the
// local secant.
struct PolishedOrbit {
  Eigen::VectorXd x;
  double omega = 0.0;
};

PolishedOrbit orbit_at_s(const ArcParametrizedFrf& pfrf, double s,
                         const ContinuationProblem& problem) {
  const auto& sv = pfrf.s_values;
  const auto& pts = pfrf.source->points;
  auto it = std::lower_bound(sv.begin(), sv.end(), s);
  size_t hi = std::min<size_t>(std::max<long>(1, it - sv.begin()), sv.size() - 1);
  size_t lo = hi - 1;
  double t = (s - sv[lo]) / (sv[hi] - sv[lo]);
  t = std::clamp(t, 0.0, 1.0);

  PolishedOrbit out;
  out.x = (1.0 - t) * pts[lo].unknown + t * pts[hi].unknown;
  out.omega = (1.0 - t) * pts[lo].omega + t * pts[hi].omega;
  Eigen::VectorXd tan_x = (pts[hi].unknown - pts[lo].unknown) / problem.unknown_scale;
  double tan_w = (pts[hi].omega - pts[lo].omega) / problem.omega_scale;
  double norm = std::sqrt(tan_x.squaredNorm() + tan_w * tan_w);
  corrector(problem, out.x, out.omega, tan_x / norm, tan_w / norm, out.x, out.omega,
            problem.corrector_tol);
  return out;
}

Eigen::MatrixXd orbit_states(const Eigen::VectorXd& x, double omega, int n_dofs,
                             int n_harmonics, int n_samples) {
  PeriodicOrbit orbit;
  orbit.omega = omega;
  orbit.n_harmonics = n_harmonics;
  orbit.fourier_coeffs = unstack_coeffs(x, n_dofs);
  return orbit.sample(n_samples);
}

double modal_amplitude(const Context& ctx, const Eigen::MatrixXd& states, int mode) {
  return (ctx.basis.modes.col(mode).transpose() * ctx.sys.mass * states)
      .cwiseAbs()
      .maxCoeff();
}

std::vector<std::string> modal_frf_columns(int n_dofs) {
  std::vector<std::string> cols{"s", "beta", "omega"};
  for (int i = 0; i < n_dofs; ++i) cols.push_back("amp_mode_" + std::to_string(i));
  return cols;
}

void write_manifold_csv(const std::string& path, const std::string& hash,
                        const std::vector<OrbitRow>& rows) {
  CsvWriter csv(path, {"u_master", "v_master", "u_plot"}, hash);
  for (const OrbitRow& r : rows) csv.row({r.u_master, r.v_master, r.u_plot});
}

// DL-ROM states over one period at fixed (beta, s): N_h x samples.
Eigen::MatrixXd dlrom_states(const DlRomModel& model, double beta, double s,
                             int samples_per_period) {
  Eigen::MatrixXd states(model.pod.basis.rows(), samples_per_period);
  for (int k = 0; k < samples_per_period; ++k) {
    double t_hat = static_cast<double>(k) / samples_per_period;
    states.col(k) = infer(model, t_hat, beta, s).state;
  }
  return states;
}

std::string dlrom_path(const PipelineConfig& cfg, int p) {
  return cfg.out_dir + "/dlrom_p" + std::to_string(p) + ".model";
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& path,
                                    const std::string& out_override,
                                    long long seed_override) {
  ConfigFile f;
  try {
    f = load_config(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  PipelineConfig cfg;
  try {
    cfg.benchmark = f.get("benchmark", "name");
    if (f.sections.count("benchmark"))
      for (const auto& [key, value] : f.sections.at("benchmark"))
        if (key != "name") cfg.benchmark_params[key] = std::stod(value);

    cfg.frf.hb.n_harmonics = static_cast<int>(f.get_int_or("solver", "n_harmonics", 7));
    cfg.frf.hb.tol = f.get_double_or("solver", "tol", 1e-10);
    cfg.frf.hb.max_iters = static_cast<int>(f.get_int_or("solver", "max_iters", 25));
    cfg.frf.omega_min = f.get_double("solver", "omega_min");
    cfg.frf.omega_max = f.get_double("solver", "omega_max");
    cfg.frf.step_init = f.get_double_or("solver", "step_init", 0.02);
    cfg.frf.step_min = f.get_double_or("solver", "step_min", 1e-8);
    cfg.frf.step_max = f.get_double_or("solver", "step_max", 0.2);
    cfg.frf.corrector_tol = f.get_double_or("solver", "corrector_tol", 1e-9);
    cfg.frf.max_points = static_cast<int>(f.get_int_or("solver", "max_points", 4000));
    cfg.frf.unknown_scale = f.get_double_or("solver", "unknown_scale", 0.0);

    cfg.train_betas = f.get_list_or("betas", "train", {});
    cfg.test_betas = f.get_list_or("betas", "test", {});

    cfg.n_regions = static_cast<int>(f.get_int_or("arc", "n_regions", 2));
    cfg.landmark_overrides = to_int_list(f.get_list_or("arc", "landmarks", {}));
    cfg.points_per_curve = static_cast<int>(f.get_int_or("arc", "points_per_curve", 32));
    cfg.samples_per_period =
        static_cast<int>(f.get_int_or("arc", "samples_per_period", 161));

    cfg.pod_dim = static_cast<int>(f.get_int_or("rom", "pod_dim", 20));
    cfg.rsvd_oversampling = static_cast<int>(f.get_int_or("rom", "oversampling", 10));
    cfg.rsvd_power_iters = static_cast<int>(f.get_int_or("rom", "power_iters", 2));
    cfg.p_sweep = to_int_list(f.get_list_or("rom", "p_sweep", {1, 2, 3}));
    cfg.training.encoder_hidden = to_int_list(f.get_list_or("rom", "encoder_hidden",
                                                            {64, 32}));
    cfg.training.dfnn_hidden = to_int_list(f.get_list_or("rom", "dfnn_hidden", {32, 32}));
    cfg.training.activation = f.get_or("rom", "activation", "tanh");
    cfg.training.learning_rate = f.get_double_or("rom", "learning_rate", 1e-3);
    cfg.training.batch_size = static_cast<int>(f.get_int_or("rom", "batch_size", 64));
    cfg.training.epochs = static_cast<int>(f.get_int_or("rom", "epochs", 200));
    cfg.training.weight_rec = f.get_double_or("rom", "weight_rec", 0.5);
    cfg.training.weight_lat = f.get_double_or("rom", "weight_lat", 0.5);
    cfg.training.validation_fraction =
        f.get_double_or("rom", "validation_fraction", 0.1);

    cfg.infer_points = static_cast<int>(f.get_int_or("run", "infer_points", 65));
    cfg.report_points = static_cast<int>(f.get_int_or("run", "report_points", 33));
    cfg.master_mode = static_cast<int>(f.get_int_or("run", "master_mode", 0));
    cfg.plot_mode = static_cast<int>(f.get_int_or("run", "plot_mode", 1));
    cfg.out_dir = f.get_or("run", "out", ".");
    cfg.seed = static_cast<std::uint64_t>(f.get_int_or("run", "seed", 1));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

  if (cfg.train_betas.empty()) throw ConfigError("betas.train must be non-empty");
  std::sort(cfg.train_betas.begin(), cfg.train_betas.end());
  std::sort(cfg.test_betas.begin(), cfg.test_betas.end());
  for (double b : cfg.test_betas)
    if (std::find(cfg.train_betas.begin(), cfg.train_betas.end(), b) !=
        cfg.train_betas.end())
      throw ConfigError("betas.train and betas.test must be disjoint (beta = " +
                        format_double(b) + ")");
  if (cfg.n_regions < 1) throw ConfigError("arc.n_regions must be >= 1");
  if (cfg.points_per_curve < cfg.n_regions + 1)
    throw ConfigError("arc.points_per_curve must be >= n_regions + 1");
  if (cfg.samples_per_period < 3) throw ConfigError("arc.samples_per_period must be >= 3");
  if (cfg.frf.omega_max <= cfg.frf.omega_min)
    throw ConfigError("solver.omega_max must exceed solver.omega_min");
  // latent dimensions above pod_dim are allowed (overcomplete autoencoder):
  // on the small benchmarks the POD rank is capped by the dof count, while
  // the latent sweep still probes p beyond it
  for (int p : cfg.p_sweep)
    if (p < 1) throw ConfigError("rom.p_sweep entries must be >= 1");
  cfg.training.seed = cfg.seed;

  // effective hash: canonical file text plus the override-resolved seed
  cfg.hash = config_hash_hex(
      [&] {
        ConfigFile g = f;
        g.canonical_text += "effective_seed=" + std::to_string(cfg.seed) + "\n";
        return g;
      }());
  return cfg;
}

// ---- snapshots -------------------------------------------------------------

void cmd_snapshots(const PipelineConfig& cfg) {
  Context ctx = make_context(cfg);
  const int n = ctx.sys.n_dofs;
  const int nh = cfg.frf.hb.n_harmonics;
  const int spp = cfg.samples_per_period;
  const int ppc = cfg.points_per_curve;
  const int nb = static_cast<int>(cfg.train_betas.size());

  std::string dir = snapshot_dir(cfg);
  fs::create_directories(dir);

  std::vector<FrfCurve> curves;
  curves.reserve(nb);
  for (double beta : cfg.train_betas)
    curves.push_back(trace_hb_frf(ctx.form, beta, ctx.functional, cfg.frf));

  std::vector<const FrfCurve*> family;
  for (const FrfCurve& c : curves) family.push_back(&c);
  AxisScaling scaling = family_scaling(family);

  SnapshotSet set;
  set.matrix.resize(n, static_cast<long>(nb) * ppc * spp);
  set.params.resize(static_cast<long>(nb) * ppc * spp, 3);
  set.samples_per_period = spp;

  for (int b = 0; b < nb; ++b) {
    const FrfCurve& curve = curves[b];
    double beta = cfg.train_betas[b];
    std::vector<Landmark> landmarks =
        find_landmarks(curve, cfg.n_regions, cfg.landmark_overrides);
    ArcParametrizedFrf pfrf = piecewise_normalize(curve, landmarks, scaling);

    ContinuationProblem problem = make_hb_continuation(
        ctx.form, beta, cfg.frf,
        [n, w = ctx.functional](const Eigen::VectorXd& x, double) {
          return orbit_amplitude(x, n, w);
        });

    // Chebyshev-extrema placement per region: orbits cluster near the
    // landmarks (curve ends and resonance peaks), where the response varies
    // fastest along s and the downstream regression needs the most support
    std::vector<double> s_samples;
    {
      const int segs = ppc - 1;
      const int base_segs = segs / cfg.n_regions;
      const int extra = segs % cfg.n_regions;
      for (int r = 0; r < cfg.n_regions; ++r) {
        const int m = base_segs + (r < extra ? 1 : 0);
        for (int j = (r == 0 ? 0 : 1); j <= m; ++j)
          s_samples.push_back(r + 0.5 * (1.0 - std::cos(M_PI * j / m)));
      }
    }

    for (int j = 0; j < ppc; ++j) {
      double s = s_samples[j];
      PolishedOrbit orbit = orbit_at_s(pfrf, s, problem);
      Eigen::MatrixXd states = orbit_states(orbit.x, orbit.omega, n, nh, spp);
      long base = (static_cast<long>(b) * ppc + j) * spp;
      for (int k = 0; k < spp; ++k) {
        set.matrix.col(base + k) = states.col(k);
        set.params(base + k, 0) = static_cast<double>(k) / spp;
        set.params(base + k, 1) = beta;
        set.params(base + k, 2) = s;
      }
    }

    // stored curve table (s, omega, amplitude) for s -> omega lookup at
    // inference time
    std::string file = "curve_" + std::to_string(b) + ".mxb";
    Eigen::MatrixXd table(curve.points.size(), 3);
    for (size_t i = 0; i < curve.points.size(); ++i) {
      table(i, 0) = pfrf.s_values[i];
      table(i, 1) = curve.points[i].omega;
      table(i, 2) = curve.points[i].amplitude;
    }
    mxb1_save(dir + "/" + file, table);

    std::ostringstream prov;
    prov << "beta=" << format_double(beta) << " file=" << file
         << " points=" << curve.points.size() << " n_regions=" << cfg.n_regions
         << " landmarks=";
    for (size_t i = 0; i < landmarks.size(); ++i)
      prov << (i ? ";" : "") << landmarks[i].point_index;
    set.provenance.push_back(prov.str());
  }

  save_snapshots(dir, set, cfg.hash);
}

// ---- DPIM ------------------------------------------------------------------

void cmd_dpim(const PipelineConfig& cfg) {
  Context ctx = make_context(cfg);
  const int n = ctx.sys.n_dofs;
  const int spp = cfg.samples_per_period;
  fs::create_directories(cfg.out_dir);

  DpimModel model = build_dpim(ctx.sys, cfg.master_mode);
  save_dpim(cfg.out_dir + "/dpim.model", model);
  write_text(cfg.out_dir + "/dpim.hash", cfg.hash + "\n");

  std::vector<double> betas = cfg.train_betas;
  betas.insert(betas.end(), cfg.test_betas.begin(), cfg.test_betas.end());
  std::sort(betas.begin(), betas.end());

  double peak_amp = -1.0, peak_omega = 0.0;
  Eigen::VectorXd peak_coeffs;
  for (size_t k = 0; k < betas.size(); ++k) {
    FrfCurve curve = dpim_frf(model, betas[k], ctx.functional, cfg.frf);
    std::vector<std::string> cols{"omega", "beta", "amplitude"};
    for (int i = 0; i < n; ++i) cols.push_back("amp_mode_" + std::to_string(i));
    CsvWriter csv(cfg.out_dir + "/dpim_frf_beta" + std::to_string(k) + ".csv", cols,
                  cfg.hash);
    for (const FrfPoint& pt : curve.points) {
      Eigen::MatrixXd u, v;
      dpim_decode_orbit(model, pt.unknown, pt.omega, spp, u, v);
      std::vector<double> row{pt.omega, betas[k], pt.amplitude};
      for (int i = 0; i < n; ++i) row.push_back(modal_amplitude(ctx, u, i));
      csv.row(row);
      if (pt.amplitude > peak_amp) {
        peak_amp = pt.amplitude;
        peak_omega = pt.omega;
        peak_coeffs = pt.unknown;
      }
    }
  }

  if (n > 1 && peak_coeffs.size() > 0) {
    Eigen::MatrixXd u, v;
    dpim_decode_orbit(model, peak_coeffs, peak_omega, spp, u, v);
    write_manifold_csv(cfg.out_dir + "/dpim_manifold.csv", cfg.hash,
                       manifold_orbit(ctx.basis, ctx.sys.mass, u, cfg.master_mode,
                                      cfg.plot_mode, peak_omega,
                                      std::min(10, (spp - 1) / 2)));
  }
}

// ---- training --------------------------------------------------------------

void cmd_train(const PipelineConfig& cfg) {
  std::string dir = snapshot_dir(cfg);
  std::string stored_hash;
  SnapshotSet set;
  try {
    set = load_snapshots(dir, &stored_hash);
  } catch (const std::exception& e) {
    throw StaleArtifactError(std::string("snapshot bundle unusable: ") + e.what());
  }
  if (stored_hash != cfg.hash)
    throw StaleArtifactError("snapshot bundle was produced with config " + stored_hash +
                             ", current config is " + cfg.hash);

  std::mt19937_64 rng(cfg.seed);
  PodBasis pod =
      rsvd(set.matrix, cfg.pod_dim, cfg.rsvd_oversampling, cfg.rsvd_power_iters, rng);

  for (int p : cfg.p_sweep) {
    TrainingConfig tc = cfg.training;
    tc.latent_dim = p;
    TrainingResult result = train(set, pod, tc);
    save_dlrom(dlrom_path(cfg, p), result.model);
    write_text(dlrom_path(cfg, p) + ".hash", cfg.hash + "\n");
    CsvWriter csv(cfg.out_dir + "/train_log_p" + std::to_string(p) + ".csv",
                  {"epoch", "train_loss", "val_loss"}, cfg.hash);
    for (const TrainingLogEntry& e : result.log)
      csv.row({static_cast<double>(e.epoch), e.train_loss, e.val_loss});
  }
}

// ---- family reload ---------------------------------------------------------

LoadedFamily load_family(const std::string& dir) {
  std::ifstream manifest(dir + "/manifest.txt");
  if (!manifest) throw StaleArtifactError("missing artifact: " + dir + "/manifest.txt");
  LoadedFamily fam;
  std::string line;
  std::getline(manifest, line);
  if (line != "VIBROM-SNAPSHOTS 1")
    throw StaleArtifactError("bad snapshot manifest in " + dir);

  std::vector<std::string> files;
  while (std::getline(manifest, line)) {
    if (line.rfind("config_hash = ", 0) == 0) {
      fam.hash = line.substr(14);
      continue;
    }
    if (line.rfind("curve: ", 0) != 0) continue;
    std::istringstream fields(line.substr(7));
    std::string field;
    double beta = 0.0;
    std::string file;
    int n_regions = 0;
    while (fields >> field) {
      if (field.rfind("beta=", 0) == 0) beta = std::stod(field.substr(5));
      else if (field.rfind("file=", 0) == 0) file = field.substr(5);
      else if (field.rfind("n_regions=", 0) == 0) n_regions = std::stoi(field.substr(10));
    }
    if (file.empty()) throw StaleArtifactError("manifest curve entry without file");
    fam.betas.push_back(beta);
    fam.n_regions = n_regions;
    files.push_back(file);
  }

  // two passes: fill the curve storage, then take stable pointers into it
  std::vector<std::vector<double>> s_tables;
  for (const std::string& file : files) {
    Eigen::MatrixXd table = mxb1_load(dir + "/" + file);
    FrfCurve curve;
    std::vector<double> sv;
    for (long i = 0; i < table.rows(); ++i) {
      curve.points.push_back({table(i, 1), table(i, 2), Eigen::VectorXd()});
      sv.push_back(table(i, 0));
    }
    fam.curves.push_back(std::move(curve));
    s_tables.push_back(std::move(sv));
  }
  for (size_t i = 0; i < fam.curves.size(); ++i) {
    ArcParametrizedFrf pfrf;
    pfrf.source = &fam.curves[i];
    pfrf.s_values = s_tables[i];
    pfrf.n_regions = fam.n_regions;
    fam.parametrized.push_back(std::move(pfrf));
  }
  return fam;
}

// ---- inference -------------------------------------------------------------

void cmd_infer(const PipelineConfig& cfg) {
  Context ctx = make_context(cfg);
  LoadedFamily fam = load_family(snapshot_dir(cfg));
  if (fam.hash != cfg.hash)
    throw StaleArtifactError("snapshot bundle was produced with config " + fam.hash +
                             ", current config is " + cfg.hash);

  std::vector<const ArcParametrizedFrf*> family;
  for (const ArcParametrizedFrf& p : fam.parametrized) family.push_back(&p);

  std::vector<double> s_grid;
  for (int i = 0; i < cfg.infer_points; ++i)
    s_grid.push_back(fam.n_regions * static_cast<double>(i) / (cfg.infer_points - 1));

  CsvWriter timing(cfg.out_dir + "/infer_timing.csv", {"beta", "p", "seconds"}, cfg.hash);
  for (int p : cfg.p_sweep) {
    check_hash(dlrom_path(cfg, p) + ".hash", cfg.hash);
    DlRomModel model = load_dlrom(dlrom_path(cfg, p));
    for (size_t k = 0; k < cfg.test_betas.size(); ++k) {
      double beta = cfg.test_betas[k];
      auto t0 = std::chrono::steady_clock::now();
      ReconstructedFrf rec = reconstruct_frf(model, beta, s_grid, family, fam.betas,
                                             ctx.functional, cfg.samples_per_period);
      double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count();
      CsvWriter csv(cfg.out_dir + "/infer_frf_p" + std::to_string(p) + "_beta" +
                        std::to_string(k) + ".csv",
                    {"s", "omega", "amplitude"}, cfg.hash);
      for (size_t i = 0; i < rec.s.size(); ++i)
        csv.row({rec.s[i], rec.omega[i], rec.amplitude[i]});
      timing.row({beta, static_cast<double>(p), seconds});
    }
  }
}

// ---- report ----------------------------------------------------------------

void cmd_report(const PipelineConfig& cfg) {
  Context ctx = make_context(cfg);
  const int n = ctx.sys.n_dofs;
  const int nh = cfg.frf.hb.n_harmonics;
  const int spp = cfg.samples_per_period;

  LoadedFamily fam = load_family(snapshot_dir(cfg));
  if (fam.hash != cfg.hash)
    throw StaleArtifactError("snapshot bundle was produced with config " + fam.hash +
                             ", current config is " + cfg.hash);
  // the invariant-manifold overlay is optional: some benchmarks (1:2 internal
  // resonance) are rejected by the dpim command, but their E-tables still matter
  const bool have_dpim = std::filesystem::exists(cfg.out_dir + "/dpim.model");
  DpimModel dpim;
  if (have_dpim) {
    check_hash(cfg.out_dir + "/dpim.hash", cfg.hash);
    dpim = load_dpim(cfg.out_dir + "/dpim.model");
  }

  std::vector<DlRomModel> models;
  for (int p : cfg.p_sweep) {
    check_hash(dlrom_path(cfg, p) + ".hash", cfg.hash);
    models.push_back(load_dlrom(dlrom_path(cfg, p)));
  }

  // E-table accumulators across all test betas
  struct ErrStat {
    double max_rel = 0.0, sum_rel = 0.0, sum_glob = 0.0;
    int count = 0;
    bool any_rel = false;
  };
  std::vector<std::vector<ErrStat>> stats(cfg.p_sweep.size(),
                                          std::vector<ErrStat>(n));

  CsvWriter errors_csv(cfg.out_dir + "/report_errors.csv",
                       {"beta", "s", "p", "mode", "E_rel", "E_global"}, cfg.hash);

  for (size_t k = 0; k < cfg.test_betas.size(); ++k) {
    double beta = cfg.test_betas[k];
    FrfCurve curve = trace_hb_frf(ctx.form, beta, ctx.functional, cfg.frf);
    // normalize the held-out curve with the training family's axis scaling so
    // its s abscissa means the same physical alignment the models were trained on
    std::vector<const FrfCurve*> train_family;
    for (const FrfCurve& c : fam.curves) train_family.push_back(&c);
    ArcParametrizedFrf pfrf = piecewise_normalize(
        curve, find_landmarks(curve, cfg.n_regions, cfg.landmark_overrides),
        family_scaling(train_family));

    ContinuationProblem problem = make_hb_continuation(
        ctx.form, beta, cfg.frf,
        [n, w = ctx.functional](const Eigen::VectorXd& x, double) {
          return orbit_amplitude(x, n, w);
        });

    std::vector<double> s_grid;
    for (int i = 0; i < cfg.report_points; ++i)
      s_grid.push_back(cfg.n_regions * static_cast<double>(i) /
                       (cfg.report_points - 1));

    std::vector<PolishedOrbit> ref_orbits;
    for (double s : s_grid) ref_orbits.push_back(orbit_at_s(pfrf, s, problem));

    // reference modal FRF
    {
      CsvWriter csv(cfg.out_dir + "/report_frf_ref_beta" + std::to_string(k) + ".csv",
                    modal_frf_columns(n), cfg.hash);
      for (size_t i = 0; i < s_grid.size(); ++i) {
        Eigen::MatrixXd states =
            orbit_states(ref_orbits[i].x, ref_orbits[i].omega, n, nh, spp);
        std::vector<double> row{s_grid[i], beta, ref_orbits[i].omega};
        for (int m = 0; m < n; ++m) row.push_back(modal_amplitude(ctx, states, m));
        csv.row(row);
      }
    }

    int peak_index = 0;
    {
      double best = -1.0;
      for (size_t i = 0; i < ref_orbits.size(); ++i) {
        double a = orbit_amplitude(ref_orbits[i].x, n, ctx.functional);
        if (a > best) {
          best = a;
          peak_index = static_cast<int>(i);
        }
      }
    }

    for (size_t pi = 0; pi < cfg.p_sweep.size(); ++pi) {
      int p = cfg.p_sweep[pi];
      CsvWriter frf_csv(cfg.out_dir + "/report_frf_p" + std::to_string(p) + "_beta" +
                            std::to_string(k) + ".csv",
                        modal_frf_columns(n), cfg.hash);
      for (size_t i = 0; i < s_grid.size(); ++i) {
        double omega = ref_orbits[i].omega;
        Eigen::MatrixXd ref_states = orbit_states(ref_orbits[i].x, omega, n, nh, spp);
        Eigen::MatrixXd rom_states = dlrom_states(models[pi], beta, s_grid[i], spp);

        // velocity reconstruction can keep at most the Nyquist harmonic count
        const int n_keep = std::min(10, (spp - 1) / 2);
        std::vector<double> row{s_grid[i], beta, omega};
        for (int m = 0; m < n; ++m) {
          ModalTrace ref =
              modal_coordinate(ctx.basis, ctx.sys.mass, ref_states, m, omega, n_keep);
          ModalTrace rom =
              modal_coordinate(ctx.basis, ctx.sys.mass, rom_states, m, omega, n_keep);
          row.push_back(rom.amplitude);
          ModalErrors e = modal_errors(ref.u, rom.u, ref_states, ctx.sys.mass);
          errors_csv.row_mixed({format_double(beta), format_double(s_grid[i]),
                                std::to_string(p), std::to_string(m),
                                e.relative ? format_double(*e.relative) : std::string(),
                                format_double(e.global)});
          ErrStat& st = stats[pi][m];
          if (e.relative) {
            st.max_rel = std::max(st.max_rel, *e.relative);
            st.sum_rel += *e.relative;
            st.any_rel = true;
          }
          st.sum_glob += e.global;
          ++st.count;
        }
        frf_csv.row(row);

        if (static_cast<int>(i) == peak_index && n > 1) {
          write_manifold_csv(cfg.out_dir + "/report_manifold_p" + std::to_string(p) +
                                 "_beta" + std::to_string(k) + ".csv",
                             cfg.hash,
                             manifold_orbit(ctx.basis, ctx.sys.mass, rom_states,
                                            cfg.master_mode, cfg.plot_mode, omega,
                                            n_keep));
        }
      }
    }

    if (n > 1 && have_dpim) {
      double omega = ref_orbits[peak_index].omega;
      Eigen::MatrixXd ref_states =
          orbit_states(ref_orbits[peak_index].x, omega, n, nh, spp);
      std::vector<OrbitRow> ref_rows =
          manifold_orbit(ctx.basis, ctx.sys.mass, ref_states, cfg.master_mode,
                         cfg.plot_mode, omega, std::min(10, (spp - 1) / 2));
      write_manifold_csv(cfg.out_dir + "/report_manifold_ref_beta" + std::to_string(k) +
                             ".csv",
                         cfg.hash, ref_rows);

      // DPIM surface evaluated on the reference orbit's (R, S) samples
      CsvWriter dpim_csv(cfg.out_dir + "/report_manifold_dpim_beta" + std::to_string(k) +
                             ".csv",
                         {"u_master", "v_master", "u_plot"}, cfg.hash);
      Eigen::VectorXd phi_plot = ctx.basis.modes.col(cfg.plot_mode);
      Eigen::VectorXd proj_plot = ctx.sys.mass * phi_plot;
      for (const OrbitRow& r : ref_rows) {
        Eigen::VectorXd u, v;
        dpim_decode(dpim, r.u_master, r.v_master, u, v);
        dpim_csv.row({r.u_master, r.v_master, proj_plot.dot(u)});
      }
    }
  }

  CsvWriter summary(cfg.out_dir + "/report_errors_summary.csv",
                    {"p", "mode", "max_E_rel", "mean_E_rel", "mean_E_global"}, cfg.hash);
  for (size_t pi = 0; pi < cfg.p_sweep.size(); ++pi)
    for (int m = 0; m < n; ++m) {
      const ErrStat& st = stats[pi][m];
      double denom = std::max(st.count, 1);
      summary.row_mixed({std::to_string(cfg.p_sweep[pi]), std::to_string(m),
                         st.any_rel ? format_double(st.max_rel) : std::string(),
                         st.any_rel ? format_double(st.sum_rel / denom) : std::string(),
                         format_double(st.sum_glob / denom)});
    }
}

int run_command(const std::string& name, const PipelineConfig& cfg) {
  try {
    fs::create_directories(cfg.out_dir);
    if (name == "snapshots") cmd_snapshots(cfg);
    else if (name == "dpim") cmd_dpim(cfg);
    else if (name == "train") cmd_train(cfg);
    else if (name == "infer") cmd_infer(cfg);
    else if (name == "report") cmd_report(cfg);
    else throw ConfigError("unknown command: " + name);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const StaleArtifactError& e) {
    std::cerr << "stale artifact: " << e.what() << "\n";
    return 4;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace vibrom
