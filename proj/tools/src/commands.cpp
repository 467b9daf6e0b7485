#include "variety_cli/commands.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"

#include "variety/denoise.hpp"
#include "variety/errors.hpp"
#include "variety/io.hpp"
#include "variety/registration.hpp"
#include "variety/sure.hpp"
#include "variety/synth.hpp"
#include "variety/trust_region.hpp"
#include "variety_cli/bench.hpp"

namespace variety::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

// Exit-code carrying error for option combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DenoiseFlags {
  int degree = 2;
  int q = 1;
  double lambda0 = 1e-6;
  double lambda_factor = 10.0;
  int stages = 8;
  std::string selection = "balance";
  double balance_ratio = 1e-4;
  std::optional<double> eta;
  bool no_scaling = false;
  bool no_downward = false;
  double tolerance = 1e-6;
  int max_iterations = 500;

  void add(CLI::App& app) {
    app.add_option("--degree,-d", degree, "Polynomial degree")->capture_default_str();
    app.add_option("--q", q, "Number of defining polynomials")->capture_default_str();
    app.add_option("--lambda0", lambda0, "First penalty weight")->capture_default_str();
    app.add_option("--lambda-factor", lambda_factor, "Penalty growth per stage")->capture_default_str();
    app.add_option("--stages", stages, "Number of continuation stages")->capture_default_str();
    app.add_option("--selection", selection, "Stage selection: balance, l_curve or noise_budget")
        ->capture_default_str();
    app.add_option("--balance-ratio", balance_ratio, "Ratio used by the balance rule")->capture_default_str();
    app.add_option("--eta", eta, "Noise budget on ||X - M||_F^2 (selects noise_budget)");
    app.add_flag("--no-scaling", no_scaling, "Skip centring and box scaling");
    app.add_flag("--no-downward-pass", no_downward, "Skip the decreasing-lambda refinement sweep");
    app.add_option("--tolerance", tolerance, "Riemannian gradient tolerance")->capture_default_str();
    app.add_option("--max-iterations", max_iterations, "Trust-region iteration cap")->capture_default_str();
  }

  DenoiseOptions options() const {
    DenoiseOptions o;
    o.degree = degree;
    o.q = q;
    o.lambda_initial = lambda0;
    o.lambda_multiplier = lambda_factor;
    o.max_stages = stages;
    try {
      o.selection = stage_selection_from_string(selection);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    if (o.selection == StageSelection::noise_budget && !eta) {
      throw UsageError("--selection noise_budget requires --eta");
    }
    o.balance_ratio = balance_ratio;
    o.eta = eta;
    o.scaling = !no_scaling;
    o.downward_pass = !no_downward;
    o.solver.gradient_tolerance = tolerance;
    o.solver.max_iterations = max_iterations;
    try {
      o.validate();
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return o;
  }
};

std::uint64_t resolve_seed(std::uint64_t flag_seed) {
  const char* env = std::getenv("VARIETY_SEED");
  if (env == nullptr || *env == '\0') return flag_seed;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, v);
  if (res.ec != std::errc() || res.ptr != end) throw UsageError("VARIETY_SEED must be an unsigned integer");
  return v;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FormatError("cannot create output directory " + dir.string());
}

json base_report(const std::string& command) {
  return json{{"schema_version", io::kSchemaVersion}, {"command", command}};
}

void check_readable(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path);
}

// --------------------------------------------------------------- synth

struct SynthFlags {
  std::string gen;
  Eigen::Index s = 150;
  std::optional<Eigen::Index> s1;
  double sigma = 0.0;
  bool pair = false;
  std::optional<std::string> overlap;
  double translation = 1.0;
  std::vector<double> source_range;
  std::vector<double> target_range;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  synth::Scenario sc;
  try {
    sc.generator = synth::generator_from_string(f.gen);
    if (f.overlap) sc.overlap = synth::overlap_from_string(*f.overlap);
    sc.s2 = f.s;
    sc.s1 = f.s1.value_or(f.s);
    sc.sigma = f.sigma;
    sc.translation_magnitude = f.translation;
    sc.seed = resolve_seed(f.seed);
    if (!f.source_range.empty()) sc.source_range = synth::ParameterRange{f.source_range[0], f.source_range[1]};
    if (!f.target_range.empty()) sc.target_range = synth::ParameterRange{f.target_range[0], f.target_range[1]};
    sc.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const bool pair = f.pair || f.overlap.has_value();
  const fs::path dir(f.out);

  json scenario = io::to_json(sc);
  scenario["mode"] = pair ? "pair" : "single";
  if (!pair) {
    const PointCloud clean = synth::sample(sc.generator, sc.s2, synth::seeded_rng(sc.seed, 1)(),
                                           sc.resolved_target_range());
    const PointCloud noisy = synth::add_noise(clean, sc.sigma, synth::seeded_rng(sc.seed, 2)());
    scenario.erase("s1");
    scenario.erase("source_range");
    scenario.erase("overlap");
    scenario.erase("translation_magnitude");
    scenario["true_coefficients"] = io::matrix_to_json(synth::true_coefficients(sc.generator).transpose());
    ensure_dir(dir);
    io::write_csv(dir / "cloud.csv", noisy);
    io::write_csv(dir / "cloud_clean.csv", clean);
    io::write_json(dir / "scenario.json", scenario);
    out << "wrote " << noisy.size() << " points to " << (dir / "cloud.csv").string() << "\n";
    return kOk;
  }

  const synth::Pair p = synth::make_pair(sc);
  scenario["true_coefficients"] = io::matrix_to_json(p.truth.coefficients.transpose());
  RigidTransform truth{manifolds::RotationPoint{p.truth.rotation, 1}, p.truth.translation};
  scenario["ground_truth_transform"] = io::to_json(truth);
  ensure_dir(dir);
  io::write_csv(dir / "source.csv", p.m1_hat);
  io::write_csv(dir / "target.csv", p.m2_hat);
  io::write_csv(dir / "source_clean.csv", p.truth.m1);
  io::write_csv(dir / "target_clean.csv", p.truth.m2);
  io::write_json(dir / "scenario.json", scenario);
  out << "wrote source (" << p.m1_hat.size() << ") and target (" << p.m2_hat.size() << ") to " << dir.string()
      << "\n";
  return kOk;
}

// ------------------------------------------------------------- denoise

struct DenoiseCmdFlags {
  std::string input;
  std::string out = ".";
  std::optional<double> sigma;
  bool sure = false;
  bool full_hessian = false;
  DenoiseFlags model;
};

int cmd_denoise(const DenoiseCmdFlags& f, std::ostream& out) {
  if (f.sure && !f.sigma) throw UsageError("--sure requires --sigma");
  if (f.sigma && !(*f.sigma > 0.0)) throw UsageError("--sigma must be positive");
  const DenoiseOptions opts = f.model.options();
  check_readable(f.input);
  const PointCloud m_hat = io::read_csv(f.input);
  check_sample_count(m_hat.size(), features::dimension(static_cast<int>(m_hat.dim()), opts.degree), opts.q);

  const DenoiseResult res = denoise(m_hat, opts);
  json report = base_report("denoise");
  report["input"] = f.input;
  report["options"] = json{{"degree", opts.degree},
                           {"q", opts.q},
                           {"lambda_initial", opts.lambda_initial},
                           {"lambda_multiplier", opts.lambda_multiplier},
                           {"stages", opts.max_stages},
                           {"selection", to_string(opts.eta ? StageSelection::noise_budget : opts.selection)},
                           {"scaling", opts.scaling},
                           {"downward_pass", opts.downward_pass}};
  report["result"] = io::to_json(res);
  if (f.sigma) report["sure"] = io::to_json(sure_for_result(m_hat, res, *f.sigma, f.full_hessian));

  const fs::path dir(f.out);
  ensure_dir(dir);
  io::write_csv(dir / "denoised.csv", res.x_star);
  json model = io::to_json(res.model);
  model["scaling"] = io::to_json(res.scaling);
  io::write_json(dir / "model.json", model);
  io::write_json(dir / "report.json", report);
  out << "residual " << res.residual << ", lambda " << res.lambda_final
      << (res.converged ? "" : " (solver did not reach tolerance)") << "\n";
  if (f.sigma) out << "SURE " << report["sure"]["sure_rmse"] << "\n";
  return kOk;
}

// ------------------------------------------------------------ register

struct RegisterCmdFlags {
  std::string source;
  std::string target;
  std::string out = ".";
  int restarts = 5;
  std::optional<double> threshold;
  bool so_only = false;
  std::uint64_t seed = 0;
  DenoiseFlags model;
};

int cmd_register(const RegisterCmdFlags& f, std::ostream& out) {
  const DenoiseOptions dopts = f.model.options();
  RegisterOptions ropts;
  ropts.max_restarts = f.restarts;
  if (f.threshold) ropts.residual_threshold = *f.threshold;
  ropts.both_branches = !f.so_only;
  ropts.seed = resolve_seed(f.seed);
  try {
    ropts.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  check_readable(f.source);
  check_readable(f.target);
  const PointCloud source = io::read_csv(f.source);
  const PointCloud target = io::read_csv(f.target);
  if (source.dim() != target.dim()) {
    throw UsageError("source has " + std::to_string(source.dim()) + " coordinates per row, target has " +
                     std::to_string(target.dim()));
  }
  const auto big_n = features::dimension(static_cast<int>(source.dim()), dopts.degree);
  check_sample_count(target.size(), big_n, dopts.q);
  check_sample_count(source.size(), big_n, dopts.q);

  const PipelineResult res = register_pipeline(source, target, dopts, ropts);
  json report = base_report("register");
  report["source"] = f.source;
  report["target"] = f.target;
  report["seed"] = ropts.seed;
  report["result"] = io::to_json(res);

  const fs::path dir(f.out);
  ensure_dir(dir);
  json transform = io::to_json(res.registration.transform);
  transform["schema_version"] = io::kSchemaVersion;
  transform["residual"] = res.registration.residual;
  transform["scaling"] = io::to_json(res.target_scaling);
  io::write_json(dir / "transform.json", transform);
  io::write_csv(dir / "transformed_source.csv", apply_transform(res.registration.transform, source));
  io::write_json(dir / "report.json", report);
  out << "residual " << res.registration.residual << " (restart " << res.registration.restart << ", branch "
      << res.registration.branch << ")" << (res.registration.converged ? "" : " (not converged)") << "\n";
  return kOk;
}

// ---------------------------------------------------------------- sure

struct SureCmdFlags {
  std::string input;
  std::string out = ".";
  double sigma = 0.0;
  bool sweep = false;
  DenoiseFlags model;
};

int cmd_sure(const SureCmdFlags& f, std::ostream& out) {
  if (!(f.sigma > 0.0)) throw UsageError("--sigma must be positive");
  const DenoiseOptions opts = f.model.options();
  check_readable(f.input);
  const PointCloud m_hat = io::read_csv(f.input);
  json report = base_report("sure");
  report["input"] = f.input;
  report["sigma"] = f.sigma;
  json rows = json::array();
  if (f.sweep) {
    for (const auto& d : sure_by_degree(m_hat, f.sigma, opts, 1, 5)) {
      json row = d.failure.empty() ? io::to_json(d.report) : json{{"failure", d.failure}};
      row["degree"] = d.degree;
      row["residual"] = d.residual;
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw AssumptionViolation("no degree in 1..5 satisfies s >= N - q", 0);
  } else {
    check_sample_count(m_hat.size(), features::dimension(static_cast<int>(m_hat.dim()), opts.degree), opts.q);
    const DenoiseResult res = denoise(m_hat, opts);
    json row = io::to_json(sure_for_result(m_hat, res, f.sigma));
    row["degree"] = opts.degree;
    row["residual"] = res.residual;
    rows.push_back(std::move(row));
  }
  report["by_degree"] = rows;
  const fs::path dir(f.out);
  ensure_dir(dir);
  io::write_json(dir / "sure.json", report);
  for (const auto& r : rows) {
    out << "degree " << r["degree"].get<int>() << ": ";
    if (r.contains("failure")) {
      out << r["failure"].get<std::string>();
    } else {
      out << "SURE " << r["sure_rmse"];
    }
    out << ", residual " << r["residual"].get<double>() << "\n";
  }
  return kOk;
}

// --------------------------------------------------------------- bench

struct BenchFlags {
  std::vector<std::string> cases{"all"};
  std::uint64_t seed = 2024;
  std::optional<std::string> report;
};

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  bench::BenchOptions opts;
  opts.seed = resolve_seed(f.seed);
  std::vector<bench::CaseResult> results;
  try {
    for (const auto& c : f.cases) {
      if (c != "all" && std::find(bench::case_names().begin(), bench::case_names().end(), c) ==
                            bench::case_names().end()) {
        throw InvalidArgument("unknown bench case '" + c + "'");
      }
    }
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  results = bench::run_cases(f.cases, opts);
  const json report = bench::report_json(results);
  if (f.report) {
    const fs::path p(*f.report);
    if (p.has_parent_path()) ensure_dir(p.parent_path());
    io::write_json(p, report);
  }
  out << bench::report_table(results);
  const bool pass = report["pass"].get<bool>();
  out << (pass ? "all cases passed" : "some cases FAILED") << "\n";
  return pass ? kOk : kBenchFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit algebraic varieties to point clouds, denoise them and register pairs"};
  app.require_subcommand(1);

  SynthFlags synth_f;
  auto* synth_cmd = app.add_subcommand("synth", "Generate seeded synthetic clouds");
  synth_cmd->add_option("--gen", synth_f.gen, "circle, union_two_subspaces, parabola or quadratic_surface_3d")
      ->required();
  synth_cmd->add_option("--s", synth_f.s, "Number of samples (target cloud in pair mode)")->capture_default_str();
  synth_cmd->add_option("--s1", synth_f.s1, "Source sample count in pair mode (defaults to --s)");
  synth_cmd->add_option("--sigma", synth_f.sigma, "Gaussian noise level")->capture_default_str();
  synth_cmd->add_flag("--pair", synth_f.pair, "Write a source/target registration pair");
  synth_cmd->add_option("--overlap", synth_f.overlap, "full, partial or none (implies --pair)");
  synth_cmd->add_option("--translation", synth_f.translation, "Norm of the ground-truth translation")
      ->capture_default_str();
  synth_cmd->add_option("--source-range", synth_f.source_range, "Source parameter range: lo hi")->expected(2);
  synth_cmd->add_option("--target-range", synth_f.target_range, "Target parameter range: lo hi")->expected(2);
  synth_cmd->add_option("--seed", synth_f.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out,-o", synth_f.out, "Output directory")->capture_default_str();

  DenoiseCmdFlags den_f;
  auto* den_cmd = app.add_subcommand("denoise", "Fit a variety and denoise a cloud");
  den_cmd->add_option("--input,-i", den_f.input, "Input CSV")->required();
  den_cmd->add_option("--out,-o", den_f.out, "Output directory")->capture_default_str();
  den_cmd->add_option("--sigma", den_f.sigma, "Noise level; adds a SURE estimate to the report");
  den_cmd->add_flag("--sure", den_f.sure, "Require a SURE estimate (needs --sigma)");
  den_cmd->add_flag("--full-hessian", den_f.full_hessian, "Also report the full Hessian condition number");
  den_f.model.add(*den_cmd);

  RegisterCmdFlags reg_f;
  auto* reg_cmd = app.add_subcommand("register", "Register a source cloud onto a target cloud");
  reg_cmd->add_option("--source", reg_f.source, "Source CSV (the smaller cloud)")->required();
  reg_cmd->add_option("--target", reg_f.target, "Target CSV")->required();
  reg_cmd->add_option("--out,-o", reg_f.out, "Output directory")->capture_default_str();
  reg_cmd->add_option("--restarts", reg_f.restarts, "Maximum random restarts")->capture_default_str();
  reg_cmd->add_option("--threshold", reg_f.threshold, "Stop once the residual is below this value");
  reg_cmd->add_flag("--so-only", reg_f.so_only, "Search rotations only (det = +1)");
  reg_cmd->add_option("--seed", reg_f.seed, "Random seed")->capture_default_str();
  reg_f.model.add(*reg_cmd);

  SureCmdFlags sure_f;
  auto* sure_cmd = app.add_subcommand("sure", "Estimate the denoising RMSE without ground truth");
  sure_cmd->add_option("--input,-i", sure_f.input, "Input CSV")->required();
  sure_cmd->add_option("--sigma", sure_f.sigma, "Noise level")->required();
  sure_cmd->add_flag("--sweep", sure_f.sweep, "Report degrees 1 to 5");
  sure_cmd->add_option("--out,-o", sure_f.out, "Output directory")->capture_default_str();
  sure_f.model.add(*sure_cmd);

  BenchFlags bench_f;
  auto* bench_cmd = app.add_subcommand("bench", "Run the acceptance benchmark matrix");
  bench_cmd->add_option("--case", bench_f.cases, "Case name or 'all' (repeatable)")->capture_default_str();
  bench_cmd->add_option("--seed", bench_f.seed, "Base seed")->capture_default_str();
  bench_cmd->add_option("--report", bench_f.report, "Write the JSON report to this path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_f, out);
    if (*den_cmd) return cmd_denoise(den_f, out);
    if (*reg_cmd) return cmd_register(reg_f, out);
    if (*sure_cmd) return cmd_sure(sure_f, out);
    if (*bench_cmd) return cmd_bench(bench_f, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const AssumptionViolation& e) {
    err << "error: " << e.what() << "\n";
    return kAssumption;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace variety::cli
