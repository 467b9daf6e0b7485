#include "variety_cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "variety/denoise.hpp"
#include "variety/errors.hpp"
#include "variety/features.hpp"
#include "variety/io.hpp"
#include "variety/registration.hpp"
#include "variety/sure.hpp"
#include "variety/synth.hpp"
#include "variety_cli/commands.hpp"

namespace variety::bench {

using nlohmann::json;

namespace {

// Checks whose measured value is a wall-clock time; their value is left
// out of the JSON report so it stays byte-identical across runs.
const std::string kTimingPrefix = "runtime";

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) { return synth::seeded_rng(seed, tag)(); }

Check ratio_check(std::string label, double measured, double reference) {
  const double r = measured / reference;
  return Check{std::move(label), measured, reference, "ratio in [0.5, 2]", r >= 0.5 && r <= 2.0};
}

Check bound_check(std::string label, double measured, double bound) {
  return Check{std::move(label), measured, bound, "<= bound", measured <= bound};
}

Check range_check(std::string label, double measured, double lo, double hi) {
  std::ostringstream rule;
  rule << "in [" << lo << ", " << hi << "]";
  return Check{std::move(label), measured, hi, rule.str(), measured >= lo && measured <= hi};
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

void finish(CaseResult& c) {
  c.pass = !c.checks.empty() &&
           std::all_of(c.checks.begin(), c.checks.end(), [](const Check& k) { return k.pass; });
}

// ---------------------------------------------------------------- tables

struct TableRow {
  double sigma;
  double sure;
  double rmse;
};

CaseResult denoise_table(const std::string& name, int criterion, synth::Generator gen,
                         const std::vector<TableRow>& rows, const BenchOptions& opts,
                         std::function<void(CaseResult&, double, const DenoiseResult&)> extra) {
  CaseResult c{name, criterion, false, {}, {}, 0.0};
  const auto start = std::chrono::steady_clock::now();
  json rows_json = json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const TableRow& row = rows[k];
    const PointCloud clean = synth::sample(gen, 150, sub_seed(opts.seed, 100 + k),
                                           synth::default_target_range(gen));
    const PointCloud noisy = synth::add_noise(clean, row.sigma, sub_seed(opts.seed, 200 + k));
    const DenoiseResult res = denoise(noisy);
    const double err = rmse(clean, res.x_star);
    const SureReport sure = sure_for_result(noisy, res, row.sigma);
    c.checks.push_back(ratio_check("RMSE sigma=" + sci(row.sigma), err, row.rmse));
    c.checks.push_back(ratio_check("SURE sigma=" + sci(row.sigma), sure.sure_rmse, row.sure));
    rows_json.push_back(json{{"sigma", row.sigma},
                             {"rmse", err},
                             {"sure", sure.sure_rmse},
                             {"residual", res.residual},
                             {"lambda", res.lambda_final},
                             {"divergence", sure.divergence}});
    if (extra) extra(c, row.sigma, res);
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.details["rows"] = std::move(rows_json);
  return c;
}

CaseResult case_circle(const BenchOptions& opts) {
  CaseResult c = denoise_table("circle", 1, synth::Generator::circle,
                               {{1e-3, 5.49e-4, 6.77e-4},
                                {1e-2, 6.76e-3, 8.53e-3},
                                {1e-1, 5.69e-2, 7.52e-2},
                                {2e-1, 1.22e-1, 1.44e-1}},
                               opts, nullptr);
  c.checks.push_back(bound_check(kTimingPrefix + " seconds", c.seconds, 60.0));
  finish(c);
  return c;
}

CaseResult case_lines(const BenchOptions& opts) {
  CaseResult c = denoise_table(
      "lines", 2, synth::Generator::union_two_subspaces,
      {{1e-3, 7.05e-4, 7.10e-4}, {1e-2, 6.32e-3, 6.98e-3}, {1e-1, 7.04e-2, 7.37e-2}}, opts,
      [](CaseResult& cr, double sigma, const DenoiseResult& res) {
        if (sigma == 1e-2) cr.checks.push_back(bound_check("RESIDUAL sigma=1.00e-02", res.residual, 3e-9));
      });
  finish(c);
  return c;
}

CaseResult case_floor(const BenchOptions& opts) {
  CaseResult c{"floor", 3, false, {}, {}, 0.0};
  const std::vector<std::pair<double, double>> rows{{1e-2, 1e-8}, {2e-1, 1e-4}};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const PointCloud clean = synth::sample_circle(150, sub_seed(opts.seed, 300 + k));
    const PointCloud noisy = synth::add_noise(clean, rows[k].first, sub_seed(opts.seed, 310 + k));
    const DenoiseResult res = denoise(noisy);
    c.checks.push_back(bound_check("RESIDUAL sigma=" + sci(rows[k].first), res.residual, rows[k].second));
    c.details["stages_sigma_" + sci(rows[k].first)] = io::to_json(res)["stages"];
  }
  finish(c);
  return c;
}

// ---------------------------------------------------------- registration

struct RegistrationScenario {
  std::string label;
  synth::Generator gen;
  double sigma;
  synth::Overlap overlap;
  double bound;
};

CaseResult case_registration(const BenchOptions& opts) {
  CaseResult c{"registration", 4, false, {}, {}, 0.0};
  const std::vector<RegistrationScenario> scenarios{
      {"quadratic surface 3D, sigma=0", synth::Generator::quadratic_surface_3d, 0.0, synth::Overlap::full, 1e-6},
      {"parabola, sigma=5e-2", synth::Generator::parabola, 5e-2, synth::Overlap::full, 1e-3},
      {"parabola, sigma=1e-1", synth::Generator::parabola, 1e-1, synth::Overlap::full, 1e-1},
      {"partial overlap, sigma=1e-2", synth::Generator::parabola, 1e-2, synth::Overlap::partial, 1e-3},
      {"partial overlap, sigma=1e-1", synth::Generator::parabola, 1e-1, synth::Overlap::partial, 1e-1},
      {"no overlap, sigma=1e-2", synth::Generator::parabola, 1e-2, synth::Overlap::none, 1e-3},
  };
  constexpr int kInstances = 10;
  json all = json::array();
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& sc = scenarios[k];
    int successes = 0;
    json instances = json::array();
    std::vector<double> residuals;
    for (int j = 0; j < kInstances; ++j) {
      synth::Scenario scenario;
      scenario.generator = sc.gen;
      scenario.s1 = 200;
      scenario.s2 = 200;
      scenario.sigma = sc.sigma;
      scenario.overlap = sc.overlap;
      scenario.seed = sub_seed(opts.seed, 1000 + 100 * k + static_cast<std::uint64_t>(j));
      const synth::Pair pair = synth::make_pair(scenario);
      RegisterOptions ropts;
      ropts.seed = scenario.seed;
      const PipelineResult res = register_pipeline(pair.m1_hat, pair.m2_hat, DenoiseOptions{}, ropts);
      const double r = res.registration.residual;
      residuals.push_back(r);
      const bool ok = r <= sc.bound && res.registration.restart < 5;
      successes += ok ? 1 : 0;
      instances.push_back(json{{"seed", scenario.seed},
                               {"residual", r},
                               {"restart", res.registration.restart},
                               {"branch", res.registration.branch},
                               {"success", ok}});
    }
    std::sort(residuals.begin(), residuals.end());
    Check check{sc.label + " (successes of 10, bound " + sci(sc.bound) + ")", static_cast<double>(successes), 9.0,
                ">= 9 of 10", successes >= 9};
    c.checks.push_back(check);
    all.push_back(json{{"scenario", sc.label},
                       {"bound", sc.bound},
                       {"successes", successes},
                       {"median_residual", residuals[residuals.size() / 2]},
                       {"instances", std::move(instances)}});
  }
  c.details["scenarios"] = std::move(all);
  finish(c);
  return c;
}

// ------------------------------------------------------------------ SURE

CaseResult case_unbiasedness(const BenchOptions& opts) {
  CaseResult c{"unbiasedness", 5, false, {}, {}, 0.0};
  constexpr int kDraws = 50;
  constexpr double kSigma = 1e-2;
  const PointCloud clean = synth::sample_circle(150, sub_seed(opts.seed, 500));
  double sum_rhat = 0.0, sum_err = 0.0;
  for (int k = 0; k < kDraws; ++k) {
    const PointCloud noisy = synth::add_noise(clean, kSigma, sub_seed(opts.seed, 501 + static_cast<std::uint64_t>(k)));
    const DenoiseResult res = denoise(noisy);
    const SureReport sure = sure_for_result(noisy, res, kSigma);
    sum_rhat += sure.r_hat;
    sum_err += (clean.values - res.x_star.values).squaredNorm();
  }
  const double mean_rhat = sum_rhat / kDraws;
  const double mean_err = sum_err / kDraws;
  const double rel = std::abs(mean_rhat - mean_err) / mean_err;
  c.checks.push_back(bound_check("|mean R_hat - mean err| / mean err", rel, 0.15));
  c.details = json{{"draws", kDraws}, {"sigma", kSigma}, {"mean_r_hat", mean_rhat}, {"mean_error", mean_err}};
  finish(c);
  return c;
}

CaseResult case_divergence(const BenchOptions& opts) {
  CaseResult c{"divergence", 6, false, {}, {}, 0.0};
  constexpr double kSigma = 1e-2;
  const PointCloud clean = synth::sample_circle(150, sub_seed(opts.seed, 600));
  const PointCloud noisy = synth::add_noise(clean, kSigma, sub_seed(opts.seed, 601));
  const DenoiseResult res = denoise(noisy);
  const PointCloud m_scaled(res.scaling.apply(noisy.values));
  const double lambda = res.lambda_final;

  manifolds::TROptions tight;
  tight.gradient_tolerance = 1e-12;
  tight.max_iterations = 2000;
  const PenalizedSolution base = solve_penalized(m_scaled, lambda, res.x_scaled, res.model, tight);
  const BlockDiagonalHessian h = xx_hessian(base.model, base.x.values, lambda);

  manifolds::Rng rng = synth::seeded_rng(opts.seed, 602);
  std::uniform_int_distribution<Eigen::Index> pick_col(0, m_scaled.size() - 1);
  std::uniform_int_distribution<Eigen::Index> pick_row(0, m_scaled.dim() - 1);
  constexpr double kStep = 1e-5;
  double sum_analytic = 0.0, sum_fd = 0.0;
  json entries = json::array();
  for (int e = 0; e < 10; ++e) {
    const Eigen::Index i = pick_col(rng);
    const Eigen::Index k = pick_row(rng);
    const Eigen::MatrixXd inv = h.blocks[static_cast<std::size_t>(i)].inverse();
    const double analytic = 2.0 * lambda * inv(k, k);
    PointCloud plus = m_scaled, minus = m_scaled;
    plus.values(k, i) += kStep;
    minus.values(k, i) -= kStep;
    const auto sp = solve_penalized(plus, lambda, base.x, base.model, tight);
    const auto sm = solve_penalized(minus, lambda, base.x, base.model, tight);
    const double fd = (sp.x.values(k, i) - sm.x.values(k, i)) / (2.0 * kStep);
    sum_analytic += analytic;
    sum_fd += fd;
    entries.push_back(json{{"row", k}, {"column", i}, {"analytic", analytic}, {"finite_difference", fd}});
  }
  const double rel = std::abs(sum_analytic - sum_fd) / std::abs(sum_fd);
  c.checks.push_back(bound_check("10-entry partial divergence, relative gap", rel, 0.10));

  constexpr double kBigLambda = 1e6;
  const PenalizedSolution big = solve_penalized(m_scaled, kBigLambda, m_scaled, res.model, tight);
  const double ns = static_cast<double>(m_scaled.values.size());
  const double div_big = divergence(big.model, big.x.values, kBigLambda).value / ns;
  c.checks.push_back(range_check("divergence / ns at lambda=1e6", div_big, 0.99, 1.01));
  c.details = json{{"lambda", lambda}, {"entries", std::move(entries)}, {"divergence_over_ns_big_lambda", div_big}};
  finish(c);
  return c;
}

// ------------------------------------------------------------- gradients

CaseResult case_gradients(const BenchOptions& opts) {
  CaseResult c{"gradients", 7, false, {}, {}, 0.0};
  manifolds::Rng rng = synth::seeded_rng(opts.seed, 700);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gaussian = [&](Eigen::Index r, Eigen::Index k) {
    Eigen::MatrixXd m(r, k);
    for (Eigen::Index t = 0; t < m.size(); ++t) m.data()[t] = gauss(rng);
    return m;
  };

  const PointCloud noisy =
      synth::add_noise(synth::sample_circle(30, sub_seed(opts.seed, 701)), 0.05, sub_seed(opts.seed, 702));
  const auto basis = features::build_basis(2, 2);
  constexpr double kLambda = 0.1;
  const auto problem = penalized_problem(noisy.values, basis, kLambda);
  double worst_denoise = 0.0, worst_hess = 0.0;
  for (int t = 0; t < 10; ++t) {
    manifolds::ProductPoint x;
    const Eigen::MatrixXd xv = noisy.values + 0.1 * gaussian(2, noisy.size());
    const auto u = manifolds::random_grassmann(basis.size(), 1, rng);
    x.factors = {manifolds::EuclideanPoint{xv}, u};
    worst_denoise = std::max(worst_denoise, manifolds::check_gradient(problem, x, sub_seed(opts.seed, 710 + t)));

    const VarietyModel model{u, basis};
    const Eigen::MatrixXd dir = gaussian(2, noisy.size());
    constexpr double kStep = 1e-5;
    const Eigen::MatrixXd fd = (penalized_gradient_x(model, xv + kStep * dir, noisy.values, kLambda) -
                                penalized_gradient_x(model, xv - kStep * dir, noisy.values, kLambda)) /
                               (2.0 * kStep);
    const Eigen::MatrixXd hv = xx_hessian(model, xv, kLambda).apply(dir);
    worst_hess = std::max(worst_hess, (fd - hv).norm() / hv.norm());
  }
  c.checks.push_back(bound_check("denoising cost check_gradient (max of 10)", worst_denoise, 1e-6));

  const PointCloud target = synth::sample_parabola(50, sub_seed(opts.seed, 720));
  const auto scaled = scale_to_box(target);
  const InitialGuess guess = init_guess(scaled.cloud, 2, 1);
  const VarietyModel model2{guess.u0, features::build_basis(2, 2)};
  const auto reg = registration_problem(scaled.cloud.values, model2);
  double worst_reg = 0.0;
  for (int t = 0; t < 10; ++t) {
    manifolds::ProductPoint x;
    x.factors = {manifolds::random_rotation(2, t % 2 == 0 ? 1 : -1, rng),
                 manifolds::EuclideanPoint{gaussian(2, 1)}};
    worst_reg = std::max(worst_reg, manifolds::check_gradient(reg, x, sub_seed(opts.seed, 730 + t)));
  }
  c.checks.push_back(bound_check("registration cost check_gradient (max of 10)", worst_reg, 1e-6));
  c.checks.push_back(bound_check("xx_hessian vs FD of gradient (relative, max of 10)", worst_hess, 1e-5));
  finish(c);
  return c;
}

// --------------------------------------------------------------- oracles

double naive_residual(const Eigen::MatrixXd& u, const features::MonomialBasis& basis, const Eigen::MatrixXd& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      double p = 0.0;
      for (Eigen::Index k = 0; k < basis.size(); ++k) {
        double mono = 1.0;
        const auto& e = basis.exponents[static_cast<std::size_t>(k)];
        for (std::size_t v = 0; v < e.size(); ++v) mono *= std::pow(x(static_cast<Eigen::Index>(v), i), e[v]);
        p += u(k, j) * mono;
      }
      total += p * p;
    }
  }
  return total;
}

CaseResult case_oracles(const BenchOptions& opts) {
  CaseResult c{"oracles", 8, false, {}, {}, 0.0};
  manifolds::Rng rng = synth::seeded_rng(opts.seed, 800);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gaussian = [&](Eigen::Index r, Eigen::Index k) {
    Eigen::MatrixXd m(r, k);
    for (Eigen::Index t = 0; t < m.size(); ++t) m.data()[t] = gauss(rng);
    return m;
  };

  // Rayleigh quotient on Grass(N, q) against the SVD.
  double worst_proj = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Eigen::Index big_n = 10, q = 3;
    const Eigen::MatrixXd a = gaussian(big_n, 30);
    const Eigen::MatrixXd aat = a * a.transpose();
    manifolds::TRProblem p;
    p.cost = [aat](const manifolds::ProductPoint& x) {
      const auto& u = manifolds::grassmann(x, 0);
      return (u.transpose() * aat * u).trace();
    };
    p.euclidean_gradient = [aat](const manifolds::ProductPoint& x) {
      return manifolds::Ambient{2.0 * aat * manifolds::grassmann(x, 0)};
    };
    p.euclidean_hessian = [aat](const manifolds::ProductPoint&, const manifolds::TangentVector& v) {
      return manifolds::Ambient{2.0 * aat * v.parts[0]};
    };
    manifolds::ProductPoint x0;
    x0.factors = {manifolds::random_grassmann(big_n, q, rng)};
    manifolds::TROptions tro;
    tro.gradient_tolerance = 1e-11;
    const auto sol = manifolds::tr_minimize(p, x0, tro);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU);
    const Eigen::MatrixXd ref = svd.matrixU().rightCols(q);
    worst_proj = std::max(worst_proj, manifolds::projector_distance(manifolds::grassmann(sol.point, 0), ref));
  }
  c.checks.push_back(bound_check("Grassmann Rayleigh vs SVD projector distance", worst_proj, 1e-8));

  // Procrustes exact recovery.
  double worst_recovery = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd q0 = manifolds::random_rotation(3, t % 2 == 0 ? 1 : -1, rng).matrix;
    const Eigen::VectorXd a0 = gaussian(3, 1);
    const PointCloud x(gaussian(3, 20));
    const PointCloud y((q0 * x.values).colwise() + a0);
    const RigidTransform tr = procrustes(x, y);
    worst_recovery = std::max({worst_recovery, (tr.rotation.matrix - q0).norm(), (tr.translation - a0).norm()});
  }
  c.checks.push_back(bound_check("Procrustes exact recovery error", worst_recovery, 1e-10));

  // 2D brute force over both components of O(2).
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 5; ++t) {
    const PointCloud x(gaussian(2, 15));
    const Eigen::MatrixXd q0 = manifolds::random_rotation(2, t % 2 == 0 ? 1 : -1, rng).matrix;
    const PointCloud y(((q0 * x.values).colwise() + Eigen::Vector2d(0.3, -0.7)) + 0.2 * gaussian(2, 15));
    const double closed = procrustes_cost(procrustes(x, y), x, y);
    double grid_min = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd xc = x.values.rowwise().mean();
    const Eigen::VectorXd yc = y.values.rowwise().mean();
    constexpr int kGrid = 10000;
    for (int branch : {1, -1}) {
      for (int g = 0; g < kGrid; ++g) {
        const double th = 2.0 * std::numbers::pi * g / kGrid;
        Eigen::Matrix2d q;
        q << std::cos(th), -branch * std::sin(th), std::sin(th), branch * std::cos(th);
        RigidTransform cand{manifolds::RotationPoint{q, branch}, yc - q * xc};
        grid_min = std::min(grid_min, procrustes_cost(cand, x, y));
      }
    }
    worst_gap = std::max(worst_gap, closed - grid_min);
  }
  c.checks.push_back(bound_check("Procrustes cost minus 2D grid minimum", worst_gap, 1e-8));

  // Residual against a naive double loop.
  std::uniform_int_distribution<int> pick_n(2, 3), pick_d(1, 3);
  double worst_res = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = pick_n(rng), d = pick_d(rng);
    const auto basis = features::build_basis(n, d);
    const int q = 1 + t % 3;
    const VarietyModel model{manifolds::random_grassmann(basis.size(), q, rng), basis};
    const Eigen::MatrixXd x = gaussian(n, 25);
    const double fast = residual(model, x);
    const double slow = naive_residual(model.subspace.basis, basis, x);
    worst_res = std::max(worst_res, std::abs(fast - slow) / std::max(1.0, std::abs(slow)));
  }
  c.checks.push_back(bound_check("residual vs naive double loop (relative, 100 instances)", worst_res, 1e-12));
  finish(c);
  return c;
}

// ----------------------------------------------------------- determinism

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext != ".json" && ext != ".csv") continue;
    files[std::filesystem::relative(entry.path(), dir).string()] = io::read_file(entry.path());
  }
  return files;
}

CaseResult case_determinism(const BenchOptions& opts) {
  CaseResult c{"determinism", 9, false, {}, {}, 0.0};
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() / ("variety_determinism_" + std::to_string(sub_seed(opts.seed, 900)) +
                                                "_" + std::to_string(std::random_device{}()));
  const std::string work = (root / "work").string();
  const std::string seed = std::to_string(opts.seed);
  const std::vector<std::vector<std::string>> commands{
      {"synth", "--gen", "circle", "--s", "150", "--sigma", "0.01", "--seed", seed, "--out", work + "/circle"},
      {"denoise", "--input", work + "/circle/cloud.csv", "--sigma", "0.01", "--sure", "--out", work + "/denoise"},
      {"sure", "--input", work + "/circle/cloud.csv", "--sigma", "0.01", "--sweep", "--out", work + "/sure"},
      {"synth", "--gen", "parabola", "--pair", "--overlap", "partial", "--s", "200", "--sigma", "0.01", "--seed",
       seed, "--out", work + "/pair"},
      {"register", "--source", work + "/pair/source.csv", "--target", work + "/pair/target.csv", "--seed", seed,
       "--out", work + "/register"},
  };
  std::vector<std::map<std::string, std::string>> runs;
  bool commands_ok = true;
  for (int run = 0; run < 2; ++run) {
    std::filesystem::remove_all(work);
    for (const auto& cmd : commands) {
      std::ostringstream out, err;
      if (cli::run(cmd, out, err) != cli::kOk) {
        commands_ok = false;
        c.details["failed_command"] = cmd;
        c.details["stderr"] = err.str();
      }
    }
    runs.push_back(snapshot(work));
  }
  std::filesystem::remove_all(root);

  int differing = 0;
  json files = json::array();
  for (const auto& [name, content] : runs[0]) {
    const auto it = runs[1].find(name);
    const bool same = it != runs[1].end() && it->second == content;
    differing += same ? 0 : 1;
    files.push_back(json{{"file", name}, {"identical", same}});
  }
  if (runs[0].size() != runs[1].size()) ++differing;
  c.checks.push_back(Check{"seeded commands succeeded", commands_ok ? 1.0 : 0.0, 1.0, "== 1", commands_ok});
  c.checks.push_back(Check{"files differing between two runs", static_cast<double>(differing), 0.0, "== 0",
                           differing == 0 && !runs[0].empty()});
  c.details["files"] = std::move(files);
  finish(c);
  return c;
}

using CaseFn = CaseResult (*)(const BenchOptions&);

const std::vector<std::pair<std::string, CaseFn>>& registry() {
  static const std::vector<std::pair<std::string, CaseFn>> r{
      {"circle", case_circle},         {"lines", case_lines},           {"floor", case_floor},
      {"registration", case_registration}, {"unbiasedness", case_unbiasedness}, {"divergence", case_divergence},
      {"gradients", case_gradients},   {"oracles", case_oracles},         {"determinism", case_determinism},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

CaseResult run_case(const std::string& name, const BenchOptions& opts) {
  for (const auto& [n, fn] : registry()) {
    if (n == name) {
      const auto start = std::chrono::steady_clock::now();
      CaseResult r = fn(opts);
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return r;
    }
  }
  throw InvalidArgument("unknown bench case '" + name + "'");
}

std::vector<CaseResult> run_cases(const std::vector<std::string>& names, const BenchOptions& opts) {
  std::vector<std::string> expanded;
  for (const auto& n : names) {
    if (n == "all") {
      expanded.insert(expanded.end(), case_names().begin(), case_names().end());
    } else {
      if (std::find(case_names().begin(), case_names().end(), n) == case_names().end()) {
        throw InvalidArgument("unknown bench case '" + n + "'");
      }
      expanded.push_back(n);
    }
  }
  std::vector<CaseResult> out;
  for (const auto& n : expanded) out.push_back(run_case(n, opts));
  return out;
}

json report_json(const std::vector<CaseResult>& results) {
  json cases = json::array();
  bool all = true;
  for (const auto& r : results) {
    json checks = json::array();
    for (const auto& k : r.checks) {
      const bool timing = k.label.rfind(kTimingPrefix, 0) == 0;
      checks.push_back(json{{"label", k.label},
                            {"measured", timing ? json(nullptr) : json(k.measured)},
                            {"reference", k.reference},
                            {"rule", k.rule},
                            {"pass", k.pass}});
    }
    cases.push_back(json{{"name", r.name},
                         {"criterion", r.criterion},
                         {"pass", r.pass},
                         {"checks", std::move(checks)},
                         {"details", r.details}});
    all = all && r.pass;
  }
  return json{{"schema_version", io::kSchemaVersion}, {"pass", all}, {"cases", std::move(cases)}};
}

std::string report_table(const std::vector<CaseResult>& results) {
  std::size_t label_width = 5;
  for (const auto& r : results) {
    for (const auto& k : r.checks) label_width = std::max(label_width, k.label.size());
  }
  const int lw = static_cast<int>(label_width) + 2;
  std::ostringstream out;
  out << std::left << std::setw(14) << "case" << std::setw(lw) << "check" << std::setw(12) << "measured"
      << std::setw(12) << "reference" << std::setw(20) << "rule" << "status\n";
  for (const auto& r : results) {
    for (const auto& k : r.checks) {
      out << std::left << std::setw(14) << r.name << std::setw(lw) << k.label << std::setw(12) << sci(k.measured)
          << std::setw(12) << sci(k.reference) << std::setw(20) << k.rule << (k.pass ? "PASS" : "FAIL") << "\n";
    }
    out << std::left << std::setw(14) << r.name << "-> " << (r.pass ? "PASS" : "FAIL") << " (" << std::fixed
        << std::setprecision(1) << r.seconds << " s)\n"
        << std::defaultfloat;
  }
  return out.str();
}

}  // namespace variety::bench
