// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "lrno/bounds.hpp"
#include "lrno/cli.hpp"
#include "lrno/io.hpp"
#include "lrno/rng.hpp"
#include "lrno/verify.hpp"

namespace fs = std::filesystem;
using namespace lrno;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != cli::kOk) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    throw std::runtime_error("lrno " + joined + "exited " + std::to_string(code) + ": " + err.str());
  }
}

// ------------------------------------------------------------ 1

double fd_grad_error(const Objective& obj, const Factor& x) {
  const Factor g = factored_grad(obj, x);
  Factor fd(x.rows(), x.cols());
  const double h = 1e-6;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      Factor xp = x, xm = x;
      xp(i, j) += h;
      xm(i, j) -= h;
      fd(i, j) = (factored_value(obj, xp) - factored_value(obj, xm)) / (2 * h);
    }
  }
  return (g - fd).norm() / std::max(1.0, g.norm());
}

double fd_hess_error(const Objective& obj, const Factor& x, const Factor& u) {
  const double h = 1e-4;
  const double fd =
      (factored_value(obj, x + h * u) - 2 * factored_value(obj, x) + factored_value(obj, x - h * u)) / (h * h);
  const double an = factored_hess_form(obj, x, u);
  return std::abs(an - fd) / std::max(1.0, std::abs(an));
}

Outcome derivatives() {
  Rng rng(101, "derivatives");
  std::vector<std::pair<std::string, ObjectivePtr>> objs;
  {
    std::vector<SymMatrix> mats;
    for (int i = 0; i < 20; ++i) mats.emplace_back(rng.normal_matrix(6, 6));
    auto op = std::make_shared<MeasurementOperator>(mats);
    Vector b(20);
    for (Index i = 0; i < 20; ++i) b(i) = rng.normal();
    objs.emplace_back("sensing", sensing_objective(op, b));
  }
  {
    Matrix y(6, 6);
    for (Index i = 0; i < 6; ++i) {
      for (Index j = 0; j < 6; ++j) y(i, j) = rng.uniform();
    }
    objs.emplace_back("one-bit", one_bit_objective(0.5 * (y + y.transpose()), 0.05 * rng.normal_matrix(6, 6)));
  }
  {
    std::vector<Matrix> mats;
    for (int i = 0; i < 12; ++i) mats.push_back(rng.normal_matrix(4, 3));
    Vector b(12);
    for (Index i = 0; i < 12; ++i) b(i) = rng.normal();
    objs.emplace_back("lift", asymmetric_lift(std::make_shared<RectSensingObjective>(mats, b), 0.5));
  }
  bool ok = true;
  std::string detail;
  for (const auto& [name, obj] : objs) {
    double g = 0.0, h = 0.0;
    for (int t = 0; t < 100; ++t) {
      const Factor x = rng.normal_matrix(obj->dim(), 2);
      const Factor u = rng.normal_matrix(obj->dim(), 2);
      g = std::max(g, fd_grad_error(*obj, x));
      h = std::max(h, fd_hess_error(*obj, x, u));
    }
    ok = ok && g <= 1e-5 && h <= 1e-4;
    detail += name + " grad " + fmt(g) + " hess " + fmt(h) + "; ";
  }
  return {ok, detail};
}

// ------------------------------------------------------------ 2

Outcome eckart_young() {
  Rng rng(102, "eckart_young");
  const MeasurementOperator iso = gen_certified_operator(4, 0.0, 5);
  auto op = std::make_shared<MeasurementOperator>(iso);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const Index r = 1 + t % 3;
    const SymMatrix m(rng.normal_matrix(4, 4));
    const double proj = (project_psd_rank_r(m, r) - m).frobenius();
    // Isometric operator: 1/2 ||A(X X^T - M)||^2 = 1/2 ||X X^T - M||_F^2.
    const auto obj = sensing_objective(op, op->apply(m.mat()));
    GdConfig cfg;
    cfg.eta = 0.02;
    cfg.max_iters = 4000;
    cfg.grad_tol = 1e-10;
    cfg.record_every = cfg.max_iters;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 50; ++s) {
      const Trace tr = gradient_descent(*obj, random_init(4, r, 1.0, 1000 + t, s), cfg, m);
      if (tr.termination == Termination::diverged) continue;
      best = std::min(best, (SymMatrix::gram(tr.terminal) - m).frobenius());
    }
    worst = std::min(worst, best - proj);
  }
  return {worst >= -1e-6, "worst margin " + fmt(worst)};
}

// ------------------------------------------------------------ 3

Outcome rip_sandwich() {
  const Index n = 6, r = 2;
  bool ok = true;
  std::string detail;
  for (double delta : {0.0, 0.2, 0.42, 0.6}) {
    const MeasurementOperator op = gen_certified_operator(n, delta, 31);
    Rng rng(103, "probes");
    double slack = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10000; ++t) {
      const Matrix u = rng.normal_matrix(n, 2 * r);
      Vector s(2 * r);
      for (Index k = 0; k < s.size(); ++k) s(k) = rng.normal();
      SymMatrix z(u * s.asDiagonal() * u.transpose());
      z = z * (1.0 / z.frobenius());
      const double q = op.apply(z.mat()).squaredNorm();
      slack = std::min({slack, q - (1.0 - delta), (1.0 + delta) - q});
    }
    const RipEstimate est = estimate_rip(op, 2 * r, 64, 20, 7);
    const bool below = est.delta_hat <= delta + 1e-10;
    ok = ok && slack >= -1e-8 && below;
    detail += "delta " + fmt(delta) + " slack " + fmt(slack) + " est " + fmt(est.delta_hat) + "; ";
  }
  return {ok, detail};
}

// ------------------------------------------------------------ 4-7, 10

struct Pipeline {
  Instance inst;
  std::vector<CriticalPoint> points;
};

// gen + solve through the CLI; outputs land in dir.
Pipeline pipeline(const fs::path& dir, double delta, double sigma, std::uint64_t seed, int threads) {
  const std::string inst = (dir / "instance.json").string();
  run_cli({"gen", "--n", "12", "--r", "2", "--certified-delta", format_double(delta), "--sigma", format_double(sigma),
           "--seed", std::to_string(seed), "--out", inst});
  run_cli({"solve", "--instance", inst, "--starts", "50", "--eta", "0.01", "--max-iters", "20000", "--tol", "1e-10",
           "--seed", "1", "--record-every", "10", "--threads", std::to_string(threads), "--out-dir",
           (dir / "run").string()});
  Pipeline p;
  p.inst = load_instance(inst);
  const Json summary = load_json(dir / "run" / "summary.json");
  for (const auto& j : summary.at("points")) {
    p.points.push_back(point_from_json(j, p.inst.n, p.inst.r));
  }
  return p;
}

int count_second(const std::vector<CriticalPoint>& pts) {
  return static_cast<int>(std::count_if(pts.begin(), pts.end(),
                                        [](const CriticalPoint& c) { return c.order == PointOrder::second; }));
}

Outcome noiseless(const Pipeline& p) {
  double worst = 0.0;
  for (const auto& c : p.points) {
    if (c.order == PointOrder::second) worst = std::max(worst, c.dist_to_mstar_fro);
  }
  const int second = count_second(p.points);
  return {second > 0 && worst <= 1e-5, std::to_string(second) + "/" + std::to_string(p.points.size()) +
                                           " second order, max distance " + fmt(worst)};
}

Outcome noisy(const Pipeline& p) {
  const VerifyReport rep = check_theorem1(p.inst, p.points);
  return {rep.pass && rep.summary["checked"].get<int>() > 0,
          std::to_string(rep.summary["checked"].get<int>()) + " checked, bound " +
              fmt(rep.summary["bound"].get<double>()) + ", worst slack " + fmt(rep.worst_slack)};
}

Outcome ring(const Pipeline& p) {
  const VerifyReport rep = check_theorem2(p.inst, p.points, 0.3);
  const int in_ring = rep.summary["ring"].get<int>();
  return {rep.pass && in_ring == 0,
          std::to_string(count_second(p.points)) + "/" + std::to_string(p.points.size()) + " second order, ring " + std::to_string(in_ring) + ", inner " +
              std::to_string(rep.summary["inner"].get<int>()) + ", outside " +
              std::to_string(rep.summary["outside"].get<int>()) + ", inner bound " +
              fmt(rep.summary["inner_bound"].get<double>()) + ", outer radius " +
              fmt(rep.summary["outer_radius"].get<double>())};
}

Outcome duality(const Pipeline& p) {
  const VerifyReport rep = check_weak_duality(p.inst, p.points);
  return {rep.pass && rep.summary["checked"].get<int>() > 0,
          std::to_string(rep.summary["checked"].get<int>()) + " checked, lower bound " +
              fmt(rep.summary["lower_bound"].get<double>()) + ", worst slack " + fmt(rep.worst_slack)};
}

Outcome terminal_eigen(const std::vector<const Pipeline*>& ps) {
  bool ok = true;
  int checked = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const Pipeline* p : ps) {
    const VerifyReport rep = check_terminal_eigen(p->inst, p->points);
    ok = ok && rep.pass;
    checked += rep.summary["checked"].get<int>();
    worst = std::min(worst, rep.worst_slack);
  }
  return {ok && checked > 0, std::to_string(checked) + " checked, worst slack " + fmt(worst)};
}

// ------------------------------------------------------------ 8

Outcome figure2(const fs::path& dir, int threads, bool& linear_ok, bool& plateau_ok) {
  run_cli({"fig2", "--out-dir", dir.string(), "--threads", std::to_string(threads)});
  const Json j = load_json(dir / "fig2.json");
  linear_ok = j["small_step_linear"].get<bool>();
  plateau_ok = j["large_step_plateau"].get<bool>();
  const Json& small = j["runs"][1];
  return {linear_ok && plateau_ok,
          "(a) small-step rate " + fmt(small["rate"].get<double>()) + " R^2 " +
              fmt(small["r_squared"].get<double>()) + (linear_ok ? " ok" : " FAIL") + "; (b) plateau ratio " +
              fmt(j["plateau_ratio"].get<double>()) + " (need <= 0.5)" + (plateau_ok ? " ok" : " FAIL")};
}

// ------------------------------------------------------------ 9

Outcome contours(int threads) {
  bounds::ContourConfig base;
  base.sigma = 0.05;
  base.m = 1600;
  base.lambda1 = 1.5;
  base.lambda_r = 1.0;
  base.xi_in_lambda_r = true;
  base.xi_grid = bounds::linspace(1.0, 200.0, 40);
  base.p_grid = bounds::linspace(0.05, 0.95, 19);
  const std::size_t nx = base.xi_grid.size();
  int violations = 0, feasible = 0;
  auto monotone = [&](const std::vector<bounds::ContourCell>& cells) {
    for (std::size_t pi = 0; pi < base.p_grid.size(); ++pi) {
      for (std::size_t xi = 0; xi < nx; ++xi) {
        const auto& c = cells[pi * nx + xi];
        feasible += c.delta.has_value();
        if (xi + 1 < nx) {
          const auto& right = cells[pi * nx + xi + 1];
          if (c.delta && !(right.delta && *right.delta >= *c.delta)) ++violations;
        }
        if (pi + 1 < base.p_grid.size()) {
          const auto& up = cells[(pi + 1) * nx + xi];
          if (up.delta && !(c.delta && *c.delta >= *up.delta)) ++violations;
        }
      }
    }
  };
  monotone(bounds::contour_grid(base, threads));
  std::vector<std::vector<bounds::ContourCell>> local;
  for (double tau : {0.1, 0.5, 0.9}) {
    bounds::ContourConfig cfg = base;
    cfg.theorem = bounds::Theorem::local;
    cfg.tau = tau;
    local.push_back(bounds::contour_grid(cfg, threads));
    monotone(local.back());
  }
  int common = 0, order_violations = 0;
  for (std::size_t k = 0; k < local[0].size(); ++k) {
    for (std::size_t a = 0; a + 1 < local.size(); ++a) {
      const auto& small = local[a][k];
      const auto& large = local[a + 1][k];
      if (!small.delta || !large.delta) continue;
      ++common;
      if (*small.delta < *large.delta) ++order_violations;
    }
  }
  return {violations == 0 && order_violations == 0 && common > 0,
          std::to_string(feasible) + " feasible cells, " + std::to_string(violations) + " monotonicity violations, " +
              std::to_string(common) + " cross-tau pairs, " + std::to_string(order_violations) + " ordering violations"};
}

// ------------------------------------------------------------ 11

Outcome saddle_escape() {
  InstanceConfig cfg;
  cfg.n = 8;
  cfg.r = 1;
  cfg.lambda1 = 1.0;
  cfg.lambda_r = 1.0;
  cfg.certified_delta = 0.2;
  cfg.sigma = 0.01;
  cfg.seed = 21;
  const Instance inst = generate_instance(cfg);
  const auto obj = inst.objective();
  const Factor zero = Factor::Zero(8, 1);
  const double eta = 0.01;

  GdConfig gd;
  gd.eta = eta;
  gd.grad_tol = 1e-10;
  gd.max_iters = 1000;
  const Trace vanilla = gradient_descent(*obj, zero, gd, inst.m_star);
  bool stays = vanilla.terminal.norm() == 0.0;
  double max_grad = 0.0;
  Factor x = zero;
  for (int t = 0; t < 1000; ++t) {
    const Factor g = factored_grad(*obj, x);
    max_grad = std::max(max_grad, g.norm());
    x -= eta * g;
  }
  stays = stays && max_grad <= 1e-14 && x.norm() == 0.0;

  gd.max_iters = 20000;
  const PerturbConfig pc = default_perturb_config(gd, 8, 1, 3);
  const Trace escaped = perturbed_gd(*obj, zero, pc, inst.m_star);
  const CriticalPoint cp = classify_point(*obj, escaped.terminal, 1e-8, 1e-6, inst.m_star);
  const VerifyReport rep = check_theorem1(inst, {cp});
  const bool ok = stays && cp.order == PointOrder::second && rep.pass;
  return {ok, "vanilla max grad " + fmt(max_grad) + ", perturbed " + std::to_string(escaped.perturbations) +
                  " perturbation(s), order " + to_string(cp.order) + ", distance " + fmt(cp.dist_to_mstar_fro) +
                  " vs bound " + fmt(rep.summary["bound"].get<double>())};
}

// ------------------------------------------------------------ 12

Outcome tail_coverage() {
  const Index m = 200;
  const double sigma = 0.05;
  bool ok = true;
  std::string detail;
  for (double p : {0.5, 0.9, 0.99}) {
    const double eps = noise_tail_epsilon(p, m, sigma);
    int hits = 0;
    for (int t = 0; t < 2000; ++t) hits += sample_noise(m, sigma, NoiseFamily::gaussian, 5000 + t).q <= eps;
    const double freq = hits / 2000.0;
    const double floor = p - 3.0 * std::sqrt(p * (1 - p) / 2000.0);
    ok = ok && freq > floor;
    detail += "p " + fmt(p) + " freq " + fmt(freq) + "; ";
  }
  return {ok, detail};
}

// ------------------------------------------------------------ 13

std::vector<std::pair<std::string, std::string>> csv_hashes(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out.emplace_back(fs::relative(e.path(), dir).string(), file_hash(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int threads = 4;
  std::string workdir = "acceptance_out";
  std::vector<int> known_fail;
  std::vector<int> only;
  app.add_option("--threads", threads)->capture_default_str();
  app.add_option("--workdir", workdir)->capture_default_str();
  app.add_option("--known-fail", known_fail, "criteria whose failure is documented; reported but not fatal");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(workdir);
  fs::remove_all(root);
  fs::create_directories(root);
  const std::set<int> allowed(known_fail.begin(), known_fail.end());
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int id) { return selected.empty() || selected.count(id) > 0; };
  int unexpected = 0;

  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    if (!wanted(id)) return;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool known = !o.pass && allowed.count(id) > 0;
    if (!o.pass && !known) ++unexpected;
    std::printf("criterion %2d: %s%s  %s  [%s] (%.1fs)\n", id, o.pass ? "PASS" : "FAIL", known ? " (known)" : "",
                name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "derivative correctness", derivatives);
  report(2, "Eckart-Young oracle", eckart_young);
  report(3, "certified RIP sandwich", rip_sandwich);

  std::optional<Pipeline> p4, p5, p6;
  auto need = [&](std::optional<Pipeline>& p, const char* name, double delta, double sigma,
                  std::uint64_t seed) -> const Pipeline& {
    if (!p) p = pipeline(root / name / "seq", delta, sigma, seed, 1);
    return *p;
  };
  auto need4 = [&]() -> const Pipeline& { return need(p4, "noiseless", 0.2, 0.0, 11); };
  auto need5 = [&]() -> const Pipeline& { return need(p5, "noisy", 0.2, 0.05, 11); };
  auto need6 = [&]() -> const Pipeline& { return need(p6, "ring", 0.6, 0.02, 13); };
  report(4, "noiseless second-order points recover the ground truth", [&] { return noiseless(need4()); });
  report(5, "noisy second-order points within the global bound", [&] { return noisy(need5()); });
  report(6, "no second-order points in the local ring", [&] { return ring(need6()); });
  report(7, "weak-duality chain", [&] { return duality(need6()); });

  bool fig_linear = false, fig_plateau = false;
  report(8, "step-size comparison (linear rate and plateau)",
         [&] { return figure2(root / "fig2" / "seq", 1, fig_linear, fig_plateau); });
  report(9, "contour monotonicity and tau ordering", [&] { return contours(threads); });
  report(10, "terminal eigenvalue inequality", [&] { return terminal_eigen({&need4(), &need5(), &need6()}); });
  report(11, "saddle escape from the origin", saddle_escape);
  report(12, "tail-bound coverage", tail_coverage);
  report(13, "bitwise determinism of CSV outputs", [&]() -> Outcome {
    need4();
    need5();
    if (!fs::exists(root / "fig2" / "seq" / "fig2.json")) {
      run_cli({"fig2", "--out-dir", (root / "fig2" / "seq").string(), "--threads", "1"});
    }
    int files = 0, mismatches = 0;
    auto compare = [&](const fs::path& a, const fs::path& b) {
      const auto ha = csv_hashes(a), hb = csv_hashes(b);
      files += static_cast<int>(ha.size());
      if (ha != hb || ha.empty()) ++mismatches;
    };
    for (const char* name : {"noiseless", "noisy"}) {
      const double sigma = std::string(name) == "noisy" ? 0.05 : 0.0;
      pipeline(root / name / "seq2", 0.2, sigma, 11, 1);
      pipeline(root / name / "par", 0.2, sigma, 11, threads);
      compare(root / name / "seq", root / name / "seq2");
      compare(root / name / "seq", root / name / "par");
    }
    run_cli({"fig2", "--out-dir", (root / "fig2" / "seq2").string(), "--threads", "1"});
    run_cli({"fig2", "--out-dir", (root / "fig2" / "par").string(), "--threads", std::to_string(threads)});
    compare(root / "fig2" / "seq", root / "fig2" / "seq2");
    compare(root / "fig2" / "seq", root / "fig2" / "par");
    return {mismatches == 0, std::to_string(files) + " CSV files compared across 6 reruns, " +
                                 std::to_string(mismatches) + " mismatching sets"};
  });

  if (unexpected > 0) {
    std::printf("%d unexpected failure(s)\n", unexpected);
    return 1;
  }
  return 0;
}
