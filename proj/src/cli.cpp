#include "lrno/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "lrno/bounds.hpp"
#include "lrno/io.hpp"
#include "lrno/parallel.hpp"
#include "lrno/svg.hpp"

namespace fs = std::filesystem;

namespace lrno::cli {

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct VerifyFailure {};

// Output files and metadata collected while a command runs.
struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  Json seeds = Json::object();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
};

void write_output(Manifest& man, const fs::path& path, const std::string& text) {
  write_text(path, text);
  man.outputs.push_back(path);
}

void write_manifest(const Manifest& man, const fs::path& path, double seconds) {
  Json files_in = Json::array();
  for (const auto& p : man.inputs) files_in.push_back({{"path", p.string()}, {"hash", file_hash(p)}});
  Json files_out = Json::array();
  for (const auto& p : man.outputs) files_out.push_back({{"path", p.string()}, {"hash", file_hash(p)}});
  const Json j{{"command", man.command}, {"argv", man.argv},     {"config", man.config},
               {"seeds", man.seeds},     {"inputs", files_in},   {"outputs", files_out},
               {"wall_clock_seconds", seconds}};
  write_text(path, j.dump(2) + "\n");
}

// Appends every --config key not already present on the command line, so
// explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config_path) return out;
  const Json cfg = load_json(*config_path);
  if (!cfg.is_object()) throw UsageError("--config file must hold a JSON object");
  auto present = [&](const std::string& flag) {
    return std::any_of(out.begin(), out.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  for (const auto& [key, value] : cfg.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    const std::string flag = "--" + name;
    if (present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_number_integer()) {
      out.push_back(flag);
      out.push_back(std::to_string(value.get<long long>()));
    } else if (value.is_number()) {
      out.push_back(flag);
      out.push_back(format_double(value.get<double>()));
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (!value.is_null()) {
      throw UsageError("--config key '" + key + "' must be a scalar");
    }
  }
  return out;
}

std::string joined(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// ---------------------------------------------------------------- gen

struct GenOpts {
  long n = 8;
  long r = 2;
  std::optional<long> m;
  double sigma = 0.0;
  std::uint64_t seed = 1;
  std::string family = "gaussian";
  double lambda1 = 1.5;
  double lambda_r = 1.0;
  std::optional<double> certified_delta;
  int rip_samples = 64;
  int rip_refine = 20;
  std::string out;
};

void add_gen(CLI::App& app, GenOpts& o) {
  app.add_option("--n", o.n, "matrix dimension")->capture_default_str();
  app.add_option("--r", o.r, "rank of the ground truth")->capture_default_str();
  app.add_option("--m", o.m, "number of measurements (default 50 n r; n(n+1)/2 when certified)");
  app.add_option("--sigma", o.sigma, "noise level")->capture_default_str();
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--family", o.family, "gaussian | uniform | rademacher")->capture_default_str();
  app.add_option("--lambda1", o.lambda1)->capture_default_str();
  app.add_option("--lambda-r", o.lambda_r)->capture_default_str();
  app.add_option("--certified-delta", o.certified_delta, "build an operator with this certified RIP constant");
  app.add_option("--rip-samples", o.rip_samples)->capture_default_str();
  app.add_option("--rip-refine", o.rip_refine)->capture_default_str();
  app.add_option("--out", o.out, "instance JSON path")->required();
}

int cmd_gen(const GenOpts& o, Manifest& man, std::ostream& out) {
  if (o.n < 1 || o.r < 1 || o.r > o.n) throw UsageError("need 1 <= r <= n");
  if (o.m && *o.m < 1) throw UsageError("--m must be positive");
  if (o.sigma < 0.0) throw UsageError("--sigma must be nonnegative");
  if (o.certified_delta && !(*o.certified_delta >= 0.0 && *o.certified_delta < 1.0)) {
    throw UsageError("--certified-delta must lie in [0, 1)");
  }
  InstanceConfig cfg;
  cfg.n = o.n;
  cfg.r = o.r;
  if (o.m) cfg.m = *o.m;
  cfg.sigma = o.sigma;
  cfg.family = parse_noise_family(o.family);
  cfg.seed = o.seed;
  cfg.lambda1 = o.lambda1;
  cfg.lambda_r = o.lambda_r;
  cfg.certified_delta = o.certified_delta;
  cfg.rip_samples = o.rip_samples;
  cfg.rip_refine = o.rip_refine;
  const Instance inst = generate_instance(cfg);
  save_instance(inst, o.out);
  man.outputs.push_back(o.out);
  man.seeds = {{"seed", o.seed}};
  man.config = {{"n", o.n},           {"r", o.r},           {"m", inst.m},
                {"sigma", o.sigma},   {"family", o.family}, {"lambda1", o.lambda1},
                {"lambda_r", o.lambda_r}, {"certified_delta", opt_json(o.certified_delta)},
                {"rip_samples", o.rip_samples}, {"rip_refine", o.rip_refine}};
  out << "instance " << o.out << "\n"
      << "m " << inst.m << "\n"
      << "delta_hat " << format_double(inst.meta.delta_hat) << "\n";
  if (inst.meta.delta_certified) out << "delta_certified " << format_double(*inst.meta.delta_certified) << "\n";
  out << "zeta1 " << format_double(inst.op->zeta1()) << "\n"
      << "rho " << format_double(inst.op->rho()) << "\n"
      << "noise_norm " << format_double(inst.noise.q) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- solve

struct SolveOpts {
  std::string instance;
  double eta = 1e-3;
  long max_iters = 10000;
  double tol = 1e-8;
  double tol_hess = 1e-6;
  int starts = 1;
  std::uint64_t seed = 0;
  std::optional<double> init_scale;
  bool perturbed = false;
  std::string reference = "mstar";
  long record_every = 1;
  long mw_iters = 200000;
  std::string out_dir;
  int threads = 1;
};

void add_solve(CLI::App& app, SolveOpts& o) {
  app.add_option("--instance", o.instance)->required();
  app.add_option("--eta", o.eta)->capture_default_str();
  app.add_option("--max-iters", o.max_iters)->capture_default_str();
  app.add_option("--tol", o.tol, "gradient tolerance")->capture_default_str();
  app.add_option("--tol-hess", o.tol_hess)->capture_default_str();
  app.add_option("--starts", o.starts)->capture_default_str();
  app.add_option("--seed", o.seed)->capture_default_str();
  app.add_option("--init-scale", o.init_scale, "entry standard deviation (default sqrt(lambda1/r))");
  app.add_flag("--perturbed", o.perturbed, "use perturbed gradient descent");
  app.add_option("--reference", o.reference, "mw | mstar")->capture_default_str();
  app.add_option("--record-every", o.record_every)->capture_default_str();
  app.add_option("--mw-iters", o.mw_iters, "iteration cap for the M^w reference run")->capture_default_str();
  app.add_option("--out-dir", o.out_dir)->required();
  app.add_option("--threads", o.threads)->capture_default_str();
}

std::string trace_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trace_%03zu.csv", i);
  return buf;
}

int cmd_solve(const SolveOpts& o, Manifest& man, std::ostream& out, std::ostream& err) {
  if (o.reference != "mw" && o.reference != "mstar") throw UsageError("--reference must be mw or mstar");
  if (o.starts < 1) throw UsageError("--starts must be >= 1");
  if (!(o.eta > 0.0)) throw UsageError("--eta must be positive");
  if (!(o.tol > 0.0)) throw UsageError("--tol must be positive");
  if (o.record_every < 1) throw UsageError("--record-every must be >= 1");
  const Instance inst = load_instance(o.instance);
  man.inputs.push_back(o.instance);
  const auto obj = inst.objective();

  std::optional<MwResult> mw;
  const Index d = inst.n * (inst.n + 1) / 2;
  if (o.reference == "mw" || inst.m >= d) mw = compute_mw(inst, o.mw_iters);
  const SymMatrix reference = o.reference == "mw" ? mw->mw : inst.m_star;

  const double delta = inst.meta.delta_certified.value_or(inst.meta.delta_hat);
  if (mw && delta < 1.0 && inst.noise.q < 1.0 - delta) {
    const double step = bounds::max_step(inst.op->rho(), inst.r, delta, 0.0, inst.noise.q, mw->mw.frobenius());
    if (o.eta > step) {
      err << "warning: eta " << format_double(o.eta) << " exceeds the linear-convergence step bound "
          << format_double(step) << "\n";
    }
  }

  MultiStartConfig ms;
  ms.starts = o.starts;
  ms.init_scale = o.init_scale.value_or(default_init_scale(inst));
  ms.seed = o.seed;
  ms.gd.eta = o.eta;
  ms.gd.max_iters = o.max_iters;
  ms.gd.grad_tol = o.tol;
  ms.gd.record_every = o.record_every;
  ms.tol_hess = o.tol_hess;
  ms.threads = o.threads;
  ms.perturbed = o.perturbed;
  std::vector<Trace> traces;
  const auto points = multi_start(*obj, inst.r, ms, reference, inst.m_star, &traces);

  const fs::path dir(o.out_dir);
  Json pts = Json::array();
  int second = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    write_output(man, dir / trace_name(i), trace_csv(traces[i]));
    Json p = point_to_json(points[i]);
    p["start"] = i;
    p["iterations"] = traces[i].iterations;
    p["perturbations"] = traces[i].perturbations;
    p["trace"] = trace_name(i);
    pts.push_back(p);
    if (points[i].order == PointOrder::second) ++second;
  }
  const Json summary{{"instance", o.instance},
                     {"instance_fingerprint", inst.fingerprint()},
                     {"n", inst.n},
                     {"r", inst.r},
                     {"eta", o.eta},
                     {"seed", o.seed},
                     {"init_scale", ms.init_scale},
                     {"perturbed", o.perturbed},
                     {"reference", o.reference},
                     {"tol", o.tol},
                     {"tol_hess", o.tol_hess},
                     {"points", pts}};
  write_output(man, dir / "summary.json", summary.dump(2) + "\n");
  man.seeds = {{"seed", o.seed}, {"instance_seed", inst.meta.seed}};
  man.config = {{"eta", o.eta},         {"max_iters", o.max_iters}, {"tol", o.tol},
                {"tol_hess", o.tol_hess}, {"starts", o.starts},     {"init_scale", ms.init_scale},
                {"perturbed", o.perturbed}, {"reference", o.reference}, {"record_every", o.record_every},
                {"mw_iters", o.mw_iters}};
  out << "starts " << points.size() << "\nsecond_order " << second << "\nsummary " << (dir / "summary.json").string()
      << "\n";
  return kOk;
}

// ---------------------------------------------------------------- bounds

struct BoundsOpts {
  std::string theorem = "global";
  std::optional<double> delta;
  double zeta1 = 1.0;
  double zeta2 = 0.0;
  std::optional<double> epsilon;
  std::optional<double> p;
  long m = 1600;
  double sigma = 0.05;
  double tau = 0.5;
  double lambda1 = 1.5;
  double lambda_r = 1.0;
  std::optional<double> xi;
  double sigma_r_mw = 1.0;
  double d_r = 0.0;
  double rho = 1.0;
  long r = 1;
  double mw_frob = 1.0;
  double alpha = 0.1;
  double sigma_r = 1.0;
  std::string out;
};

void add_bounds(CLI::App& app, BoundsOpts& o) {
  app.add_option("--theorem", o.theorem, "global | local | radius | step | saddle")->capture_default_str();
  app.add_option("--delta", o.delta, "RIP constant");
  app.add_option("--zeta1", o.zeta1)->capture_default_str();
  app.add_option("--zeta2", o.zeta2)->capture_default_str();
  app.add_option("--epsilon", o.epsilon, "noise level bound ||w|| <= epsilon");
  app.add_option("--p", o.p, "probability; sets epsilon from the sub-Gaussian tail bound");
  app.add_option("--m", o.m)->capture_default_str();
  app.add_option("--sigma", o.sigma)->capture_default_str();
  app.add_option("--tau", o.tau)->capture_default_str();
  app.add_option("--lambda1", o.lambda1)->capture_default_str();
  app.add_option("--lambda-r", o.lambda_r)->capture_default_str();
  app.add_option("--xi", o.xi, "target distance; reports the largest admissible delta instead");
  app.add_option("--sigma-r-mw", o.sigma_r_mw)->capture_default_str();
  app.add_option("--d-r", o.d_r)->capture_default_str();
  app.add_option("--rho", o.rho)->capture_default_str();
  app.add_option("--r", o.r)->capture_default_str();
  app.add_option("--mw-frob", o.mw_frob)->capture_default_str();
  app.add_option("--alpha", o.alpha)->capture_default_str();
  app.add_option("--sigma-r", o.sigma_r, "sigma_r(M*)")->capture_default_str();
  app.add_option("--out", o.out, "also write the result JSON here");
}

int cmd_bounds(const BoundsOpts& o, Manifest& man, std::ostream& out) {
  if (o.epsilon && o.p) throw UsageError("give either --epsilon or --p, not both");
  double eps = 0.0;
  if (o.epsilon) eps = *o.epsilon;
  if (o.p) eps = noise_tail_epsilon(*o.p, o.m, o.sigma);
  Json res{{"theorem", o.theorem}, {"epsilon", eps}, {"zeta1", o.zeta1}, {"zeta2", o.zeta2}};
  if (o.p) res["p"] = *o.p;

  auto need_delta = [&]() {
    if (!o.delta) throw UsageError("--theorem " + o.theorem + " needs --delta");
    return *o.delta;
  };
  Json hyp = Json::array();
  auto check = [&](const std::string& name, bool ok) {
    hyp.push_back({{"hypothesis", name}, {"ok", ok}});
    return ok;
  };
  bool ok = true;
  if (o.theorem == "global") {
    if (o.xi) {
      const auto cap = bounds::max_delta_global(*o.xi, eps, o.zeta1, o.zeta2);
      res["xi"] = *o.xi;
      res["max_delta"] = opt_json(cap.delta);
      res["binding"] = bounds::to_string(cap.binding);
    } else {
      const double delta = need_delta();
      ok &= check("0 <= delta < 1/3", delta >= 0.0 && delta < 1.0 / 3.0);
      ok &= check("zeta2 eps < 1/3 - delta", o.zeta2 * eps < 1.0 / 3.0 - delta);
      res["delta"] = delta;
      res["value"] = ok ? Json(bounds::global_bound(delta, o.zeta1, o.zeta2, eps)) : Json(nullptr);
    }
  } else if (o.theorem == "local") {
    res["tau"] = o.tau;
    if (o.xi) {
      const auto cap = bounds::max_delta_local(*o.xi, eps, o.zeta1, o.zeta2, o.tau, o.lambda1, o.lambda_r);
      res["xi"] = *o.xi;
      res["max_delta"] = opt_json(cap.delta);
      res["binding"] = bounds::to_string(cap.binding);
    } else {
      const double delta = need_delta();
      ok &= check("0 <= delta < 1", delta >= 0.0 && delta < 1.0);
      ok &= check("0 < tau < 1 - delta^2", o.tau > 0.0 && o.tau < 1.0 - delta * delta);
      ok &= check("zeta2 eps < sqrt(1 - tau) - delta", o.tau < 1.0 && o.zeta2 * eps < std::sqrt(1.0 - o.tau) - delta);
      res["delta"] = delta;
      res["outer_radius"] = o.tau * o.lambda_r;
      res["value"] = ok ? Json(bounds::local_bound(delta, o.zeta1, o.zeta2, eps, o.tau, o.lambda1, o.lambda_r))
                        : Json(nullptr);
    }
  } else if (o.theorem == "radius" || o.theorem == "step") {
    const double delta = need_delta();
    ok &= check("0 <= delta < 1", delta >= 0.0 && delta < 1.0);
    ok &= check("zeta2 eps < 1 - delta", o.zeta2 * eps < 1.0 - delta);
    res["delta"] = delta;
    if (o.theorem == "radius") {
      res["value"] = ok ? Json(bounds::convergence_radius(delta, o.zeta2, eps, o.sigma_r_mw, o.d_r)) : Json(nullptr);
    } else {
      res["value"] = ok ? Json(bounds::max_step(o.rho, o.r, delta, o.zeta2, eps, o.mw_frob)) : Json(nullptr);
    }
  } else if (o.theorem == "saddle") {
    const double delta = need_delta();
    ok &= check("0 <= delta < 1/3", delta >= 0.0 && delta < 1.0 / 3.0);
    res["delta"] = delta;
    res["alpha"] = o.alpha;
    if (ok) {
      res["zeta_alpha"] = bounds::zeta_alpha(o.zeta1, o.alpha, o.sigma_r);
      res["value"] = bounds::strict_saddle_noise_cap(delta, o.zeta1, o.zeta2, o.alpha, o.sigma_r);
    } else {
      res["value"] = nullptr;
    }
  } else {
    throw UsageError("--theorem must be global, local, radius, step or saddle");
  }
  res["hypotheses"] = hyp;
  out << res.dump(2) << "\n";
  if (!o.out.empty()) write_output(man, o.out, res.dump(2) + "\n");
  man.config = res;
  return ok ? kOk : kUsage;
}

// ---------------------------------------------------------------- contour

struct ContourOpts {
  std::string theorem = "global";
  double tau = 0.5;
  double zeta1 = 1.0;
  double zeta2 = 0.0;
  double sigma = 0.05;
  long m = 1600;
  double lambda1 = 1.5;
  double lambda_r = 1.0;
  double xi_min = 1.0;
  double xi_max = 200.0;
  int xi_count = 40;
  double p_min = 0.05;
  double p_max = 0.95;
  int p_count = 19;
  std::string xi_unit = "lambda_r";
  std::string out;
  std::string svg_path;
  int threads = 1;
};

void add_contour(CLI::App& app, ContourOpts& o) {
  app.add_option("--theorem", o.theorem, "global | local")->capture_default_str();
  app.add_option("--tau", o.tau)->capture_default_str();
  app.add_option("--zeta1", o.zeta1)->capture_default_str();
  app.add_option("--zeta2", o.zeta2)->capture_default_str();
  app.add_option("--sigma", o.sigma)->capture_default_str();
  app.add_option("--m", o.m)->capture_default_str();
  app.add_option("--lambda1", o.lambda1)->capture_default_str();
  app.add_option("--lambda-r", o.lambda_r)->capture_default_str();
  app.add_option("--xi-min", o.xi_min)->capture_default_str();
  app.add_option("--xi-max", o.xi_max)->capture_default_str();
  app.add_option("--xi-count", o.xi_count)->capture_default_str();
  app.add_option("--p-min", o.p_min)->capture_default_str();
  app.add_option("--p-max", o.p_max)->capture_default_str();
  app.add_option("--p-count", o.p_count)->capture_default_str();
  app.add_option("--xi-unit", o.xi_unit, "lambda_r | abs")->capture_default_str();
  app.add_option("--out", o.out, "contour CSV path")->required();
  app.add_option("--svg", o.svg_path, "also write a filled-contour SVG");
  app.add_option("--threads", o.threads)->capture_default_str();
}

int cmd_contour(const ContourOpts& o, Manifest& man, std::ostream& out) {
  bounds::ContourConfig cfg;
  if (o.theorem == "global") cfg.theorem = bounds::Theorem::global;
  else if (o.theorem == "local") cfg.theorem = bounds::Theorem::local;
  else throw UsageError("--theorem must be global or local");
  if (o.xi_unit != "lambda_r" && o.xi_unit != "abs") throw UsageError("--xi-unit must be lambda_r or abs");
  if (o.xi_count < 1 || o.p_count < 1) throw UsageError("grid counts must be >= 1");
  if (!(o.p_min >= 0.0 && o.p_max < 1.0 && o.p_min <= o.p_max)) throw UsageError("need 0 <= p-min <= p-max < 1");
  if (!(o.xi_min > 0.0 && o.xi_min <= o.xi_max)) throw UsageError("need 0 < xi-min <= xi-max");
  cfg.tau = o.tau;
  cfg.zeta1 = o.zeta1;
  cfg.zeta2 = o.zeta2;
  cfg.sigma = o.sigma;
  cfg.m = o.m;
  cfg.lambda1 = o.lambda1;
  cfg.lambda_r = o.lambda_r;
  cfg.xi_in_lambda_r = o.xi_unit == "lambda_r";
  cfg.xi_grid = bounds::linspace(o.xi_min, o.xi_max, o.xi_count);
  cfg.p_grid = bounds::linspace(o.p_min, o.p_max, o.p_count);
  const auto cells = bounds::contour_grid(cfg, o.threads);
  write_output(man, o.out, bounds::contour_csv(cells));
  if (!o.svg_path.empty()) {
    std::string title = o.theorem == "global" ? "Maximum delta, global bound"
                                              : "Maximum delta, local bound, tau = " + format_double(o.tau);
    const std::string xl = o.xi_unit == "lambda_r" ? "distance to ground truth (units of lambda_r)"
                                                   : "distance to ground truth";
    write_output(man, o.svg_path, svg::contour(cells, title, xl, "probability lower bound"));
  }
  int feasible = 0;
  for (const auto& c : cells) feasible += c.delta.has_value();
  man.config = {{"theorem", o.theorem}, {"tau", o.tau},       {"zeta1", o.zeta1},   {"zeta2", o.zeta2},
                {"sigma", o.sigma},     {"m", o.m},           {"lambda1", o.lambda1}, {"lambda_r", o.lambda_r},
                {"xi_min", o.xi_min},   {"xi_max", o.xi_max}, {"xi_count", o.xi_count}, {"p_min", o.p_min},
                {"p_max", o.p_max},     {"p_count", o.p_count}, {"xi_unit", o.xi_unit}};
  out << "cells " << cells.size() << "\nfeasible " << feasible << "\ncsv " << o.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOpts {
  std::string instance;
  std::string suite = "all";
  std::string points;
  std::string trace;
  double tau = 0.3;
  double alpha = 0.1;
  std::optional<double> bound_override;
  std::optional<double> radius;
  long mw_iters = 200000;
  std::string out;
};

void add_verify(CLI::App& app, VerifyOpts& o) {
  app.add_option("--instance", o.instance)->required();
  app.add_option("--suite", o.suite, "thm1 | thm2 | dual | eigen | pl | saddle | all")->capture_default_str();
  app.add_option("--points", o.points, "summary.json written by solve");
  app.add_option("--trace", o.trace, "trace CSV for the pl suite (reference mw)");
  app.add_option("--tau", o.tau)->capture_default_str();
  app.add_option("--alpha", o.alpha)->capture_default_str();
  app.add_option("--bound-override", o.bound_override, "replace the thm1 bound (negative control)");
  app.add_option("--radius", o.radius, "pl gate radius (default: convergence radius)");
  app.add_option("--mw-iters", o.mw_iters)->capture_default_str();
  app.add_option("--out", o.out, "report JSON path")->required();
}

struct LoadedPoints {
  std::vector<CriticalPoint> points;
  Json summary;
};

LoadedPoints load_points(const VerifyOpts& o, const Instance& inst, Manifest& man) {
  if (o.points.empty()) {
    throw UsageError("suite " + o.suite + " needs --points, the summary.json written by `lrno solve`");
  }
  if (!fs::exists(o.points)) throw IoError("missing " + o.points + "; run `lrno solve` first");
  LoadedPoints lp;
  lp.summary = load_json(o.points);
  man.inputs.push_back(o.points);
  if (lp.summary.value("n", -1L) != inst.n || lp.summary.value("r", -1L) != inst.r) {
    throw UsageError("points file dimensions do not match the instance");
  }
  for (const auto& p : lp.summary.at("points")) lp.points.push_back(point_from_json(p, inst.n, inst.r));
  return lp;
}

std::vector<Factor> saddle_probes(const Instance& inst, const LoadedPoints& lp) {
  std::vector<Factor> probes;
  probes.push_back(Factor::Zero(inst.n, inst.r));
  const std::uint64_t seed = lp.summary.value("seed", std::uint64_t{0});
  const double scale = lp.summary.value("init_scale", 1.0);
  for (std::size_t i = 0; i < lp.points.size(); ++i) {
    if (lp.points[i].diverged) continue;
    const Factor x0 = random_init(inst.n, inst.r, scale, seed, i);
    const Factor& x1 = lp.points[i].x;
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) probes.push_back((1.0 - t) * x0 + t * x1);
  }
  return probes;
}

VerifyReport pl_report(const VerifyOpts& o, const Instance& inst, Manifest& man) {
  if (o.trace.empty()) throw UsageError("suite pl needs --trace, a trace CSV from `lrno solve --reference mw`");
  if (!fs::exists(o.trace)) throw IoError("missing " + o.trace + "; run `lrno solve --reference mw` first");
  man.inputs.push_back(o.trace);
  Trace trace;
  trace.records = trace_records_from_csv(read_text(o.trace));
  const MwResult mw = compute_mw(inst, o.mw_iters);
  const auto obj = inst.objective();
  const double ref_value = obj->value(project_psd_rank_r(mw.mw, inst.r));
  double radius = 0.0;
  if (o.radius) {
    radius = *o.radius;
  } else {
    const double delta = inst.meta.delta_certified.value_or(inst.meta.delta_hat);
    const double sigma_r = std::max(eigh(mw.mw).values(inst.r - 1), 0.0);
    radius = bounds::convergence_radius(delta, obj->zeta2(), inst.noise.q, sigma_r, mw.d_r);
  }
  VerifyReport rep = check_pl_trajectory(trace, ref_value, radius);
  rep.fingerprint = inst.fingerprint();
  rep.summary["mw_unique"] = mw.unique;
  rep.summary["d_r"] = mw.d_r;
  return rep;
}

int cmd_verify(const VerifyOpts& o, Manifest& man, std::ostream& out) {
  static const std::vector<std::string> kSuites{"thm1", "thm2", "dual", "eigen", "pl", "saddle"};
  if (o.suite != "all" && std::find(kSuites.begin(), kSuites.end(), o.suite) == kSuites.end()) {
    throw UsageError("--suite must be one of thm1, thm2, dual, eigen, pl, saddle, all");
  }
  const Instance inst = load_instance(o.instance);
  man.inputs.push_back(o.instance);
  man.config = {{"suite", o.suite}, {"tau", o.tau}, {"alpha", o.alpha}, {"bound_override", opt_json(o.bound_override)}};

  Json result;
  bool pass = true;
  if (o.suite == "all") {
    Json reports = Json::array();
    Json skipped = Json::array();
    double worst = std::numeric_limits<double>::infinity();
    std::optional<LoadedPoints> lp;
    if (!o.points.empty()) lp = load_points(o, inst, man);
    const bool certified = inst.meta.delta_certified.has_value();
    auto add = [&](const VerifyReport& rep) {
      reports.push_back(report_to_json(rep));
      pass = pass && rep.pass;
      worst = std::min(worst, rep.worst_slack);
    };
    auto skip = [&](const char* suite, const char* why) { skipped.push_back({{"suite", suite}, {"reason", why}}); };
    if (lp && certified) {
      const double delta = *inst.meta.delta_certified;
      if (delta < 1.0 / 3.0) add(check_theorem1(inst, lp->points, o.bound_override));
      else skip("thm1", "certified delta >= 1/3");
      if (o.tau < 1.0 - delta * delta) add(check_theorem2(inst, lp->points, o.tau));
      else skip("thm2", "tau >= 1 - delta^2");
      add(check_weak_duality(inst, lp->points));
    } else {
      skip("thm1", lp ? "no certified delta" : "no --points");
      skip("thm2", lp ? "no certified delta" : "no --points");
      skip("dual", lp ? "no certified delta" : "no --points");
    }
    if (lp) add(check_terminal_eigen(inst, lp->points));
    else skip("eigen", "no --points");
    if (!o.trace.empty()) add(pl_report(o, inst, man));
    else skip("pl", "no --trace");
    if (lp && certified && *inst.meta.delta_certified < 1.0 / 3.0) {
      try {
        add(check_strict_saddle(inst, saddle_probes(inst, *lp), o.alpha));
      } catch (const DomainError& e) {
        skip("saddle", "noise above the guaranteed level");
      }
    } else {
      skip("saddle", "needs --points and a certified delta below 1/3");
    }
    if (reports.empty()) throw UsageError("no suite could run; pass --points from `lrno solve`");
    result = {{"suite", "all"},      {"instance_fingerprint", inst.fingerprint()},
              {"pass", pass},        {"worst_slack", std::isfinite(worst) ? worst : 0.0},
              {"reports", reports},  {"skipped", skipped}};
  } else {
    VerifyReport rep;
    if (o.suite == "pl") {
      rep = pl_report(o, inst, man);
    } else {
      const LoadedPoints lp = load_points(o, inst, man);
      if (o.suite == "thm1") rep = check_theorem1(inst, lp.points, o.bound_override);
      else if (o.suite == "thm2") rep = check_theorem2(inst, lp.points, o.tau);
      else if (o.suite == "dual") rep = check_weak_duality(inst, lp.points);
      else if (o.suite == "eigen") rep = check_terminal_eigen(inst, lp.points);
      else rep = check_strict_saddle(inst, saddle_probes(inst, lp), o.alpha);
    }
    result = report_to_json(rep);
    pass = rep.pass;
  }
  write_output(man, o.out, result.dump(2) + "\n");
  out << "suite " << o.suite << "\npass " << (pass ? "true" : "false") << "\nworst_slack "
      << format_double(result["worst_slack"].get<double>()) << "\nreport " << o.out << "\n";
  return pass ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------- fig2

struct Fig2Opts {
  Fig2Config cfg;
  std::string out_dir;
};

void add_fig2(CLI::App& app, Fig2Opts& o) {
  app.add_option("--seed", o.cfg.seed)->capture_default_str();
  app.add_option("--out-dir", o.out_dir)->required();
  app.add_option("--max-iters", o.cfg.max_iters)->capture_default_str();
  app.add_option("--mw-iters", o.cfg.mw_iters)->capture_default_str();
  app.add_option("--record-every", o.cfg.record_every)->capture_default_str();
  app.add_option("--window-start", o.cfg.window_start)->capture_default_str();
  app.add_option("--window-end", o.cfg.window_end)->capture_default_str();
  app.add_option("--threads", o.cfg.threads)->capture_default_str();
}

std::string eta_name(double eta) { return "trace_eta_" + format_double(eta) + ".csv"; }

int cmd_fig2(const Fig2Opts& o, Manifest& man, std::ostream& out) {
  const Fig2Result res = run_fig2(o.cfg);
  const fs::path dir(o.out_dir);
  save_instance(res.instance, dir / "instance.json");
  man.outputs.push_back(dir / "instance.json");
  std::vector<svg::Panel> panels;
  Json runs = Json::array();
  for (std::size_t k = 0; k < res.etas.size(); ++k) {
    write_output(man, dir / eta_name(res.etas[k]), trace_csv(res.traces[k]));
    svg::Series s{"distance to M^w", {}, {}};
    for (const auto& rec : res.traces[k].records) {
      s.x.push_back(static_cast<double>(rec.iter));
      s.y.push_back(rec.dist_ref_fro);
    }
    panels.push_back({"step size " + format_double(res.etas[k]), {s}});
    runs.push_back({{"eta", res.etas[k]},
                    {"trace", eta_name(res.etas[k])},
                    {"termination", to_string(res.traces[k].termination)},
                    {"rate", res.fits[k].rate},
                    {"r_squared", res.fits[k].r_squared},
                    {"final_distance", res.traces[k].records.back().dist_ref_fro}});
  }
  write_output(man, dir / "fig2.svg", svg::line_chart(panels, "iteration", "||X X^T - M^w||_F", true));
  const bool linear = res.fits[1].rate < 0.0 && res.fits[1].r_squared >= 0.9;
  const bool plateau = res.plateau_ratio <= 0.5;
  const Json summary{{"seed", o.cfg.seed},
                     {"window", {o.cfg.window_start, o.cfg.window_end}},
                     {"delta_hat", res.instance.meta.delta_hat},
                     {"rho", res.instance.op->rho()},
                     {"mw_unique", res.mw.unique},
                     {"mw_gd_iterations", res.mw.gd_iterations},
                     {"mw_gd_grad_norm", res.mw.gd_grad_norm},
                     {"d_r", res.mw.d_r},
                     {"runs", runs},
                     {"plateau_ratio", res.plateau_ratio},
                     {"small_step_linear", linear},
                     {"large_step_plateau", plateau}};
  write_output(man, dir / "fig2.json", summary.dump(2) + "\n");
  man.seeds = {{"seed", o.cfg.seed}};
  man.config = {{"max_iters", o.cfg.max_iters},       {"mw_iters", o.cfg.mw_iters},
                {"record_every", o.cfg.record_every}, {"window_start", o.cfg.window_start},
                {"window_end", o.cfg.window_end}};
  out << "small_step_rate " << format_double(res.fits[1].rate) << "\nsmall_step_r2 "
      << format_double(res.fits[1].r_squared) << "\nlarge_step_rate " << format_double(res.fits[0].rate)
      << "\nplateau_ratio " << format_double(res.plateau_ratio) << "\n";
  return kOk;
}

}  // namespace

int default_threads() {
  const char* env = std::getenv("LRNO_THREADS");
  if (!env || !*env) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (const std::exception&) {
    return 1;
  }
}

Fig2Result run_fig2(const Fig2Config& cfg) {
  InstanceConfig ic;
  ic.n = 40;
  ic.r = 5;
  ic.m = 190;
  ic.sigma = 0.05;
  ic.lambda1 = 1.5;
  ic.lambda_r = 1.0;
  ic.seed = cfg.seed;
  Fig2Result res;
  res.instance = generate_instance(ic);
  res.mw = compute_mw(res.instance, cfg.mw_iters);
  const auto obj = res.instance.objective();
  const Factor x0 = random_init(ic.n, ic.r, default_init_scale(res.instance), cfg.seed, 0);
  res.etas = {0.001, 0.0002};
  res.traces.resize(2);
  parallel_for(2, cfg.threads, [&](std::size_t k) {
    GdConfig gd;
    gd.eta = res.etas[k];
    gd.max_iters = cfg.max_iters;
    gd.grad_tol = 1e-14;
    gd.record_every = cfg.record_every;
    res.traces[k] = gradient_descent(*obj, x0, gd, res.mw.mw);
  });
  for (const Trace& t : res.traces) res.fits.push_back(check_linear_rate(t, cfg.window_start, cfg.window_end));
  res.plateau_ratio = std::abs(res.fits[0].rate) / std::abs(res.fits[1].rate);
  return res;
}

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Noisy low-rank matrix optimization toolkit", "lrno"};
  app.require_subcommand(1);
  GenOpts gen;
  SolveOpts solve;
  BoundsOpts bnd;
  ContourOpts contour;
  VerifyOpts verify;
  Fig2Opts fig2;
  solve.threads = contour.threads = fig2.cfg.threads = default_threads();
  add_gen(*app.add_subcommand("gen", "generate a sensing instance"), gen);
  add_solve(*app.add_subcommand("solve", "run (perturbed) gradient descent from random starts"), solve);
  add_bounds(*app.add_subcommand("bounds", "evaluate one closed-form bound"), bnd);
  add_contour(*app.add_subcommand("contour", "maximum admissible delta over a (distance, probability) grid"),
              contour);
  add_verify(*app.add_subcommand("verify", "check solver output against the guarantees"), verify);
  add_fig2(*app.add_subcommand("fig2", "convergence traces for two step sizes"), fig2);

  Manifest man;
  std::vector<std::string> args;
  try {
    args = expand_config(raw);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  man.argv = args;
  man.command = joined(args);
  try {
    int code = kOk;
    fs::path manifest_path;
    if (app.got_subcommand("gen")) {
      code = cmd_gen(gen, man, out);
      manifest_path = gen.out + ".manifest.json";
    } else if (app.got_subcommand("solve")) {
      code = cmd_solve(solve, man, out, err);
      manifest_path = fs::path(solve.out_dir) / "manifest.json";
    } else if (app.got_subcommand("bounds")) {
      code = cmd_bounds(bnd, man, out);
      if (!bnd.out.empty()) manifest_path = bnd.out + ".manifest.json";
    } else if (app.got_subcommand("contour")) {
      code = cmd_contour(contour, man, out);
      manifest_path = contour.out + ".manifest.json";
    } else if (app.got_subcommand("verify")) {
      code = cmd_verify(verify, man, out);
      manifest_path = verify.out + ".manifest.json";
    } else if (app.got_subcommand("fig2")) {
      code = cmd_fig2(fig2, man, out);
      manifest_path = fs::path(fig2.out_dir) / "manifest.json";
    }
    if (!manifest_path.empty()) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_manifest(man, manifest_path, secs);
    }
    return code;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace lrno::cli
