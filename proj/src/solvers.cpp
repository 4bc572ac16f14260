#include "lrno/solvers.hpp"

#include <cmath>
#include <limits>

#include "lrno/parallel.hpp"
#include "lrno/rng.hpp"

namespace lrno {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_iters:
      return "max_iters";
    case Termination::diverged:
      return "diverged";
  }
  return "unknown";
}

const char* to_string(PointOrder o) {
  switch (o) {
    case PointOrder::first:
      return "first";
    case PointOrder::second:
      return "second";
    case PointOrder::saddle:
      return "saddle";
  }
  return "unknown";
}

PerturbConfig default_perturb_config(const GdConfig& base, Index n, Index r, std::uint64_t seed) {
  PerturbConfig cfg;
  cfg.base = base;
  cfg.g_thresh = 100.0 * base.grad_tol;
  cfg.perturb_radius = cfg.g_thresh;
  cfg.escape_window = 10 * n * r;
  cfg.max_perturbations = 20;
  cfg.seed = seed;
  return cfg;
}

namespace {

struct Eval {
  double value;
  Factor grad;
  double grad_norm;
  SymMatrix m;
};

Eval evaluate(const Objective& obj, const Factor& x) {
  SymMatrix m = SymMatrix::gram(x);
  auto [value, g] = obj.value_and_gradient(m);
  Factor grad = 2.0 * g.mat() * x;
  const double norm = grad.norm();
  return {value, std::move(grad), norm, std::move(m)};
}

void validate(const Objective& obj, const Factor& x0, const GdConfig& cfg, const SymMatrix& reference) {
  if (x0.rows() != obj.dim()) throw ShapeError("solver: initial factor rows must equal objective dimension");
  if (reference.n() != obj.dim()) throw ShapeError("solver: reference dimension mismatch");
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) throw DomainError("solver: step size must be positive and finite");
  if (!(cfg.grad_tol > 0.0)) throw DomainError("solver: grad_tol must be positive");
  if (cfg.record_every < 1) throw DomainError("solver: record_every must be >= 1");
  if (cfg.max_iters < 0) throw DomainError("solver: max_iters must be >= 0");
}

class Recorder {
 public:
  Recorder(Trace& trace, const SymMatrix& reference, long every)
      : trace_(trace), reference_(reference), every_(every) {}

  void maybe(long iter, const Eval& e) {
    if (iter % every_ == 0) force(iter, e);
  }

  void force(long iter, const Eval& e) {
    if (!trace_.records.empty() && trace_.records.back().iter == iter) return;
    trace_.records.push_back({iter, e.value, e.grad_norm, (e.m - reference_).frobenius()});
  }

 private:
  Trace& trace_;
  const SymMatrix& reference_;
  long every_;
};

bool blew_up(const Eval& e, double f0) {
  if (!std::isfinite(e.value) || !std::isfinite(e.grad_norm)) return true;
  return f0 > 0.0 && e.value > 1e6 * f0;
}

// Non-finite iterates cannot be wrapped in a SymMatrix; record them directly.
void record_nonfinite(Trace& trace, long iter) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!trace.records.empty() && trace.records.back().iter == iter) return;
  trace.records.push_back({iter, nan, nan, nan});
}

Factor uniform_ball(Rng& rng, Index rows, Index cols, double radius) {
  Factor d = rng.normal_matrix(rows, cols);
  const double norm = d.norm();
  if (norm == 0.0) return Factor::Zero(rows, cols);
  const double u = rng.uniform();
  return d * (radius * std::pow(u, 1.0 / static_cast<double>(rows * cols)) / norm);
}

}  // namespace

Trace gradient_descent(const Objective& obj, const Factor& x0, const GdConfig& cfg, const SymMatrix& reference) {
  validate(obj, x0, cfg, reference);
  Trace trace;
  Recorder rec(trace, reference, cfg.record_every);
  Factor x = x0;
  double f0 = 0.0;
  long t = 0;
  for (;; ++t) {
    if (!x.allFinite()) {
      record_nonfinite(trace, t);
      trace.termination = Termination::diverged;
      break;
    }
    const Eval e = evaluate(obj, x);
    if (t == 0) f0 = e.value;
    rec.maybe(t, e);
    if (blew_up(e, f0)) {
      rec.force(t, e);
      trace.termination = Termination::diverged;
      break;
    }
    if (e.grad_norm <= cfg.grad_tol) {
      rec.force(t, e);
      trace.termination = Termination::converged;
      break;
    }
    if (t >= cfg.max_iters) {
      rec.force(t, e);
      trace.termination = Termination::max_iters;
      break;
    }
    x -= cfg.eta * e.grad;
  }
  trace.terminal = std::move(x);
  trace.iterations = t;
  return trace;
}

Trace perturbed_gd(const Objective& obj, const Factor& x0, const PerturbConfig& cfg, const SymMatrix& reference) {
  validate(obj, x0, cfg.base, reference);
  if (!(cfg.g_thresh > 0.0) || !(cfg.perturb_radius > 0.0) || cfg.escape_window < 1 || cfg.max_perturbations < 1) {
    throw DomainError("perturbed_gd: thresholds, radius, window and perturbation budget must be positive");
  }
  const double f_thresh = cfg.f_thresh > 0.0 ? cfg.f_thresh : 0.5 * cfg.g_thresh * cfg.perturb_radius;
  Rng rng(cfg.seed, "perturbation");
  Trace trace;
  Recorder rec(trace, reference, cfg.base.record_every);
  Factor x = x0;
  Factor x_before;  // iterate at the last perturbation
  double f_before = 0.0;
  long t_noise = -1;
  int fruitless = 0;
  double f0 = 0.0;
  long t = 0;
  for (;; ++t) {
    if (!x.allFinite()) {
      record_nonfinite(trace, t);
      trace.termination = Termination::diverged;
      break;
    }
    const Eval e = evaluate(obj, x);
    if (t == 0) f0 = e.value;
    rec.maybe(t, e);
    if (blew_up(e, f0)) {
      rec.force(t, e);
      trace.termination = Termination::diverged;
      break;
    }
    if (t_noise >= 0 && t - t_noise == cfg.escape_window && f_before - e.value < f_thresh) {
      ++fruitless;
      const Eval before = evaluate(obj, x_before);
      if (before.grad_norm <= cfg.base.grad_tol) {
        // No escape direction from a stationary point: accept it.
        x = x_before;
        rec.force(t, before);
        trace.termination = Termination::converged;
        break;
      }
      if (fruitless >= cfg.max_perturbations) {
        rec.force(t, e);
        trace.termination = Termination::max_iters;
        break;
      }
    }
    if (t >= cfg.base.max_iters) {
      rec.force(t, e);
      trace.termination = Termination::max_iters;
      break;
    }
    const bool quiet = t_noise < 0 || t - t_noise >= cfg.escape_window;
    if (e.grad_norm <= cfg.g_thresh && quiet) {
      x_before = x;
      f_before = e.value;
      t_noise = t;
      ++trace.perturbations;
      x += uniform_ball(rng, x.rows(), x.cols(), cfg.perturb_radius);
      continue;
    }
    x -= cfg.base.eta * e.grad;
  }
  trace.terminal = std::move(x);
  trace.iterations = t;
  return trace;
}

double factored_hess_min_eig(const Objective& obj, const Factor& x) {
  const Index k = x.rows() * x.cols();
  if (k <= 400) {
    const Spectrum s = eigh(SymMatrix(factored_hessian(obj, x)));
    return s.values(k - 1);
  }
  // Hessian-vector products by central differences of the gradient.
  const double step = 1e-6 * std::max(1.0, x.norm());
  auto hv = [&](const Factor& v) {
    return Factor((factored_grad(obj, x + step * v) - factored_grad(obj, x - step * v)) / (2.0 * step));
  };
  Rng rng(0, "hessian_power");
  Factor v = rng.normal_matrix(x.rows(), x.cols());
  v /= v.norm();
  double top = 0.0;
  for (int it = 0; it < 200; ++it) {
    Factor w = hv(v);
    top = inner(v, w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
  }
  const double shift = std::abs(top);
  v = rng.normal_matrix(x.rows(), x.cols());
  v /= v.norm();
  double low = 0.0;
  for (int it = 0; it < 500; ++it) {
    Factor w = shift * v - hv(v);
    low = inner(v, w);
    const double norm = w.norm();
    if (norm == 0.0) break;
    v = w / norm;
  }
  return shift - low;
}

CriticalPoint classify_point(const Objective& obj, const Factor& x, double tol, double tol_hess,
                             const std::optional<SymMatrix>& m_star) {
  CriticalPoint cp;
  cp.x = x;
  if (!x.allFinite()) {
    cp.diverged = true;
    cp.grad_norm = std::numeric_limits<double>::infinity();
    cp.hess_min_eig = std::numeric_limits<double>::quiet_NaN();
    cp.dist_to_mstar_fro = std::numeric_limits<double>::infinity();
    return cp;
  }
  cp.grad_norm = factored_grad(obj, x).norm();
  cp.hess_min_eig = factored_hess_min_eig(obj, x);
  if (cp.grad_norm <= tol) {
    cp.order = cp.hess_min_eig >= -tol_hess ? PointOrder::second : PointOrder::saddle;
  }
  const SymMatrix m_hat = SymMatrix::gram(x);
  if (m_star) cp.dist_to_mstar_fro = (m_hat - *m_star).frobenius();
  const Spectrum s = eigh(m_hat);
  cp.sigma_r_of_m_hat = std::max(s.values(x.cols() - 1), 0.0);
  return cp;
}

Factor random_init(Index n, Index r, double init_scale, std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, indexed_label("start", index));
  return rng.normal_matrix(n, r, init_scale);
}

std::vector<CriticalPoint> multi_start(const Objective& obj, Index r, const MultiStartConfig& cfg,
                                       const SymMatrix& reference, const std::optional<SymMatrix>& m_star,
                                       std::vector<Trace>* traces) {
  if (cfg.starts < 1) throw DomainError("multi_start: need at least one start");
  const std::size_t k = static_cast<std::size_t>(cfg.starts);
  std::vector<CriticalPoint> points(k);
  std::vector<Trace> local(k);
  const double tol = cfg.tol.value_or(cfg.gd.grad_tol);
  parallel_for(k, cfg.threads, [&](std::size_t i) {
    const Factor x0 = random_init(obj.dim(), r, cfg.init_scale, cfg.seed, i);
    Trace tr = cfg.perturbed
                   ? perturbed_gd(obj, x0, default_perturb_config(cfg.gd, obj.dim(), r, cfg.seed + i), reference)
                   : gradient_descent(obj, x0, cfg.gd, reference);
    CriticalPoint cp = classify_point(obj, tr.terminal, tol, cfg.tol_hess, m_star);
    cp.termination = tr.termination;
    if (tr.termination == Termination::diverged) {
      cp.diverged = true;
      cp.order = PointOrder::first;
    }
    points[i] = std::move(cp);
    local[i] = std::move(tr);
  });
  if (traces) *traces = std::move(local);
  return points;
}

double default_init_scale(const Instance& inst) {
  return std::sqrt(inst.meta.lambda1 / static_cast<double>(inst.r));
}

MwResult compute_mw(const Instance& inst, long max_iters) {
  MwResult out;
  const Index n = inst.n;
  const Index d = n * (n + 1) / 2;
  bool solved = false;
  if (inst.m >= d) {
    const Matrix basis = sym_basis(n);
    const Matrix reduced = inst.op->stacked() * basis;
    Eigen::ColPivHouseholderQR<Matrix> qr(reduced);
    qr.setThreshold(1e-12);
    if (qr.rank() == d) {
      const Vector coords = qr.solve(inst.b_tilde);
      out.mw = SymMatrix(unvec(basis * coords, n, n));
      solved = true;
    }
  }
  if (!solved) {
    out.unique = false;
    const auto obj = inst.objective();
    GdConfig cfg;
    cfg.eta = 0.1 / inst.op->rho();
    cfg.grad_tol = 1e-12;
    cfg.max_iters = max_iters;
    cfg.record_every = std::max<long>(max_iters, 1);
    const Trace tr = gradient_descent(*obj, psd_factor(inst.m_star, inst.r), cfg, inst.m_star);
    out.mw = SymMatrix::gram(tr.terminal);
    out.gd_iterations = tr.iterations;
    out.gd_grad_norm = tr.records.back().grad_norm;
  }
  out.d_r = (out.mw - project_psd_rank_r(out.mw, inst.r)).frobenius();
  return out;
}

}  // namespace lrno
