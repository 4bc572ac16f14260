#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lrno/instances.hpp"
#include "lrno/linalg.hpp"
#include "lrno/objectives.hpp"

namespace lrno {

struct GdConfig {
  double eta = 1e-3;
  long max_iters = 10000;
  double grad_tol = 1e-8;
  long record_every = 1;
};

// Saddle-escaping variant: when the gradient is small and no perturbation
// happened in the last escape_window iterations, jump uniformly inside a ball
// of radius perturb_radius. An escape is fruitless when the objective after
// escape_window iterations has not dropped by f_thresh.
struct PerturbConfig {
  GdConfig base;
  double g_thresh = 1e-6;
  double perturb_radius = 1e-6;
  long escape_window = 100;
  int max_perturbations = 20;
  // 0 selects g_thresh * perturb_radius / 2.
  double f_thresh = 0.0;
  std::uint64_t seed = 0;
};

// Defaults: g_thresh = 100 grad_tol, radius = g_thresh, window = 10 n r.
PerturbConfig default_perturb_config(const GdConfig& base, Index n, Index r, std::uint64_t seed);

enum class Termination { converged, max_iters, diverged };

const char* to_string(Termination t);

struct TraceRecord {
  long iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double dist_ref_fro = 0.0;  // ||X X^T - M_ref||_F
};

struct Trace {
  std::vector<TraceRecord> records;
  Factor terminal;
  Termination termination = Termination::max_iters;
  long iterations = 0;
  int perturbations = 0;
};

// X <- X - eta grad h(X). Stops at grad_tol, max_iters, or divergence
// (non-finite iterate or objective above 1e6 times the initial value).
Trace gradient_descent(const Objective& obj, const Factor& x0, const GdConfig& cfg, const SymMatrix& reference);

Trace perturbed_gd(const Objective& obj, const Factor& x0, const PerturbConfig& cfg, const SymMatrix& reference);

enum class PointOrder { first, second, saddle };

const char* to_string(PointOrder o);

struct CriticalPoint {
  Factor x;
  double grad_norm = 0.0;
  double hess_min_eig = 0.0;
  PointOrder order = PointOrder::first;
  double dist_to_mstar_fro = 0.0;
  double sigma_r_of_m_hat = 0.0;
  bool diverged = false;
  Termination termination = Termination::max_iters;
};

// Smallest eigenvalue of the factored Hessian: dense assembly for nr <= 400,
// otherwise shifted power iteration on the quadratic form.
double factored_hess_min_eig(const Objective& obj, const Factor& x);

CriticalPoint classify_point(const Objective& obj, const Factor& x, double tol, double tol_hess,
                             const std::optional<SymMatrix>& m_star = std::nullopt);

struct MultiStartConfig {
  int starts = 10;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  GdConfig gd;
  // Classification tolerances; tol defaults to gd.grad_tol.
  std::optional<double> tol;
  double tol_hess = 1e-6;
  int threads = 1;
  bool perturbed = false;
};

// Gaussian initializations with entry standard deviation init_scale.
Factor random_init(Index n, Index r, double init_scale, std::uint64_t seed, std::uint64_t index);

// Runs start i from random_init(..., seed, i). Output ordered by start index.
std::vector<CriticalPoint> multi_start(const Objective& obj, Index r, const MultiStartConfig& cfg,
                                       const SymMatrix& reference,
                                       const std::optional<SymMatrix>& m_star = std::nullopt,
                                       std::vector<Trace>* traces = nullptr);

// (lambda1(M*)/r)^{1/2}
double default_init_scale(const Instance& inst);

struct MwResult {
  SymMatrix mw;
  double d_r = 0.0;
  // False when m < dim(symmetric matrices): the reference is the terminal
  // of a deep factored GD run from the ground truth factor.
  bool unique = true;
  long gd_iterations = 0;
  double gd_grad_norm = 0.0;
};

MwResult compute_mw(const Instance& inst, long max_iters = 200000);

}  // namespace lrno
