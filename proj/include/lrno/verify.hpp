#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrno/instances.hpp"
#include "lrno/io.hpp"
#include "lrno/solvers.hpp"

namespace lrno {

// Additive tolerance applied to every inequality. Slacks are reported in
// units of max(1, |bound|), so pass <=> worst_slack >= -kVerifyTolerance.
inline constexpr double kVerifyTolerance = 1e-6;

struct VerifyReport {
  std::string suite;
  std::string fingerprint;
  Json points = Json::array();
  Json summary = Json::object();
  bool pass = true;
  double worst_slack = 0.0;
};

Json report_to_json(const VerifyReport& report);

// Distances of every second-order point against the global bound at
// eps = ||w||_2. bound_override replaces the bound (negative control).
VerifyReport check_theorem1(const Instance& inst, const std::vector<CriticalPoint>& points,
                            std::optional<double> bound_override = std::nullopt);

// Second-order points inside the tau ball must also lie in the inner ball.
VerifyReport check_theorem2(const Instance& inst, const std::vector<CriticalPoint>& points, double tau);

struct DualCertificate {
  Vector y;
  double cos_theta = 0.0;
  double trace_plus = 0.0;
  double trace_minus = 0.0;
  double value = 0.0;
};

// Feasible dual value for M = v e^T + e v^T with v = lifted_matrix(X) y and
// e = vec(X X^T - M*).
DualCertificate dual_certificate(const Factor& x_hat, const SymMatrix& m_star, const Vector& y, double zeta1,
                                 double q);

// argmin_y ||lifted_matrix(X) y - e||, rescaled so ||lifted_matrix(X) y|| = ||e||.
// Zero when e is orthogonal to the range.
Vector least_squares_dual_y(const Factor& x_hat, const SymMatrix& m_star);

VerifyReport check_weak_duality(const Instance& inst, const std::vector<CriticalPoint>& points);

// lambda_r(M)(1 + delta + zeta2 q) >= -lambda_min(grad f(M)) at second-order points.
VerifyReport check_terminal_eigen(const Instance& inst, const std::vector<CriticalPoint>& points);

struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

// Least-squares slope of log(dist_ref_fro) against iter on [start, end].
RateFit check_linear_rate(const Trace& trace, long start_iter, long end_iter);

// Infimum of grad^2 / (2 (objective - reference_value)) over records with
// dist_ref_fro below radius.
VerifyReport check_pl_trajectory(const Trace& trace, double reference_value, double radius);

// Largest xi on a log grid from 1e-1 down to 1e-6 for which every probe has
// dist(X, M*) <= alpha, ||grad|| >= xi, or lambda_min(hess) <= -2 xi.
VerifyReport check_strict_saddle(const Instance& inst, const std::vector<Factor>& probes, double alpha);

}  // namespace lrno
