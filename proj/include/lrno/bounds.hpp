#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrno/linalg.hpp"

// Closed-form guarantees for noisy Burer-Monteiro problems and their
// inversions. Every evaluator throws DomainError naming the violated
// hypothesis; the inverters clamp to the feasible delta interval instead.
namespace lrno::bounds {

// Offset below an open supremum reported by the inverters.
inline constexpr double kSupremumOffset = 1e-15;

// 2 zeta1 eps / (1 - 3(delta + zeta2 eps)); needs delta < 1/3 and
// eps in [0, (1/3 - delta)/zeta2).
double global_bound(double delta, double zeta1, double zeta2, double epsilon);

// sqrt(2 (lambda1 + tau lambda_r) / ((1 - tau) lambda_r))
double local_constant(double tau, double lambda1, double lambda_r);

// eps (1 + delta + zeta2 eps) zeta1 C / (sqrt(1 - tau) - zeta2 eps - delta);
// needs tau in (0, 1 - delta^2) and eps < (sqrt(1 - tau) - delta)/zeta2.
double local_bound(double delta, double zeta1, double zeta2, double epsilon, double tau, double lambda1,
                   double lambda_r);

enum class DeltaBinding {
  formula,          // the inversion itself
  noise_cap,        // delta < cap forced by the eps hypothesis
  rip_cap,          // tau < 1 - delta^2
  third,            // delta < 1/3
  infeasible,
};

const char* to_string(DeltaBinding b);

struct DeltaCap {
  std::optional<double> delta;  // nullopt when even delta = 0 cannot certify xi
  DeltaBinding binding = DeltaBinding::formula;
};

// Largest delta with global_bound(delta, ...) <= xi.
DeltaCap max_delta_global(double xi, double epsilon, double zeta1, double zeta2);

// Largest delta with local_bound(delta, ...) <= xi.
DeltaCap max_delta_local(double xi, double epsilon, double zeta1, double zeta2, double tau, double lambda1,
                         double lambda_r);

// C_w^2 (1 - d) - C_w sqrt((1 - d)/(1 + d)) D_r with d = delta + zeta2 eps and
// C_w = sqrt(2(sqrt2 - 1) sigma_r(M^w)), floored at 0.
double convergence_radius(double delta, double zeta2, double epsilon, double sigma_r_mw, double d_r);

// (12 rho sqrt(r) (2(sqrt2 - 1) sqrt(1 - d^2) + ||M^w||_F))^{-1}
double max_step(double rho, Index r, double delta, double zeta2, double epsilon, double mw_frob);

// zeta1 / (sqrt(2(sqrt2 - 1)) sigma_r(M*)^{1/2} alpha)
double zeta_alpha(double zeta1, double alpha, double sigma_r_mstar);

// (1/3 - delta) / (zeta2 + 2 zeta_alpha / 3)
double strict_saddle_noise_cap(double delta, double zeta1, double zeta2, double alpha, double sigma_r_mstar);

enum class Theorem { global, local };

struct ContourConfig {
  Theorem theorem = Theorem::global;
  double tau = 0.5;
  double zeta1 = 1.0;
  double zeta2 = 0.0;
  double sigma = 0.05;
  Index m = 1600;
  double lambda1 = 1.5;
  double lambda_r = 1.0;
  // When set, xi values are in units of lambda_r.
  bool xi_in_lambda_r = false;
  std::vector<double> xi_grid;
  std::vector<double> p_grid;
};

struct ContourCell {
  double xi = 0.0;  // as given in the grid
  double p = 0.0;
  double epsilon = 0.0;
  std::optional<double> delta;
};

// One cell per (p, xi), p-major, xi-minor.
std::vector<ContourCell> contour_grid(const ContourConfig& cfg, int threads = 1);

// CSV with header xi,p,epsilon,delta; infeasible cells hold "infeasible".
std::string contour_csv(const std::vector<ContourCell>& cells);

std::vector<double> linspace(double lo, double hi, int count);

}  // namespace lrno::bounds
