#include "lrno/bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lrno/error.hpp"
#include "lrno/instances.hpp"
#include "lrno/io.hpp"
#include "lrno/parallel.hpp"

namespace lrno::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kProcrustes = 2.0 * (std::sqrt(2.0) - 1.0);

// (limit)/zeta2 with zeta2 = 0 meaning no cap.
double noise_cap(double limit, double zeta2) { return zeta2 > 0.0 ? limit / zeta2 : kInf; }

void require_nonneg(const char* name, double v) {
  if (!(v >= 0.0)) throw DomainError(std::string(name) + " must be nonnegative");
}

}  // namespace

double global_bound(double delta, double zeta1, double zeta2, double epsilon) {
  require_nonneg("zeta1", zeta1);
  require_nonneg("zeta2", zeta2);
  if (!(delta >= 0.0 && delta < 1.0 / 3.0)) {
    throw DomainError("global bound requires a RIP constant delta in [0, 1/3)");
  }
  if (!(epsilon >= 0.0 && epsilon < noise_cap(1.0 / 3.0 - delta, zeta2))) {
    throw DomainError("global bound requires eps in [0, (1/3 - delta)/zeta2)");
  }
  return 2.0 * zeta1 * epsilon / (1.0 - 3.0 * (delta + zeta2 * epsilon));
}

double local_constant(double tau, double lambda1, double lambda_r) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("local constant requires tau in (0, 1)");
  if (!(lambda_r > 0.0) || lambda1 < lambda_r) throw DomainError("local constant requires lambda1 >= lambda_r > 0");
  return std::sqrt(2.0 * (lambda1 + tau * lambda_r) / ((1.0 - tau) * lambda_r));
}

double local_bound(double delta, double zeta1, double zeta2, double epsilon, double tau, double lambda1,
                   double lambda_r) {
  require_nonneg("zeta1", zeta1);
  require_nonneg("zeta2", zeta2);
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("local bound requires delta in [0, 1)");
  if (!(tau > 0.0 && tau < 1.0 - delta * delta)) {
    throw DomainError("local bound requires tau in (0, 1 - delta^2)");
  }
  const double s = std::sqrt(1.0 - tau);
  if (!(epsilon >= 0.0 && epsilon < noise_cap(s - delta, zeta2))) {
    throw DomainError("local bound requires eps < (sqrt(1 - tau) - delta)/zeta2");
  }
  const double c = local_constant(tau, lambda1, lambda_r);
  return epsilon * (1.0 + delta + zeta2 * epsilon) * zeta1 * c / (s - zeta2 * epsilon - delta);
}

const char* to_string(DeltaBinding b) {
  switch (b) {
    case DeltaBinding::formula:
      return "formula";
    case DeltaBinding::noise_cap:
      return "noise_cap";
    case DeltaBinding::rip_cap:
      return "rip_cap";
    case DeltaBinding::third:
      return "one_third";
    case DeltaBinding::infeasible:
      return "infeasible";
  }
  return "unknown";
}

DeltaCap max_delta_global(double xi, double epsilon, double zeta1, double zeta2) {
  if (!(xi > 0.0)) throw DomainError("max_delta_global requires xi > 0");
  require_nonneg("epsilon", epsilon);
  require_nonneg("zeta1", zeta1);
  require_nonneg("zeta2", zeta2);
  if (2.0 * zeta1 * epsilon > xi) return {std::nullopt, DeltaBinding::infeasible};
  const double delta = (1.0 - 2.0 * zeta1 * epsilon / xi) / 3.0 - zeta2 * epsilon;
  if (delta < 0.0) return {std::nullopt, DeltaBinding::infeasible};
  // Open caps: delta < 1/3 and delta < 1/3 - zeta2 eps.
  const double cap = 1.0 / 3.0 - zeta2 * epsilon;
  if (delta >= cap - kSupremumOffset) {
    if (cap - kSupremumOffset < 0.0) return {std::nullopt, DeltaBinding::infeasible};
    return {cap - kSupremumOffset, zeta2 * epsilon > 0.0 ? DeltaBinding::noise_cap : DeltaBinding::third};
  }
  return {delta, DeltaBinding::formula};
}

DeltaCap max_delta_local(double xi, double epsilon, double zeta1, double zeta2, double tau, double lambda1,
                         double lambda_r) {
  if (!(xi > 0.0)) throw DomainError("max_delta_local requires xi > 0");
  require_nonneg("epsilon", epsilon);
  require_nonneg("zeta1", zeta1);
  require_nonneg("zeta2", zeta2);
  const double c = local_constant(tau, lambda1, lambda_r);
  const double s = std::sqrt(1.0 - tau);
  const double cap = s - zeta2 * epsilon;
  if (cap <= 0.0) return {std::nullopt, DeltaBinding::infeasible};
  const double numer = xi * cap - epsilon * zeta1 * c * (1.0 + zeta2 * epsilon);
  if (numer <= 0.0) return {std::nullopt, DeltaBinding::infeasible};
  const double delta = numer / (xi + epsilon * zeta1 * c);
  if (delta >= cap - kSupremumOffset) {
    // Only reachable at eps*zeta1 = 0; sqrt(1 - tau) is also the tau < 1 - delta^2 limit.
    return {cap - kSupremumOffset, zeta2 * epsilon > 0.0 ? DeltaBinding::noise_cap : DeltaBinding::rip_cap};
  }
  return {delta, DeltaBinding::formula};
}

double convergence_radius(double delta, double zeta2, double epsilon, double sigma_r_mw, double d_r) {
  require_nonneg("zeta2", zeta2);
  require_nonneg("sigma_r(M^w)", sigma_r_mw);
  require_nonneg("D_r", d_r);
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("convergence radius requires delta in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon < noise_cap(1.0 - delta, zeta2))) {
    throw DomainError("convergence radius requires eps < (1 - delta)/zeta2");
  }
  const double d = delta + zeta2 * epsilon;
  const double cw2 = kProcrustes * sigma_r_mw;
  const double radius = cw2 * (1.0 - d) - std::sqrt(cw2) * std::sqrt((1.0 - d) / (1.0 + d)) * d_r;
  return std::max(radius, 0.0);
}

double max_step(double rho, Index r, double delta, double zeta2, double epsilon, double mw_frob) {
  if (!(rho > 0.0)) throw DomainError("step bound requires rho > 0");
  if (r < 1) throw DomainError("step bound requires r >= 1");
  require_nonneg("||M^w||_F", mw_frob);
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("step bound requires delta in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon < noise_cap(1.0 - delta, zeta2))) {
    throw DomainError("step bound requires eps < (1 - delta)/zeta2");
  }
  const double d = delta + zeta2 * epsilon;
  return 1.0 / (12.0 * rho * std::sqrt(static_cast<double>(r)) * (kProcrustes * std::sqrt(1.0 - d * d) + mw_frob));
}

double zeta_alpha(double zeta1, double alpha, double sigma_r_mstar) {
  if (!(alpha > 0.0)) throw DomainError("strict saddle requires alpha > 0");
  if (!(sigma_r_mstar > 0.0)) throw DomainError("strict saddle requires sigma_r(M*) > 0");
  require_nonneg("zeta1", zeta1);
  return zeta1 / (std::sqrt(kProcrustes) * std::sqrt(sigma_r_mstar) * alpha);
}

double strict_saddle_noise_cap(double delta, double zeta1, double zeta2, double alpha, double sigma_r_mstar) {
  if (!(delta >= 0.0 && delta < 1.0 / 3.0)) {
    throw DomainError("strict saddle property requires a RIP constant delta in [0, 1/3)");
  }
  require_nonneg("zeta2", zeta2);
  const double za = zeta_alpha(zeta1, alpha, sigma_r_mstar);
  const double denom = zeta2 + 2.0 * za / 3.0;
  if (denom == 0.0) return kInf;
  return (1.0 / 3.0 - delta) / denom;
}

std::vector<ContourCell> contour_grid(const ContourConfig& cfg, int threads) {
  if (cfg.xi_grid.empty() || cfg.p_grid.empty()) throw DomainError("contour grid needs nonempty xi and p grids");
  const std::size_t nx = cfg.xi_grid.size();
  std::vector<ContourCell> cells(nx * cfg.p_grid.size());
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    ContourCell& cell = cells[idx];
    cell.p = cfg.p_grid[idx / nx];
    cell.xi = cfg.xi_grid[idx % nx];
    cell.epsilon = noise_tail_epsilon(cell.p, cfg.m, cfg.sigma);
    const double xi_abs = cfg.xi_in_lambda_r ? cell.xi * cfg.lambda_r : cell.xi;
    const DeltaCap cap =
        cfg.theorem == Theorem::global
            ? max_delta_global(xi_abs, cell.epsilon, cfg.zeta1, cfg.zeta2)
            : max_delta_local(xi_abs, cell.epsilon, cfg.zeta1, cfg.zeta2, cfg.tau, cfg.lambda1, cfg.lambda_r);
    cell.delta = cap.delta;
  });
  return cells;
}

std::string contour_csv(const std::vector<ContourCell>& cells) {
  std::ostringstream os;
  os << "xi,p,epsilon,delta\n";
  for (const ContourCell& c : cells) {
    os << format_double(c.xi) << ',' << format_double(c.p) << ',' << format_double(c.epsilon) << ','
       << (c.delta ? format_double(*c.delta) : std::string("infeasible")) << '\n';
  }
  return os.str();
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  return out;
}

}  // namespace lrno::bounds
