#include "lrno/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrno/bounds.hpp"

namespace lrno {

namespace {

double scale(double bound) { return std::max(1.0, std::abs(bound)); }

double certified_delta(const Instance& inst) {
  if (!inst.meta.delta_certified) {
    throw DomainError(
        "instance has no certified RIP constant; generate it with gen_certified_operator "
        "(gen --certified-delta)");
  }
  return *inst.meta.delta_certified;
}

VerifyReport start_report(const char* suite, const Instance& inst) {
  VerifyReport rep;
  rep.suite = suite;
  rep.fingerprint = inst.fingerprint();
  rep.worst_slack = std::numeric_limits<double>::infinity();
  return rep;
}

// Records a normalized slack and folds it into pass / worst_slack.
double account(VerifyReport& rep, double bound, double value) {
  const double slack = (bound - value) / scale(bound);
  rep.worst_slack = std::min(rep.worst_slack, slack);
  if (slack < -kVerifyTolerance) rep.pass = false;
  return slack;
}

void finish(VerifyReport& rep) {
  if (!std::isfinite(rep.worst_slack)) rep.worst_slack = 0.0;
}

Json point_header(std::size_t index, const CriticalPoint& p) {
  return Json{{"index", index},
              {"order", to_string(p.order)},
              {"grad_norm", p.grad_norm},
              {"hess_min_eig", p.hess_min_eig},
              {"dist_to_mstar_fro", p.dist_to_mstar_fro}};
}

double distance(const Instance& inst, const CriticalPoint& p) {
  return (SymMatrix::gram(p.x) - inst.m_star).frobenius();
}

}  // namespace

Json report_to_json(const VerifyReport& report) {
  return Json{{"suite", report.suite},
              {"instance_fingerprint", report.fingerprint},
              {"pass", report.pass},
              {"worst_slack", report.worst_slack},
              {"summary", report.summary},
              {"points", report.points}};
}

VerifyReport check_theorem1(const Instance& inst, const std::vector<CriticalPoint>& points,
                            std::optional<double> bound_override) {
  const double delta = certified_delta(inst);
  const double q = inst.noise.q;
  const auto obj = inst.objective();
  const double bound = bound_override.value_or(bounds::global_bound(delta, obj->zeta1(), obj->zeta2(), q));
  VerifyReport rep = start_report("thm1", inst);
  int checked = 0;
  Json excluded = Json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CriticalPoint& p = points[i];
    Json rec = point_header(i, p);
    if (p.diverged || p.order != PointOrder::second) {
      excluded.push_back(i);
      rec["checked"] = false;
      rep.points.push_back(rec);
      continue;
    }
    const double dist = distance(inst, p);
    rec["checked"] = true;
    rec["distance"] = dist;
    rec["bound"] = bound;
    rec["slack"] = account(rep, bound, dist);
    if (rec["slack"].get<double>() < -kVerifyTolerance) rec["x_hat"] = matrix_to_json(p.x);
    rep.points.push_back(rec);
    ++checked;
  }
  finish(rep);
  rep.summary = {{"delta_certified", delta}, {"epsilon", q},     {"bound", bound},
                 {"checked", checked},       {"excluded", excluded}, {"bound_overridden", bound_override.has_value()}};
  return rep;
}

VerifyReport check_theorem2(const Instance& inst, const std::vector<CriticalPoint>& points, double tau) {
  const double delta = certified_delta(inst);
  const double q = inst.noise.q;
  const auto obj = inst.objective();
  const double inner_bound =
      bounds::local_bound(delta, obj->zeta1(), obj->zeta2(), q, tau, inst.meta.lambda1, inst.meta.lambda_r);
  const double outer = tau * inst.meta.lambda_r;
  VerifyReport rep = start_report("thm2", inst);
  int inside = 0;
  int ring = 0;
  int outside = 0;
  int skipped = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CriticalPoint& p = points[i];
    Json rec = point_header(i, p);
    if (p.diverged || p.order != PointOrder::second) {
      ++skipped;
      rec["region"] = "not_second_order";
      rep.points.push_back(rec);
      continue;
    }
    const double dist = distance(inst, p);
    rec["distance"] = dist;
    if (dist > outer) {
      ++outside;
      rec["region"] = "outside";
    } else {
      rec["slack"] = account(rep, inner_bound, dist);
      if (rec["slack"].get<double>() < -kVerifyTolerance) {
        ++ring;
        rec["region"] = "ring";
        rec["x_hat"] = matrix_to_json(p.x);
      } else {
        ++inside;
        rec["region"] = "inner";
      }
    }
    rep.points.push_back(rec);
  }
  finish(rep);
  rep.summary = {{"delta_certified", delta}, {"epsilon", q},   {"tau", tau},       {"inner_bound", inner_bound},
                 {"outer_radius", outer},    {"inner", inside}, {"ring", ring},     {"outside", outside},
                 {"not_second_order", skipped}};
  return rep;
}

DualCertificate dual_certificate(const Factor& x_hat, const SymMatrix& m_star, const Vector& y, double zeta1,
                                 double q) {
  const Vector e = vec(SymMatrix::gram(x_hat).mat() - m_star.mat());
  const double e_norm = e.norm();
  if (e_norm == 0.0) throw DomainError("dual certificate: X X^T equals M*, e = 0");
  if (y.size() != x_hat.size()) throw ShapeError("dual certificate: y must have n r entries");
  const Vector v = lifted_matrix(x_hat) * y;
  const double v_norm = v.norm();
  if (v_norm == 0.0) throw DomainError("dual certificate: lifted X y vanishes, trace_plus = 0");

  // M = v e^T + e v^T has rank <= 2 and lives on span{v, e}.
  Matrix basis(e.size(), 2);
  basis.col(0) = e / e_norm;
  Vector w = v - basis.col(0).dot(v) * basis.col(0);
  Index k = 1;
  if (w.norm() > 1e-12 * v_norm) {
    basis.col(1) = w / w.norm();
    k = 2;
  }
  const Matrix q_basis = basis.leftCols(k);
  const Vector ve = q_basis.transpose() * v;
  const Vector ee = q_basis.transpose() * e;
  const Matrix small = ve * ee.transpose() + ee * ve.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(small, Eigen::EigenvaluesOnly);
  DualCertificate cert;
  cert.y = y;
  cert.cos_theta = std::clamp(v.dot(e) / (v_norm * e_norm), -1.0, 1.0);
  for (Index i = 0; i < k; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 0.0) cert.trace_plus += lam;
    else cert.trace_minus -= lam;
  }
  if (!(cert.trace_plus > 0.0)) throw DomainError("dual certificate: lifted X y is antiparallel to e, trace_plus = 0");
  cert.value = (cert.trace_minus + 4.0 * zeta1 * q * spectral_norm(x_hat) * y.norm()) / cert.trace_plus;
  return cert;
}

Vector least_squares_dual_y(const Factor& x_hat, const SymMatrix& m_star) {
  const Vector e = vec(SymMatrix::gram(x_hat).mat() - m_star.mat());
  const Matrix l = lifted_matrix(x_hat);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(l);
  cod.setThreshold(1e-12);
  Vector y = cod.solve(e);
  const double v_norm = (l * y).norm();
  if (v_norm <= 1e-14 * std::max(1.0, e.norm())) return Vector::Zero(x_hat.size());
  return y * (e.norm() / v_norm);
}

VerifyReport check_weak_duality(const Instance& inst, const std::vector<CriticalPoint>& points) {
  const double delta = certified_delta(inst);
  const double q = inst.noise.q;
  const auto obj = inst.objective();
  const double d = delta + obj->zeta2() * q;
  const double rhs = (1.0 - d) / (1.0 + d);
  VerifyReport rep = start_report("dual", inst);
  int checked = 0;
  int zero_e = 0;
  int degenerate = 0;
  int not_second = 0;
  const double e_floor = 1e-9 * std::max(1.0, inst.m_star.frobenius());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CriticalPoint& p = points[i];
    Json rec = point_header(i, p);
    if (p.diverged || p.order != PointOrder::second) {
      ++not_second;
      rec["status"] = "not_second_order";
      rep.points.push_back(rec);
      continue;
    }
    const double e_norm = distance(inst, p);
    rec["e_norm"] = e_norm;
    if (e_norm <= e_floor) {
      ++zero_e;
      rec["status"] = "e_zero";
      rep.points.push_back(rec);
      continue;
    }
    const Vector y = least_squares_dual_y(p.x, inst.m_star);
    if (y.isZero(0.0)) {
      ++degenerate;
      rec["status"] = "e_orthogonal_to_range";
      rep.points.push_back(rec);
      continue;
    }
    try {
      const DualCertificate cert = dual_certificate(p.x, inst.m_star, y, obj->zeta1(), q);
      rec["status"] = "checked";
      rec["cos_theta"] = cert.cos_theta;
      rec["trace_plus"] = cert.trace_plus;
      rec["trace_minus"] = cert.trace_minus;
      rec["value"] = cert.value;
      rec["lower_bound"] = rhs;
      // The certificate upper-bounds eta*, which is at least rhs.
      rec["slack"] = account(rep, cert.value, rhs);
      ++checked;
    } catch (const DomainError& err) {
      ++degenerate;
      rec["status"] = "degenerate";
      rec["reason"] = err.what();
    }
    rep.points.push_back(rec);
  }
  finish(rep);
  rep.summary = {{"delta_certified", delta}, {"q", q},       {"lower_bound", rhs},          {"checked", checked},
                 {"e_zero", zero_e},         {"degenerate", degenerate}, {"not_second_order", not_second}};
  return rep;
}

VerifyReport check_terminal_eigen(const Instance& inst, const std::vector<CriticalPoint>& points) {
  const double delta = inst.meta.delta_certified.value_or(inst.meta.delta_hat);
  const double q = inst.noise.q;
  const auto obj = inst.objective();
  const double factor = 1.0 + delta + obj->zeta2() * q;
  VerifyReport rep = start_report("eigen", inst);
  int checked = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CriticalPoint& p = points[i];
    Json rec = point_header(i, p);
    if (p.diverged || p.order != PointOrder::second) {
      rec["checked"] = false;
      rep.points.push_back(rec);
      continue;
    }
    const SymMatrix m_hat = SymMatrix::gram(p.x);
    const Spectrum sm = eigh(m_hat);
    const Spectrum sg = eigh(obj->gradient(m_hat));
    const double lam_r = sm.values(inst.r - 1);
    const double g = -sg.values(sg.values.size() - 1);
    rec["checked"] = true;
    rec["lambda_r"] = lam_r;
    rec["neg_grad_min_eig"] = g;
    rec["slack"] = account(rep, lam_r * factor, g);
    rep.points.push_back(rec);
    ++checked;
  }
  finish(rep);
  rep.summary = {{"delta", delta}, {"delta_is_certified", inst.meta.delta_certified.has_value()}, {"checked", checked}};
  return rep;
}

RateFit check_linear_rate(const Trace& trace, long start_iter, long end_iter) {
  if (end_iter <= start_iter) throw DomainError("linear rate: window end must exceed start");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  int k = 0;
  for (const TraceRecord& rec : trace.records) {
    if (rec.iter < start_iter || rec.iter > end_iter) continue;
    if (!(rec.dist_ref_fro > 0.0)) {
      throw DomainError("linear rate: nonpositive distance at iteration " + std::to_string(rec.iter) +
                        "; the trace reached its floor, shrink the window");
    }
    const double x = static_cast<double>(rec.iter - start_iter);
    const double y = std::log(rec.dist_ref_fro);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++k;
  }
  if (k < 2) throw DomainError("linear rate: fewer than two records inside the window");
  const double n = k;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  RateFit fit;
  fit.samples = k;
  fit.rate = cxy / vx;
  fit.r_squared = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

VerifyReport check_pl_trajectory(const Trace& trace, double reference_value, double radius) {
  VerifyReport rep;
  rep.suite = "pl";
  double mu = std::numeric_limits<double>::infinity();
  int used = 0;
  int outside = 0;
  int clamped = 0;
  for (const TraceRecord& rec : trace.records) {
    if (!(rec.dist_ref_fro < radius)) {
      ++outside;
      continue;
    }
    const double gap = rec.objective - reference_value;
    if (!(gap > 0.0)) {
      ++clamped;
      continue;
    }
    const double ratio = 0.5 * rec.grad_norm * rec.grad_norm / gap;
    if (ratio < mu) mu = ratio;
    ++used;
    rep.points.push_back({{"iter", rec.iter}, {"ratio", ratio}});
  }
  rep.pass = used > 0 && mu > 0.0;
  rep.worst_slack = used > 0 ? mu : 0.0;
  rep.summary = {{"mu_hat", used > 0 ? Json(mu) : Json(nullptr)},
                 {"radius", radius},
                 {"reference_value", reference_value},
                 {"used", used},
                 {"outside_radius", outside},
                 {"clamped_below_reference", clamped}};
  if (clamped > 0) rep.summary["warning"] = "objective at or below the reference value; records skipped";
  return rep;
}

VerifyReport check_strict_saddle(const Instance& inst, const std::vector<Factor>& probes, double alpha) {
  const double delta = certified_delta(inst);
  const auto obj = inst.objective();
  const double sigma_r = eigh(inst.m_star).values(inst.r - 1);
  const double cap = bounds::strict_saddle_noise_cap(delta, obj->zeta1(), obj->zeta2(), alpha, sigma_r);
  if (inst.noise.q > cap) {
    throw DomainError("strict saddle: ||w|| = " + format_double(inst.noise.q) +
                      " exceeds the noise level under which the trichotomy is guaranteed (" + format_double(cap) +
                      ")");
  }
  struct Probe {
    double dist;
    double grad;
    double hess;
  };
  std::vector<Probe> vals;
  vals.reserve(probes.size());
  for (const Factor& x : probes) {
    vals.push_back({dist_factor(x, inst.m_star), factored_grad(*obj, x).norm(), factored_hess_min_eig(*obj, x)});
  }
  auto covered = [&](const Probe& p, double xi) { return p.dist <= alpha || p.grad >= xi || p.hess <= -2.0 * xi; };

  constexpr int kGrid = 51;
  std::optional<double> found;
  for (int i = 0; i < kGrid; ++i) {
    const double xi = std::pow(10.0, -1.0 - 5.0 * i / (kGrid - 1));
    if (std::all_of(vals.begin(), vals.end(), [&](const Probe& p) { return covered(p, xi); })) {
      found = xi;
      break;
    }
  }
  VerifyReport rep = start_report("saddle", inst);
  const double xi = found.value_or(1e-6);
  int uncovered = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const Probe& p = vals[i];
    Json rec{{"index", i}, {"dist", p.dist}, {"grad_norm", p.grad}, {"hess_min_eig", p.hess}};
    if (p.dist <= alpha) rec["branch"] = "near";
    else if (p.grad >= xi) rec["branch"] = "gradient";
    else if (p.hess <= -2.0 * xi) rec["branch"] = "curvature";
    else {
      rec["branch"] = "none";
      ++uncovered;
    }
    rep.points.push_back(rec);
  }
  // A measured xi of zero is inconclusive, not a violation.
  rep.pass = true;
  rep.worst_slack = 0.0;
  rep.summary = {{"alpha", alpha},
                 {"noise_cap", cap},
                 {"q", inst.noise.q},
                 {"xi", found ? Json(*found) : Json(nullptr)},
                 {"conclusive", found.has_value()},
                 {"uncovered_at_min_xi", found ? 0 : uncovered}};
  return rep;
}

}  // namespace lrno
