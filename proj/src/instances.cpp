#include "lrno/instances.hpp"

#include <cmath>
#include <sstream>

#include "lrno/io.hpp"
#include "lrno/rng.hpp"

namespace lrno {

const char* to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian:
      return "gaussian";
    case NoiseFamily::uniform:
      return "uniform";
    case NoiseFamily::rademacher:
      return "rademacher";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "uniform") return NoiseFamily::uniform;
  if (s == "rademacher") return NoiseFamily::rademacher;
  throw DomainError("unknown noise family '" + s + "' (expected gaussian, uniform or rademacher)");
}

std::shared_ptr<SensingObjective> Instance::objective() const { return sensing_objective(op, b_tilde); }

std::shared_ptr<SensingObjective> Instance::clean_objective() const {
  return sensing_objective(op, op->apply(m_star.mat()));
}

std::string Instance::fingerprint() const { return content_hash(instance_to_json(*this).dump()); }

SymMatrix gen_ground_truth(Index n, Index r, double lambda1, double lambda_r, std::uint64_t seed) {
  if (r < 1 || r > n) throw DomainError("gen_ground_truth: need 1 <= r <= n");
  if (!(lambda_r > 0.0) || lambda1 < lambda_r) {
    throw DomainError("gen_ground_truth: need lambda1 >= lambda_r > 0");
  }
  if (r == 1 && lambda1 != lambda_r) {
    throw DomainError("gen_ground_truth: rank 1 needs lambda1 == lambda_r");
  }
  Rng rng(seed, "ground_truth");
  const Matrix g = rng.normal_matrix(n, n);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  Vector lam = Vector::Zero(n);
  for (Index k = 0; k < r; ++k) {
    lam(k) = r == 1 ? lambda1
                    : lambda1 + (lambda_r - lambda1) * static_cast<double>(k) / static_cast<double>(r - 1);
  }
  return SymMatrix(q * lam.asDiagonal() * q.transpose());
}

MeasurementOperator gen_gaussian_operator(Index n, Index m, std::uint64_t seed) {
  if (m < 1) throw DomainError("gen_gaussian_operator: need m >= 1");
  Rng rng(seed, "operator");
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<SymMatrix> mats;
  mats.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) mats.emplace_back(rng.normal_matrix(n, n, sd));
  return MeasurementOperator(mats);
}

MeasurementOperator gen_certified_operator(Index n, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("gen_certified_operator: need 0 <= delta < 1");
  const Index d = n * (n + 1) / 2;
  Rng rng(seed, "certified_operator");
  const SymMatrix s(rng.normal_matrix(d, d));
  const Spectrum ss = eigh(s);
  const double norm = std::max(std::abs(ss.values(0)), std::abs(ss.values(d - 1)));
  // Eigenvalues of H = I + delta S / ||S|| are 1 + delta lambda_k / ||S||.
  Vector root(d);
  for (Index k = 0; k < d; ++k) root(k) = std::sqrt(1.0 + delta * ss.values(k) / norm);
  const Matrix h_half = ss.vectors * root.asDiagonal() * ss.vectors.transpose();
  const Matrix sym_h_half = (h_half + h_half.transpose()) * 0.5;
  return MeasurementOperator(sym_h_half * sym_basis(n).transpose(), n);
}

SymMatrix truncate_rank(const SymMatrix& m, Index k) {
  const Spectrum s = eigh(m);
  const Index n = m.n();
  if (k >= n) return m;
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(s.values(a)) > std::abs(s.values(b)); });
  Matrix out = Matrix::Zero(n, n);
  for (Index t = 0; t < k; ++t) {
    const Index i = order[static_cast<std::size_t>(t)];
    out += s.values(i) * s.vectors.col(i) * s.vectors.col(i).transpose();
  }
  return SymMatrix(out);
}

namespace {

SymMatrix gram_apply(const MeasurementOperator& op, const SymMatrix& n) {
  return op.adjoint(op.apply(n.mat()));
}

}  // namespace

RipEstimate estimate_rip(const MeasurementOperator& op, Index rank_cap, int samples, int refine_iters,
                         std::uint64_t seed) {
  const Index n = op.n();
  if (rank_cap < 1 || rank_cap > n) throw DomainError("estimate_rip: need 1 <= rank_cap <= n");
  Rng rng(seed, "rip");
  RipEstimate est;
  est.q_min = std::numeric_limits<double>::infinity();
  est.q_max = -std::numeric_limits<double>::infinity();
  const double shift = op.rho();
  auto record = [&](const SymMatrix& probe) {
    const double q = op.apply(probe.mat()).squaredNorm();
    est.q_min = std::min(est.q_min, q);
    est.q_max = std::max(est.q_max, q);
    est.delta_hat = std::max(est.delta_hat, std::abs(q - 1.0));
  };
  auto normalized = [](const SymMatrix& m) {
    const double f = m.frobenius();
    return f > 0 ? m * (1.0 / f) : m;
  };
  for (int s = 0; s < samples; ++s) {
    const SymMatrix start = normalized(truncate_rank(SymMatrix(rng.normal_matrix(n, n)), rank_cap));
    if (start.frobenius() == 0.0) continue;
    record(start);
    SymMatrix up = start;
    SymMatrix down = start;
    for (int it = 0; it < refine_iters; ++it) {
      up = normalized(truncate_rank(gram_apply(op, up), rank_cap));
      down = normalized(truncate_rank(down * shift - gram_apply(op, down), rank_cap));
      if (up.frobenius() > 0) record(up);
      if (down.frobenius() > 0) record(down);
    }
    ++est.probes;
  }
  if (est.probes == 0) {
    est.q_min = est.q_max = 1.0;
  }
  return est;
}

MeasurementOperator center_restricted_quotients(const MeasurementOperator& op, const RipEstimate& est) {
  const double mid = 0.5 * (est.q_min + est.q_max);
  if (!(mid > 0.0)) throw NumericalError("center_restricted_quotients: nonpositive quotient midpoint");
  return MeasurementOperator(op.stacked() / std::sqrt(mid), op.n());
}

NoiseVector sample_noise(Index m, double sigma, NoiseFamily family, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("sample_noise: need sigma >= 0");
  if (m < 1) throw DomainError("sample_noise: need m >= 1");
  Rng rng(seed, "noise");
  NoiseVector w;
  w.sigma = sigma;
  w.family = family;
  w.values = Vector::Zero(m);
  const double scale = sigma / std::sqrt(static_cast<double>(m));
  if (sigma > 0.0) {
    for (Index i = 0; i < m; ++i) {
      switch (family) {
        case NoiseFamily::gaussian:
          w.values(i) = scale * rng.normal();
          break;
        case NoiseFamily::uniform:
          w.values(i) = scale * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
          break;
        case NoiseFamily::rademacher:
          w.values(i) = scale * rng.sign();
          break;
      }
    }
  }
  w.q = w.values.norm();
  return w;
}

double noise_tail_epsilon(double p, Index m, double sigma) {
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw DomainError("noise_tail_epsilon: need 0 <= p < 1 (the tail bound cannot certify probability 1)");
  }
  if (!(sigma >= 0.0)) throw DomainError("noise_tail_epsilon: need sigma >= 0");
  return 4.0 * sigma * std::sqrt(static_cast<double>(m) * std::log(2.0 / (1.0 - p)));
}

double noise_tail_probability(double epsilon, Index m, double sigma) {
  if (sigma == 0.0) return 1.0;
  const double p = 1.0 - 2.0 * std::exp(-epsilon * epsilon / (16.0 * static_cast<double>(m) * sigma * sigma));
  return std::max(p, 0.0);
}

Instance generate_instance(const InstanceConfig& cfg) {
  if (cfg.r < 1 || cfg.r > cfg.n) throw DomainError("instance: need 1 <= r <= n");
  Instance inst;
  inst.n = cfg.n;
  inst.r = cfg.r;
  inst.m_star = gen_ground_truth(cfg.n, cfg.r, cfg.lambda1, cfg.lambda_r, cfg.seed);
  const Index rank_cap = std::min(2 * cfg.r, cfg.n);
  if (cfg.certified_delta) {
    const Index d = cfg.n * (cfg.n + 1) / 2;
    if (cfg.m && *cfg.m != d) {
      std::ostringstream os;
      os << "certified operators have m = n(n+1)/2 = " << d << " measurements; got m = " << *cfg.m;
      throw DomainError(os.str());
    }
    inst.op = std::make_shared<MeasurementOperator>(gen_certified_operator(cfg.n, *cfg.certified_delta, cfg.seed));
    inst.meta.delta_certified = cfg.certified_delta;
    inst.meta.delta_hat = estimate_rip(*inst.op, rank_cap, cfg.rip_samples, cfg.rip_refine, cfg.seed).delta_hat;
  } else {
    const Index m = cfg.m.value_or(50 * cfg.n * cfg.r);
    const MeasurementOperator raw = gen_gaussian_operator(cfg.n, m, cfg.seed);
    const RipEstimate first = estimate_rip(raw, rank_cap, cfg.rip_samples, cfg.rip_refine, cfg.seed);
    inst.op = std::make_shared<MeasurementOperator>(center_restricted_quotients(raw, first));
    inst.meta.delta_hat = estimate_rip(*inst.op, rank_cap, cfg.rip_samples, cfg.rip_refine, cfg.seed).delta_hat;
  }
  inst.m = inst.op->m();
  inst.noise = sample_noise(inst.m, cfg.sigma, cfg.family, cfg.seed);
  inst.b_tilde = inst.op->apply(inst.m_star.mat()) + inst.noise.values;
  inst.meta.seed = cfg.seed;
  inst.meta.sigma = cfg.sigma;
  inst.meta.family = cfg.family;
  inst.meta.lambda1 = cfg.lambda1;
  inst.meta.lambda_r = cfg.lambda_r;
  return inst;
}

}  // namespace lrno
