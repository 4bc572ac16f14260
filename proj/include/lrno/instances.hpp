#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "lrno/linalg.hpp"
#include "lrno/objectives.hpp"

namespace lrno {

enum class NoiseFamily { gaussian, uniform, rademacher };

const char* to_string(NoiseFamily f);
NoiseFamily parse_noise_family(const std::string& s);

struct NoiseVector {
  Vector values;
  double q = 0.0;      // ||values||_2
  double sigma = 0.0;  // generating sub-Gaussian parameter
  NoiseFamily family = NoiseFamily::gaussian;
};

struct InstanceMeta {
  std::uint64_t seed = 0;
  double sigma = 0.0;
  NoiseFamily family = NoiseFamily::gaussian;
  double delta_hat = 0.0;
  std::optional<double> delta_certified;
  double lambda1 = 1.0;
  double lambda_r = 1.0;
};

// A sensing problem b = A(M*) + w together with its provenance.
struct Instance {
  Index n = 0;
  Index r = 0;
  Index m = 0;
  SymMatrix m_star;
  std::shared_ptr<const MeasurementOperator> op;
  NoiseVector noise;
  Vector b_tilde;
  InstanceMeta meta;

  // f(M, w) with the observed b_tilde.
  std::shared_ptr<SensingObjective> objective() const;
  // f(M, 0): observations A(M*) without noise.
  std::shared_ptr<SensingObjective> clean_objective() const;
  // Content hash of the serialized instance (hex).
  std::string fingerprint() const;
};

// M* = Q diag(lambda) Q^T, lambda linearly spaced from lambda1 to lambda_r
// over r slots, Q orthogonal from the QR of a seeded Gaussian matrix.
SymMatrix gen_ground_truth(Index n, Index r, double lambda1, double lambda_r, std::uint64_t seed);

// A_i = (G_i + G_i^T)/2 with G_i entries N(0, 1/m).
MeasurementOperator gen_gaussian_operator(Index n, Index m, std::uint64_t seed);

// Operator with stacked matrix (I_d + delta S)^{1/2} B^T on the symmetric
// subspace (d = n(n+1)/2 measurements, ||S||_2 = 1). For every symmetric N:
// (1 - delta)||N||^2 <= ||A(N)||^2 <= (1 + delta)||N||^2.
MeasurementOperator gen_certified_operator(Index n, double delta, std::uint64_t seed);

struct RipEstimate {
  double delta_hat = 0.0;  // max |q - 1| over all probes visited
  double q_min = 1.0;      // smallest restricted Rayleigh quotient seen
  double q_max = 1.0;      // largest restricted Rayleigh quotient seen
  int probes = 0;
};

// Sampled lower bound on delta_{2r,2r}: random rank <= rank_cap unit probes,
// each refined by projected power iteration towards the largest and the
// smallest value of ||A(N)||^2.
RipEstimate estimate_rip(const MeasurementOperator& op, Index rank_cap, int samples, int refine_iters,
                         std::uint64_t seed);

// Best rank-k approximation of a symmetric matrix (largest |lambda|).
SymMatrix truncate_rank(const SymMatrix& m, Index k);

// Rescale so the sampled restricted quotients are centered at 1.
MeasurementOperator center_restricted_quotients(const MeasurementOperator& op, const RipEstimate& est);

// gaussian: N(0, sigma^2/m); uniform: U[-sigma sqrt(3/m), sigma sqrt(3/m)];
// rademacher: +-sigma/sqrt(m).
NoiseVector sample_noise(Index m, double sigma, NoiseFamily family, std::uint64_t seed);

// epsilon with 1 - 2 exp(-eps^2 / (16 m sigma^2)) = p.
double noise_tail_epsilon(double p, Index m, double sigma);
// The forward tail bound, clamped below at 0.
double noise_tail_probability(double epsilon, Index m, double sigma);

struct InstanceConfig {
  Index n = 8;
  Index r = 2;
  std::optional<Index> m;  // defaults to 50 n r for Gaussian ensembles
  double sigma = 0.0;
  NoiseFamily family = NoiseFamily::gaussian;
  std::uint64_t seed = 1;
  double lambda1 = 1.5;
  double lambda_r = 1.0;
  std::optional<double> certified_delta;
  int rip_samples = 64;
  int rip_refine = 20;
};

Instance generate_instance(const InstanceConfig& cfg);

}  // namespace lrno
