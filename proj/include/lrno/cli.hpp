#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrno/instances.hpp"
#include "lrno/solvers.hpp"
#include "lrno/verify.hpp"

namespace lrno::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIo = 3 };

// Runs one subcommand; args exclude the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

struct Fig2Config {
  std::uint64_t seed = 7;
  long max_iters = 3000;
  long mw_iters = 200000;
  long record_every = 1;
  long window_start = 500;
  long window_end = 2500;
  int threads = 1;
};

struct Fig2Result {
  Instance instance;
  MwResult mw;
  std::vector<double> etas;  // large step first
  std::vector<Trace> traces;
  std::vector<RateFit> fits;
  double plateau_ratio = 0.0;  // |large rate| / |small rate|
};

// n = 40, m = 190, r = 5, lambda = (1.5 .. 1), sigma = 0.05; both step sizes
// from the same random initialization, distances to M^w.
Fig2Result run_fig2(const Fig2Config& cfg);

// Thread count from LRNO_THREADS, else 1.
int default_threads();

}  // namespace lrno::cli
