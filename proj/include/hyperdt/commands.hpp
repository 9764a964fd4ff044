#pragma once

#include <iosfwd>

#include "hyperdt/datagen.hpp"
#include "hyperdt/io.hpp"

// Command layer behind the hyperdt binary. Everything here is callable
// in-process so the test suite exercises the same code paths as the CLI.
//
// Exit codes: 0 success, 2 usage error, 1 data error.

namespace hyperdt::cli {

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

// One row of the compare report, plus the tie-free certificate.
struct CompareRow {
  std::uint64_t seed = 0;
  int nodes = 0;       // internal node pairs examined in lockstep
  int exact = 0;       // same feature, |t - cot theta| < 1e-9
  int tie_equiv = 0;   // different split, chosen gains within 1e-4
  int mismatch = 0;
  double train_agree = 0.0;
  double test_agree = 0.0;
  bool tie_free = false;  // unique gain maximum with margin > 1e-4 everywhere
};

struct CompareConfig {
  datagen::MixtureConfig data;  // data.seed is the per-run seed
  int depth_limit = 3;
  int test_samples = 0;  // 0: same size as the training set
};

CompareRow compare_seed(const CompareConfig& cfg);

// Median wall-clock seconds to fit one depth-limited tree.
double time_fit(io::Backend backend, const cart::Matrix& X_lorentz,
                std::span<const double> y, int depth_limit, int repeats);

}  // namespace hyperdt::cli
