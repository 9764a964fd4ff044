#pragma once

#include <cstdint>

#include "hyperdt/cart.hpp"
#include "hyperdt/geometry.hpp"

// Synthetic benchmarks: mixtures of wrapped Gaussians on the hyperboloid.
// Class means are exponential-map images of tangent Gaussians at the
// origin; each sample draws a tangent vector at the origin, parallel
// transports it to its class mean, and exponentiates there. Regression
// targets apply a per-cluster linear map to the origin-tangent draw.
//
// All randomness flows through an explicit Box-Muller generator over
// SplitMix64 so that outputs are bit-reproducible per seed.

namespace hyperdt::datagen {

struct MixtureConfig {
  int n_classes = 2;
  int n_samples = 100;
  int dim = 2;
  double K = -1.0;
  double mean_scale = 1.0;     // stddev of tangent draws for class means
  double cluster_scale = 0.5;  // stddev of per-point tangent draws
  std::uint64_t seed = 0;
  cart::Task task = cart::Task::classification;
  double regression_noise = 0.1;
};

struct Dataset {
  cart::Matrix X;                 // Lorentz rows, d+1 columns
  std::vector<double> y;          // class ids or regression targets
  std::vector<int> true_class;    // generating cluster of each row
};

// Deterministic normal sampler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform();  // in [0, 1)
  double normal();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Exponential map at the hyperboloid origin (1/sqrt(-K), 0, ..., 0).
geom::Vec exp_origin(std::span<const double> z, geom::Curvature K);

// Exponential map at an arbitrary base point; w is a tangent at mu.
geom::Vec exp_at(std::span<const double> mu, std::span<const double> w,
                 geom::Curvature K);

// Parallel transport of an origin tangent (given by its d spacelike
// components) along the geodesic to mu. Output is a (d+1)-vector that is
// Minkowski-orthogonal to mu and preserves the Minkowski norm.
geom::Vec parallel_transport_origin_to(std::span<const double> mu,
                                       std::span<const double> z,
                                       geom::Curvature K);

Dataset sample_mixture(const MixtureConfig& cfg);

}  // namespace hyperdt::datagen
