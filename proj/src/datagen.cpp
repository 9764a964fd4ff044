#include "hyperdt/datagen.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperdt::datagen {

std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

geom::Vec exp_origin(std::span<const double> z, geom::Curvature K) {
  const double sk = std::sqrt(-K.K);
  double norm2 = 0.0;
  for (double x : z) norm2 += x * x;
  const double norm = std::sqrt(norm2);
  geom::Vec out(z.size() + 1, 0.0);
  if (norm == 0.0) {
    out[0] = 1.0 / sk;
    return out;
  }
  const double r = sk * norm;
  out[0] = std::cosh(r) / sk;
  const double scale = std::sinh(r) / (sk * norm);
  for (std::size_t i = 0; i < z.size(); ++i) out[i + 1] = scale * z[i];
  return out;
}

geom::Vec exp_at(std::span<const double> mu, std::span<const double> w,
                 geom::Curvature K) {
  const double sk = std::sqrt(-K.K);
  const double wn2 = geom::minkowski_inner(w, w);
  geom::Vec out(mu.begin(), mu.end());
  if (wn2 <= 0.0) return out;  // zero (or numerically degenerate) tangent
  const double wn = std::sqrt(wn2);
  const double r = sk * wn;
  const double a = std::cosh(r);
  const double b = std::sinh(r) / (sk * wn);
  for (std::size_t i = 0; i < mu.size(); ++i) out[i] = a * mu[i] + b * w[i];
  return out;
}

geom::Vec parallel_transport_origin_to(std::span<const double> mu,
                                       std::span<const double> z,
                                       geom::Curvature K) {
  const double sk = std::sqrt(-K.K);
  geom::Vec origin(mu.size(), 0.0);
  origin[0] = 1.0 / sk;
  geom::Vec v(mu.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) v[i + 1] = z[i];

  const double c = K.K * geom::minkowski_inner(origin, mu);  // cosh of the distance
  const double mv = geom::minkowski_inner(mu, v);
  const double scale = K.K * mv / (1.0 + c);
  geom::Vec out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    out[i] = v[i] - scale * (origin[i] + mu[i]);
  return out;
}

Dataset sample_mixture(const MixtureConfig& cfg) {
  if (cfg.n_classes < 1 || cfg.n_samples < 1 || cfg.dim < 1)
    throw std::invalid_argument("sample_mixture: invalid configuration");
  if (!(cfg.mean_scale > 0.0) || !(cfg.cluster_scale > 0.0))
    throw std::invalid_argument("sample_mixture: scales must be positive");
  const geom::Curvature K(cfg.K);
  const int d = cfg.dim;
  Rng rng(cfg.seed);

  std::vector<geom::Vec> means;
  for (int k = 0; k < cfg.n_classes; ++k) {
    geom::Vec z(d);
    for (double& x : z) x = cfg.mean_scale * rng.normal();
    means.push_back(exp_origin(z, K));
  }

  // Per-cluster linear maps for regression targets.
  std::vector<geom::Vec> slopes(cfg.n_classes);
  std::vector<double> intercepts(cfg.n_classes, 0.0);
  if (cfg.task == cart::Task::regression) {
    for (int k = 0; k < cfg.n_classes; ++k) {
      slopes[k].resize(d);
      for (double& w : slopes[k]) w = rng.normal();
      intercepts[k] = rng.normal();
    }
  }

  Dataset data;
  data.X = cart::Matrix(cfg.n_samples, d + 1);
  data.y.resize(cfg.n_samples);
  data.true_class.resize(cfg.n_samples);
  for (int i = 0; i < cfg.n_samples; ++i) {
    const int k = i % cfg.n_classes;  // balanced assignment
    geom::Vec z(d);
    for (double& x : z) x = cfg.cluster_scale * rng.normal();
    const geom::Vec w = parallel_transport_origin_to(means[k], z, K);
    const geom::Vec p = exp_at(means[k], w, K);
    for (int c = 0; c <= d; ++c) data.X(i, c) = p[c];
    data.true_class[i] = k;
    if (cfg.task == cart::Task::classification) {
      data.y[i] = k;
    } else {
      double t = intercepts[k];
      for (int j = 0; j < d; ++j) t += slopes[k][j] * z[j];
      data.y[i] = t + cfg.regression_noise * rng.normal();
    }
  }
  return data;
}

}  // namespace hyperdt::datagen
