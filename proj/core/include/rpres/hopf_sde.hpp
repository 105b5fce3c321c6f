#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace rpres {

using State = std::array<double, 2>;

/// Coefficients of the stochastic Hopf normal form
///   dz = ((delta + i gamma) z - (1 + i beta) |z|^2 z) dt + epsilon dW
/// with z = x + i y and independent unit Wiener increments on x and y.
struct HopfParams {
  double delta = 0.0;   // linear stability
  double gamma = 1.0;   // base angular frequency
  double beta = 0.0;    // twist (shear) factor
  double epsilon = 0.0; // noise intensity

  void validate() const;
};

/// Integration controls for simulate(). The sampling interval of the
/// resulting trajectory is dt * sample_stride.
struct SimConfig {
  double dt = 1e-2;
  std::int64_t n_samples = 1'000'000;
  std::int64_t sample_stride = 10;
  // Unset means 10% of the integration steps that produce stored samples.
  std::optional<std::int64_t> spinup_steps;
  std::uint64_t seed = 1;
  State initial_state{0.1, 0.0};
  double blowup_radius = 1e6;

  void validate() const;
  std::int64_t effective_spinup() const;
  double sampling_interval() const { return dt * static_cast<double>(sample_stride); }
};

struct Trajectory {
  double sampling_interval = 1.0;
  std::vector<State> states;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
};

State drift(const HopfParams& p, const State& s);
Eigen::Matrix2d jacobian(const HopfParams& p, const State& s);

/// Euler-Maruyama path of the Cartesian SDE.
///
/// Noise comes from std::mt19937_64 seeded with config.seed; each pair of
/// Gaussian increments is one Box-Muller transform of two 53-bit uniforms
/// (u1 in (0,1], u2 in [0,1)), giving (sqrt(-2 ln u1) cos 2 pi u2,
/// sqrt(-2 ln u1) sin 2 pi u2) for (x, y). Both choices are fixed so equal
/// seeds reproduce the path bit for bit.
///
/// Throws Error(Divergence) when |state| exceeds config.blowup_radius.
Trajectory simulate(const HopfParams& params, const SimConfig& config);

} // namespace rpres
