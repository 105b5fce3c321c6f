#include "rpres/hopf_sde.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rpres/error.hpp"

namespace rpres {

namespace {

bool finite(double v) { return std::isfinite(v); }

// 53-bit uniforms from the top bits of one 64-bit draw.
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

struct GaussianPairSource {
  explicit GaussianPairSource(std::uint64_t seed) : engine(seed) {}

  std::array<double, 2> next() {
    const double u1 = static_cast<double>((engine() >> 11) + 1) * kTwoPow53Inv;
    const double u2 = static_cast<double>(engine() >> 11) * kTwoPow53Inv;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::mt19937_64 engine;
};

} // namespace

void HopfParams::validate() const {
  if (!finite(delta) || !finite(gamma) || !finite(beta) || !finite(epsilon))
    fail(ErrorKind::InvalidArgument, "HopfParams: all coefficients must be finite");
  if (epsilon < 0.0)
    fail(ErrorKind::InvalidArgument, "HopfParams: epsilon must be >= 0");
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !finite(dt))
    fail(ErrorKind::InvalidArgument, "SimConfig: dt must be positive and finite");
  if (n_samples <= 0)
    fail(ErrorKind::InvalidArgument, "SimConfig: n_samples must be > 0");
  if (sample_stride < 1)
    fail(ErrorKind::InvalidArgument, "SimConfig: sample_stride must be >= 1");
  if (spinup_steps && *spinup_steps < 0)
    fail(ErrorKind::InvalidArgument, "SimConfig: spinup_steps must be >= 0");
  if (!finite(initial_state[0]) || !finite(initial_state[1]))
    fail(ErrorKind::InvalidArgument, "SimConfig: initial_state must be finite");
  if (!(blowup_radius > 0.0))
    fail(ErrorKind::InvalidArgument, "SimConfig: blowup_radius must be positive");
}

std::int64_t SimConfig::effective_spinup() const {
  if (spinup_steps) return *spinup_steps;
  return (n_samples * sample_stride) / 10;
}

State drift(const HopfParams& p, const State& s) {
  const double x = s[0];
  const double y = s[1];
  const double r2 = x * x + y * y;
  return {p.delta * x - p.gamma * y - r2 * (x - p.beta * y),
          p.gamma * x + p.delta * y - r2 * (p.beta * x + y)};
}

Eigen::Matrix2d jacobian(const HopfParams& p, const State& s) {
  const double x = s[0];
  const double y = s[1];
  const double r2 = x * x + y * y;
  Eigen::Matrix2d j;
  j(0, 0) = p.delta - r2 - 2.0 * x * x + 2.0 * p.beta * x * y;
  j(0, 1) = -p.gamma + p.beta * r2 - 2.0 * x * y + 2.0 * p.beta * y * y;
  j(1, 0) = p.gamma - p.beta * r2 - 2.0 * p.beta * x * x - 2.0 * x * y;
  j(1, 1) = p.delta - r2 - 2.0 * p.beta * x * y - 2.0 * y * y;
  return j;
}

Trajectory simulate(const HopfParams& params, const SimConfig& config) {
  params.validate();
  config.validate();

  GaussianPairSource noise(config.seed);
  const double dt = config.dt;
  const double noise_scale = params.epsilon * std::sqrt(dt);
  const double blowup2 = config.blowup_radius * config.blowup_radius;

  State state = config.initial_state;
  std::int64_t step_index = 0;
  auto step = [&] {
    const State f = drift(params, state);
    const auto dw = noise.next();
    state[0] += f[0] * dt + noise_scale * dw[0];
    state[1] += f[1] * dt + noise_scale * dw[1];
    ++step_index;
    const double r2 = state[0] * state[0] + state[1] * state[1];
    if (!(r2 <= blowup2))
      fail(ErrorKind::Divergence,
           "simulate: state left the blow-up radius " + std::to_string(config.blowup_radius) +
               " at integration step " + std::to_string(step_index) +
               " (reduce dt or check parameters)");
  };

  for (std::int64_t i = 0; i < config.effective_spinup(); ++i) step();

  Trajectory traj;
  traj.sampling_interval = config.sampling_interval();
  traj.states.reserve(static_cast<std::size_t>(config.n_samples));
  traj.states.push_back(state);
  for (std::int64_t n = 1; n < config.n_samples; ++n) {
    for (std::int64_t k = 0; k < config.sample_stride; ++k) step();
    traj.states.push_back(state);
  }
  return traj;
}

} // namespace rpres
