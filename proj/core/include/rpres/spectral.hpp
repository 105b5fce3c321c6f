#pragma once

#include <span>
#include <string>
#include <vector>

#include "rpres/resonance.hpp"

namespace rpres {

/// Observable evaluated on the kept boxes.
struct ObservableVec {
  std::vector<double> values;
  std::string label;
};

/// Correlation convention: C_{f,g}(t) = E[f(Y_{s+t}) g(Y_s)] - <f>_m <g>_m.
///
/// Weight of resonance j:
///   w_j = (f^T D(m) u_j) (left_j^H D(m) g) / (left_j^H D(m) u_j)
/// where u_j = D(m)^{-1} right_j is the right eigenvector as a function on
/// L^2(m). The zero mode carries <f>_m <g>_m up to estimation error.
/// Throws Error(Normalization) when |left_j^H D(m) u_j| < 1e-14 after
/// normalizing both vectors.
std::vector<cplx> weights(const ObservableVec& f, const ObservableVec& g,
                          std::span<const double> m, const ResonanceSet& set);

struct Series {
  std::vector<double> values;
  double max_imag_residue = 0.0;  // largest |Im| of the complex sums
};

/// C(t) = sum_j w_j exp(lambda_j t) - mean_f mean_g at each t >= 0.
Series reconstruct_correlation(const ResonanceSet& set, std::span<const cplx> w,
                               std::pair<double, double> means, std::span<const double> t_grid);

/// Two-sided density in angular frequency, the Fourier transform
/// (1/2pi) int C(|t|) e^{-i w t} dt of the reconstructed correlation:
///   S(w) = -(1/2pi) sum_j w_j (1 / (lambda_j - i w) + 1 / (lambda_j + i w))
/// over resonances with Re lambda < 0; the zero mode (|lambda| <= 1e-8) is
/// excluded. For real weights each conjugate pair contributes the Lorentzians
///   -(1/pi) w_j Re(lambda_j) / ((w -+ Im lambda_j)^2 + Re(lambda_j)^2).
/// The imaginary part cancels over a conjugate-closed set.
Series reconstruct_psd(const ResonanceSet& set, std::span<const cplx> w,
                       std::span<const double> omega_grid);

/// Biased cross-covariance (1/N) sum_n (x_{n+k} - mean x)(y_n - mean y), k = 0..max_lag.
std::vector<double> sample_correlation(std::span<const double> x, std::span<const double> y,
                                       std::size_t max_lag);

struct Periodogram {
  std::vector<double> freq;  // cycles per unit time
  std::vector<double> psd;   // one-sided, integrates (over freq) to the variance
  std::size_t segments = 0;
};

/// Welch estimate: Hann-windowed segments of length segment_len, overlap
/// given as a fraction in [0, 1), mean removed per segment.
Periodogram sample_psd(std::span<const double> x, std::size_t segment_len, double overlap,
                       double sampling_interval);

} // namespace rpres
