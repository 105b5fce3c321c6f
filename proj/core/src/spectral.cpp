#include "rpres/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "rpres/error.hpp"

namespace rpres {

namespace {
// Resonances this close to 0 are the stationary mode.
constexpr double kZeroModeTol = 1e-8;
} // namespace

std::vector<cplx> weights(const ObservableVec& f, const ObservableVec& g,
                          std::span<const double> m, const ResonanceSet& set) {
  const std::size_t n = m.size();
  if (f.values.size() != n || g.values.size() != n)
    fail(ErrorKind::InvalidArgument, "weights: observable length differs from density");
  std::vector<cplx> w;
  w.reserve(set.resonances.size());
  for (const auto& r : set.resonances) {
    if (static_cast<std::size_t>(r.right.size()) != n || static_cast<std::size_t>(r.left.size()) != n)
      fail(ErrorKind::InvalidArgument, "weights: eigenvector length differs from density");
    const Eigen::VectorXcd u = as_weighted_function(r.right, m);
    cplx fu(0.0), lg(0.0), lu(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      fu += f.values[i] * m[i] * u[k];
      lg += std::conj(r.left[k]) * m[i] * g.values[i];
      lu += std::conj(r.left[k]) * m[i] * u[k];
    }
    const double scale = weighted_norm(r.left, m) * weighted_norm(u, m);
    if (!(scale > 0.0) || std::abs(lu) < 1e-14 * scale)
      fail(ErrorKind::Normalization, "weights: left and right eigenvectors are m-orthogonal");
    w.push_back(fu * lg / lu);
  }
  return w;
}

Series reconstruct_correlation(const ResonanceSet& set, std::span<const cplx> w,
                               std::pair<double, double> means, std::span<const double> t_grid) {
  if (w.size() != set.resonances.size())
    fail(ErrorKind::InvalidArgument, "reconstruct_correlation: one weight per resonance required");
  Series out;
  out.values.reserve(t_grid.size());
  for (const double t : t_grid) {
    if (t < 0.0) fail(ErrorKind::InvalidArgument, "reconstruct_correlation: t must be >= 0");
    cplx acc(0.0);
    for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * std::exp(set.resonances[j].lambda * t);
    out.values.push_back(acc.real() - means.first * means.second);
    out.max_imag_residue = std::max(out.max_imag_residue, std::abs(acc.imag()));
  }
  return out;
}

Series reconstruct_psd(const ResonanceSet& set, std::span<const cplx> w,
                       std::span<const double> omega_grid) {
  if (w.size() != set.resonances.size())
    fail(ErrorKind::InvalidArgument, "reconstruct_psd: one weight per resonance required");
  Series out;
  out.values.reserve(omega_grid.size());
  for (const double omega : omega_grid) {
    cplx acc(0.0);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const cplx lam = set.resonances[j].lambda;
      if (!(lam.real() < 0.0) || std::abs(lam) <= kZeroModeTol) continue;
      const cplx iw(0.0, omega);
      acc += w[j] * (1.0 / (lam - iw) + 1.0 / (lam + iw));
    }
    acc *= -0.5 / std::numbers::pi;
    out.values.push_back(acc.real());
    out.max_imag_residue = std::max(out.max_imag_residue, std::abs(acc.imag()));
  }
  return out;
}

std::vector<double> sample_correlation(std::span<const double> x, std::span<const double> y,
                                       std::size_t max_lag) {
  if (x.size() != y.size()) fail(ErrorKind::Length, "sample_correlation: series lengths differ");
  if (x.size() <= max_lag) fail(ErrorKind::Length, "sample_correlation: series shorter than max_lag + 1");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  std::vector<double> xc(n), yc(n);
  for (std::size_t i = 0; i < n; ++i) {
    xc[i] = x[i] - mx;
    yc[i] = y[i] - my;
  }
  std::vector<double> c(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) acc += xc[i + k] * yc[i];
    c[k] = acc / static_cast<double>(n);
  }
  return c;
}

Periodogram sample_psd(std::span<const double> x, std::size_t segment_len, double overlap,
                       double sampling_interval) {
  if (segment_len < 2 || segment_len > x.size())
    fail(ErrorKind::Length, "sample_psd: segment length must be in [2, series length]");
  if (!(overlap >= 0.0 && overlap < 1.0))
    fail(ErrorKind::InvalidArgument, "sample_psd: overlap must lie in [0, 1)");
  if (!(sampling_interval > 0.0))
    fail(ErrorKind::InvalidArgument, "sample_psd: sampling interval must be positive");

  const std::size_t L = segment_len;
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(L) * (1.0 - overlap))));
  std::vector<double> window(L);
  double wss = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(L));
    wss += window[i] * window[i];
  }

  const std::size_t nbins = L / 2 + 1;
  Periodogram out;
  out.freq.resize(nbins);
  out.psd.assign(nbins, 0.0);
  for (std::size_t k = 0; k < nbins; ++k)
    out.freq[k] = static_cast<double>(k) / (static_cast<double>(L) * sampling_interval);

  Eigen::FFT<double> fft;
  std::vector<double> seg(L);
  std::vector<std::complex<double>> spec;
  for (std::size_t start = 0; start + L <= x.size(); start += step) {
    double mean = 0.0;
    for (std::size_t i = 0; i < L; ++i) mean += x[start + i];
    mean /= static_cast<double>(L);
    for (std::size_t i = 0; i < L; ++i) seg[i] = (x[start + i] - mean) * window[i];
    fft.fwd(spec, seg);
    for (std::size_t k = 0; k < nbins; ++k) {
      const double two = (k == 0 || (L % 2 == 0 && k == L / 2)) ? 1.0 : 2.0;
      out.psd[k] += two * std::norm(spec[k]) * sampling_interval / wss;
    }
    ++out.segments;
  }
  for (auto& p : out.psd) p /= static_cast<double>(out.segments);
  return out;
}

} // namespace rpres
