#include "rppg/hr.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>

#include "rppg/errors.hpp"

namespace rppg {

namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex planner_mutex;
}  // namespace

std::size_t spectral_nfft(std::size_t n, std::size_t nfft_min) {
  const std::size_t target = std::max(nfft_min, 8 * n);
  std::size_t nfft = 1;
  while (nfft < target) nfft <<= 1;
  return nfft;
}

std::vector<double> periodogram(std::span<const double> x, std::size_t nfft) {
  if (nfft < x.size() || nfft == 0) throw InvalidArgument("FFT length shorter than the signal");
  std::vector<double> in(nfft, 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  std::vector<std::complex<double>> out(nfft / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  std::vector<double> power(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) power[k] = std::norm(out[k]);
  return power;
}

HrEstimate estimate_hr_spectral(const Signal1D& s, const BandHz& band, std::size_t nfft_min) {
  const double fs = s.fs();
  if (static_cast<double>(s.size()) < 2.0 * fs) throw InvalidArgument("HR estimation needs at least 2 s of signal");
  if (!(band.lo >= 0.0) || !(band.hi > band.lo)) throw InvalidArgument("HR band must satisfy 0 <= lo < hi");
  const double hi = std::min(band.hi, fs / 2.0);

  const std::size_t nfft = spectral_nfft(s.size(), nfft_min);
  std::vector<double> centered(s.values());
  const double m = mean(centered);
  for (double& v : centered) v -= m;
  const std::vector<double> power = periodogram(centered, nfft);
  const double df = fs / static_cast<double>(nfft);

  std::size_t best = power.size();
  std::vector<double> in_band;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double f = static_cast<double>(k) * df;
    if (f < band.lo || f > hi) continue;
    in_band.push_back(power[k]);
    if (best == power.size() || power[k] > power[best]) best = k;
  }
  if (in_band.empty()) throw InvalidArgument("HR band contains no frequency bin");

  auto mid = in_band.begin() + static_cast<std::ptrdiff_t>(in_band.size() / 2);
  std::nth_element(in_band.begin(), mid, in_band.end());
  const double median = *mid;

  HrEstimate est;
  est.bpm = 60.0 * static_cast<double>(best) * df;
  est.method = HrMethod::spectral;
  est.band = BandHz{band.lo, hi};
  est.resolution_bpm = 60.0 * df;
  est.low_confidence = power[best] < 2.0 * median;
  return est;
}

std::vector<std::size_t> detect_peaks(const Signal1D& s, double min_dist_s, double min_prominence_sd) {
  if (!(min_dist_s >= 0.0) || !(min_prominence_sd >= 0.0)) throw InvalidArgument("peak options must be non-negative");
  const auto x = s.samples();
  const std::size_t n = x.size();
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < n;) {
    if (x[i] > x[i - 1]) {
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) cand.push_back((i + j) / 2);
      i = j + 1;
    } else {
      ++i;
    }
  }

  const double min_prom = min_prominence_sd * stddev(x);
  std::vector<std::size_t> prominent;
  for (const std::size_t p : cand) {
    double left_min = x[p];
    for (std::size_t k = p; k-- > 0;) {
      if (x[k] > x[p]) break;
      left_min = std::min(left_min, x[k]);
    }
    double right_min = x[p];
    for (std::size_t k = p + 1; k < n; ++k) {
      if (x[k] > x[p]) break;
      right_min = std::min(right_min, x[k]);
    }
    if (x[p] - std::max(left_min, right_min) >= min_prom) prominent.push_back(p);
  }

  const double dist = min_dist_s * s.fs();
  std::vector<std::size_t> order(prominent.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[prominent[a]] > x[prominent[b]];
  });
  std::vector<bool> removed(prominent.size(), false);
  std::vector<std::size_t> kept;
  for (const std::size_t o : order) {
    if (removed[o]) continue;
    kept.push_back(prominent[o]);
    for (std::size_t q = 0; q < prominent.size(); ++q) {
      const double gap = std::abs(static_cast<double>(prominent[q]) - static_cast<double>(prominent[o]));
      if (q != o && gap < dist) removed[q] = true;
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

HrEstimate hr_from_peaks(std::span<const std::size_t> peaks, double fs) {
  if (peaks.size() < 2) throw InsufficientPeaks("need at least 2 peaks, found " + std::to_string(peaks.size()));
  if (!(fs > 0.0)) throw InvalidArgument("sample rate must be positive");
  const double span = static_cast<double>(peaks.back()) - static_cast<double>(peaks.front());
  if (!(span > 0.0)) throw InsufficientPeaks("peaks do not span any time");
  HrEstimate est;
  est.bpm = 60.0 * static_cast<double>(peaks.size() - 1) * fs / span;
  est.method = HrMethod::peaks;
  est.resolution_bpm = 0.0;
  return est;
}

}  // namespace rppg
