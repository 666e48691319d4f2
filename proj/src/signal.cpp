#include "rppg/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "rppg/errors.hpp"

namespace rppg {

Signal1D::Signal1D(std::vector<double> samples, double fs) : samples_(std::move(samples)), fs_(fs) {
  if (samples_.empty()) throw InvalidArgument("signal must contain at least one sample");
  if (!std::isfinite(fs_) || fs_ <= 0.0) throw InvalidArgument("sampling rate must be finite and positive");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i]))
      throw InvalidArgument("non-finite sample at index " + std::to_string(i));
  }
}

void BandHz::validate(double fs) const {
  if (!(lo > 0.0) || !(lo < hi) || !(hi < fs / 2.0)) {
    throw InvalidArgument("invalid band [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] Hz for sampling rate " + std::to_string(fs) + " Hz");
  }
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("mean of empty sequence");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

Signal1D moving_average(const Signal1D& s, std::size_t window_len) {
  if (window_len == 0 || window_len % 2 == 0)
    throw InvalidArgument("moving average window must be odd and positive");
  if (window_len > s.size()) throw InvalidArgument("moving average window longer than signal");

  const std::size_t n = s.size();
  const std::size_t half = window_len / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    // Deviations from the center sample keep constant input exact.
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += s[k] - s[i];
    out[i] = s[i] + acc / static_cast<double>(hi - lo + 1);
  }
  return Signal1D(std::move(out), s.fs());
}

std::vector<double> design_bandpass_fir(const BandHz& band, double fs, int num_taps) {
  band.validate(fs);
  if (num_taps < 3 || num_taps % 2 == 0) throw InvalidArgument("FIR tap count must be odd and >= 3");

  const double pi = std::numbers::pi;
  const double f_lo = band.lo / fs;
  const double f_hi = band.hi / fs;
  const int mid = (num_taps - 1) / 2;
  auto sinc = [pi](double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); };

  std::vector<double> taps(static_cast<std::size_t>(num_taps));
  // Computed on one side and mirrored so the taps are exactly symmetric.
  for (int k = 0; k <= mid; ++k) {
    const double window = 0.54 + 0.46 * std::cos(2.0 * pi * k / (num_taps - 1));
    const double v = window * (2.0 * f_hi * sinc(2.0 * f_hi * k) - 2.0 * f_lo * sinc(2.0 * f_lo * k));
    taps[static_cast<std::size_t>(mid + k)] = v;
    taps[static_cast<std::size_t>(mid - k)] = v;
  }

  const double f_center = 0.5 * (f_lo + f_hi);
  double gain = taps[static_cast<std::size_t>(mid)];
  for (int k = 1; k <= mid; ++k) gain += 2.0 * taps[static_cast<std::size_t>(mid + k)] * std::cos(2.0 * pi * f_center * k);
  for (double& t : taps) t /= gain;
  return taps;
}

Signal1D bandpass(const Signal1D& s, const BandHz& band, int num_taps) {
  const std::vector<double> taps = design_bandpass_fir(band, s.fs(), num_taps);
  const auto n = static_cast<long>(s.size());
  const long mid = (num_taps - 1) / 2;
  const double m = mean(s.samples());

  // Symmetric extension with period 2n: x[-1] = x[0], x[n] = x[n-1].
  auto at = [&](long idx) {
    long r = idx % (2 * n);
    if (r < 0) r += 2 * n;
    if (r >= n) r = 2 * n - 1 - r;
    return s[static_cast<std::size_t>(r)] - m;
  };

  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = 0; k < num_taps; ++k) acc += taps[static_cast<std::size_t>(k)] * at(i + mid - k);
    out[static_cast<std::size_t>(i)] = acc;
  }
  return Signal1D(std::move(out), s.fs());
}

Signal1D detrend_smoothness_priors(const Signal1D& s, double lambda) {
  const std::size_t n = s.size();
  if (n < 3) throw InvalidArgument("detrending needs at least 3 samples");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");

  // Bands of A = I + lambda^2 D2'D2: diagonal, first and second super-diagonals.
  const double l2 = lambda * lambda;
  std::vector<double> d0(n, 1.0), d1(n, 0.0), d2(n, 0.0);
  constexpr double c[3] = {1.0, -2.0, 1.0};
  for (std::size_t r = 0; r + 2 < n; ++r) {
    for (int a = 0; a < 3; ++a) {
      d0[r + a] += l2 * c[a] * c[a];
      if (a < 2) d1[r + a] += l2 * c[a] * c[a + 1];
    }
    d2[r] += l2 * c[0] * c[2];
  }

  // LDL' with unit lower factor L holding sub-diagonals l1 and l2.
  std::vector<double> diag(n), sub1(n, 0.0), sub2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double di = d0[i];
    if (i >= 1) di -= sub1[i - 1] * sub1[i - 1] * diag[i - 1];
    if (i >= 2) di -= sub2[i - 2] * sub2[i - 2] * diag[i - 2];
    diag[i] = di;
    if (i + 1 < n) {
      double v = d1[i];
      if (i >= 1) v -= sub2[i - 1] * sub1[i - 1] * diag[i - 1];
      sub1[i] = v / di;
    }
    if (i + 2 < n) sub2[i] = d2[i] / di;
  }

  // Solve A r = lambda^2 D2'D2 s for the residual directly. Affine inputs
  // then give r = 0 up to roundoff instead of cancelling s - trend.
  std::vector<double> rhs(n, 0.0);
  for (std::size_t r = 0; r + 2 < n; ++r) {
    const double w = l2 * (s[r] - 2.0 * s[r + 1] + s[r + 2]);
    rhs[r] += w;
    rhs[r + 1] -= 2.0 * w;
    rhs[r + 2] += w;
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = rhs[i];
    if (i >= 1) y -= sub1[i - 1] * x[i - 1];
    if (i >= 2) y -= sub2[i - 2] * x[i - 2];
    x[i] = y;
  }
  for (std::size_t i = 0; i < n; ++i) x[i] /= diag[i];
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) x[k] -= sub1[k] * x[k + 1];
    if (k + 2 < n) x[k] -= sub2[k] * x[k + 2];
  }

  return Signal1D(std::move(x), s.fs());
}

Signal1D nlms_rectify(const Signal1D& target, const Signal1D& reference, const NlmsOptions& opts) {
  if (target.size() != reference.size())
    throw InvalidArgument("NLMS target and reference lengths differ");
  if (target.fs() != reference.fs()) throw InvalidArgument("NLMS target and reference rates differ");
  if (opts.order == 0) throw InvalidArgument("NLMS order must be positive");
  if (!(opts.mu > 0.0 && opts.mu <= 2.0)) throw InvalidArgument("NLMS step must lie in (0, 2]");

  const std::size_t n = target.size();
  std::vector<double> weights(opts.order, 0.0);
  std::vector<double> taps(opts.order, 0.0);  // taps[k] = reference[i - k]
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::rotate(taps.rbegin(), taps.rbegin() + 1, taps.rend());
    taps[0] = reference[i];
    double estimate = 0.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < opts.order; ++k) {
      estimate += weights[k] * taps[k];
      energy += taps[k] * taps[k];
    }
    const double err = target[i] - estimate;
    out[i] = err;
    const double step = opts.mu * err / (opts.eps + energy);
    for (std::size_t k = 0; k < opts.order; ++k) weights[k] += step * taps[k];
  }
  return Signal1D(std::move(out), target.fs());
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("pearson: length mismatch");
  if (a.size() < 2) throw InvalidArgument("pearson: need at least two samples");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelation("pearson: constant input has no correlation");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("rmse: length mismatch");
  if (a.empty()) throw InvalidArgument("rmse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t i = 0; i < len; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
  return w;
}

std::vector<double> overlap_add(const std::vector<std::vector<double>>& blocks,
                                std::span<const std::size_t> offsets, std::size_t total_len) {
  if (blocks.size() != offsets.size()) throw InvalidArgument("overlap_add: one offset per block required");
  std::vector<double> out(total_len, 0.0);
  std::vector<double> window;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    if (offsets[b] + block.size() > total_len) throw InvalidArgument("overlap_add: block exceeds output");
    if (window.size() != block.size()) window = hann_window(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) out[offsets[b] + i] += window[i] * block[i];
  }
  return out;
}

Signal1D hann_overlap_add(const std::vector<std::vector<double>>& blocks, double fs) {
  if (blocks.empty()) throw InvalidArgument("overlap-add needs at least one block");
  const std::size_t len = blocks.front().size();
  if (len == 0 || len % 2 != 0) throw InvalidArgument("overlap-add block length must be even and positive");
  for (const auto& b : blocks) {
    if (b.size() != len) throw InvalidArgument("overlap-add blocks have inconsistent lengths");
  }
  const std::size_t hop = len / 2;
  std::vector<std::size_t> offsets(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) offsets[i] = i * hop;
  return Signal1D(overlap_add(blocks, offsets, (blocks.size() - 1) * hop + len), fs);
}

}  // namespace rppg
