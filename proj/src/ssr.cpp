#include "rppg/ssr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rppg/errors.hpp"

namespace rppg {

FrameEigen eigen_symmetric3(const std::array<double, 9>& c) {
  double a[3][3];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = 0.5 * (c[3 * i + j] + c[3 * j + i]);

  double norm = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) norm += a[i][j] * a[i][j];
  norm = std::sqrt(norm);

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = std::sqrt(a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]);
    if (off <= 1e-17 * norm || off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = cs * akp - sn * akq;
          a[k][q] = sn * akp + cs * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = cs * apk - sn * aqk;
          a[q][k] = sn * apk + cs * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = cs * vkp - sn * vkq;
          v[k][q] = sn * vkp + cs * vkq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
  FrameEigen e;
  for (int k = 0; k < 3; ++k) {
    const int src = order[k];
    e.values[k] = std::max(0.0, a[src][src]);
    for (int r = 0; r < 3; ++r) e.vectors[k][r] = v[r][src];
  }
  canonicalize_signs(e);
  return e;
}

void canonicalize_signs(FrameEigen& e) {
  for (auto& u : e.vectors) {
    for (double x : u) {
      if (std::abs(x) > 1e-12) {
        if (x < 0.0)
          for (double& y : u) y = -y;
        break;
      }
    }
  }
}

std::array<double, 9> rgb_correlation(std::span<const Rgb> pixels) {
  if (pixels.size() < 3) throw InvalidArgument("correlation matrix needs at least 3 pixels");
  std::uint64_t s[6] = {};  // rr rg rb gg gb bb
  for (const Rgb& p : pixels) {
    const std::uint64_t r = p.r, g = p.g, b = p.b;
    s[0] += r * r;
    s[1] += r * g;
    s[2] += r * b;
    s[3] += g * g;
    s[4] += g * b;
    s[5] += b * b;
  }
  const auto n = static_cast<double>(pixels.size());
  const double rr = s[0] / n, rg = s[1] / n, rb = s[2] / n, gg = s[3] / n, gb = s[4] / n, bb = s[5] / n;
  return {rr, rg, rb, rg, gg, gb, rb, gb, bb};
}

std::array<double, 9> rgb_correlation(std::span<const std::array<double, 3>> rows) {
  if (rows.size() < 3) throw InvalidArgument("correlation matrix needs at least 3 pixels");
  std::array<double, 9> c{};
  for (const auto& v : rows)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) c[3 * i + j] += v[i] * v[j];
  const auto n = static_cast<double>(rows.size());
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) c[3 * j + i] = c[3 * i + j] /= n;
  return c;
}

namespace {

FrameEigen checked(const FrameEigen& e) {
  if (!(e.values[0] > 0.0)) throw NumericDegeneracy("frame correlation matrix is zero");
  return e;
}

}  // namespace

FrameEigen frame_eigen(std::span<const Rgb> pixels) { return checked(eigen_symmetric3(rgb_correlation(pixels))); }

FrameEigen frame_eigen(std::span<const std::array<double, 3>> rows) {
  return checked(eigen_symmetric3(rgb_correlation(rows)));
}

std::size_t SsrParams::resolved_window(double fps) const {
  std::size_t l = window_l;
  if (l == 0) l = static_cast<std::size_t>(std::llround(fps));
  if (l % 2 != 0) ++l;
  if (l < 2) throw InvalidArgument("SSR window must span at least 2 frames");
  return l;
}

namespace {

double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

PulseSignal ssr_pulse(std::span<const FrameEigen> frames, double fps, const SsrParams& params) {
  const std::size_t n = frames.size();
  if (n == 0) throw InvalidArgument("SSR needs at least one frame");
  if (!(fps > 0.0)) throw InvalidArgument("SSR frame rate must be positive");
  const std::size_t len = params.resolved_window(fps);
  if (len > n) throw InvalidArgument("sequence shorter than one SSR window");

  const auto starts = analysis_window_starts(n, len);
  std::vector<std::vector<double>> blocks;
  std::vector<std::size_t> offsets;
  std::size_t skipped = 0;
  for (const std::size_t tau : starts) {
    const FrameEigen& ref = frames[tau];
    const double l1 = ref.values[0], l2 = ref.values[1], l3 = ref.values[2];
    if (!(l1 > 0.0) || l2 <= params.degeneracy_ratio * l1 || l3 <= params.degeneracy_ratio * l1) {
      ++skipped;
      continue;
    }
    const auto& u2 = ref.vectors[1];
    const auto& u3 = ref.vectors[2];
    std::vector<double> c0(len), c1(len);
    for (std::size_t i = 0; i < len; ++i) {
      const FrameEigen& cur = frames[tau + i];
      const double s1 = std::sqrt(cur.values[0] / l2) * dot(cur.vectors[0], u2);
      const double s2 = std::sqrt(cur.values[0] / l3) * dot(cur.vectors[0], u3);
      c0[i] = s1 * u2[0] + s2 * u3[0];
      c1[i] = s1 * u2[1] + s2 * u3[1];
    }
    const double sd0 = stddev(c0), sd1 = stddev(c1);
    const double ratio = sd1 > 0.0 ? sd0 / sd1 : 0.0;
    std::vector<double> p(len);
    for (std::size_t i = 0; i < len; ++i) p[i] = c0[i] - ratio * c1[i];
    const double mp = mean(p);
    for (double& x : p) x -= mp;
    blocks.push_back(std::move(p));
    offsets.push_back(tau);
  }
  if (blocks.empty()) throw DegenerateSubspace("every SSR window has a rank-deficient reference subspace");

  std::vector<double> out = overlap_add(blocks, offsets, n);
  const double mo = mean(out);
  for (double& x : out) x -= mo;
  return PulseSignal{Signal1D(std::move(out), fps), Algorithm::ssr, 0.0, 0.0, skipped};
}

std::vector<FrameEigen> frame_eigens(const FrameSequence& seq, const RoiTrack& roi, const PixelSelection& selection,
                                     double* fallback_fraction) {
  if (!roi.covers_from_start()) throw InvalidArgument("ROI track does not cover frame 0");
  std::vector<FrameEigen> out;
  out.reserve(seq.frame_count());
  std::size_t fallbacks = 0;
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    const FramePixels px = select_pixels(seq.frame(f), roi.at(f), selection);
    if (px.fallback) ++fallbacks;
    out.push_back(frame_eigen(px.pixels));
  }
  if (fallback_fraction)
    *fallback_fraction = out.empty() ? 0.0 : static_cast<double>(fallbacks) / static_cast<double>(out.size());
  return out;
}

}  // namespace rppg
