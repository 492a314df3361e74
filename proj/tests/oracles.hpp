#pragma once

// Slow, obviously-correct reference implementations used by the unit and
// acceptance tests. None of these share code with the library.

#include <algorithm>
#include <bitset>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "digitrec/hmm.hpp"

namespace oracle {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// O(n^2) DFT, full spectrum.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * kPi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

// |DFT|^2 of the zero-padded frame, bins 0..n/2.
inline std::vector<double> power_spectrum(const std::vector<double>& frame, std::size_t n) {
  std::vector<std::complex<double>> x(n, 0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) x[i] = frame[i];
  const auto X = dft(x);
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(X[k]);
  return out;
}

// Orthonormal DCT-II by direct cosine sum.
inline std::vector<double> dct(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::cos(kPi * static_cast<double>(k) * (2.0 * static_cast<double>(t) + 1.0) /
                             (2.0 * static_cast<double>(n)));
    }
    out[k] = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
  }
  return out;
}

inline std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    for (std::size_t i = 0; i + k < x.size(); ++i) r[k] += x[i] * x[i + k];
  }
  return r;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k] * x[k];
    x[i] = acc / a[i][i];
  }
  return x;
}

// Predictor a_1..a_p with x^[n] = -sum a_i x[n-i], from the Toeplitz normal
// equations sum_j a_j r|i-j| = -r_i.
inline std::vector<double> lpc_direct(const std::vector<double>& r) {
  const std::size_t p = r.size() - 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p));
  std::vector<double> b(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) a[i][j] = r[i > j ? i - j : j - i];
    b[i] = -r[i + 1];
  }
  return solve(a, b);
}

// Triangular mel filter weight for one bin frequency, from the definition.
inline double mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double inv_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

inline double triangle_weight(int filter, int num_filters, int sample_rate, double f) {
  const double step = mel(sample_rate / 2.0) / (num_filters + 1);
  const double lo = inv_mel(step * filter);
  const double mid = inv_mel(step * (filter + 1));
  const double hi = inv_mel(step * (filter + 2));
  if (f > lo && f <= mid) return (f - lo) / (mid - lo);
  if (f > mid && f < hi) return (hi - f) / (hi - mid);
  return 0.0;
}

// Sum of filter weights times spectrum, bin by bin.
inline std::vector<double> filterbank(const std::vector<double>& power, int sample_rate, int num_filters) {
  const std::size_t n = (power.size() - 1) * 2;
  std::vector<double> out(static_cast<std::size_t>(num_filters), 0.0);
  for (int j = 0; j < num_filters; ++j) {
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
      out[static_cast<std::size_t>(j)] += triangle_weight(j, num_filters, sample_rate, f) * power[k];
    }
  }
  return out;
}

// Log of a diagonal Gaussian mixture density, term by term.
inline double log_mixture(const digitrec::GaussianMixture& g, const double* x, std::size_t dim) {
  double total = kNegInf;
  for (std::size_t m = 0; m < g.weights.size(); ++m) {
    if (g.weights[m] <= 0.0) continue;
    double lp = std::log(g.weights[m]);
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = g.variances[m][d];
      const double diff = x[d] - g.means[m][d];
      lp += -0.5 * std::log(2.0 * kPi * v) - 0.5 * diff * diff / v;
    }
    total = log_add(total, lp);
  }
  return total;
}

struct PathScores {
  double total = kNegInf;  // log-sum over all legal paths
  double best = kNegInf;   // max over all legal paths
  std::vector<std::size_t> best_path;
};

// Enumerates every legal left-to-right state sequence.
inline PathScores enumerate_paths(const digitrec::HmmModel& model, const digitrec::FeatureMatrix& obs) {
  const std::size_t n = model.num_states();
  const std::size_t T = obs.num_frames();
  const std::size_t dim = obs.dim();
  PathScores out;
  std::vector<std::size_t> path(T);
  std::function<void(std::size_t, double)> walk = [&](std::size_t t, double lp) {
    if (t == T) {
      const double exit = model.transition(path[T - 1] + 1, n + 1);
      if (exit <= 0.0) return;
      const double score = lp + std::log(exit);
      out.total = log_add(out.total, score);
      if (score > out.best) {
        out.best = score;
        out.best_path = path;
      }
      return;
    }
    for (std::size_t s = 0; s < n; ++s) {
      const double a = t == 0 ? model.transition(0, s + 1) : model.transition(path[t - 1] + 1, s + 1);
      if (a <= 0.0) continue;
      path[t] = s;
      walk(t + 1, lp + std::log(a) + log_mixture(model.state(s), obs.row(t).data(), dim));
    }
  };
  if (T > 0) walk(0, 0.0);
  return out;
}

// Every (S, D, I) triple reachable by some alignment of ref and hyp, found
// by exploring all edit paths. Triples are packed as S*49 + D*7 + I, which
// fits because every count is at most 6.
using TripleSet = std::bitset<343>;

inline TripleSet all_alignments(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<std::vector<TripleSet>> cell(R + 1, std::vector<TripleSet>(H + 1));
  cell[0][0].set(0);
  for (std::size_t i = 0; i <= R; ++i) {
    for (std::size_t j = 0; j <= H; ++j) {
      if (i > 0) cell[i][j] |= cell[i - 1][j] << 7;  // deletion
      if (j > 0) cell[i][j] |= cell[i][j - 1] << 1;  // insertion
      if (i > 0 && j > 0) {
        cell[i][j] |= ref[i - 1] == hyp[j - 1] ? cell[i - 1][j - 1] : cell[i - 1][j - 1] << 49;
      }
    }
  }
  return cell[R][H];
}

inline std::tuple<std::size_t, std::size_t, std::size_t> unpack(std::size_t code) {
  return {code / 49, (code / 7) % 7, code % 7};
}

}  // namespace oracle
