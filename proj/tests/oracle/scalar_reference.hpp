#pragma once

// Scalar-loop evaluation of the two reconstructed attention mechanisms.
// Deliberately written with nested loops over std::vector and its own
// Gauss-Jordan inverse so it shares no code path with the library.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid zeros(std::size_t r, std::size_t c) { return Grid(r, std::vector<double>(c, 0.0)); }

inline Grid forward_difference(const Grid& x) {
  Grid d = zeros(x.size(), x[0].size());
  for (std::size_t t = 0; t + 1 < x.size(); ++t)
    for (std::size_t n = 0; n < x[0].size(); ++n) d[t][n] = x[t + 1][n] - x[t][n];
  return d;
}

inline Grid backward_difference(const Grid& x) {
  Grid d = zeros(x.size(), x[0].size());
  for (std::size_t t = 1; t < x.size(); ++t)
    for (std::size_t n = 0; n < x[0].size(); ++n) d[t][n] = x[t][n] - x[t - 1][n];
  return d;
}

inline Grid pooled_covariance(const Grid& f, const Grid& b) {
  const std::size_t L = f.size();
  const std::size_t N = f[0].size();
  std::vector<double> mean(N, 0.0);
  for (std::size_t t = 0; t < L; ++t)
    for (std::size_t n = 0; n < N; ++n) mean[n] += f[t][n] + b[t][n];
  for (auto& m : mean) m /= static_cast<double>(2 * L);
  Grid s = zeros(N, N);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        s[i][j] += (f[t][i] - mean[i]) * (f[t][j] - mean[j]);
        s[i][j] += (b[t][i] - mean[i]) * (b[t][j] - mean[j]);
      }
    }
  }
  for (auto& row : s)
    for (auto& v : row) v /= static_cast<double>(2 * L - 1);
  return s;
}

inline Grid invert(Grid a) {
  const std::size_t n = a.size();
  Grid inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    if (a[pivot][c] == 0.0) throw std::runtime_error("oracle: singular matrix");
    std::swap(a[c], a[pivot]);
    std::swap(inv[c], inv[pivot]);
    const double p = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= p;
      inv[c][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double factor = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= factor * a[c][k];
        inv[r][k] -= factor * inv[c][k];
      }
    }
  }
  return inv;
}

inline Grid regularized_inverse(const Grid& sigma, double lambda) {
  Grid m = sigma;
  for (std::size_t i = 0; i < m.size(); ++i) m[i][i] += lambda;
  return invert(m);
}

inline double softplus(double x) { return std::log(1.0 + std::exp(x)); }

inline std::vector<double> softmax(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += (out[i] = std::exp(v[i] - m));
  for (double& o : out) o /= total;
  return out;
}

inline Grid matmul(const Grid& a, const Grid& b) {
  Grid out = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

struct IdaResult {
  Grid md2, kernel, weights, output;
  std::vector<double> sigma;
};

/// Integrated distance attention of one window.
inline IdaResult ida(const Grid& x_raw, const Grid& x_embedded, const std::vector<double>& w_sigma, const Grid& w_v,
                     double lambda, double sigma_floor) {
  const std::size_t L = x_raw.size();
  const std::size_t N = x_raw[0].size();
  const Grid f = forward_difference(x_raw);
  const Grid b = backward_difference(x_raw);
  const Grid inv = regularized_inverse(pooled_covariance(f, b), lambda);
  IdaResult r;
  r.md2 = zeros(L, L);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      double q = 0.0;
      for (std::size_t a = 0; a < N; ++a)
        for (std::size_t c = 0; c < N; ++c) q += (f[i][a] - b[j][a]) * inv[a][c] * (f[i][c] - b[j][c]);
      r.md2[i][j] = q;
    }
  }
  r.sigma.assign(L, 0.0);
  for (std::size_t i = 0; i < L; ++i) {
    double z = 0.0;
    for (std::size_t n = 0; n < N; ++n) z += x_raw[i][n] * w_sigma[n];
    r.sigma[i] = softplus(z) + sigma_floor;
  }
  r.kernel = zeros(L, L);
  r.weights = zeros(L, L);
  for (std::size_t i = 0; i < L; ++i) {
    const double s = r.sigma[i];
    for (std::size_t j = 0; j < L; ++j) {
      const double dt = static_cast<double>(i) - static_cast<double>(j);
      r.kernel[i][j] = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * s) * std::exp(-dt * dt * r.md2[i][j] / (2.0 * s * s));
    }
    r.weights[i] = softmax(r.kernel[i]);
  }
  r.output = matmul(r.weights, matmul(x_embedded, w_v));
  return r;
}

struct JsaResult {
  Grid z_fwd, z_bwd, j, output;
};

inline Grid z_transform(const Grid& x, const std::vector<double>& a_mu, const std::vector<double>& a_s, double eps) {
  Grid z = zeros(x.size(), x[0].size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    double mu = 0.0;
    for (std::size_t n = 0; n < x[t].size(); ++n) mu += x[t][n] * a_mu[n];
    double var = 0.0;
    for (std::size_t n = 0; n < x[t].size(); ++n) var += (x[t][n] - mu) * (x[t][n] - mu) * a_s[n];
    const double s = std::sqrt(var);
    for (std::size_t n = 0; n < x[t].size(); ++n) z[t][n] = (x[t][n] - mu) / (s + eps);
  }
  return z;
}

/// Jensen-Shannon divergence in bits between two distributions.
inline double js_bits(const std::vector<double>& p, const std::vector<double>& q) {
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double m = 0.5 * (p[n] + q[n]);
    if (p[n] > 0) kl_p += p[n] * std::log2(p[n] / m);
    if (q[n] > 0) kl_q += q[n] * std::log2(q[n] / m);
  }
  return 0.5 * kl_p + 0.5 * kl_q;
}

/// Distributed difference attention of one window.
inline JsaResult jsa(const Grid& x_raw, const std::vector<double>& w_mu, const std::vector<double>& w_s,
                     const Grid& w_vf, const Grid& w_vb, double lambda, double eps) {
  (void)lambda;
  const std::size_t L = x_raw.size();
  const std::size_t N = x_raw[0].size();
  const Grid f = forward_difference(x_raw);
  const Grid b = backward_difference(x_raw);
  const Grid sigma = pooled_covariance(f, b);
  std::vector<double> pre_mu(N, 0.0), pre_s(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < N; ++k) {
      pre_mu[i] += sigma[i][k] * w_mu[k];
      pre_s[i] += sigma[i][k] * w_s[k];
    }
  }
  const std::vector<double> a_mu = softmax(pre_mu);
  const std::vector<double> a_s = softmax(pre_s);
  JsaResult r;
  r.z_fwd = z_transform(f, a_mu, a_s, eps);
  r.z_bwd = z_transform(b, a_mu, a_s, eps);
  r.j = zeros(L, L);
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t k = 0; k < L; ++k) r.j[i][k] = js_bits(softmax(r.z_fwd[i]), softmax(r.z_bwd[k]));
  const Grid vf = matmul(r.z_fwd, w_vf);
  const Grid vb = matmul(r.z_bwd, w_vb);
  const std::size_t D = w_vf[0].size();
  r.output = zeros(L, D);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t d = 0; d < D; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < L; ++k) acc += r.j[i][k] * vf[k][d] + r.j[k][i] * vb[k][d];
      r.output[i][d] = acc;
    }
  }
  return r;
}

}  // namespace oracle
