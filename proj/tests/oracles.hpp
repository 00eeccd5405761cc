#pragma once

// Brute-force reference computations used only by the tests. None of them
// call into the optimized library paths they are compared against.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "vanhove/kernels.hpp"

namespace oracle {

using complex = std::complex<double>;

// Full (2n)-channel representation: block-diagonal [[diag(w rho_s), 0], [0, W rho_r W]]
// against [[diag(O_s), 0], [0, O_r]], contracted as an explicit trace with a
// plain sequential loop.
inline complex dense_contraction(const vanhove::StateFunctional& s, const vanhove::Observable& o) {
  const auto& g = *s.grid();
  const std::size_t n = g.size();
  std::vector<std::vector<complex>> R(2 * n, std::vector<complex>(2 * n)), O(2 * n, std::vector<complex>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    R[i][i] = g.weight(i) * s.singular()[i];
    O[i][i] = o.singular()[i];
    for (std::size_t j = 0; j < n; ++j) {
      R[n + i][n + j] = g.weight(i) * g.weight(j) * s.regular()(i, j);
      O[n + i][n + j] = o.regular()(i, j);
    }
  }
  complex tr = 0.0;
  for (std::size_t a = 0; a < 2 * n; ++a)
    for (std::size_t b = 0; b < 2 * n; ++b) tr += R[a][b] * O[b][a];
  return tr;
}

// Cyclic Jacobi on the real 2n x 2n embedding [[X, -Y], [Y, X]] of A = X + iY.
// Every eigenvalue of A appears twice; returns them once each, descending.
inline std::vector<double> jacobi_eigenvalues(const Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows(), m = 2 * n;
  Eigen::MatrixXd s(m, m);
  s << a.real(), -a.imag(), a.imag(), a.real();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < m; ++p)
      for (Eigen::Index q = p + 1; q < m; ++q) off += s(p, q) * s(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < m; ++p)
      for (Eigen::Index q = p + 1; q < m; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), sn = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
  }
  std::vector<double> all(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) all[static_cast<std::size_t>(k)] = s(k, k);
  std::sort(all.begin(), all.end(), std::greater<>());
  std::vector<double> out;
  for (std::size_t k = 0; k < all.size(); k += 2) out.push_back(0.5 * (all[k] + all[k + 1]));
  return out;
}

// tr(exp(-iHt) rho exp(iHt) O) after rotating everything by a fixed unitary V,
// so the exponential is taken of a dense matrix.
inline complex conjugation_expectation(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& obs,
                                       const std::vector<double>& energies, const Eigen::MatrixXcd& v, double t) {
  const auto n = static_cast<Eigen::Index>(energies.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = energies[static_cast<std::size_t>(i)];
  const Eigen::MatrixXcd hr = v * h * v.adjoint(), rr = v * rho * v.adjoint(), orr = v * obs * v.adjoint();
  const Eigen::MatrixXcd u = (complex(0.0, -t) * hr).exp();
  return (u * rr * u.adjoint() * orr).trace();
}

// Composite Simpson on [a, b] with an even number of panels.
template <typename F>
auto simpson(F f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  auto acc = f(a) + f(b);
  for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return acc * (h / 3.0);
}

// |offdiag(t)| for separable Gaussian regular kernels A g_r(w) g_r(w') and
// B g_o(w) g_o(w'): A B |int g_r g_o exp(-iwt) dw|^2, by fine-grid Simpson.
inline double gaussian_offdiag(double a, double mu_r, double sig_r, double b, double mu_o, double sig_o,
                               double omega_max, double t, int panels = 8192) {
  const auto integrand = [&](double w) {
    const double gr = std::exp(-0.5 * (w - mu_r) * (w - mu_r) / (sig_r * sig_r));
    const double go = std::exp(-0.5 * (w - mu_o) * (w - mu_o) / (sig_o * sig_o));
    return gr * go * std::polar(1.0, -w * t);
  };
  return a * b * std::norm(simpson(integrand, 0.0, omega_max, panels));
}

// Gaussian rate of the same quantity in closed form: the product g_r g_o is a
// Gaussian of variance s^2 = 1 / (1/sig_r^2 + 1/sig_o^2), whose transform
// modulus squared decays as exp(-s^2 t^2).
inline double gaussian_decay_rate(double sig_r, double sig_o) {
  return 1.0 / (1.0 / (sig_r * sig_r) + 1.0 / (sig_o * sig_o));
}

struct Point {
  double q, p;
};

// Marching squares on a node grid f[i][j] at (q_i, p_j): one point per cell
// edge where f crosses the level, linearly interpolated.
inline std::vector<Point> level_set(const std::function<double(std::size_t, std::size_t)>& f,
                                    const std::vector<double>& q, const std::vector<double>& p, double level) {
  std::vector<Point> out;
  const auto edge = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    const double a = f(i0, j0) - level, b = f(i1, j1) - level;
    if ((a < 0) == (b < 0) || a == b) return;
    const double s = a / (a - b);
    out.push_back({q[i0] + s * (q[i1] - q[i0]), p[j0] + s * (p[j1] - p[j0])});
  };
  for (std::size_t i = 0; i + 1 < q.size(); ++i)
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
      edge(i, j, i + 1, j);
      edge(i, j, i, j + 1);
    }
  return out;
}

// Plain bilinear interpolation of node values f[i][j].
inline double bilinear(const std::function<double(std::size_t, std::size_t)>& f, const std::vector<double>& q,
                       const std::vector<double>& p, double x, double y) {
  const auto locate = [](const std::vector<double>& axis, double v) {
    std::size_t k = 0;
    while (k + 2 < axis.size() && axis[k + 1] <= v) ++k;
    return k;
  };
  const std::size_t i = locate(q, x), j = locate(p, y);
  const double fx = (x - q[i]) / (q[i + 1] - q[i]), fy = (y - p[j]) / (p[j + 1] - p[j]);
  return (1 - fx) * (1 - fy) * f(i, j) + fx * (1 - fy) * f(i + 1, j) + (1 - fx) * fy * f(i, j + 1) +
         fx * fy * f(i + 1, j + 1);
}

}  // namespace oracle
