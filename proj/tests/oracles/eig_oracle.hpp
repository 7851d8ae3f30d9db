#pragma once

// Test-only dense eigenvalue oracle: elimination Hessenberg reduction
// followed by shifted QR iteration (the classic hqr algorithm). Kept
// independent of the library's power-iteration path on purpose.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "tarnn/matrix.hpp"

namespace oracle {

inline double sign_of(double a, double b) { return b >= 0.0 ? std::fabs(a) : -std::fabs(a); }

inline void elmhes(std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  for (int m = 1; m < n - 1; m++) {
    double x = 0.0;
    int i = m;
    for (int j = m; j < n; j++)
      if (std::fabs(a[j][m - 1]) > std::fabs(x)) {
        x = a[j][m - 1];
        i = j;
      }
    if (i != m) {
      for (int j = m - 1; j < n; j++) std::swap(a[i][j], a[m][j]);
      for (int j = 0; j < n; j++) std::swap(a[j][i], a[j][m]);
    }
    if (x != 0.0) {
      for (i = m + 1; i < n; i++) {
        double y = a[i][m - 1];
        if (y != 0.0) {
          y /= x;
          a[i][m - 1] = y;
          for (int j = m; j < n; j++) a[i][j] -= y * a[m][j];
          for (int j = 0; j < n; j++) a[j][m] += y * a[j][i];
        }
      }
    }
  }
  for (int i = 2; i < n; i++)
    for (int j = 0; j < i - 1; j++) a[i][j] = 0.0;
}

inline void hqr(std::vector<std::vector<double>>& a, std::vector<double>& wr,
                std::vector<double>& wi) {
  const int n = static_cast<int>(a.size());
  const double eps = std::numeric_limits<double>::epsilon();
  int nn, m, l, k, j, its, i, mmin;
  double z = 0, y, x, w, v, u, t, s, r = 0, q = 0, p = 0, anorm = 0;

  for (i = 0; i < n; i++)
    for (j = std::max(i - 1, 0); j < n; j++) anorm += std::fabs(a[i][j]);
  nn = n - 1;
  t = 0.0;
  while (nn >= 0) {
    its = 0;
    do {
      for (l = nn; l >= 1; l--) {
        s = std::fabs(a[l - 1][l - 1]) + std::fabs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::fabs(a[l][l - 1]) <= eps * s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        wr.push_back(x + t);
        wi.push_back(0.0);
        nn--;
      } else {
        y = a[nn - 1][nn - 1];
        w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            wr.push_back(x + z);
            wi.push_back(0.0);
            wr.push_back(z != 0.0 ? x - w / z : x + z);
            wi.push_back(0.0);
          } else {
            wr.push_back(x + p);
            wi.push_back(z);
            wr.push_back(x + p);
            wi.push_back(-z);
          }
          nn -= 2;
        } else {
          if (its == 30)
            throw std::runtime_error("hqr: too many iterations");
          if (its == 10 || its == 20) {
            t += x;
            for (i = 0; i <= nn; i++) a[i][i] -= x;
            s = std::fabs(a[nn][nn - 1]) + std::fabs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          for (m = nn - 2; m >= l; m--) {
            z = a[m][m];
            r = x - z;
            s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            u = std::fabs(a[m][m - 1]) * (std::fabs(q) + std::fabs(r));
            v = std::fabs(p) *
                (std::fabs(a[m - 1][m - 1]) + std::fabs(z) + std::fabs(a[m + 1][m + 1]));
            if (u <= eps * v) break;
          }
          for (i = m + 2; i <= nn; i++) {
            a[i][i - 2] = 0.0;
            if (i != m + 2) a[i][i - 3] = 0.0;
          }
          for (k = m; k <= nn - 1; k++) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k != nn - 1) r = a[k + 2][k - 1];
              if ((x = std::fabs(p) + std::fabs(q) + std::fabs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (j = k; j <= nn; j++) {
                p = a[k][j] + q * a[k + 1][j];
                if (k != nn - 1) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              mmin = nn < k + 3 ? nn : k + 3;
              for (i = l; i <= mmin; i++) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k != nn - 1) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

inline std::vector<std::complex<double>> eigenvalues(const tarnn::DenseMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues: not square");
  const std::size_t n = m.rows();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
  elmhes(a);
  std::vector<double> wr, wi;
  hqr(a, wr, wi);
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

inline double spectral_radius_qr(const tarnn::DenseMatrix& m) {
  double r = 0.0;
  for (const auto& ev : eigenvalues(m)) r = std::max(r, std::abs(ev));
  return r;
}

}  // namespace oracle
