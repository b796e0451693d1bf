#pragma once

// Exact linear algebra over the integers, the rationals, and prime
// fields. Smith normal form carries unimodular transform certificates
// (U * M * V = D) so results can be re-verified; rational and mod-p
// nullspaces are computed independently by row reduction, giving a
// second route to every rank/nullity fact derived from the divisors.

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ssg/errors.hpp"

namespace ssg {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using IntMat = std::vector<std::vector<Int>>;
using RatMat = std::vector<std::vector<Rat>>;

inline IntMat identity_mat(std::size_t n) {
  IntMat m(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline IntMat mat_mul(const IntMat& a, const IntMat& b) {
  std::size_t m = a.size(), k = m ? a[0].size() : 0, n = b.empty() ? 0 : b[0].size();
  if (b.size() != k) throw internal_error("matrix dimension mismatch");
  IntMat c(m, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      if (a[i][t] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][t] * b[t][j];
    }
  return c;
}

struct SnfResult {
  std::vector<Int> divisors;  // diagonal of D, d1 | d2 | ..., zeros trailing
  int rank = 0;               // number of nonzero divisors
  IntMat U, V;                // unimodular, U * M * V = D
};

// Smith normal form by repeated minimal-pivot elimination. The pivot
// is the entry of least absolute value in the remaining submatrix;
// rows and columns are reduced against it until it divides everything
// it meets, which terminates because |pivot| strictly decreases.
inline SnfResult smith_normal_form(IntMat a) {
  std::size_t m = a.size(), n = m ? a[0].size() : 0;
  for (const auto& row : a)
    if (row.size() != n) throw input_error("ragged matrix");
  SnfResult res;
  res.U = identity_mat(m);
  res.V = identity_mat(n);
  std::size_t t = 0;
  auto swap_rows = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    std::swap(a[i], a[j]);
    std::swap(res.U[i], res.U[j]);
  };
  auto swap_cols = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    for (auto& row : a) std::swap(row[i], row[j]);
    for (auto& row : res.V) std::swap(row[i], row[j]);
  };
  auto add_row = [&](std::size_t dst, std::size_t src, const Int& f) {
    for (std::size_t j = 0; j < n; ++j) a[dst][j] += f * a[src][j];
    for (std::size_t j = 0; j < m; ++j) res.U[dst][j] += f * res.U[src][j];
  };
  auto add_col = [&](std::size_t dst, std::size_t src, const Int& f) {
    for (std::size_t i = 0; i < m; ++i) a[i][dst] += f * a[i][src];
    for (std::size_t i = 0; i < n; ++i) res.V[i][dst] += f * res.V[i][src];
  };
  while (t < m && t < n) {
    std::size_t pi = t, pj = t;
    bool found = false;
    for (std::size_t i = t; i < m; ++i)
      for (std::size_t j = t; j < n; ++j)
        if (a[i][j] != 0 &&
            (!found || boost::multiprecision::abs(a[i][j]) <
                           boost::multiprecision::abs(a[pi][pj]))) {
          pi = i;
          pj = j;
          found = true;
        }
    if (!found) break;
    swap_rows(t, pi);
    swap_cols(t, pj);
    bool clean = false;
    while (!clean) {
      clean = true;
      for (std::size_t i = t + 1; i < m; ++i)
        if (a[i][t] != 0) {
          Int q = a[i][t] / a[t][t];
          add_row(i, t, -q);
          if (a[i][t] != 0) {  // remainder smaller than pivot: promote it
            swap_rows(t, i);
            clean = false;
          }
        }
      for (std::size_t j = t + 1; j < n; ++j)
        if (a[t][j] != 0) {
          Int q = a[t][j] / a[t][t];
          add_col(j, t, -q);
          if (a[t][j] != 0) {
            swap_cols(t, j);
            clean = false;
          }
        }
      if (clean) {
        // Divisibility sweep: fold a non-multiple into the pivot row.
        for (std::size_t i = t + 1; i < m && clean; ++i)
          for (std::size_t j = t + 1; j < n && clean; ++j)
            if (a[i][j] % a[t][t] != 0) {
              add_row(t, i, 1);
              clean = false;
            }
      }
    }
    if (a[t][t] < 0) {
      for (std::size_t j = 0; j < n; ++j) a[t][j] = -a[t][j];
      for (std::size_t j = 0; j < m; ++j) res.U[t][j] = -res.U[t][j];
    }
    ++t;
  }
  std::size_t diag = std::min(m, n);
  res.divisors.assign(diag, 0);
  for (std::size_t i = 0; i < t; ++i) res.divisors[i] = a[i][i];
  res.rank = static_cast<int>(t);
  return res;
}

// Bareiss fraction-free determinant, used to certify unimodularity.
inline Int det_int(IntMat a) {
  std::size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw input_error("determinant of non-square matrix");
  if (n == 0) return 1;
  Int prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t s = k + 1;
      while (s < n && a[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(a[k], a[s]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline bool snf_certificate_ok(const IntMat& m, const SnfResult& s) {
  std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  Int du = det_int(s.U), dv = det_int(s.V);
  if (du != 1 && du != -1) return false;
  if (dv != 1 && dv != -1) return false;
  IntMat d = mat_mul(mat_mul(s.U, m), s.V);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      Int want = (i == j && i < s.divisors.size()) ? s.divisors[i] : Int(0);
      if (d[i][j] != want) return false;
    }
  for (int i = 0; i + 1 < s.rank; ++i)
    if (s.divisors[i] == 0 || s.divisors[i + 1] % s.divisors[i] != 0) return false;
  return true;
}

// Reduced row echelon over the rationals; returns pivot columns.
inline std::vector<std::size_t> rref_q(RatMat& a) {
  std::size_t m = a.size(), n = m ? a[0].size() : 0;
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t sel = r;
    while (sel < m && a[sel][c] == 0) ++sel;
    if (sel == m) continue;
    std::swap(a[r], a[sel]);
    Rat inv = a[r][c];
    for (std::size_t j = c; j < n; ++j) a[r][j] /= inv;
    for (std::size_t i = 0; i < m; ++i)
      if (i != r && a[i][c] != 0) {
        Rat f = a[i][c];
        for (std::size_t j = c; j < n; ++j) a[i][j] -= f * a[r][j];
      }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline int rank_q(const IntMat& m) {
  RatMat a(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) a[i].assign(m[i].begin(), m[i].end());
  return static_cast<int>(rref_q(a).size());
}

// Basis of {x : M x = 0} over the rationals, one vector per free
// column, with 1 in that column (a standard deterministic basis).
inline RatMat nullspace_q(const IntMat& m) {
  std::size_t cols = m.empty() ? 0 : m[0].size();
  RatMat a(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) a[i].assign(m[i].begin(), m[i].end());
  auto pivots = rref_q(a);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  RatMat basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rat> v(cols, 0);
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

inline bool is_prime(long long p) {
  if (p < 2) return false;
  for (long long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline long long mod_reduce(const Int& x, long long p) {
  Int r = x % p;
  if (r < 0) r += p;
  return static_cast<long long>(r);
}

inline long long mod_inverse(long long a, long long p) {
  long long t = 0, newt = 1, r = p, newr = a % p;
  if (newr < 0) newr += p;
  while (newr != 0) {
    long long q = r / newr;
    t -= q * newt;
    std::swap(t, newt);
    r -= q * newr;
    std::swap(r, newr);
  }
  if (r != 1) throw internal_error("non-invertible residue");
  return t < 0 ? t + p : t;
}

// Basis of the nullspace of M over F_p, same free-column convention.
inline std::vector<std::vector<long long>> nullspace_p(const IntMat& m, long long p) {
  if (!is_prime(p)) throw input_error("characteristic must be 0 or a prime");
  std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  std::vector<std::vector<long long>> a(rows, std::vector<long long>(cols, 0));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = mod_reduce(m[i][j], p);
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && a[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(a[r], a[sel]);
    long long inv = mod_inverse(a[r][c], p);
    for (std::size_t j = c; j < cols; ++j)
      a[r][j] = static_cast<long long>(static_cast<__int128>(a[r][j]) * inv % p);
    for (std::size_t i = 0; i < rows; ++i)
      if (i != r && a[i][c] != 0) {
        long long f = a[i][c];
        for (std::size_t j = c; j < cols; ++j) {
          a[i][j] = static_cast<long long>(
              (a[i][j] - static_cast<__int128>(f) * a[r][j]) % p);
          if (a[i][j] < 0) a[i][j] += p;
        }
      }
    pivots.push_back(c);
    ++r;
  }
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  std::vector<std::vector<long long>> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<long long> v(cols, 0);
    v[f] = 1;
    for (std::size_t rr = 0; rr < pivots.size(); ++rr)
      v[pivots[rr]] = (p - a[rr][f]) % p;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Nullity of M over characteristic p (0 = rationals), read off the
// divisor chain: columns minus the count of divisors nonzero mod p.
inline int nullity_from_snf(const SnfResult& s, std::size_t cols, long long p) {
  int nonzero = 0;
  for (const Int& d : s.divisors) {
    if (p == 0) {
      if (d != 0) ++nonzero;
    } else {
      if (d % p != 0) ++nonzero;
    }
  }
  return static_cast<int>(cols) - nonzero;
}

}  // namespace ssg
