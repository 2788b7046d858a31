#include "addm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace addm {

int BlockCsrMatrix::find(int row, int c) const {
  const int b = row_ptr[row], e = row_ptr[row + 1];
  const auto it = std::lower_bound(col.begin() + b, col.begin() + e, c);
  if (it != col.begin() + e && *it == c)
    return static_cast<int>(it - col.begin());
  return -1;
}

BlockCsrMatrix BlockCsrMatrix::from_pattern(
    int n, const std::vector<std::vector<int>>& cols) {
  BlockCsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  for (int r = 0; r < n; ++r)
    m.row_ptr[r + 1] = m.row_ptr[r] + static_cast<int>(cols[r].size());
  m.col.resize(m.row_ptr[n]);
  m.diag.assign(n, -1);
  for (int r = 0; r < n; ++r) {
    std::copy(cols[r].begin(), cols[r].end(), m.col.begin() + m.row_ptr[r]);
    for (int e = m.row_ptr[r]; e < m.row_ptr[r + 1]; ++e) {
      if (e > m.row_ptr[r] && m.col[e] <= m.col[e - 1])
        throw ConfigError("block pattern columns must be strictly ascending");
      if (m.col[e] == r) m.diag[r] = e;
    }
    if (m.diag[r] < 0) throw ConfigError("block pattern misses a diagonal");
  }
  m.val.assign(9 * m.col.size(), 0.0);
  return m;
}

namespace {

inline void block_gemv_add(const double* b, const double* x, double* y) {
  y[0] += b[0] * x[0] + b[1] * x[1] + b[2] * x[2];
  y[1] += b[3] * x[0] + b[4] * x[1] + b[5] * x[2];
  y[2] += b[6] * x[0] + b[7] * x[1] + b[8] * x[2];
}

inline void block_gemv_sub(const double* b, const double* x, double* y) {
  y[0] -= b[0] * x[0] + b[1] * x[1] + b[2] * x[2];
  y[1] -= b[3] * x[0] + b[4] * x[1] + b[5] * x[2];
  y[2] -= b[6] * x[0] + b[7] * x[1] + b[8] * x[2];
}

// c -= a * b (3x3)
inline void block_gemm_sub(const double* a, const double* b, double* c) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      c[3 * i + j] -= s;
    }
}

// c = a * b (3x3)
inline void block_gemm(const double* a, const double* b, double* c) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
      c[3 * i + j] = s;
    }
}

}  // namespace

bool invert3x3(const double* a, double* inv) {
  const double c00 = a[4] * a[8] - a[5] * a[7];
  const double c01 = a[5] * a[6] - a[3] * a[8];
  const double c02 = a[3] * a[7] - a[4] * a[6];
  const double det = a[0] * c00 + a[1] * c01 + a[2] * c02;
  double amax = 0;
  for (int i = 0; i < 9; ++i) amax = std::max(amax, std::abs(a[i]));
  if (!(std::abs(det) > 1e-300) || std::abs(det) < 1e-14 * amax * amax * amax)
    return false;
  const double id = 1.0 / det;
  inv[0] = c00 * id;
  inv[3] = c01 * id;
  inv[6] = c02 * id;
  inv[1] = (a[2] * a[7] - a[1] * a[8]) * id;
  inv[4] = (a[0] * a[8] - a[2] * a[6]) * id;
  inv[7] = (a[1] * a[6] - a[0] * a[7]) * id;
  inv[2] = (a[1] * a[5] - a[2] * a[4]) * id;
  inv[5] = (a[2] * a[3] - a[0] * a[5]) * id;
  inv[8] = (a[0] * a[4] - a[1] * a[3]) * id;
  return true;
}

void spmv(const BlockCsrMatrix& A, const Vec& x, Vec& y) {
  y.assign(3 * A.n, 0.0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < A.n; ++r) {
    double* yr = &y[3 * r];
    for (int e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e)
      block_gemv_add(A.block(e), &x[3 * A.col[e]], yr);
  }
}

namespace serial_ref {
void spmv(const BlockCsrMatrix& A, const Vec& x, Vec& y) {
  y.assign(3 * A.n, 0.0);
  for (int r = 0; r < A.n; ++r) {
    double* yr = &y[3 * r];
    for (int e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e)
      block_gemv_add(A.block(e), &x[3 * A.col[e]], yr);
  }
}
}  // namespace serial_ref

double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool Ilu0::factor(const BlockCsrMatrix& A) {
  ok_ = false;
  lu_ = A;
  pivot_inv_.assign(9 * A.n, 0.0);
  for (int i = 0; i < lu_.n; ++i) {
    for (int e = lu_.row_ptr[i]; e < lu_.row_ptr[i + 1]; ++e) {
      const int k = lu_.col[e];
      if (k >= i) break;
      // L_ik = A_ik * inv(U_kk), then eliminate within the row pattern.
      double lik[9];
      block_gemm(lu_.block(e), &pivot_inv_[9 * k], lik);
      std::copy(lik, lik + 9, lu_.block(e));
      for (int f = e + 1; f < lu_.row_ptr[i + 1]; ++f) {
        const int j = lu_.col[f];
        const int kj = lu_.find(k, j);
        if (kj >= 0) block_gemm_sub(lik, lu_.block(kj), lu_.block(f));
      }
    }
    if (!invert3x3(lu_.block(lu_.diag[i]), &pivot_inv_[9 * i])) return false;
  }
  ok_ = true;
  return true;
}

void Ilu0::apply(const Vec& r, Vec& z) const {
  z = r;
  // Forward: unit-lower solve.
  for (int i = 0; i < lu_.n; ++i) {
    double* zi = &z[3 * i];
    for (int e = lu_.row_ptr[i]; e < lu_.row_ptr[i + 1]; ++e) {
      const int k = lu_.col[e];
      if (k >= i) break;
      block_gemv_sub(lu_.block(e), &z[3 * k], zi);
    }
  }
  // Backward: upper solve with inverted pivots.
  for (int i = lu_.n - 1; i >= 0; --i) {
    double* zi = &z[3 * i];
    for (int e = lu_.row_ptr[i + 1] - 1; e >= lu_.row_ptr[i]; --e) {
      const int j = lu_.col[e];
      if (j <= i) break;
      block_gemv_sub(lu_.block(e), &z[3 * j], zi);
    }
    double t[3] = {0, 0, 0};
    block_gemv_add(&pivot_inv_[9 * i], zi, t);
    zi[0] = t[0];
    zi[1] = t[1];
    zi[2] = t[2];
  }
}

bool BlockJacobi::factor(const BlockCsrMatrix& A, const std::vector<int>& groups,
                         int n_groups) {
  n_ = A.n;
  groups_.assign(n_groups, {});
  for (int r = 0; r < A.n; ++r) {
    const int g = groups[r];
    if (g < 0 || g >= n_groups) throw ConfigError("row group out of range");
    groups_[g].rows.push_back(r);
  }
  std::vector<int> local_of(A.n, -1);
  for (auto& g : groups_) {
    for (int i = 0; i < static_cast<int>(g.rows.size()); ++i)
      local_of[g.rows[i]] = i;
    const int m = static_cast<int>(g.rows.size());
    std::vector<std::vector<int>> cols(m);
    for (int i = 0; i < m; ++i) {
      const int r = g.rows[i];
      for (int e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e) {
        const int lc = local_of[A.col[e]];
        if (lc >= 0) cols[i].push_back(lc);
      }
    }
    g.sub = BlockCsrMatrix::from_pattern(m, cols);
    for (int i = 0; i < m; ++i) {
      const int r = g.rows[i];
      int w = g.sub.row_ptr[i];
      for (int e = A.row_ptr[r]; e < A.row_ptr[r + 1]; ++e) {
        const int lc = local_of[A.col[e]];
        if (lc >= 0)
          std::copy(A.block(e), A.block(e) + 9, g.sub.block(w++));
      }
    }
    g.use_ilu = g.ilu.factor(g.sub);
    if (!g.use_ilu) {
      g.diag_inv.assign(9 * m, 0.0);
      for (int i = 0; i < m; ++i) {
        if (!invert3x3(g.sub.block(g.sub.diag[i]), &g.diag_inv[9 * i]))
          return false;
      }
    }
    // Reset marks for next group.
    for (int r : g.rows) local_of[r] = -1;
  }
  return true;
}

void BlockJacobi::apply(const Vec& r, Vec& z) const {
  z.assign(3 * n_, 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (int gi = 0; gi < static_cast<int>(groups_.size()); ++gi) {
    const Group& g = groups_[gi];
    const int m = static_cast<int>(g.rows.size());
    Vec rl(3 * m), zl;
    for (int i = 0; i < m; ++i)
      std::copy(&r[3 * g.rows[i]], &r[3 * g.rows[i]] + 3, &rl[3 * i]);
    if (g.use_ilu) {
      g.ilu.apply(rl, zl);
    } else {
      zl.assign(3 * m, 0.0);
      for (int i = 0; i < m; ++i)
        block_gemv_add(&g.diag_inv[9 * i], &rl[3 * i], &zl[3 * i]);
    }
    for (int i = 0; i < m; ++i)
      std::copy(&zl[3 * i], &zl[3 * i] + 3, &z[3 * g.rows[i]]);
  }
}

GmresResult gmres(const BlockCsrMatrix& A, const Vec& b, Vec& x,
                  const Preconditioner& M, const GmresOptions& opt) {
  GmresResult res;
  const int n = 3 * A.n;
  if (x.size() != b.size()) x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    res.relative_residual = 0;
    return res;
  }
  const double tol = opt.rtol * bnorm;

  const int m = std::max(1, opt.restart);
  std::vector<Vec> V(m + 1);
  std::vector<double> H((m + 1) * m, 0.0);
  Vec cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
  Vec w, z, r;

  int total_it = 0;
  while (total_it < opt.max_iterations) {
    // r = b - A x
    spmv(A, x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm2(r);
    if (beta <= tol) {
      res.converged = true;
      res.iterations = total_it;
      res.relative_residual = beta / bnorm;
      return res;
    }
    V[0] = r;
    for (int i = 0; i < n; ++i) V[0][i] /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total_it < opt.max_iterations; ++k, ++total_it) {
      M.apply(V[k], z);
      spmv(A, z, w);
      // Modified Gram-Schmidt.
      const double wnorm_before = norm2(w);
      for (int i = 0; i <= k; ++i) {
        const double h = dot(w, V[i]);
        H[i * m + k] = h;
        axpy(-h, V[i], w);
      }
      // One reorthogonalization pass when the defect exceeds 1e-8.
      double defect = 0;
      for (int i = 0; i <= k; ++i) defect = std::max(defect, std::abs(dot(w, V[i])));
      if (defect > 1e-8 * std::max(wnorm_before, 1e-300)) {
        for (int i = 0; i <= k; ++i) {
          const double h = dot(w, V[i]);
          H[i * m + k] += h;
          axpy(-h, V[i], w);
        }
      }
      const double hkk = norm2(w);
      H[(k + 1) * m + k] = hkk;
      if (hkk > 0) {
        V[k + 1] = w;
        for (int i = 0; i < n; ++i) V[k + 1][i] /= hkk;
      }
      // Apply stored Givens rotations, then form a new one.
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H[i * m + k] + sn[i] * H[(i + 1) * m + k];
        H[(i + 1) * m + k] =
            -sn[i] * H[i * m + k] + cs[i] * H[(i + 1) * m + k];
        H[i * m + k] = t;
      }
      const double denom = std::hypot(H[k * m + k], H[(k + 1) * m + k]);
      if (denom == 0) {
        cs[k] = 1;
        sn[k] = 0;
      } else {
        cs[k] = H[k * m + k] / denom;
        sn[k] = H[(k + 1) * m + k] / denom;
      }
      H[k * m + k] = cs[k] * H[k * m + k] + sn[k] * H[(k + 1) * m + k];
      H[(k + 1) * m + k] = 0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      res.residual_history.push_back(std::abs(g[k + 1]));
      if (std::abs(g[k + 1]) <= tol || hkk == 0) {
        ++k;
        ++total_it;
        break;
      }
    }
    // Solve the small triangular system and update x.
    Vec y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i * m + j] * y[j];
      y[i] = s / H[i * m + i];
    }
    Vec zsum(n, 0.0);
    for (int i = 0; i < k; ++i) axpy(y[i], V[i], zsum);
    M.apply(zsum, z);
    for (int i = 0; i < n; ++i) x[i] += z[i];

    spmv(A, x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const double true_res = norm2(r);
    res.iterations = total_it;
    res.relative_residual = true_res / bnorm;
    if (true_res <= tol) {
      res.converged = true;
      return res;
    }
  }
  res.iterations = total_it;
  return res;
}

}  // namespace addm
