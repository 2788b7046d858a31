#pragma once

#include <array>
#include <vector>

#include "addm/types.hpp"

namespace addm {

// Sparse matrix of dense 3x3 blocks in CSR layout. Column indices per row are
// strictly ascending and every row contains its diagonal block.
struct BlockCsrMatrix {
  int n = 0;                    // block rows
  std::vector<int> row_ptr;     // n+1
  std::vector<int> col;         // block column per entry
  std::vector<int> diag;        // entry index of the diagonal per row
  std::vector<double> val;      // 9 doubles per entry, row-major blocks

  int num_entries() const { return static_cast<int>(col.size()); }
  double* block(int e) { return &val[9 * e]; }
  const double* block(int e) const { return &val[9 * e]; }
  void zero_values() { std::fill(val.begin(), val.end(), 0.0); }
  // Entry index of block (row, c) or -1.
  int find(int row, int c) const;

  // Build from per-row column lists (each must include the diagonal).
  static BlockCsrMatrix from_pattern(int n,
                                     const std::vector<std::vector<int>>& cols);
};

// y = A x (parallel over block rows; deterministic for any thread count).
void spmv(const BlockCsrMatrix& A, const Vec& x, Vec& y);

namespace serial_ref {
// Straight-loop reference used by tests and the kernel benchmark.
void spmv(const BlockCsrMatrix& A, const Vec& x, Vec& y);
}  // namespace serial_ref

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha x

struct Preconditioner {
  virtual ~Preconditioner() = default;
  virtual void apply(const Vec& r, Vec& z) const = 0;
};

struct IdentityPrecond final : Preconditioner {
  void apply(const Vec& r, Vec& z) const override { z = r; }
};

// Zero-fill block incomplete LU on the matrix sparsity pattern. Diagonal
// pivot blocks are inverted and stored; a non-invertible pivot fails the
// factorization so the caller can fall back to block Jacobi.
class Ilu0 final : public Preconditioner {
public:
  bool factor(const BlockCsrMatrix& A);
  void apply(const Vec& r, Vec& z) const override;
  bool ok() const { return ok_; }

private:
  BlockCsrMatrix lu_;
  std::vector<double> pivot_inv_;  // 9 per row
  bool ok_ = false;
};

// Block-Jacobi preconditioner: rows are grouped (one group per original
// subdomain in region solves) and each group's diagonal sub-matrix gets its
// own ILU(0). Groups need not be contiguous. A group whose ILU fails falls
// back to inverted diagonal blocks.
class BlockJacobi final : public Preconditioner {
public:
  // groups: block-row index -> group id in [0, n_groups).
  bool factor(const BlockCsrMatrix& A, const std::vector<int>& groups,
              int n_groups);
  void apply(const Vec& r, Vec& z) const override;

private:
  struct Group {
    std::vector<int> rows;       // global block rows, ascending
    BlockCsrMatrix sub;
    Ilu0 ilu;
    std::vector<double> diag_inv;  // fallback when ILU fails
    bool use_ilu = true;
  };
  std::vector<Group> groups_;
  int n_ = 0;
};

struct GmresOptions {
  double rtol = 1e-4;
  int max_iterations = 100;
  int restart = 30;
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0;        // true residual at exit / ||b||
  std::vector<double> residual_history;  // preconditioned LS estimates
};

// Right-preconditioned restarted GMRES. Modified Gram-Schmidt with one
// reorthogonalization pass when the orthogonality defect exceeds 1e-8.
// ||b|| = 0 returns x = 0 immediately.
GmresResult gmres(const BlockCsrMatrix& A, const Vec& b, Vec& x,
                  const Preconditioner& M, const GmresOptions& opt);

// Dense helpers shared with the well solver and tests.
// Invert a row-major 3x3; returns false when the determinant is ~0.
bool invert3x3(const double* a, double* inv);

}  // namespace addm
