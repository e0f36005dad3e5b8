#include "svbrdf/gemm.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

#include "svbrdf/parallel.hpp"

#ifdef SVBRDF_WITH_OPENBLAS
extern "C" void cblas_sgemm(int layout, int trans_a, int trans_b, int m, int n, int k,
                            float alpha, const float* a, int lda, const float* b, int ldb,
                            float beta, float* c, int ldc);
#endif

namespace svbrdf {

namespace {

#ifndef SVBRDF_WITH_OPENBLAS

// 4x16 register-tiled kernel for the row-major NN case; remainder edges fall
// back to scalar loops with the same k-ascending accumulation order.
void gemm_nn_blocked(int m, int n, int k, float alpha, const float* a, const float* b,
                     float beta, float* c) {
  constexpr int kMr = 4;
  constexpr int kNr = 16;
  const int m_blocks = (m + kMr - 1) / kMr;
  parallel_for(m_blocks, [&](std::int64_t bi) {
    const int i0 = static_cast<int>(bi) * kMr;
    const int mr = std::min(kMr, m - i0);
    for (int j0 = 0; j0 < n; j0 += kNr) {
      const int nr = std::min(kNr, n - j0);
      if (mr == kMr && nr == kNr) {
        float acc[kMr][kNr] = {};
        const float* a0 = a + static_cast<std::size_t>(i0) * k;
        for (int kk = 0; kk < k; ++kk) {
          const float* brow = b + static_cast<std::size_t>(kk) * n + j0;
          const float a_k0 = a0[kk];
          const float a_k1 = a0[k + kk];
          const float a_k2 = a0[2 * k + kk];
          const float a_k3 = a0[3 * k + kk];
          for (int j = 0; j < kNr; ++j) {
            const float bv = brow[j];
            acc[0][j] += a_k0 * bv;
            acc[1][j] += a_k1 * bv;
            acc[2][j] += a_k2 * bv;
            acc[3][j] += a_k3 * bv;
          }
        }
        for (int i = 0; i < kMr; ++i) {
          float* crow = c + static_cast<std::size_t>(i0 + i) * n + j0;
          for (int j = 0; j < kNr; ++j)
            crow[j] = alpha * acc[i][j] + (beta == 0.f ? 0.f : beta * crow[j]);
        }
      } else {
        for (int i = 0; i < mr; ++i) {
          for (int j = 0; j < nr; ++j) {
            float s = 0.f;
            const float* arow = a + static_cast<std::size_t>(i0 + i) * k;
            for (int kk = 0; kk < k; ++kk) s += arow[kk] * b[static_cast<std::size_t>(kk) * n + j0 + j];
            float* cp = c + static_cast<std::size_t>(i0 + i) * n + j0 + j;
            *cp = alpha * s + (beta == 0.f ? 0.f : beta * *cp);
          }
        }
      }
    }
  });
}

std::vector<float> transpose_copy(const float* src, int rows, int cols) {
  std::vector<float> out(static_cast<std::size_t>(rows) * cols);
  parallel_for(rows, [&](std::int64_t r) {
    for (int cidx = 0; cidx < cols; ++cidx)
      out[static_cast<std::size_t>(cidx) * rows + r] = src[static_cast<std::size_t>(r) * cols + cidx];
  });
  return out;
}

#endif  // !SVBRDF_WITH_OPENBLAS

}  // namespace

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, const float* b, float beta, float* c) {
  if (m == 0 || n == 0) return;
#ifdef SVBRDF_WITH_OPENBLAS
  constexpr int kRowMajor = 101;
  constexpr int kNoTrans = 111;
  constexpr int kTrans = 112;
  const int lda = trans_a ? m : k;
  const int ldb = trans_b ? k : n;
  cblas_sgemm(kRowMajor, trans_a ? kTrans : kNoTrans, trans_b ? kTrans : kNoTrans,
              m, n, k, alpha, a, lda, b, ldb, beta, c, n);
#else
  // The blocked kernel is NN only; materialize transposes.
  const float* a_eff = a;
  const float* b_eff = b;
  std::vector<float> a_t, b_t;
  if (trans_a) {
    a_t = transpose_copy(a, k, m);
    a_eff = a_t.data();
  }
  if (trans_b) {
    b_t = transpose_copy(b, n, k);
    b_eff = b_t.data();
  }
  gemm_nn_blocked(m, n, k, alpha, a_eff, b_eff, beta, c);
#endif
}

namespace reference {

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, const float* b, float beta, float* c) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      float s = 0.f;
      for (int kk = 0; kk < k; ++kk) {
        const float av = trans_a ? a[static_cast<std::size_t>(kk) * m + i]
                                 : a[static_cast<std::size_t>(i) * k + kk];
        const float bv = trans_b ? b[static_cast<std::size_t>(j) * k + kk]
                                 : b[static_cast<std::size_t>(kk) * n + j];
        s += av * bv;
      }
      float* cp = c + static_cast<std::size_t>(i) * n + j;
      *cp = alpha * s + (beta == 0.f ? 0.f : beta * *cp);
    }
  }
}

}  // namespace reference

}  // namespace svbrdf
