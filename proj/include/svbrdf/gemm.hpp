#pragma once

namespace svbrdf {

// C = alpha * op(A) * op(B) + beta * C, row-major with tight leading
// dimensions (lda = cols of the stored A, etc.). Backed by OpenBLAS when
// available, otherwise by a blocked loop kernel.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, const float* b, float beta, float* c);

namespace reference {

// Naive triple loop, serial. Kept as the correctness reference for the
// production GEMM and as the baseline in the kernel benchmark.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, const float* b, float beta, float* c);

}  // namespace reference

}  // namespace svbrdf
