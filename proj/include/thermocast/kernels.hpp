#pragma once

#include <cstddef>

namespace thermocast::kernels {

// Dense numeric kernels in two variants: a serial reference implementation
// and an OpenMP-parallel one. The parallel kernels partition work so that
// every output element is produced by exactly one thread with the same
// per-element summation order as the serial code, so the two variants are
// bit-identical and the serial namespace doubles as the test oracle.
//
// Matrices are row-major. `acc` selects accumulate-into vs overwrite.

namespace serial {

// c[r x n] = a[r x k] * b[k x n]
void matmul_nn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc);
// c[r x n] = a[r x k] * b[n x k]^T
void matmul_nt(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc);
// c[r x n] = a[k x r]^T * b[k x n]
void matmul_tn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc);

void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void sigmoid(const double* x, double* out, std::size_t n);
void tanh(const double* x, double* out, std::size_t n);
void relu(const double* x, double* out, std::size_t n);
// out += s * x
void axpy(double s, const double* x, double* out, std::size_t n);
// out = scale * x + shift
void affine(const double* x, double scale, double shift, double* out,
            std::size_t n);
// grad accumulation helpers; y is the forward output where noted
void sigmoid_backward(const double* y, const double* dy, double* dx,
                      std::size_t n);
void tanh_backward(const double* y, const double* dy, double* dx,
                   std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n);
void mul_backward(const double* other, const double* dy, double* dx,
                  std::size_t n);
// col[j] += sum_i m[i][j] for m[rows x cols]
void colsum(const double* m, double* col, int rows, int cols);

}  // namespace serial

namespace omp {

void matmul_nn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc);
void matmul_nt(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc);
void matmul_tn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc);

void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void sigmoid(const double* x, double* out, std::size_t n);
void tanh(const double* x, double* out, std::size_t n);
void relu(const double* x, double* out, std::size_t n);
void axpy(double s, const double* x, double* out, std::size_t n);
void affine(const double* x, double scale, double shift, double* out,
            std::size_t n);
void sigmoid_backward(const double* y, const double* dy, double* dx,
                      std::size_t n);
void tanh_backward(const double* y, const double* dy, double* dx,
                   std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n);
void mul_backward(const double* other, const double* dy, double* dx,
                  std::size_t n);
void colsum(const double* m, double* col, int rows, int cols);

}  // namespace omp

// Dispatchers: route to the OpenMP kernels when the work is large enough to
// amortize the fork, otherwise to the serial reference. Both paths produce
// bit-identical results.

bool parallel_available();
// Force-disable the parallel path (used by tests and benchmarks).
void set_parallel_enabled(bool enabled);
bool parallel_enabled();

void matmul_nn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc = false);
void matmul_nt(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc = false);
void matmul_tn(const double* a, const double* b, double* c, int r, int k,
               int n, bool acc = false);
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void sigmoid(const double* x, double* out, std::size_t n);
void tanh(const double* x, double* out, std::size_t n);
void relu(const double* x, double* out, std::size_t n);
void axpy(double s, const double* x, double* out, std::size_t n);
void affine(const double* x, double scale, double shift, double* out,
            std::size_t n);
void sigmoid_backward(const double* y, const double* dy, double* dx,
                      std::size_t n);
void tanh_backward(const double* y, const double* dy, double* dx,
                   std::size_t n);
void relu_backward(const double* x, const double* dy, double* dx,
                   std::size_t n);
void mul_backward(const double* other, const double* dy, double* dx,
                  std::size_t n);
void colsum(const double* m, double* col, int rows, int cols);

}  // namespace thermocast::kernels
