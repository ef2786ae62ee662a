# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled gradient kernels: BLAS matmuls plus fused elementwise passes.

Interface mirrors _numpy_backend; returned arrays are internal buffers
owned by the kernel object and stay valid until its next call.
"""

import numpy as np

from scipy.linalg.cython_blas cimport dgemm, dgemv


name = "compiled"

cdef char TRANS_N = b"N"
cdef char TRANS_T = b"T"



cdef object _c64(object arr):
    # contiguous float64 view; read-only inputs (e.g. Dataset arrays) are
    # copied because the typed memoryviews below require writable buffers
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if not out.flags.writeable:
        out = out.copy()
    return out

cdef void _matmul_abt(double* a, double* b, double* c, int m, int n, int k) noexcept nogil:
    # C_rm[m x n] = A_rm[m x k] @ B_rm[n x k]^T, all row-major contiguous
    cdef int mf = n, nf = m, kf = k
    cdef int lda = k, ldb = k, ldc = n
    cdef double one = 1.0, zero = 0.0
    dgemm(&TRANS_T, &TRANS_N, &mf, &nf, &kf, &one, b, &lda, a, &ldb, &zero, c, &ldc)


cdef void _matmul_atb(double* a, double* b, double* c, int k, int m, int n) noexcept nogil:
    # C_rm[m x n] = A_rm[k x m]^T @ B_rm[k x n], all row-major contiguous
    cdef int mf = n, nf = m, kf = k
    cdef int lda = n, ldb = m, ldc = n
    cdef double one = 1.0, zero = 0.0
    dgemm(&TRANS_N, &TRANS_T, &mf, &nf, &kf, &one, b, &lda, a, &ldb, &zero, c, &ldc)


cdef void _mv_rm(double* phi, double* x, double* out, int rows, int cols) noexcept nogil:
    # out[rows] = Phi_rm[rows x cols] @ x
    cdef int mf = cols, nf = rows, inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv(&TRANS_T, &mf, &nf, &one, phi, &mf, x, &inc, &zero, out, &inc)


cdef void _mtv_rm(double* phi, double* x, double* out, int rows, int cols) noexcept nogil:
    # out[cols] = Phi_rm[rows x cols]^T @ x
    cdef int mf = cols, nf = rows, inc = 1
    cdef double one = 1.0, zero = 0.0
    dgemv(&TRANS_N, &mf, &nf, &one, phi, &mf, x, &inc, &zero, out, &inc)


cdef class ReferenceKernel:
    """Data-term gradients of mean((f - y)^2) for a fixed training set."""

    cdef readonly object X_arr, y_arr
    cdef double[:, ::1] X
    cdef double[::1] y
    cdef readonly double scale
    cdef readonly bint with_bias
    cdef readonly int P, d
    cdef int N
    cdef object Z_arr, M_arr, gW_arr, ga_arr, gb_arr, e_arr, bias_arr
    cdef double[:, ::1] Z, M, gW
    cdef double[::1] ga, gb, e, bias0

    def __init__(self, X, y, double scale, bint with_bias=False):
        self.X_arr = _c64(X)
        self.y_arr = _c64(y)
        self.X = self.X_arr
        self.y = self.y_arr
        self.scale = scale
        self.with_bias = with_bias
        self.P = self.X.shape[0]
        self.d = self.X.shape[1]
        self.N = -1
        self.e_arr = np.empty(self.P)
        self.e = self.e_arr

    cdef void _ensure(self, int N):
        if N == self.N:
            return
        self.N = N
        self.Z_arr = np.empty((self.P, N))
        self.M_arr = np.empty((self.P, N))
        self.gW_arr = np.empty((N, self.d))
        self.ga_arr = np.empty(N)
        self.gb_arr = np.empty(N)
        self.bias_arr = np.zeros(N)
        self.Z = self.Z_arr
        self.M = self.M_arr
        self.gW = self.gW_arr
        self.ga = self.ga_arr
        self.gb = self.gb_arr
        self.bias0 = self.bias_arr

    def grads(self, W, a, b=None):
        cdef double[:, ::1] Wv = _c64(W)
        cdef double[::1] av = _c64(a)
        cdef int N = Wv.shape[0]
        if Wv.shape[1] != self.d:
            raise ValueError(f"W has {Wv.shape[1]} columns, expected {self.d}")
        self._ensure(N)
        cdef double[::1] bv
        if self.with_bias:
            bv = _c64(b)
        else:
            bv = self.bias0
        cdef int P = self.P, d = self.d
        cdef int p, i
        cdef double z, ep, acc = 0.0
        cdef double coef = 2.0 * self.scale / P
        cdef double scale = self.scale
        with nogil:
            _matmul_abt(&self.X[0, 0], &Wv[0, 0], &self.Z[0, 0], P, N, d)
            for p in range(P):
                for i in range(N):
                    z = self.Z[p, i] + bv[i]
                    self.Z[p, i] = z if z > 0.0 else 0.0
            _mv_rm(&self.Z[0, 0], &av[0], &self.e[0], P, N)
            for p in range(P):
                ep = scale * self.e[p] - self.y[p]
                self.e[p] = ep
                acc += ep * ep
            for i in range(N):
                self.gb[i] = 0.0
            for p in range(P):
                ep = self.e[p]
                for i in range(N):
                    if self.Z[p, i] > 0.0:
                        self.M[p, i] = ep
                        self.gb[i] += ep
                    else:
                        self.M[p, i] = 0.0
            _mtv_rm(&self.Z[0, 0], &self.e[0], &self.ga[0], P, N)
            for i in range(N):
                self.ga[i] = coef * self.ga[i]
            _matmul_atb(&self.M[0, 0], &self.X[0, 0], &self.gW[0, 0], P, N, d)
            for i in range(N):
                z = coef * av[i]
                for p in range(d):
                    self.gW[i, p] = z * self.gW[i, p]
                self.gb[i] = z * self.gb[i]
        if self.with_bias:
            return self.gW_arr, self.ga_arr, self.gb_arr, acc / P
        return self.gW_arr, self.ga_arr, None, acc / P


cdef class ParticleKernel:
    """Per-particle sufficient statistics against a frozen residual."""

    cdef readonly object X_arr
    cdef double[:, ::1] X
    cdef readonly double s_f
    cdef readonly bint with_bias
    cdef readonly int P, d
    cdef int B
    cdef object Z_arr, H_arr, C1_arr, C2_arr, G_arr, Gb_arr, bias_arr, sfa_arr
    cdef double[:, ::1] Z, H, G
    cdef double[::1] C1, C2, Gb, bias0, sfa

    def __init__(self, X, double s_f, bint with_bias=False):
        self.X_arr = _c64(X)
        self.X = self.X_arr
        self.s_f = s_f
        self.with_bias = with_bias
        self.P = self.X.shape[0]
        self.d = self.X.shape[1]
        self.B = -1

    cdef void _ensure(self, int B):
        if B == self.B:
            return
        self.B = B
        self.Z_arr = np.empty((self.P, B))
        self.H_arr = np.empty((self.P, B))
        self.C1_arr = np.empty(B)
        self.C2_arr = np.empty(B)
        self.G_arr = np.empty((B, self.d))
        self.Gb_arr = np.empty(B)
        self.bias_arr = np.zeros(B)
        self.sfa_arr = np.empty(B)
        self.Z = self.Z_arr
        self.H = self.H_arr
        self.C1 = self.C1_arr
        self.C2 = self.C2_arr
        self.G = self.G_arr
        self.Gb = self.Gb_arr
        self.bias0 = self.bias_arr
        self.sfa = self.sfa_arr

    def stats(self, W, a, b, r):
        cdef double[:, ::1] Wv = _c64(W)
        cdef double[::1] av = _c64(a)
        cdef double[::1] rv = _c64(r)
        cdef int B = Wv.shape[0]
        if Wv.shape[1] != self.d:
            raise ValueError(f"W has {Wv.shape[1]} columns, expected {self.d}")
        self._ensure(B)
        cdef double[::1] bv
        if self.with_bias:
            bv = _c64(b)
        else:
            bv = self.bias0
        cdef int P = self.P, d = self.d
        cdef int p, j
        cdef double z, ph, rp, coef0 = -2.0 * self.s_f / P
        cdef double sf = self.s_f
        with nogil:
            _matmul_abt(&self.X[0, 0], &Wv[0, 0], &self.Z[0, 0], P, B, d)
            for j in range(B):
                self.C2[j] = 0.0
                self.Gb[j] = 0.0
                self.sfa[j] = sf * av[j]
            for p in range(P):
                rp = rv[p]
                for j in range(B):
                    z = self.Z[p, j] + bv[j]
                    if z > 0.0:
                        self.Z[p, j] = z
                        self.C2[j] += z * z
                        ph = rp - self.sfa[j] * z
                        self.H[p, j] = ph
                        self.Gb[j] += ph
                    else:
                        self.Z[p, j] = 0.0
                        self.H[p, j] = 0.0
            _mtv_rm(&self.Z[0, 0], &rv[0], &self.C1[0], P, B)
            _matmul_atb(&self.H[0, 0], &self.X[0, 0], &self.G[0, 0], P, B, d)
            for j in range(B):
                z = coef0 * av[j]
                for p in range(d):
                    self.G[j, p] = z * self.G[j, p]
                self.Gb[j] = z * self.Gb[j]
        if self.with_bias:
            return self.C1_arr, self.C2_arr, self.G_arr, self.Gb_arr
        return self.C1_arr, self.C2_arr, self.G_arr, None
