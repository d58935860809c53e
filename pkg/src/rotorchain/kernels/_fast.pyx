# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled contraction kernels.

Same index conventions as the numpy reference backend. The win over numpy
comes from skipping zero MPO blocks (finite-state-machine MPOs are mostly
zeros) and from doing the intermediate transposes with tight typed loops
instead of generic strided copies.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline void _gemm_rm(double* a, double* b, double* c,
                          int m, int n, int k,
                          double alpha, double beta, bint trans_b) noexcept nogil:
    """Row-major C(m,n) = alpha * A(m,k) @ op(B) + beta * C."""
    cdef char ta
    cdef char tb = b'N'
    cdef int ldb
    if trans_b:
        # op(B) = B^T with B stored (n, k) row-major
        ta = b'T'
        ldb = k
    else:
        ta = b'N'
        ldb = n
    if m == 0 or n == 0 or k == 0:
        return
    dgemm(&ta, &tb, &n, &m, &k, &alpha, b, &ldb, a, &k, &beta, c, &n)


cdef int _nonzero_blocks(double[:, :, :, ::1] w, int[:, ::1] pairs) noexcept nogil:
    cdef int na = w.shape[0], nb = w.shape[1], p = w.shape[2], q = w.shape[3]
    cdef int a, b, i, j, count = 0
    cdef bint nz
    for a in range(na):
        for b in range(nb):
            nz = False
            for i in range(p):
                for j in range(q):
                    if w[a, b, i, j] != 0.0:
                        nz = True
                        break
                if nz:
                    break
            if nz:
                pairs[count, 0] = a
                pairs[count, 1] = b
                count += 1
    return count


def apply_heff2(cnp.ndarray lenv, cnp.ndarray w1, cnp.ndarray w2,
                cnp.ndarray renv, cnp.ndarray theta):
    """Apply the two-site effective Hamiltonian to theta."""
    cdef double[:, :, ::1] lv = np.ascontiguousarray(lenv)
    cdef double[:, :, :, ::1] w1v = np.ascontiguousarray(w1)
    cdef double[:, :, :, ::1] w2v = np.ascontiguousarray(w2)
    cdef double[:, :, ::1] rv = np.ascontiguousarray(renv)
    cdef double[:, :, :, ::1] th = np.ascontiguousarray(theta)

    cdef int wl = lv.shape[0], db = lv.shape[1], dk = lv.shape[2]
    cdef int wm = w1v.shape[1], d1o = w1v.shape[2], d1i = w1v.shape[3]
    cdef int wr = w2v.shape[1], d2o = w2v.shape[2], d2i = w2v.shape[3]
    cdef int eb = rv.shape[1], ek = rv.shape[2]

    cdef cnp.ndarray xb = np.empty((wl, d1i, db, d2i, ek))
    cdef cnp.ndarray yb = np.zeros((wm, d1o, db, d2i, ek))
    cdef cnp.ndarray ytb = np.empty((wm, d2i, d1o, db, ek))
    cdef cnp.ndarray zb = np.zeros((wr, d2o, d1o, db, ek))
    cdef cnp.ndarray ztb = np.empty((d2o, d1o, db, wr, ek))
    cdef cnp.ndarray rk = np.empty((wr, ek, eb))
    cdef cnp.ndarray o1 = np.empty((d2o, d1o, db, eb))
    cdef cnp.ndarray out = np.empty((db, d1o, d2o, eb))

    cdef double[:, :, :, :, ::1] x = xb
    cdef double[:, :, :, :, ::1] y = yb
    cdef double[:, :, :, :, ::1] yt = ytb
    cdef double[:, :, :, :, ::1] z = zb
    cdef double[:, :, :, :, ::1] zt = ztb
    cdef double[:, :, ::1] rkv = rk
    cdef double[:, :, :, ::1] o1v = o1
    cdef double[:, :, :, ::1] ov = out

    cdef cnp.ndarray xa = np.empty((wl, db, d1i, d2i, ek))
    cdef double[:, :, :, :, ::1] xav = xa

    cdef int[:, ::1] p1 = np.empty((wl * wm, 2), dtype=np.intc)
    cdef int[:, ::1] p2 = np.empty((wm * wr, 2), dtype=np.intc)
    cdef int n1, n2, ib, a, b, i, j, k, l, m

    with nogil:
        n1 = _nonzero_blocks(w1v, p1)
        n2 = _nonzero_blocks(w2v, p2)

        # x[a] = L[a] @ theta  (one fused GEMM over all a)
        _gemm_rm(&lv[0, 0, 0], &th[0, 0, 0, 0], &xav[0, 0, 0, 0, 0],
                 wl * db, d1i * d2i * ek, dk, 1.0, 0.0, 0)
        # (wl, db, d1i, [d2i*ek]) -> (wl, d1i, db, [d2i*ek])
        for a in range(wl):
            for i in range(db):
                for j in range(d1i):
                    for k in range(d2i * ek):
                        x[a, j, i, 0, 0 + k] = xav[a, i, j, 0, 0 + k]

        # y[b] += W1[a, b] @ x[a] over nonzero blocks
        for ib in range(n1):
            a = p1[ib, 0]
            b = p1[ib, 1]
            _gemm_rm(&w1v[a, b, 0, 0], &x[a, 0, 0, 0, 0], &y[b, 0, 0, 0, 0],
                     d1o, db * d2i * ek, d1i, 1.0, 1.0, 0)

        # (wm, d1o, db, d2i, ek) -> (wm, d2i, d1o, db, ek)
        for a in range(wm):
            for i in range(d1o):
                for j in range(db):
                    for k in range(d2i):
                        for l in range(ek):
                            yt[a, k, i, j, l] = y[a, i, j, k, l]

        # z[b] += W2[a, b] @ yt[a]
        for ib in range(n2):
            a = p2[ib, 0]
            b = p2[ib, 1]
            _gemm_rm(&w2v[a, b, 0, 0], &yt[a, 0, 0, 0, 0], &z[b, 0, 0, 0, 0],
                     d2o, d1o * db * ek, d2i, 1.0, 1.0, 0)

        # (wr, d2o, d1o, db, ek) -> (d2o, d1o, db, wr, ek)
        for a in range(wr):
            for i in range(d2o):
                for j in range(d1o):
                    for k in range(db):
                        for l in range(ek):
                            zt[i, j, k, a, l] = z[a, i, j, k, l]

        # R[wr, eb, ek] -> (wr, ek, eb)
        for a in range(wr):
            for i in range(eb):
                for j in range(ek):
                    rkv[a, j, i] = rv[a, i, j]

        _gemm_rm(&zt[0, 0, 0, 0, 0], &rkv[0, 0, 0], &o1v[0, 0, 0, 0],
                 d2o * d1o * db, eb, wr * ek, 1.0, 0.0, 0)

        # (d2o, d1o, db, eb) -> (db, d1o, d2o, eb)
        for i in range(d2o):
            for j in range(d1o):
                for k in range(db):
                    for l in range(eb):
                        ov[k, j, i, l] = o1v[i, j, k, l]

    return out


def update_left_env(cnp.ndarray lenv, cnp.ndarray w, cnp.ndarray a_tensor):
    """Extend the left environment across one site tensor (bra = ket)."""
    cdef double[:, :, ::1] lv = np.ascontiguousarray(lenv)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w)
    cdef double[:, :, ::1] av = np.ascontiguousarray(a_tensor)

    cdef int wl = lv.shape[0], db = lv.shape[1], dk = lv.shape[2]
    cdef int wr = wv.shape[1], do = wv.shape[2], di = wv.shape[3]
    cdef int dl = av.shape[0], d = av.shape[1], dr = av.shape[2]

    cdef cnp.ndarray tb = np.empty((wl, db, di, dr))
    cdef cnp.ndarray ttb = np.empty((wl, di, db, dr))
    cdef cnp.ndarray ub = np.zeros((wr, do, db, dr))
    cdef cnp.ndarray utb = np.empty((wr, dr, db, do))
    cdef cnp.ndarray ob = np.empty((wr, dr, dr))
    cdef cnp.ndarray res = np.empty((wr, dr, dr))

    cdef double[:, :, :, ::1] t = tb
    cdef double[:, :, :, ::1] tt = ttb
    cdef double[:, :, :, ::1] u = ub
    cdef double[:, :, :, ::1] ut = utb
    cdef double[:, :, ::1] o = ob
    cdef double[:, :, ::1] r = res

    cdef int[:, ::1] pairs = np.empty((wl * wr, 2), dtype=np.intc)
    cdef int npairs, ib, a, b, i, j, k, l

    with nogil:
        npairs = _nonzero_blocks(wv, pairs)
        _gemm_rm(&lv[0, 0, 0], &av[0, 0, 0], &t[0, 0, 0, 0],
                 wl * db, d * dr, dk, 1.0, 0.0, 0)
        for a in range(wl):
            for i in range(db):
                for j in range(di):
                    for k in range(dr):
                        tt[a, j, i, k] = t[a, i, j, k]
        for ib in range(npairs):
            a = pairs[ib, 0]
            b = pairs[ib, 1]
            _gemm_rm(&wv[a, b, 0, 0], &tt[a, 0, 0, 0], &u[b, 0, 0, 0],
                     do, db * dr, di, 1.0, 1.0, 0)
        for a in range(wr):
            for i in range(do):
                for j in range(db):
                    for k in range(dr):
                        ut[a, k, j, i] = u[a, i, j, k]
        _gemm_rm(&ut[0, 0, 0, 0], &av[0, 0, 0], &o[0, 0, 0],
                 wr * dr, dr, db * do, 1.0, 0.0, 0)
        for a in range(wr):
            for i in range(dr):
                for j in range(dr):
                    r[a, j, i] = o[a, i, j]
    return res


def update_right_env(cnp.ndarray renv, cnp.ndarray w, cnp.ndarray b_tensor):
    """Extend the right environment across one site tensor (bra = ket)."""
    cdef double[:, :, ::1] rv = np.ascontiguousarray(renv)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w)
    cdef double[:, :, ::1] bv = np.ascontiguousarray(b_tensor)

    cdef int wr = rv.shape[0], db = rv.shape[1], dk = rv.shape[2]
    cdef int wl = wv.shape[0], do = wv.shape[2], di = wv.shape[3]
    cdef int dl = bv.shape[0], d = bv.shape[1], dr = bv.shape[2]

    cdef cnp.ndarray rtb = np.empty((dk, wr, db))
    cdef cnp.ndarray tb = np.empty((dl, d, wr, db))
    cdef cnp.ndarray ttb = np.empty((wr, d, dl, db))
    cdef cnp.ndarray ub = np.zeros((wl, do, dl, db))
    cdef cnp.ndarray utb = np.empty((wl, dl, do, db))
    cdef cnp.ndarray ob = np.empty((wl, dl, dl))
    cdef cnp.ndarray res = np.empty((wl, dl, dl))

    cdef double[:, :, ::1] rt = rtb
    cdef double[:, :, :, ::1] t = tb
    cdef double[:, :, :, ::1] tt = ttb
    cdef double[:, :, :, ::1] u = ub
    cdef double[:, :, :, ::1] ut = utb
    cdef double[:, :, ::1] o = ob
    cdef double[:, :, ::1] r = res

    cdef int[:, ::1] pairs = np.empty((wl * wr, 2), dtype=np.intc)
    cdef int npairs, ib, a, b, i, j, k, l

    with nogil:
        npairs = _nonzero_blocks(wv, pairs)
        for a in range(wr):
            for i in range(db):
                for j in range(dk):
                    rt[j, a, i] = rv[a, i, j]
        _gemm_rm(&bv[0, 0, 0], &rt[0, 0, 0], &t[0, 0, 0, 0],
                 dl * d, wr * db, dk, 1.0, 0.0, 0)
        for i in range(dl):
            for j in range(d):
                for a in range(wr):
                    for k in range(db):
                        tt[a, j, i, k] = t[i, j, a, k]
        for ib in range(npairs):
            a = pairs[ib, 0]
            b = pairs[ib, 1]
            _gemm_rm(&wv[a, b, 0, 0], &tt[b, 0, 0, 0], &u[a, 0, 0, 0],
                     do, dl * db, di, 1.0, 1.0, 0)
        for a in range(wl):
            for i in range(do):
                for j in range(dl):
                    for k in range(db):
                        ut[a, j, i, k] = u[a, i, j, k]
        # out[wl, dl_ket, dl_bra] = ut[wl*dl, do*db] @ B(dl, do*db)^T
        _gemm_rm(&ut[0, 0, 0, 0], &bv[0, 0, 0], &o[0, 0, 0],
                 wl * dl, dl, do * db, 1.0, 0.0, 1)
        for a in range(wl):
            for i in range(dl):
                for j in range(dl):
                    r[a, j, i] = o[a, i, j]
    return res
