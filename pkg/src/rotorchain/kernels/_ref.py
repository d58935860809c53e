"""Pure-numpy contraction kernels (fallback backend).

Index conventions shared with the compiled backend:
  MPS tensor      A[Dl, d, Dr]
  MPO tensor      W[wl, wr, out, in]
  left  env       L[wl, D_bra, D_ket]
  right env       R[wr, D_bra, D_ket]
  two-site vector theta[Dl, d1, d2, Dr]
"""

import numpy as np


def apply_heff2(lenv, w1, w2, renv, theta):
    """Apply the two-site effective Hamiltonian to theta."""
    wl, db, dk = lenv.shape
    _, wm, d1o, d1i = w1.shape
    _, wr, d2o, d2i = w2.shape
    _, eb, ek = renv.shape
    x = (lenv.reshape(wl * db, dk) @ theta.reshape(dk, -1))
    x = x.reshape(wl, db, d1i, d2i, ek).transpose(0, 2, 1, 3, 4).copy()
    w1t = w1.transpose(1, 2, 0, 3).reshape(wm * d1o, wl * d1i)
    y = (w1t @ x.reshape(wl * d1i, -1))
    y = y.reshape(wm, d1o, db, d2i, ek).transpose(0, 3, 1, 2, 4).copy()
    w2t = w2.transpose(1, 2, 0, 3).reshape(wr * d2o, wm * d2i)
    z = (w2t @ y.reshape(wm * d2i, -1))
    z = z.reshape(wr, d2o, d1o, db, ek).transpose(1, 2, 3, 0, 4).copy()
    rk = renv.transpose(0, 2, 1).reshape(wr * ek, eb)
    out = z.reshape(-1, wr * ek) @ rk
    return out.reshape(d2o, d1o, db, eb).transpose(2, 1, 0, 3).copy()


def update_left_env(lenv, w, a):
    """Extend the left environment across one site tensor a (bra = ket)."""
    wl, db, dk = lenv.shape
    _, wr, do, di = w.shape
    dl, d, dr = a.shape
    t = (lenv.reshape(wl * db, dk) @ a.reshape(dl, d * dr))
    t = t.reshape(wl, db, di, dr).transpose(0, 2, 1, 3).copy()
    wt = w.transpose(1, 2, 0, 3).reshape(wr * do, wl * di)
    u = (wt @ t.reshape(wl * di, -1)).reshape(wr, do, db, dr)
    u = u.transpose(0, 3, 2, 1).copy()  # (wr, dr_ket, db, do)
    out = u.reshape(wr * dr, db * do) @ a.reshape(dl * d, dr)
    return out.reshape(wr, dr, dr).transpose(0, 2, 1).copy()


def update_right_env(renv, w, b):
    """Extend the right environment across one site tensor b (bra = ket)."""
    wr, db, dk = renv.shape
    wl, _, do, di = w.shape
    dl, d, dr = b.shape
    rt = renv.transpose(2, 0, 1).reshape(dk, wr * db)
    t = (b.reshape(dl * d, dr) @ rt).reshape(dl, d, wr, db)
    t = t.transpose(2, 1, 0, 3).copy()  # (wr, di, dl_ket, db)
    wt = w.transpose(0, 2, 1, 3).reshape(wl * do, wr * di)
    u = (wt @ t.reshape(wr * di, -1)).reshape(wl, do, dl, db)
    u = u.transpose(0, 2, 1, 3).copy()  # (wl, dl_ket, do, db)
    bb = b.reshape(dl, d * dr)
    out = u.reshape(wl * dl, do * db) @ bb.T
    return out.reshape(wl, dl, dl).transpose(0, 2, 1).copy()
