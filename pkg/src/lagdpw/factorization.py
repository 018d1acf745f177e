"""Numerical Birkhoff and Iwasawa splittings of sigma-twisted loops.

Birkhoff
--------
g = f_minus f_plus with f_minus = I + O(lambda^{-1}) and f_plus a plus-loop.
Writing f_minus^{-1} = I + sum_{m<0} lambda^m B_m, the requirement that
f_minus^{-1} g has no negative Fourier modes is *linear* in the B_m, so the
split reduces to one small least-squares system per matrix row.  Singularity
of that system is exactly the numerical signal that g left the big cell.

For twisted inputs the unknowns are restricted structurally: a Fourier
coefficient of a twisted group loop at degree m can only populate the three
entries (i, l) with w_i - w_l = 2m (mod 6) (see su3.group_slot_mask).  Note
this is the mod-3 entry grading induced by sigma^2, not the sigma-eigenspace
pattern g_{m mod 6}: the latter holds for algebra-valued loops only (already
exp(z lambda^{-1} A) for the Clifford coefficient A has its lambda^{-2}
coefficient proportional to A^2, which sits outside the g_4 pattern).  The
residual order-2 twisting condition is nonlinear and is inherited from
uniqueness of the factorization rather than imposed.

Iwasawa
-------
g = h v_plus with h unitary on S^1 and v_plus a plus-loop whose lambda = 0
coefficient is upper triangular with positive diagonal (diagonal, in the
twisted case).  In the Grassmannian picture W = g H_+ equals h H_+, and the
columns {lambda^k h e_j} are the unique L^2-orthonormal basis of W whose
change of basis from {lambda^k g e_j} is block-Toeplitz "anti-triangular":

    lambda^k g e_j = sum_{m >= k} lambda^m h (V_{m-k} e_j).

Orthonormalizing the multiplication operator columns from the *highest*
source mode downward therefore reproduces {lambda^k h e_j}; with source
modes 0..2*trunc the k = 0 block converges to h at the coefficient-decay
rate of v_plus.  A QR with the diagonal of R phase-fixed to be real positive
implements exactly the positive-diagonal (unique) splitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import su3
from .errors import IllConditioned, OutsideBigCell
from .loops import (LoopMatrix, loop_product, max_distance_on_circle)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class BirkhoffFactors:
    f_minus: LoopMatrix  # degrees <= 0, degree-0 coefficient = I exactly
    f_plus: LoopMatrix   # degrees >= 0
    residual: float


@dataclass(frozen=True)
class IwasawaFactors:
    unitary: LoopMatrix  # evaluates in SU(3) on S^1
    v_plus: LoopMatrix   # degrees >= 0, v_plus(0) positive upper triangular
    residual: float


def _minus_series_unknowns(trunc: int, twisted: bool):
    """Allowed (degree m, column l) pairs per row for f_minus^{-1} = I + sum B_m."""
    slots = []
    for m in range(-trunc, 0):
        if twisted:
            mask = su3.group_slot_mask(m)
            cols = [np.nonzero(mask[i])[0] for i in range(3)]
        else:
            cols = [np.arange(3)] * 3
        slots.append((m, cols))
    return slots


def birkhoff(g: LoopMatrix, trunc: int) -> BirkhoffFactors:
    """Left Birkhoff split g = f_minus f_plus, f_minus normalized at infinity.

    Raises OutsideBigCell when the mode-matching system is numerically
    singular (condition number beyond 1e12).
    """
    g = g.trim()
    if g.min_degree >= 0:
        f_minus = LoopMatrix.identity(twisted=g.twisted)
        res = 0.0
        return BirkhoffFactors(f_minus, g, res)

    slots = _minus_series_unknowns(trunc, g.twisted)
    d_lo = -trunc + g.min_degree
    eq_degrees = range(d_lo, 0)

    b_coeffs = {m: np.zeros((3, 3), dtype=complex) for m, _ in slots}
    for i in range(3):
        unknown_index = []  # (m, l)
        for m, cols in slots:
            for l in cols[i]:
                unknown_index.append((m, int(l)))
        n_unk = len(unknown_index)
        rows = []
        rhs = []
        for d in eq_degrees:
            gd = g.coefficient(d)
            for j in range(3):
                row = np.zeros(n_unk, dtype=complex)
                for c, (m, l) in enumerate(unknown_index):
                    row[c] = g.coefficient(d - m)[l, j]
                rows.append(row)
                rhs.append(-gd[i, j])
        a = np.array(rows)
        b = np.array(rhs)
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[0] <= 0 or sv[-1] == 0 or sv[0] / sv[-1] > COND_LIMIT:
            raise OutsideBigCell("mode-matching system singular")
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
        misfit = np.max(np.abs(a @ x - b))
        if misfit > 1e-6 * (1.0 + np.max(np.abs(b))):
            # nonzero partial indices make the system inconsistent rather
            # than singular: the degree-0 coefficient of f_minus^{-1} is I
            raise OutsideBigCell(f"mode matching inconsistent (misfit {misfit:.2e})")
        for c, (m, l) in enumerate(unknown_index):
            b_coeffs[m][i, l] = x[c]

    b_coeffs[0] = np.eye(3, dtype=complex)
    f_minus_inv = LoopMatrix.from_coeffs(b_coeffs, twisted=g.twisted)

    # Inverse of I + (strictly negative modes) is again I + negative modes;
    # the recursion below is exact in the truncated formal series.
    inv = np.zeros((trunc + 1, 3, 3), dtype=complex)  # index k holds degree -k
    inv[0] = np.eye(3)
    for k in range(1, trunc + 1):
        acc = np.zeros((3, 3), dtype=complex)
        for m in range(1, k + 1):
            acc += f_minus_inv.coefficient(-m) @ inv[k - m]
        inv[k] = -acc
    f_minus = LoopMatrix(inv[::-1], -trunc, g.twisted).trim(0.0)

    f_plus = loop_product(f_minus_inv, g).restrict(0, trunc).trim(0.0)
    recon = loop_product(f_minus, f_plus)
    residual = max_distance_on_circle(g, recon)
    return BirkhoffFactors(f_minus, f_plus, residual)


def iwasawa(g: LoopMatrix, trunc: int, source_modes: int | None = None) -> IwasawaFactors:
    """Unique Iwasawa split g = h v_plus with positive-diagonal normalization.

    Raises IllConditioned when the orthonormalization collapses (relative
    diagonal of the triangular factor below 1/COND_LIMIT).
    """
    g = g.trim()
    kmax = 2 * trunc if source_modes is None else source_modes
    lo, hi = g.min_degree, g.max_degree
    n_modes = hi + kmax - lo + 1

    # Multiplication-by-g on the truncated positive-mode space, columns
    # ordered source mode kmax..0 (descending), j = 0,1,2 within a block.
    m = np.zeros((3 * n_modes, 3 * (kmax + 1)), dtype=complex)
    for ci, k in enumerate(range(kmax, -1, -1)):
        # column lambda^k g e_j occupies modes k+lo .. k+hi, i.e. row blocks
        # k .. k + (hi - lo) relative to the global window start lo
        m[3 * k:3 * (k + hi - lo + 1), 3 * ci:3 * ci + 3] = \
            g.coeffs.reshape(-1, 3)
    q, r = np.linalg.qr(m, mode="reduced")
    diag = np.diagonal(r)
    mags = np.abs(diag)
    if mags.min() <= mags.max() / COND_LIMIT:
        raise IllConditioned("truncated column space numerically degenerate")
    q = q * np.conj(diag / mags)[None, :]  # force R diagonal real positive

    h_block = q[:, -3:]  # source mode 0: columns are the h e_j coefficients
    h_coeffs = h_block.reshape(n_modes, 3, 3)
    h = LoopMatrix(h_coeffs, lo, twisted=g.twisted)
    h = h.restrict(max(lo, -trunc), min(h.max_degree, trunc)).trim(0.0)

    v_plus = loop_product(h.conj_transpose(), g).restrict(0, trunc).trim(0.0)
    recon = loop_product(h, v_plus)
    residual = max_distance_on_circle(g, recon)
    return IwasawaFactors(h, v_plus, residual)
