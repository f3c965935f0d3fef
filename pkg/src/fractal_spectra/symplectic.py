"""Lagrangian frames in E + E*, coisotropic subspaces, and reduction.

The ambient space is V = C^K + (C^K)* with coordinates stacked as
(E-block; E*-block) and the symplectic form

    omega((x, xi), (x', xi')) = xi'(x) - xi(x') = X^T Omega Y,
    Omega = [[0, I], [-I, 0]].

A symmetric matrix Q embeds as the graph frame [I; Q]; frames meeting
0 + E* have no such chart (the compactification divisor).

A coisotropic subspace W carries, besides frames for W and its
omega-orthogonal W^o, an explicit projection realizing W -> W/W^o in
canonical coordinates of the reduced space (boundary coordinates for
boundary traces, class coordinates for gluings).  This pins the
identification W/W^o = V_reduced so that reduction of graph frames
reproduces the matrix-level trace and gluing maps exactly, not merely up
to symplectomorphism.

The reduction t_W(L) = (L cap W)/W^o is computed for every L; its failure
to vary continuously is measured by the defect dim(L cap W^o), the
indeterminacy indicator of the induced rational map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AtInfinity, NotSymmetric, ZeroScale
from .linalg import (
    RANK_TOL,
    check_symmetric,
    intersect_columns,
    is_positive_definite,
    nullspace,
    orthonormalize,
)
from .network import VertexPartition, trace_map
from .selfsim import build_lattice


def omega_matrix(half_dim):
    k = half_dim
    out = np.zeros((2 * k, 2 * k))
    out[:k, k:] = np.eye(k)
    out[k:, :k] = -np.eye(k)
    return out


@dataclass(eq=False)
class LagrangianFrame:
    """2K x K orthonormal frame spanning a Lagrangian subspace.

    Rows 0..K-1 are E-components, rows K..2K-1 are E*-components.
    """

    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=complex)
        if cols.ndim != 2 or cols.shape[0] != 2 * cols.shape[1]:
            raise ValueError("frame must be 2K x K")
        cols = orthonormalize(cols)
        if cols.shape[1] != self.half_dim_of(cols):
            raise ValueError("frame does not have full rank K")
        k = cols.shape[1]
        iso = cols.T @ omega_matrix(k) @ cols
        if k and np.max(np.abs(iso)) > 1e-10:
            raise ValueError("frame is not isotropic")
        cols.flags.writeable = False
        self.columns = cols

    @staticmethod
    def half_dim_of(cols):
        return cols.shape[0] // 2

    @property
    def half_dim(self):
        return self.columns.shape[1]

    def projector(self):
        """Hermitian projector onto the span (for subspace comparisons)."""
        return self.columns @ self.columns.conj().T


def subspace_distance(l1: LagrangianFrame, l2: LagrangianFrame):
    """Spectral distance of the spans (sine of the largest principal angle)."""
    return float(np.linalg.norm(l1.projector() - l2.projector(), 2))


def from_sym(q) -> LagrangianFrame:
    """Graph frame [I; Q] of a symmetric matrix."""
    q = np.asarray(q, dtype=complex)
    try:
        q = check_symmetric(q)
    except NotSymmetric:
        raise
    k = q.shape[0]
    return LagrangianFrame(np.vstack([np.eye(k), q]))


def to_sym(frame: LagrangianFrame):
    """The unique Q with span [I; Q]; AtInfinity on the divisor L cap (0+E*)."""
    k = frame.half_dim
    a = frame.columns[:k, :]
    s = np.linalg.svd(a, compute_uv=False) if k else np.array([1.0])
    if s[0] == 0.0 or s[-1] <= 1e-10 * max(s[0], 1.0):
        raise AtInfinity("frame meets 0 + E*; no symmetric chart")
    q = frame.columns[k:, :] @ np.linalg.inv(a)
    return (q + q.T) / 2.0


def tau_scale_frame(frame: LagrangianFrame, alpha) -> LagrangianFrame:
    """Lift of Q -> alpha Q: multiply the E*-block by alpha."""
    if alpha == 0:
        raise ZeroScale("scaling lift needs alpha != 0")
    k = frame.half_dim
    cols = frame.columns.copy()
    cols[k:, :] = alpha * cols[k:, :]
    return LagrangianFrame(cols)


def tau_translate_frame(frame: LagrangianFrame, q0) -> LagrangianFrame:
    """Lift of Q -> Q + Q0: the shear [[I, 0], [Q0, I]]."""
    q0 = check_symmetric(q0)
    k = frame.half_dim
    cols = frame.columns.copy()
    cols[k:, :] = cols[k:, :] + q0 @ cols[:k, :]
    return LagrangianFrame(cols)


def random_symplectic(k, rng, shears=3):
    """Random real symplectic matrix: alternating lower/upper shears by
    random symmetric blocks, finished with the rotation J."""
    m = np.eye(2 * k)
    for step in range(shears):
        s = rng.standard_normal((k, k))
        s = (s + s.T) / 2.0
        shear = np.eye(2 * k)
        if step % 2 == 0:
            shear[k:, :k] = s
        else:
            shear[:k, k:] = s
        m = shear @ m
    j = np.zeros((2 * k, 2 * k))
    j[:k, k:] = -np.eye(k)
    j[k:, :k] = np.eye(k)
    return j @ m


def random_lagrangian(k, rng, at_infinity=False) -> LagrangianFrame:
    """Random frame: a graph frame, optionally pushed through a random real
    symplectic map so it can meet the divisor at infinity."""
    q = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    frame = from_sym((q + q.T) / 2.0)
    if at_infinity:
        frame = LagrangianFrame(random_symplectic(k, rng) @ frame.columns)
    return frame


@dataclass(eq=False)
class CoisotropicSubspace:
    """W with cached W^o and an explicit quotient chart.

    frame:    2K x (K+p) orthonormal columns spanning W
    wo_frame: 2K x (K-p) orthonormal columns spanning W^o
    proj:     2p x 2K matrix realizing W -> W/W^o = V_p in canonical
              coordinates; ker(proj restricted to W) = W^o and the
              pullback of the canonical form of V_p along proj equals
              omega on W.
    """

    frame: np.ndarray
    wo_frame: np.ndarray
    proj: np.ndarray

    def __post_init__(self):
        self.frame = orthonormalize(np.asarray(self.frame, dtype=complex))
        self.wo_frame = orthonormalize(np.asarray(self.wo_frame, dtype=complex))
        self.proj = np.asarray(self.proj, dtype=complex)
        k = self.half_dim
        p = self.reduced_half_dim
        if self.frame.shape[1] != k + p or self.wo_frame.shape[1] != k - p:
            raise ValueError("dimension bookkeeping failed")
        om = omega_matrix(k)
        if self.wo_frame.shape[1]:
            if np.max(np.abs(self.frame.T @ om @ self.wo_frame)) > 1e-10:
                raise ValueError("W^o is not omega-orthogonal to W")
            if np.max(np.abs(self.proj @ self.wo_frame)) > 1e-10:
                raise ValueError("quotient chart does not kill W^o")
        pw = self.proj @ self.frame
        pulled = pw.T @ omega_matrix(p) @ pw
        native = self.frame.T @ om @ self.frame
        if np.max(np.abs(pulled - native)) > 1e-9:
            raise ValueError("quotient chart is not symplectic")

    @property
    def half_dim(self):
        return self.frame.shape[0] // 2

    @property
    def reduced_half_dim(self):
        return self.proj.shape[0] // 2


def w_trace(k, boundary) -> CoisotropicSubspace:
    """W = C^F + (C^{dF})*; reduction by it is the boundary trace."""
    boundary = list(boundary)
    p = len(boundary)
    interior = [i for i in range(k) if i not in set(boundary)]
    frame = np.zeros((2 * k, k + p))
    for c, i in enumerate(range(k)):
        frame[i, c] = 1.0
    for c, b in enumerate(boundary):
        frame[k + b, k + c] = 1.0
    wo = np.zeros((2 * k, k - p))
    for c, i in enumerate(interior):
        wo[i, c] = 1.0
    proj = np.zeros((2 * p, 2 * k))
    for c, b in enumerate(boundary):
        proj[c, b] = 1.0
        proj[p + c, k + b] = 1.0
    return CoisotropicSubspace(frame, wo, proj)


def w_glue(part: VertexPartition) -> CoisotropicSubspace:
    """W = Im(s) + (C^F)*; reduction by it is the gluing pushforward."""
    k = part.size
    members = part.members()
    m = len(members)
    frame = np.zeros((2 * k, m + k))
    for c, group in enumerate(members):
        for v in group:
            frame[v, c] = 1.0
    for c in range(k):
        frame[k + c, m + c] = 1.0
    wo_cols = []
    for group in members:
        for v in group[1:]:
            col = np.zeros(2 * k)
            col[k + group[0]] = 1.0
            col[k + v] = -1.0
            wo_cols.append(col)
    wo = np.stack(wo_cols, axis=1) if wo_cols else np.zeros((2 * k, 0))
    proj = np.zeros((2 * m, 2 * k))
    for c, group in enumerate(members):
        for v in group:
            proj[c, v] = 1.0 / len(group)  # class average reads g from s(g)
            proj[m + c, k + v] = 1.0  # class sum is s* on the dual block
    return CoisotropicSubspace(frame, wo, proj)


def w_renorm(structure, level=1) -> CoisotropicSubspace:
    """The renormalization subspace inside V of {copies}^n x F.

    W = Im(s) + (s*)^{-1}((C^{dF_n})*) for the level-n identification map
    s; reducing the block-diagonal frame of N^n copies by it is the whole
    n-step renormalization, and the quotient chart lands in V_F through
    the boundary identification."""
    from itertools import product

    lat = build_lattice(structure, level)
    k = structure.cell_size
    addresses = list(product(range(structure.num_copies), repeat=level))
    npts = len(addresses) * k
    fibers = [[] for _ in range(lat.num_vertices)]
    for a, addr in enumerate(addresses):
        cm = lat.cell_map(addr)
        for x in range(k):
            fibers[cm[x]].append(a * k + x)
    bset = set(lat.boundary)
    frame_cols = []
    wo_cols = []
    for w, fiber in enumerate(fibers):
        col = np.zeros(2 * npts)
        for p in fiber:
            col[p] = 1.0
        frame_cols.append(col)  # Im(s)
        if w not in bset:
            wo_cols.append(col)  # s(C^{F_1 \ dF_1})
    for fiber in fibers:
        for p in fiber[1:]:  # ker(s*): fiber differences on the dual block
            col = np.zeros(2 * npts)
            col[npts + fiber[0]] = 1.0
            col[npts + p] = -1.0
            frame_cols.append(col)
            wo_cols.append(col)
    for b in lat.boundary:  # dual directions over boundary fibers
        col = np.zeros(2 * npts)
        for p in fibers[b]:
            col[npts + p] = 1.0
        frame_cols.append(col)
    frame = np.stack(frame_cols, axis=1)
    wo = np.stack(wo_cols, axis=1) if wo_cols else np.zeros((2 * npts, 0))
    proj = np.zeros((2 * k, 2 * npts))
    for c, b in enumerate(lat.boundary):
        fiber = fibers[b]
        for p in fiber:
            proj[c, p] = 1.0 / len(fiber)
            proj[k + c, npts + p] = 1.0
    return CoisotropicSubspace(frame, wo, proj)


def compose(w: CoisotropicSubspace, w_next: CoisotropicSubspace) -> CoisotropicSubspace:
    """The coisotropic W' + W^o realizing t_{W'} after t_W in one step.

    ``w_next`` lives in the reduced space of ``w``; the composed quotient
    chart is the product of the two charts (the composition law of
    reductions)."""
    if w_next.half_dim != w.reduced_half_dim:
        raise ValueError("w_next must live in the reduced space of w")
    pw = w.proj @ w.frame  # coordinates of W in the reduced space
    lift = w.frame @ np.linalg.lstsq(pw, w_next.frame, rcond=None)[0]
    frame = np.hstack([w.wo_frame, lift])
    lift_o = w.frame @ np.linalg.lstsq(pw, w_next.wo_frame, rcond=None)[0]
    wo = np.hstack([w.wo_frame, lift_o])
    return CoisotropicSubspace(frame, wo, w_next.proj @ w.proj)


def reduce_frame(l: LagrangianFrame, w: CoisotropicSubspace) -> LagrangianFrame:
    """Symplectic reduction t_W(L) = (L cap W)/W^o in the chart of W.

    Total: defined at every L, including indeterminacy points of the
    rational extension (there the output is the distinguished value that
    continues the map along generic curves)."""
    if l.half_dim != w.half_dim:
        raise ValueError("frame and subspace live in different spaces")
    meet = intersect_columns(l.columns, w.frame)
    reduced = orthonormalize(w.proj @ meet)
    p = w.reduced_half_dim
    if reduced.shape[1] != p:
        raise ValueError(
            f"reduction produced rank {reduced.shape[1]}, expected {p}"
        )
    return LagrangianFrame(reduced)


def reduction_defect(l: LagrangianFrame, w: CoisotropicSubspace, tol=RANK_TOL):
    """dim(L cap W^o): zero exactly where the rational reduction is regular."""
    if w.wo_frame.shape[1] == 0:
        return 0
    ns = nullspace(np.hstack([l.columns, -w.wo_frame]), tol)
    return ns.shape[1]


def in_siegel(l: LagrangianFrame, tol=1e-10):
    """Membership in the Siegel domain: -i omega(conj X, X) > 0 on L.

    For graph frames this is positive definiteness of Im Q."""
    k = l.half_dim
    h = -1j * (l.columns.conj().T @ omega_matrix(k) @ l.columns)
    h = (h + h.conj().T) / 2.0
    return is_positive_definite(h, tol)


def orthogonal_lagrangian(l: LagrangianFrame) -> LagrangianFrame:
    """conj(J L): the Hermitian-orthogonal complement of a Lagrangian."""
    k = l.half_dim
    j = np.zeros((2 * k, 2 * k))
    j[:k, k:] = -np.eye(k)
    j[k:, :k] = np.eye(k)
    return LagrangianFrame(np.conj(j @ l.columns))


def frame_trace(l: LagrangianFrame, boundary) -> LagrangianFrame:
    """Boundary-trace reduction of a frame (convenience wrapper)."""
    return reduce_frame(l, w_trace(l.half_dim, boundary))


def check_trace_identity(q, boundary, tol=1e-9):
    """Residual of t_{W_dF}(L_Q) = L_{Q_dF} (for tests and verify)."""
    lhs = reduce_frame(from_sym(q), w_trace(np.asarray(q).shape[0], boundary))
    rhs = from_sym(trace_map(q, boundary))
    return subspace_distance(lhs, rhs)
