"""Grassmann-algebra carrier of the renormalization lift.

Elements live in the balanced subalgebra spanned by monomials with equal
numbers of conjugate and plain generators.  A coefficient table maps index
pairs (I, J), encoded as bitmasks over the ground set, to complex numbers;
the monomial behind key (I, J) is the paired product

    etabar_{i1} eta_{j1} etabar_{i2} eta_{j2} ...   (I, J ascending),

so the table of exp(etabar Q eta) is literally the minor table of Q:
coefficient(I, J) = det Q[I, J].  All operation signs reduce to
cross-inversion parities between bitmasks, which keeps the determinant
identities (boundary reduction, gluing morphism, top pairing) exact with
plus signs throughout.

Products of disjoint copies and the boundary reduction are what the
renormalization lift is made of; copies are glued one at a time so the
big intermediate algebra of the disjoint union is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import OrderUnstable, ZeroScale
from .linalg import check_symmetric
from .network import q_matrix
from .selfsim import build_lattice


def _mask(indices):
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def _indices(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _xinv(a, b):
    """Number of pairs (x in a, y in b) with x > y, mod 2 relevant."""
    count = 0
    m = a
    while m:
        low = m & -m
        count += (b & (low - 1)).bit_count()
        m ^= low
    return count


def _merge_sign(i1, j1, i2, j2):
    """Sign of m(i1,j1) * m(i2,j2) = sign * m(i1|i2, j1|j2), disjoint masks."""
    return -1 if (_xinv(i1, i2) + _xinv(j1, j2)) % 2 else 1


def _perm_inversions(seq):
    n = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                n += 1
    return n


@dataclass(eq=False)
class GrassmannElement:
    """Sparse coefficient table over balanced monomial keys (I, J)."""

    ground_size: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        full = (1 << self.ground_size) - 1
        clean = {}
        for (i, j), c in self.coeffs.items():
            if i & ~full or j & ~full:
                raise ValueError("monomial key outside ground set")
            if i.bit_count() != j.bit_count():
                raise ValueError("unbalanced monomial key")
            c = complex(c)
            if c != 0:
                clean[(i, j)] = c
        self.coeffs = clean

    @classmethod
    def unit(cls, ground_size):
        return cls(ground_size, {(0, 0): 1.0})

    def get(self, i_mask, j_mask):
        return self.coeffs.get((i_mask, j_mask), 0j)

    def norm(self):
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values())))

    def scaled(self, factor):
        return GrassmannElement(
            self.ground_size, {k: factor * c for k, c in self.coeffs.items()}
        )

    def __add__(self, other):
        if self.ground_size != other.ground_size:
            raise ValueError("ground sets differ")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0j) + c
        return GrassmannElement(self.ground_size, out)

    def __sub__(self, other):
        return self + other.scaled(-1.0)


def exp_eta(q) -> GrassmannElement:
    """All minors of a symmetric matrix: coefficient(I, J) = det Q[I, J]."""
    q = check_symmetric(q)
    k = q.shape[0]
    support = [i for i in range(k) if np.any(q[i, :] != 0) or np.any(q[:, i] != 0)]
    coeffs = {(0, 0): 1.0 + 0j}
    for size in range(1, len(support) + 1):
        for rows in combinations(support, size):
            for cols in combinations(support, size):
                d = complex(np.linalg.det(q[np.ix_(rows, cols)]))
                if d != 0:
                    coeffs[(_mask(rows), _mask(cols))] = d
    return GrassmannElement(k, coeffs)


def mul(x: GrassmannElement, y: GrassmannElement) -> GrassmannElement:
    """Algebra product (anticommuting generators, squares vanish).

    Balanced monomials have even total degree, so the subalgebra is
    commutative and iterating over the sparser factor is safe."""
    if x.ground_size != y.ground_size:
        raise ValueError("ground sets differ")
    if len(y.coeffs) > len(x.coeffs):
        x, y = y, x
    out = {}
    for (i2, j2), c2 in y.coeffs.items():
        for (i1, j1), c1 in x.coeffs.items():
            if i1 & i2 or j1 & j2:
                continue
            key = (i1 | i2, j1 | j2)
            val = _merge_sign(i1, j1, i2, j2) * c1 * c2
            out[key] = out.get(key, 0j) + val
    return GrassmannElement(x.ground_size, out)


def reindex(x: GrassmannElement, mapping, new_ground) -> GrassmannElement:
    """Algebra morphism sending generator t to generator mapping[t].

    Collisions inside one monomial kill it (nilpotence); signs come from
    re-sorting the mapped index lists."""
    out = {}
    for (i, j), c in x.coeffs.items():
        img_i = [int(mapping[t]) for t in _indices(i)]
        img_j = [int(mapping[t]) for t in _indices(j)]
        if len(set(img_i)) != len(img_i) or len(set(img_j)) != len(img_j):
            continue
        sign = -1 if (_perm_inversions(img_i) + _perm_inversions(img_j)) % 2 else 1
        key = (_mask(img_i), _mask(img_j))
        out[key] = out.get(key, 0j) + sign * c
    return GrassmannElement(new_ground, out)


def glue_morphism(x: GrassmannElement, part) -> GrassmannElement:
    """Pushforward along a vertex identification; lifts the gluing map:
    glue_morphism(exp_eta(Q)) = exp_eta(s^T Q s)."""
    if part.size != x.ground_size:
        raise ValueError("partition size must match the ground set")
    return reindex(x, part.class_of, part.num_classes)


def interior_reduce(x: GrassmannElement, interior) -> GrassmannElement:
    """Interior product by the paired top monomial of the interior set.

    Lifts the boundary trace: on exp_eta(Q) it yields
    det(Q_interior) * exp_eta(Q_boundary).  The result lives on the
    complement, compacted in increasing order."""
    interior = sorted(set(interior))
    if any(t < 0 or t >= x.ground_size for t in interior):
        raise ValueError("interior must be a subset of the ground set")
    imask = _mask(interior)
    rest = [t for t in range(x.ground_size) if t not in set(interior)]
    slot = {t: s for s, t in enumerate(rest)}
    out = {}
    for (i, j), c in x.coeffs.items():
        if i & imask != imask or j & imask != imask:
            continue
        i0, j0 = i & ~imask, j & ~imask
        sign = _merge_sign(imask, imask, i0, j0)
        key = (
            _mask([slot[t] for t in _indices(i0)]),
            _mask([slot[t] for t in _indices(j0)]),
        )
        out[key] = out.get(key, 0j) + sign * c
    return GrassmannElement(len(rest), out)


def reduced_product(x: GrassmannElement, y: GrassmannElement, interior):
    """interior_reduce(mul(x, y), interior), without forming the product.

    Convolves over the monomials of the sparser factor for each target
    key; used by the renormalization lift where the full product would be
    large."""
    if x.ground_size != y.ground_size:
        raise ValueError("ground sets differ")
    n = x.ground_size
    interior = sorted(set(interior))
    imask = _mask(interior)
    rest = [t for t in range(n) if t not in set(interior)]
    if len(y.coeffs) > len(x.coeffs):
        x, y = y, x
    out = {}
    m = len(rest)
    for size in range(m + 1):
        for rows in combinations(range(m), size):
            for cols in combinations(range(m), size):
                ni = imask | _mask(rest[t] for t in rows)
                nj = imask | _mask(rest[t] for t in cols)
                total = 0j
                for (i2, j2), c2 in y.coeffs.items():
                    if i2 & ~ni or j2 & ~nj:
                        continue
                    c1 = x.coeffs.get((ni ^ i2, nj ^ j2))
                    if c1 is None:
                        continue
                    total += _merge_sign(ni ^ i2, nj ^ j2, i2, j2) * c1 * c2
                if total != 0:
                    i0, j0 = ni ^ imask, nj ^ imask
                    sign = _merge_sign(imask, imask, i0, j0)
                    out[(_mask(rows), _mask(cols))] = sign * total
    return GrassmannElement(m, out)


def tau_scale(x: GrassmannElement, alpha) -> GrassmannElement:
    """Lift of Q -> alpha Q: degree-k coefficients pick up alpha^k."""
    if alpha == 0:
        raise ZeroScale("scaling lift needs alpha != 0")
    out = {}
    for (i, j), c in x.coeffs.items():
        out[(i, j)] = (alpha ** i.bit_count()) * c
    return GrassmannElement(x.ground_size, out)


def tau_translate(x: GrassmannElement, q0) -> GrassmannElement:
    """Lift of Q -> Q + Q0: multiplication by exp_eta(Q0)."""
    return mul(exp_eta(q0), x)


def pair(x: GrassmannElement, sign) -> complex:
    """Pairing against the top paired monomial ('+') or the unit ('-')."""
    if sign == "+":
        full = (1 << x.ground_size) - 1
        return x.get(full, full)
    if sign == "-":
        return x.get(0, 0)
    raise ValueError("sign must be '+' or '-'")


def _lift_plan(structure):
    cache = structure._cache
    if "lift_plan" in cache:
        return cache["lift_plan"]
    lat = build_lattice(structure, 1)
    k = structure.cell_size
    copy_maps = [list(cm) for cm in lat.copy_maps]
    interior = lat.interior()
    # compacted complement slots are the boundary vertices in increasing
    # vertex order; send slot -> cell vertex of F
    rest = sorted(set(range(lat.num_vertices)) - set(interior))
    vert_to_cell = {b: x for x, b in enumerate(lat.boundary)}
    out_map = [vert_to_cell[b] for b in rest]
    weak_exp = None
    if structure.weak is not None:
        qw = q_matrix(structure.weak)
        glued = np.zeros((lat.num_vertices, lat.num_vertices), dtype=complex)
        idx = np.array([copy_maps[p // k][p % k] for p in range(structure.num_points)])
        np.add.at(glued, (idx[:, None], idx[None, :]), qw)
        weak_exp = exp_eta(glued)
    plan = (lat, copy_maps, interior, out_map, weak_exp)
    cache["lift_plan"] = plan
    return plan


def renorm_lift(x: GrassmannElement, structure) -> GrassmannElement:
    """One renormalization step on coefficients.

    Copies of x (scaled per copy when weights are present) are glued one
    at a time into the level-1 algebra, the weak-network exponential is
    multiplied in, and the interior is reduced away; the result is
    relabelled to the cell through the boundary identification.
    Homogeneous of degree N in the coefficients of x for strong
    connections."""
    if x.ground_size != structure.cell_size:
        raise ValueError("element must live on the cell")
    lat, copy_maps, interior, out_map, weak_exp = _lift_plan(structure)
    w = structure.copy_weights()
    z = GrassmannElement.unit(lat.num_vertices)
    for i in range(structure.num_copies):
        xi = x if w[i] == 1.0 else tau_scale(x, w[i])
        z = mul(z, reindex(xi, copy_maps[i], lat.num_vertices))
    if weak_exp is not None:
        reduced = reduced_product(z, weak_exp, interior)
    else:
        reduced = interior_reduce(z, interior)
    return reindex(reduced, out_map, structure.cell_size)


def phi_curve(q_rho, b):
    """The spectral curve lam -> exp_eta(Q_rho + lam I_b)."""
    q_rho = np.asarray(q_rho, dtype=complex)
    b = np.asarray(b, dtype=float)

    def curve(lam):
        return exp_eta(q_rho + lam * np.diag(b))

    return curve


DEFAULT_SCALES = (1e-2, 1e-3, 1e-4, 1e-5)


def vanishing_order(curve, lam0, scales=DEFAULT_SCALES, tol=0.2):
    """Numeric order of vanishing of a holomorphic curve of elements.

    Compares norms at lam0 + t and lam0 + 2t over a decreasing scale
    ladder; the dyadic log-ratios must agree on one integer within
    ``tol`` or OrderUnstable is raised."""
    if not scales:
        raise ValueError("need at least one scale")
    scales = sorted(scales, reverse=True)
    estimates = []
    norms = []
    for t in scales:
        n1 = curve(lam0 + t).norm()
        n2 = curve(lam0 + 2 * t).norm()
        if n1 == 0.0 or n2 == 0.0:
            raise OrderUnstable("curve vanishes identically at working precision")
        norms.extend([n1, n2])
        estimates.append(np.log(n2 / n1) / np.log(2.0))
    if min(norms) < 1e-13 * max(norms) * max(scales) / min(scales):
        raise OrderUnstable("norms fell to the noise floor before settling")
    order = int(round(float(estimates[-1])))
    settled = estimates[-2:] if len(estimates) > 1 else estimates
    if any(abs(e - order) > tol for e in settled):
        raise OrderUnstable(f"ladder estimates {estimates} do not settle")
    return order
