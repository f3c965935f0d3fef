"""Identity suites behind the ``verify`` command.

Each check exercises one family of identities the library is supposed to
satisfy (variational trace, Grassmann determinant identities, reduction
composition, iterate consistency, closed coordinate forms, degree
matrices, divisor orders with the balance certificate, Siegel invariance,
and the Neumann-Dirichlet bookkeeping).  Checks return their worst
residual so failures are quantitative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FractalSpectraError
from .grassmann import (
    exp_eta,
    glue_morphism,
    interior_reduce,
    pair,
    phi_curve,
    renorm_lift,
    vanishing_order,
)
from .network import ElectricalNetwork, VertexPartition, glue, q_matrix, trace_map
from .renorm import (
    balance_report,
    bidegree_estimate,
    coords_eval,
    gamma_bar_closed_form,
    gamma_bar_semi_closed_form,
    gasket_closed_form,
    t_iterate,
    t_map,
)
from .selfsim import assemble_measure, assemble_q, build_lattice
from .spectra import level_spectrum
from .symplectic import (
    compose,
    from_sym,
    random_lagrangian,
    reduce_frame,
    subspace_distance,
    w_glue,
    w_trace,
)


@dataclass
class CheckResult:
    group: str
    passed: bool
    residual: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.group:24s} max residual {self.residual:.3e}{extra}"


def _rand_sym(rng, k, complex_=True):
    q = rng.standard_normal((k, k))
    if complex_:
        q = q + 1j * rng.standard_normal((k, k))
    return (q + q.T) / 2.0


def random_conservative_network(rng, k) -> ElectricalNetwork:
    """Random irreducible conservative network: a random spanning tree plus
    a few extra edges, unit-scale conductances."""
    cond = {}
    order = rng.permutation(k)
    for t in range(1, k):
        a = order[t]
        b = order[rng.integers(0, t)]
        cond[(min(a, b), max(a, b))] = float(rng.uniform(0.2, 2.0))
    for _ in range(k):
        a, b = rng.integers(0, k, size=2)
        if a != b:
            key = (min(a, b), max(a, b))
            cond[key] = cond.get(key, 0.0) + float(rng.uniform(0.2, 2.0))
    return ElectricalNetwork(k, cond)


def brute_force_trace_energy(q, boundary, f):
    """Independent variational oracle: minimize <Qg, g> over extensions of
    f by solving the interior stationarity system directly."""
    q = np.asarray(q, dtype=float)
    boundary = list(boundary)
    interior = [i for i in range(q.shape[0]) if i not in set(boundary)]
    g = np.zeros(q.shape[0])
    g[boundary] = f
    if interior:
        a = q[np.ix_(interior, interior)]
        rhs = -q[np.ix_(interior, boundary)] @ f
        g[interior] = np.linalg.solve(a, rhs)
    return float(g @ q @ g)


def check_trace_variational(rng, trials=50) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        k = int(rng.integers(3, 7))
        net = random_conservative_network(rng, k)
        q = q_matrix(net)
        p = int(rng.integers(1, k))
        boundary = sorted(rng.permutation(k)[:p].tolist())
        f = rng.standard_normal(p)
        direct = float(np.real(f @ trace_map(q, boundary) @ f))
        oracle = brute_force_trace_energy(q, boundary, f)
        worst = max(worst, abs(direct - oracle) / max(1.0, abs(oracle)))
    return CheckResult("trace-variational", worst <= 1e-9, worst)


def _table_rel_err(lhs, rhs):
    keys = set(lhs.coeffs) | set(rhs.coeffs)
    scale = max((abs(c) for c in rhs.coeffs.values()), default=1.0)
    worst = 0.0
    for key in keys:
        d = abs(lhs.get(*key) - rhs.get(*key))
        denom = max(abs(rhs.get(*key)), 1e-9 * scale)
        worst = max(worst, d / denom)
    return worst


def check_boundary_identity(rng, trials=100) -> CheckResult:
    """det(Q_interior) exp of the boundary trace equals the interior
    reduction of exp(Q), componentwise."""
    worst = 0.0
    for _ in range(trials):
        k = int(rng.choice([2, 3, 4]))
        q = _rand_sym(rng, k)
        p = int(rng.integers(1, k + 1))
        boundary = sorted(rng.permutation(k)[:p].tolist())
        interior = [i for i in range(k) if i not in set(boundary)]
        lhs = interior_reduce(exp_eta(q), interior)
        det_int = np.linalg.det(q[np.ix_(interior, interior)]) if interior else 1.0
        rhs = exp_eta(trace_map(q, boundary)).scaled(det_int)
        worst = max(worst, _table_rel_err(lhs, rhs))
    return CheckResult("grassmann-boundary", worst <= 1e-9, worst)


def check_gluing_identity(rng, trials=40) -> CheckResult:
    """Gluing morphism identity plus the two frame equalities (trace and
    gluing reductions agree with the matrix maps)."""
    worst = 0.0
    for _ in range(trials):
        k = int(rng.choice([2, 3, 4]))
        q = _rand_sym(rng, k)
        m = int(rng.integers(1, k + 1))
        part = VertexPartition(k, tuple(int(c) for c in _random_surjection(rng, k, m)))
        lhs = glue_morphism(exp_eta(q), part)
        rhs = exp_eta(glue(q, part))
        worst = max(worst, _table_rel_err(lhs, rhs))
        worst = max(
            worst,
            subspace_distance(reduce_frame(from_sym(q), w_glue(part)), from_sym(glue(q, part))),
        )
        p = int(rng.integers(1, k + 1))
        boundary = sorted(rng.permutation(k)[:p].tolist())
        try:
            tq = trace_map(q, boundary)
        except FractalSpectraError:
            continue
        worst = max(
            worst,
            subspace_distance(
                reduce_frame(from_sym(q), w_trace(k, boundary)), from_sym(tq)
            ),
        )
    return CheckResult("grassmann-gluing", worst <= 1e-9, worst)


def _random_surjection(rng, k, m):
    labels = list(range(m)) + [int(rng.integers(0, m)) for _ in range(k - m)]
    rng.shuffle(labels)
    return labels


def check_composition(rng, trials=30) -> CheckResult:
    """t_{W'} after t_W equals t_{W' + W^o}."""
    worst = 0.0
    for t in range(trials):
        k = 4
        l = random_lagrangian(k, rng, at_infinity=(t % 3 == 0))
        w1 = w_trace(k, [0, 1, 2])
        if t % 2 == 0:
            w2 = w_trace(3, sorted(rng.permutation(3)[:2].tolist()))
        else:
            w2 = w_glue(VertexPartition.from_classes(3, [[0, 2]]))
        lhs = reduce_frame(reduce_frame(l, w1), w2)
        rhs = reduce_frame(l, compose(w1, w2))
        worst = max(worst, subspace_distance(lhs, rhs))
    return CheckResult("reduction-composition", worst <= 1e-8, worst)


def check_iterates(cfg, rng, max_level=3) -> CheckResult:
    """T^n(Q) equals the boundary trace of the level-n assembly."""
    structure = cfg.structure
    worst = 0.0
    for _ in range(3):
        q = _rand_sym(rng, structure.cell_size)
        for n in range(1, max_level + 1):
            lhs = t_iterate(q, structure, n)
            qn = assemble_q(structure, q, n)
            rhs = trace_map(qn, build_lattice(structure, n).boundary)
            worst = max(
                worst,
                float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-12)),
            )
    return CheckResult("iterate-consistency", worst <= 1e-8, worst)


def _closed_form(cfg):
    p = cfg.params
    if cfg.family == "sierpinski":
        return gasket_closed_form
    if cfg.family == "gamma_bar":
        return lambda u: gamma_bar_closed_form(u, p["r"], p["v"])
    if cfg.family == "gamma_bar_semi":
        return lambda u: gamma_bar_semi_closed_form(
            u, p["r"], p["r_prime"], p["v"], p["v_prime"]
        )
    return None


def expected_degrees(cfg):
    return {
        "sierpinski": np.array([[1, 1], [1, 2]]),
        "gamma_bar": np.array([[1, 1], [1, 1]]),
        "gamma_bar_semi": np.array([[1, 1], [2, 2]]),
    }.get(cfg.family)


def divisor_loci(cfg):
    """Candidate loci (pair index, a, b) for a u + b v = 0, with the
    expected orders; the balance identity certifies completeness."""
    p = cfg.params
    if cfg.family == "sierpinski":
        return [(1, 0.0, 1.0)], [1]
    if cfg.family == "gamma_bar":
        z0, z1 = p["v"], 3 * p["r"] + p["v"]
        return [(1, 1.0, z0), (1, 1.0, z1)], [1, 2]
    if cfg.family == "gamma_bar_semi":
        z0, z1 = p["v"], p["r"] + p["v"]
        return [(1, 1.0, z0), (1, 1.0, z1)], [0, 0]
    return None, None


def check_closed_form(cfg, rng, trials=20) -> CheckResult:
    form = _closed_form(cfg)
    if form is None or cfg.chart is None:
        return CheckResult("closed-form", True, 0.0, "no expectations for this family")
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        got = coords_eval(u, cfg.chart, cfg.structure)
        want = form(u)
        worst = max(worst, float(np.max(np.abs(got - want) / np.abs(want))))
    detail = ""
    if cfg.family == "sierpinski":
        fixed = coords_eval(np.array([0.0, 3.0]), cfg.chart, cfg.structure)
        res = float(np.max(np.abs(fixed - np.array([0.0, 1.8]))))
        detail = f"T(0,3) residual {res:.1e}"
        if res > 1e-12:
            return CheckResult("closed-form", False, res, detail)
    if cfg.family == "gamma_bar_semi":
        u = rng.standard_normal() + 1j * rng.standard_normal()
        got = coords_eval(np.array([u, u]), cfg.chart, cfg.structure)
        res = float(np.max(np.abs(got - u)))
        if res > 1e-10:
            return CheckResult("closed-form", False, res, "diagonal not fixed")
    return CheckResult("closed-form", worst <= 1e-10, worst, detail)


def check_degrees(cfg) -> CheckResult:
    if cfg.chart is None:
        return CheckResult("degree-matrix", True, 0.0, "no chart in config")
    degrees = bidegree_estimate(cfg.structure, cfg.chart)
    want = expected_degrees(cfg)
    if want is None:
        return CheckResult("degree-matrix", True, 0.0, f"computed {degrees.tolist()}")
    ok = bool(np.array_equal(degrees, want))
    return CheckResult("degree-matrix", ok, 0.0 if ok else 1.0, f"{degrees.tolist()}")


def check_divisor_balance(cfg) -> CheckResult:
    if cfg.chart is None:
        return CheckResult("divisor-balance", True, 0.0, "no chart in config")
    loci, want_orders = divisor_loci(cfg)
    if loci is None:
        return CheckResult("divisor-balance", True, 0.0, "no loci for this family")
    degrees, orders, h, flags = balance_report(cfg.structure, cfg.chart, loci)
    ok = bool(all(flags)) and list(orders) == list(want_orders)
    return CheckResult(
        "divisor-balance", ok, 0.0 if ok else 1.0,
        f"orders {list(orders)}, h {h}, balance {[bool(f) for f in flags]}",
    )


def check_siegel(cfg, rng, trials=200) -> CheckResult:
    """Im Q positive definite implies Im T(Q) positive definite."""
    structure = cfg.structure
    k = structure.cell_size
    worst = np.inf
    for _ in range(trials):
        re = _rand_sym(rng, k, complex_=False)
        g = rng.standard_normal((k, k))
        im = g @ g.T + 0.1 * np.eye(k)
        tq = t_map(re + 1j * im, structure)
        lam_min = float(np.linalg.eigvalsh((tq - tq.conj().T) / 2j)[0])
        worst = min(worst, lam_min)
    return CheckResult("siegel-invariance", worst >= -1e-10, max(0.0, -worst),
                       f"min Im eigenvalue {worst:.2e}")


def check_nd_bridge(cfg, rng, max_level=4, bridge_samples=20) -> CheckResult:
    """The determinant bridge, N-D replication across levels, and the
    agreement of lift vanishing orders with level-1 N-D multiplicities."""
    structure = cfg.structure
    q_rho = q_matrix(cfg.network)
    b = cfg.measure
    phi = phi_curve(q_rho, b)
    q1 = assemble_q(structure, q_rho, 1)
    b1 = assemble_measure(structure, b, 1)
    lat1 = build_lattice(structure, 1)
    interior = lat1.interior()
    worst = 0.0
    for _ in range(bridge_samples):
        lam = complex(rng.standard_normal(), rng.standard_normal())
        lifted = renorm_lift(phi(lam), structure)
        full = q1 + lam * np.diag(b1)
        det_plus = np.linalg.det(full)
        det_minus = np.linalg.det(full[np.ix_(interior, interior)]) if interior else 1.0
        worst = max(worst, abs(pair(lifted, "+") - det_plus) / max(abs(det_plus), 1e-12))
        worst = max(worst, abs(pair(lifted, "-") - det_minus) / max(abs(det_minus), 1e-12))
    if worst > 1e-8:
        return CheckResult("nd-bridge", False, worst, "determinant bridge")

    levels = max_level + 1 if cfg.family == "sierpinski" else max_level
    counts = []
    reports = {}
    for n in range(1, levels + 1):
        rep = level_spectrum(structure, cfg.network, b, n, "nd")
        reports[n] = rep
        counts.append(rep.count)
    replication = all(
        counts[i + 1] >= structure.num_copies * counts[i] for i in range(len(counts) - 1)
    )
    if not replication:
        return CheckResult("nd-bridge", False, 1.0, f"replication broke: {counts}")

    neumann1 = level_spectrum(structure, cfg.network, b, 1, "neumann")
    nd1 = reports[1]
    order_ok = True
    for value, _ in neumann1.clusters[:8]:
        order = vanishing_order(lambda lam: renorm_lift(phi(lam), structure), value)
        if order != nd1.multiplicity_at(value):
            order_ok = False
            break
    return CheckResult(
        "nd-bridge", order_ok, worst,
        f"nd counts {counts}" + ("" if order_ok else "; lift order mismatch"),
    )


IDENTITY_GROUPS = (
    "trace-variational",
    "grassmann-boundary",
    "grassmann-gluing",
    "reduction-composition",
    "iterate-consistency",
    "closed-form",
    "siegel-invariance",
    "nd-bridge",
)
DEGREE_GROUPS = ("degree-matrix", "divisor-balance")


def verify_config(cfg, suite="all", seed=12345):
    """Run the requested suite; returns a list of CheckResult."""
    rng = np.random.default_rng(seed)
    results = []
    if suite in ("identities", "all"):
        results.append(check_trace_variational(rng))
        results.append(check_boundary_identity(rng))
        results.append(check_gluing_identity(rng))
        results.append(check_composition(rng))
        results.append(_guard(lambda: check_iterates(cfg, rng), "iterate-consistency"))
        results.append(_guard(lambda: check_closed_form(cfg, rng), "closed-form"))
        results.append(_guard(lambda: check_siegel(cfg, rng), "siegel-invariance"))
        results.append(_guard(lambda: check_nd_bridge(cfg, rng), "nd-bridge"))
    if suite in ("degrees", "all"):
        results.append(_guard(lambda: check_degrees(cfg), "degree-matrix"))
        results.append(_guard(lambda: check_divisor_balance(cfg), "divisor-balance"))
    return results


def _guard(thunk, group):
    try:
        return thunk()
    except FractalSpectraError as exc:
        return CheckResult(group, False, float("inf"), f"{type(exc).__name__}: {exc}")
