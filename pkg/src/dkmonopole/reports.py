"""Verification suites and their machine-readable reports."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import algebra, symmetry
from .algebra import DKBasis
from .angular import (QuantumNumbers, allowed_j, build_ansatz, momentum_residuals, sigma_apply, sigma_matrix,
                      sigma_pattern, twice, verify_recursions)
from .constants import ALGEBRA_TOL, FD_TOL, LORENTZ_TOL, RECURSION_TOL
from .proca import free_lorentz_residual, lorentz_condition_residual, proca_residual
from .radial import (canonical_form, closed_form_F_residual, dk_residual, integrate, minimal_j_solution,
                     radial_system, residual, roundtrip_residual)
from .tetrad import (LocalLorentz, SpacetimePoint, boost, gauge_covariance_residuals, random_lorentz,
                     rotation, spherical_tetrad, tetrad_divergence)


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    above: bool = False  # pass when residual exceeds tolerance (drift-type checks)

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.residual):
            return False
        return self.residual > self.tolerance if self.above else self.residual < self.tolerance


@dataclass
class Report:
    suite: str
    checks: list = field(default_factory=list)
    seed: int = 0
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add(self, name, residual, tolerance, above=False) -> Check:
        c = Check(name, float(residual), float(tolerance), above)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        out = {
            "suite": self.suite,
            "checks": [{"name": c.name, "residual": c.residual, "tolerance": c.tolerance, "pass": c.passed}
                       for c in self.checks],
            "seed": self.seed,
            "config": self.config,
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return dumps(self.as_dict())


def _fmt(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with floats at 17 significant digits and insertion-ordered keys."""
    return _fmt(obj) + "\n"


def _random_points(rng, n, r=(0.5, 5.0), t=(-1.0, 1.0)):
    return [SpacetimePoint(rng.uniform(*t), rng.uniform(*r), rng.uniform(0.2, math.pi - 0.2),
                           rng.uniform(0, 2 * math.pi)) for _ in range(n)]


# --- algebra / frame ----------------------------------------------------------------

def algebra_suite(seed: int = 0) -> Report:
    rep = Report("algebra", seed=seed)
    for basis in DKBasis:
        for (c, a, b), res in algebra.trilinear_residuals(basis).items():
            rep.add(f"trilinear[{c}{a}{b}]/{basis.value}", res, ALGEBRA_TOL)
    for basis in DKBasis:
        com = algebra.commutator_residuals(basis)
        rep.add(f"commutator[beta,j]/{basis.value}", max(v for k, v in com.items() if k.startswith("[beta")),
                ALGEBRA_TOL)
        rep.add(f"commutator[j,j]/{basis.value}", max(v for k, v in com.items() if k.startswith("[j")), ALGEBRA_TOL)
        rep.add(f"trace/{basis.value}", max(abs(algebra.build_beta(a, basis).trace) for a in range(4)), ALGEBRA_TOL)
    for a, res in algebra.basis_consistency_residuals().items():
        rep.add(f"basis_change[beta{a}]", res, ALGEBRA_TOL)
    return rep


def _local_field(rng) -> LocalLorentz:
    a = rng.normal(scale=0.1, size=(6, 4))  # rapidities stay O(1) on the sample region

    def lmat(x):
        out = np.eye(4)
        for ax in (1, 2, 3):
            out = out @ rotation(ax, a[ax - 1] @ x)
        for ax in (1, 2, 3):
            out = out @ boost(ax, a[ax + 2] @ x)
        return out

    return LocalLorentz(lmat, "seeded smooth field")


def gauge_suite(seed: int = 0, transforms: int = 100, fields: int = 10, anchors: int = 50) -> Report:
    rng = np.random.default_rng(seed)
    rep = Report("gauge", seed=seed, config={"transforms": transforms, "fields": fields, "anchors": anchors})
    worst = dict.fromkeys(("conjugation", "kappa_block", "lambda_block"), 0.0)
    for _ in range(transforms):
        res = gauge_covariance_residuals(LocalLorentz.constant(random_lorentz(rng)), _random_points(rng, 1))
        for k in worst:
            worst[k] = max(worst[k], res[k])
    for k, v in worst.items():
        rep.add(k, v, LORENTZ_TOL)
    conn = 0.0
    for _ in range(fields):
        conn = max(conn, gauge_covariance_residuals(_local_field(rng), _random_points(rng, 2))["connection"])
    rep.add("connection_fd", conn, FD_TOL)
    frame = spherical_tetrad()
    div = 0.0
    for p in _random_points(rng, anchors):
        want = np.array([0.0, -math.cos(p.theta) / (p.r * math.sin(p.theta)), 0.0, -2.0 / p.r])
        div = max(div, float(np.max(np.abs(tetrad_divergence(frame, p) - want))))
    rep.add("tetrad_divergence", div, ALGEBRA_TOL)
    return rep


# --- separation -----------------------------------------------------------------------

def admissible(max_kappa: float = 2.0, max_j: float = 4.0):
    """All (kappa, j, m) with 0 < |kappa| <= max_kappa, j <= max_j, in a fixed order."""
    out = []
    for tk in range(-int(2 * max_kappa), int(2 * max_kappa) + 1):
        if tk == 0:
            continue
        k = tk / 2
        for j in allowed_j(k):
            if j > max_j + 1e-9:
                break
            tj = twice(j)
            out.extend((k, j, tm / 2) for tm in range(-tj, tj + 1, 2))
    return out


def _random_solution(qn, mass, rng, r_range=(1.0, 4.0), steps=512):
    sys = radial_system(qn, mass)
    if qn.family == "minimal":
        return sys, minimal_j_solution(qn, np.linspace(*r_range, steps + 1), mass)
    form = canonical_form(sys)
    init = np.zeros(10, dtype=complex)
    idx = [s - 1 for s in form.diff_slots]
    init[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    return sys, integrate(sys, init, r_range, steps)


def separation_suite(kappa=None, j=None, m=None, trials: int = 20, seed: int = 0,
                     epsilon: float = 1.3, mass: float = 1.0) -> Report:
    """Recursions, Sigma pattern and annihilation, J checks, and the DK residual of separated solutions."""
    rng = np.random.default_rng(seed)
    if kappa is None:
        cases = admissible()
    else:
        jj = j if j is not None else next(iter(allowed_j(kappa)))
        cases = [(kappa, jj, m if m is not None else -jj)]
    rep = Report("separation", seed=seed, config={"kappa": kappa, "j": j, "m": m, "trials": trials,
                                                 "epsilon": epsilon, "mass": mass})
    w = dict.fromkeys(("recursions", "sigma_pattern", "sigma_operator", "sigma_leak", "minimal_annihilation", "dk_residual",
                       "J"), 0.0)
    seen_kj = set()
    for k, jj, mm in cases:
        qn = QuantumNumbers(epsilon, jj, mm, k)
        ans = build_ansatz(qn)
        for th in rng.uniform(0.2, math.pi - 0.2, size=2):
            w["recursions"] = max(w["recursions"], max(verify_recursions(jj, k, mm, th).values()))
        s, leak = sigma_matrix(ans)
        w["sigma_leak"] = max(w["sigma_leak"], leak)
        if ans.family == "generic":
            pat = sigma_pattern(jj, k)
            w["sigma_pattern"] = max(w["sigma_pattern"], float(np.max(np.abs(s - pat))))
            f = rng.normal(size=10) + 1j * rng.normal(size=10)
            th, ph = rng.uniform(0.2, 2.9), rng.uniform(0, 6.2)
            direct = sigma_apply(k, ans, f, (th, ph)) - (pat @ f) * ans.harmonics(th, ph)
            w["sigma_operator"] = max(w["sigma_operator"], float(np.max(np.abs(direct))))
        if qn.family == "minimal":
            f = rng.normal(size=10) + 1j * rng.normal(size=10)
            for th, ph in zip(rng.uniform(0.2, 2.9, size=3), rng.uniform(0, 6.2, size=3)):
                out = sigma_apply(k, ans, f, (th, ph))
                w["minimal_annihilation"] = max(w["minimal_annihilation"], float(np.max(np.abs(out))))
        if (k, jj) in seen_kj and kappa is None:
            continue  # one radial solution per (kappa, j) keeps the full sweep at desk scale
        seen_kj.add((k, jj))
        _, prof = _random_solution(qn, mass, rng)
        pts = _random_points(rng, trials, r=(1.2, 3.8))
        scale = float(np.max(np.abs(prof.values)))
        for p in pts:
            w["dk_residual"] = max(w["dk_residual"], float(np.max(np.abs(dk_residual(qn, prof, p)))) / scale)
        th, ph = rng.uniform(0.3, 2.8), rng.uniform(0, 6.2)
        f = rng.normal(size=10) + 1j * rng.normal(size=10)
        w["J"] = max(w["J"], max(momentum_residuals(ans, f, th, ph).values()))
    tols = {"recursions": RECURSION_TOL, "sigma_pattern": 1e-12, "sigma_operator": 1e-10, "sigma_leak": 1e-12,
            "minimal_annihilation": 1e-10, "dk_residual": 1e-5, "J": 1e-6}
    for k, v in w.items():
        rep.add(k, v, tols[k])
    return rep


# --- radial / lorentz -----------------------------------------------------------------

def minimal_report(kappa: float, epsilon: float, mass: float, r_range=(0.1, 10.0), steps: int = 4096,
                   growing: bool = False, seed: int = 0):
    j = abs(kappa) - 1 if abs(kappa) >= 1 else abs(kappa)
    qn = QuantumNumbers(epsilon, j, j if twice(j) % 2 else 0.0, kappa)
    grid = np.linspace(*r_range, steps + 1)
    prof = minimal_j_solution(qn, grid, mass, growing=growing)
    sys = radial_system(qn, mass)
    rep = Report("solve-minimal", seed=seed, config={"kappa": kappa, "epsilon": epsilon, "mass": mass,
                                                     "r_range": list(r_range), "steps": steps})
    rep.extra = {"kind": prof.meta["kind"], "rate": float(prof.meta["rate"])}
    rep.add("closed_form_F", closed_form_F_residual(prof), 1e-10)
    rep.add("radial_system", residual(sys, prof), 1e-10)
    num = integrate(sys, prof.values[:, 0], r_range, steps)
    i = prof.meta["primary"] - 1
    rep.add("integration_vs_closed", float(np.max(np.abs(num.values[i] - prof.values[i]))
                                           / np.max(np.abs(prof.values[i]))), 1e-6)
    return rep, prof


def radial_report(kappa: float, j: float, epsilon: float, mass: float, r_range=(1.0, 10.0),
                  steps: int = 4096, seed: int = 0):
    rng = np.random.default_rng(seed)
    qn = QuantumNumbers(epsilon, j, j if twice(j) % 2 else 0.0, kappa)
    sys, prof = _random_solution(qn, mass, rng, r_range, steps)
    rep = Report("solve-radial", seed=seed, config={"kappa": kappa, "j": j, "epsilon": epsilon, "mass": mass,
                                                    "r_range": list(r_range), "steps": steps})
    scale = float(np.max(np.abs(prof.values)))
    rep.add("radial_system", residual(sys, prof) / scale, 1e-6)
    if qn.family == "generic":
        for k, v in roundtrip_residual(sys, prof).items():
            rep.add(f"roundtrip_{k}", v / scale, 1e-8)
    return rep, prof


def lorentz_suite(kappa: float = 1.0, j: float = 2.0, epsilon: float = 1.3, mass: float = 1.0,
                  points: int = 4, seed: int = 0) -> Report:
    rng = np.random.default_rng(seed)
    qn = QuantumNumbers(epsilon, j, j if twice(j) % 2 else 0.0, kappa)
    _, prof = _random_solution(qn, mass, rng, (1.0, 6.0), 2048)
    rep = Report("lorentz", seed=seed, config={"kappa": kappa, "j": j, "epsilon": epsilon, "mass": mass,
                                               "points": points})
    scale = float(np.max(np.abs(prof.values)))
    rep.add("lorentz_radial", float(np.max(np.abs(lorentz_condition_residual(qn, prof)))) / scale, 1e-6)
    res = proca_residual(qn, prof, _random_points(rng, points, r=(1.5, 5.5)))
    for k, v in res.items():
        rep.add(f"proca_{k}", v / scale, 1e-4)
    k3 = rng.normal(size=3)
    rep.add("free_lorentz", abs(free_lorentz_residual(k3, mass, rng.normal(size=4))), 1e-8)
    return rep


# --- parity ---------------------------------------------------------------------------

EXPECTED_CASCADE = ((1, 5), (3, 8), (5, 2), (9, 9))


def parity_suite(kappa: float = 1.0, j: float = 2.0, epsilon: float = 1.3, mass: float = 1.0,
                 case: str = "b", seed: int = 0) -> Report:
    qn = QuantumNumbers(epsilon, j, j if twice(j) % 2 else 0.0, kappa)
    sys = radial_system(qn, mass)
    n = symmetry.NParity.ODD if case == "b" else symmetry.NParity.EVEN
    con = symmetry.n_constraints(n, j)
    res = symmetry.consistency_rank(sys, con)
    rep = Report("parity", seed=seed, config={"kappa": kappa, "j": j, "epsilon": epsilon, "mass": mass,
                                              "case": case})
    rep.extra = {"dimension": res.dimension, "cascade": [list(t) for t in res.cascade],
                 "killed": [s for _, s in res.cascade]}
    rep.add("constraint_eigenspace", symmetry.constraint_eigen_residual(con), 1e-15)
    rep.add("sigma_intertwining", symmetry.sigma_intertwining_residual(j, kappa), 1e-12)
    th, ph = 0.7, 0.3
    p_cyc = symmetry.parity_operator(DKBasis.CYCLIC).entries
    rep.add("spherical_conjugation", float(np.max(np.abs(symmetry.spherical_parity(th, ph) - p_cyc))), 1e-12)
    if case == "b":
        rep.add("dimension", res.dimension, 0.5)
        rep.add("cascade_order", float(res.cascade != EXPECTED_CASCADE), 0.5)
        rep.add("constraint_drift", symmetry.constraint_drift(sys, con), 1e-3, above=True)
    return rep


# --- sweep ----------------------------------------------------------------------------

def sweep_grid(seed: int = 0, pairs: int = 5):
    """(kappa, j, epsilon, mass) for |kappa| in {1, 3/2, 2} (both signs), j = |kappa| + 1, + 2."""
    rng = np.random.default_rng(seed)
    out = []
    for k in (1.0, 1.5, 2.0, -1.0, -1.5, -2.0):
        for j in (abs(k) + 1, abs(k) + 2):
            for _ in range(pairs):
                eps, m = rng.uniform(0.3, 2.5, size=2)
                out.append((k, j, round(float(eps), 6), round(float(m), 6)))
    return out


def _sweep_one(args, seed):
    k, j, eps, m = args
    key = f"kappa={k:+.1f},j={j:.1f},eps={eps:.6f},m={m:.6f}"
    checks = {}
    lor = lorentz_suite(k, j, eps, m, points=2, seed=seed)
    par = parity_suite(k, j, eps, m, "b", seed)
    for rep in (lor, par):
        for c in rep.checks:
            name = f"{key}/{rep.suite}/{c.name}"
            checks[name] = Check(name, c.residual, c.tolerance, c.above)
    return checks


def sweep(seed: int = 0, pairs: int = 5, workers: int = 4) -> Report:
    grid = sweep_grid(seed, pairs)
    rep = Report("sweep", seed=seed, config={"pairs": pairs, "cases": len(grid)})
    merged = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(lambda a: _sweep_one(a, seed), grid):
            merged.update(part)
    rep.checks = [merged[k] for k in sorted(merged)]
    return rep


SUITES = {"algebra": algebra_suite, "gauge": gauge_suite, "separation": separation_suite,
          "lorentz": lorentz_suite, "parity": parity_suite}

