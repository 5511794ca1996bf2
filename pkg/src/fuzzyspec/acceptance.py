"""Acceptance checks shared by ``fuzzyspec verify`` and the test suite.

Each check returns a :class:`Criterion`; nothing here loosens a threshold.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .bundle import ResultBundle
from .cache import EigenCache
from .dynamics_calculus import (
    SpectralFunction,
    apply_function_eig,
    displacement,
    graph_norm,
    group_isometry_check,
    route_delta,
    spectral_action,
    unitary_group,
)
from .fuzzy_torus import dirac_fuzzy, fuzzy_spectrum_closed_form, multiset_distance
from .matrix_core import cached_eigh, gram_independent, numerical_rank, operator_norm
from .quantum_metric import DensityState, LipMap, MKConfig, mk_bruteforce_oracle, mk_distance
from .spectral_analysis import (
    cluster_multiplicities,
    default_cluster_tol,
    hausdorff_distance,
    windowed_spectrum,
)
from .commands import limit_indexed, limit_window_index


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number} ({self.name}): {self.detail} [{self.seconds:.1f}s]"


def _timed(number: int, name: str):
    def wrap(fn):
        def run(*args, **kwargs) -> Criterion:
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kwargs)
            return Criterion(number, name, bool(passed), detail, time.perf_counter() - t0)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "construction invariants")
def criterion_construction(ns=range(2, 17), tol: float = 1e-12):
    worst = {"hermitian": 0.0, "chirality": 0.0, "weyl": 0.0, "clifford": 0.0}
    for n in ns:
        t = dirac_fuzzy(n)
        d = t.dirac
        worst["hermitian"] = max(worst["hermitian"], float(np.max(np.abs(d - d.conj().T))))
        g = t.chirality_operator()
        worst["chirality"] = max(worst["chirality"], float(np.max(np.abs(g @ d @ g + d))))
        q = np.exp(2j * np.pi / n)
        u, v = t.clock, t.shift
        worst["weyl"] = max(worst["weyl"], float(np.max(np.abs(u @ v - q * v @ u))))
        for a in range(4):
            for b in range(4):
                anti = t.gammas[a] @ t.gammas[b] + t.gammas[b] @ t.gammas[a]
                target = 2.0 * np.eye(4) * (a == b)
                worst["clifford"] = max(worst["clifford"], float(np.max(np.abs(anti - target))))
    passed = all(v <= tol for v in worst.values())
    return passed, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f" (tol {tol:g})"


@_timed(2, "closed-form reconciliation")
def criterion_closed_form(ns=range(3, 9), tol: float = 1e-8):
    dists = {}
    for n in ns:
        d = dirac_fuzzy(n).dirac
        dists[n] = multiset_distance(fuzzy_spectrum_closed_form(n).values, cached_eigh(d).eigenvalues)
    worst = max(dists.values())
    return worst <= tol, f"max sorted l-inf distance {worst:.2e} over n={list(ns)} (tol {tol:g})"


@_timed(3, "spectrum convergence")
def criterion_convergence(cache: EigenCache | None = None, ns=(4, 8, 16, 24), radius: float = 3.0):
    cache = cache or EigenCache(enabled=False)
    limit = windowed_spectrum(limit_indexed(limit_window_index(radius)), radius)
    windows, tols, dists = {}, {}, []
    for n in ns:
        lam = cache.decomposition(n)[1].eigenvalues
        spec = cluster_multiplicities(lam, default_cluster_tol(float(np.max(np.abs(lam)))))
        windows[n], tols[n] = windowed_spectrum(spec, radius), spec.cluster_tol
        dists.append(hausdorff_distance(windows[n], limit))
    decreasing = all(b < a for a, b in zip(dists, dists[1:]))

    def nearest(points, x):
        return float(np.min(np.abs(points - x)))

    first, last = windows[ns[0]], windows[ns[-1]]
    # a limit value hit by both spectra (the zero mode) cannot get strictly closer
    attained = [x for x in limit if nearest(last, x) <= tols[ns[-1]]]
    closer = all(nearest(last, x) < nearest(first, x) or nearest(last, x) <= tols[ns[-1]] for x in limit)
    detail = "hausdorff " + ", ".join(f"n={n}: {h:.4f}" for n, h in zip(ns, dists))
    detail += f"; strictly decreasing {decreasing}; n={ns[-1]} closer than n={ns[0]} at every limit point {closer}"
    detail += f" ({len(attained)} attained exactly)"
    return decreasing and closer, detail


@_timed(4, "functional calculus routes")
def criterion_calculus(widths=(0.5, 1.0, 2.0), coarse=(2, 4, 8), fine=(2, 4)):
    worst_coarse = worst_fine = 0.0
    for w in widths:
        f = SpectralFunction.gaussian(w)
        for n in coarse:
            worst_coarse = max(worst_coarse, route_delta(dirac_fuzzy(n).dirac, f, 1e-3)[0])
        for n in fine:
            worst_fine = max(worst_fine, route_delta(dirac_fuzzy(n).dirac, f, 1e-6)[0])
    passed = worst_coarse <= 1e-3 and worst_fine <= 1e-6
    return passed, f"max delta {worst_coarse:.2e} at eps 1e-3, {worst_fine:.2e} at eps 1e-6"


@_timed(5, "projections and multiplicities")
def criterion_projections(n: int = 8, window: float = 2.0, alpha: float = 1 - 1e-6):
    d = dirac_fuzzy(n).dirac
    dec = cached_eigh(d)
    spec = cluster_multiplicities(dec.eigenvalues, default_cluster_tol(float(np.max(np.abs(dec.eigenvalues)))))
    centers = spec.values
    worst_idem, failures, checked = 0.0, [], 0
    for i, (c, mult) in enumerate(zip(centers, spec.multiplicities)):
        if abs(c) > window:
            continue
        gaps = [abs(centers[j] - c) for j in (i - 1, i + 1) if 0 <= j < len(centers)]
        f = SpectralFunction.bump(float(c), 0.5 * min(gaps))
        p = apply_function_eig(d, f)
        worst_idem = max(worst_idem, operator_norm(p @ p - p))
        rank = numerical_rank(p)
        members = np.abs(dec.eigenvalues - c) <= spec.cluster_tol
        family = list(dec.eigenvectors[:, members].T)
        independent = gram_independent(family, alpha)
        if rank != mult or not independent or int(members.sum()) != mult:
            failures.append(float(c))
        checked += 1
    passed = worst_idem <= 1e-9 and not failures and checked > 0
    return passed, f"{checked} clusters, max |P^2-P| {worst_idem:.2e}, mismatches {failures}"


@_timed(6, "spectral action trend")
def criterion_action(ns=(4, 8, 16, 24), width: float = 1.0, cache: EigenCache | None = None):
    cache = cache or EigenCache(enabled=False)
    f = SpectralFunction.gaussian(width)
    traces = [spectral_action(cache.decomposition(n)[0].dirac, f, 1.0) for n in ns]
    diffs = [abs(b - a) for a, b in zip(traces, traces[1:])]
    passed = all(b < a for a, b in zip(diffs, diffs[1:]))
    return passed, "successive differences " + ", ".join(f"{x:.4f}" for x in diffs) + f" (width {width:g})"


@_timed(7, "Connes distance")
def criterion_mk(n: int = 2, rel: float = 0.02, sym_tol: float = 1e-9):
    triple = dirac_fuzzy(n)
    lm = LipMap.build(triple)
    cfg = MKConfig()
    states = [DensityState.basis(n, 0), DensityState.basis(n, 1), DensityState.mixed(n)]
    states.append(DensityState.vector(np.array([1.0, 1.0j]) / np.sqrt(2)))
    worst_rel = worst_sym = worst_scale = worst_lip = 0.0
    doubled = triple.scaled(2.0)
    lm2 = LipMap.build(doubled)
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            phi, psi = states[i], states[j]
            fwd = mk_distance(triple, phi, psi, cfg, lm)
            bwd = mk_distance(triple, psi, phi, cfg, lm)
            oracle = mk_bruteforce_oracle(triple, phi, psi)
            worst_rel = max(worst_rel, abs(fwd.lower_bound - oracle) / oracle)
            worst_sym = max(worst_sym, abs(fwd.lower_bound - bwd.lower_bound))
            half = mk_distance(doubled, phi, psi, cfg, lm2)
            worst_scale = max(worst_scale, abs(2 * half.lower_bound - fwd.lower_bound) / fwd.lower_bound)
            for res, l in ((fwd, lm), (bwd, lm), (half, lm2)):
                w = np.asarray(res.witness)
                worst_lip = max(worst_lip, l.lip(l.coords(w)) - 1.0)
                worst_lip = max(worst_lip, float(np.max(np.abs(w - w.conj().T))))
    passed = worst_rel <= rel and worst_sym <= sym_tol and worst_scale <= rel and worst_lip <= 1e-9
    detail = (
        f"oracle rel {worst_rel:.2e}, symmetry {worst_sym:.1e}, scale rel {worst_scale:.2e}, "
        f"witness excess {worst_lip:.1e}"
    )
    return passed, detail


@_timed(8, "unitary dynamics")
def criterion_dynamics(n: int = 4, samples: int = 100, tol: float = 1e-9, seed: int = 0):
    d = dirac_fuzzy(n).dirac
    dim = d.shape[0]
    rng = np.random.default_rng(seed)
    eye = np.eye(dim)
    worst = {"group": 0.0, "unitary": 0.0, "isometry": 0.0, "bound": -np.inf}
    isometric = True
    for _ in range(samples):
        s, t = rng.uniform(-5, 5, size=2)
        us, ut, ust = unitary_group(d, s), unitary_group(d, t), unitary_group(d, s + t)
        worst["group"] = max(worst["group"], operator_norm(us @ ut - ust))
        worst["unitary"] = max(worst["unitary"], operator_norm(us.conj().T @ us - eye))
        xi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        xi = xi / graph_norm(d, xi)
        worst["isometry"] = max(worst["isometry"], abs(graph_norm(d, us @ xi) - 1.0))
        isometric &= group_isometry_check(d, s, xi, rtol=tol)
        moved, bound = displacement(d, xi, s, t)
        worst["bound"] = max(worst["bound"], moved - bound)
    passed = (
        worst["group"] <= tol
        and worst["unitary"] <= tol
        and worst["isometry"] <= tol
        and isometric
        and worst["bound"] <= tol
    )
    return passed, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def _random_bundle(rng: np.random.Generator) -> ResultBundle:
    rows = [
        {"n": int(rng.integers(1, 30)), "tol": float(rng.uniform(0, 1e-6)), "value": float(rng.normal())}
        for _ in range(int(rng.integers(0, 5)))
    ]
    return ResultBundle(
        metadata={"seed": int(rng.integers(0, 2**31)), "note": "x" * int(rng.integers(0, 4))},
        spectra=[{"n": r["n"], "cluster_tol": r["tol"], "values": [r["value"], -r["value"]]} for r in rows],
        hausdorff=[{"n": r["n"], "cluster_tol": r["tol"], "hausdorff": abs(r["value"])} for r in rows],
        action=rows,
    )


@_timed(9, "metric axioms and bundle round-trip")
def criterion_axioms(instances: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(instances):
        # integer-valued points keep every subtraction exact
        a, b, c = (rng.integers(-50, 51, size=int(rng.integers(1, 12))).astype(float) for _ in range(3))
        dab, dba = hausdorff_distance(a, b), hausdorff_distance(b, a)
        ok = hausdorff_distance(a, a) == 0.0 and dab == dba and dab >= 0
        ok &= hausdorff_distance(a, c) <= dab + hausdorff_distance(b, c)
        ok &= (dab == 0.0) == (set(a.tolist()) == set(b.tolist()))
        bundle = _random_bundle(rng)
        text = bundle.to_json()
        again = ResultBundle.from_json(text)
        ok &= again == bundle and again.to_json() == text and bundle.to_json() == text
        bad += not ok
    return bad == 0, f"{instances} instances, {bad} violations"


def run_all(cache: EigenCache | None = None) -> list[Criterion]:
    return [
        criterion_construction(),
        criterion_closed_form(),
        criterion_convergence(cache),
        criterion_calculus(),
        criterion_projections(),
        criterion_action(cache=cache),
        criterion_mk(),
        criterion_dynamics(),
        criterion_axioms(),
    ]
