"""The work behind each CLI verb; every command returns a bundle fragment."""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .bundle import ResultBundle, to_builtin
from .cache import EigenCache
from .config import RunConfig
from .dynamics_calculus import SpectralFunction, route_delta, spectral_action
from .fuzzy_torus import (
    GAMMA_CONVENTION,
    PRINTED_CONVENTION,
    RESOLVED_CONVENTION,
    dirac_fuzzy,
    fuzzy_spectrum_closed_form,
    limit_spectrum,
    multiset_distance,
)
from .quantum_metric import DensityState, LipMap, MKConfig, mk_bruteforce_oracle, mk_distance
from .spectral_analysis import (
    IndexedSpectrum,
    cluster_multiplicities,
    default_cluster_tol,
    hausdorff_distance,
    multiplicity_convergence,
    track_sequence,
    windowed_spectrum,
)


def make_cache(cfg: RunConfig) -> EigenCache:
    return EigenCache(cfg.cache_dir, enabled=cfg.cache)


def base_metadata(cfg: RunConfig) -> dict:
    # output location and cache path do not affect results; leaving them out keeps bundles comparable
    config = {k: v for k, v in cfg.to_dict().items() if k not in ("out_dir", "cache_dir")}
    meta = {
        "version": __version__,
        "config": config,
        "seed": cfg.seed,
        "gamma_convention": GAMMA_CONVENTION,
        "closed_form_convention": RESOLVED_CONVENTION.as_dict(),
        "printed_convention": PRINTED_CONVENTION.as_dict(),
    }
    if cfg.record_timestamp:
        meta["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return meta


def _map(cfg: RunConfig, fn, items):
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def limit_window_index(radius: float) -> int:
    # m or k >= ceil(R) + 3 only produces values with |lambda| > R
    return int(math.ceil(radius)) + 3


def limit_indexed(index_max: int, tol: float = 1e-9) -> IndexedSpectrum:
    lim = limit_spectrum(index_max)
    offset = int(np.flatnonzero(lim.values >= 0)[0])
    return IndexedSpectrum(lim.values, lim.generator_counts, tol, offset)


def cmd_spectrum(cfg: RunConfig, cache: EigenCache | None = None) -> ResultBundle:
    """Indexed spectra per n, windowed Hausdorff distances to the limit set, tracking."""
    cache = cache or make_cache(cfg)

    def work(n):
        triple, dec, hit = cache.decomposition(n)
        norm = float(np.max(np.abs(dec.eigenvalues)))
        tol = cfg.cluster_tol or default_cluster_tol(norm)
        return n, dec.eigenvalues, cluster_multiplicities(dec.eigenvalues, tol), hit

    results = _map(cfg, work, cfg.n_list)
    radius = cfg.window_radius
    index_max = cfg.index_max if cfg.index_max is not None else limit_window_index(radius)
    limit = limit_indexed(index_max)
    lim_window = windowed_spectrum(limit, radius)

    bundle = ResultBundle(metadata=base_metadata(cfg))
    bundle.metadata["limit_index_max"] = index_max
    bundle.metadata["limit_multiplicity_note"] = (
        "limit multiplicities are generator counts of the closed form, not certified multiplicities"
    )
    checks = {}
    for n, raw, spec, hit in results:
        bundle.spectra.append(
            {
                "n": n,
                "dim": int(raw.size),
                "cluster_tol": spec.cluster_tol,
                "values": spec.values,
                "multiplicities": spec.multiplicities,
                "index_offset": spec.index_offset,
                "cache_hit": hit,
            }
        )
        window = windowed_spectrum(spec, radius)
        haus = hausdorff_distance(window, lim_window) if window.size and lim_window.size else math.inf
        bundle.hausdorff.append(
            {"n": n, "window_radius": radius, "cluster_tol": spec.cluster_tol, "hausdorff": haus}
        )
        if 2 <= n <= 8:
            cf = fuzzy_spectrum_closed_form(n)
            checks[str(n)] = multiset_distance(cf.values, raw)
    bundle.metadata["closed_form_distance"] = checks

    specs = [r[2] for r in results]
    if len(specs) >= 2:
        with warnings.catch_warnings():
            # differing index ranges are normal across n and land in the bundle instead
            warnings.simplefilter("ignore", UserWarning)
            report = track_sequence(specs, limit=limit)
        keep = range(-cfg.track_indices, cfg.track_indices + 1)
        verdicts = multiplicity_convergence(report, limit)
        bundle.tracking = {
            "n_list": list(cfg.n_list),
            "cluster_tol": max(s.cluster_tol for s in specs),
            "index_range": list(report.index_range),
            "shifted_branch": report.shifted_branch,
            "branch_errors": report.branch_errors,
            "warnings": report.warnings,
            "tracks": [
                {
                    "index": t.index,
                    "values": t.values,
                    "multiplicities": t.multiplicities,
                    "deviations": t.deviations,
                    "trend": t.trend,
                    "limit_candidate": t.limit_candidate,
                    "limit_value": limit.value(t.index) if limit.has_index(t.index) else None,
                    "multiplicity_verdict": verdicts[t.index].verdict,
                    "limit_generator_count": verdicts[t.index].limit_multiplicity,
                }
                for j, t in report.tracks.items()
                if j in keep
            ],
        }
    return _clean(bundle)


def _function(cfg: RunConfig) -> SpectralFunction:
    if cfg.function_kind != "gaussian":
        raise ValueError(f"function kind {cfg.function_kind!r} is not available from the CLI")
    return SpectralFunction.gaussian(cfg.function_width)


def cmd_action(cfg: RunConfig, cache: EigenCache | None = None) -> ResultBundle:
    """``Tr f(D_n / S)`` per ``(n, S)`` with successive differences."""
    cache = cache or make_cache(cfg)
    f = _function(cfg)
    decs = _map(cfg, lambda n: (n, cache.decomposition(n)[0]), cfg.n_list)
    bundle = ResultBundle(metadata=base_metadata(cfg))
    for s in cfg.scales:
        prev = None
        for n, triple in decs:
            tr = spectral_action(triple.dirac, f, s)
            bundle.action.append(
                {
                    "n": n,
                    "scale": s,
                    "function": cfg.function_kind,
                    "width": cfg.function_width,
                    "trace": tr,
                    "diff_from_prev": None if prev is None else abs(tr - prev),
                }
            )
            prev = tr
    return _clean(bundle)


def cmd_calculus(cfg: RunConfig, cache: EigenCache | None = None) -> ResultBundle:
    """Operator-norm gap between the eigen route and the Fourier-cutoff route."""
    cache = cache or make_cache(cfg)
    f = _function(cfg)
    bundle = ResultBundle(metadata=base_metadata(cfg))
    for n in cfg.n_list:
        triple = cache.decomposition(n)[0]
        delta, res = route_delta(triple.dirac, f, cfg.calculus_eps)
        bundle.calculus.append(
            {
                "n": n,
                "width": cfg.function_width,
                "eps": cfg.calculus_eps,
                "route_delta": delta,
                "cutoff": res.cutoff,
                "tail_bound": res.tail_bound,
                "quadrature_bound": res.quadrature_bound,
                "nodes": res.nodes,
                "within_eps": delta <= cfg.calculus_eps,
            }
        )
    return _clean(bundle)


def parse_state(spec: str, n: int) -> DensityState:
    """``basis:i``, ``mixed`` or ``vector:c0,c1,...`` (complex literals allowed)."""
    kind, _, arg = spec.partition(":")
    if kind == "basis":
        return DensityState.basis(n, int(arg))
    if kind == "mixed":
        return DensityState.mixed(n)
    if kind == "vector":
        coeffs = [complex(x.replace("i", "j")) for x in arg.split(",")]
        if len(coeffs) != n:
            raise ValueError(f"vector state needs {n} coefficients")
        return DensityState.vector(coeffs)
    raise ValueError(f"unknown state spec {spec!r}")


def cmd_mk(cfg: RunConfig) -> ResultBundle:
    """Pairwise Connes distances between configured states, with oracle deltas for n <= 3."""
    bundle = ResultBundle(metadata=base_metadata(cfg))
    mk_cfg = MKConfig(restarts=cfg.mk_restarts, max_iter=cfg.mk_max_iter, seed=cfg.seed)
    for n in cfg.mk_n_list:
        triple = dirac_fuzzy(n)
        lm = LipMap.build(triple)
        states = [(s, parse_state(s, n)) for s in cfg.mk_states]
        for i, (name_i, phi) in enumerate(states):
            for name_j, psi in states[i + 1 :]:
                res = mk_distance(triple, phi, psi, mk_cfg, lm)
                row = {
                    "n": n,
                    "phi": name_i,
                    "psi": name_j,
                    "lower_bound": res.lower_bound,
                    "estimate": res.estimate,
                    "iterations": res.iterations,
                    "converged": res.converged,
                    "unbounded": res.unbounded,
                    "witness": res.witness,
                    "solver_tol": 0.02,
                }
                if n <= 3:
                    oracle = mk_bruteforce_oracle(triple, phi, psi, cfg.mk_oracle_samples, seed=cfg.seed)
                    row["oracle"] = oracle
                    row["oracle_rel_delta"] = (
                        abs(res.lower_bound - oracle) / oracle if oracle > 0 else abs(res.lower_bound)
                    )
                bundle.mk.append(row)
    return _clean(bundle)


def _clean(bundle: ResultBundle) -> ResultBundle:
    # normalize to plain JSON types so that a parsed bundle compares equal
    return ResultBundle.from_json(bundle.to_json())
