"""Monte-Carlo width experiments over sampled chains.

For each sampled chain every requested method runs over all nodes and the
per-state interval widths are pooled over samples and states.  Records carry
the mean width and an empirical central band per step and method; when the
exact credal method is included, the summary reports each belief method's
one-step relative increase in width (RIW), i.e.

  (mean belief width - mean credal width) / mean credal width

at the first inferred node.

Chains are processed by a worker pool; sample i always uses the seed stream
(seed, i) and results are reduced in sample order, so output is byte-stable
for a given seed no matter the worker count.  ``CREDAL_CHAIN_THREADS`` caps
the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .credal import credal_chain_bounds
from .errors import StructuralError
from .inference import Strategy, propagate_chain
from .sampling import SamplerConfig, sample_chain

VALID_METHODS = ("credal", "sgm-uniform", "sgm-adhoc", "adhoc-mass", "full-mass")

CSV_HEADER = "step,method,mean_width,band_low,band_high,samples"


@dataclass(frozen=True)
class ExperimentSpec:
    n: int
    k: int
    samples: int
    seed: int
    epsilon: float | None = None
    methods: tuple[str, ...] = ("credal", "sgm-adhoc", "adhoc-mass")
    band: float = 0.75

    def __post_init__(self):
        if self.k < 2 or self.samples < 1:
            raise StructuralError("need k >= 2 and at least one sample")
        bad = [m for m in self.methods if m not in VALID_METHODS]
        if bad:
            raise StructuralError(f"unknown methods {bad}; valid: {VALID_METHODS}")
        if not 0.0 < self.band < 1.0:
            raise StructuralError("band must lie in (0, 1)")


@dataclass(frozen=True)
class WidthRecord:
    step: int
    method: str
    mean_width: float
    band_low: float
    band_high: float
    samples: int


def _chain_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def _one_sample(task):
    n, k, eps, methods, seed = task
    cfg = SamplerConfig(n=n, epsilon=eps, seed=seed)
    chain = sample_chain(cfg, k)
    out = {}
    for method in methods:
        if method == "credal":
            widths = np.stack([hi - lo for lo, hi in credal_chain_bounds(chain)])
        else:
            results = propagate_chain(chain, Strategy(method))
            widths = np.stack([r.widths for r in results])
        out[method] = widths  # (k - 1, n)
    return out


def worker_count() -> int:
    cap = os.environ.get("CREDAL_CHAIN_THREADS", "").strip()
    workers = os.cpu_count() or 1
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def run_experiment(spec: ExperimentSpec):
    """Run the campaign; returns (records, summary, pooled widths).

    The pooled widths map (method, step) to the flat per-interval width
    sample (samples x states) the records were aggregated from.
    """
    tasks = [
        (spec.n, spec.k, spec.epsilon, spec.methods, _chain_seed(spec.seed, i))
        for i in range(spec.samples)
    ]
    workers = min(worker_count(), spec.samples)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, spec.samples // (workers * 8))
            per_sample = list(pool.map(_one_sample, tasks, chunksize=chunk))
    else:
        per_sample = [_one_sample(t) for t in tasks]

    q_low = 100.0 * (1.0 - spec.band) / 2.0
    records: list[WidthRecord] = []
    pools: dict[tuple[str, int], np.ndarray] = {}
    for step in range(2, spec.k + 1):
        for method in spec.methods:
            pool_vals = np.concatenate([s[method][step - 2].ravel() for s in per_sample])
            pools[(method, step)] = pool_vals
            records.append(
                WidthRecord(
                    step=step,
                    method=method,
                    mean_width=float(pool_vals.mean()),
                    band_low=float(np.percentile(pool_vals, q_low)),
                    band_high=float(np.percentile(pool_vals, 100.0 - q_low)),
                    samples=spec.samples,
                )
            )
    summary: dict[str, dict[str, float]] = {}
    if "credal" in spec.methods:
        credal_pool = pools[("credal", 2)]
        ok = credal_pool > 1e-12
        for method in spec.methods:
            if method == "credal":
                continue
            diff = pools[(method, 2)] - credal_pool
            summary[method] = {
                "one_step_enlargement": float(diff.mean()),
                # per-interval relative increase, averaged over samples/states
                "one_step_riw": float((diff[ok] / credal_pool[ok]).mean()),
            }
    return records, summary, pools


def render_csv(records, summary) -> str:
    """Frozen CSV schema; summary appended as comment lines."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.step},{r.method},{r.mean_width:.6f},{r.band_low:.6f},"
            f"{r.band_high:.6f},{r.samples}"
        )
    for method in sorted(summary):
        for key in sorted(summary[method]):
            lines.append(f"# {key},{method},{summary[method][key]:.6f}")
    return "\n".join(lines) + "\n"


def write_csv(path, records, summary) -> None:
    text = render_csv(records, summary)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
