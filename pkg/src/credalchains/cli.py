"""Command-line interface.

Subcommands:

* ``check <file>``       - coherence/goodness report per interval.
* ``infer <file> --method M [--node I] [--prior-mass F]`` - run one method,
  emit JSON per-node bounds and diagnostics.
* ``experiment --n N --k K --samples S [--eps E] --methods a,b --seed X
  --out f.csv`` - Monte-Carlo width campaign, CSV output.
* ``sample --n N --count C [--eps E] [--k K] --seed X --out dir`` - write
  sampled intervals (k = 1) or chains in the model format.

Exit codes: 0 ok (for ``check``: all intervals coherent), 1 domain error,
2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .credal import credal_chain_bounds
from .errors import DomainError, ModelFormatError, StructuralError
from .experiments import VALID_METHODS, ExperimentSpec, run_experiment, write_csv
from .inference import ChainModel, Strategy, propagate_chain
from .intervals import goodness, validate_coherence
from .modelio import chain_frames, load_mass, load_model, save_model
from .sampling import SamplerConfig, sample_chain, sample_intervals


def _vec(values) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in values) + ")"


def cmd_check(args) -> int:
    chain = load_model(args.model)
    named = [("prior", chain.prior)]
    for li, link in enumerate(chain.links):
        for si, iv in enumerate(link):
            named.append((f"link{li + 2}[{si}]", iv))
    all_ok = True
    for name, iv in named:
        verdict = validate_coherence(iv)
        if not verdict.coherent:
            all_ok = False
            details = ", ".join(f"{c}@{i}" if i >= 0 else c for c, i in verdict.violations)
            print(f"{name}: INCOHERENT ({details})")
            continue
        rep = goodness(iv)
        tag = "good" if rep.is_good else "bad"
        print(f"{name}: coherent {tag} delta={rep.delta:.6g} r={_vec(rep.slack)}")
    return 0 if all_ok else 1


def _diag_json(diag) -> dict:
    out = {}
    if diag.delta is not None:
        out["delta"] = diag.delta
    if diag.epsilon:
        out["epsilon"] = diag.epsilon
    for key in ("t_uniform", "t_lower", "t_upper"):
        value = getattr(diag, key)
        if value is not None:
            out[key] = np.asarray(value).tolist()
    return out


def cmd_infer(args) -> int:
    chain = load_model(args.model)
    chain.validate()
    if args.node is not None and not 2 <= args.node <= chain.length:
        raise DomainError(f"--node must lie in 2..{chain.length}")
    if args.method == "credal":
        if args.prior_mass:
            raise DomainError("--prior-mass only applies to belief methods")
        nodes = [
            {"node": i + 2, "lower": lo.tolist(), "upper": hi.tolist()}
            for i, (lo, hi) in enumerate(credal_chain_bounds(chain))
        ]
    else:
        prior_mass = None
        if args.prior_mass:
            prior_mass = load_mass(args.prior_mass, chain.frames[0])
        results = propagate_chain(chain, Strategy(args.method), prior_mass=prior_mass)
        nodes = [
            {
                "node": r.node,
                "lower": r.lower.tolist(),
                "upper": r.upper.tolist(),
                "diagnostics": _diag_json(r.diagnostics),
            }
            for r in results
        ]
    if args.node is not None:
        nodes = [x for x in nodes if x["node"] == args.node]
    print(json.dumps({"model": args.model, "method": args.method, "nodes": nodes}, indent=2))
    return 0


def cmd_experiment(args) -> int:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    spec = ExperimentSpec(
        n=args.n,
        k=args.k,
        samples=args.samples,
        seed=args.seed,
        epsilon=args.eps,
        methods=methods,
    )
    records, summary, _ = run_experiment(spec)
    write_csv(args.out, records, summary)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_sample(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = SamplerConfig(n=args.n, epsilon=args.eps, seed=args.seed)
    if args.k == 1:
        for i, iv in enumerate(sample_intervals(cfg, args.count)):
            frame = chain_frames([args.n])[0]
            chain = ChainModel(
                frames=(frame,),
                prior=type(iv)(frame, iv.lower, iv.upper),
                links=(),
            )
            save_model(chain, out_dir / f"interval_{i:03d}.json")
    else:
        for i in range(args.count):
            seed = int(np.random.SeedSequence((args.seed, i)).generate_state(1)[0])
            chain = sample_chain(
                SamplerConfig(n=args.n, epsilon=args.eps, seed=seed), args.k
            )
            save_model(chain, out_dir / f"chain_{i:03d}.json")
    print(f"wrote {args.count} files to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="credal-chains",
        description="Belief-function and exact credal inference on chain models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="coherence and goodness report")
    p.add_argument("model")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("infer", help="marginal bounds at every node")
    p.add_argument("model")
    p.add_argument("--method", required=True, choices=VALID_METHODS)
    p.add_argument("--node", type=int, default=None)
    p.add_argument("--prior-mass", default=None, help="JSON mass file replacing the prior")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("experiment", help="Monte-Carlo width campaign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--methods", default="credal,sgm-adhoc,adhoc-mass")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sample", help="write sampled intervals or chains")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
