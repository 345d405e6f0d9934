"""Command line interface.

    shallow-shadows channel   --n 8 --d 0 --pauli ZIIIIIII
    shallow-shadows tau       --n 4 --d 1 --pauli ZZII --pauli2 ZIII
    shallow-shadows invert    --n 10 --d 3 --chi 3
    shallow-shadows sample    --n 8 --d 2 --state ghz --count 1000 --out snaps.jsonl
    shallow-shadows estimate  --records snaps.jsonl --observable ghz-projector
    shallow-shadows norm      --n 8 --d 2 --observable cluster-hamiltonian
    shallow-shadows reproduce ghz-fidelity --out ghz.csv

Every subcommand accepts ``--config file.{json,yaml}``; keys are option
names (dashes or underscores) and explicit flags override them.  Cached
Clifford tables and inversion results live under $SHALLOW_SHADOWS_CACHE.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import experiments
from .channel import build_t_mps, t_values, tau_values
from .circuits import INF, BrickworkSpec, parse_depth
from .clifford import cache_dir
from .inverse import InversionConfig, InversionResult, invert, result_path
from .mps import PeriodicMPS
from .norms import (
    BoundPreconditionError,
    NormReport,
    frobenius_bound_sq,
    pauli_norm_sq,
    sparse_report,
    stabilizer_projector_norm_sq,
    statmech_t_lower_bound,
    write_csv,
)
from .pauli import PauliString, support_extent
from .records import depth_to_json, read_records, write_records
from .shadows import (
    ShallowObservable,
    SnapshotSet,
    SparseObservable,
    acquire,
    cluster_hamiltonian,
    estimate_shallow,
    estimate_sparse,
    ghz_projector,
)
from .stabilizer import StabilizerState

EXIT_NOT_HERALDED = 2
EXIT_REFUSED = 3


def _load_config(path) -> dict:
    text = Path(path).read_text()
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise SystemExit(f"config {path} must be a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _dump(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if o == INF:
        return "inf"
    raise TypeError(f"cannot serialise {type(o)}")


def _state(args, n) -> StabilizerState:
    if args.generators:
        return StabilizerState.from_strings(args.generators)
    return StabilizerState.named(args.state, n)


def _observable(spec: str, n: int | None):
    """Named observable, JSON file (sparse terms or MPS), or inline ``c:PAULI,c:PAULI``."""
    if spec == "ghz-projector":
        return ghz_projector(n)
    if spec == "cluster-hamiltonian":
        return cluster_hamiltonian(n)
    path = Path(spec)
    if path.exists():
        if path.suffix == ".npz":
            return ShallowObservable(PeriodicMPS.load(path))
        data = json.loads(path.read_text())
        if isinstance(data, dict) and data.get("format") == "periodic-mps":
            return ShallowObservable(PeriodicMPS.from_dict(data))
        return SparseObservable.from_dict(data)
    terms = []
    for part in spec.split(","):
        coef, _, label = part.strip().rpartition(":")
        terms.append((float(coef) if coef else 1.0, PauliString.from_label(label)))
    return SparseObservable(terms)


def _load_inverse(args, n, d):
    if getattr(args, "inverse", None):
        return InversionResult.load(args.inverse)
    return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_channel(args) -> int:
    d = parse_depth(args.d)
    if args.save:
        if d in (0, INF):
            raise SystemExit("d=0 and d=inf have closed forms; nothing to save")
        build_t_mps(args.n, d).save(args.save)
    if args.pauli:
        labels = np.array([PauliString.from_label(p).labels for p in args.pauli])
        if labels.shape[1] != args.n:
            raise SystemExit(f"Pauli strings must have {args.n} characters")
        for p, t in zip(args.pauli, t_values(args.n, d, labels)):
            print(f"{p}\t{t:.15g}" if len(args.pauli) > 1 else f"{t:.15g}")
    return 0


def cmd_tau(args) -> int:
    d = parse_depth(args.d)
    a = PauliString.from_label(args.pauli)
    b = PauliString.from_label(args.pauli2)
    print(f"{tau_values(args.n, d, a.labels[None], b.labels[None])[0]:.15g}")
    return 0


def cmd_invert(args) -> int:
    d = parse_depth(args.d)
    sched = tuple(args.chi_schedule) if args.chi_schedule else (min(2, args.chi), args.chi)
    cfg = InversionConfig(chi=args.chi, chi_schedule=sched, eps_stop=args.eps, max_sweeps=args.max_sweeps,
                          reg_mode=args.reg_mode, seed=args.seed)
    res = invert(build_t_mps(args.n, d), cfg, np.random.default_rng(args.seed))
    res.n, res.d = args.n, d
    out = Path(args.out) if args.out else result_path(cache_dir() / "inverses", args.n, d, args.chi)
    out.parent.mkdir(parents=True, exist_ok=True)
    res.save(out)
    _dump({
        "path": str(out), "n": args.n, "d": d, "chi": res.chi, "final_cost": res.final_cost,
        "herald_epsilon": res.herald_epsilon, "heralded": res.heralded, "sweeps_used": res.sweeps_used,
        "restarts": res.restarts,
    })
    return 0 if res.heralded else EXIT_NOT_HERALDED


def cmd_sample(args) -> int:
    spec = BrickworkSpec(args.n, args.d, args.seed)
    snaps = acquire(_state(args, args.n), spec, args.count, args.first_stream)
    count = write_records(args.out, snaps)
    print(json.dumps({"records": count, "path": args.out, "n": args.n, "d": depth_to_json(spec.d)}))
    return 0


def cmd_estimate(args) -> int:
    snaps = SnapshotSet(read_records(args.records))
    obs = _observable(args.observable, snaps.n)
    inverse = _load_inverse(args, snaps.n, snaps.d)
    if isinstance(obs, SparseObservable):
        bound = sparse_report(obs, snaps.d).worst_case_upper_sq if obs.labels.any() else None
        rep = estimate_sparse(obs, snaps, inverse, args.K, bound)
    else:
        bound = None
        if args.observable == "ghz-projector":
            bound = stabilizer_projector_norm_sq(StabilizerState.ghz(snaps.n), snaps.d)
        rep = estimate_shallow(obs, snaps, inverse, args.K, bound)
    out = rep.to_dict()
    out["config_hash"] = experiments.config_hash(vars(args))
    if args.no_blocks:
        out.pop("block_means")
    _dump(out, args.out)
    return 0


def cmd_norm(args) -> int:
    d = parse_depth(args.d)
    if args.statmech:
        lam = PauliString.from_label(args.pauli)
        try:
            b = statmech_t_lower_bound(lam.n, d, support_extent(lam), args.alpha, args.c)
        except BoundPreconditionError as err:
            print(f"bound not claimed: {err}", file=sys.stderr)
            return EXIT_REFUSED
        exact = pauli_norm_sq(lam, d)
        rep = NormReport(exact, 1.0 / b, "statmech-bound", lam.n, d, {"t_lower_bound": b, "t_exact": 1.0 / exact})
    elif args.stabilizer:
        state = StabilizerState.from_strings(args.stabilizer) if args.stabilizer != ["ghz"] else StabilizerState.ghz(args.n)
        val = stabilizer_projector_norm_sq(state, d)
        rep = NormReport(val, val, "stabilizer-exact", state.n, d, {"k": state.k})
    elif args.pauli:
        rep = sparse_report(SparseObservable([(1.0, PauliString.from_label(args.pauli))]), d)
    else:
        obs = _observable(args.observable, args.n)
        if args.frobenius or isinstance(obs, ShallowObservable):
            rep = frobenius_bound_sq(obs, d, _load_inverse(args, obs.n, d))
        else:
            rep = sparse_report(obs, d)
    _dump(rep.to_dict(), args.out)
    return 0


def cmd_reproduce(args) -> int:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    meta = {"experiment": args.experiment, "config": cfg, "config_hash": experiments.config_hash(cfg)}
    if args.experiment == "ghz-fidelity":
        rows, summary = experiments.ghz_fidelity(args.n or 8, args.depths or (0, 1, 2, 3), args.reps, args.N, args.seed)
        meta["summary"] = summary
    elif args.experiment == "pauli-norms":
        rows = experiments.pauli_norms(args.n or 20, None, args.depths or (1, 2, 3, 4, 5, 6))
    else:
        rows = experiments.hamiltonian(args.n or 8, args.depths or (0, 1, 2, 3, "inf"), args.N, args.seed)
        meta["summary"] = rows
    write_csv(args.out, rows)
    Path(str(args.out) + ".json").write_text(json.dumps(meta, indent=2, default=_json_default) + "\n")
    print(json.dumps(meta, indent=2, default=_json_default))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="shallow-shadows", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON or YAML file with option defaults")
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("channel", cmd_channel, "t eigenvalues (and optionally save the t MPS)")
    p.add_argument("--n", type=int, required=False)
    p.add_argument("--d", default="1")
    p.add_argument("--pauli", action="append")
    p.add_argument("--save")

    p = add("tau", cmd_tau, "pair probability tau for two Paulis")
    p.add_argument("--n", type=int)
    p.add_argument("--d", default="1")
    p.add_argument("--pauli")
    p.add_argument("--pauli2")

    p = add("invert", cmd_invert, "variational inverse of the t MPS")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--chi", type=int, default=3)
    p.add_argument("--chi-schedule", type=int, nargs="*")
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=500)
    p.add_argument("--reg-mode", default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = add("sample", cmd_sample, "simulate snapshots to a JSON-lines file")
    p.add_argument("--n", type=int)
    p.add_argument("--d", default="1")
    p.add_argument("--state", default="ghz")
    p.add_argument("--generators", nargs="*")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--first-stream", type=int, default=0)
    p.add_argument("--out", default="snapshots.jsonl")

    p = add("estimate", cmd_estimate, "estimate an observable from snapshot records")
    p.add_argument("--records")
    p.add_argument("--observable", default="ghz-projector")
    p.add_argument("--inverse", help="saved inversion result (default: exact 1/t)")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--no-blocks", action="store_true")
    p.add_argument("--out")

    p = add("norm", cmd_norm, "shadow-norm reports and bounds")
    p.add_argument("--n", type=int)
    p.add_argument("--d", default="1")
    p.add_argument("--pauli")
    p.add_argument("--observable")
    p.add_argument("--stabilizer", nargs="*", help="generators, or 'ghz'")
    p.add_argument("--frobenius", action="store_true")
    p.add_argument("--inverse")
    p.add_argument("--statmech", action="store_true", help="closed-form lower bound on t for --pauli")
    p.add_argument("--alpha", type=float, default=1.001)
    p.add_argument("--c", type=float, default=0.71)
    p.add_argument("--out")

    p = add("reproduce", cmd_reproduce, "reproduce a numerical study as CSV + JSON")
    p.add_argument("experiment", choices=["ghz-fidelity", "pauli-norms", "hamiltonian"])
    p.add_argument("--n", type=int)
    p.add_argument("--depths", nargs="*")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="reproduce.csv")
    return parser, subs


def main(argv=None) -> int:
    parser, subs = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and argv and argv[0] in subs:
        subs[argv[0]].set_defaults(**_load_config(known.config))
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    for name in ("n",):
        if hasattr(args, name) and getattr(args, name) is None and args.command in ("channel", "tau", "invert", "sample"):
            parser.error(f"--{name} is required")
    if args.command == "invert" and args.d is None:
        parser.error("--d is required")
    try:
        return int(args.func(args) or 0)
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
