"""Batch experiment orchestration.

Subcommands: spread, fourblock, ansatz, collapse, bell, toy, oracle-check.
Every run writes byte-stable CSV bodies plus a JSON manifest (timestamps
live only in the manifest).  Exit codes: 0 success, 1 configuration error,
2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, dense
from .analytics import DecayProfile, extract_xdec
from .circuits import (
    CircuitConfig,
    RealizationStreams,
    average_realizations,
    brickwork_layer,
    four_block_experiment,
    heralded_layer,
    realization_rng,
    run_coarse_grained,
)
from .clipped import clip, length_deviation_stats, mi_endpoints
from .distill import distill, find_bell_candidates, verify_distillation
from .tableau import InvariantError, StabilizerTableau


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(path: Path, subcommand: str, args: argparse.Namespace,
                    outputs: list[Path], started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config")},
        "root_seed": getattr(args, "seed", None),
        "version": __version__,
        "started_unix": started,
        "finished_unix": time.time(),
        "outputs": [str(p) for p in outputs],
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v)


def _default_threads() -> int:
    return int(os.environ.get("CMISPREAD_THREADS", "1"))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_spread(args) -> int:
    x_values = args.x_list or tuple(range(1, args.n_blocks // 2))
    cfg = CircuitConfig(
        n_blocks=args.n_blocks, m=args.m, p=args.p, t_max=args.t_max,
        x_values=x_values, realizations=args.realizations, seed=args.seed,
    )
    field = average_realizations(cfg, threads=args.threads, spot_check=not args.no_spot_check)
    rows = []
    for ti, t in enumerate(field.t_values):
        for xi, x in enumerate(field.x_values):
            rows.append([t, x, cfg.p, cfg.m, cfg.n_blocks, cfg.realizations,
                         field.mean[ti, xi], field.stderr[ti, xi]])
    out = Path(args.out)
    _write_csv(out, ["t", "x", "p", "m", "n_blocks", "realizations",
                     "mean_cmi_norm", "stderr"], rows)
    if args.dump_error_config:
        streams = RealizationStreams.for_realization(cfg.seed, 0)
        _, err = run_coarse_grained(cfg, streams, spot_check=False)
        rle_path = out.with_suffix(".errors.json")
        with open(rle_path, "w") as fh:
            json.dump({"shape": list(err.mask.shape), "rle": err.to_rle()}, fh)
            fh.write("\n")
    if args.dump_tableau:
        streams = RealizationStreams.for_realization(cfg.seed, 0)
        tab = StabilizerTableau.from_product_state(cfg.n_qubits)
        for step in range(cfg.t_max):
            brickwork_layer(tab, cfg.m, step % 2, streams.gates)
            heralded_layer(tab, cfg.p, streams.noise)
        with open(args.dump_tableau, "w") as fh:
            fh.write(tab.to_text())
    return 0


def _cmd_fourblock(args) -> int:
    rows = []
    for i in range(args.seeds):
        rec = four_block_experiment(args.m, args.p, realization_rng(args.seed, i, 0))
        rows.append([i, args.m, args.p, rec["i_ab"], rec["i_bc"], rec["i_abc"], rec["cmi"]])
    _write_csv(Path(args.out), ["seed", "m", "p", "i_ab", "i_bc", "i_abc", "cmi"], rows)
    means = np.mean([[r[3], r[4], r[5], r[6]] for r in rows], axis=0) / args.m
    print(f"fourblock m={args.m} p={args.p}: I(A:B)/m={means[0]:.4f} "
          f"I(B:C)/m={means[1]:.4f} I(A:BC)/m={means[2]:.4f} I(A:C|B)/m={means[3]:.4f}")
    return 0


def _cmd_ansatz(args) -> int:
    rng = realization_rng(args.seed, 0, 0)
    stats = length_deviation_stats(args.samples, args.n, args.k, rng)
    out = Path(args.out)
    with open(out, "w") as fh:
        fh.write(f"# n={stats.n} k={stats.k} samples={stats.samples} seed={args.seed}\n")
        fh.write(f"# len_ideal={_fmt(stats.len_ideal)} reference={stats.reference}\n")
        fh.write("delta,count\n")
        for d in sorted(stats.counts):
            fh.write(f"{d},{stats.counts[d]}\n")
    print(f"ansatz n={args.n} k={args.k}: mean|delta|={stats.mean_abs_delta():.4f} "
          f"P(|delta|>10)={stats.tail_fraction(10):.2e}")
    return 0


def _cmd_collapse(args) -> int:
    outputs = []
    merged_rows = []
    for p in args.p_list:
        t_c = 1.0 / (2.0 * p)
        t_max = args.t_max or int(np.floor(args.t_tilde_max * t_c))
        x_values = tuple(range(1, args.n_blocks // 2))
        cfg = CircuitConfig(
            n_blocks=args.n_blocks, m=args.m, p=p, t_max=t_max,
            x_values=x_values, realizations=args.realizations, seed=args.seed,
        )
        field = average_realizations(cfg, threads=args.threads, spot_check=not args.no_spot_check)
        rows = []
        for ti, t in enumerate(field.t_values):
            profile = DecayProfile(x=field.x_values.astype(float),
                                   values=field.mean[ti], n_blocks=cfg.n_blocks, t=int(t))
            res = extract_xdec(profile)
            t_tilde = 2 * p * t
            x_dec_tilde = None if res.rejected else 2 * p * res.x_dec
            row = [p, cfg.m, t, t_tilde, res.x_dec, x_dec_tilde,
                   res.n_points, res.r2 if not res.rejected else None,
                   res.rejected_reason]
            rows.append(row)
            merged_rows.append(row)
        out = Path(f"{args.out_prefix}_p{p!r}.csv")
        _write_csv(out, ["p", "m", "t", "t_tilde", "x_dec", "x_dec_tilde",
                         "fit_points", "fit_r2", "rejected_reason"], rows)
        outputs.append(out)
    merged = Path(f"{args.out_prefix}_merged.csv")
    _write_csv(merged, ["p", "m", "t", "t_tilde", "x_dec", "x_dec_tilde",
                        "fit_points", "fit_r2", "rejected_reason"], merged_rows)
    outputs.append(merged)
    args._outputs = outputs
    return 0


def _cmd_bell(args) -> int:
    n = args.n_blocks * args.m
    t_c = int(round(1.0 / (2.0 * args.p)))
    t_stop = args.t if args.t is not None else t_c - 1
    quarter = n // 4
    a = np.arange(quarter)
    b = np.arange(quarter, n - quarter)
    c = np.arange(n - quarter, n)
    records = []
    successes = 0
    eligible = 0
    for trial in range(args.trials):
        streams = RealizationStreams.for_realization(args.seed, trial)
        tab = StabilizerTableau.from_product_state(n)
        for t in range(t_stop):
            brickwork_layer(tab, args.m, t % 2, streams.gates)
            heralded_layer(tab, args.p, streams.noise)
        if tab.k == 0:
            records.append({"seed": trial, "k": 0, "skipped": "maximally mixed"})
            continue
        plan = find_bell_candidates(tab, a, b, c)
        pre = tab.copy()
        post, n_bell = distill(tab, plan, streams.check)
        cert = verify_distillation(pre, post, a, c, n_bell)
        if pre.k >= 4:
            eligible += 1
            if n_bell > 0:
                successes += 1
        records.append({
            "seed": trial, "k": pre.k, "n_bell": n_bell,
            "cmi_pre": cert.values["cmi_pre"],
            "mi_ac_post": cert.values["mi_ac_post"],
            "clauses": cert.clauses,
        })
    out = Path(args.out)
    with open(out, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    rate = successes / eligible if eligible else float("nan")
    print(f"bell trials={args.trials} t={t_stop}: nonempty-plan rate (K>=4) = "
          f"{successes}/{eligible} = {rate:.3f}")
    return 0


def _cmd_toy(args) -> int:
    rows = []
    for p in args.p_grid:
        for channel in ("depolarizing", "heralded"):
            vals = np.array([
                dense.toy_four_qudit(p, channel, realization_rng(args.seed, i, 0))
                for i in range(args.seeds)
            ])
            stderr = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
            rows.append([p, channel, args.seeds, float(vals.mean()), float(stderr)])
    _write_csv(Path(args.out), ["p", "channel", "seed_count", "mean_cmi2", "stderr"], rows)
    return 0


def _cmd_oracle_check(args) -> int:
    rng = realization_rng(args.seed, 0, 0)
    failures = 0
    for trial in range(args.circuits):
        n = int(rng.integers(2, args.max_qubits + 1))
        ops = dense.random_clifford_noise_ops(n, int(rng.integers(5, 25)), 0.2, rng)
        tab = dense.apply_ops_to_tableau(StabilizerTableau.from_product_state(n), ops)
        rho = dense.apply_ops_to_density(dense.zero_state(n), ops)
        for r in range(1 << n):
            region = [i for i in range(n) if (r >> i) & 1]
            if abs(tab.entropy(region) - dense.von_neumann_entropy(rho, region)) > 1e-9:
                failures += 1
                print(f"MISMATCH circuit {trial} region {region}")
        ct = clip(tab)
        for cut in range(1, n):
            if mi_endpoints(ct, cut) != tab.mutual_information(
                np.arange(cut), np.arange(cut, n)
            ):
                failures += 1
                print(f"MISMATCH circuit {trial} endpoint-MI cut {cut}")
    print(f"oracle-check: {args.circuits} circuits, {failures} mismatches")
    if failures:
        raise InvariantError("stabilizer/dense oracle disagreement")
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="cmispread", description=__doc__)
    parser.add_argument("--config", help="flat key=value config file; flags override")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="64-bit root seed")
        p.add_argument("--threads", type=int, default=_default_threads())

    p = sub.add_parser("spread", help="coarse-grained sweep -> SpreadingField CSV")
    common(p)
    p.add_argument("--n-blocks", type=int, default=64)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--t-max", type=int, default=16)
    p.add_argument("--x-list", type=_int_list, default=None, help="comma-separated block separations")
    p.add_argument("--realizations", type=int, default=10)
    p.add_argument("--out", default="field.csv")
    p.add_argument("--no-spot-check", action="store_true")
    p.add_argument("--dump-error-config", action="store_true")
    p.add_argument("--dump-tableau", default=None,
                   help="write realization 0's final tableau (text) to this path")
    p.set_defaults(func=_cmd_spread)

    p = sub.add_parser("fourblock", help="four-block selective-erasure measures")
    common(p)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", default="fourblock.csv")
    p.set_defaults(func=_cmd_fourblock)

    p = sub.add_parser("ansatz", help="clipped-gauge length-deviation statistics")
    common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--k", type=int, default=128)
    p.add_argument("--out", default="ansatz.csv")
    p.set_defaults(func=_cmd_ansatz)

    p = sub.add_parser("collapse", help="x_dec extraction and rescaling over a p grid")
    common(p)
    p.add_argument("--p-list", type=_float_list, default=(1 / 64, 3 / 128))
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--n-blocks", type=int, default=256)
    p.add_argument("--t-max", type=int, default=None, help="override timestep count")
    p.add_argument("--t-tilde-max", type=float, default=0.7)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--out-prefix", default="collapse")
    p.add_argument("--no-spot-check", action="store_true")
    p.set_defaults(func=_cmd_collapse)

    p = sub.add_parser("bell", help="Bell distillation trials on near-critical states")
    common(p)
    p.add_argument("--n-blocks", type=int, default=32)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--p", type=float, default=1 / 32)
    p.add_argument("--t", type=int, default=None, help="circuit depth (default t_c - 1)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out", default="bell.jsonl")
    p.set_defaults(func=_cmd_bell)

    p = sub.add_parser("toy", help="four-qubit Haar toy example over a p grid")
    common(p)
    p.add_argument("--p-grid", type=_float_list,
                   default=tuple(round(0.1 * i, 1) for i in range(11)))
    p.add_argument("--seeds", type=int, default=64)
    p.add_argument("--out", default="toy.csv")
    p.set_defaults(func=_cmd_toy)

    p = sub.add_parser("oracle-check", help="stabilizer vs dense equivalence suite")
    common(p)
    p.add_argument("--circuits", type=int, default=50)
    p.add_argument("--max-qubits", type=int, default=6)
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def _apply_config(argv: list[str], args: argparse.Namespace) -> None:
    """Flat key=value config; any flag present on the command line wins."""
    if not args.config:
        return
    overrides = {}
    with open(args.config) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            overrides[key.strip().replace("-", "_")] = value.strip()
    explicit = {tok.split("=")[0].lstrip("-").replace("-", "_")
                for tok in argv if tok.startswith("--")}
    for key, raw in overrides.items():
        if key in explicit or not hasattr(args, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        elif isinstance(current, tuple) or key in ("x_list", "p_list", "p_grid"):
            value = _float_list(raw) if key in ("p_list", "p_grid") else _int_list(raw)
        else:
            value = raw
        setattr(args, key, value)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(argv, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    started = time.time()
    try:
        code = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (InvariantError, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    if code == 0 and hasattr(args, "out"):
        out = Path(args.out)
        _write_manifest(out.with_suffix(out.suffix + ".manifest.json"),
                        args.subcommand, args, [out], started)
    elif code == 0 and hasattr(args, "_outputs"):
        first = args._outputs[0]
        _write_manifest(Path(str(first) + ".manifest.json"),
                        args.subcommand, args, args._outputs, started)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
