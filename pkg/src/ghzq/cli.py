"""Command-line front end producing CSV/JSON result files for all figures.

Every output embeds a comment-line metadata header (tool version, the exact
regeneration command, seed, extraction rules), so a figure can be rebuilt
from its data file alone. Worker count and output paths never influence the
numbers and are deliberately left out of the header; data bodies are
byte-identical across worker counts.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

import ghzq
from ghzq.core import (
    Extraction,
    GhzSpec,
    ardehali_convention,
    convention_for,
    f_qm_closed_form,
    mermin_convention,
)
from ghzq.decoherence import NoiseSpec, decay_curve
from ghzq.estimators import scaling_study
from ghzq import oracle as oracle_mod
from ghzq.qfunction import q_density, q_density_quadrature_check
from ghzq.runner import (
    SCATTER_COLUMNS,
    bell_sweep_rows,
    convention_for_family,
    derive_seed,
    run_scatter,
)
from ghzq.sampling import measure_acceptance_rate, sample_batch, SampleStreamSpec

DEFAULT_SEED = 101
DEFAULT_WORKERS = max(1, min(os.cpu_count() or 1, 8))

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    """Invalid run configuration; maps to exit code 2."""


def parse_count(text: str) -> int:
    """Sample counts, accepting scientific notation like 1e8."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value) or value <= 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"need a positive integer count, got {text!r}")
    return int(value)


def parse_m_list(text: str) -> list[int]:
    """Qubit counts as '7', '2,4,6' or an inclusive range '3:11:2'."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                start, stop, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                start, stop, step = parts
            else:
                raise ValueError
            if step <= 0 or stop < start:
                raise ValueError
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad m list {text!r}; use forms like 7 | 2,4,6 | 3:11:2"
        ) from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"m values must be >= 1, got {text!r}")
    return values


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _metadata_lines(kind: str, args, extra: dict | None = None) -> list[str]:
    pairs: list[tuple[str, object]] = [
        ("tool", "ghzq"),
        ("version", ghzq.__version__),
        ("kind", kind),
        ("command", regen_command(kind, args)),
        ("seed", args.seed),
    ]
    if hasattr(args, "samples"):
        pairs.append(("samples", args.samples))
    if hasattr(args, "m"):
        pairs.append(("m", ",".join(str(v) for v in args.m)))
    if hasattr(args, "convention"):
        pairs.append(("convention", args.convention))
    pairs.append(("extraction_mermin", Extraction.NEG_IMAG.value))
    pairs.append(("extraction_ardehali", Extraction.NEG_REAL.value))
    for key, value in (extra or {}).items():
        pairs.append((key, value))
    return [f"# {key}={_fmt(value)}" for key, value in pairs]


def regen_command(kind: str, args) -> str:
    """The command line that reproduces the data (workers/out excluded)."""
    parts = [f"ghzq {kind}"]
    if hasattr(args, "m"):
        parts.append("--m " + ",".join(str(v) for v in args.m))
    if hasattr(args, "convention"):
        parts.append(f"--convention {args.convention}")
    if hasattr(args, "samples"):
        parts.append(f"--samples {args.samples}")
    if hasattr(args, "epsilon"):
        parts.append(f"--epsilon {args.epsilon}")
    if hasattr(args, "steps"):
        parts.append(f"--steps {args.steps}")
    if hasattr(args, "qubit_a"):
        parts.append(f"--qubit-a {args.qubit_a} --qubit-b {args.qubit_b}")
    if hasattr(args, "row_limit"):
        parts.append(f"--row-limit {args.row_limit}")
    parts.append(f"--seed {args.seed}")
    return " ".join(parts)


def write_result(
    path: str,
    fmt: str,
    metadata: list[str],
    header: list[str],
    rows: list[list],
) -> None:
    """Atomically write a CSV (or JSON) result file."""
    if fmt == "csv":
        lines = list(metadata)
        lines.append(",".join(header))
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    else:
        meta = {}
        for line in metadata:
            key, _, value = line[2:].partition("=")
            meta[key] = value
        payload = {"metadata": meta, "columns": header,
                   "rows": [[_coerce_json(v) for v in row] for row in rows]}
        text = json.dumps(payload, indent=2) + "\n"
    tmp_path = path + ".tmp"
    with open(tmp_path, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp_path, path)


def _coerce_json(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _check_parity(m_values: list[int], convention: str) -> None:
    if convention == "mermin" and any(m % 2 == 0 for m in m_values):
        raise ConfigError(f"the Mermin convention needs odd m, got {m_values}")
    if convention == "ardehali" and any(m % 2 == 1 or m < 2 for m in m_values):
        raise ConfigError(f"the Ardehali convention needs even m >= 2, got {m_values}")


def cmd_bell_sweep(args) -> int:
    _check_parity(args.m, args.convention)
    rows = bell_sweep_rows(args.m, args.convention, args.samples, args.seed,
                           workers=args.workers)
    header = [
        "m", "convention", "samples", "f_value", "f_stderr", "f_qm",
        "ratio", "ratio_stderr", "lhv_ratio", "genuine_threshold", "seed",
    ]
    table = [[row[key] for key in header] for row in rows]
    write_result(args.out, args.format, _metadata_lines("bell-sweep", args),
                 header, table)
    return EXIT_OK


def cmd_scaling(args) -> int:
    _check_parity(args.m, args.convention)
    study = scaling_study(args.m, args.convention, args.samples, args.seed,
                          workers=args.workers)
    header = ["m", "rel_err_F", "rel_err_N", "samples", "seed"]
    table = [
        [row.m, row.rel_err_f, row.rel_err_n, row.samples, args.seed]
        for row in study.rows
    ]
    extra = {"fitted_slope": study.slope, "slope_stderr": study.slope_stderr}
    write_result(args.out, args.format, _metadata_lines("scaling", args, extra),
                 header, table)
    sidecar = {
        "slope": study.slope,
        "slope_stderr": study.slope_stderr,
        "slope_ci95": list(study.slope_ci95),
        "m": [row.m for row in study.rows],
        "samples": args.samples,
        "seed": args.seed,
    }
    sidecar_path = args.out + ".slope.json"
    tmp = sidecar_path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        json.dump(sidecar, handle, indent=2)
        handle.write("\n")
    os.replace(tmp, sidecar_path)
    return EXIT_OK


def cmd_scatter(args) -> int:
    if len(args.m) != 1:
        raise ConfigError("scatter takes a single m")
    m = args.m[0]
    _check_parity(args.m, args.convention)
    spec, conv = convention_for_family(m, args.convention)
    if not (0 <= args.qubit_a < m and 0 <= args.qubit_b < m):
        raise ConfigError(f"qubit indices must be < m = {m}")
    rows, moments = run_scatter(
        spec, conv, args.samples, derive_seed(args.seed, m),
        qubit_a=args.qubit_a, qubit_b=args.qubit_b,
        row_limit=args.row_limit, workers=args.workers,
    )
    extra = {"rows_emitted": rows.shape[0]}
    for name, acc in moments.items():
        extra[f"moment_{name}_mean"] = acc.mean.real
        extra[f"moment_{name}_stderr"] = acc.component_stderr(Extraction.NEG_REAL)
    header = ["sample_index", *SCATTER_COLUMNS]
    table = [[int(row[0]), row[1], row[2], row[3], row[4]] for row in rows]
    write_result(args.out, args.format, _metadata_lines("scatter", args, extra),
                 header, table)
    return EXIT_OK


def cmd_decoherence(args) -> int:
    _check_parity(args.m, args.convention)
    header = ["m", "tau", "f_ratio", "stderr", "analytic_ratio", "f_value", "f_stderr"]
    table = []
    for m in args.m:
        spec, conv = convention_for_family(m, args.convention)
        noise = NoiseSpec(epsilon=args.epsilon, steps=args.steps,
                          seed=derive_seed(args.seed, m))
        curve = decay_curve(spec, conv, noise, args.samples, workers=args.workers)
        for point in curve:
            table.append([
                m, point.tau, point.f_ratio, point.stderr,
                point.analytic_ratio, point.f_value, point.f_stderr,
            ])
    extra = {"epsilon": args.epsilon, "steps": args.steps}
    write_result(args.out, args.format, _metadata_lines("decoherence", args, extra),
                 header, table)
    return EXIT_OK


def _oracle_check_rows(seed: int) -> list[tuple[str, bool, str]]:
    rows: list[tuple[str, bool, str]] = []

    def check(name: str, ok: bool, detail: str) -> None:
        rows.append((name, bool(ok), detail))

    for m in range(1, 13):
        spec, conv = convention_for(m) if m != 1 else mermin_convention(1)
        moment, f = oracle_mod.oracle_bell_value(spec, conv)
        closed = f_qm_closed_form(spec, conv)
        check(
            f"closed-form vs oracle m={m}",
            abs(f - closed) <= 1e-9 * closed,
            f"oracle F={f:.6g} closed={closed:.6g}",
        )

    spec2, conv2 = ardehali_convention(2)
    state = oracle_mod.build_ghz(spec2)
    eq5 = -oracle_mod.oracle_pauli_correlator(state, "xx") + \
        oracle_mod.oracle_pauli_correlator(state, "yy")
    _, f2 = oracle_mod.oracle_bell_value(spec2, conv2)
    check("two-qubit reduction -<xx>+<yy>", abs(eq5 - 2.0) < 1e-12 and
          abs(f2 - eq5) < 1e-12, f"eq5={eq5:.12g} F={f2:.12g}")
    literal = oracle_mod.product_moment(
        spec2, conv2.s, [s * t for s, t in zip(conv2.s, conv2.theta)]
    )
    check("literal mixed-sign product vanishes", abs(literal) < 1e-12,
          f"|moment|={abs(literal):.3g}")

    for m in (1, 2, 3):
        spec, conv = convention_for(m) if m != 1 else mermin_convention(1)
        mass = q_density_quadrature_check(spec, 12)
        check(f"q-density mass m={m}", abs(mass - 1.0) < 0.01, f"mass={mass:.8f}")
        moment = oracle_mod.oracle_q_moment_check(spec, conv, 12)
        exact, _ = oracle_mod.oracle_bell_value(spec, conv)
        check(
            f"q-moment quadrature m={m}",
            abs(moment - exact) < 0.02 * max(abs(exact), 1.0),
            f"quadrature={moment:.6g} oracle={exact:.6g}",
        )

    rng = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    for _ in range(200):
        m = int(rng.integers(1, 5))
        spec = GhzSpec(m=m, phi=float(rng.uniform(-math.pi, math.pi)))
        u = rng.uniform(-1.0, 1.0, m)
        azimuth = rng.uniform(0.0, 2.0 * math.pi, m)
        sin_t = np.sqrt(1.0 - u * u)
        point = np.stack([sin_t * np.cos(azimuth), sin_t * np.sin(azimuth), u], -1)
        direct = (2.0 / (4.0 * math.pi)) ** m * abs(
            oracle_mod.coherent_overlap(spec, point)
        ) ** 2
        worst = max(worst, abs(q_density(spec, point) - direct))
    check("density equals |overlap|^2", worst < 1e-12, f"max err={worst:.3g}")

    for m in (2, 10, 40):
        spec, _ = convention_for(m)
        rate = measure_acceptance_rate(spec, derive_seed(seed, m), 200000)
        check(f"acceptance rate m={m}", abs(rate - 0.5) < 0.02, f"rate={rate:.4f}")

    for m in (2, 3, 5, 6):
        spec, conv = convention_for(m)
        samples = sample_batch(spec, SampleStreamSpec(seed=derive_seed(seed, m),
                                                      count=100000))
        from ghzq.estimators import estimate_bell

        estimate = estimate_bell(spec, conv, samples)
        exact, _ = oracle_mod.oracle_bell_value(spec, conv)
        err = abs(estimate.complex_mean - exact)
        bound = 5.0 * max(estimate.f_stderr, 1e-12) * math.sqrt(2.0)
        check(f"sampled moment vs oracle m={m}", err < bound,
              f"|diff|={err:.4g} bound={bound:.4g}")
    return rows


def cmd_oracle_check(args) -> int:
    rows = _oracle_check_rows(args.seed)
    width = max(len(name) for name, _, _ in rows)
    failures = 0
    for name, ok, detail in rows:
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name.ljust(width)}  {detail}")
    print(f"{len(rows) - failures}/{len(rows)} oracle checks passed")
    return EXIT_OK if failures == 0 else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzq",
        description="GHZ Bell-violation statistics from SU(2)-Q phase-space sampling",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, needs_out: bool = True) -> None:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"base RNG seed (default {DEFAULT_SEED})")
        p.add_argument("--workers", type=int, default=DEFAULT_WORKERS,
                       help="worker processes; never affects the numbers")
        if needs_out:
            p.add_argument("--out", required=True, help="output file path")
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    sweep = sub.add_parser("bell-sweep", help="normalized Bell violation per m")
    sweep.add_argument("--m", type=parse_m_list, required=True,
                       help="qubit counts: 7 | 2,4,6 | 3:11:2")
    sweep.add_argument("--convention", choices=("mermin", "ardehali", "auto"),
                       default="auto")
    sweep.add_argument("--samples", type=parse_count, required=True)
    common(sweep)
    sweep.set_defaults(func=cmd_bell_sweep)

    scaling = sub.add_parser("scaling", help="relative-error scaling study")
    scaling.add_argument("--m", type=parse_m_list, required=True)
    scaling.add_argument("--convention", choices=("mermin", "ardehali", "auto"),
                         default="auto")
    scaling.add_argument("--samples", type=parse_count, required=True,
                         help="fixed sample count per m")
    common(scaling)
    scaling.set_defaults(func=cmd_scaling)

    scatter = sub.add_parser("scatter", help="per-sample factor/term scatter data")
    scatter.add_argument("--m", type=parse_m_list, default=[2])
    scatter.add_argument("--convention", choices=("mermin", "ardehali", "auto"),
                         default="auto")
    scatter.add_argument("--samples", type=parse_count, required=True)
    scatter.add_argument("--qubit-a", dest="qubit_a", type=int, default=0)
    scatter.add_argument("--qubit-b", dest="qubit_b", type=int, default=1)
    scatter.add_argument("--row-limit", dest="row_limit", type=parse_count,
                         default=10000)
    common(scatter)
    scatter.set_defaults(func=cmd_scatter)

    deco = sub.add_parser("decoherence", help="dephasing decay curves F(tau)")
    deco.add_argument("--m", type=parse_m_list, required=True)
    deco.add_argument("--convention", choices=("mermin", "ardehali", "auto"),
                      default="auto")
    deco.add_argument("--samples", type=parse_count, required=True)
    deco.add_argument("--epsilon", type=float, required=True,
                      help="per-step noise strength")
    deco.add_argument("--steps", type=int, required=True,
                      help="number of time steps tau")
    common(deco)
    deco.set_defaults(func=cmd_decoherence)

    check = sub.add_parser("oracle-check",
                           help="oracle vs sampler and quadrature validation")
    common(check, needs_out=False)
    check.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "epsilon", 0.0) < 0.0:
        print("error: --epsilon must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "steps", 0) < 0:
        print("error: --steps must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
