"""Command line interface: ``weaktomo <command> [flags]``.

Data goes to ``--out`` (``-`` for standard output), diagnostics to standard
error. Exit codes: 0 success, 2 invalid input, 3 data mismatch, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import noise, qubit, tomography
from .bases import build_family, load_family, make_params, save_family, validate_family
from .errors import DataMismatch, InvalidInput, NumericalFailure, WeakTomoError

EXIT_OK, EXIT_INPUT, EXIT_MISMATCH, EXIT_NUMERIC = 0, 2, 3, 4


def parse_grid(text: str, p: int) -> tuple:
    """``start:stop:count`` (endpoints included), a comma list, or one value.

    Every value is checked against the open lambda interval for ``p``.
    """
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise InvalidInput(f"grid count must be >= 1, got {count}")
            grid = np.linspace(start, stop, count) if count > 1 else np.array([start])
        else:
            grid = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise InvalidInput(f"bad lambda grid {text!r}; expected start:stop:count") from None
    for lam in grid:
        make_params(p, lam)
    return tuple(float(x) for x in grid)


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _load_json_file(loader, path):
    try:
        return loader(path)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc


def cmd_gen(args) -> int:
    family = build_family(args.p, args.lam)
    report = validate_family(family)
    _emit(save_family(family, None, report) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def cmd_validate(args) -> int:
    family = _load_json_file(lambda f: load_family(f, validate=False), args.family)
    report = validate_family(family)
    _emit(_dump(report.to_dict()), args.out)
    if not report.passed:
        print(f"weaktomo: validation failed: {sorted(report.failures())}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def cmd_state(args) -> int:
    rng = np.random.default_rng(args.seed)
    rho = tomography.random_density_matrix(args.p, rng, args.kind)
    tomography.check_state(rho)
    _emit(tomography.save_state(rho, None) + "\n", args.out)
    return EXIT_OK


def _load_inputs(args):
    rho = _load_json_file(tomography.load_state, args.state)
    family = _load_json_file(load_family, args.family)
    if rho.p != family.p:
        raise DataMismatch(f"state is {rho.p}-dimensional but the family is for p={family.p}")
    return rho, family


def cmd_weak(args) -> int:
    rho, family = _load_inputs(args)
    _emit(_dump(tomography.weak_values(rho, family).to_dict()), args.out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    rho, family = _load_inputs(args)
    table = tomography.weak_values(rho, family)
    est = tomography.reconstruct(table, family)
    if family.p == 2:
        constraint = abs(qubit.con2_residual(table.weak(1, 0), table.weak(2, 0), family.lam))
    else:
        constraint = tomography.constraint_residuals(table, family.params).max_abs
    raw, independent = tomography.parameter_audit(family.p)
    doc = {
        "p": family.p,
        "lambda": family.lam,
        "rho_est": tomography.matrix_to_json(est),
        "frob_err": tomography.frobenius_error(est, rho),
        "constraint_max_residual": float(constraint),
        "audit": {
            "raw_real_parameters": raw,
            "independent_real_parameters": independent,
            "real_conditions": raw - independent,
        },
    }
    _emit(_dump(doc), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = parse_grid(args.lam, args.p)
    models = tuple(
        noise.NoiseModel(kind.strip(), args.shots, args.scale, args.seed)
        for kind in args.noise.split(",")
    )
    config = noise.SweepConfig(
        p=args.p,
        lambda_grid=grid,
        schemes=tuple(s.strip() for s in args.schemes.split(",")),
        noise=models,
        trials=args.trials,
        state_ensemble=args.ensemble,
        seed=args.seed,
    )
    result = noise.run_sweep(config)
    _emit(result.to_csv() if args.format == "csv" else result.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_qubit(args) -> int:
    lam = float(args.lam)
    make_params(2, lam)
    if args.state:
        rho = _load_json_file(tomography.load_state, args.state)
        if rho.p != 2:
            raise DataMismatch(f"qubit protocol needs a 2-dimensional state, got p={rho.p}")
        rho = rho.rho
    else:
        rho = tomography.random_density_matrix(2, np.random.default_rng(args.seed))
    qf = qubit.qubit_family(lam)
    run = qubit.run_protocol(rho, lam, qf)
    geometry = []
    for s in (1, 2):
        for k in (0, 1):
            proj, post = qubit.bloch_geometry(k, s, qf)
            geometry.append({
                "s": s,
                "k": k,
                "axis": qubit._AXIS_FOR_BASIS[s],
                "observable_bloch": qubit.bloch_vector(proj).tolist(),
                "postselection_bloch": qubit.bloch_vector(post).tolist(),
            })
    doc = {
        "lambda": lam,
        "alpha": qf.alpha,
        "mu": qf.mu,
        "rho_in": tomography.matrix_to_json(rho),
        "rho_est": tomography.matrix_to_json(run.rho_est),
        "frob_err": tomography.frobenius_error(run.rho_est, rho),
        "con2_residual": abs(run.con2_residual),
        "p0": list(run.p0),
        "weak_values": {
            f"W_{k}^{s}": _cplx(w) for s, ws in ((1, run.w1), (2, run.w2)) for k, w in enumerate(ws)
        },
        "geometry": geometry,
    }
    _emit(_dump(doc), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weaktomo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", default="-", help="output file, '-' for stdout (default)")
        return sp

    sp = add("gen", cmd_gen, "build and validate a basis family")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)

    sp = add("validate", cmd_validate, "re-check a basis family file")
    sp.add_argument("--family", required=True)

    sp = add("state", cmd_state, "write a seeded random density matrix")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--kind", choices=noise.ENSEMBLES, default="ginibre")
    sp.add_argument("--seed", type=int, default=0)

    for name, func, help_ in (
        ("weak", cmd_weak, "weak value table of a state"),
        ("reconstruct", cmd_reconstruct, "round-trip a state through its weak values"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("--state", required=True)
        sp.add_argument("--family", required=True)

    sp = add("sweep", cmd_sweep, "lambda sweep comparing reconstruction schemes")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", required=True, help="start:stop:count or a comma list")
    sp.add_argument("--schemes", default="weak_biortho,baseline_projective")
    sp.add_argument("--noise", default="weak_gaussian_postselect", help="comma list of noise kinds")
    sp.add_argument("--shots", type=int, default=10_000)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--ensemble", choices=noise.ENSEMBLES, default="ginibre")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = add("qubit", cmd_qubit, "two-observable qubit protocol")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--state", help="2x2 state file (Bloch frame); default a seeded random state")
    sp.add_argument("--seed", type=int, default=0)
    return ap


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, DataMismatch):
        return EXIT_MISMATCH
    if isinstance(exc, InvalidInput):
        return EXIT_INPUT
    if isinstance(exc, NumericalFailure):
        return EXIT_NUMERIC
    if isinstance(exc, OSError):
        return EXIT_INPUT
    return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WeakTomoError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"weaktomo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
