"""Command-line surface: single-point fits, grid sweeps and verification
suites with CSV/JSON reporting.

Exit codes: 0 all checks passed, 1 an assertion failed, 2 usage error.
Output files are deterministic for a fixed configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, asdict
from typing import Any, Sequence

import numpy as np

from . import bounds as bounds_mod
from . import coupling as coupling_mod
from . import stein as stein_mod
from .core import ChainParams, exact_pmf, moments_closed_form, shift_tv, tv_distance
from .fit import (
    DegenerateFitError,
    Regime,
    classify_regime,
    binomial_pmf,
    fit_binomial,
    fit_negative_binomial,
    nb_pmf,
    poisson_pmf,
)

__all__ = ["SweepConfig", "cmd_fit", "cmd_sweep", "cmd_verify", "run_sweep", "main"]

_CHECK_NAMES = ("bounds", "stein", "coupling", "lemma21", "lemma24")
_VERIFY_SUITES = (
    "bounds",
    "stein-nb",
    "stein-binomial",
    "coupling",
    "mc-exact",
    "lemma21",
    "lemma22",
    "lemma24",
)


@dataclass(frozen=True)
class SweepConfig:
    """Grid sweep configuration; rows are ordered alpha, then beta, then n."""

    alpha_grid: tuple[float, ...]
    beta_grid: tuple[float, ...]
    n_list: tuple[int, ...]
    checks: tuple[str, ...]
    seed: int
    output_path: str
    format: str = "csv"

    def __post_init__(self) -> None:
        if not self.alpha_grid or not self.beta_grid or not self.n_list:
            raise ValueError("grids and n_list must be non-empty")
        for value in (*self.alpha_grid, *self.beta_grid):
            if not 0.0 < value < 1.0:
                raise ValueError(f"grid value {value!r} outside (0, 1)")
        if any(n < 1 for n in self.n_list):
            raise ValueError("n_list values must be >= 1")
        unknown = set(self.checks) - set(_CHECK_NAMES)
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")


def _fitted_reference(params: ChainParams, n: int, regime: Regime):
    """Reference pmf plus fit fields for one grid point; None on degeneracy."""
    fields: dict[str, Any] = {
        "r": None,
        "q": None,
        "poisson_limit": None,
        "m_tilde": None,
        "m": None,
        "theta": None,
        "epsilon": None,
    }
    if regime is Regime.UNDERDISPERSED:
        fit = fit_binomial(params, n)
        fields.update(
            m_tilde=fit.m_tilde, m=fit.m, theta=fit.theta, epsilon=fit.epsilon
        )
        reference = binomial_pmf(fit.m, fit.theta)
        report = bounds_mod.bound_binomial(params, n, fit)
    else:
        fit = fit_negative_binomial(params, n)
        fields.update(poisson_limit=fit.poisson_limit)
        if fit.poisson_limit:
            reference = poisson_pmf(fit.lam)
        else:
            fields.update(r=fit.r, q=fit.q)
            reference = nb_pmf(fit.r, fit.q)
        report = bounds_mod.bound_nb(params, n)
    return fields, reference, report, fit


def evaluate_point(
    params: ChainParams, n: int, *, exact: bool = True
) -> dict[str, Any]:
    """One report record: moments, regime, fit, bound and optional exact TV."""
    moments = moments_closed_form(params, n)
    regime = classify_regime(params, n)
    row: dict[str, Any] = {
        "alpha": params.alpha,
        "beta": params.beta,
        "n": n,
        "status": "ok",
        "regime": regime.value,
        "mean": moments.mean,
        "variance": moments.variance,
        "r": None,
        "q": None,
        "poisson_limit": None,
        "m_tilde": None,
        "m": None,
        "theta": None,
        "epsilon": None,
        "bound": None,
        "bound_clipped": None,
        "tail_mass": None,
        "tv_exact": None,
    }
    try:
        fields, reference, report, _ = _fitted_reference(params, n, regime)
    except DegenerateFitError:
        row["status"] = "degenerate_fit"
        return row
    row.update(fields)
    row["bound"] = report.bound_value
    row["bound_clipped"] = report.clipped_value
    row["tail_mass"] = reference.tail
    if exact:
        row["tv_exact"] = tv_distance(exact_pmf(params, n), reference)
    return row


def _row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed & ((1 << 63) - 1), index]).generate_state(1)[0])


def _random_subset(rng: np.random.Generator, upper: int) -> np.ndarray:
    return np.flatnonzero(rng.random(upper + 1) < 0.5)


def _check_bounds(row: dict[str, Any]) -> str:
    if row["status"] != "ok" or row["tv_exact"] is None:
        return "skipped"
    # 1e-12 absorbs the evaluation noise of the exact TV itself (it matters
    # only where the bound is exactly 0 and the TV is pure rounding).
    ok = row["tv_exact"] <= min(1.0, row["bound"]) + row["tail_mass"] + 1e-12
    return "pass" if ok else "fail"


def _check_stein(params: ChainParams, n: int, seed: int, subsets: int = 20) -> str:
    regime = classify_regime(params, n)
    rng = np.random.default_rng(seed)
    if regime is Regime.UNDERDISPERSED:
        try:
            fit = fit_binomial(params, n)
        except DegenerateFitError:
            return "skipped"
        for _ in range(subsets):
            subset = _random_subset(rng, fit.m + 16)
            solution = stein_mod.solve_binomial_stein(fit.m, fit.theta, subset)
            report = stein_mod.check_binomial_lemma31(solution, fit.m, fit.theta, subset)
            if solution.residual_sup > 1e-9 or not report.ok:
                return "fail"
        return "pass"
    setup = stein_mod.NbSteinSetup.from_chain(params, n)
    top = setup.target.mass.size - 1
    for _ in range(subsets):
        subset = _random_subset(rng, top)
        solution = stein_mod.solve_nb_stein(setup, subset)
        report = stein_mod.check_nb_delta_bound(solution, setup.a)
        if solution.residual_sup > 1e-9 or not report.ok:
            return "fail"
    return "pass"


def _check_coupling(params: ChainParams, seed: int, samples: int = 20_000) -> str:
    runs = coupling_mod.sample_meeting_times(params, samples, seed)
    if runs.absorption_violations:
        return "fail"
    split = abs(params.beta - params.alpha)
    for m in range(1, 5):
        target = split ** (m - 1)
        sigma = math.sqrt(target * (1.0 - target) / samples)
        if abs(runs.varsigma_tail(m) - target) > 5.0 * sigma + 1e-12:
            return "fail"
    return "pass"


def _check_lemma21(params: ChainParams, n: int) -> str:
    consts = bounds_mod.bound_constants(params)
    value = shift_tv(exact_pmf(params, n, start="state0"))
    return "pass" if value <= bounds_mod.gamma_fn(consts, n) else "fail"


def _check_lemma24(params: ChainParams, n: int) -> str:
    for i in sorted({1, (n + 1) // 2, n}):
        if not stein_mod.verify_lemma24(params, n, i).ok:
            return "fail"
    return "pass"


def run_sweep(config: SweepConfig) -> list[dict[str, Any]]:
    """Evaluate the whole grid and write the report file."""
    rows = []
    index = 0
    for alpha in config.alpha_grid:
        for beta in config.beta_grid:
            params = ChainParams(alpha, beta)
            for n in config.n_list:
                row = evaluate_point(params, n, exact=True)
                seed = _row_seed(config.seed, index)
                if "bounds" in config.checks:
                    row["check_bounds"] = _check_bounds(row)
                if "stein" in config.checks:
                    row["check_stein"] = _check_stein(params, n, seed)
                if "coupling" in config.checks:
                    row["check_coupling"] = _check_coupling(params, seed)
                if "lemma21" in config.checks:
                    row["check_lemma21"] = _check_lemma21(params, n)
                if "lemma24" in config.checks:
                    row["check_lemma24"] = _check_lemma24(params, n)
                rows.append(row)
                index += 1
    if config.format == "csv":
        _write_csv(config.output_path, rows)
    else:
        _write_json(config.output_path, config, rows)
    return rows


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: str, rows: Sequence[dict[str, Any]]) -> None:
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[key]) for key in header])


def _write_json(path: str, config: SweepConfig, rows: Sequence[dict[str, Any]]) -> None:
    payload = {
        "schema_version": 1,
        "kind": "markovbin-sweep",
        "config": asdict(config),
        "rows": list(rows),
    }
    with open(path, "w", newline="\n") as handle:
        json.dump(payload, handle, indent=2, allow_nan=False)
        handle.write("\n")


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly in (0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _print_record(record: dict[str, Any], as_json: bool) -> None:
    if as_json:
        print(json.dumps(record, indent=2, allow_nan=False))
    else:
        for key, value in record.items():
            print(f"{key} = {_fmt(value) if value is not None else 'n/a'}")


def cmd_fit(args: argparse.Namespace) -> int:
    params = ChainParams(args.alpha, args.beta)
    record = evaluate_point(params, args.n, exact=args.exact)
    if not args.exact:
        record.pop("tv_exact")
    _print_record(record, args.json)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig(
        alpha_grid=tuple(args.alphas),
        beta_grid=tuple(args.betas),
        n_list=tuple(args.ns),
        checks=tuple(args.checks),
        seed=args.seed,
        output_path=args.output,
        format=args.format,
    )
    try:
        rows = run_sweep(config)
    except OSError as exc:
        print(f"markovbin sweep: cannot write {config.output_path!r}: {exc}", file=sys.stderr)
        return 2
    failures = sum(
        1 for row in rows for key in row if key.startswith("check_") and row[key] == "fail"
    )
    print(f"wrote {len(rows)} rows to {config.output_path} ({failures} check failures)")
    return 0 if failures == 0 else 1


def _require(args: argparse.Namespace, parser: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            parser.error(f"suite {args.suite!r} requires --{name.replace('_', '-')}")


def cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    suite = args.suite
    if suite == "lemma22":
        step = args.step
        values = np.arange(step, 1.0, step)
        violations = 0
        cells = 0
        for alpha in values:
            for beta in values:
                moments_n = [
                    moments_closed_form(ChainParams(float(alpha), float(beta)), n)
                    for n in range(2, args.n_max + 1)
                ]
                for moment in moments_n:
                    cells += 1
                    if moment.variance >= moment.mean and not beta > alpha:
                        violations += 1
        print(f"scanned {cells} cells, {violations} violations")
        print(f"suite lemma22: {'PASS' if violations == 0 else 'FAIL'}")
        return 0 if violations == 0 else 1

    _require(args, parser, "alpha", "beta")
    params = ChainParams(args.alpha, args.beta)

    if suite == "coupling":
        runs = coupling_mod.sample_meeting_times(params, args.samples, args.seed)
        split = abs(params.beta - params.alpha)
        amax = max(params.alpha, params.beta)
        ok = runs.absorption_violations == 0
        for m in range(1, 7):
            target = split ** (m - 1)
            sigma = math.sqrt(target * (1.0 - target) / args.samples)
            gap = abs(runs.varsigma_tail(m) - target)
            ok = ok and gap <= 4.0 * sigma + 1e-12
            print(f"P(varsigma >= {m}): empirical {runs.varsigma_tail(m):.6f} target {target:.6f}")
        for m in range(1, 9):
            cap = amax ** (m - 1)
            sigma = math.sqrt(cap * (1.0 - cap) / args.samples)
            ok = ok and runs.tau_tail(m) <= cap + 4.0 * sigma + 1e-12
        print(f"absorption violations: {runs.absorption_violations}")
        print(f"suite coupling: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    _require(args, parser, "n")
    n = args.n

    if suite == "bounds":
        row = evaluate_point(params, n, exact=True)
        verdict = _check_bounds(row)
        _print_record(row, as_json=False)
        print(f"suite bounds: {'PASS' if verdict != 'fail' else 'FAIL'}")
        return 0 if verdict != "fail" else 1

    if suite == "lemma21":
        consts = bounds_mod.bound_constants(params)
        value = shift_tv(exact_pmf(params, n, start="state0"))
        limit = bounds_mod.gamma_fn(consts, n)
        ok = value <= limit
        print(f"shift TV = {value:.6g}, gamma(n) = {limit:.6g}, slack = {limit - value:.6g}")
        print(f"suite lemma21: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    if suite == "lemma24":
        indices = [args.index] if args.index is not None else range(1, n + 1)
        worst_sup = worst_delta = -math.inf
        ok = True
        for i in indices:
            report = stein_mod.verify_lemma24(params, n, i)
            ok = ok and report.ok
            worst_sup = max(worst_sup, report.tv2 - report.rhs_sup)
            worst_delta = max(worst_delta, report.probe_max - report.rhs_delta)
        print(f"worst sup-side margin: {-worst_sup:.6g}")
        print(f"worst probe-side margin: {-worst_delta:.6g}")
        print(f"suite lemma24: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    if suite == "stein-nb":
        setup = stein_mod.NbSteinSetup.from_chain(params, n)
        rng = np.random.default_rng(args.seed)
        top = setup.target.mass.size - 1
        worst_resid = 0.0
        worst_margin = math.inf
        ok = True
        for _ in range(args.subsets):
            solution = stein_mod.solve_nb_stein(setup, _random_subset(rng, top))
            report = stein_mod.check_nb_delta_bound(solution, setup.a)
            worst_resid = max(worst_resid, solution.residual_sup)
            worst_margin = min(worst_margin, report.margin)
            ok = ok and report.ok and solution.residual_sup <= 1e-9
        print(f"subsets: {args.subsets}, max residual: {worst_resid:.3g}")
        print(f"min slack of sup|dg'| <= 1/a: {worst_margin:.6g}")
        print(f"suite stein-nb: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    if suite == "stein-binomial":
        fit = fit_binomial(params, n)
        rng = np.random.default_rng(args.seed)
        worst_resid = 0.0
        ok = True
        for _ in range(args.subsets):
            subset = _random_subset(rng, fit.m + 16)
            solution = stein_mod.solve_binomial_stein(fit.m, fit.theta, subset)
            report = stein_mod.check_binomial_lemma31(solution, fit.m, fit.theta, subset)
            worst_resid = max(worst_resid, solution.residual_sup)
            ok = ok and report.ok and solution.residual_sup <= 1e-9
        print(f"subsets: {args.subsets}, max residual: {worst_resid:.3g}")
        print(f"suite stein-binomial: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    if suite == "mc-exact":
        sums = coupling_mod.sample_sums(params, n, "stationary", args.samples, args.seed)
        empirical = coupling_mod.empirical_pmf(sums, support_max=n)
        value = tv_distance(empirical, exact_pmf(params, n))
        ok = value <= args.tol
        print(f"TV(empirical, exact) = {value:.6g} with {args.samples} samples (tol {args.tol})")
        print(f"suite mc-exact: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1

    parser.error(f"unknown suite {suite!r}")
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markovbin",
        description="Markov binomial distributions: exact laws, moment-matched "
        "approximations, explicit TV error bounds and verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one parameter point and report the bound")
    fit.add_argument("--alpha", type=_probability, required=True)
    fit.add_argument("--beta", type=_probability, required=True)
    fit.add_argument("--n", type=_positive_int, required=True)
    fit.add_argument("--exact", action="store_true", help="also compute the exact TV (O(n^2))")
    fit.add_argument("--json", action="store_true", help="emit JSON instead of key = value lines")

    sweep = sub.add_parser("sweep", help="evaluate a parameter grid into CSV/JSON")
    sweep.add_argument("--alphas", type=_probability, nargs="+", required=True)
    sweep.add_argument("--betas", type=_probability, nargs="+", required=True)
    sweep.add_argument("--ns", type=_positive_int, nargs="+", required=True)
    sweep.add_argument("--checks", nargs="*", choices=_CHECK_NAMES, default=[])
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--output", required=True)
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")

    verify = sub.add_parser("verify", help="run one verification suite")
    verify.add_argument("suite", choices=_VERIFY_SUITES)
    verify.add_argument("--alpha", type=_probability)
    verify.add_argument("--beta", type=_probability)
    verify.add_argument("--n", type=_positive_int)
    verify.add_argument("--index", type=_positive_int, help="single index for lemma24")
    verify.add_argument("--subsets", type=_positive_int, default=200)
    verify.add_argument("--samples", type=_positive_int, default=1_000_000)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--step", type=_probability, default=0.05, help="grid step for lemma22")
    verify.add_argument("--n-max", type=_positive_int, default=200, help="largest n for lemma22")
    verify.add_argument("--tol", type=float, default=0.005, help="TV tolerance for mc-exact")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fit":
        return cmd_fit(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    return cmd_verify(args, parser)


if __name__ == "__main__":
    sys.exit(main())
