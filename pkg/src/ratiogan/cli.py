"""Command-line entry point.

Subcommands: ``losses`` (catalogue table), ``verify`` (certification
sweep), ``solve-grid`` (ideal min-max on a discrete support), ``train``
(adversarial run with metrics, checkpoints, samples, and SVG plots),
``report`` (re-render plots from an existing metrics file).

Exit codes: 0 success, 1 check or run failure, 2 usage error.  Output
files are staged with an ``.incomplete`` suffix and renamed only when
the command finishes, so a failed run never leaves files that look
complete.  The output root comes from ``--out`` or the RATIOGAN_OUT
environment variable (default ``./out``).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from pathlib import Path

import numpy as np

from .catalogue import catalogue_lookup, catalogue_names, iter_catalogue
from .config import (
    apply_overrides,
    density_from_section,
    parse_config_text,
    train_config_from_text,
    train_config_to_text,
)
from .densities import gaussian, sample
from .grid_solver import discretize, feasible_from, minmax_value, solve_minmax_grid, trace_to_text, field_to_text
from .nets import forward, net_to_json
from .svgplot import emit_svg_lineplot
from .training import TrainConfig, metrics_from_text, metrics_to_text, train
from .verify import (
    check_corollary_value,
    check_derivatives,
    check_theorem1,
    reports_to_text,
    write_reports,
)

ENV_OUT = "RATIOGAN_OUT"


class OutputStager:
    """Write files under temporary names; commit renames them in place."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._staged = []

    def stage(self, relpath: str) -> Path:
        final = self.root / relpath
        final.parent.mkdir(parents=True, exist_ok=True)
        tmp = final.with_name(final.name + ".incomplete")
        self._staged.append((tmp, final))
        return tmp

    def commit(self):
        for tmp, final in self._staged:
            if tmp.exists():
                os.replace(tmp, final)
        self._staged = []


def _output_root(args) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(os.environ.get(ENV_OUT, "out"))


# ---------------------------------------------------------------------------
# losses


def cmd_losses(args) -> int:
    rows = []
    for entry in iter_catalogue():
        loss = entry.loss
        rows.append(
            {
                "name": loss.name,
                "subclass": entry.subclass,
                "phi": entry.table_row.split(",")[0].replace("phi = ", ""),
                "row": entry.table_row,
                "range": loss.range.label,
                "omega": loss.omega.description,
                "invertible": "yes" if loss.ratio_invertible else "no",
                "note": entry.derivation_note,
            }
        )
    if args.filter:
        key, _, value = args.filter.partition("=")
        key = key.strip().lower()
        value = value.strip().lower()
        if key == "subclass":
            rows = [r for r in rows if r["subclass"].lower() == value]
        elif key == "invertible":
            want = value in ("true", "yes", "1")
            rows = [r for r in rows if (r["invertible"] == "yes") == want]
        elif key == "range":
            rows = [r for r in rows if r["range"].lower() == value]
        else:
            print(f"unknown filter key {key!r}; use subclass=, invertible=, range=", file=sys.stderr)
            return 2
    name_w = max(len(r["name"]) for r in rows) if rows else 4
    print(f"{'name':<{name_w}}  sub  {'J':<7} {'omega':<22} inv  forms")
    for r in rows:
        print(
            f"{r['name']:<{name_w}}  {r['subclass']:<3}  {r['range']:<7} "
            f"{r['omega']:<22} {r['invertible']:<4} {r['row']}"
        )
        if args.notes:
            print(f"{'':{name_w}}  note: {r['note']}")
    return 0


# ---------------------------------------------------------------------------
# verify


def _select_losses(selector: str):
    if selector == "all":
        return [entry.loss for entry in iter_catalogue()]
    names = [s.strip() for s in selector.split(",") if s.strip()]
    return [catalogue_lookup(n).loss for n in names]


def cmd_verify(args) -> int:
    try:
        losses = _select_losses(args.loss)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return 2
    reports = []
    for loss in losses:
        reports.append(
            check_theorem1(
                loss,
                tol=args.argmax_tol,
                minimizer_tol=args.minimizer_tol,
                value_tol=args.value_tol,
                deriv_tol=args.deriv_tol,
            )
        )
        reports.append(check_corollary_value(loss, tol=args.value_tol))
        if loss.phi is not None and loss.psi is not None:
            reports.append(check_derivatives(loss, tol=args.deriv_tol))
    stager = OutputStager(_output_root(args))
    write_reports(reports, stager.stage("verify_report.txt"), stager.stage("verify_report.jsonl"))
    stager.commit()
    print(reports_to_text(reports), end="")
    failed = [r for r in reports if not r.passed]
    print(f"checked {len(losses)} losses; {'FAIL' if failed else 'all checks passed or skipped'}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# solve-grid


def cmd_solve_grid(args) -> int:
    try:
        entry = catalogue_lookup(args.loss)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return 2
    loss = entry.loss
    if not loss.ratio_invertible:
        print(f"ideal solver requires invertible omega; {loss.name} has none", file=sys.stderr)
        return 2

    if args.config:
        parser = parse_config_text(Path(args.config).read_text())
        density = density_from_section(parser["density.target"])
    else:
        density = gaussian([0.0], [[1.0]])
    if isinstance(density, str):
        print("solve-grid needs an analytic density, not a sample file", file=sys.stderr)
        return 2

    if args.uniform:
        from .grid_solver import DiscreteDensity

        f = DiscreteDensity(
            support=np.linspace(args.window[0], args.window[1], args.n_points),
            mass=np.full(args.n_points, 1.0 / args.n_points),
        )
    else:
        window = args.window if density.dim == 1 else ((args.window[0], args.window[1]),) * 2
        f = discretize(density, args.n_points, window)

    rng = np.random.default_rng(args.init_seed)
    if args.init == "ones":
        from .grid_solver import RatioField

        r0 = RatioField(np.ones(len(f)))
    else:
        r0 = feasible_from(np.abs(rng.standard_normal(len(f))), f)

    r_star, trace = solve_minmax_grid(
        loss, f, r0, max_iters=args.max_iters, tol=args.tol, log_every=args.log_every
    )
    linf = float(np.abs(r_star.values - 1.0).max())
    objective = minmax_value(loss, r_star, f)

    stager = OutputStager(_output_root(args))
    stager.stage("solve_trace.tsv").write_text(trace_to_text(trace))
    stager.stage("solve_field.tsv").write_text(field_to_text(f, r_star))
    stager.commit()
    print(f"loss={loss.name} n={len(f)} iterations={trace.iterations[-1]}")
    print(f"linf(r - 1) = {linf:.3e}")
    print(f"objective   = {objective!r}")
    return 0


# ---------------------------------------------------------------------------
# train


SHIFT1D_PRESET = """
[loss]
name = {loss}

[train]
seed = 20260811

[density.target]
kind = gaussian
mean = 4.0
cov = 1.0

[density.origin]
kind = gaussian
mean = 0.0
cov = 1.0
"""

RING2D_PRESET = """
[loss]
name = {loss}

[train]
seed = 20260811
total_generator_iters = 30000

[density.target]
kind = ring
modes = 8
radius = 2.0
sigma = 0.02

[density.origin]
kind = gaussian
mean = 0.0 0.0
cov = 1.0 1.0
"""


def _preset_text(preset: str) -> list:
    """Expand a preset into (run_name, config_text) pairs."""
    if preset.startswith("shift1d-"):
        loss = _canonical_loss_name(preset[len("shift1d-"):])
        return [(preset, SHIFT1D_PRESET.format(loss=loss))]
    if preset.startswith("ring2d-"):
        loss = _canonical_loss_name(preset[len("ring2d-"):])
        return [(preset, RING2D_PRESET.format(loss=loss))]
    if preset == "lambda-sweep":
        base = SHIFT1D_PRESET.format(loss="MSE")
        runs = []
        for lam in (0.01, 0.1, 1.0, 10.0):
            text = apply_overrides(base, [f"train.lambda={lam!r}"])
            runs.append((f"lambda-sweep/lam{lam:g}", text))
        return runs
    raise KeyError(
        f"unknown preset {preset!r}; presets: shift1d-<loss>, ring2d-<loss>, lambda-sweep"
    )


def _canonical_loss_name(name: str) -> str:
    return catalogue_lookup(name).loss.name


def _plot_metrics(records, outdir_stager, prefix="plots/"):
    iters = [r.generator_iteration for r in records]
    if any(r.lr_real_mean is not None for r in records):
        emit_svg_lineplot(
            [
                ("lr_real_mean", iters, [r.lr_real_mean for r in records]),
                ("lr_gen_mean", iters, [r.lr_gen_mean for r in records]),
            ],
            outdir_stager.stage(prefix + "likelihood_ratio.svg"),
            title="discriminator-implied likelihood ratio",
            x_label="generator iteration",
            y_label="ratio",
            reference_y=1.0,
        )
    emit_svg_lineplot(
        [
            ("disc_objective", iters, [r.disc_objective for r in records]),
            ("gen_objective", iters, [r.gen_objective for r in records]),
        ],
        outdir_stager.stage(prefix + "objectives.svg"),
        title="objectives",
        x_label="generator iteration",
        y_label="value",
    )
    emit_svg_lineplot(
        [
            ("mmd", iters, [r.mmd for r in records]),
            ("swd", iters, [r.swd for r in records]),
        ],
        outdir_stager.stage(prefix + "distances.svg"),
        title="two-sample distances to target",
        x_label="generator iteration",
        y_label="distance",
    )
    emit_svg_lineplot(
        [("penalty", iters, [r.penalty for r in records])],
        outdir_stager.stage(prefix + "penalty.svg"),
        title="gradient penalty",
        x_label="generator iteration",
        y_label="penalty",
    )


def _run_one_training(run_name: str, text: str, root: Path) -> int:
    try:
        config = train_config_from_text(text)
        config.validate()
    except (ValueError, KeyError) as exc:
        print(f"{run_name}: {exc}", file=sys.stderr)
        return 2

    stager = OutputStager(root / run_name)
    stager.stage("config.cfg").write_text(train_config_to_text(config))
    result = train(config)

    stager.stage("metrics.tsv").write_text(metrics_to_text(result.records))
    stager.stage("gen_final.json").write_text(net_to_json(result.generator, result.gen_state))
    stager.stage("disc_final.json").write_text(net_to_json(result.discriminator, result.disc_state))
    for iteration, gen_json, disc_json in result.checkpoints or []:
        stager.stage(f"gen_iter{iteration}.json").write_text(gen_json)
        stager.stage(f"disc_iter{iteration}.json").write_text(disc_json)

    h_spec = config.h_spec
    z = sample(h_spec, config.eval_batch, np.random.SeedSequence(config.seed).generate_state(5)[4])
    y, _ = forward(result.generator, z)
    lines = [",".join(repr(float(v)) for v in row) for row in y]
    stager.stage("samples_final.csv").write_text("\n".join(lines) + "\n")

    if result.records:
        _plot_metrics(result.records, stager)
    stager.commit()

    if result.aborted:
        print(f"{run_name}: aborted ({result.abort_reason}); last-good checkpoint kept")
        return 1
    final = result.records[-1] if result.records else None
    if final is not None and final.lr_real_mean is not None:
        print(
            f"{run_name}: done; final lr_real_mean={final.lr_real_mean:.3f} "
            f"swd={final.swd:.3f} mmd={final.mmd:.4f}"
        )
    elif final is not None:
        print(f"{run_name}: done; final swd={final.swd:.3f} mmd={final.mmd:.4f}")
    else:
        print(f"{run_name}: done")
    return 0


def cmd_train(args) -> int:
    if args.preset:
        try:
            runs = _preset_text(args.preset)
        except KeyError as exc:
            print(exc.args[0], file=sys.stderr)
            return 2
    elif args.config:
        runs = [(Path(args.config).stem, Path(args.config).read_text())]
    else:
        print("train needs --config or --preset", file=sys.stderr)
        return 2

    runs = [(name, apply_overrides(text, args.set or [])) for name, text in runs]

    if args.echo_config:
        for name, text in runs:
            config = train_config_from_text(text)
            Path(args.echo_config).write_text(train_config_to_text(config))
            print(f"effective config for {name} written to {args.echo_config}")
        return 0

    root = _output_root(args)
    if args.jobs > 1 and len(runs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one_training_star, [(n, t, root) for n, t in runs]))
    else:
        codes = [_run_one_training(name, text, root) for name, text in runs]
    return max(codes) if codes else 0


def _run_one_training_star(item):
    return _run_one_training(*item)


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    path = Path(args.metrics)
    if not path.exists():
        print(f"metrics file {path} does not exist", file=sys.stderr)
        return 2
    records = metrics_from_text(path.read_text())
    stager = OutputStager(_output_root(args))
    _plot_metrics(records, stager)
    stager.commit()
    print(f"re-rendered plots for {len(records)} records into {stager.root / 'plots'}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratiogan",
        description="likelihood-ratio GAN losses: catalogue, certification, solving, training",
    )
    parser.add_argument("--out", help=f"output root (default ${ENV_OUT} or ./out)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("losses", help="list the loss catalogue")
    p.add_argument("--filter", help="subclass=A|B|C|D, invertible=true|false, range=R|[0,1]|...")
    p.add_argument("--notes", action="store_true", help="print derivation notes")
    p.set_defaults(fn=cmd_losses)

    p = sub.add_parser("verify", help="numerically certify the optimality identities")
    p.add_argument("--loss", default="all", help="'all' or comma-separated catalogue names")
    p.add_argument("--argmax-tol", type=float, default=1e-4)
    p.add_argument("--minimizer-tol", type=float, default=1e-3)
    p.add_argument("--value-tol", type=float, default=1e-6)
    p.add_argument("--deriv-tol", type=float, default=1e-5)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("solve-grid", help="ideal min-max solve on a discrete support")
    p.add_argument("--loss", required=True)
    p.add_argument("--config", help="config file providing [density.target]")
    p.add_argument("--uniform", action="store_true", help="uniform masses on the window")
    p.add_argument("--n-points", type=int, default=64)
    p.add_argument("--window", type=float, nargs=2, default=(-4.0, 4.0))
    p.add_argument("--init", choices=("random", "ones"), default="random")
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--log-every", type=int, default=1)
    p.set_defaults(fn=cmd_solve_grid)

    p = sub.add_parser("train", help="adversarial training run(s)")
    p.add_argument("--config", help="config file")
    p.add_argument("--preset", help="shift1d-<loss>, ring2d-<loss>, lambda-sweep")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config value")
    p.add_argument("--echo-config", metavar="PATH", help="write the effective config and exit")
    p.add_argument("--jobs", type=int, default=1, help="concurrent runs for sweeps")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("report", help="re-render plots from a metrics file")
    p.add_argument("--metrics", required=True)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
