"""Command line interface.

Verbs: ``train``, ``convert``, ``eval``, ``analyze`` (``sweep-t``,
``validate-bound``, ``smooth``, ``hessian-check``) and ``report``.  Every
command writes its resolved configuration next to its outputs; outputs are
CSV files (plus model documents), and ``report`` renders figures from
whatever CSVs a run directory holds.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import os

import click
import numpy as np

from .analysis import (
    bound_check,
    conversion_metrics,
    fft_smooth,
    hessian_fd_check,
    sweep_T,
)
from .calibration import CalibrationConfig
from .config import (
    load_config_file,
    read_csv,
    write_csv,
    write_resolved_config,
)
from .modelio import load_model, load_snn, save_model, save_snn
from .network import NetworkSpec
from .optim import OptimizerConfig
from .pipeline import (
    DEFAULT_EVAL_GRID,
    calibration_inputs,
    convert_and_calibrate,
    evaluation_axes,
    model_field,
    snn_field,
    snn_rate_report,
)
from .presets import preset_for
from .problems import PROBLEM_IDS, get_problem
from .sampling import CollocationCounts, sample_collocation
from .snn import SpikingSeparable
from .training import TrainingDivergedError, train

PROBLEM_ALIASES = {"sin": "sin_regression", "diffusion": "diffusion_reaction"}


def _friendly_errors(fn):
    """Surface library failures as clean CLI errors (exit code 1)."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (ValueError, KeyError, RuntimeError, OSError) as exc:
            raise click.ClickException(str(exc))

    return wrapper


def _problem_id(name: str) -> str:
    pid = PROBLEM_ALIASES.get(name, name)
    if pid not in PROBLEM_IDS:
        raise click.UsageError(
            f"unknown problem {name!r}; choose from {', '.join(PROBLEM_IDS)}"
        )
    return pid


def _parse_layers(text: str) -> tuple[int, int]:
    try:
        depth, width = text.lower().split("x")
        depth, width = int(depth), int(width)
    except ValueError:
        raise click.UsageError(f"--layers expects DEPTHxWIDTH (e.g. 3x100), got {text!r}")
    if depth < 1 or width < 1:
        raise click.UsageError("--layers needs positive depth and width")
    return depth, width


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.UsageError(f"expected a comma-separated integer list, got {text!r}")


def _resolver(ctx: click.Context, config_path: str | None):
    """Merge precedence: defaults < config file < explicitly passed flags."""
    file_values = load_config_file(config_path) if config_path else {}
    known = set(ctx.params)
    for key in file_values:
        if key not in known:
            raise click.UsageError(f"unknown config key {key!r} in {config_path}")

    def pick(name: str, fallback=None):
        src = ctx.get_parameter_source(name)
        if src is not None and src.name == "COMMANDLINE":
            return ctx.params[name]
        if name in file_values:
            return file_values[name]
        value = ctx.params[name]
        return fallback if value is None else value

    return pick


def _build_problem(pid: str, nu: float | None):
    if pid == "burgers" and nu is not None:
        return get_problem(pid, nu=nu)
    return get_problem(pid)


def _rebuild_from_meta(meta: dict):
    """Problem and collocation set recorded in a model's metadata."""
    pid = meta.get("problem")
    if pid is None:
        raise click.ClickException("model metadata lacks a problem id")
    problem = _build_problem(pid, meta.get("nu"))
    counts_meta = meta.get("counts") or {}
    counts = CollocationCounts(
        interior=int(counts_meta.get("interior", 10_000)),
        boundary=int(counts_meta.get("boundary", 400)),
        initial=int(counts_meta.get("initial", 400)),
        per_axis=int(counts_meta.get("per_axis", 64)),
    )
    return problem, counts, int(meta.get("seed", 0))


def _run_dir(out: str, name: str) -> str:
    path = os.path.join(out, name)
    os.makedirs(os.path.join(path, "csv"), exist_ok=True)
    return path


def _write_field_csv(path, problem, axes, field) -> str:
    grids = np.meshgrid(*axes, indexing="ij")
    coords = [g.ravel() for g in grids]
    values = field.reshape(-1, field.shape[-1])
    header = list(problem.axis_names) + list(problem.field_names)
    rows = (
        tuple(c[i] for c in coords) + tuple(values[i])
        for i in range(values.shape[0])
    )
    return write_csv(path, header, rows)


@click.group()
def main() -> None:
    """Train physics-informed networks, convert them to spiking networks,
    and analyze the conversion error."""


# -- train ---------------------------------------------------------------


@main.command("train")
@click.option("--problem", required=True, help="Problem id (sin, poisson, ...).")
@click.option("--layers", default=None, help="Hidden stack as DEPTHxWIDTH, e.g. 3x100.")
@click.option("--spinn", is_flag=True, default=False, help="Train the separable variant.")
@click.option("--rank", type=int, default=None, help="Separable rank (default 32).")
@click.option("--activation", default=None, type=click.Choice(["tanh", "relu", "sin"]))
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--lr", type=float, default=None)
@click.option("--interior", type=int, default=None, help="Interior collocation count.")
@click.option("--boundary", type=int, default=None)
@click.option("--initial", type=int, default=None)
@click.option("--per-axis", "per_axis", type=int, default=None)
@click.option("--nu", type=float, default=None, help="Viscosity override (burgers).")
@click.option("--target-loss", "target_loss", type=float, default=None)
@click.option("--out", default="runs", show_default=True)
@click.option("--name", default=None, help="Run directory name (default: problem id).")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.pass_context
@_friendly_errors
def cmd_train(ctx, **kwargs):
    """Train a network and write model + per-epoch loss CSV."""
    pick = _resolver(ctx, kwargs["config_path"])
    pid = _problem_id(pick("problem"))
    spinn = bool(pick("spinn", False))
    preset = preset_for(pid, separable=spinn)

    nu = pick("nu")
    problem = _build_problem(pid, nu)
    layers = pick("layers")
    rank = int(pick("rank", preset.spec.rank if spinn else 32))
    activation = pick("activation", preset.spec.activation)
    if layers is None:
        spec = preset.spec
        if activation != spec.activation:
            spec = NetworkSpec(**{**spec.to_dict(), "activation": activation})
    else:
        depth, width = _parse_layers(layers)
        if spinn:
            spec = NetworkSpec(
                kind="separable",
                layer_widths=(1, *([width] * depth), rank * problem.n_out),
                activation=activation,
                axes=problem.input_dim,
                rank=rank,
                n_out=problem.n_out,
            )
        else:
            spec = NetworkSpec(
                kind="mlp",
                layer_widths=(problem.input_dim, *([width] * depth), problem.n_out),
                activation=activation,
            )

    counts = CollocationCounts(
        interior=int(pick("interior", preset.counts.interior)),
        boundary=int(pick("boundary", preset.counts.boundary)),
        initial=int(pick("initial", preset.counts.initial)),
        per_axis=int(pick("per_axis", preset.counts.per_axis)),
    )
    opt = preset.optimizer
    lr = pick("lr", opt.lr)
    optimizer = OptimizerConfig(
        lr=float(lr), decay_every=opt.decay_every, decay_factor=opt.decay_factor
    )
    epochs = int(pick("epochs", preset.epochs))
    seed = int(pick("seed", 0))
    target_loss = pick("target_loss", preset.target_loss)
    name = pick("name", pid + ("_spinn" if spinn else ""))
    run_dir = _run_dir(pick("out", "runs"), name)

    resolved = {
        "problem": pid,
        "spinn": spinn,
        "layer_widths": list(spec.layer_widths),
        "activation": spec.activation,
        "rank": spec.rank,
        "epochs": epochs,
        "seed": seed,
        "lr": float(lr),
        "interior": counts.interior,
        "boundary": counts.boundary,
        "initial": counts.initial,
        "per_axis": counts.per_axis,
        "nu": getattr(problem, "nu", None),
        "target_loss": target_loss,
        "out": pick("out", "runs"),
        "name": name,
    }
    write_resolved_config(run_dir, "train", resolved)

    try:
        model, log = train(
            problem,
            spec,
            epochs=epochs,
            seed=seed,
            optimizer=optimizer,
            counts=counts,
            target_loss=target_loss,
        )
    except TrainingDivergedError as exc:
        _write_train_log(run_dir, exc.log)
        raise click.ClickException(str(exc))

    model.meta.update(
        {
            "counts": {
                "interior": counts.interior,
                "boundary": counts.boundary,
                "initial": counts.initial,
                "per_axis": counts.per_axis,
            }
        }
    )
    if problem.id == "burgers":
        model.meta["nu"] = problem.nu
    save_model(model, os.path.join(run_dir, "model.json"))
    _write_train_log(run_dir, log)
    click.echo(
        f"trained {pid}: epochs={len(log.epochs)} final_loss={log.final_loss:.6e} -> {run_dir}"
    )


def _write_train_log(run_dir: str, log) -> None:
    keys = sorted(log.components)
    header = ["epoch", "total"] + keys
    rows = (
        [log.epochs[i], log.total[i]] + [log.components[k][i] for k in keys]
        for i in range(len(log.epochs))
    )
    write_csv(os.path.join(run_dir, "csv", "train_log.csv"), header, rows)


# -- convert ---------------------------------------------------------------


@main.command("convert")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--timesteps", "-T", "timesteps", type=int, default=32, show_default=True)
@click.option(
    "--mode",
    default="advanced",
    show_default=True,
    type=click.Choice(["none", "light", "advanced"]),
)
@click.option(
    "--readout",
    default="membrane",
    show_default=True,
    type=click.Choice(["membrane", "quantized"]),
)
@click.option("--steps", type=int, default=1500, show_default=True, help="Calibration steps.")
@click.option("--cal-lr", "cal_lr", type=float, default=2e-3, show_default=True)
@click.option("--out", default=None, help="Run directory (default: model's directory).")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.pass_context
@_friendly_errors
def cmd_convert(ctx, **kwargs):
    """Convert a trained model to spiking form and write the report CSV."""
    pick = _resolver(ctx, kwargs["config_path"])
    model_path = pick("model_path")
    model = load_model(model_path)
    problem, counts, seed = _rebuild_from_meta(model.meta)
    timesteps = int(pick("timesteps", 32))
    mode = pick("mode", "advanced")
    readout = {"membrane": "membrane_average", "quantized": "quantized"}[
        pick("readout", "membrane")
    ]
    cfg = CalibrationConfig(mode=mode, steps=int(pick("steps", 1500)), lr=float(pick("cal_lr", 2e-3)))
    run_dir = pick("out", os.path.dirname(os.path.abspath(model_path)))
    os.makedirs(os.path.join(run_dir, "csv"), exist_ok=True)
    write_resolved_config(
        run_dir,
        f"convert_{mode}",
        {
            "model": os.path.basename(model_path),
            "timesteps": timesteps,
            "mode": mode,
            "readout": readout,
            "steps": cfg.steps,
            "cal_lr": cfg.lr,
        },
    )

    colloc = sample_collocation(
        problem, counts, seed=seed, separable=(model.spec.kind == "separable")
    )
    data = calibration_inputs(model, colloc)
    snn, report = convert_and_calibrate(
        model, data, timesteps, mode=mode, readout=readout, cfg=cfg
    )
    snn.meta = {
        "problem": problem.id,
        "timesteps": timesteps,
        "mode": mode,
        "readout": readout,
        "seed": seed,
        "source_model": os.path.basename(model_path),
        "counts": model.meta.get("counts", {}),
    }
    if problem.id == "burgers":
        snn.meta["nu"] = problem.nu
    snn_path = os.path.join(run_dir, f"snn_{mode}.json")
    save_snn(snn, snn_path)
    write_csv(
        os.path.join(run_dir, "csv", f"calibration_{mode}.csv"),
        ["layer", "pre_ec_norm", "post_ec_norm", "mode"],
        (
            (layer, pre, post, report.mode)
            for layer, pre, post in zip(report.layers, report.pre_ec_norm, report.post_ec_norm)
        ),
    )
    click.echo(f"converted -> {snn_path} (mode={mode}, T={timesteps})")


# -- eval -------------------------------------------------------------------


@main.command("eval")
@click.option("--model", "model_path", default=None, type=click.Path(exists=True))
@click.option("--snn", "snn_path", default=None, type=click.Path(exists=True))
@click.option("--mode", default="rate", show_default=True, type=click.Choice(["rate", "event"]))
@click.option(
    "--feed",
    default="layerwise",
    show_default=True,
    type=click.Choice(["layerwise", "streaming"]),
    help="Event-mode input feed for deeper layers.",
)
@click.option("--grid", default=None, help="Grid sizes, e.g. 64x64.")
@click.option("--tag", default=None, help="Output tag (default ann/snn_<mode>).")
@click.option("--out", default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.pass_context
@_friendly_errors
def cmd_eval(ctx, **kwargs):
    """Evaluate a model or spiking net on the problem grid; write fields + metrics."""
    pick = _resolver(ctx, kwargs["config_path"])
    model_path, snn_path = pick("model_path"), pick("snn_path")
    if (model_path is None) == (snn_path is None):
        raise click.UsageError("pass exactly one of --model / --snn")

    grid = pick("grid")
    sizes = tuple(_parse_int_list(grid.replace("x", ","))) if grid else None

    if model_path:
        subject = load_model(model_path)
        meta = subject.meta
        default_tag = "ann"
        base_dir = os.path.dirname(os.path.abspath(model_path))
    else:
        subject = load_snn(snn_path)
        meta = subject.meta
        default_tag = f"snn_{meta.get('mode', 'none')}"
        base_dir = os.path.dirname(os.path.abspath(snn_path))
    problem, _, _ = _rebuild_from_meta(meta)
    tag = pick("tag", default_tag)
    run_dir = pick("out", base_dir)
    os.makedirs(os.path.join(run_dir, "csv"), exist_ok=True)
    mode = pick("mode", "rate")
    feed = pick("feed", "layerwise")
    write_resolved_config(
        run_dir,
        f"eval_{tag}",
        {
            "subject": os.path.basename(model_path or snn_path),
            "mode": mode,
            "feed": feed,
            "grid": list(sizes) if sizes else list(DEFAULT_EVAL_GRID[problem.id]),
            "tag": tag,
        },
    )

    axes = evaluation_axes(problem, sizes)
    reference = problem.reference(axes)
    if model_path:
        field = model_field(subject, axes)
    else:
        field = snn_field(subject, axes, mode=mode, feed=feed)

    _write_field_csv(os.path.join(run_dir, "csv", f"field_{tag}.csv"), problem, axes, field)
    _write_field_csv(
        os.path.join(run_dir, "csv", "field_reference.csv"), problem, axes, reference
    )

    rows = []
    l2, rel = conversion_metrics(field, reference)
    rows.append(("vs_reference", l2, rel))
    if snn_path:
        source = meta.get("source_model")
        candidate = os.path.join(os.path.dirname(os.path.abspath(snn_path)), source or "")
        if source and os.path.exists(candidate):
            ann = load_model(candidate)
            ann_field = model_field(ann, axes)
            l2a, rela = conversion_metrics(field, ann_field)
            rows.append(("vs_ann", l2a, rela))
        data = _rate_inputs(subject, problem, meta)
        rates = snn_rate_report(subject, data)
        write_csv(
            os.path.join(run_dir, "csv", f"spike_rates_{tag}.csv"),
            ["layer", "rate"],
            [(i, r) for i, r in enumerate(rates.per_layer)] + [("overall", rates.overall)],
        )
    write_csv(
        os.path.join(run_dir, "csv", f"metrics_{tag}.csv"),
        ["name", "l2", "rel_l2"],
        rows,
    )
    for name, l2v, relv in rows:
        click.echo(f"{tag} {name}: l2={l2v:.6e} rel_l2={relv:.6e}")


def _rate_inputs(snn, problem, meta):
    counts_meta = meta.get("counts") or {}
    counts = CollocationCounts(
        interior=int(counts_meta.get("interior", 4096)),
        boundary=int(counts_meta.get("boundary", 256)),
        initial=int(counts_meta.get("initial", 256)),
        per_axis=int(counts_meta.get("per_axis", 64)),
    )
    colloc = sample_collocation(
        problem, counts, seed=int(meta.get("seed", 0)), separable=isinstance(snn, SpikingSeparable)
    )
    if isinstance(snn, SpikingSeparable):
        return colloc.axis_points
    return colloc.all_points()


# -- analyze ------------------------------------------------------------------


@main.group("analyze")
def cmd_analyze() -> None:
    """Sweeps, bound validation, smoothing and curvature checks."""


@cmd_analyze.command("sweep-t")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--t", "t_text", default="4,8,16,32,64,128", show_default=True)
@click.option(
    "--mode",
    default="advanced",
    show_default=True,
    type=click.Choice(["none", "light", "advanced"]),
)
@click.option("--steps", type=int, default=800, show_default=True)
@click.option("--cal-lr", "cal_lr", type=float, default=2e-3, show_default=True)
@click.option("--out", default=None)
@_friendly_errors
def cmd_sweep(model_path, t_text, mode, steps, cal_lr, out):
    """Error against the source network across timestep counts."""
    model = load_model(model_path)
    if model.spec.kind != "mlp":
        raise click.ClickException("sweep-t operates on dense models")
    problem, counts, seed = _rebuild_from_meta(model.meta)
    t_list = _parse_int_list(t_text)
    colloc = sample_collocation(problem, counts, seed=seed)
    data = colloc.all_points()
    axes = evaluation_axes(problem)
    grids = np.meshgrid(*axes, indexing="ij")
    eval_inputs = np.stack([g.ravel() for g in grids], axis=-1)
    result = sweep_T(
        model,
        data,
        eval_inputs,
        t_list,
        mode=mode,
        cal_cfg=CalibrationConfig(steps=steps, lr=cal_lr),
    )
    run_dir = out or os.path.dirname(os.path.abspath(model_path))
    os.makedirs(os.path.join(run_dir, "csv"), exist_ok=True)
    write_resolved_config(
        run_dir, "sweep_t", {"model": os.path.basename(model_path), "t": t_list, "mode": mode}
    )
    write_csv(
        os.path.join(run_dir, "csv", "sweep.csv"),
        ["T", "error", "slope", "degenerate"],
        ((t, e, result.slope, result.degenerate) for t, e in zip(result.timesteps, result.errors)),
    )
    click.echo(
        f"sweep: errors={['%.3e' % e for e in result.errors]} slope={result.slope:.3f}"
        + (" (degenerate)" if result.degenerate else "")
    )


@cmd_analyze.command("validate-bound")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--snn", "snn_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None)
@_friendly_errors
def cmd_bound(model_path, snn_path, out):
    """Per-sample output-error bound check against the weighted local errors."""
    model = load_model(model_path)
    snn = load_snn(snn_path)
    if model.spec.kind != "mlp":
        raise click.ClickException("validate-bound operates on dense models")
    problem, counts, seed = _rebuild_from_meta(model.meta)
    colloc = sample_collocation(problem, counts, seed=seed)
    report = bound_check(model, snn, colloc.all_points())
    run_dir = out or os.path.dirname(os.path.abspath(model_path))
    os.makedirs(os.path.join(run_dir, "csv"), exist_ok=True)
    write_resolved_config(
        run_dir,
        "validate_bound",
        {"model": os.path.basename(model_path), "snn": os.path.basename(snn_path)},
    )
    write_csv(
        os.path.join(run_dir, "csv", "bound.csv"),
        ["sample", "lhs", "rhs", "rhs_total_error", "satisfied"],
        (
            (i, report.lhs[i], report.rhs[i], report.rhs_total_error[i], bool(report.satisfied[i]))
            for i in range(len(report.lhs))
        ),
    )
    click.echo(f"bound satisfied on {report.fraction_satisfied:.1%} of samples")


@cmd_analyze.command("smooth")
@click.option("--field", "field_path", required=True, type=click.Path(exists=True))
@click.option("--cutoff", type=float, default=0.25, show_default=True)
@click.option("--out", default=None)
@_friendly_errors
def cmd_smooth(field_path, cutoff, out):
    """Low-pass a field CSV and report error metrics before/after."""
    header, rows = read_csv(field_path)
    data = np.array([[float(v) for v in row] for row in rows])
    # axis columns precede field columns; recover the grid
    n_axes = 0
    axes = []
    for col in range(data.shape[1]):
        uniq = np.unique(data[:, col])
        if np.prod([len(a) for a in axes] + [len(uniq)]) <= data.shape[0]:
            axes.append(uniq)
            n_axes += 1
            if np.prod([len(a) for a in axes]) == data.shape[0]:
                break
        else:
            break
    shape = tuple(len(a) for a in axes)
    if int(np.prod(shape)) != data.shape[0]:
        raise click.ClickException(f"{field_path} is not a full tensor grid")
    n_fields = data.shape[1] - n_axes
    field = data[:, n_axes:].reshape(shape + (n_fields,))
    smoothed = np.stack(
        [fft_smooth(field[..., i], cutoff, axes_coords=tuple(axes)) for i in range(n_fields)],
        axis=-1,
    )
    run_dir = out or os.path.dirname(os.path.dirname(os.path.abspath(field_path)))
    os.makedirs(os.path.join(run_dir, "csv"), exist_ok=True)
    stem = os.path.splitext(os.path.basename(field_path))[0]
    out_path = os.path.join(run_dir, "csv", f"{stem}_smoothed.csv")
    grids = np.meshgrid(*axes, indexing="ij")
    coords = [g.ravel() for g in grids]
    values = smoothed.reshape(-1, n_fields)
    write_csv(
        out_path,
        header,
        (
            tuple(c[i] for c in coords) + tuple(values[i])
            for i in range(values.shape[0])
        ),
    )
    # error metrics against the reference field, when present next door
    ref_path = os.path.join(os.path.dirname(os.path.abspath(field_path)), "field_reference.csv")
    metric_rows = []
    if os.path.exists(ref_path):
        _, ref_rows = read_csv(ref_path)
        ref = np.array([[float(v) for v in row] for row in ref_rows])[:, n_axes:]
        ref = ref.reshape(shape + (n_fields,))
        l2_raw, rel_raw = conversion_metrics(field, ref)
        l2_sm, rel_sm = conversion_metrics(smoothed, ref)
        metric_rows = [("raw_vs_reference", l2_raw, rel_raw), ("smoothed_vs_reference", l2_sm, rel_sm)]
        write_csv(
            os.path.join(run_dir, "csv", f"{stem}_smooth_metrics.csv"),
            ["name", "l2", "rel_l2"],
            metric_rows,
        )
    write_resolved_config(
        run_dir, "smooth", {"field": os.path.basename(field_path), "cutoff": cutoff}
    )
    click.echo(f"smoothed -> {out_path}")
    for name, l2v, relv in metric_rows:
        click.echo(f"{name}: l2={l2v:.6e} rel_l2={relv:.6e}")


@cmd_analyze.command("hessian-check")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None)
@_friendly_errors
def cmd_hessian(model_path, out):
    """Curvature recursion versus finite differences, layer by layer."""
    model = load_model(model_path)
    if model.spec.kind != "mlp":
        raise click.ClickException("hessian-check operates on dense models")
    problem, counts, seed = _rebuild_from_meta(model.meta)
    colloc = sample_collocation(problem, counts, seed=seed)
    sample = colloc.interior[0]
    if problem.is_regression:
        target = problem.target(sample.reshape(1, -1)).ravel()
    else:
        target = problem.reference(tuple(np.array([c]) for c in sample)).ravel()
    try:
        rows = hessian_fd_check(model.spec, model.params, sample, target)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    run_dir = out or os.path.dirname(os.path.abspath(model_path))
    os.makedirs(os.path.join(run_dir, "csv"), exist_ok=True)
    write_resolved_config(run_dir, "hessian_check", {"model": os.path.basename(model_path)})
    write_csv(
        os.path.join(run_dir, "csv", "hessian.csv"),
        ["layer_input", "fd_rel_error", "symmetry_residual"],
        rows,
    )
    worst = max(r[1] for r in rows)
    click.echo(f"hessian recursion: worst relative error {worst:.3e} across {len(rows)} levels")


# -- report --------------------------------------------------------------------


@main.command("report")
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True))
@_friendly_errors
def cmd_report(run_dir):
    """Render figures for every known CSV in a run directory."""
    from . import report as report_mod

    written = report_mod.render_run(run_dir)
    if not written:
        raise click.ClickException(f"{run_dir}: no renderable CSV outputs found")
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
