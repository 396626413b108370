"""Command-line surface: colorize / compose / hints / metrics / serve."""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import color, hints as hints_mod, metrics as metrics_mod, pipeline, refinement, segmentation
from .propagation import SolverConfig


def _load_config(config_path: str | None, **overrides) -> pipeline.PipelineConfig:
    doc = {}
    if config_path:
        with open(config_path, "rb") as fh:
            doc = tomllib.load(fh)
    solver_doc = doc.pop("solver", {})
    fields = {f.name for f in dataclasses.fields(pipeline.PipelineConfig)}
    unknown = set(doc) - fields
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    merged = {**doc, **{k: v for k, v in overrides.items() if v is not None}}
    merged["solver"] = SolverConfig(**solver_doc)
    try:
        return pipeline.PipelineConfig(**merged)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _provider_options(fn):
    fn = click.option("--candidates", "candidates_dir", type=click.Path(), default=None,
                      help="Directory of candidate PNGs.")(fn)
    fn = click.option("--endpoint", default=None, help="Generation service URL.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="TOML config file; flags override it.")(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--segments", "segment_map_path", type=click.Path(), default=None,
                      help="External segment map (PNG or RLE JSON).")(fn)
    fn = click.option("--n-segments", type=int, default=None)(fn)
    fn = click.option("--metric", type=click.Choice(["L1", "L2", "cosine"]), default=None)(fn)
    return fn


def _resolve_cfg(config_path, candidates_dir, endpoint, **kw) -> pipeline.PipelineConfig:
    if candidates_dir and endpoint:
        raise click.UsageError("--candidates and --endpoint are mutually exclusive")
    provider = "http" if endpoint else ("dir" if candidates_dir else None)
    return _load_config(config_path, provider=provider,
                        candidates_dir=candidates_dir, endpoint=endpoint, **kw)


def _check_input(path: str) -> None:
    if not Path(path).exists():
        raise click.UsageError(f"[input] file not found: {path}")


@click.group()
def main():
    """Exemplar-composed image colorization."""


@main.command()
@click.argument("input_png", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), required=True)
@_provider_options
def colorize(input_png, out_dir, config_path, candidates_dir, endpoint, **kw):
    """Run the full pipeline and write result.png plus stage artifacts."""
    _check_input(input_png)
    cfg = _resolve_cfg(config_path, candidates_dir, endpoint, **kw)
    try:
        result = pipeline.run_pipeline(input_png, cfg, out_dir)
    except pipeline.PipelineError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    click.echo(f"wrote {Path(out_dir) / 'result.png'} (CF {result.colorfulness:.2f}, "
               f"{result.iterations} solver iterations)")


@main.command()
@click.argument("input_png", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), required=True)
@_provider_options
def compose(input_png, out_dir, config_path, candidates_dir, endpoint, **kw):
    """Stop after reference composition; write reference.png + assignment.json."""
    _check_input(input_png)
    cfg = _resolve_cfg(config_path, candidates_dir, endpoint, **kw)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        gray = color.read_gray(input_png)
        seg = pipeline.segment_input(gray, cfg)
        cands = pipeline.acquire_candidates(gray, cfg)
        assign = refinement.select_assignment(gray, cands, seg, cfg.metric)
        ref = refinement.compose_reference(cands, seg, assign)
    except Exception as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    color.write_rgb(out / "reference.png", color.lab_to_rgb(ref.image))
    refinement.save_assignment(out / "assignment.json", assign)
    segmentation.save_segment_map(out / "segments.json", seg)
    click.echo(f"wrote {out / 'reference.png'}")


@main.command("hints")
@click.argument("input_png", type=click.Path())
@click.option("-o", "--out", "out_dir", type=click.Path(), required=True)
@_provider_options
def hints_cmd(input_png, out_dir, config_path, candidates_dir, endpoint, **kw):
    """Emit the refined hint set as hints.json."""
    _check_input(input_png)
    cfg = _resolve_cfg(config_path, candidates_dir, endpoint, **kw)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        gray = color.read_gray(input_png)
        seg = pipeline.segment_input(gray, cfg)
        cands = pipeline.acquire_candidates(gray, cfg)
        assign = refinement.select_assignment(gray, cands, seg, cfg.metric)
        ref = refinement.compose_reference(cands, seg, assign)
        wr = hints_mod.warp_reference(gray, ref.image, cfg.cell_size, cfg.search_radius)
        coarse = hints_mod.extract_coarse_hints(wr, seg, cfg.s_eps)
        fine = hints_mod.refine_hints(coarse, seg, cfg.hint_cap,
                                      cfg.dbscan_eps, cfg.dbscan_min_pts)
    except Exception as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    hints_mod.save_hints(out / "hints.json", fine)
    click.echo(f"wrote {out / 'hints.json'} ({len(fine)} hints)")


@main.command("metrics")
@click.option("--pred", "pred_dir", type=click.Path(exists=True), required=True)
@click.option("--gt", "gt_dir", type=click.Path(exists=True), required=True)
@click.option("-o", "--out", "out_path", type=click.Path(), default="metrics.json")
def metrics_cmd(pred_dir, gt_dir, out_path):
    """Batch-evaluate CF/PSNR/SSIM over two directories of same-named PNGs."""
    try:
        report = metrics_mod.evaluate_dirs(pred_dir, gt_dir)
    except Exception as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    metrics_mod.write_report(out_path, report)
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--data-dir", type=click.Path(), default="./sessions")
@click.option("--candidates", "candidates_dir", type=click.Path(), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(host, port, data_dir, candidates_dir, config_path):
    """Start the interactive session service."""
    import uvicorn

    from .service import create_app

    cfg = _load_config(config_path, candidates_dir=candidates_dir,
                       provider="dir" if candidates_dir else None)
    uvicorn.run(create_app(data_dir, cfg), host=host, port=port)


if __name__ == "__main__":
    main()
