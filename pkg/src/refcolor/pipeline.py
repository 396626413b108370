"""End-to-end orchestration: segmentation, candidate selection, reference
composition, hint generation, and propagation, with staged artifacts."""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import color, hints as hints_mod, metrics, propagation, providers, refinement, segmentation


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    """Run configuration; defaults follow the engine's tuned operating point
    (8 candidates, 10 segments, 10 hints per segment, Canny conditioning)."""

    n_candidates: int = 8
    n_segments: int = 10
    hint_cap: int = 10
    cell_size: int = 16
    s_eps: float = 0.6
    search_radius: int = 0
    metric: str = "cosine"
    dbscan_eps: float = 10.0
    dbscan_min_pts: int = 3
    solver: propagation.SolverConfig = field(default_factory=propagation.SolverConfig)
    condition: str = "canny"
    canny_low: float = 0.1
    canny_high: float = 0.2
    canny_sigma: float = 1.0
    compactness: float = 10.0
    provider: str = "dir"  # "dir" | "http"
    candidates_dir: str | None = None
    endpoint: str | None = None
    caption: str = ""
    hed_path: str | None = None
    segment_map_path: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n_candidates < 1 or self.n_segments < 1 or self.hint_cap < 1:
            raise ValueError("n_candidates, n_segments, and hint_cap must all be >= 1")
        if self.cell_size < 2:
            raise ValueError("cell_size must be >= 2")
        if self.provider not in ("dir", "http"):
            raise ValueError(f"provider must be 'dir' or 'http', got {self.provider!r}")

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["solver"] = asdict(self.solver)
        return doc


@dataclass
class PipelineResult:
    reference: refinement.ComposedReference
    hints: hints_mod.HintSet
    output: np.ndarray  # uint8 RGB
    colorfulness: float
    iterations: int
    residual: float
    segments: segmentation.SegmentMap
    candidates: refinement.CandidateSet


def _stage(name):
    """Wrap stage exceptions with the stage tag."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(name, str(exc)) from exc
            return False

    return _Ctx()


def acquire_candidates(gray: np.ndarray, cfg: PipelineConfig) -> refinement.CandidateSet:
    h, w = gray.shape
    if cfg.provider == "dir":
        if not cfg.candidates_dir:
            raise ValueError("dir provider requires candidates_dir")
        return providers.load_candidates_dir(cfg.candidates_dir, (w, h))
    if not cfg.endpoint:
        raise ValueError("http provider requires an endpoint")
    canny_png, _ = providers.condition_bundle(
        gray, cfg.canny_low, cfg.canny_high, cfg.canny_sigma
    )
    hed_png = Path(cfg.hed_path).read_bytes() if cfg.hed_path else None
    if hed_png is not None and cfg.condition == "canny+hed":
        n_canny = cfg.n_candidates // 2
        n_hed = cfg.n_candidates - n_canny
    else:
        n_canny, n_hed = cfg.n_candidates, 0
    req = providers.GenerationRequest(
        caption=cfg.caption, n_canny=n_canny, n_hed=n_hed,
        canny_png=canny_png, hed_png=hed_png, seed=cfg.seed,
    )
    return providers.fetch_candidates(cfg.endpoint, req)


def segment_input(gray: np.ndarray, cfg: PipelineConfig) -> segmentation.SegmentMap:
    if cfg.segment_map_path:
        return segmentation.load_segment_map(
            cfg.segment_map_path, (gray.shape[1], gray.shape[0])
        )
    return segmentation.superpixel_segments(gray, cfg.n_segments, cfg.compactness)


def run_stages(gray: np.ndarray, cands: refinement.CandidateSet,
               seg: segmentation.SegmentMap, cfg: PipelineConfig,
               assign: refinement.Assignment | None = None) -> PipelineResult:
    """Selection through colorization, reusing precomputed segments and
    candidates (the session service edits assignments on this path)."""
    with _stage("select"):
        if assign is None:
            assign = refinement.select_assignment(gray, cands, seg, cfg.metric)
    with _stage("compose"):
        ref = refinement.compose_reference(cands, seg, assign)
    with _stage("hints"):
        wr = hints_mod.warp_reference(gray, ref.image, d=cfg.cell_size,
                                      search_radius=cfg.search_radius)
        coarse = hints_mod.extract_coarse_hints(wr, seg, cfg.s_eps)
        fine = hints_mod.refine_hints(coarse, seg, n_h=cfg.hint_cap,
                                      eps=cfg.dbscan_eps, min_pts=cfg.dbscan_min_pts)
    with _stage("propagate"):
        prop = propagation.propagate(gray, fine, cfg.solver)
        output = propagation.colorize(gray, prop.a, prop.b)
    return PipelineResult(
        reference=ref, hints=fine, output=output,
        colorfulness=metrics.colorfulness(output),
        iterations=prop.iterations, residual=prop.residual,
        segments=seg, candidates=cands,
    )


def run_pipeline(gray_path, cfg: PipelineConfig, out_dir) -> PipelineResult:
    """Full run from a grayscale PNG; persists stage artifacts in out_dir.

    On failure every partial output is removed and a stage-tagged
    PipelineError is raised.
    """
    out_dir = Path(out_dir)
    created = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        with _stage("input"):
            gray = color.read_gray(gray_path)
        with _stage("segment"):
            seg = segment_input(gray, cfg)
        with _stage("candidates"):
            cands = acquire_candidates(gray, cfg)
        result = run_stages(gray, cands, seg, cfg)
        write_artifacts(out_dir, gray, cfg, result)
        return result
    except Exception:
        if created:
            shutil.rmtree(out_dir, ignore_errors=True)
        else:
            for name in ("reference.png", "result.png", "assignment.json",
                         "hints.json", "run.json", "segments.json"):
                (out_dir / name).unlink(missing_ok=True)
        raise


def write_artifacts(out_dir: Path, gray: np.ndarray, cfg: PipelineConfig,
                    result: PipelineResult) -> None:
    out_dir = Path(out_dir)
    color.write_rgb(out_dir / "reference.png", color.lab_to_rgb(result.reference.image))
    color.write_rgb(out_dir / "result.png", result.output)
    refinement.save_assignment(out_dir / "assignment.json", result.reference.assignment)
    hints_mod.save_hints(out_dir / "hints.json", result.hints)
    segmentation.save_segment_map(out_dir / "segments.json", result.segments)
    run_doc = {
        "config": cfg.to_json(),
        "solver": {"iterations": result.iterations, "residual": result.residual},
        "colorfulness": result.colorfulness,
        "n_segments": result.segments.count,
        "candidate_ids": result.candidates.ids,
    }
    (out_dir / "run.json").write_text(json.dumps(run_doc, indent=2))
