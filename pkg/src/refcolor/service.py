"""Session-based HTTP API for the interactive refinement loop.

Sessions live on disk under a data directory, one subdirectory each:

    <data_dir>/<id>/
      gray.png           input image
      candidates/        candidate PNGs (ids = filenames)
      segments.json      RLE segment map
      session.json       revision counter + config echo
      rev<N>/            result.png, reference.png, assignment.json, hints.json

Only the current and previous revision directories are retained
(one-step undo).
"""

from __future__ import annotations

import base64
import io
import json
import shutil
import threading
import time
import uuid
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from PIL import Image

from . import color, hints as hints_mod, pipeline, providers, refinement, segmentation

DEFAULT_TTL_SECONDS = 24 * 3600


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class SessionState:
    id: str
    root: Path
    gray: np.ndarray
    candidates: refinement.CandidateSet
    segments: segmentation.SegmentMap
    assignment: refinement.Assignment
    revision: int
    cfg: pipeline.PipelineConfig


class SessionStore:
    """Disk-backed sessions with a per-session mutation lock."""

    def __init__(self, data_dir, cfg: pipeline.PipelineConfig,
                 ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.ttl = ttl_seconds
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, sid: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(sid, threading.Lock())

    def _root(self, sid: str) -> Path:
        return self.data_dir / sid

    def evict_idle(self) -> None:
        now = time.time()
        for d in self.data_dir.iterdir():
            meta = d / "session.json"
            if meta.exists() and now - meta.stat().st_mtime > self.ttl:
                shutil.rmtree(d, ignore_errors=True)

    def create(self, gray_png: bytes, candidates_dir: str | None,
               overrides: dict | None = None) -> SessionState:
        cfg = self.cfg
        if candidates_dir:
            cfg = replace(cfg, provider="dir", candidates_dir=candidates_dir)
        if overrides:
            cfg = replace(cfg, **overrides)
        try:
            with Image.open(io.BytesIO(gray_png)) as im:
                gray = color.luminance_of(np.asarray(im.convert("RGB")))
        except Exception as exc:
            raise ApiError(400, "bad_image", f"cannot decode input image: {exc}") from exc
        try:
            seg = pipeline.segment_input(gray, cfg)
            cands = pipeline.acquire_candidates(gray, cfg)
            result = pipeline.run_stages(gray, cands, seg, cfg)
        except (pipeline.PipelineError, providers.ProviderError, ValueError) as exc:
            raise ApiError(422, "pipeline_failed", str(exc)) from exc

        sid = uuid.uuid4().hex[:12]
        root = self._root(sid)
        (root / "candidates").mkdir(parents=True)
        (root / "gray.png").write_bytes(gray_png)
        for cid, lab in zip(cands.ids, cands.candidates):
            color.write_rgb(root / "candidates" / _cand_filename(cid), color.lab_to_rgb(lab))
        segmentation.save_segment_map(root / "segments.json", seg)
        state = SessionState(id=sid, root=root, gray=gray, candidates=cands,
                             segments=seg, assignment=result.reference.assignment,
                             revision=0, cfg=cfg)
        self._write_revision(state, result)
        self._write_meta(state)
        return state

    def load(self, sid: str) -> SessionState:
        root = self._root(sid)
        meta_path = root / "session.json"
        if not meta_path.exists():
            raise ApiError(404, "not_found", f"unknown session {sid!r}")
        meta = json.loads(meta_path.read_text())
        gray = color.read_gray(root / "gray.png")
        h, w = gray.shape
        cands = providers.load_candidates_dir(root / "candidates", (w, h))
        seg = segmentation.load_segment_map(root / "segments.json", (w, h))
        rev = int(meta["revision"])
        assign = refinement.load_assignment(root / f"rev{rev}" / "assignment.json")
        cfg = self.cfg
        return SessionState(id=sid, root=root, gray=gray, candidates=cands,
                            segments=seg, assignment=assign, revision=rev, cfg=cfg)

    def _write_meta(self, state: SessionState) -> None:
        (state.root / "session.json").write_text(json.dumps({
            "id": state.id,
            "revision": state.revision,
            "candidate_ids": state.candidates.ids,
            "n_segments": state.segments.count,
        }))

    def _write_revision(self, state: SessionState, result: pipeline.PipelineResult) -> None:
        rev_dir = state.root / f"rev{state.revision}"
        rev_dir.mkdir(parents=True, exist_ok=True)
        color.write_rgb(rev_dir / "result.png", result.output)
        color.write_rgb(rev_dir / "reference.png", color.lab_to_rgb(result.reference.image))
        refinement.save_assignment(rev_dir / "assignment.json", result.reference.assignment)
        hints_mod.save_hints(rev_dir / "hints.json", result.hints)
        # one-step undo: drop everything older than the previous revision
        for old in state.root.glob("rev*"):
            n = int(old.name[3:])
            if n < state.revision - 1:
                shutil.rmtree(old, ignore_errors=True)

    def swap(self, state: SessionState, j: int, source) -> SessionState:
        try:
            assign = refinement.apply_substitution(
                state.assignment, j, source,
                n_candidates=state.candidates.n,
                image_shape=state.gray.shape,
            )
        except (IndexError, ValueError) as exc:
            raise ApiError(422, "bad_swap", str(exc)) from exc
        result = pipeline.run_stages(state.gray, state.candidates, state.segments,
                                     state.cfg, assign=assign)
        state.assignment = assign
        state.revision += 1
        self._write_revision(state, result)
        self._write_meta(state)
        return state

    def undo(self, state: SessionState) -> SessionState:
        prev = state.revision - 1
        prev_dir = state.root / f"rev{prev}"
        if state.revision == 0 or not prev_dir.exists():
            raise ApiError(422, "nothing_to_undo", "no previous revision retained")
        shutil.rmtree(state.root / f"rev{state.revision}", ignore_errors=True)
        state.revision = prev
        state.assignment = refinement.load_assignment(prev_dir / "assignment.json")
        self._write_meta(state)
        return state


def _cand_filename(cid: str) -> str:
    return cid if cid.lower().endswith(".png") else f"{cid}.png"


def create_app(data_dir, cfg: pipeline.PipelineConfig | None = None,
               ttl_seconds: float = DEFAULT_TTL_SECONDS) -> FastAPI:
    cfg = cfg or pipeline.PipelineConfig()
    store = SessionStore(data_dir, cfg, ttl_seconds)
    app = FastAPI(title="refcolor session service")

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": {"code": exc.code, "message": exc.message}})

    def summary(state: SessionState) -> dict:
        assign_doc = []
        for j, choice in enumerate(state.assignment.choices):
            if isinstance(choice, (int, np.integer)):
                assign_doc.append({"j": j, "candidate": state.candidates.ids[int(choice)]})
            else:
                assign_doc.append({"j": j, "patch": True})
        return {
            "id": state.id,
            "revision": state.revision,
            "segments": state.segments.count,
            "width": state.segments.width,
            "height": state.segments.height,
            "segment_rle": segmentation.encode_rle(state.segments.labels),
            "candidates": state.candidates.ids,
            "assignment": assign_doc,
            "result_url": f"/sessions/{state.id}/result?revision={state.revision}",
        }

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        store.evict_idle()
        body = await request.json()
        if "gray_png" not in body:
            raise ApiError(400, "bad_request", "missing gray_png")
        try:
            gray_png = base64.b64decode(body["gray_png"])
        except Exception as exc:
            raise ApiError(400, "bad_request", f"gray_png is not valid base64: {exc}") from exc
        state = store.create(gray_png, body.get("candidates_dir"), body.get("config"))
        return {"id": state.id, "segments": state.segments.count, "revision": state.revision}

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        return summary(store.load(sid))

    @app.put("/sessions/{sid}/segments/{j}")
    async def swap_segment(sid: str, j: int, request: Request):
        with store.lock(sid):
            state = store.load(sid)
            ctype = request.headers.get("content-type", "")
            if ctype.startswith("application/json"):
                body = await request.json()
                if "candidate" not in body:
                    raise ApiError(422, "bad_swap", "body must name a candidate id")
                try:
                    source = state.candidates.index_of(str(body["candidate"]))
                except KeyError as exc:
                    raise ApiError(422, "bad_swap", str(exc)) from exc
            else:
                form = await request.form()
                upload = form.get("patch")
                if upload is None:
                    raise ApiError(422, "bad_swap", "multipart body must carry a 'patch' file")
                data = await upload.read()
                try:
                    with Image.open(io.BytesIO(data)) as im:
                        source = color.rgb_to_lab(np.asarray(im.convert("RGB")))
                except Exception as exc:
                    raise ApiError(422, "bad_swap", f"patch is not a decodable image: {exc}") from exc
            state = store.swap(state, j, source)
            return {"revision": state.revision}

    @app.post("/sessions/{sid}/undo")
    def undo(sid: str):
        with store.lock(sid):
            state = store.load(sid)
            state = store.undo(state)
            return {"revision": state.revision}

    def _stream_png(path: Path) -> Response:
        if not path.exists():
            raise ApiError(404, "not_found", f"no artifact at {path.name}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/sessions/{sid}/result")
    def get_result(sid: str, revision: int | None = None):
        state = store.load(sid)
        rev = state.revision if revision is None else revision
        return _stream_png(state.root / f"rev{rev}" / "result.png")

    @app.get("/sessions/{sid}/reference")
    def get_reference(sid: str, revision: int | None = None):
        state = store.load(sid)
        rev = state.revision if revision is None else revision
        return _stream_png(state.root / f"rev{rev}" / "reference.png")

    @app.get("/sessions/{sid}/candidates/{cid}/thumb")
    def get_thumb(sid: str, cid: str, size: int = 128):
        state = store.load(sid)
        path = state.root / "candidates" / _cand_filename(cid)
        if not path.exists():
            raise ApiError(404, "not_found", f"unknown candidate {cid!r}")
        with Image.open(path) as im:
            im = im.convert("RGB")
            im.thumbnail((size, size))
            buf = io.BytesIO()
            im.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    app.state.store = store
    return app
