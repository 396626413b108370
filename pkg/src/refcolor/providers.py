"""Candidate acquisition: directory ingestion and the HTTP client for an
external generation ("imagination") service.

Wire protocol, JSON over HTTP:

    POST <endpoint>
    {"caption": str, "n_canny": int, "n_hed": int,
     "canny_png": base64, "hed_png": base64 (optional), "seed": int (optional)}

    200 -> {"candidates": [{"id": str, "png": base64}, ...]}

The response must carry exactly n_canny + n_hed candidates, all sized
like the condition image.
"""

from __future__ import annotations

import base64
import io
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np
from PIL import Image

from . import color
from .descriptors import load_feature_grid
from .imaging import canny_edges
from .refinement import CandidateSet


class ProviderError(Exception):
    """Protocol-level failure (bad status, malformed body, count mismatch)."""


class TransportError(ProviderError):
    """Connection/timeout failure before a valid HTTP response."""


@dataclass(frozen=True)
class GenerationRequest:
    caption: str = ""
    n_canny: int = 4
    n_hed: int = 4
    canny_png: bytes = b""
    hed_png: bytes | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n_canny + self.n_hed < 1:
            raise ValueError("request must ask for at least one candidate")
        if self.n_hed > 0 and not self.hed_png:
            raise ValueError("n_hed > 0 requires an HED boundary map")

    @property
    def n_total(self) -> int:
        return self.n_canny + self.n_hed

    def to_json(self) -> dict:
        body = {
            "caption": self.caption,
            "n_canny": self.n_canny,
            "n_hed": self.n_hed,
            "canny_png": base64.b64encode(self.canny_png).decode("ascii"),
        }
        if self.hed_png is not None:
            body["hed_png"] = base64.b64encode(self.hed_png).decode("ascii")
        if self.seed is not None:
            body["seed"] = self.seed
        return body


def load_candidates_dir(path, expected_size: tuple[int, int]) -> CandidateSet:
    """Load candidate PNGs (filename order) with optional .fgrd siblings.

    expected_size is (width, height); size mismatches are an error, never
    silently resized.
    """
    path = Path(path)
    if not path.is_dir():
        raise ProviderError(f"candidate directory not found: {path}")
    files = sorted(path.glob("*.png"))
    if not files:
        raise ProviderError(f"no candidate PNGs in {path}")
    w, h = expected_size
    candidates, ids, grids = [], [], []
    for f in files:
        rgb = color.read_rgb(f)
        if rgb.shape[:2] != (h, w):
            raise ProviderError(
                f"candidate {f.name} is {rgb.shape[1]}x{rgb.shape[0]}, expected {w}x{h}"
            )
        candidates.append(color.rgb_to_lab(rgb))
        ids.append(f.name)
        sibling = f.with_suffix(".fgrd")
        grids.append(load_feature_grid(sibling) if sibling.exists() else None)
    return CandidateSet(candidates=candidates, ids=ids, feature_grids=grids)


def fetch_candidates(endpoint: str, req: GenerationRequest, timeout: float = 120.0,
                     client: httpx.Client | None = None) -> CandidateSet:
    """POST a generation request and decode the returned candidate set.

    Either every candidate decodes and validates, or an error is raised
    with nothing retained.
    """
    owned = client is None
    client = client or httpx.Client(timeout=timeout)
    try:
        try:
            resp = client.post(endpoint, json=req.to_json(), timeout=timeout)
        except httpx.HTTPError as exc:
            raise TransportError(f"generation request failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderError(f"generation service returned HTTP {resp.status_code}")
        try:
            body = resp.json()
            entries = body["candidates"]
            decoded = [(str(e["id"]), base64.b64decode(e["png"])) for e in entries]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed generation response: {exc}") from exc
        if len(decoded) != req.n_total:
            raise ProviderError(
                f"requested {req.n_total} candidates, service returned {len(decoded)}"
            )
        expected = _png_size(req.canny_png)
        candidates, ids = [], []
        for cid, png in decoded:
            try:
                with Image.open(io.BytesIO(png)) as im:
                    rgb = np.asarray(im.convert("RGB"))
            except Exception as exc:
                raise ProviderError(f"candidate {cid!r} is not a decodable PNG") from exc
            if expected is not None and rgb.shape[:2] != expected:
                raise ProviderError(
                    f"candidate {cid!r} is {rgb.shape[1]}x{rgb.shape[0]}, "
                    f"expected {expected[1]}x{expected[0]}"
                )
            candidates.append(color.rgb_to_lab(rgb))
            ids.append(cid)
        return CandidateSet(candidates=candidates, ids=ids)
    finally:
        if owned:
            client.close()


def _png_size(png: bytes) -> tuple[int, int] | None:
    if not png:
        return None
    with Image.open(io.BytesIO(png)) as im:
        return im.height, im.width


def condition_bundle(gray: np.ndarray, canny_low: float = 0.1, canny_high: float = 0.2,
                     sigma: float = 1.0) -> tuple[bytes, tuple[int, int]]:
    """Render the Canny condition map to deterministic 0/255 PNG bytes."""
    edges = canny_edges(gray, low=canny_low, high=canny_high, sigma=sigma)
    im = Image.fromarray((edges * 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return buf.getvalue(), (gray.shape[1], gray.shape[0])
