"""Start a local recolorization service preloaded with a synthetic scene.

Writes a grayscale input plus a candidate pool (the true color image and
three channel-permuted distractors) into --scene-dir, then serves the
session API on a free port. Prints "READY <port>" once listening so a test
harness can wait on stdout before connecting.
"""

import argparse
import socket
import sys
import threading
from pathlib import Path

import numpy as np
import uvicorn

from refcolor import color, pipeline, service


def make_scene(scene_dir: Path, size: int = 96) -> None:
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    u = 2 * np.pi * 0.7 * xx / size
    v = 2 * np.pi * 0.7 * yy / size
    r = 40 + 175 * (0.5 + 0.5 * np.sin(u))
    g = 40 + 175 * (0.5 + 0.5 * np.cos(v))
    b = 40 + 175 * (0.5 + 0.5 * np.sin(u + v))
    truth = np.stack([r, g, b], axis=-1).astype(np.uint8)

    cand_dir = scene_dir / "candidates"
    cand_dir.mkdir(parents=True, exist_ok=True)
    color.write_rgb(cand_dir / "c0.png", truth)
    for i, perm in enumerate([(1, 2, 0), (2, 0, 1), (1, 0, 2)], start=1):
        color.write_rgb(cand_dir / f"c{i}.png", truth[..., perm])
    color.write_gray(scene_dir / "gray.png", color.luminance_of(truth))


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--scene-dir", required=True)
    parser.add_argument("--port", type=int, default=0)
    args = parser.parse_args()

    scene_dir = Path(args.scene_dir)
    make_scene(scene_dir)

    cfg = pipeline.PipelineConfig(n_candidates=4, seed=7)
    app = service.create_app(scene_dir / "data", cfg)
    port = args.port or free_port()

    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        if not thread.is_alive():
            sys.exit("server failed to start")
    print(f"READY {port}", flush=True)
    thread.join()


if __name__ == "__main__":
    main()
