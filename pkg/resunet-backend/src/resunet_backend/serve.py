"""aroi-seg/1 stdio server wrapping trained checkpoints.

The process loads one checkpoint per view it should answer for, prints a
single handshake line::

    {"proto": "aroi-seg/1", "name": ..., "input_sizes": {"axial": [w, h], ...}}

and then alternates strictly: each request is one JSON line ``{"view": v,
"w": w, "h": h}`` followed by ``w*h*4`` bytes of little-endian float32
pixels (row-major, h rows of w).  The reply is ``{"status": "ok"}`` plus a
payload of the same size and layout, or ``{"status": "error", "msg": ...}``
with no payload.  ``{"cmd": "quit"}`` ends the process with exit code 0, as
does end-of-file on stdin.  Protocol violations (unknown view, malformed
JSON, wrong frame size, non-finite pixels) earn an error reply and the
session continues.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import BinaryIO

import numpy as np
import torch

from .checkpoint import load_checkpoint

__all__ = ["PROTO", "serve_loop", "entry"]

PROTO = "aroi-seg/1"

#: Refuse to read request payloads above this pixel count (64 MiB of float32).
_MAX_PIXELS = 1 << 24

_VIEWS = ("axial", "coronal", "sagittal")


def _read_exactly(stream: BinaryIO, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            raise EOFError(f"stream ended {remaining} bytes into a {n}-byte frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def _send(stream: BinaryIO, message: dict, payload: bytes = b"") -> None:
    stream.write(json.dumps(message).encode("utf-8") + b"\n" + payload)
    stream.flush()


def _infer(model: torch.nn.Module, frame: np.ndarray) -> np.ndarray:
    with torch.no_grad():
        out = model(torch.from_numpy(frame[None, None, :, :]))
    return out[0, 0].numpy()


def serve_loop(
    models: dict[str, torch.nn.Module],
    sizes: dict[str, tuple[int, int]],
    name: str,
    stdin: BinaryIO,
    stdout: BinaryIO,
) -> int:
    """Answer requests until quit or EOF.  ``sizes`` maps view -> (w, h)."""
    _send(stdout, {
        "proto": PROTO,
        "name": name,
        "input_sizes": {v: [w, h] for v, (w, h) in sizes.items()},
    })
    while True:
        line = stdin.readline()
        if not line:
            return 0
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            _send(stdout, {"status": "error", "msg": f"bad request line: {exc}"})
            continue
        if not isinstance(request, dict):
            _send(stdout, {"status": "error", "msg": "request must be a JSON object"})
            continue
        if request.get("cmd") == "quit":
            return 0
        if "cmd" in request:
            _send(stdout, {"status": "error",
                           "msg": f"unknown command {request['cmd']!r}"})
            continue

        view, w, h = request.get("view"), request.get("w"), request.get("h")
        if not (isinstance(w, int) and isinstance(h, int) and w > 0 and h > 0):
            _send(stdout, {"status": "error", "msg": "w and h must be positive integers"})
            continue
        if w * h > _MAX_PIXELS:
            # Too large to safely buffer; cannot resync, so refuse outright.
            _send(stdout, {"status": "error", "msg": f"frame {w}x{h} too large"})
            continue
        payload = _read_exactly(stdin, w * h * 4)
        if view not in models:
            _send(stdout, {"status": "error",
                           "msg": f"view {view!r} not served (have {sorted(models)})"})
            continue
        want_w, want_h = sizes[view]
        if (w, h) != (want_w, want_h):
            _send(stdout, {"status": "error",
                           "msg": f"view {view!r} expects {want_w}x{want_h}, got {w}x{h}"})
            continue
        # Copy out of the read-only receive buffer before handing to torch.
        frame = np.array(np.frombuffer(payload, dtype="<f4").reshape(h, w),
                         dtype=np.float32)
        if not np.isfinite(frame).all():
            _send(stdout, {"status": "error", "msg": "frame contains non-finite pixels"})
            continue
        probs = _infer(models[view], frame)
        _send(stdout, {"status": "ok"}, np.ascontiguousarray(probs, dtype="<f4").tobytes())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resunet-serve",
        description="Serve residual U-Net checkpoints over the aroi-seg/1 "
                    "stdio protocol.",
    )
    for view in _VIEWS:
        parser.add_argument(f"--{view}", metavar="CKPT",
                            help=f"checkpoint answering {view} requests")
    parser.add_argument("--name", default="resunet",
                        help="segmenter name announced in the handshake")
    return parser


def entry(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    paths = {view: getattr(args, view) for view in _VIEWS if getattr(args, view)}
    if not paths:
        print("error: no checkpoints given (use --axial/--coronal/--sagittal)",
              file=sys.stderr)
        return 2

    models: dict[str, torch.nn.Module] = {}
    sizes: dict[str, tuple[int, int]] = {}
    loaded: dict[str, tuple[torch.nn.Module, tuple[int, int]]] = {}
    try:
        for view, path in paths.items():
            if path not in loaded:
                model, cfg, _ = load_checkpoint(path)
                ih, iw = cfg.input_hw
                loaded[path] = (model, (iw, ih))
            models[view], sizes[view] = loaded[path]
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    return serve_loop(models, sizes, args.name, sys.stdin.buffer, sys.stdout.buffer)


if __name__ == "__main__":
    raise SystemExit(entry())
