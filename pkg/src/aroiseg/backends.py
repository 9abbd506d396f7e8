"""Pluggable 2-D slice segmenters.

A backend maps a normalized intensity patch (pixels in [0, 1], sized to the
backend's declared input size for the view) to a per-pixel nodule
probability map of the same size. Built-ins cover testing and classical
verification; trained models plug in as child processes speaking the
"aroi-seg/1" wire protocol over stdin/stdout:

* handshake (child -> engine, one line):
  ``{"proto": "aroi-seg/1", "name": ..., "input_sizes": {"axial": [w, h], ...}}``
* request (engine -> child): one line ``{"view": ..., "w": W, "h": H}``
  followed by W*H*4 bytes of row-major little-endian float32 in [0, 1]
* response (child -> engine): one line ``{"status": "ok"}`` plus W*H*4 bytes
  of float32 probabilities, or ``{"status": "error", "msg": ...}`` with no
  payload
* shutdown (engine -> child): one line ``{"cmd": "quit"}``; the child exits.

Requests and responses strictly alternate; a handle never carries more than
one outstanding request.
"""

from __future__ import annotations

import json
import os
import select
import subprocess
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import ndimage

from .volume import Patch2D

PROTOCOL = "aroi-seg/1"
VIEWS = ("axial", "coronal", "sagittal")

#: Input sizes (width, height) of the reference network configuration.
REFERENCE_INPUT_SIZES: dict[str, tuple[int, int]] = {
    "axial": (128, 128),
    "coronal": (128, 64),
    "sagittal": (128, 64),
}

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)


class BackendError(Exception):
    """A backend failed to produce a probability map."""


class HandshakeError(BackendError):
    """The child process did not produce a valid handshake line."""


class HandshakeTimeoutError(HandshakeError):
    """The child process produced no handshake within the allowed time."""


class ProtocolError(BackendError):
    """The child process violated the aroi-seg/1 framing rules."""


@dataclass(frozen=True)
class SegmenterSpec:
    """Identity and per-view input sizes a backend declares."""

    name: str
    input_sizes: Mapping[str, tuple[int, int]] = field(
        default_factory=lambda: dict(REFERENCE_INPUT_SIZES))

    def __post_init__(self) -> None:
        sizes = {}
        for view in VIEWS:
            if view not in self.input_sizes:
                raise ValueError(f"input_sizes is missing the {view!r} view")
            w, h = self.input_sizes[view]
            if int(w) < 1 or int(h) < 1:
                raise ValueError(f"{view} input size must be positive, got {(w, h)}")
            sizes[view] = (int(w), int(h))
        object.__setattr__(self, "input_sizes", sizes)


class SegmenterBackend:
    """Base class for in-process backends; subclasses implement ``infer``."""

    spec: SegmenterSpec

    def infer(self, view: str, patch: Patch2D) -> Patch2D:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self) -> "SegmenterBackend":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def segment_patch(backend: SegmenterBackend, view: str, p: Patch2D) -> Patch2D:
    """Run one patch through ``backend``, enforcing the declared input size."""
    if view not in backend.spec.input_sizes:
        raise ValueError(f"backend {backend.spec.name!r} declares no {view!r} view")
    w, h = backend.spec.input_sizes[view]
    if (p.width, p.height) != (w, h):
        raise ValueError(
            f"patch size {(p.width, p.height)} does not match declared {view} input {(w, h)}")
    out = backend.infer(view, p)
    if (out.width, out.height) != (w, h):
        raise ProtocolError(
            f"backend {backend.spec.name!r} returned {(out.width, out.height)}, expected {(w, h)}")
    return out


def threshold_reference(p: Patch2D, cut: float = 0.5) -> Patch2D:
    """Classical reference segmenter: keep the largest bright component.

    Pixels >= ``cut`` are candidates; 4-connected candidate components are
    labeled in row-major discovery order and the largest one (ties going to
    the first discovered) gets probability 1.0, everything else 0.0.
    """
    candidates = p.pixels >= cut
    out = np.zeros_like(p.pixels)
    if candidates.any():
        labels, n = ndimage.label(candidates, structure=_FOUR_CONNECTED)
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        out[labels == int(np.argmax(sizes))] = 1.0
    return Patch2D(out, "probability")


class ConstantBackend(SegmenterBackend):
    """Returns the same probability everywhere; the degenerate test backend."""

    def __init__(self, value: float = 0.0,
                 input_sizes: Mapping[str, tuple[int, int]] | None = None):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"constant probability must be in [0, 1], got {value}")
        self.value = float(value)
        self.spec = SegmenterSpec(f"constant({value})", input_sizes or REFERENCE_INPUT_SIZES)

    def infer(self, view: str, patch: Patch2D) -> Patch2D:
        return Patch2D(np.full_like(patch.pixels, self.value), "probability")


class ThresholdBackend(SegmenterBackend):
    """The built-in classical backend wrapping :func:`threshold_reference`."""

    def __init__(self, cut: float = 0.5,
                 input_sizes: Mapping[str, tuple[int, int]] | None = None):
        self.cut = float(cut)
        self.spec = SegmenterSpec(f"threshold({self.cut})",
                                  input_sizes or REFERENCE_INPUT_SIZES)

    def infer(self, view: str, patch: Patch2D) -> Patch2D:
        return threshold_reference(patch, self.cut)


class FunctionBackend(SegmenterBackend):
    """Adapts an arbitrary ``f(view, patch) -> array`` for tests and oracles."""

    def __init__(self, fn: Callable[[str, Patch2D], np.ndarray], name: str = "function",
                 input_sizes: Mapping[str, tuple[int, int]] | None = None):
        self._fn = fn
        self.spec = SegmenterSpec(name, input_sizes or REFERENCE_INPUT_SIZES)

    def infer(self, view: str, patch: Patch2D) -> Patch2D:
        out = np.asarray(self._fn(view, patch), dtype=np.float64)
        return Patch2D(out, "probability")


def _read_line_with_timeout(fd: int, timeout: float, limit: int = 1 << 16) -> bytes:
    # Byte-wise read keeps the fd's stream position exact for later framing.
    deadline = time.monotonic() + timeout
    buf = bytearray()
    while True:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise HandshakeTimeoutError(f"no handshake within {timeout:.1f} s")
        ready, _, _ = select.select([fd], [], [], remaining)
        if not ready:
            continue
        chunk = os.read(fd, 1)
        if not chunk:
            raise HandshakeError("backend closed the stream before handshaking")
        buf += chunk
        if chunk == b"\n":
            return bytes(buf)
        if len(buf) > limit:
            raise HandshakeError("handshake line exceeds 64 KiB")


def _read_exact(stream, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = stream.read(n - len(buf))
        if not chunk:
            raise ProtocolError(f"stream ended after {len(buf)} of {n} payload bytes")
        buf += chunk
    return bytes(buf)


class ExternalBackend(SegmenterBackend):
    """A segmenter served by a child process over the aroi-seg/1 protocol.

    Out-of-range probabilities from the child are clamped into [0, 1] and
    counted in ``clamp_count`` unless ``strict`` is set, in which case they
    raise :class:`ProtocolError`.
    """

    def __init__(self, argv: Sequence[str], *, handshake_timeout: float = 30.0,
                 strict: bool = False):
        self.clamp_count = 0
        self._strict = strict
        self._busy = False
        self._proc = subprocess.Popen(
            list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE)
        try:
            line = _read_line_with_timeout(self._proc.stdout.fileno(), handshake_timeout)
            self.spec = self._parse_handshake(line)
        except Exception:
            self._proc.kill()
            self._proc.wait()
            raise

    @staticmethod
    def _parse_handshake(line: bytes) -> SegmenterSpec:
        try:
            msg = json.loads(line)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise HandshakeError(f"handshake is not valid JSON: {exc}") from exc
        if not isinstance(msg, dict) or msg.get("proto") != PROTOCOL:
            raise HandshakeError(f"handshake does not declare proto {PROTOCOL!r}: {msg!r}")
        sizes = msg.get("input_sizes")
        if not isinstance(sizes, dict):
            raise HandshakeError(f"handshake input_sizes missing or malformed: {msg!r}")
        try:
            return SegmenterSpec(str(msg.get("name", "external")),
                                 {v: tuple(sizes[v]) for v in sizes})
        except (ValueError, TypeError, KeyError) as exc:
            raise HandshakeError(f"handshake input_sizes invalid: {exc}") from exc

    def infer(self, view: str, patch: Patch2D) -> Patch2D:
        if self._busy:
            raise ProtocolError("overlapping request on a single handle")
        if self._proc.poll() is not None:
            raise ProtocolError(f"backend process exited with code {self._proc.returncode}")
        self._busy = True
        try:
            w, h = self.spec.input_sizes[view]
            header = json.dumps({"view": view, "w": w, "h": h}) + "\n"
            payload = np.ascontiguousarray(patch.pixels, dtype="<f4").tobytes()
            try:
                self._proc.stdin.write(header.encode("utf-8"))
                self._proc.stdin.write(payload)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise ProtocolError(f"backend process is gone: {exc}") from exc
            line = self._proc.stdout.readline()
            if not line:
                raise ProtocolError("backend closed the stream mid-request")
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProtocolError(f"response line is not valid JSON: {line!r}") from exc
            status = msg.get("status") if isinstance(msg, dict) else None
            if status == "error":
                raise BackendError(f"backend error: {msg.get('msg', '')}")
            if status != "ok":
                raise ProtocolError(f"unexpected response line: {msg!r}")
            raw = _read_exact(self._proc.stdout, w * h * 4)
            probs = np.frombuffer(raw, dtype="<f4").reshape(h, w).astype(np.float64)
            bad = int(((probs < 0.0) | (probs > 1.0) | ~np.isfinite(probs)).sum())
            if bad:
                if self._strict:
                    raise ProtocolError(f"{bad} probabilities outside [0, 1]")
                self.clamp_count += bad
                probs = np.clip(np.nan_to_num(probs, nan=0.0), 0.0, 1.0)
            return Patch2D(probs, "probability")
        finally:
            self._busy = False

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.write(b'{"cmd": "quit"}\n')
                self._proc.stdin.flush()
                self._proc.stdin.close()
            except (BrokenPipeError, OSError):
                pass
            try:
                self._proc.wait(timeout=10.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


def spawn_external(argv: Sequence[str], *, handshake_timeout: float = 30.0,
                   strict: bool = False) -> ExternalBackend:
    """Start a child segmenter process and complete the protocol handshake."""
    return ExternalBackend(argv, handshake_timeout=handshake_timeout, strict=strict)
