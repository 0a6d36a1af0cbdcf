"""Model and mass-function file formats.

A chain model file is JSON shaped like the in-memory model:

    {"states": [n1, ..., nk],
     "prior": {"lower": [...], "upper": [...]},
     "links": [[{"lower": [...], "upper": [...]}, ...one per parent state],
               ...one per link]}

A single interval can be stored as a one-node model with ``links: []``.

A mass-function file is JSON ``{"n": N, "masses": [[[state indices], mass],
...]}`` with 0-based indices.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ModelFormatError, StructuralError
from .inference import ChainModel
from .intervals import Frame, ProbabilityInterval
from .mass import MassFunction


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _interval_from_obj(obj, frame: Frame, where: str) -> ProbabilityInterval:
    if not isinstance(obj, dict) or "lower" not in obj or "upper" not in obj:
        raise ModelFormatError(f"{where}: expected an object with 'lower' and 'upper'")
    lo, hi = obj["lower"], obj["upper"]
    if not isinstance(lo, list) or not isinstance(hi, list) or len(lo) != len(hi):
        raise ModelFormatError(f"{where}: 'lower' and 'upper' must be lists of equal length")
    if len(lo) != frame.size:
        raise ModelFormatError(f"{where}: expected length {frame.size}, got {len(lo)}")
    try:
        return ProbabilityInterval(frame, np.array(lo, dtype=float), np.array(hi, dtype=float))
    except (TypeError, ValueError, StructuralError) as exc:
        raise ModelFormatError(f"{where}: {exc}") from exc


def chain_frames(sizes) -> tuple[Frame, ...]:
    return tuple(Frame.of_size(n, prefix=f"x{l + 1}s") for l, n in enumerate(sizes))


def load_model(path) -> ChainModel:
    """Parse a model file; raises ModelFormatError with positional context."""
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ModelFormatError(f"{path}: top level must be an object")
    sizes = data.get("states")
    if not isinstance(sizes, list) or not sizes or not all(
        isinstance(n, int) and n >= 2 for n in sizes
    ):
        raise ModelFormatError(f"{path}: 'states' must be a list of integers >= 2")
    frames = chain_frames(sizes)
    prior = _interval_from_obj(data.get("prior"), frames[0], f"{path}: prior")
    links_obj = data.get("links", [])
    if not isinstance(links_obj, list) or len(links_obj) != len(sizes) - 1:
        raise ModelFormatError(
            f"{path}: 'links' must hold {len(sizes) - 1} entries, got "
            f"{len(links_obj) if isinstance(links_obj, list) else type(links_obj).__name__}"
        )
    links = []
    for li, link in enumerate(links_obj):
        parent, child = frames[li], frames[li + 1]
        if not isinstance(link, list) or len(link) != parent.size:
            raise ModelFormatError(
                f"{path}: links[{li}] must hold {parent.size} intervals (one per parent state)"
            )
        links.append(
            tuple(
                _interval_from_obj(obj, child, f"{path}: links[{li}][{si}]")
                for si, obj in enumerate(link)
            )
        )
    return ChainModel(frames=frames, prior=prior, links=tuple(links))


def _interval_to_obj(iv: ProbabilityInterval) -> dict:
    return {"lower": [float(v) for v in iv.lower], "upper": [float(v) for v in iv.upper]}


def chain_to_dict(chain: ChainModel) -> dict:
    return {
        "states": [f.size for f in chain.frames],
        "prior": _interval_to_obj(chain.prior),
        "links": [[_interval_to_obj(iv) for iv in link] for link in chain.links],
    }


def save_model(chain: ChainModel, path) -> None:
    Path(path).write_text(json.dumps(chain_to_dict(chain), indent=2) + "\n", encoding="utf-8")


def load_mass(path, frame: Frame) -> MassFunction:
    """Parse a mass-function file for the given frame."""
    data = _load_json(path)
    if not isinstance(data, dict) or "masses" not in data:
        raise ModelFormatError(f"{path}: expected an object with 'masses'")
    if "n" in data and data["n"] != frame.size:
        raise ModelFormatError(f"{path}: mass is for {data['n']} states, frame has {frame.size}")
    acc: dict[int, float] = {}
    entries = data["masses"]
    if not isinstance(entries, list):
        raise ModelFormatError(f"{path}: 'masses' must be a list of [indices, mass] pairs")
    for e, entry in enumerate(entries):
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not isinstance(entry[0], list)
        ):
            raise ModelFormatError(f"{path}: masses[{e}] must be [[state indices], mass]")
        indices, value = entry
        try:
            mask = frame.mask_of(int(i) for i in indices)
            acc[mask] = acc.get(mask, 0.0) + float(value)
        except (TypeError, ValueError, StructuralError) as exc:
            raise ModelFormatError(f"{path}: masses[{e}]: {exc}") from exc
    try:
        return MassFunction(frame, acc)
    except StructuralError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
