"""Multi-view mask lifting over a fixed density field."""

import json as _json

from . import _masklift
from ._masklift import (
    COVERAGE_FLOOR,
    DEFAULT_SAMPLES,
    FormatError,
    Scene,
    SegmenterError,
    iou,
    load_scene,
    projection_loss,
    scribbles_to_prompts,
    select_prompts,
    skeletonize,
)

__all__ = [
    "COVERAGE_FLOOR",
    "DEFAULT_SAMPLES",
    "FormatError",
    "Scene",
    "SegmenterError",
    "baseline",
    "build_scene",
    "evaluate",
    "iou",
    "load_scene",
    "projection_loss",
    "render",
    "scribbles_to_prompts",
    "segment",
    "select_prompts",
    "skeletonize",
    "synth",
]


def _dump(value):
    if value is None:
        return ""
    return value if isinstance(value, str) else _json.dumps(value)


def build_scene(spec):
    """Voxelize a scene spec (dict or JSON text)."""
    return _masklift.build_scene(_dump(spec))


def synth(spec, directory):
    """Build a scene and write its directory."""
    return _masklift.synth(_dump(spec), str(directory))


def segment(scene, prompts=None, ref_mask=None, config=None, segmenter="oracle", noise=None,
            replay_dir="", remote_url="", timeout_ms=30000):
    """Lift a reference-view prompt set or mask to a 3D mask grid.

    `prompts` is a list of {"x", "y", "label"} dicts; `config` and `noise` are dicts of engine and
    oracle settings. Returns a dict with the grid under "mask" and the per-view log under "record".
    """
    out = _masklift.segment(scene, _dump(prompts), ref_mask, _dump(config), segmenter, _dump(noise),
                            str(replay_dir), remote_url, timeout_ms)
    out["record"] = _json.loads(out["record"])
    out["config"] = _json.loads(out["config"])
    return out


def baseline(scene, view, ref_mask, config=None):
    """Inverse-render one reference mask and stop."""
    return _masklift.baseline(scene, view, ref_mask, _dump(config))


def evaluate(scene, mask, held_out, object_id, n_samples=DEFAULT_SAMPLES):
    """Held-out 2D IoU, accuracy and 3D voxel IoU of a mask grid."""
    return _json.loads(_masklift.evaluate(scene, mask, list(held_out), object_id, n_samples))


def render(scene, view, mask=None, n_samples=DEFAULT_SAMPLES):
    """Color, mask scores, depth, coverage and binarized mask of one view."""
    return _masklift.render(scene, view, mask, n_samples)
