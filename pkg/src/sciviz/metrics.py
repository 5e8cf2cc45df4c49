"""Run metrics, salient-blob counting and report emission."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .image import write_image
from .network import softmax
from .tv import tv_value
from .validation import check_class_index

REPORT_COLUMNS = ("run_id", "class", "mode", "logit", "confidence", "tv", "components")
MODE_ORDER = {"ci_baseline": 0, "pre_only": 1, "full_sci": 2, "region": 3, "fuse": 4}

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class RunMetrics:
    run_id: str
    class_id: int
    mode: str
    target_logit: float
    softmax_confidence: float
    tv_energy: float
    salient_components: int

    def __post_init__(self):
        if not 0.0 <= self.softmax_confidence <= 1.0:
            raise ValueError("softmax_confidence must lie in [0, 1]")
        if self.salient_components < 0:
            raise ValueError("salient_components must be >= 0")


def confidence_metrics(model, img, c):
    """Logit of class ``c`` and its softmax probability."""
    logits = np.asarray(model.forward_logits(img), dtype=np.float64)
    c = check_class_index(c, len(logits))
    return float(logits[c]), float(softmax(logits)[c])


def salient_components(saliency, percentile: float = 90.0, connectivity: int = 8) -> int:
    """Number of connected blobs where ``|saliency|`` (channels summed) is
    strictly above its ``percentile``-th percentile."""
    if not 0 < percentile < 100:
        raise ValueError("percentile must lie in (0, 100)")
    s = np.abs(np.asarray(saliency, dtype=np.float64))
    if s.ndim == 3:
        s = s.sum(axis=2)
    threshold = np.percentile(s, percentile)
    return count_components(s > threshold, connectivity)


def count_components(binary, connectivity: int = 8) -> int:
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    _, n = ndimage.label(np.asarray(binary, dtype=bool),
                         structure=_EIGHT if connectivity == 8 else _FOUR)
    return int(n)


def run_metrics(model, run, run_id: str, percentile: float = 90.0,
                connectivity: int = 8) -> RunMetrics:
    """Metrics of a single-class :class:`~sciviz.synthesis.RunResult`.

    For fused runs the reported class is the model's top-1 prediction.
    """
    img = run.image
    if np.ndim(run.target_class) == 0:
        c = int(run.target_class)
    else:
        c = int(np.argmax(model.forward_logits(img)))
    logit, conf = confidence_metrics(model, img, c)
    comps = salient_components(model.input_gradient(img, c), percentile, connectivity)
    return RunMetrics(run_id, c, run.mode, logit, conf, tv_value(img), comps)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_table(runs) -> str:
    """CSV text, rows sorted by (class, mode, run id)."""
    rows = sorted(runs, key=lambda m: (m.class_id, MODE_ORDER.get(m.mode, 99), m.mode, m.run_id))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for m in rows:
        writer.writerow([m.run_id, m.class_id, m.mode, _fmt(m.target_logit),
                         _fmt(m.softmax_confidence), _fmt(m.tv_energy), m.salient_components])
    return buf.getvalue()


def montage(images, columns: int | None = None, gap: int = 2) -> np.ndarray:
    """Tile equally sized images into one grid, background black."""
    images = [np.asarray(im, dtype=np.float64) for im in images]
    if not images:
        raise ValueError("montage needs at least one image")
    h, w, c = images[0].shape
    n = len(images)
    cols = columns or math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    out = np.zeros((rows * h + (rows - 1) * gap, cols * w + (cols - 1) * gap, c))
    for k, im in enumerate(images):
        if im.shape != (h, w, c):
            raise ValueError("montage images must share one shape")
        r, q = divmod(k, cols)
        out[r * (h + gap) : r * (h + gap) + h, q * (w + gap) : q * (w + gap) + w] = im
    return out


def emit_report(runs, out_dir, images=None, columns=None) -> dict:
    """Write ``report.csv`` and, if ``images`` (run id -> image) are given,
    ``montage.png`` with cells in table order."""
    runs = list(runs)
    if not runs:
        raise ValueError("no runs to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = out_dir / "report.csv"
    table.write_text(report_table(runs))
    paths = {"table": table}
    if images is not None:
        order = sorted(runs, key=lambda m: (m.class_id, MODE_ORDER.get(m.mode, 99), m.mode, m.run_id))
        grid = montage([images[m.run_id] for m in order], columns)
        paths["montage"] = out_dir / "montage.png"
        write_image(grid, paths["montage"])
    return paths


def metrics_to_dict(m: RunMetrics) -> dict:
    return asdict(m)


def metrics_from_dict(d: dict) -> RunMetrics:
    return RunMetrics(**d)


__all__ = [
    "RunMetrics", "confidence_metrics", "salient_components", "count_components", "run_metrics",
    "report_table", "montage", "emit_report", "metrics_to_dict", "metrics_from_dict",
]
