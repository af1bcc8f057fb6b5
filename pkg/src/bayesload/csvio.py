"""CSV readers and writers for datasets, chains and summaries.

Every file written here starts with one ``#`` comment line carrying
provenance (package version plus caller-supplied keys such as seed, M, m).
Writes go to a temporary file in the target directory and are moved into
place with :func:`os.replace`.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .chain import Chain
from .errors import InvalidParameterError
from .motor import RECORD_FIELDS, ImDataset
from .zipload import ZipDataset


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def provenance_line(meta: dict) -> str:
    from . import __version__

    items = {"bayesload": __version__, **meta}
    return "# " + " ".join(f"{k}={v}" for k, v in items.items())


def write_csv(path, header, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(provenance_line(meta or {}) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(buf.getvalue())
        os.chmod(tmp, 0o644)  # mkstemp creates owner-only files
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_table(path, expected_header) -> np.ndarray:
    """Numeric body of a CSV whose header must equal ``expected_header``."""
    path = Path(path)
    with path.open(newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InvalidParameterError(f"{path}: empty file")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    if header != list(expected_header):
        raise InvalidParameterError(f"{path}: header {header} != expected {list(expected_header)}")
    try:
        body = [[float(c) for c in row] for row in reader if row]
    except ValueError as exc:
        raise InvalidParameterError(f"{path}: {exc}") from None
    return np.array(body, dtype=float).reshape(-1, len(expected_header))


def write_zip_dataset(path, data: ZipDataset, meta=None) -> Path:
    return write_csv(path, ("x", "y"), zip(data.x, data.y), meta)


def read_zip_dataset(path) -> ZipDataset:
    t = read_table(path, ("x", "y"))
    return ZipDataset(t[:, 0], t[:, 1])


def write_im_dataset(path, data: ImDataset, meta=None) -> Path:
    return write_csv(path, RECORD_FIELDS, data.to_array(), meta)


def read_im_dataset(path) -> ImDataset:
    return ImDataset.from_array(read_table(path, RECORD_FIELDS))


def write_chain(path, chain: Chain, meta=None) -> Path:
    """All ``M`` rows with a leading ``burn_in`` flag column (1 = discarded)."""
    flags = (np.arange(chain.total) < chain.burn_in).astype(int)
    rows = ([int(f), *r] for f, r in zip(flags, chain.samples))
    return write_csv(path, ("burn_in", *chain.param_names), rows, meta)


def write_summary(path, summaries, meta=None) -> Path:
    rows = ((s.name, s.mean, s.std, *s.credible_interval) for s in summaries)
    return write_csv(path, ("param", "mean", "std", "ci_lo", "ci_hi"), rows, meta)


def write_histogram(path, summary, meta=None) -> Path:
    edges, counts = summary.histogram
    rows = zip(edges[:-1], edges[1:], (int(c) for c in counts))
    return write_csv(path, ("bin_lo", "bin_hi", "count"), rows, meta)
