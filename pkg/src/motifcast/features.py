"""Per-event motif-posterior features and their sparse export format.

For every event, the candidates are the open instances it could extend;
their transition posteriors are normalized to sum to one and accumulated
by motif type. Cold events (no candidates) produce all-zero rows. The
matrix is |events| x |vocabulary| and is written as a triplet text file
with a companion vocabulary listing.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .ingest import TemporalGraph
from .motifs import MotifVocabulary, vocabulary, write_vocabulary
from .scoring import IMPOSSIBLE, hot_log_posterior
from .stats import MtmStats, scan_stream

DENSE_ROW_CEILING = 20000


class ExportError(OSError):
    """A sink failed mid-write; bytes_written counts what landed."""

    def __init__(self, message: str, bytes_written: int) -> None:
        super().__init__(message)
        self.bytes_written = bytes_written


@dataclass(frozen=True)
class FeatureMatrix:
    """Sparse row-normalized feature matrix.

    entries are (row, col, value) sorted by row then col, each (row, col)
    once, values in (0, 1]; every row that has entries sums to 1 within
    1e-9. vocab_ref names the vocabulary file the columns index.
    """

    rows: int
    cols: int
    entries: tuple[tuple[int, int, float], ...]
    vocab_ref: str


def build_feature_matrix(
    g: TemporalGraph,
    stats: MtmStats,
    indexing: str = "source",
    vocab: MotifVocabulary | None = None,
    vocab_ref: str | None = None,
) -> FeatureMatrix:
    """Run the feature pass over g under the model in stats.

    The pass starts from an empty pool and mirrors the training scan, so
    with stats built from the same stream every hot event yields a nonzero
    row. Normalized posterior mass lands in the candidate's current type
    column by default; ``indexing="target"`` uses the extended type
    instead. Zero-prior candidates contribute no mass but their instances
    are still replaced, so pool evolution never depends on the weights.
    """
    if indexing not in ("source", "target"):
        raise ValueError(f"indexing must be 'source' or 'target', got {indexing!r}")
    if vocab is None:
        vocab = vocabulary(stats.ell_max)
    by_target = indexing == "target"
    entries: list[tuple[int, int, float]] = []

    def accumulate(i, ev, exts):
        if not exts:
            return
        t = ev[2]
        scores = [
            hot_log_posterior(old.type_id, new.type_id, t - old.last_time, stats).log_posterior
            for old, new in exts
        ]
        peak = max(scores)
        if peak == IMPOSSIBLE:
            return
        weights = [0.0 if s == IMPOSSIBLE else math.exp(s - peak) for s in scores]
        total = sum(weights)
        row: dict[int, float] = {}
        for (old, new), w in zip(exts, weights):
            if w == 0.0:
                continue
            col = new.type_id if by_target else old.type_id
            row[col] = row.get(col, 0.0) + w / total
        for col in sorted(row):
            entries.append((i, col, row[col]))

    scan_stream(g, stats.delta_c, stats.ell_max, vocab, accumulate)
    ref = vocab_ref if vocab_ref is not None else f"motif-vocab-l{stats.ell_max}.tsv"
    return FeatureMatrix(len(g), vocab.size, tuple(entries), ref)


def export_sparse(matrix: FeatureMatrix, destination) -> int:
    """Write the triplet text form; returns the byte count written.

    Format: a `#rows cols vocab_ref` header, then one `row col value` line
    per entry (rows ascending, cols ascending within a row) with 9
    significant digits. ``destination`` may be a path or a writable text
    sink.

    Raises:
        ExportError: the sink failed; .bytes_written is the partial count.
    """
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    written = 0
    fh = None
    try:
        fh = open(destination, "w", encoding="ascii", newline="\n") if own else destination
        line = f"#{matrix.rows} {matrix.cols} {matrix.vocab_ref}\n"
        fh.write(line)
        written += len(line)
        for row, col, value in matrix.entries:
            line = f"{row} {col} {value:.9g}\n"
            fh.write(line)
            written += len(line)
    except OSError as exc:
        raise ExportError(f"export failed after {written} bytes: {exc}", written) from exc
    finally:
        if own and fh is not None:
            fh.close()
    return written


def parse_sparse(source) -> FeatureMatrix:
    """Read a file produced by export_sparse."""
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    fh = open(source, encoding="ascii") if own else source
    try:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError("missing header line")
        rows_s, cols_s, ref = header[1:].rstrip("\n").split(" ", 2)
        entries = []
        for line in fh:
            r, c, v = line.split()
            entries.append((int(r), int(c), float(v)))
    finally:
        if own:
            fh.close()
    return FeatureMatrix(int(rows_s), int(cols_s), tuple(entries), ref)


def export_dense(matrix: FeatureMatrix, destination, max_rows: int = DENSE_ROW_CEILING) -> int:
    """Write a dense CSV (one line per event); small matrices only.

    Raises:
        ValueError: matrix.rows exceeds max_rows.
    """
    if matrix.rows > max_rows:
        raise ValueError(f"dense export capped at {max_rows} rows, matrix has {matrix.rows}")
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    written = 0
    fh = None
    try:
        fh = open(destination, "w", encoding="ascii", newline="\n") if own else destination
        row_vals = ["0"] * matrix.cols
        pos = 0
        n = len(matrix.entries)
        for row in range(matrix.rows):
            filled = []
            while pos < n and matrix.entries[pos][0] == row:
                _, col, value = matrix.entries[pos]
                row_vals[col] = f"{value:.9g}"
                filled.append(col)
                pos += 1
            line = ",".join(row_vals) + "\n"
            fh.write(line)
            written += len(line)
            for col in filled:
                row_vals[col] = "0"
    except OSError as exc:
        raise ExportError(f"export failed after {written} bytes: {exc}", written) from exc
    finally:
        if own and fh is not None:
            fh.close()
    return written


def export_features(matrix: FeatureMatrix, path, vocab: MotifVocabulary) -> tuple[str, str]:
    """Write the sparse matrix at path and its vocabulary alongside.

    The companion file is `<path>.vocab`; the matrix header references its
    basename. Returns (matrix path, vocabulary path).
    """
    vocab_path = f"{os.fspath(path)}.vocab"
    named = FeatureMatrix(matrix.rows, matrix.cols, matrix.entries, os.path.basename(vocab_path))
    export_sparse(named, path)
    write_vocabulary(vocab, vocab_path)
    return os.fspath(path), vocab_path
