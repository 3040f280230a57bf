"""Benchmark model ingestion: Matrix Market triples, dense text, builtins.

A model lives in a directory holding one file per matrix, stem ``a``/``b``/``c``
(case-insensitive), as Matrix Market (coordinate or array) or delimited dense
text.  The order-1006 SISO test model with three spiral blocks and a fast
diagonal tail ("fom") is generated in code; the clamped-beam and space-station
models must be fetched as data files (see README) and are reported as
unavailable when absent.
"""

import json
import os
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .exceptions import BenchmarkUnavailable, DimensionMismatch, ParseError
from .systems import ReducedModel, StateSpaceSystem

__all__ = [
    "available_data_dirs",
    "fom_system",
    "load_model",
    "load_reduced_model",
    "load_system",
    "save_system",
]

_MATRIX_EXTENSIONS = (".mtx", ".mtx.gz", ".mm", ".txt", ".dat", ".csv")

#: Benchmark names that require external data files.
FILE_BENCHMARKS = {
    "beam": "clamped beam model, order 348, SISO",
    "iss": "space station model, order 270, 3 inputs / 3 outputs",
}


def fom_system():
    """Built-in order-1006 SISO test model.

    Three weakly damped 2x2 blocks at frequencies 100/200/400 plus a
    diagonal branch with poles -1..-1000; input and output vectors carry
    weight 10 on the block states and 1 elsewhere.
    """
    n = 1006
    a = np.zeros((n, n))
    a[0:2, 0:2] = [[-1.0, 100.0], [-100.0, -1.0]]
    a[2:4, 2:4] = [[-1.0, 200.0], [-200.0, -1.0]]
    a[4:6, 4:6] = [[-1.0, 400.0], [-400.0, -1.0]]
    a[6:, 6:] = np.diag(-np.arange(1.0, 1001.0))
    b = np.ones((n, 1))
    b[:6] = 10.0
    return StateSpaceSystem(a, b, b.T, label="fom")


def _first_bad_line(path):
    """Best-effort locator of the first unparsable line of a text matrix file."""
    try:
        with open(path, "r", errors="replace") as handle:
            for lineno, line in enumerate(handle, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("%") or stripped.startswith("#"):
                    continue
                for token in stripped.split():
                    try:
                        float(token)
                    except ValueError:
                        return lineno
    except OSError:
        return None
    return None


def _read_matrix(path):
    path = Path(path)
    if not path.exists():
        raise ParseError(f"matrix file not found: {path}", path=str(path))
    try:
        matrix = scipy.io.mmread(path)
    except Exception:
        try:
            matrix = np.loadtxt(path, ndmin=2)
        except Exception as exc:
            raise ParseError(
                f"could not parse {path} as Matrix Market or delimited text: {exc}",
                path=str(path),
                line=_first_bad_line(path),
            ) from exc
    if scipy.sparse.issparse(matrix):
        matrix = matrix.toarray()
    matrix = np.atleast_2d(np.asarray(matrix))
    if np.iscomplexobj(matrix):
        if np.any(matrix.imag != 0):
            raise ParseError(f"{path} holds complex entries", path=str(path))
        matrix = matrix.real
    return matrix.astype(float)


def _find_matrix_file(directory, stem):
    directory = Path(directory)
    for entry in sorted(directory.iterdir()):
        if not entry.is_file():
            continue
        name = entry.name.lower()
        base = name.split(".", 1)[0]
        if base == stem and name.endswith(tuple(_MATRIX_EXTENSIONS)):
            return entry
    return None


def load_system(path_spec, label=None):
    """Load (A, B, C) from a directory or an {'a','b','c'} path mapping.

    Matrix Market is tried first, delimited dense text as a fallback.
    Vectors stored one-dimensionally are reshaped to the orientation the
    state dimension dictates.
    """
    if isinstance(path_spec, dict):
        paths = {key.lower(): Path(value) for key, value in path_spec.items()}
        missing = {"a", "b", "c"} - set(paths)
        if missing:
            raise ParseError(f"path mapping lacks entries for {sorted(missing)}")
        name = label or paths["a"].parent.name
    else:
        directory = Path(path_spec)
        if not directory.is_dir():
            raise ParseError(f"model directory not found: {directory}", path=str(directory))
        paths = {}
        for stem in ("a", "b", "c"):
            found = _find_matrix_file(directory, stem)
            if found is None:
                raise ParseError(
                    f"no file with stem '{stem}' (extensions {_MATRIX_EXTENSIONS}) in {directory}",
                    path=str(directory),
                )
            paths[stem] = found
        name = label or directory.name
    a = _read_matrix(paths["a"])
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"A from {paths['a']} is not square: {a.shape}")
    n = a.shape[0]
    b = _orient(_read_matrix(paths["b"]), rows=n)
    c = _orient(_read_matrix(paths["c"]), cols=n)
    return StateSpaceSystem(a, b, c, label=name)


def _orient(matrix, rows=None, cols=None):
    """Transpose a loaded matrix when only the flipped orientation fits."""
    if rows is not None and matrix.shape[0] != rows and matrix.shape[1] == rows:
        return matrix.T
    if cols is not None and matrix.shape[1] != cols and matrix.shape[0] == cols:
        return matrix.T
    return matrix


def available_data_dirs():
    """Search roots for named benchmark data, in priority order."""
    dirs = []
    env = os.environ.get("MORTAU_DATA_DIR")
    if env:
        dirs.append(Path(env))
    dirs.append(Path.cwd() / "data")
    dirs.append(Path(__file__).resolve().parent.parent.parent / "data")
    return dirs


def load_model(source, label=None):
    """Resolve a CLI/spec model source: builtin name, data name, or path.

    ``fom`` is generated; other known names are searched for under the data
    roots (``MORTAU_DATA_DIR``, ``./data``); anything else is treated as a
    path for :func:`load_system`.
    """
    if isinstance(source, dict):
        return load_system(source, label=label)
    text = str(source)
    if text.lower() == "fom":
        return fom_system()
    candidate = Path(text)
    if candidate.exists():
        return load_system(candidate, label=label or candidate.name)
    if text.lower() in FILE_BENCHMARKS:
        for root in available_data_dirs():
            directory = root / text.lower()
            if directory.is_dir():
                return load_system(directory, label=text.lower())
        raise BenchmarkUnavailable(
            f"benchmark '{text}' ({FILE_BENCHMARKS[text.lower()]}) has no data files; "
            f"place Matrix Market files a.mtx/b.mtx/c.mtx under "
            f"{available_data_dirs()[0] / text.lower()} (see README)"
        )
    raise ParseError(f"unknown model source {text!r}: not a builtin name or existing path")


def save_system(system, directory):
    """Write a system as a Matrix Market triple plus a small metadata file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(directory / "a.mtx", system.a)
    scipy.io.mmwrite(directory / "b.mtx", system.b)
    scipy.io.mmwrite(directory / "c.mtx", system.c)
    meta = {"schema_version": "1", "label": system.label, "order": system.order}
    (directory / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return directory


def load_reduced_model(directory):
    """Load a stored reduced model written by :func:`save_system`."""
    system = load_system(directory)
    meta_path = Path(directory) / "meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        label = meta.get("label", system.label)
        system = StateSpaceSystem(system.a, system.b, system.c, label=label)
    return ReducedModel(system)
