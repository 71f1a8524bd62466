"""CSV/JSON artifacts and the manifest that lists them."""

import contextlib
import csv
import datetime
import hashlib
import json
import logging
import platform
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence

import numpy as np
import scipy

from pdcspy.config import RunConfig, config_hash
from pdcspy.exceptions import ValidationError
from pdcspy.meanfield import FieldState
from pdcspy.version import VERSION

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
DIAGNOSTICS = "diagnostics.log"


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        raise ValidationError("complex values must be split into real and imaginary columns")
    return str(value)


def _reraise_with_path(exc: OSError, path: Path):
    raise type(exc)(exc.errno, exc.strerror or str(exc), str(path)) from exc


def _check_row(header: Sequence[str], row: Sequence[Any], index: int) -> None:
    if len(row) != len(header):
        raise ValidationError(f"row {index} has {len(row)} cells, header has {len(header)}")


def emit_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a rectangular table as UTF-8 CSV with floats at full precision."""
    path = Path(path)
    rows = list(rows)
    for i, row in enumerate(rows):
        _check_row(header, row, i)
    try:
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_cell(v) for v in row] for row in rows)
    except OSError as exc:
        _reraise_with_path(exc, path)
    return path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    return value


def emit_json(path, data) -> Path:
    """Write ``data`` with sorted keys; non-finite floats become ``null``."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as f:
            json.dump(_jsonable(data), f, sort_keys=True, indent=2)
            f.write("\n")
    except OSError as exc:
        _reraise_with_path(exc, path)
    return path


def load_json(path):
    with Path(path).open(encoding="utf-8") as f:
        return json.load(f)


def load_state_csv(path) -> FieldState:
    """Read a spectrum written by the ``steady`` command (columns ``mu,re,im``)."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or not {"mu", "re", "im"} <= set(reader.fieldnames):
            raise ValidationError(f"{path}: expected columns mu,re,im")
        rows = sorted(((int(r["mu"]), float(r["re"]), float(r["im"])) for r in reader), key=lambda r: r[0])
    mu = [r[0] for r in rows]
    n = len(mu)
    if n == 0 or mu != list(range(-(n // 2), n - n // 2)):
        raise ValidationError(f"{path}: modes must cover -N/2 .. N/2-1 exactly once")
    return FieldState(np.array([complex(r[1], r[2]) for r in rows]))


def state_rows(state: FieldState) -> List[List[Any]]:
    return [[int(m), float(a.real), float(a.imag)] for m, a in zip(state.mu, state.spectrum)]


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


class _CsvStream:
    def __init__(self, f, header: Sequence[str]):
        self._writer = csv.writer(f, lineterminator="\n")
        self._header = list(header)
        self._f = f
        self._count = 0
        self._writer.writerow(self._header)

    def write(self, row: Sequence[Any]) -> None:
        _check_row(self._header, row, self._count)
        self._writer.writerow([_cell(v) for v in row])
        self._f.flush()
        self._count += 1


class ResultBundle:
    """Output directory of one run.

    Used as a context manager: entering creates the directory and starts ``diagnostics.log``; leaving writes
    ``manifest.json`` listing every file in the directory with its SHA-256 digest.

    :param directory: Output directory, created when missing
    :param command: Subcommand being run, recorded in the manifest
    :param config: The validated run configuration
    """

    def __init__(self, directory, command: str, config: Optional[RunConfig] = None):
        self.directory = Path(directory)
        self.command = command
        self.config = config or RunConfig()
        self.failures: List[Dict[str, str]] = []
        self.extra: Dict[str, Any] = {}
        self.status: Optional[str] = None
        self.started: Optional[str] = None
        self.finished: Optional[str] = None
        self._handler: Optional[logging.Handler] = None
        self._previous_level = logging.NOTSET

    def path(self, name: str) -> Path:
        return self.directory / name

    def __enter__(self) -> "ResultBundle":
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            _reraise_with_path(exc, self.directory)
        self._handler = logging.FileHandler(self.path(DIAGNOSTICS), mode="w", encoding="utf-8")
        self._handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        package_logger = logging.getLogger("pdcspy")
        package_logger.addHandler(self._handler)
        self._previous_level = package_logger.level
        if package_logger.getEffectiveLevel() > logging.INFO:
            package_logger.setLevel(logging.INFO)
        self.started = _now()
        logger.info("run %s writing to %s", self.command, self.directory)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        if exc_value is not None:
            self.record_failure(self.command, f"{type(exc_value).__name__}: {exc_value}")
            self.status = "failed"
        elif self.failures:
            self.status = "partial"
        else:
            self.status = "ok"
        self.finished = _now()
        if self._handler is not None:
            package_logger = logging.getLogger("pdcspy")
            package_logger.removeHandler(self._handler)
            package_logger.setLevel(self._previous_level)
            self._handler.close()
            self._handler = None
        self.write_manifest()
        return False

    def record_failure(self, where: str, message: str) -> None:
        logger.warning("failure in %s: %s", where, message)
        self.failures.append({"where": str(where), "error": message})

    def emit_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return emit_csv(self.path(name), header, rows)

    def emit_json(self, name: str, data) -> Path:
        return emit_json(self.path(name), data)

    @contextlib.contextmanager
    def stream_csv(self, name: str, header: Sequence[str]) -> Iterator[_CsvStream]:
        """Write rows as they are produced; a crashed run keeps the rows written so far."""
        path = self.path(name)
        try:
            f = path.open("w", encoding="utf-8", newline="")
        except OSError as exc:
            _reraise_with_path(exc, path)
        with f:
            yield _CsvStream(f, header)

    def files(self) -> Dict[str, Optional[str]]:
        """Every file below the directory with its digest; the manifest itself maps to ``None``."""
        listing: Dict[str, Optional[str]] = {MANIFEST: None}
        for path in sorted(self.directory.rglob("*")):
            if path.is_file():
                name = path.relative_to(self.directory).as_posix()
                if name != MANIFEST:
                    listing[name] = _sha256(path)
        return listing

    @property
    def manifest(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config_hash": config_hash(self.config),
            "config": self.config.model_dump(mode="json"),
            "versions": {
                "pdcspy": VERSION,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "started": self.started,
            "finished": self.finished,
            "status": self.status,
            "failures": self.failures,
            "extra": self.extra,
            "files": self.files(),
        }

    def write_manifest(self) -> Path:
        return emit_json(self.path(MANIFEST), self.manifest)
