"""Count datasets: the built-in earthquake series and plain-text loaders."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

# yearly counts of magnitude >= 7 earthquakes worldwide, 1900-2021
EARTHQUAKES = (
    13, 14, 8, 10, 16, 26, 32, 27, 18, 32,
    36, 24, 22, 23, 22, 18, 25, 21, 21, 14,
    8, 11, 14, 23, 18, 17, 19, 20, 22, 19,
    13, 26, 13, 14, 22, 24, 21, 22, 26, 21,
    23, 24, 27, 41, 31, 27, 35, 26, 28, 36,
    39, 21, 17, 22, 17, 19, 15, 34, 10, 15,
    22, 18, 15, 20, 15, 22, 19, 16, 30, 27,
    29, 23, 20, 16, 21, 21, 25, 16, 18, 15,
    18, 14, 10, 15, 8, 15, 6, 11, 8, 7,
    18, 16, 13, 12, 13, 20, 15, 16, 12, 18,
    15, 16, 13, 15, 16, 11, 11, 18, 12, 17,
    24, 20, 14, 19, 12, 19, 16, 7, 17, 10,
    9, 19,
)
BUILTINS = {"earthquakes": EARTHQUAKES}


@dataclass(frozen=True)
class CountDataset:
    observations: np.ndarray
    source: str

    def __len__(self):
        return self.observations.size


def _parse_int(tok: str, lineno: int, path) -> int:
    try:
        val = int(tok)
    except ValueError:
        raise ValueError(f"{path}:{lineno}: not an integer: {tok!r}") from None
    if val < 0:
        raise ValueError(f"{path}:{lineno}: negative value {val}")
    return val


def parse_counts(text: str, source: str = "<string>") -> np.ndarray:
    """Parse one observation per line, or ``k count`` pairs (not mixed).

    Blank lines and ``#`` comments are ignored.
    """
    obs = []
    form = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) not in (1, 2) or (form is not None and len(toks) != form):
            raise ValueError(f"{source}:{lineno}: expected one value or a 'k count' pair consistently, got {raw!r}")
        form = len(toks)
        vals = [_parse_int(t, lineno, source) for t in toks]
        if form == 1:
            obs.append(vals[0])
        else:
            obs.extend([vals[0]] * vals[1])
    return np.array(obs, dtype=np.int64)


def load_counts(path_or_builtin: str) -> CountDataset:
    """Load a count file, or a built-in dataset by name (``"earthquakes"``)."""
    if path_or_builtin in BUILTINS:
        return CountDataset(np.array(BUILTINS[path_or_builtin], dtype=np.int64), path_or_builtin)
    path = Path(path_or_builtin)
    if not path.is_file():
        raise FileNotFoundError(f"no such file or built-in dataset: {path_or_builtin!r}")
    return CountDataset(parse_counts(path.read_text(), str(path)), str(path))
