"""Random law generation, dataset sampling, and plug-in estimation.

All randomness flows through numpy's PCG64 generator seeded explicitly, so
every artifact is reproducible from ``(seed, arguments)`` alone; datasets
record the seed they were drawn with.

Sampling follows the causal ordering of the model: level, then trial
participation, then intention (independent of participation within a
level), then stratum, then assignment (a coin inside the trial, the
intention outside), then the outcome the stratum dictates for the
received treatment.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import FileFormatError, PositivityError
from .laws import FullLaw, ObservedLaw, potential_outcome, validate_full_law, validate_observed_law

BIT_GENERATOR = "pcg64"


def random_law(seed: int, n_levels: int = 1, confounding: bool = True) -> FullLaw:
    """A random valid full law, deterministic in ``seed``.

    Stratum vectors are four independent positive weights normalized to
    sum to one, kept away from the simplex boundary so conditional
    quantities stay well defined in sweeps; intention, participation and
    allocation probabilities are likewise floored so no group a plug-in
    estimator conditions on is ever near-empty.  With ``confounding`` off
    the stratum law is forced identical across intention arms.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be at least 1")
    rng = np.random.default_rng(seed)
    levels = tuple(f"l{i}" for i in range(n_levels))

    weights = rng.uniform(0.1, 1.0, size=n_levels)
    p_level = {l: float(w / weights.sum()) for l, w in zip(levels, weights)}

    p_astar = {l: float(rng.uniform(0.2, 0.8)) for l in levels}
    p_r1 = {l: float(rng.uniform(0.35, 0.65)) for l in levels}
    p_treat = {l: float(rng.uniform(0.35, 0.65)) for l in levels}

    def strata_vector() -> tuple[float, float, float, float]:
        w = rng.uniform(0.05, 1.0, size=4)
        w = w / w.sum()
        return tuple(float(v) for v in w)  # type: ignore[return-value]

    p_strata: dict[tuple[str, int], tuple[float, float, float, float]] = {}
    for l in levels:
        if confounding:
            p_strata[(l, 1)] = strata_vector()
            p_strata[(l, 0)] = strata_vector()
        else:
            shared = strata_vector()
            p_strata[(l, 1)] = shared
            p_strata[(l, 0)] = shared

    law = FullLaw(levels=levels, p_level=p_level, p_astar=p_astar,
                  p_strata=p_strata, p_r1=p_r1, p_treat=p_treat)
    return validate_full_law(law)


@dataclass(frozen=True)
class Dataset:
    """Sampled rows ``(R, L, A, Y)`` with optional oracle columns ``(A*, S)``.

    Levels are carried as an index array plus the label tuple; oracle
    columns exist only when the dataset was drawn in oracle mode.
    """

    levels: tuple[str, ...]
    r: np.ndarray
    level_idx: np.ndarray
    a: np.ndarray
    y: np.ndarray
    astar: np.ndarray | None
    s: np.ndarray | None
    seed: int | None
    bit_generator: str = BIT_GENERATOR

    @property
    def n(self) -> int:
        return int(self.r.shape[0])

    @property
    def has_oracle(self) -> bool:
        return self.astar is not None

    def level_labels(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=object)[self.level_idx]


def sample_dataset(law: FullLaw, n: int, seed: int, oracle: bool = False) -> Dataset:
    """Draw ``n`` independent rows from the observed-data law of ``law``."""
    validate_full_law(law)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    levels = law.levels
    k = len(levels)

    p_level = np.array([law.p_level[l] for l in levels])
    p_level = p_level / p_level.sum()
    p_r1 = np.array([law.p_r1[l] for l in levels])
    p_astar = np.array([law.p_astar[l] for l in levels])
    p_treat = np.array([law.p_treat[l] for l in levels])
    # cumulative stratum laws indexed [level, astar, stratum]
    cum = np.cumsum(np.array([[law.p_strata[(l, astar)] for astar in (0, 1)]
                              for l in levels]), axis=2)

    li = rng.choice(k, size=n, p=p_level)
    r = (rng.random(n) < p_r1[li]).astype(np.int8)
    astar = (rng.random(n) < p_astar[li]).astype(np.int8)
    u_s = rng.random(n)
    rows = cum[li, astar.astype(int)]
    s = 1 + np.minimum((u_s[:, None] >= rows).sum(axis=1), 3).astype(np.int8)
    coin = (rng.random(n) < p_treat[li]).astype(np.int8)
    a = np.where(r == 1, coin, astar).astype(np.int8)

    y1 = np.isin(s, (1, 3)).astype(np.int8)
    y0 = np.isin(s, (2, 3)).astype(np.int8)
    y = np.where(a == 1, y1, y0).astype(np.int8)

    return Dataset(levels=levels, r=r, level_idx=li.astype(np.int64), a=a, y=y,
                   astar=astar if oracle else None, s=s if oracle else None, seed=seed)


def estimate_observed_law(data: Dataset, smoothing: float = 0.0) -> ObservedLaw:
    """Plug-in observed law from cell frequencies.

    ``smoothing`` adds that count to every ``(y, a)`` cell within each
    ``(level, r)`` block before normalizing.  With zero smoothing, an
    empty block or an empty trial arm is an error naming the cell.
    """
    if smoothing < 0.0:
        raise ValueError("smoothing must be non-negative")
    levels = data.levels
    k = len(levels)
    # flat code over (level, r, y, a)
    code = ((data.level_idx * 2 + data.r) * 2 + data.y) * 2 + data.a
    counts = np.bincount(code, minlength=k * 8).reshape(k, 2, 2, 2).astype(float)

    p_level = {}
    p_r1 = {}
    p_ya: dict[tuple[str, int], dict[tuple[int, int], float]] = {}
    n = data.n
    for i, l in enumerate(levels):
        level_total = counts[i].sum()
        p_level[l] = level_total / n
        p_r1[l] = (counts[i, 1].sum() / level_total) if level_total > 0 else 0.0
        for r in (0, 1):
            block = counts[i, r] + smoothing
            total = block.sum()
            if total <= 0.0:
                raise PositivityError(f"empty block (level {l!r}, R={r})")
            if r == 1 and smoothing == 0.0:
                for a in (0, 1):
                    if block[:, a].sum() == 0.0:
                        raise PositivityError(f"empty arm (level {l!r}, R=1, A={a})")
            p_ya[(l, r)] = {(y, a): float(block[y, a] / total)
                            for y in (0, 1) for a in (0, 1)}

    obs = ObservedLaw(levels=levels, p_level=p_level, p_r1=p_r1, p_ya=p_ya)
    return validate_observed_law(obs)


# ---------------------------------------------------------------------------
# CSV round-trip.  Header `R,L,A,Y` (+`,ASTAR,S` in oracle mode); a leading
# '#' comment records the generator and seed.
# ---------------------------------------------------------------------------

def format_dataset_csv(data: Dataset) -> str:
    out = io.StringIO()
    if data.seed is not None:
        out.write(f"# {data.bit_generator} seed={data.seed} n={data.n}\n")
    header = "R,L,A,Y"
    if data.has_oracle:
        header += ",ASTAR,S"
    out.write(header + "\n")
    labels = data.level_labels()
    if data.has_oracle:
        for i in range(data.n):
            out.write(f"{data.r[i]},{labels[i]},{data.a[i]},{data.y[i]},"
                      f"{data.astar[i]},{data.s[i]}\n")
    else:
        for i in range(data.n):
            out.write(f"{data.r[i]},{labels[i]},{data.a[i]},{data.y[i]}\n")
    return out.getvalue()


def parse_dataset_csv(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise FileFormatError("dataset file has no header")
    header = [h.strip().upper() for h in lines[0].split(",")]
    if header[:4] != ["R", "L", "A", "Y"]:
        raise FileFormatError("dataset header must start with R,L,A,Y")
    oracle = header == ["R", "L", "A", "Y", "ASTAR", "S"]
    if not oracle and header != ["R", "L", "A", "Y"]:
        raise FileFormatError(f"unrecognized dataset header {lines[0]!r}")

    width = 6 if oracle else 4
    r_col, label_col, a_col, y_col = [], [], [], []
    astar_col, s_col = [], []
    for lineno, row in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in row.split(",")]
        if len(parts) != width:
            raise FileFormatError(f"line {lineno}: expected {width} fields, got {len(parts)}")
        try:
            r_col.append(int(parts[0]))
            a_col.append(int(parts[2]))
            y_col.append(int(parts[3]))
            if oracle:
                astar_col.append(int(parts[4]))
                s_col.append(int(parts[5]))
        except ValueError:
            raise FileFormatError(f"line {lineno}: non-integer coded field") from None
        label_col.append(parts[1])
    if not r_col:
        raise FileFormatError("dataset file has no rows")

    levels = tuple(sorted(set(label_col)))
    index = {l: i for i, l in enumerate(levels)}
    li = np.array([index[l] for l in label_col], dtype=np.int64)

    def arr(values: list[int], name: str, allowed: tuple[int, ...]) -> np.ndarray:
        out = np.array(values, dtype=np.int8)
        bad = ~np.isin(out, allowed)
        if bad.any():
            raise FileFormatError(f"column {name} contains values outside {allowed}")
        return out

    return Dataset(
        levels=levels,
        r=arr(r_col, "R", (0, 1)),
        level_idx=li,
        a=arr(a_col, "A", (0, 1)),
        y=arr(y_col, "Y", (0, 1)),
        astar=arr(astar_col, "ASTAR", (0, 1)) if oracle else None,
        s=arr(s_col, "S", (1, 2, 3, 4)) if oracle else None,
        seed=None,
    )


def read_dataset_file(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dataset_csv(fh.read())


def write_dataset_file(data: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_dataset_csv(data))


def oracle_check(data: Dataset) -> None:
    """Structural checks available only on oracle-mode datasets.

    Outside the trial the received treatment must equal the intention, and
    every outcome must match the potential outcome the stratum dictates.
    """
    if not data.has_oracle:
        raise ValueError("dataset has no oracle columns")
    obs_rows = data.r == 0
    if np.any(data.a[obs_rows] != data.astar[obs_rows]):
        raise AssertionError("A != A* in an observational row")
    expected = np.array([potential_outcome(int(s), int(a))
                         for s, a in zip(data.s, data.a)], dtype=np.int8)
    if np.any(expected != data.y):
        raise AssertionError("Y inconsistent with stratum and received treatment")
