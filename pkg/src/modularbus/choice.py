"""Random-utility transfer willingness: logit closed form, Gumbel draws, SAA.

A passenger asked to transfer compares two alternatives: staying on the
current bus (deterministic utility 0) and transferring (deterministic
utility ``-cons + ic_s`` for the offered incentive level s). Both carry
additive standard-Gumbel noise, which gives the closed-form binary logit
willingness. The sample-average approximation replaces that probability by
the fraction of pre-drawn noise scenarios in which transferring wins, which
is what the linearized design model embeds as constants.

Alternative index 1 is stay, 2 is transfer, throughout this module.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

# Generator pinned by name so draws are reproducible across platforms: the
# model embeds the draws as constants, and a replay must rebuild them bit-exactly.
GENERATOR = "pcg64"
STREAM_ORDER = "station-major, then bus, then draw, then alternative (stay=1, transfer=2)"


@dataclass(frozen=True)
class UtilitySpec:
    cons: float  # reluctance constant; transfer utility is -cons + ic_s
    incentive_costs: tuple[float, ...]  # ic_s by 1-based level s

    def transfer_utility(self, s: int) -> float:
        """Deterministic transfer utility under 1-based incentive level s."""
        return -self.cons + self.incentive_costs[s - 1]


@dataclass(frozen=True)
class DrawSet:
    """Standard-Gumbel noise, shape (stations, buses, draws, 2)."""

    xi: np.ndarray
    seed: int

    def __post_init__(self):
        if self.xi.ndim != 4 or self.xi.shape[3] != 2:
            raise ValueError("xi must have shape (stations, buses, draws, 2)")
        if not np.isfinite(self.xi).all():
            raise ValueError("draws must be finite")
        self.xi.setflags(write=False)

    @property
    def n_draws(self) -> int:
        return self.xi.shape[2]


def gumbel_ppf(u) -> np.ndarray:
    """Inverse CDF of the standard Gumbel: -ln(-ln(u))."""
    return -np.log(-np.log(u))


def logit_probability(spec: UtilitySpec, s: int) -> float:
    """Closed-form willingness to transfer under 1-based incentive level s.

    Binary logit of the transfer utility against the zero stay utility:
    exp(v) / (exp(v) + 1) with v = -cons + ic_s. Always strictly inside (0, 1).
    """
    v = spec.transfer_utility(s)
    # evaluate in the numerically stable branch
    if v >= 0:
        return 1.0 / (1.0 + np.exp(-v))
    e = np.exp(v)
    return float(e / (e + 1.0))


def sample_draws(seed: int, n_draws: int, n_stations: int, n_buses: int) -> DrawSet:
    """Draw i.i.d. standard Gumbel noise for every (station, bus, draw, alternative).

    Uniforms come from a PCG64 generator in the documented stream order and
    pass through the inverse CDF; a zero uniform (possible at float
    resolution) is nudged to the smallest positive normal so every draw is
    finite.
    """
    if n_draws < 1:
        raise ValueError("need at least one draw")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(size=(n_stations, n_buses, n_draws, 2))
    u = np.maximum(u, np.finfo(float).tiny)
    return DrawSet(xi=gumbel_ppf(u), seed=seed)


def saa_probability(draws: DrawSet, spec: UtilitySpec, s: int, m: int, k: int) -> float:
    """Fraction of draws in which transferring beats staying at (station m, bus k).

    Exact ties count as staying: the estimate never overstates willingness,
    and ties have probability zero under the continuous noise anyway.
    """
    v = spec.transfer_utility(s)
    xi = draws.xi[m, k]
    wins = (v + xi[:, 1]) > xi[:, 0]
    return float(np.count_nonzero(wins)) / draws.n_draws


def transfer_wins(draws: DrawSet, spec: UtilitySpec, s: int, m: int, k: int) -> np.ndarray:
    """Per-draw booleans: transfer strictly beats stay under level s."""
    v = spec.transfer_utility(s)
    xi = draws.xi[m, k]
    return (v + xi[:, 1]) > xi[:, 0]


def export_draws(draws: DrawSet) -> str:
    """Tabular text dump (one row per station, bus, draw, alternative, value).

    Together with the recorded seed this lets a solve be replayed exactly;
    :func:`parse_draws` reads the format back.
    """
    out = io.StringIO()
    out.write(f"# seed={draws.seed} generator={GENERATOR}\n")
    out.write("m\tk\td\tc\tvalue\n")
    n_m, n_k, n_d, _ = draws.xi.shape
    for m in range(n_m):
        for k in range(n_k):
            for d in range(n_d):
                for c in (1, 2):
                    out.write(f"{m}\t{k}\t{d}\t{c}\t{float(draws.xi[m, k, d, c - 1])!r}\n")
    return out.getvalue()


def parse_draws(text: str) -> DrawSet:
    """Inverse of :func:`export_draws`."""
    lines = text.strip().splitlines()
    seed = 0
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            if tok.startswith("seed="):
                seed = int(tok[5:])
        lines = lines[1:]
    if lines and lines[0].startswith("m\t"):
        lines = lines[1:]
    rows = [line.split("\t") for line in lines if line]
    dims = [0, 0, 0]
    for m, k, d, _c, _v in rows:
        dims = [max(dims[0], int(m) + 1), max(dims[1], int(k) + 1), max(dims[2], int(d) + 1)]
    xi = np.zeros((*dims, 2))
    for m, k, d, c, v in rows:
        xi[int(m), int(k), int(d), int(c) - 1] = float(v)
    return DrawSet(xi=xi, seed=seed)
