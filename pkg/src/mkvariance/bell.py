"""Mermin-Klyshko Bell operators, canonical settings, and GHZ-family states.

The MK operator pair (B, B') of n qubits is built recursively from two
measurement directions per qubit:

    B_1 = a_1 . sigma,    B'_1 = a'_1 . sigma
    B_k = B_{k-1} (x) (a_k + a'_k)/2 . sigma  +  B'_{k-1} (x) (a_k - a'_k)/2 . sigma

with B'_k the same expression under a_j <-> a'_j everywhere.  Under local
realism the mean value of B_n is bounded by 1, while its operator norm is
2**((n-1)/2).

Operators are applied to state vectors matrix-free by propagating the pair
(B_k psi, B'_k psi) one qubit at a time, which costs O(n 2^n); explicit
matrices are only formed on demand for n <= DENSE_QUBIT_CAP.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import (
    DENSE_QUBIT_CAP,
    MAX_QUBITS,
    PureState,
    apply_single_qubit,
    kron,
    pauli_combination,
)

NORM_BOUND_SLACK = 1e-9
SPECTRAL_BUILD_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementSettings:
    """Two measurement directions per qubit: unit vectors a_j and a'_j in R^3."""

    n: int
    a: np.ndarray        # shape (n, 3)
    a_prime: np.ndarray  # shape (n, 3)

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"n={self.n} outside the supported range 1..{MAX_QUBITS}")
        for name in ("a", "a_prime"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.n, 3):
                raise ValueError(f"{name} must have shape ({self.n}, 3), got {arr.shape}")
            norms_sq = np.einsum("jk,jk->j", arr, arr)
            if np.max(np.abs(norms_sq - 1.0)) >= 1e-12:
                raise ValueError(f"{name} contains non-unit vectors")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_pairs(cls, pairs) -> "MeasurementSettings":
        """Build from a sequence of (a_j, a'_j) direction pairs."""
        a = np.array([p[0] for p in pairs], dtype=float)
        ap = np.array([p[1] for p in pairs], dtype=float)
        return cls(n=len(a), a=a, a_prime=ap)

    def swapped(self) -> "MeasurementSettings":
        """Settings with every a_j and a'_j exchanged."""
        return MeasurementSettings(n=self.n, a=self.a_prime, a_prime=self.a)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "pairs": [
                {"a": list(self.a[j]), "a_prime": list(self.a_prime[j])}
                for j in range(self.n)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MeasurementSettings":
        n = int(data["n"])
        pairs = data["pairs"]
        if len(pairs) != n:
            raise ValueError(f"expected {n} pairs, got {len(pairs)}")
        a = np.array([p["a"] for p in pairs], dtype=float)
        ap = np.array([p["a_prime"] for p in pairs], dtype=float)
        return cls(n=n, a=a, a_prime=ap)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "MeasurementSettings":
        return cls.from_json_dict(json.loads(text))


def _apply_pair(settings: MeasurementSettings, vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(B vec, B' vec) by propagating the recursion over state slices."""
    n = settings.n
    u = apply_single_qubit(vec, n, 1, pauli_combination(settings.a[0]))
    v = apply_single_qubit(vec, n, 1, pauli_combination(settings.a_prime[0]))
    for j in range(2, n + 1):
        half_sum = pauli_combination((settings.a[j - 1] + settings.a_prime[j - 1]) / 2.0)
        half_diff = pauli_combination((settings.a[j - 1] - settings.a_prime[j - 1]) / 2.0)
        su = apply_single_qubit(u, n, j, half_sum)
        du = apply_single_qubit(u, n, j, half_diff)
        sv = apply_single_qubit(v, n, j, half_sum)
        dv = apply_single_qubit(v, n, j, half_diff)
        u, v = su + dv, sv - du
    return u, v


def _dense_pair(settings: MeasurementSettings) -> tuple[np.ndarray, np.ndarray]:
    """Explicit matrices (B, B') via the literal recursion; n <= DENSE_QUBIT_CAP."""
    if settings.n > DENSE_QUBIT_CAP:
        raise ValueError(f"dense MK matrices are capped at {DENSE_QUBIT_CAP} qubits")
    b = pauli_combination(settings.a[0])
    bp = pauli_combination(settings.a_prime[0])
    for j in range(1, settings.n):
        half_sum = pauli_combination((settings.a[j] + settings.a_prime[j]) / 2.0)
        half_diff = pauli_combination((settings.a[j] - settings.a_prime[j]) / 2.0)
        b, bp = kron(b, half_sum) + kron(bp, half_diff), kron(bp, half_sum) - kron(b, half_diff)
    return b, bp


def _corner_pair(settings: MeasurementSettings) -> tuple[complex, complex]:
    """Top-right entries <0..0|B|1..1> and <0..0|B'|1..1> in O(n) scalar steps.

    The corner of a Kronecker product is the product of the factor corners,
    so the full recursion collapses to a scalar one on the 2x2 top-right
    entries v_x - i v_y.
    """

    def corner(v: np.ndarray) -> complex:
        return complex(v[0] - 1j * v[1])

    cb = corner(settings.a[0])
    cbp = corner(settings.a_prime[0])
    for j in range(1, settings.n):
        s = corner((settings.a[j] + settings.a_prime[j]) / 2.0)
        d = corner((settings.a[j] - settings.a_prime[j]) / 2.0)
        cb, cbp = cb * s + cbp * d, cbp * s - cb * d
    return cb, cbp


class MKOperator:
    """Matrix-free handle for one member of an MK operator pair.

    Hermitian by construction.  ``apply`` runs the pair recursion on state
    slices; ``dense`` materializes the matrix for n <= DENSE_QUBIT_CAP.
    """

    __slots__ = ("n", "settings", "_swapped", "_dense_cache")

    def __init__(self, settings: MeasurementSettings, swapped: bool = False) -> None:
        self.n = settings.n
        self.settings = settings
        self._swapped = bool(swapped)
        self._dense_cache: np.ndarray | None = None

    def apply(self, vec: np.ndarray) -> np.ndarray:
        u, v = _apply_pair(self.settings, vec)
        return v if self._swapped else u

    def dense(self) -> np.ndarray:
        if self._dense_cache is None:
            b, bp = _dense_pair(self.settings)
            mat = bp if self._swapped else b
            mat.setflags(write=False)
            self._dense_cache = mat
        return self._dense_cache

    def operator_norm(self) -> float:
        """Largest |eigenvalue|: dense eigendecomposition for n <= DENSE_QUBIT_CAP,
        matrix-free power iteration on B^2 otherwise."""
        if self.n <= DENSE_QUBIT_CAP:
            return float(np.max(np.abs(np.linalg.eigvalsh(self.dense()))))
        rng = np.random.default_rng(12345)
        v = rng.standard_normal(2**self.n) + 1j * rng.standard_normal(2**self.n)
        v /= np.linalg.norm(v)
        lam_sq = 0.0
        for _ in range(200):
            w = self.apply(self.apply(v))
            lam_new = float(np.linalg.norm(w))
            if lam_new == 0.0:
                return 0.0
            v = w / lam_new
            if abs(lam_new - lam_sq) < 1e-12 * max(lam_new, 1.0):
                lam_sq = lam_new
                break
            lam_sq = lam_new
        return math.sqrt(lam_sq)

    def __repr__(self) -> str:  # pragma: no cover
        kind = "swapped" if self._swapped else "primary"
        return f"MKOperator(n={self.n}, {kind})"


@dataclass(frozen=True)
class MKOperatorPair:
    """The pair (B, B') built from one set of measurement directions."""

    n: int
    bell: MKOperator
    bell_swapped: MKOperator
    settings: MeasurementSettings


def mk_pair(settings: MeasurementSettings) -> MKOperatorPair:
    """Construct the MK operator pair for the given settings."""
    if not 1 <= settings.n <= MAX_QUBITS:
        raise ValueError(f"n={settings.n} outside the supported range 1..{MAX_QUBITS}")
    return MKOperatorPair(
        n=settings.n,
        bell=MKOperator(settings, swapped=False),
        bell_swapped=MKOperator(settings, swapped=True),
        settings=settings,
    )


def _planar(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta), 0.0])


def canonical_settings(n: int) -> MeasurementSettings:
    """Planar settings for which the MK operator takes its GHZ spectral form.

    The a_j fan out in the x-y plane with consecutive angle increments
    (-1)**(n+1) * pi/n and each a'_j is a_j rotated by +pi/2.  A common
    azimuthal offset is applied to the whole fan so that <0..0|B|1..1> comes
    out real and positive; without it the corner picks up a residual phase
    of the form (n-1)*pi/4 and the operator would match the GHZ projector
    form only up to a phase on |1...1>.
    """
    if n < 2:
        raise ValueError("canonical settings require n >= 2")
    if n > MAX_QUBITS:
        raise ValueError(f"n={n} outside the supported range 2..{MAX_QUBITS}")
    increment = (-1) ** (n + 1) * math.pi / n
    base = [j * increment for j in range(n)]

    def build(offset: float) -> MeasurementSettings:
        a = np.array([_planar(t + offset) for t in base])
        ap = np.array([_planar(t + offset + math.pi / 2) for t in base])
        return MeasurementSettings(n=n, a=a, a_prime=ap)

    # Rotating every vector by delta shifts the corner phase by -n*delta.
    corner, _ = _corner_pair(build(0.0))
    return build(float(np.angle(corner)) / n)


def ghz(n: int, sign: int = +1) -> PureState:
    """GHZ state (|0...0> +- |1...1>)/sqrt(2)."""
    if n < 2:
        raise ValueError("GHZ states require n >= 2")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0 / math.sqrt(2)
    amps[-1] = sign / math.sqrt(2)
    return PureState(amps)


def generalized_ghz(n: int, phi: float) -> PureState:
    """cos(phi) |0...0> + sin(phi) |1...1> for phi in [0, pi/4]."""
    if n < 2:
        raise ValueError("generalized GHZ states require n >= 2")
    if not 0.0 <= phi <= math.pi / 4 + 1e-15:
        raise ValueError(f"phi={phi} outside [0, pi/4]")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = math.cos(phi)
    amps[-1] = math.sin(phi)
    return PureState(amps)


def _ghz_spectral_matrix(n: int) -> np.ndarray:
    gp = ghz(n, +1).amplitudes
    gm = ghz(n, -1).amplitudes
    scale = 2 ** ((n - 1) / 2)
    return scale * (np.outer(gp, gp.conj()) - np.outer(gm, gm.conj()))


@lru_cache(maxsize=None)
def canonical_mk(n: int) -> MKOperatorPair:
    """MK pair for the canonical settings, validated against its spectral form.

    For n <= DENSE_QUBIT_CAP the dense matrix is compared entrywise with
    2**((n-1)/2) (P+ - P-) built from the GHZ projectors; beyond that the
    GHZ eigenvector residuals are checked matrix-free.  A failure here means
    the angle convention is wrong and is raised loudly.
    """
    pair = mk_pair(canonical_settings(n))
    scale = 2 ** ((n - 1) / 2)
    if n <= DENSE_QUBIT_CAP:
        deviation = float(np.max(np.abs(pair.bell.dense() - _ghz_spectral_matrix(n))))
        if deviation >= SPECTRAL_BUILD_TOL:
            raise AssertionError(
                f"canonical MK operator for n={n} deviates from its spectral form "
                f"by {deviation:.3e}; angle convention is broken"
            )
    else:
        for sign in (+1, -1):
            g = ghz(n, sign).amplitudes
            residual = float(np.linalg.norm(pair.bell.apply(g) - sign * scale * g))
            if residual >= SPECTRAL_BUILD_TOL * scale:
                raise AssertionError(
                    f"canonical MK operator for n={n} fails the GHZ eigenvector "
                    f"check (residual {residual:.3e})"
                )
    return pair


def mk_mean(psi: PureState, settings: MeasurementSettings) -> float:
    """<psi|B|psi> for the MK operator built from the settings."""
    if settings.n != psi.n:
        raise ValueError(f"settings are for {settings.n} qubits but the state has {psi.n}")
    u, _ = _apply_pair(settings, psi.amplitudes)
    value = complex(np.vdot(psi.amplitudes, u))
    return float(value.real)


def _raw_mean(a: list[np.ndarray], a_prime: list[np.ndarray], vec: np.ndarray, n: int) -> float:
    # Same recursion as _apply_pair but on raw (possibly non-unit) vectors,
    # used for the linear block updates of the see-saw.
    u = apply_single_qubit(vec, n, 1, pauli_combination(a[0]))
    v = apply_single_qubit(vec, n, 1, pauli_combination(a_prime[0]))
    for j in range(2, n + 1):
        half_sum = pauli_combination((a[j - 1] + a_prime[j - 1]) / 2.0)
        half_diff = pauli_combination((a[j - 1] - a_prime[j - 1]) / 2.0)
        su = apply_single_qubit(u, n, j, half_sum)
        du = apply_single_qubit(u, n, j, half_diff)
        sv = apply_single_qubit(v, n, j, half_sum)
        dv = apply_single_qubit(v, n, j, half_diff)
        u, v = su + dv, sv - du
    return float(np.vdot(vec, u).real)


@dataclass(frozen=True)
class MKMeanResult:
    """Outcome of the numeric MK mean maximization over all settings."""

    settings: MeasurementSettings
    value: float
    starts: int
    iterations: int
    best_start: int


def max_mk_mean(psi: PureState, config=None) -> MKMeanResult:
    """Maximize <psi|B(settings)|psi> over all measurement settings.

    Multi-start block-coordinate ascent: the mean is linear in each qubit's
    pair (a_j, a'_j) with the others held fixed, so every block update is an
    exact maximization (align each vector with its coefficient vector).
    Start 0 is the canonical fan, start 1 the all-z axial configuration, the
    rest are seeded random directions.  Deterministic given the seed; ties
    between starts resolve to the lowest start index.
    """
    from .criterion import OptimizerConfig  # deferred to avoid an import cycle

    cfg = config if config is not None else OptimizerConfig()
    n = psi.n
    if n < 2:
        raise ValueError("mean maximization requires n >= 2")
    starts = cfg.resolved_starts(n)
    rng = np.random.default_rng(cfg.seed)
    vec = psi.amplitudes

    def random_unit() -> np.ndarray:
        v = rng.standard_normal(3)
        return v / np.linalg.norm(v)

    best_value = -np.inf
    best_vectors: tuple[list[np.ndarray], list[np.ndarray]] | None = None
    best_start = -1
    best_iters = 0

    for start in range(starts):
        if start == 0:
            canon = canonical_settings(n)
            a = [canon.a[j].copy() for j in range(n)]
            ap = [canon.a_prime[j].copy() for j in range(n)]
        elif start == 1:
            a = [np.array([0.0, 0.0, 1.0]) for _ in range(n)]
            ap = [np.array([1.0, 0.0, 0.0]) for _ in range(n)]
        else:
            a = [random_unit() for _ in range(n)]
            ap = [random_unit() for _ in range(n)]

        value = _raw_mean(a, ap, vec, n)
        iters = 0
        for _ in range(cfg.max_iterations):
            iters += 1
            previous = value
            step = 0.0
            for j in range(n):
                grad = np.zeros(3)
                grad_p = np.zeros(3)
                zero = np.zeros(3)
                for k in range(3):
                    axis = np.zeros(3)
                    axis[k] = 1.0
                    grad[k] = _raw_mean(a[:j] + [axis] + a[j + 1:],
                                        ap[:j] + [zero] + ap[j + 1:], vec, n)
                    grad_p[k] = _raw_mean(a[:j] + [zero] + a[j + 1:],
                                          ap[:j] + [axis] + ap[j + 1:], vec, n)
                norm = np.linalg.norm(grad)
                if norm > 1e-14:
                    new = grad / norm
                    step = max(step, float(np.linalg.norm(new - a[j])))
                    a[j] = new
                norm_p = np.linalg.norm(grad_p)
                if norm_p > 1e-14:
                    new_p = grad_p / norm_p
                    step = max(step, float(np.linalg.norm(new_p - ap[j])))
                    ap[j] = new_p
            value = _raw_mean(a, ap, vec, n)
            if value - previous < cfg.value_tolerance or step < cfg.step_tolerance:
                break
        if value > best_value + 1e-12:
            best_value = value
            best_vectors = (a, ap)
            best_start = start
            best_iters = iters

    assert best_vectors is not None
    found = MeasurementSettings(n=n, a=np.array(best_vectors[0]), a_prime=np.array(best_vectors[1]))
    return MKMeanResult(
        settings=found,
        value=float(best_value),
        starts=starts,
        iterations=best_iters,
        best_start=best_start,
    )
