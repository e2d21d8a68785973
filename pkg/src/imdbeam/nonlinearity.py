"""Memoryless polynomial device models applied exactly to line spectra.

The spectrum of ``x(t)**p`` is the p-fold convolution of the signed line set
of ``x``, so a polynomial device maps a finite line set to a finite line set
with no time-domain approximation.  A closed-form term table for the
third-order two-tone case and the brick-wall transmit-chain filter live here
as well.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridRangeError
from .spectra import LineSpectrum

MAX_DEGREE = 9

Interval = tuple[int, int]


@dataclass(frozen=True)
class PolynomialNonlinearity:
    """``f(x) = sum_p coefficients[p-1] * x**p`` with degree 1..9.

    There is no constant term: a quiescent device emits nothing.
    """

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not 1 <= len(coeffs) <= MAX_DEGREE:
            raise ValueError(f"polynomial degree must be between 1 and {MAX_DEGREE}")
        if not any(coeffs):
            raise ValueError("at least one coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coefficients)

    @classmethod
    def identity(cls) -> "PolynomialNonlinearity":
        return cls((1.0,))

    @classmethod
    def third_order(cls, alpha: float) -> "PolynomialNonlinearity":
        """The flagship device ``f(x) = x + alpha*x**3``."""
        return cls((1.0, 0.0, float(alpha)))

    @classmethod
    def second_order(cls, alpha: float) -> "PolynomialNonlinearity":
        """``f(x) = x + alpha*x**2``; its near-band distortion is empty."""
        return cls((1.0, float(alpha)))

    def evaluate(self, x):
        """Pointwise ``f(x)`` on an array, for time-domain cross-checks."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for a in reversed(self.coefficients):
            acc = acc * x + a
        return acc * x


@dataclass(frozen=True)
class BandDefinition:
    """Allocated band, its two adjacent bands, and the transmit-chain window.

    All intervals are inclusive ``(lo, hi)`` pairs of non-negative indices.
    The adjacent bands have equal width and adjoin the in-band interval; the
    keep window covers all three and models which lines the transmit chain
    lets through at all.
    """

    in_band: Interval
    adjacent_lower: Interval
    adjacent_upper: Interval
    keep_window: Interval

    def __post_init__(self):
        for name in ("in_band", "adjacent_lower", "adjacent_upper", "keep_window"):
            lo, hi = getattr(self, name)
            iv = (int(lo), int(hi))
            if iv != (lo, hi):
                raise ValueError(f"{name} bounds must be integers")
            if iv[0] < 0 or iv[0] > iv[1]:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi")
            object.__setattr__(self, name, iv)
        lower_w = self.adjacent_lower[1] - self.adjacent_lower[0]
        upper_w = self.adjacent_upper[1] - self.adjacent_upper[0]
        if lower_w != upper_w:
            raise ValueError("adjacent bands must have equal width")
        if self.adjacent_lower[1] + 1 != self.in_band[0]:
            raise ValueError("adjacent_lower must adjoin in_band from below")
        if self.in_band[1] + 1 != self.adjacent_upper[0]:
            raise ValueError("adjacent_upper must adjoin in_band from above")
        if not (
            self.keep_window[0] <= self.adjacent_lower[0]
            and self.keep_window[1] >= self.adjacent_upper[1]
        ):
            raise ValueError("keep_window must cover both adjacent bands")

    @classmethod
    def around(
        cls,
        in_band: Interval,
        adjacent_width: int,
        keep_window: Interval | None = None,
    ) -> "BandDefinition":
        """Adjacent bands of ``adjacent_width`` indices on both sides of
        ``in_band``; keep window defaults to exactly their union."""
        lo, hi = int(in_band[0]), int(in_band[1])
        if adjacent_width < 1:
            raise ValueError("adjacent_width must be >= 1")
        if lo - adjacent_width < 0:
            raise ValueError("adjacent_lower would extend below index 0")
        lower = (lo - adjacent_width, lo - 1)
        upper = (hi + 1, hi + adjacent_width)
        if keep_window is None:
            keep_window = (lower[0], upper[1])
        return cls((lo, hi), lower, upper, keep_window)


def _contains(interval: Interval, k: int) -> bool:
    return interval[0] <= k <= interval[1]


def _convolve(a: dict[int, complex], b: dict[int, complex]) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            k = k1 + k2
            out[k] = out.get(k, 0j) + c1 * c2
    return out


def apply_polynomial(x: LineSpectrum, f: PolynomialNonlinearity) -> LineSpectrum:
    """Exact line spectrum of ``f(x(t))`` by iterated convolution.

    The grid must be able to hold the highest product: ``degree * k_top``
    where ``k_top`` is the largest index present in ``x``.
    """
    k_top = max((abs(k) for k, _ in x.items()), default=0)
    if f.degree * k_top > x.grid.max_index:
        raise GridRangeError(
            f"grid max_index {x.grid.max_index} cannot hold degree-{f.degree} "
            f"products of lines up to index {k_top}"
        )
    base = dict(x.items())
    power: dict[int, complex] = {}
    acc: dict[int, complex] = {}
    for p, a in enumerate(f.coefficients, start=1):
        power = dict(base) if p == 1 else _convolve(power, base)
        if a:
            for k, c in power.items():
                acc[k] = acc.get(k, 0j) + a * c
    return LineSpectrum(x.grid, acc)


def two_tone_third_order_terms(
    k1: int, k2: int, phi1: float, phi2: float, alpha: float
) -> list[tuple[int, float, float]]:
    """Closed-form term table for a unit two-tone through ``x + alpha*x**3``.

    Returns ``(index, amplitude, phase)`` triples where ``amplitude`` is the
    signed cosine coefficient: the fundamentals scaled by ``1 + 9*alpha/4``,
    four mixing products at ``3*alpha/4`` and the two third harmonics at
    ``alpha/4``.  A negative difference index ``k2 - 2*k1`` is folded to its
    positive mirror with the phase negated (the signal is real), and
    zero-amplitude terms are omitted, so ``alpha = 0`` yields just the two
    unit fundamentals.
    """
    if int(k1) != k1 or int(k2) != k2 or k1 < 1:
        raise GridRangeError("tone indices must be positive integers")
    if not k1 < k2:
        raise ValueError("tone indices must satisfy k1 < k2")
    a_fund = 1.0 + 9.0 * alpha / 4.0
    a_mix = 3.0 * alpha / 4.0
    a_harm = alpha / 4.0
    diff = k2 - 2 * k1
    diff_phase = phi2 - 2.0 * phi1
    if diff < 0:
        diff, diff_phase = -diff, -diff_phase
    raw = [
        (k1, a_fund, phi1),
        (k2, a_fund, phi2),
        (2 * k2 + k1, a_mix, 2.0 * phi2 + phi1),
        (2 * k2 - k1, a_mix, 2.0 * phi2 - phi1),
        (k2 + 2 * k1, a_mix, phi2 + 2.0 * phi1),
        (diff, a_mix, diff_phase),
        (3 * k1, a_harm, 3.0 * phi1),
        (3 * k2, a_harm, 3.0 * phi2),
    ]
    return [(k, amp, phase) for k, amp, phase in raw if amp != 0.0]


def distortion_terms_near_band(
    expansion: list[tuple[int, float, float]], band: BandDefinition
) -> list[tuple[int, float, float]]:
    """Distortion terms of a two-tone expansion that survive the transmit
    chain (indices inside ``band.keep_window``); the leading fundamental
    entries are excluded.  Expansions from a linear device yield an empty
    list."""
    return [t for t in expansion[2:] if _contains(band.keep_window, t[0])]


def band_filter(x: LineSpectrum, band: BandDefinition) -> LineSpectrum:
    """Brick-wall transmit-chain filter: delete every line with ``|index|``
    outside ``band.keep_window``; unit gain inside."""
    kept = {k: c for k, c in x.items() if _contains(band.keep_window, abs(k))}
    return LineSpectrum(x.grid, kept)
