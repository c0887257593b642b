"""Geometry, path loss and Rayleigh channel draws for the two-user IRS network.

Channel naming follows the protocol: ``g`` is HAP->IRS, ``alpha_1r``/``alpha_2r``
are IRS->WD_i, ``alpha_1``/``alpha_2`` are HAP->WD_i and ``alpha_12`` is the
inter-user link. The same draw serves forward and reverse links (reciprocity).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class LinkClass(str, enum.Enum):
    HAP_IRS = "hap_irs"
    IRS_WD = "irs_wd"
    HAP_WD = "hap_wd"
    WD_WD = "wd_wd"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ScenarioGeometry:
    """Planar positions (metres) of the HAP, both devices and the IRS."""

    hap_position: tuple[float, float]
    wd1_position: tuple[float, float]
    wd2_position: tuple[float, float]
    irs_position: tuple[float, float]

    def __post_init__(self):
        pts = [self.hap_position, self.wd1_position, self.wd2_position, self.irs_position]
        for p in pts:
            if len(p) != 2 or not np.all(np.isfinite(p)):
                raise ValueError(f"invalid position {p!r}")
        for i in range(4):
            for j in range(i + 1, 4):
                if _dist(pts[i], pts[j]) <= 0.0:
                    raise ValueError("node positions must be pairwise distinct")

    @classmethod
    def collinear(cls, d1: float, d2: float, irs: tuple[float, float] | None = None):
        """HAP at the origin, both devices on the x axis, IRS at ``irs``.

        The IRS defaults to 2 m above WD_2.
        """
        if irs is None:
            irs = (d2, 2.0)
        return cls((0.0, 0.0), (float(d1), 0.0), (float(d2), 0.0), tuple(map(float, irs)))

    @property
    def d1(self) -> float:
        return _dist(self.hap_position, self.wd1_position)

    @property
    def d2(self) -> float:
        return _dist(self.hap_position, self.wd2_position)

    @property
    def d12(self) -> float:
        return _dist(self.wd1_position, self.wd2_position)

    @property
    def d_hap_irs(self) -> float:
        return _dist(self.hap_position, self.irs_position)

    def d_irs_wd(self, i: int) -> float:
        wd = self.wd1_position if i == 1 else self.wd2_position
        return _dist(self.irs_position, wd)


def _dist(a, b) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


@dataclass(frozen=True)
class PathLossModel:
    """L(d) = C0 (d/d0)^-lambda with a separate exponent per link class."""

    c0_db: float = 30.0
    d0: float = 1.0
    exponents: dict = field(
        default_factory=lambda: {
            LinkClass.HAP_IRS: 2.0,
            LinkClass.IRS_WD: 2.2,
            LinkClass.HAP_WD: 3.0,
            LinkClass.WD_WD: 3.0,
        }
    )

    def __post_init__(self):
        if not np.isfinite(self.c0_db):
            raise ValueError("c0_db must be finite")
        if not self.d0 > 0:
            raise ValueError("d0 must be positive")
        exps = {LinkClass(k): float(v) for k, v in self.exponents.items()}
        missing = set(LinkClass) - set(exps)
        if missing:
            raise ValueError(f"missing path-loss exponents for {sorted(m.value for m in missing)}")
        if any(v < 0 for v in exps.values()):
            raise ValueError("path-loss exponents must be non-negative")
        object.__setattr__(self, "exponents", exps)

    @property
    def c0_linear(self) -> float:
        return 10.0 ** (-self.c0_db / 10.0)

    def path_loss(self, d: float, link: LinkClass | str) -> float:
        if not d > 0:
            raise ValueError(f"distance must be positive, got {d}")
        lam = self.exponents[LinkClass(link)]
        return self.c0_linear * (d / self.d0) ** (-lam)


def path_loss(d: float, link: LinkClass | str, model: PathLossModel | None = None) -> float:
    """Linear power gain of a link of class ``link`` at distance ``d``."""
    return (model or PathLossModel()).path_loss(d, link)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    g: np.ndarray
    alpha_1r: np.ndarray
    alpha_2r: np.ndarray
    alpha_1: complex
    alpha_2: complex
    alpha_12: complex

    def __post_init__(self):
        n = len(self.g)
        if len(self.alpha_1r) != n or len(self.alpha_2r) != n:
            raise ValueError("IRS channel vectors must share one length")
        for name in ("g", "alpha_1r", "alpha_2r"):
            arr = np.asarray(getattr(self, name), dtype=complex).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("alpha_1", "alpha_2", "alpha_12"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def n_elements(self) -> int:
        return len(self.g)

    def without_irs(self) -> "ChannelRealization":
        e = np.zeros(0, dtype=complex)
        return ChannelRealization(e, e, e, self.alpha_1, self.alpha_2, self.alpha_12)

    def swapped(self) -> "ChannelRealization":
        """Same channels with the device labels exchanged."""
        return ChannelRealization(
            self.g, self.alpha_2r, self.alpha_1r, self.alpha_2, self.alpha_1, self.alpha_12
        )

    def to_bytes(self) -> bytes:
        parts = [self.g, self.alpha_1r, self.alpha_2r,
                 np.array([self.alpha_1, self.alpha_2, self.alpha_12])]
        return b"".join(np.ascontiguousarray(p, dtype=np.complex128).tobytes() for p in parts)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator: Philox keyed by ``seed``, stream in the counter."""
    key = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, int(stream), 0]))


def realization_seed(master_seed: int, index: int) -> int:
    """64-bit seed of realization ``index`` under ``master_seed``."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _cn(rng: np.random.Generator, size, var: float) -> np.ndarray:
    z = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
    return np.sqrt(var / 2.0) * (z[0] + 1j * z[1])


def sample_realization(
    geometry: ScenarioGeometry,
    model: PathLossModel,
    n_elements: int,
    rng_seed: int,
) -> ChannelRealization:
    """Draw one Rayleigh realization; every coefficient is CN(0, path loss).

    Direct links are drawn first so that, for a fixed seed, they do not change
    with ``n_elements``.
    """
    if n_elements < 0:
        raise ValueError("n_elements must be >= 0")
    rng = make_rng(rng_seed)
    pl = model.path_loss
    a1 = _cn(rng, 1, pl(geometry.d1, LinkClass.HAP_WD))[0]
    a2 = _cn(rng, 1, pl(geometry.d2, LinkClass.HAP_WD))[0]
    a12 = _cn(rng, 1, pl(geometry.d12, LinkClass.WD_WD))[0]
    g = _cn(rng, n_elements, pl(geometry.d_hap_irs, LinkClass.HAP_IRS))
    a1r = _cn(rng, n_elements, pl(geometry.d_irs_wd(1), LinkClass.IRS_WD))
    a2r = _cn(rng, n_elements, pl(geometry.d_irs_wd(2), LinkClass.IRS_WD))
    return ChannelRealization(g, a1r, a2r, a1, a2, a12)


@dataclass(frozen=True, eq=False)
class LiftedChannels:
    """Rank-one lifts psi = [gamma; alpha][gamma; alpha]^H of the composite links."""

    psi_1: np.ndarray
    psi_2: np.ndarray
    psi_21: np.ndarray
    psi_22: np.ndarray
    gamma_bar: dict  # name -> stacked vector [gamma; alpha]

    @property
    def dim(self) -> int:
        return self.psi_1.shape[0]


def composite_gamma(r: ChannelRealization):
    """Cascaded per-element coefficients (gamma_1, gamma_2, gamma_21, gamma_22)."""
    gamma_1 = r.g * r.alpha_1r
    gamma_2 = r.g * r.alpha_2r
    # One product serves both exchange directions; computing a*b and b*a
    # separately can differ in the last bit under fused multiply-add.
    gamma_21 = r.alpha_2r * r.alpha_1r
    return gamma_1, gamma_2, gamma_21, gamma_21.copy()


def lift_psi(gamma: np.ndarray, alpha: complex) -> np.ndarray:
    x = np.append(np.asarray(gamma, dtype=complex), complex(alpha))
    return np.outer(x, x.conj())


def lift(r: ChannelRealization) -> LiftedChannels:
    g1, g2, g21, g22 = composite_gamma(r)
    bars = {
        "1": np.append(g1, r.alpha_1),
        "2": np.append(g2, r.alpha_2),
        "21": np.append(g21, r.alpha_12),
        "22": np.append(g22, r.alpha_12),
    }
    return LiftedChannels(
        psi_1=lift_psi(g1, r.alpha_1),
        psi_2=lift_psi(g2, r.alpha_2),
        psi_21=lift_psi(g21, r.alpha_12),
        psi_22=lift_psi(g22, r.alpha_12),
        gamma_bar=bars,
    )
