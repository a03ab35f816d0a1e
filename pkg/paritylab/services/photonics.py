"""Jones-calculus optical elements and single-photon rail networks.

A photon lives on *rails*: one rail per (spatial mode, polarization) pair,
indexed ``2*mode + pol`` with H = 0 and V = 1. A ``ModeNetwork`` is an ordered
list of elements, each acting on one spatial mode (wave plates, phase) or on a
mode and its upper neighbour (BD, PBS). Compiling a network multiplies the
per-element rail matrices in declared order; every element is unitary, so
losses only ever enter through post-selection downstream.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, Optional

import numpy as np

from ..errors import NetworkConfigError, ParseError
from .qudit import UnitaryOp

logger = logging.getLogger(__name__)


class Polarization(IntEnum):
    H = 0
    V = 1


class ElementKind(str, Enum):
    HWP = "HWP"
    QWP = "QWP"
    PBS = "PBS"
    BD = "BD"
    PHASE = "PHASE"


# A beam displacer walks this polarization into the neighbouring mode; the
# other polarization goes straight through.
BD_WALK_POLARIZATION = Polarization.H
# A PBS transmits H and reflects V into the neighbouring mode.
PBS_REFLECT_POLARIZATION = Polarization.V

_S2 = 1 / math.sqrt(2)

JONES_VECTORS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([_S2, _S2], dtype=complex),
    "A": np.array([_S2, -_S2], dtype=complex),
    "R": np.array([_S2, 1j * _S2], dtype=complex),
    "L": np.array([_S2, -1j * _S2], dtype=complex),
}


def rail_index(mode: int, pol: int) -> int:
    return 2 * mode + int(pol)


# ── Jones matrices ──────────────────────────────────────────


def rotation_matrix(theta_deg: float) -> np.ndarray:
    t = math.radians(theta_deg)
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]], dtype=complex)


def hwp_matrix(theta_deg: float) -> np.ndarray:
    """Half-wave plate with fast axis at ``theta_deg``, (H, V) basis."""
    t = math.radians(2 * theta_deg)
    return np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]], dtype=complex)


def qwp_matrix(theta_deg: float) -> np.ndarray:
    """Quarter-wave plate R(θ)·diag(1, i)·R(−θ); two of them make ``hwp_matrix``."""
    r = rotation_matrix(theta_deg)
    return r @ np.diag([1, 1j]) @ r.T


def phase_matrix(theta_deg: float) -> np.ndarray:
    return np.exp(1j * math.radians(theta_deg)) * np.eye(2, dtype=complex)


# ── Networks ────────────────────────────────────────────────


@dataclass(frozen=True)
class JonesElement:
    kind: ElementKind
    target_mode: int
    theta_deg: float = 0.0

    def __post_init__(self):
        try:
            kind = ElementKind(str(getattr(self.kind, "value", self.kind)).upper())
        except ValueError:
            raise NetworkConfigError(f"Unknown element kind {self.kind!r}") from None
        if self.target_mode < 0:
            raise NetworkConfigError(f"Negative spatial mode {self.target_mode}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "theta_deg", float(self.theta_deg))

    def jones(self) -> Optional[np.ndarray]:
        """2×2 matrix for single-mode elements, ``None`` for BD/PBS."""
        if self.kind is ElementKind.HWP:
            return hwp_matrix(self.theta_deg)
        if self.kind is ElementKind.QWP:
            return qwp_matrix(self.theta_deg)
        if self.kind is ElementKind.PHASE:
            return phase_matrix(self.theta_deg)
        return None

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "theta_deg": self.theta_deg, "mode": self.target_mode}


def hwp(mode: int, theta_deg: float) -> JonesElement:
    return JonesElement(ElementKind.HWP, mode, theta_deg)


def qwp(mode: int, theta_deg: float) -> JonesElement:
    return JonesElement(ElementKind.QWP, mode, theta_deg)


def bd(mode: int) -> JonesElement:
    return JonesElement(ElementKind.BD, mode)


def pbs(mode: int) -> JonesElement:
    return JonesElement(ElementKind.PBS, mode)


def phase(mode: int, theta_deg: float) -> JonesElement:
    return JonesElement(ElementKind.PHASE, mode, theta_deg)


@dataclass(frozen=True)
class ModeNetwork:
    n_spatial: int
    elements: tuple[JonesElement, ...] = ()

    def __post_init__(self):
        if self.n_spatial < 1:
            raise NetworkConfigError(f"Network needs at least one spatial mode, got {self.n_spatial}")
        elements = tuple(self.elements)
        for el in elements:
            if el.target_mode >= self.n_spatial:
                raise NetworkConfigError(
                    f"{el.kind.value} targets mode {el.target_mode} but the network has {self.n_spatial}"
                )
        object.__setattr__(self, "elements", elements)

    @property
    def n_rails(self) -> int:
        return 2 * self.n_spatial

    def then(self, *elements: JonesElement) -> ModeNetwork:
        return ModeNetwork(self.n_spatial, self.elements + tuple(elements))

    def split(self, index: int) -> tuple[ModeNetwork, ModeNetwork]:
        """Networks before and from element ``index``."""
        return (
            ModeNetwork(self.n_spatial, self.elements[:index]),
            ModeNetwork(self.n_spatial, self.elements[index:]),
        )

    @classmethod
    def from_dicts(cls, items: Iterable[dict], n_spatial: Optional[int] = None) -> ModeNetwork:
        """Parse the JSON element list ``[{kind, theta_deg, mode}, ...]``."""
        elements = []
        for i, item in enumerate(items):
            if not isinstance(item, dict) or "kind" not in item or "mode" not in item:
                raise ParseError(f"Element {i} must be an object with 'kind' and 'mode'")
            try:
                elements.append(JonesElement(item["kind"], int(item["mode"]), float(item.get("theta_deg", 0.0))))
            except NetworkConfigError:
                raise
            except (TypeError, ValueError) as e:
                raise ParseError(f"Element {i}: {e}") from e
        if n_spatial is None:
            n_spatial = 1 + max(
                (el.target_mode + (1 if el.kind in (ElementKind.BD, ElementKind.PBS) else 0) for el in elements),
                default=0,
            )
        return cls(n_spatial, tuple(elements))

    def to_dicts(self) -> list[dict]:
        return [el.to_dict() for el in self.elements]


def _swap_rails(mat: np.ndarray, a: int, b: int) -> None:
    mat[[a, b]] = mat[[b, a]]


def _element_matrix(el: JonesElement, net: ModeNetwork, bd_walk: Polarization) -> np.ndarray:
    mat = np.eye(net.n_rails, dtype=complex)
    s = el.target_mode
    jones = el.jones()
    if jones is not None:
        lo = rail_index(s, 0)
        mat[lo:lo + 2, lo:lo + 2] = jones
        return mat
    if s + 1 >= net.n_spatial:
        raise NetworkConfigError(
            f"{el.kind.value} on mode {s} would displace past the last spatial mode ({net.n_spatial - 1})"
        )
    moving = bd_walk if el.kind is ElementKind.BD else PBS_REFLECT_POLARIZATION
    _swap_rails(mat, rail_index(s, moving), rail_index(s + 1, moving))
    return mat


def compile_network(net: ModeNetwork, bd_walk: Polarization = BD_WALK_POLARIZATION) -> UnitaryOp:
    """Rail transform of the whole network; later elements multiply on the left."""
    total = np.eye(net.n_rails, dtype=complex)
    for el in net.elements:
        total = _element_matrix(el, net, bd_walk) @ total
    logger.debug("Compiled network: %d elements over %d rails", len(net.elements), net.n_rails)
    return UnitaryOp(total)


def single_photon(net: ModeNetwork, mode: int, jones) -> np.ndarray:
    """Rail vector for one photon in ``mode`` with polarization ``jones``."""
    if not 0 <= mode < net.n_spatial:
        raise NetworkConfigError(f"Mode {mode} outside network of {net.n_spatial} modes")
    vec = np.zeros(net.n_rails, dtype=complex)
    vec[rail_index(mode, 0):rail_index(mode, 0) + 2] = np.asarray(jones, dtype=complex)
    return vec


def propagate(net: ModeNetwork, rails_in: np.ndarray) -> np.ndarray:
    return compile_network(net).mat @ np.asarray(rails_in, dtype=complex)


def mode_jones(rails: np.ndarray, mode: int) -> np.ndarray:
    """Polarization (Jones) vector carried by one spatial mode."""
    lo = rail_index(mode, 0)
    return np.asarray(rails[lo:lo + 2])


def analyzer_probability(rails: np.ndarray, analyzer: str = "D") -> float:
    """Probability of passing a polarization analyzer, summed over spatial modes."""
    proj = JONES_VECTORS[analyzer].conj()
    pairs = np.asarray(rails).reshape(-1, 2)
    return float(np.sum(np.abs(pairs @ proj) ** 2))


# ── State preparation ───────────────────────────────────────


@dataclass(frozen=True)
class PreparationSettings:
    """Wave plates after the first PBS.

    Photon 1 enters H and photon 2 enters V; the plates turn them into
    (|H⟩−|V⟩)/√2 and (|H⟩+i|V⟩)/√2, whose product is the Fourier state of |1⟩.
    """

    photon1_hwp_deg: float = -22.5
    photon2_hwp_deg: float = 67.5
    photon2_qwp_deg: float = 0.0


PREPARATION_INPUT = (("H", 0), ("V", 1))  # (polarization, spatial mode) per photon


def preparation_settings() -> PreparationSettings:
    return PreparationSettings()


def preparation_network(prep: Optional[PreparationSettings] = None) -> ModeNetwork:
    prep = prep or preparation_settings()
    return ModeNetwork(2, (
        hwp(0, prep.photon1_hwp_deg),
        hwp(1, prep.photon2_hwp_deg),
        qwp(1, prep.photon2_qwp_deg),
    ))


def prepared_jones_vectors(prep: Optional[PreparationSettings] = None) -> tuple[np.ndarray, np.ndarray]:
    """Polarization of each photon after the preparation stage."""
    net = preparation_network(prep)
    out = []
    for pol, mode in PREPARATION_INPUT:
        rails = propagate(net, single_photon(net, mode, JONES_VECTORS[pol]))
        out.append(mode_jones(rails, mode))
    return out[0], out[1]


# ── Interferometers ─────────────────────────────────────────


def mach_zehnder_network(phase_deg: float = 0.0, hwp_deg: float = 45.0) -> ModeNetwork:
    """BD – HWP(θ) on both arms – phase on the displaced arm – BD."""
    return ModeNetwork(2, (
        bd(0),
        hwp(0, hwp_deg),
        hwp(1, hwp_deg),
        phase(1, phase_deg),
        bd(0),
    ))
