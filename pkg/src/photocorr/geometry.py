"""Emitter-array geometry, detector/drive descriptions and scenario configs.

All lengths are expressed in units of the transition wavelength lambda and
all rates in units of the single-emitter decay rate gamma_0, so geometry
carries no absolute units anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

#: Default minimum pairwise separation (in lambda) accepted by validate().
DEFAULT_EPS_MIN = 1e-3

_UNIT_TOL = 1e-12

PROTOCOLS = ("inverted-free-decay", "driven-steady-state", "driven-transient")
FLAVORS = ("total", "directional", "polarized-directional")


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValidationError(f"{name} must be a 3-vector, got shape {arr.shape}")
    return arr


def _check_unit(v: np.ndarray, name: str, tol: float = _UNIT_TOL) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"{name} must be unit norm (|{name}| = {norm:.3e})")
    return v


@dataclass(frozen=True)
class EmitterArray:
    """Positions (units of lambda) and unit dipole orientations of N emitters.

    ``coincident=True`` marks a Dicke-limit array: every emitter sits at the
    same point and downstream coupling builders substitute gamma = gamma_0,
    delta = 0 for all pairs instead of evaluating the (divergent) Green's
    tensor.
    """

    positions: np.ndarray
    dipoles: np.ndarray
    coincident: bool = False

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        dip = np.atleast_2d(np.asarray(self.dipoles, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValidationError(f"positions must be (N, 3), got {pos.shape}")
        if dip.shape != pos.shape:
            raise ValidationError(
                f"dipoles shape {dip.shape} does not match positions {pos.shape}"
            )
        if pos.shape[0] < 1:
            raise ValidationError("array needs at least one emitter")
        norms = np.linalg.norm(dip, axis=1)
        bad = np.where(np.abs(norms - 1.0) > _UNIT_TOL)[0]
        if bad.size:
            raise ValidationError(
                f"dipoles {bad.tolist()} are not unit norm (|d| = {norms[bad]})"
            )
        pos = pos.copy()
        dip = dip.copy()
        pos.setflags(write=False)
        dip.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipoles", dip)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def separations(self) -> np.ndarray:
        """(N, N, 3) array of pairwise separation vectors R_mu - R_nu."""
        return self.positions[:, None, :] - self.positions[None, :, :]

    def min_distance(self) -> float:
        """Smallest pairwise distance; inf for a single emitter."""
        n = self.count
        if n < 2:
            return float("inf")
        d = np.linalg.norm(self.separations(), axis=2)
        return float(d[~np.eye(n, dtype=bool)].min())

    def subset(self, indices: Sequence[int]) -> "EmitterArray":
        """Restriction to the given emitter indices (order preserved)."""
        idx = np.asarray(indices, dtype=int)
        return EmitterArray(
            self.positions[idx], self.dipoles[idx], coincident=self.coincident
        )


def build_chain(n: int, spacing: float, axis, dipole) -> EmitterArray:
    """Uniform 1D chain: positions j * spacing * axis for j = 0..n-1.

    Args:
        n: number of emitters (>= 1).
        spacing: nearest-neighbour distance in units of lambda (> 0).
        axis: unit vector along the chain.
        dipole: unit dipole orientation shared by all emitters.
    """
    if n < 1:
        raise ValidationError(f"chain length must be >= 1, got {n}")
    if spacing <= 0:
        raise ValidationError(f"spacing must be > 0, got {spacing}")
    axis = _check_unit(_as_vector(axis, "axis"), "axis")
    dipole = _check_unit(_as_vector(dipole, "dipole"), "dipole")
    positions = np.arange(n)[:, None] * spacing * axis[None, :]
    dipoles = np.tile(dipole, (n, 1))
    return EmitterArray(positions, dipoles)


def build_square_lattice(side: int, spacing: float, dipole) -> EmitterArray:
    """side x side square lattice in the x-y plane with lattice constant ``spacing``."""
    if side < 1:
        raise ValidationError(f"lattice side must be >= 1, got {side}")
    if spacing <= 0:
        raise ValidationError(f"spacing must be > 0, got {spacing}")
    dipole = _check_unit(_as_vector(dipole, "dipole"), "dipole")
    i, j = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    positions = np.zeros((side * side, 3))
    positions[:, 0] = i.ravel() * spacing
    positions[:, 1] = j.ravel() * spacing
    dipoles = np.tile(dipole, (side * side, 1))
    return EmitterArray(positions, dipoles)


def build_coincident(n: int, dipole=(0.0, 0.0, 1.0)) -> EmitterArray:
    """Dicke-limit array: n emitters at the origin, flagged coincident."""
    dipole = _check_unit(_as_vector(dipole, "dipole"), "dipole")
    return EmitterArray(
        np.zeros((n, 3)), np.tile(dipole, (n, 1)), coincident=True
    )


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    min_distance: float
    issues: tuple = ()

    def __bool__(self):
        return self.ok


def validate(array: EmitterArray, eps_min: float = DEFAULT_EPS_MIN) -> ValidationReport:
    """Check dipole norms and minimum pairwise distance.

    Returns a report instead of raising so callers choose severity.
    Coincident-flagged arrays skip the distance check (Dicke mode).
    """
    issues = []
    norms = np.linalg.norm(array.dipoles, axis=1)
    bad = np.where(np.abs(norms - 1.0) > _UNIT_TOL)[0]
    if bad.size:
        issues.append(f"non-unit dipoles at indices {bad.tolist()}")
    min_dist = array.min_distance()
    if not array.coincident and min_dist < eps_min:
        issues.append(
            f"minimum pairwise distance {min_dist:.3e} below eps_min {eps_min:.3e}"
        )
    return ValidationReport(ok=not issues, min_distance=min_dist, issues=tuple(issues))


@dataclass(frozen=True)
class DetectorConfig:
    """Two far-field detection directions with optional polarizations."""

    direction_a: np.ndarray
    direction_b: np.ndarray
    polarization_a: Optional[np.ndarray] = None
    polarization_b: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("direction_a", "direction_b"):
            v = _check_unit(_as_vector(getattr(self, name), name), name)
            object.__setattr__(self, name, v)
        for pname, dname in (
            ("polarization_a", "direction_a"),
            ("polarization_b", "direction_b"),
        ):
            p = getattr(self, pname)
            if p is None:
                continue
            p = _check_unit(_as_vector(p, pname), pname)
            d = getattr(self, dname)
            if abs(float(np.dot(p, d))) >= 1e-10:
                raise ValidationError(f"{pname} must be orthogonal to {dname}")
            object.__setattr__(self, pname, p)

    def direction(self, port: str) -> np.ndarray:
        return self.direction_a if port == "a" else self.direction_b

    def polarization(self, port: str):
        return self.polarization_a if port == "a" else self.polarization_b


@dataclass(frozen=True)
class DriveParams:
    """Monochromatic plane-wave drive in gamma_0 / lambda units.

    ``rabi`` is the Rabi frequency Omega in gamma_0, ``detuning`` is
    omega_0 - omega_L in gamma_0, and the laser phase at position R is
    2*pi * k_magnitude_over_k0 * (k_direction . R) with R in lambda.
    """

    rabi: float
    detuning: float = 0.0
    k_direction: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0])
    )
    k_magnitude_over_k0: float = 1.0

    def __post_init__(self):
        if self.rabi < 0:
            raise ValidationError(f"rabi must be >= 0, got {self.rabi}")
        if self.k_magnitude_over_k0 <= 0:
            raise ValidationError("k_magnitude_over_k0 must be > 0")
        k = _check_unit(_as_vector(self.k_direction, "k_direction"), "k_direction")
        object.__setattr__(self, "k_direction", k)

    def phases(self, positions: np.ndarray) -> np.ndarray:
        """k_L . R_mu for every emitter position (radians)."""
        proj = positions @ self.k_direction
        return 2.0 * np.pi * self.k_magnitude_over_k0 * proj


@dataclass(frozen=True)
class GeometrySpec:
    """Parametric array family used by sweep configs.

    ``kind``: "chain" (count emitters along axis), "square-lattice"
    (count = side length), "coincident" (Dicke mode, spacing ignored) or
    "custom" (explicit positions, not sweepable over d).
    """

    kind: str
    count: int = 0
    axis: tuple = (1.0, 0.0, 0.0)
    dipole: tuple = (0.0, 0.0, 1.0)
    spacing: float = 0.5
    positions: Optional[tuple] = None
    dipoles: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("chain", "square-lattice", "coincident", "custom"):
            raise ValidationError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "custom" and self.positions is None:
            raise ValidationError("custom geometry requires explicit positions")
        if self.kind != "custom" and self.count < 1:
            raise ValidationError("geometry count must be >= 1")

    @property
    def emitter_count(self) -> int:
        if self.kind == "square-lattice":
            return self.count * self.count
        if self.kind == "custom":
            return len(self.positions)
        return self.count

    def build(self, d_over_lambda: Optional[float] = None) -> EmitterArray:
        """Concrete array at the given separation (default: ``spacing``).

        d = 0 is the Dicke limit: chain/lattice families return the
        coincident-flagged array there, since the level shift diverges at
        zero separation.
        """
        d = self.spacing if d_over_lambda is None else float(d_over_lambda)
        if self.kind in ("chain", "square-lattice") and d == 0.0:
            return build_coincident(self.emitter_count, self.dipole)
        if self.kind == "chain":
            return build_chain(self.count, d, self.axis, self.dipole)
        if self.kind == "square-lattice":
            return build_square_lattice(self.count, d, self.dipole)
        if self.kind == "coincident":
            return build_coincident(self.count, self.dipole)
        if d_over_lambda is not None:
            raise ValidationError("custom geometry cannot be swept over d")
        dip = self.dipoles
        if dip is None:
            dip = tuple(tuple(self.dipole) for _ in self.positions)
        return EmitterArray(np.asarray(self.positions), np.asarray(dip))


@dataclass(frozen=True)
class SamplingSettings:
    m: int = 6
    samples_pairwise: int = 10000
    samples_mwise: int = 1000
    exhaustive: bool = False

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"sample size m must be >= 2, got {self.m}")
        if self.samples_pairwise < 1 or self.samples_mwise < 1:
            raise ValidationError("sample counts must be positive")


_SWEEP_METHODS = (
    "exact",
    "closed-form",
    "pairwise",
    "pairwise-corr",
    "m-wise",
    "m-wise-corr",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one experiment family.

    ``time`` is the observation time in 1/gamma_0, or the string "steady"
    for stationary-state observables. ``d_grid`` lists the separations (in
    lambda) swept by the harness; ``t_grid`` is only used by emission-rate
    traces.
    """

    geometry: GeometrySpec
    protocol: str = "inverted-free-decay"
    flavor: str = "total"
    drive: Optional[DriveParams] = None
    detector: Optional[DetectorConfig] = None
    time: object = 0.0
    t_grid: Optional[tuple] = None
    d_grid: tuple = ()
    methods: tuple = ("closed-form",)
    sampling: SamplingSettings = field(default_factory=SamplingSettings)
    seed: int = 0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValidationError(
                f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}"
            )
        if self.flavor not in FLAVORS:
            raise ValidationError(
                f"flavor must be one of {FLAVORS}, got {self.flavor!r}"
            )
        if self.flavor in ("directional", "polarized-directional") and self.detector is None:
            raise ValidationError(f"flavor {self.flavor!r} requires a detector config")
        if self.flavor == "polarized-directional":
            det = self.detector
            if det.polarization_a is None or det.polarization_b is None:
                raise ValidationError(
                    "polarized-directional flavor requires both polarizations"
                )
        if self.protocol.startswith("driven") and self.drive is None:
            raise ValidationError(f"protocol {self.protocol!r} requires drive params")
        if self.protocol == "driven-steady-state" and self.time != "steady":
            object.__setattr__(self, "time", "steady")
        if self.time != "steady" and float(self.time) < 0:
            raise ValidationError("time must be >= 0 or 'steady'")
        for mth in self.methods:
            if mth not in _SWEEP_METHODS:
                raise ValidationError(f"unknown method {mth!r}")
        if not (-(2**63) <= int(self.seed) < 2**64):
            raise ValidationError("seed must fit in 64 bits")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "d_grid", tuple(float(d) for d in self.d_grid))
        if self.t_grid is not None:
            tg = tuple(float(t) for t in self.t_grid)
            if any(b <= a for a, b in zip(tg, tg[1:])):
                raise ValidationError("t_grid must be strictly increasing")
            object.__setattr__(self, "t_grid", tg)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        geo = {
            "kind": self.geometry.kind,
            "count": self.geometry.count,
            "axis": list(self.geometry.axis),
            "dipole": list(self.geometry.dipole),
            "spacing": self.geometry.spacing,
        }
        if self.geometry.positions is not None:
            geo["positions"] = [list(p) for p in self.geometry.positions]
        if self.geometry.dipoles is not None:
            geo["dipoles"] = [list(d) for d in self.geometry.dipoles]
        out = {
            "geometry": geo,
            "protocol": self.protocol,
            "flavor": self.flavor,
            "time": self.time,
            "d_grid": list(self.d_grid),
            "methods": list(self.methods),
            "sampling": {
                "m": self.sampling.m,
                "samples_pairwise": self.sampling.samples_pairwise,
                "samples_mwise": self.sampling.samples_mwise,
                "exhaustive": self.sampling.exhaustive,
            },
            "seed": int(self.seed),
        }
        if self.t_grid is not None:
            out["t_grid"] = list(self.t_grid)
        if self.drive is not None:
            out["drive"] = {
                "rabi": self.drive.rabi,
                "detuning": self.drive.detuning,
                "k_direction": list(self.drive.k_direction),
                "k_magnitude_over_k0": self.drive.k_magnitude_over_k0,
            }
        if self.detector is not None:
            det = {
                "direction_a": list(self.detector.direction_a),
                "direction_b": list(self.detector.direction_b),
            }
            if self.detector.polarization_a is not None:
                det["polarization_a"] = list(self.detector.polarization_a)
            if self.detector.polarization_b is not None:
                det["polarization_b"] = list(self.detector.polarization_b)
            out["detector"] = det
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        try:
            geo_d = dict(data["geometry"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"config missing geometry section: {exc}")
        geo = GeometrySpec(
            kind=geo_d.get("kind", "chain"),
            count=int(geo_d.get("count", 0)),
            axis=tuple(geo_d.get("axis", (1.0, 0.0, 0.0))),
            dipole=tuple(geo_d.get("dipole", (0.0, 0.0, 1.0))),
            spacing=float(geo_d.get("spacing", 0.5)),
            positions=tuple(map(tuple, geo_d["positions"])) if "positions" in geo_d else None,
            dipoles=tuple(map(tuple, geo_d["dipoles"])) if "dipoles" in geo_d else None,
        )
        drive = None
        if "drive" in data and data["drive"] is not None:
            dr = data["drive"]
            drive = DriveParams(
                rabi=float(dr["rabi"]),
                detuning=float(dr.get("detuning", 0.0)),
                k_direction=dr.get("k_direction", (1.0, 0.0, 0.0)),
                k_magnitude_over_k0=float(dr.get("k_magnitude_over_k0", 1.0)),
            )
        detector = None
        if "detector" in data and data["detector"] is not None:
            dt = data["detector"]
            detector = DetectorConfig(
                direction_a=dt["direction_a"],
                direction_b=dt["direction_b"],
                polarization_a=dt.get("polarization_a"),
                polarization_b=dt.get("polarization_b"),
            )
        samp = data.get("sampling", {})
        sampling = SamplingSettings(
            m=int(samp.get("m", 6)),
            samples_pairwise=int(samp.get("samples_pairwise", 10000)),
            samples_mwise=int(samp.get("samples_mwise", 1000)),
            exhaustive=bool(samp.get("exhaustive", False)),
        )
        return cls(
            geometry=geo,
            protocol=data.get("protocol", "inverted-free-decay"),
            flavor=data.get("flavor", "total"),
            drive=drive,
            detector=detector,
            time=data.get("time", 0.0),
            t_grid=tuple(data["t_grid"]) if data.get("t_grid") else None,
            d_grid=tuple(data.get("d_grid", ())),
            methods=tuple(data.get("methods", ("closed-form",))),
            sampling=sampling,
            seed=int(data.get("seed", 0)),
        )

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"config {path} is not valid JSON: {exc}")
        return cls.from_dict(data)
