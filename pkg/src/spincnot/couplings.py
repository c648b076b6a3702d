"""Hubbard-model parameters -> effective exchange couplings.

Occupations are written the way the energy formulas index them: for the
single-spin systems ``(w, i, j, k)`` = electrons on ``1L, 1R, 3R, 2R``; for the
singlet-triplet systems ``(w, z, i, j, k)`` = electrons on
``1L, 2L, 1R, 3R, 2R``.  All pair keys are written as concatenated level
names, e.g. ``"1R2R"``; a pair is looked up in either order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .spinmodel import Architecture, Kind, architecture

DENOMINATOR_FLOOR = 1e-9


class BadOccupation(ValueError):
    pass


class DegenerateDenominator(ArithmeticError):
    pass


def _pair(d: dict, a: str, b: str, default=None):
    for key in (a + b, b + a):
        if key in d:
            return d[key]
    if default is not None:
        return default
    raise KeyError(f"missing pair {a}{b}")


@dataclass
class HubbardParams:
    site_energies: dict[str, float] = field(default_factory=dict)
    tunnelings: dict[str, float] = field(default_factory=dict)
    onsite_coulomb: dict[str, float] = field(default_factory=dict)
    intersite_coulomb: dict[str, float] = field(default_factory=dict)
    spin_exchange: dict[str, float] = field(default_factory=dict)
    occupation_hopping: dict[str, float] = field(default_factory=dict)
    units: str = "ueV"

    def __post_init__(self):
        for name in ("onsite_coulomb", "intersite_coulomb"):
            for key, val in getattr(self, name).items():
                if val < 0:
                    raise ValueError(f"{name}[{key}] = {val} is negative")

    def eps(self, level: str) -> float:
        return self.site_energies.get(level, 0.0)

    def U(self, level: str) -> float:
        return self.onsite_coulomb.get(level, 0.0)

    def V(self, a: str, b: str) -> float:
        return _pair(self.intersite_coulomb, a, b, 0.0)

    def t(self, a: str, b: str) -> float:
        return _pair(self.tunnelings, a, b, 0.0)

    def Jt(self, a: str, b: str) -> float:
        return _pair(self.occupation_hopping, a, b, 0.0)

    def Je(self, a: str, b: str) -> float:
        return _pair(self.spin_exchange, a, b, 0.0)

    @classmethod
    def from_dict(cls, d: dict) -> HubbardParams:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known - {"comment", "architecture"}
        if unknown:
            raise ValueError(f"unknown HubbardParams fields: {sorted(unknown)}")
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def load_params(path) -> HubbardParams:
    return HubbardParams.from_dict(json.loads(Path(path).read_text()))


# level order inside an occupation tuple
_LEVELS_SINGLE = ("1L", "1R", "3R", "2R")
_LEVELS_ST = ("1L", "2L", "1R", "3R", "2R")

# inter-qubit Coulomb pairs present in each configuration
_INTER = {
    Kind.SingleHybridA: (("1L", "1R"), ("1L", "3R")),
    Kind.SingleHybridB: (("1L", "2R"),),
    Kind.SingletTripletHybridA: (("2L", "1R"), ("2L", "3R")),
    Kind.SingletTripletHybridB: (("2L", "2R"),),
}


def occupation_energy(arch: Architecture, occupation, p: HubbardParams) -> float:
    """Energy of a charge configuration: site energies, on-site and inter-level
    Coulomb terms of the hybrid (and singlet-triplet) qubit, plus the
    configuration-specific inter-qubit Coulomb terms."""
    levels = _LEVELS_ST if arch.singlet_triplet else _LEVELS_SINGLE
    occ = tuple(occupation)
    if len(occ) != len(levels):
        raise BadOccupation(f"{arch.kind.value} needs {len(levels)} occupations, got {occ}")
    if any(int(n) != n or not 0 <= n <= 2 for n in occ):
        raise BadOccupation(f"occupations must be 0, 1 or 2: {occ}")
    n = dict(zip(levels, occ))

    e = sum(n[lv] * p.eps(lv) for lv in levels)
    e += sum(p.U(lv) for lv in levels if n[lv] == 2)
    e += n["1R"] * n["3R"] * p.V("1R", "3R")
    e += n["1R"] * n["2R"] * p.V("1R", "2R")
    e += n["2R"] * n["3R"] * p.V("2R", "3R")
    if arch.singlet_triplet:
        e += n["1L"] * n["2L"] * p.V("1L", "2L")
    for a, b in _INTER[arch.kind]:
        e += n[a] * n[b] * p.V(a, b)
    return e


def _occ(arch, left, right):
    return tuple(int(c) for c in left + right)


def energy_differences(arch: Architecture, p: HubbardParams) -> dict[str, float]:
    """Virtual-state energy gaps entering the coupling formulas."""
    E = lambda l, r: occupation_energy(arch, _occ(arch, l, r), p)  # noqa: E731
    if arch.singlet_triplet:
        g = E("11", "111")
        d = {
            "dE1R": E("11", "012") - g,
            "dE2R": E("11", "102") - g,
            "dE3R": E("11", "201") - g,
            "dE4R": E("11", "021") - g,
            "dE3L": E("02", "111") - g,
            "dE4L": E("20", "111") - g,
        }
        if arch.kind.config == "A":
            d["dE5"] = E("10", "211") - g
            d["dE6"] = E("10", "121") - g
        else:
            # printed as (10,121) for the 2L-2R hop; kept as published
            d["dE5"] = E("10", "121") - g
        return d
    g = E("1", "111")
    d = {
        "dE1": E("1", "012") - g,
        "dE2": E("1", "102") - g,
        "dE3": E("1", "201") - g,
        "dE4": E("1", "021") - g,
    }
    if arch.kind.config == "A":
        d["dE5"] = E("0", "211") - g
        d["dE6"] = E("0", "121") - g
    else:
        d["dE5"] = E("0", "112") - g
    return d


def _inv(de: float, name: str, floor: float) -> float:
    if abs(de) < floor:
        raise DegenerateDenominator(f"{name} = {de:.3e} is below the floor {floor:.1e}")
    return 1.0 / de


def exchange_couplings(
    arch: Architecture, p: HubbardParams, floor: float = DENOMINATOR_FLOOR
) -> dict[str, float]:
    """Exchange constants ``J_ab`` for every coupled pair of ``arch`` (energy units of ``p``)."""
    de = energy_differences(arch, p)
    inv = {k: _inv(v, k, floor) for k, v in de.items()}

    def single(a, b, key):
        return 4 * (p.t(a, b) - p.Jt(a, b)) ** 2 * inv[key] - 2 * p.Je(a, b)

    j = {}
    if arch.singlet_triplet:
        j["J_1R2R"] = single("1R", "2R", "dE1R")
        j["J_2R3R"] = single("2R", "3R", "dE2R")
        j["J_1R3R"] = (inv["dE3R"] + inv["dE4R"]) * 4 * p.Jt("1R", "3R") ** 2 - 2 * p.Je("1R", "3R")
        j["J_1L2L"] = (inv["dE3L"] + inv["dE4L"]) * 4 * (p.t("1L", "2L") - p.Jt("1L", "2L")) ** 2 - 2 * p.Je(
            "1L", "2L"
        )
        if arch.kind.config == "A":
            j["J_2L1R"] = single("2L", "1R", "dE5")
            j["J_2L3R"] = single("2L", "3R", "dE6")
        else:
            j["J_2L2R"] = single("2L", "2R", "dE5")
        return j
    j["J_1R2R"] = single("1R", "2R", "dE1")
    j["J_2R3R"] = single("2R", "3R", "dE2")
    j["J_1R3R"] = (inv["dE3"] + inv["dE4"]) * 4 * p.Jt("1R", "3R") ** 2 - 2 * p.Je("1R", "3R")
    if arch.kind.config == "A":
        j["J_1L1R"] = single("1L", "1R", "dE5")
        j["J_1L3R"] = single("1L", "3R", "dE6")
    else:
        j["J_1L2R"] = single("1L", "2R", "dE5")
    return j


def couplings_csv(j: dict[str, float], units: str = "ueV") -> str:
    lines = [f"label,value_{units}"]
    lines += [f"{k},{v!r}" for k, v in j.items()]
    return "\n".join(lines) + "\n"


def example_params(kind=Kind.SingleHybridA) -> HubbardParams:
    """Illustrative parameter set shipped with the package (reverse-engineered, not measured)."""
    from importlib import resources

    name = f"hubbard_{Kind(kind).value}.json"
    text = resources.files("spincnot.data").joinpath(name).read_text()
    return HubbardParams.from_dict(json.loads(text))
