"""Named scattering centers with the symmetry operators known for them.

Lead ids follow the attachment site (1-based), so a three-site center with
leads on its outer sites exposes ports ``1`` and ``3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ValidationError
from .network import LeadAttachment, ScatteringNetwork, effective_two_port
from .symmetry import MappingClass, SymmetrySpec, classify_mapping, verify

# momenta used to confirm that a symmetry of the bare center survives the
# self-energy of a folded-in lead
_PROBE_K = (-2.3, -1.1, -0.4)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    network: ScatteringNetwork
    known_symmetries: tuple[tuple[SymmetrySpec, MappingClass], ...]
    notes: str = ""
    ports: tuple[int, int] = (1, 2)
    params: dict = field(default_factory=dict)

    @property
    def specs(self) -> list[SymmetrySpec]:
        return [s for s, _ in self.known_symmetries]


def _network(hc, sites, J):
    leads = tuple(LeadAttachment(s + 1, s, J) for s in sites)
    return ScatteringNetwork(np.asarray(hc, dtype=np.complex128), leads, J)


def _attach(net, ports, specs, check_k=_PROBE_K):
    """Pair each spec with its mapping, keeping only those valid on the effective center."""
    m, n = ports
    sm, sn = net.lead(m).site, net.lead(n).site
    out = []
    for spec in specs:
        if len(net.leads) > 2:
            if any(verify(effective_two_port(net, m, n, k), spec) > 1e-9 for k in check_k):
                continue
        elif verify(net.hc, spec) > 1e-9:
            raise ValidationError(f"listed {spec.label} does not hold")
        out.append((spec, classify_mapping(spec.u, sm, sn)))
    return tuple(out)


def _exchange_with_phase(phi):
    return np.array([[0, 0, 1], [0, np.exp(-1j * phi), 0], [1, 0, 0]], dtype=np.complex128)


def _close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def three_resonator_flux(v1, v2, v3, phi: float, J: float = 1.0, three_port: bool = False, name: str | None = None) -> CatalogEntry:
    """Three coupled resonators with a Peierls phase on the (2, 3) link.

    Leads sit on sites 1 and 3; ``three_port`` adds a lead on site 2.
    Attached operators: the phase-dressed exchange as K (``V1 = V3*``,
    real ``V2``) and as C (``V1 = V3``); the identity as Q for real on-site
    terms; the identity as C when the phase factor is real.
    """
    if not J > 0:
        raise ValidationError("J must be positive")
    v1, v2, v3 = complex(v1), complex(v2), complex(v3)
    e = np.exp(1j * phi)
    hc = np.array([[v1, J, J], [J, v2, J * np.conj(e)], [J, J * e, v3]], dtype=np.complex128)
    net = _network(hc, (0, 1, 2) if three_port else (0, 2), J)
    x = _exchange_with_phase(phi)
    specs = []
    if _close(v1, np.conj(v3)) and abs(v2.imag) <= 1e-12:
        specs.append(SymmetrySpec("K", 1, x))
    if _close(v1, v3):
        specs.append(SymmetrySpec("C", 1, x))
    if all(abs(v.imag) <= 1e-12 for v in (v1, v2, v3)):
        specs.append(SymmetrySpec("Q", 1, np.eye(3)))
    if abs(e.imag) <= 1e-12:
        specs.append(SymmetrySpec("C", 1, np.eye(3)))
    ports = (1, 3)
    return CatalogEntry(
        name or "three_resonator_flux",
        net,
        _attach(net, ports, specs),
        notes=f"V = ({v1}, {v2}, {v3}), phi = {phi}, J = {J}",
        ports=ports,
        params={"v1": v1, "v2": v2, "v3": v3, "phi": phi, "J": J},
    )


def dissipative_three(kappa: float, phi: float, v1=0.0, v2=1.0, v3=0.0, J: float = 1.0, name: str | None = None) -> CatalogEntry:
    """Three resonators where sites 1 and 2 share a lossy intermediary (coupling ``-i kappa``)."""
    if not J > 0:
        raise ValidationError("J must be positive")
    if kappa < 0:
        raise ValidationError("kappa must be non-negative")
    e = np.exp(1j * phi)
    hc = np.array(
        [[v1, -1j * kappa, J], [-1j * kappa, v2, J * np.conj(e)], [J, J * e, v3]], dtype=np.complex128
    )
    net = _network(hc, (0, 2), J)
    return CatalogEntry(
        name or "dissipative_three",
        net,
        (),
        notes=f"kappa = {kappa}, V = ({v1}, {v2}, {v3}), phi = {phi}, J = {J}",
        ports=(1, 3),
        params={"kappa": kappa, "phi": phi, "v1": v1, "v2": v2, "v3": v3, "J": J},
    )


def _two_site(name, hc, J, specs, notes, params):
    net = _network(hc, (0, 1), J)
    return CatalogEntry(name, net, _attach(net, (1, 2), specs), notes=notes, ports=(1, 2), params=params)


def uniform_two_site(J=1.0):
    sx = np.array([[0, 1], [1, 0]])
    return _two_site(
        "uniform_two_site",
        [[0, J], [J, 0]],
        J,
        [SymmetrySpec("Q", 1, np.eye(2)), SymmetrySpec("C", 1, np.eye(2)), SymmetrySpec("P", 1, sx)],
        "uniform chain segment; Hermitian, symmetric and mirror symmetric",
        {"J": J},
    )


def c1_phase(phi=math.pi / 3):
    e = np.exp(1j * phi)
    return _two_site(
        "c1_phase",
        [[1, np.conj(e)], [e, 1j]],
        1.0,
        [SymmetrySpec("C", 1, np.diag([1, e * e]))],
        "C with diag(1, e^{2i phi}); t_L = e^{2i phi} t_R",
        {"phi": phi},
    )


def q1_example():
    return _two_site(
        "q1_example",
        [[0, 1j - 1], [1j + 1, 1]],
        1.0,
        [SymmetrySpec("Q", 1, np.diag([1, -1]))],
        "pseudo-Hermitian with sigma_z",
        {},
    )


def qI_gain_loss(gamma=1.0, J=1.0, phi=0.5):
    return _two_site(
        "qI_gain_loss",
        [[1j * gamma, J * math.exp(-phi)], [J * math.exp(phi), -1j * gamma]],
        J,
        [SymmetrySpec("Q", 1, np.array([[0, 1], [1, 0]]))],
        "gain/loss with asymmetric coupling; Q with sigma_x protects nothing",
        {"gamma": gamma, "J": J, "phi": phi},
    )


def asym_two_site(J=1.0, phi=0.5):
    return _two_site(
        "asym_two_site",
        [[0, J * math.exp(-phi)], [J * math.exp(phi), 0]],
        J,
        [SymmetrySpec("C", 1, np.array([[0, 1], [1, 0]]))],
        "asymmetric coupling; C with sigma_x gives r_L = r_R",
        {"J": J, "phi": phi},
    )


@dataclass(frozen=True)
class ModelDef:
    name: str
    build: Callable[..., CatalogEntry]
    defaults: dict
    description: str


MODELS: dict[str, ModelDef] = {}


def _register(name, build, defaults, description):
    MODELS[name] = ModelDef(name, build, defaults, description)


_register("uniform_two_site", uniform_two_site, {"J": 1.0}, "[[0,J],[J,0]]")
_register("c1_phase", c1_phase, {"phi": math.pi / 3}, "[[1,e^{-i phi}],[e^{i phi},i]]")
_register("q1_example", q1_example, {}, "[[0,i-1],[i+1,1]]")
_register("qI_gain_loss", qI_gain_loss, {"gamma": 1.0, "J": 1.0, "phi": 0.5}, "[[i gamma,J e^{-phi}],[J e^{phi},-i gamma]]")
_register("asym_two_site", asym_two_site, {"J": 1.0, "phi": 0.5}, "[[0,J e^{-phi}],[J e^{phi},0]]")
_register(
    "isolator_single_loss",
    lambda gamma=1.0, phi=-math.pi / 2, J=1.0: three_resonator_flux(0, -1j * gamma, 0, phi, J, name="isolator_single_loss"),
    {"gamma": 1.0, "phi": -math.pi / 2, "J": 1.0},
    "{0,-i gamma,0} with flux phi",
)
_register(
    "unidirectional",
    lambda gamma=1.0, phi=-math.pi / 2, J=1.0: three_resonator_flux(1j * gamma, -1j * gamma, 0, phi, J, name="unidirectional"),
    {"gamma": 1.0, "phi": -math.pi / 2, "J": 1.0},
    "{i gamma,-i gamma,0} with flux phi",
)
_register(
    "circulator_three_port",
    lambda phi=math.pi / 2, J=1.0: three_resonator_flux(0, 0, 0, phi, J, three_port=True, name="circulator_three_port"),
    {"phi": math.pi / 2, "J": 1.0},
    "{0,0,0} with flux phi and a lead on every site",
)
_register(
    "dissipative_figS1",
    lambda kappa=1.0, phi=-math.pi / 2, J=1.0: dissipative_three(kappa, phi, 0.0, J, 0.0, J, name="dissipative_figS1"),
    {"kappa": 1.0, "phi": -math.pi / 2, "J": 1.0},
    "dissipative coupling -i kappa between sites 1 and 2, V = {0,J,0}",
)
_register(
    "three_resonator_kI",
    lambda gamma=0.5, v2=0.3, phi=math.pi / 3, J=1.0: three_resonator_flux(
        1j * gamma, v2, -1j * gamma, phi, J, name="three_resonator_kI"
    ),
    {"gamma": 0.5, "v2": 0.3, "phi": math.pi / 3, "J": 1.0},
    "{i gamma, V2, -i gamma}: balanced gain and loss, K with the phase-dressed exchange",
)


def model_names() -> list[str]:
    return list(MODELS)


def get_model(name: str, **overrides) -> CatalogEntry:
    """Build a named model, overriding any of its default parameters."""
    try:
        model = MODELS[name]
    except KeyError:
        raise ValidationError(f"unknown model {name!r}; known: {', '.join(MODELS)}") from None
    unknown = set(overrides) - set(model.defaults)
    if unknown:
        raise ValidationError(
            f"model {name!r} has no parameter(s) {sorted(unknown)}; it takes {sorted(model.defaults) or 'none'}"
        )
    return model.build(**{**model.defaults, **overrides})


def catalog() -> list[CatalogEntry]:
    return [get_model(name) for name in MODELS]
