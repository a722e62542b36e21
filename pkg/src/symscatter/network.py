"""Scattering-network data model, lead dispersion, and port reduction.

A network is an ``N x N`` center matrix (generally non-Hermitian) plus a set
of semi-infinite uniform leads with hopping ``J``.  Lead ``j`` touches center
site ``site`` through coupling ``g``.  Everything is measured relative to the
reference frequency ``omega0``, which cancels out of every coefficient.

Sites are 0-based here and 1-based in files; ``serialize_network`` and
``parse_network`` own the translation.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import OutOfBand, ParseError, SamePort, UnknownLead, ValidationError
from .numerics import as_cmatrix


@dataclass(frozen=True)
class LeadAttachment:
    """One lead.

    ``offset`` counts lead sites that have been absorbed into the center by
    :func:`augment_general_coupling`.  Amplitudes are always reported at the
    lead's original reference plane, so an offset only shifts phases.
    """

    lead_id: int
    site: int
    g: float
    offset: int = 0


@dataclass(frozen=True, eq=False)
class ScatteringNetwork:
    hc: np.ndarray
    leads: tuple[LeadAttachment, ...] = ()
    j_lead: float = 1.0
    omega0: float = 0.0

    def __post_init__(self):
        hc = as_cmatrix(self.hc, square=True)
        hc.setflags(write=False)
        object.__setattr__(self, "hc", hc)
        object.__setattr__(self, "leads", tuple(self.leads))
        if not (math.isfinite(self.j_lead) and self.j_lead > 0):
            raise ValidationError(f"lead hopping J must be positive, got {self.j_lead}")
        if not math.isfinite(self.omega0):
            raise ValidationError("omega0 must be finite")
        ids, sites = set(), set()
        for lead in self.leads:
            if lead.lead_id in ids:
                raise ValidationError(f"duplicate lead id {lead.lead_id}")
            if not 0 <= lead.site < self.n:
                raise ValidationError(
                    f"lead {lead.lead_id} attaches to site {lead.site + 1}, center has {self.n} sites"
                )
            if lead.site in sites:
                raise ValidationError(f"two leads attach to site {lead.site + 1}")
            if not math.isfinite(lead.g):
                raise ValidationError(f"lead {lead.lead_id} has non-finite coupling")
            if lead.offset < 0:
                raise ValidationError(f"lead {lead.lead_id} has negative offset")
            ids.add(lead.lead_id)
            sites.add(lead.site)

    @property
    def n(self) -> int:
        return self.hc.shape[0]

    @property
    def lead_ids(self) -> list[int]:
        return [lead.lead_id for lead in self.leads]

    def lead(self, lead_id: int) -> LeadAttachment:
        for lead in self.leads:
            if lead.lead_id == lead_id:
                return lead
        raise UnknownLead(f"no lead with id {lead_id} (have {self.lead_ids})")

    def is_normalized(self) -> bool:
        return all(lead.g == self.j_lead for lead in self.leads)

    def __eq__(self, other):
        if not isinstance(other, ScatteringNetwork):
            return NotImplemented
        return (
            self.leads == other.leads
            and self.j_lead == other.j_lead
            and self.omega0 == other.omega0
            and self.hc.shape == other.hc.shape
            and np.array_equal(self.hc, other.hc)
        )

    __hash__ = None


def check_momentum(k: float) -> float:
    k = float(k)
    if not (-math.pi < k < 0.0):
        raise OutOfBand(f"momentum {k} outside the propagating branch (-pi, 0)")
    return k


def dispersion(net: ScatteringNetwork, k: float) -> float:
    return net.omega0 + 2.0 * net.j_lead * math.cos(k)


def momentum_for_frequency(net: ScatteringNetwork, omega: float) -> float:
    x = (omega - net.omega0) / (2.0 * net.j_lead)
    if not abs(x) < 1.0:
        raise OutOfBand(
            f"frequency {omega} outside the open band ({net.omega0 - 2 * net.j_lead}, "
            f"{net.omega0 + 2 * net.j_lead})"
        )
    return -math.acos(x)


def augment_general_coupling(net: ScatteringNetwork) -> ScatteringNetwork:
    """Absorb the first site of every lead whose coupling is neither 0 nor J.

    The absorbed site becomes a new center site (on-site 0) coupled by ``g``
    to the old attachment site; the lead then attaches to it with ``J``.
    Leads with ``g == 0`` are dropped.
    """
    J = net.j_lead
    keep = [lead for lead in net.leads if lead.g != 0.0]
    general = [lead for lead in keep if lead.g != J]
    if not general and len(keep) == len(net.leads):
        return net
    n_new = net.n + len(general)
    hc = np.zeros((n_new, n_new), dtype=np.complex128)
    hc[: net.n, : net.n] = net.hc
    leads = []
    extra = net.n
    for lead in keep:
        if lead.g == J:
            leads.append(lead)
            continue
        hc[lead.site, extra] = lead.g
        hc[extra, lead.site] = lead.g
        leads.append(replace(lead, site=extra, g=J, offset=lead.offset + 1))
        extra += 1
    return ScatteringNetwork(hc, tuple(leads), J, net.omega0)


def effective_two_port(net: ScatteringNetwork, m: int, n: int, k: float) -> np.ndarray:
    """Center matrix seen by ports ``m`` and ``n`` with every other lead folded in.

    Each extra lead ``j`` adds ``g_j**2 / J * exp(ik)`` to its attachment site.
    """
    if m == n:
        raise SamePort(f"ports must differ, got {m} twice")
    net.lead(m)
    net.lead(n)
    h = np.array(net.hc)
    sigma = np.exp(1j * k) / net.j_lead
    for lead in net.leads:
        if lead.lead_id in (m, n):
            continue
        h[lead.site, lead.site] += lead.g ** 2 * sigma
    return h


# -- file format -------------------------------------------------------------

_NETWORK_KEYS = {"n", "omega0", "J", "hc", "leads"}
_NETWORK_REQUIRED = {"n", "hc"}
_LEAD_KEYS = {"id", "site", "g", "offset"}
_LEAD_REQUIRED = {"id", "site", "g"}


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ParseError(f"{where}: non-finite value")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def parse_complex(value, where: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise ParseError(f"{where}: complex numbers are [re, im] pairs, got {value!r}")
    return complex(_number(value[0], where + "[0]"), _number(value[1], where + "[1]"))


def parse_cmatrix(rows, where: str) -> np.ndarray:
    """Parse ``[[ [re, im], ... ], ...]``; ragged or non-square input is a ValidationError."""
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"{where}: expected a non-empty list of rows")
    parsed = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise ParseError(f"{where}[{i}]: expected a non-empty row")
        parsed.append([parse_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    width = len(parsed[0])
    if any(len(row) != width for row in parsed):
        raise ValidationError(f"{where}: rows have unequal lengths")
    if width != len(parsed):
        raise ValidationError(f"{where}: matrix is {len(parsed)}x{width}, must be square")
    return np.array(parsed, dtype=np.complex128)


def cmatrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ParseError(f"{where}: missing key(s) {sorted(missing)}")


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def parse_network(text: str) -> ScatteringNetwork:
    doc = _load_json(text)
    _check_keys(doc, _NETWORK_KEYS, _NETWORK_REQUIRED, "network")
    n = _integer(doc["n"], "n")
    hc = parse_cmatrix(doc["hc"], "hc")
    if hc.shape[0] != n:
        raise ValidationError(f"n = {n} but hc is {hc.shape[0]}x{hc.shape[1]}")
    J = _number(doc.get("J", 1.0), "J")
    omega0 = _number(doc.get("omega0", 0.0), "omega0")
    raw_leads = doc.get("leads", [])
    if not isinstance(raw_leads, list):
        raise ParseError("leads: expected a list")
    leads = []
    for i, item in enumerate(raw_leads):
        where = f"leads[{i}]"
        _check_keys(item, _LEAD_KEYS, _LEAD_REQUIRED, where)
        leads.append(
            LeadAttachment(
                lead_id=_integer(item["id"], where + ".id"),
                site=_integer(item["site"], where + ".site") - 1,
                g=_number(item["g"], where + ".g"),
                offset=_integer(item.get("offset", 0), where + ".offset"),
            )
        )
    return ScatteringNetwork(hc, tuple(leads), J, omega0)


def serialize_network(net: ScatteringNetwork) -> str:
    leads = []
    for lead in net.leads:
        item = {"id": lead.lead_id, "site": lead.site + 1, "g": float(lead.g)}
        if lead.offset:
            item["offset"] = lead.offset
        leads.append(item)
    doc = {
        "n": net.n,
        "omega0": float(net.omega0),
        "J": float(net.j_lead),
        "hc": cmatrix_to_json(net.hc),
        "leads": leads,
    }
    return json.dumps(doc, indent=1) + "\n"


def two_port_network(hc, J: float = 1.0, sites=(0, 1), omega0: float = 0.0) -> ScatteringNetwork:
    """Network with leads ``1, 2, ...`` attached with ``g = J`` at the given 0-based sites."""
    leads = tuple(LeadAttachment(i + 1, s, J) for i, s in enumerate(sites))
    return ScatteringNetwork(np.asarray(hc, dtype=np.complex128), leads, J, omega0)
