"""Two-port scattering coefficients, S-matrices and spectral singularities.

Two independent routes compute the same amplitudes:

* :func:`two_port` folds extra leads into on-site self-energies, forms
  ``Delta = H' - 2 J cos(k)`` and evaluates the closed-form ratios built from
  the four port elements of ``Delta^{-1}``.  Numerator and denominator are
  both multiplied by ``det(Delta)`` first, which turns every ``Delta^{-1}``
  element into a cofactor.  The result is the same function of ``k`` but
  stays finite where ``Delta`` itself is singular (bound states in the
  band, and several of the textbook isolator points).
* :func:`oracle_two_port` never forms ``Delta^{-1}``.  It writes the lead
  wavefunctions as plane-wave superpositions, imposes the center equations
  and lead matching directly, and solves one linear system for the center
  amplitudes and every outgoing amplitude at once.

Conventions: ``k`` lies in ``(-pi, 0)`` so ``exp(iks)`` moves towards larger
``s``.  In lead-local coordinates (distance ``d >= 1`` from the center) a
lead carries ``a exp(-ikd) + b exp(ikd)``: ``a`` incoming, ``b`` outgoing.
``S[out][in] = b_out / a_in``; for ports ordered ``(m, n)`` this is
``[[r_L, t_R], [t_L, r_R]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentReflection, SamePort
from .network import (
    ScatteringNetwork,
    augment_general_coupling,
    check_momentum,
    effective_two_port,
)
from .numerics import det, invert, minor, solve

DIVERGENCE_RTOL = 1e-10
REFLECTION_RTOL = 1e-9


@dataclass(frozen=True)
class ScatteringCoefficients:
    k: float
    t_l: complex
    r_l: complex
    t_r: complex
    r_r: complex
    divergent: bool = False
    denominator: complex = complex("nan")

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.r_l, self.t_r], [self.t_l, self.r_r]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class SMatrix:
    k: float
    ports: tuple[int, ...]
    s: np.ndarray
    divergent: bool = False

    def entry(self, out_lead: int, in_lead: int) -> complex:
        return complex(self.s[self.ports.index(out_lead), self.ports.index(in_lead)])


def _normalized(net: ScatteringNetwork) -> ScatteringNetwork:
    return net if net.is_normalized() else augment_general_coupling(net)


def _offset_phase(net: ScatteringNetwork, a: int, b: int, k: float) -> complex:
    """Phase that moves amplitudes from absorbed-site planes back to the original ones."""
    shift = net.lead(a).offset + net.lead(b).offset
    return np.exp(-1j * k * shift) if shift else 1.0


def delta_inverse_elements(net: ScatteringNetwork, m: int, n: int, k: float):
    """``(Dinv_mm, Dinv_mn, Dinv_nm, Dinv_nn)`` at the attachment sites of ports ``m, n``."""
    check_momentum(k)
    net = _normalized(net)
    h = effective_two_port(net, m, n, k)
    delta = h - 2.0 * net.j_lead * math.cos(k) * np.eye(net.n)
    dinv = invert(delta)
    sm, sn = net.lead(m).site, net.lead(n).site
    return (
        complex(dinv[sm, sm]),
        complex(dinv[sm, sn]),
        complex(dinv[sn, sm]),
        complex(dinv[sn, sn]),
    )


def coefficients_from_elements(elements, J: float, k: float) -> ScatteringCoefficients:
    """Closed-form ``t_L, r_L, t_R, r_R`` from the four port elements of ``Delta^{-1}``."""
    d_mm, d_mn, d_nm, d_nn = elements
    e = np.exp(1j * k)
    ei = 1.0 / e
    Ji = 1.0 / J
    den = (Ji + d_mm * e) * (Ji + d_nn * e) - d_mn * d_nm * e * e
    num_tl = d_nm * Ji * (e - ei)
    num_tr = d_mn * Ji * (e - ei)
    num_rl = d_mn * d_nm - (Ji * e + d_mm) * (Ji * ei + d_nn)
    num_rr = d_mn * d_nm - (Ji * e + d_nn) * (Ji * ei + d_mm)
    scale = max(1.0, abs(num_tl), abs(num_tr), abs(num_rl), abs(num_rr))
    divergent = bool(abs(den) < DIVERGENCE_RTOL * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        return ScatteringCoefficients(
            k=k,
            t_l=complex(num_tl / den),
            r_l=complex(num_rl / den),
            t_r=complex(num_tr / den),
            r_r=complex(num_rr / den),
            divergent=divergent,
            denominator=complex(den),
        )


@dataclass(frozen=True)
class PortCofactors:
    """``det(Delta)``, the four port entries of ``adj(Delta)`` and the complementary minor.

    ``adj_mn`` is ``det(Delta) * Dinv_mn``; ``minor`` is ``det`` of ``Delta``
    with rows and columns ``m, n`` removed.
    """

    det: complex
    adj_mm: complex
    adj_mn: complex
    adj_nm: complex
    adj_nn: complex
    minor: complex


def port_cofactors(net: ScatteringNetwork, m: int, n: int, k: float) -> PortCofactors:
    check_momentum(k)
    net = _normalized(net)
    h = effective_two_port(net, m, n, k)
    delta = h - 2.0 * net.j_lead * math.cos(k) * np.eye(net.n)
    sm, sn = net.lead(m).site, net.lead(n).site

    def adj(i, j):
        sign = -1.0 if (i + j) % 2 else 1.0
        return sign * minor(delta, (j,), (i,))

    return PortCofactors(
        det=det(delta),
        adj_mm=adj(sm, sm),
        adj_mn=adj(sm, sn),
        adj_nm=adj(sn, sm),
        adj_nn=adj(sn, sn),
        minor=minor(delta, (sm, sn), (sm, sn)),
    )


def coefficients_from_cofactors(c: PortCofactors, J: float, k: float) -> ScatteringCoefficients:
    """The closed-form coefficients multiplied through by ``det(Delta)``.

    Uses ``adj_mm * adj_nn - adj_mn * adj_nm = det * minor`` to cancel the
    remaining factor of ``det``.
    """
    e = np.exp(1j * k)
    ei = 1.0 / e
    Ji = 1.0 / J
    D, M = c.det, c.minor
    den = D * Ji * Ji + e * (c.adj_mm + c.adj_nn) * Ji + e * e * M
    num_tl = c.adj_nm * Ji * (e - ei)
    num_tr = c.adj_mn * Ji * (e - ei)
    num_rl = -M - D * Ji * Ji - (e * c.adj_nn + ei * c.adj_mm) * Ji
    num_rr = -M - D * Ji * Ji - (e * c.adj_mm + ei * c.adj_nn) * Ji
    # put everything on an O(1) scale before comparing
    w = max(abs(D) * Ji * Ji, abs(c.adj_mm) * Ji, abs(c.adj_nn) * Ji,
            abs(c.adj_mn) * Ji, abs(c.adj_nm) * Ji, abs(M))
    if w == 0.0:
        w = 1.0
    nums = (num_tl, num_rl, num_tr, num_rr)
    scale = max(1.0, *(abs(x) / w for x in nums))
    divergent = bool(abs(den) / w < DIVERGENCE_RTOL * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        return ScatteringCoefficients(
            k=k,
            t_l=complex(num_tl / den),
            r_l=complex(num_rl / den),
            t_r=complex(num_tr / den),
            r_r=complex(num_rr / den),
            divergent=divergent,
            denominator=complex(den / w),
        )


def two_port(net: ScatteringNetwork, m: int, n: int, k: float) -> ScatteringCoefficients:
    """Forward (incident on ``m``) and backward (incident on ``n``) coefficients.

    Networks with couplings other than ``0`` or ``J`` are augmented first;
    amplitudes are reported at the original lead reference planes.
    """
    if m == n:
        raise SamePort(f"ports must differ, got {m} twice")
    net = _normalized(net)
    c = coefficients_from_cofactors(port_cofactors(net, m, n, k), net.j_lead, k)
    if net.lead(m).offset or net.lead(n).offset:
        pt = _offset_phase(net, m, n, k)
        c = ScatteringCoefficients(
            k=k,
            t_l=c.t_l * pt,
            r_l=c.r_l * _offset_phase(net, m, m, k),
            t_r=c.t_r * pt,
            r_r=c.r_r * _offset_phase(net, n, n, k),
            divergent=c.divergent,
            denominator=c.denominator,
        )
    return c


# -- independent route -------------------------------------------------------


def _oracle_system(net: ScatteringNetwork, k: float):
    N, P = net.n, len(net.leads)
    J = net.j_lead
    e = np.exp(1j * k)
    a = np.zeros((N + P, N + P), dtype=np.complex128)
    rhs = np.zeros((N + P, P), dtype=np.complex128)
    # center rows: (omega - omega0) psi = H psi + sum_j g_j psi_j(d=1)
    a[:N, :N] = 2.0 * J * math.cos(k) * np.eye(N) - net.hc
    for j, lead in enumerate(net.leads):
        a[lead.site, N + j] = -lead.g * e
        rhs[lead.site, j] = lead.g / e
        # lead rows: psi_j(d=0) = a_j + b_j = (g_j / J) psi_c[site_j]
        a[N + j, N + j] = 1.0
        a[N + j, lead.site] = -lead.g / J
        rhs[N + j, j] = -1.0
    return a, rhs


def oracle_s_matrix(net: ScatteringNetwork, k: float) -> SMatrix:
    """Full S-matrix from one direct solve; handles arbitrary couplings ``g``."""
    check_momentum(k)
    a, rhs = _oracle_system(net, k)
    x = solve(a, rhs)
    s = np.array(x[net.n :, :])
    ids = tuple(net.lead_ids)
    for i, lo in enumerate(ids):
        for j, li in enumerate(ids):
            s[i, j] *= _offset_phase(net, lo, li, k)
    return SMatrix(k=k, ports=ids, s=s)


def oracle_two_port(net: ScatteringNetwork, m: int, n: int, k: float) -> ScatteringCoefficients:
    if m == n:
        raise SamePort(f"ports must differ, got {m} twice")
    net.lead(m)
    net.lead(n)
    sm = oracle_s_matrix(net, k)
    return ScatteringCoefficients(
        k=k,
        t_l=sm.entry(n, m),
        r_l=sm.entry(m, m),
        t_r=sm.entry(m, n),
        r_r=sm.entry(n, n),
    )


# -- multi-port ----------------------------------------------------------------


def s_matrix(net: ScatteringNetwork, k: float) -> SMatrix:
    """Assemble the S-matrix pair by pair from :func:`two_port`.

    Every port's reflection is computed once per partner; the values must
    agree, otherwise InconsistentReflection is raised.
    """
    ids = tuple(lead.lead_id for lead in net.leads if lead.g != 0.0)
    if len(ids) < 2:
        raise ValueError("an S-matrix needs at least two connected leads")
    P = len(ids)
    s = np.zeros((P, P), dtype=np.complex128)
    reflections: dict[int, list[complex]] = {i: [] for i in range(P)}
    divergent = False
    for a in range(P):
        for b in range(a + 1, P):
            c = two_port(net, ids[a], ids[b], k)
            s[b, a] = c.t_l
            s[a, b] = c.t_r
            divergent |= c.divergent
            if not c.divergent:
                reflections[a].append(c.r_l)
                reflections[b].append(c.r_r)
            elif not reflections[a] and not reflections[b]:
                s[a, a], s[b, b] = c.r_l, c.r_r
    for i, values in reflections.items():
        if not values:
            continue
        ref = values[0]
        for v in values[1:]:
            if abs(v - ref) > REFLECTION_RTOL * max(1.0, abs(ref)):
                raise InconsistentReflection(
                    f"lead {ids[i]}: reflection {ref} vs {v} for different partners at k={k}"
                )
        s[i, i] = ref
    return SMatrix(k=k, ports=ids, s=s, divergent=divergent)


def singularity_scan(net: ScatteringNetwork, m: int, n: int, k_grid) -> list[tuple[float, float]]:
    """Momenta on ``k_grid`` where the closed-form denominator (nearly) vanishes."""
    flagged = []
    for k in k_grid:
        c = two_port(net, m, n, float(k))
        if c.divergent:
            flagged.append((float(k), abs(c.denominator)))
    return flagged


def open_k_grid(count: int, lo: float = -math.pi, hi: float = 0.0) -> np.ndarray:
    """``count`` cell-centred momenta strictly inside ``(lo, hi)``."""
    return lo + (hi - lo) * (np.arange(count) + 0.5) / count
