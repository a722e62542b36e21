"""Discrete C/K/Q/P symmetries of a scattering center and what they protect.

A symmetry is ``H = eps * U f(H) U^{-1}`` with ``f`` the transpose (C),
entrywise conjugate (K), conjugate transpose (Q) or identity (P), a unitary
``U`` and parity ``eps = +-1``.  How ``U`` treats the two connection sites
(fixes them, or swaps them) decides which equalities between forward and
backward coefficients are guaranteed.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidOperator, SymmetryNotSatisfied, ValidationError
from .network import ScatteringNetwork, effective_two_port
from .numerics import as_cmatrix, frobenius_norm, invert, is_unitary
from .scattering import ScatteringCoefficients, two_port

KINDS = ("C", "K", "Q", "P")
IDENTITY, INTERCHANGE, NEITHER = "identity", "interchange", "neither"

OPERATOR_TOL = 1e-10
VERIFY_TOL = 1e-9
CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SymmetrySpec:
    kind: str
    parity: int
    u: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.parity not in (1, -1):
            raise ValidationError(f"parity must be +1 or -1, got {self.parity!r}")
        u = as_cmatrix(self.u, square=True)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def label(self) -> str:
        return f"{self.kind}{'+' if self.parity > 0 else '-'}"

    def __repr__(self):
        return f"SymmetrySpec({self.label}, u={np.round(self.u, 6).tolist()})"


@dataclass(frozen=True)
class MappingClass:
    variant: str
    alpha: float | None = None

    @property
    def subscript(self) -> str:
        return {IDENTITY: "1", INTERCHANGE: "I", NEITHER: "-"}[self.variant]


@dataclass(frozen=True)
class ConstraintPrediction:
    t_modulus: bool = False
    t_phase_relation: float | None = None
    r_modulus: bool = False
    r_complex: bool = False

    @property
    def is_empty(self) -> bool:
        return not (self.t_modulus or self.r_modulus)

    def describe(self) -> list[str]:
        out = []
        if self.t_phase_relation is not None:
            out.append(f"t_L = exp(i*{self.t_phase_relation:.12g}) t_R")
        elif self.t_modulus:
            out.append("|t_L| = |t_R|")
        if self.r_complex:
            out.append("r_L = r_R")
        elif self.r_modulus:
            out.append("|r_L| = |r_R|")
        return out or ["none"]

    def violations(self, c: ScatteringCoefficients) -> dict[str, float]:
        """Scaled residual of every predicted equality on one coefficient set."""
        out = {}

        def rel(x, a, b):
            return float(x / max(1.0, abs(a), abs(b)))

        if self.t_modulus:
            out["|t_L|=|t_R|"] = rel(abs(abs(c.t_l) - abs(c.t_r)), c.t_l, c.t_r)
        if self.t_phase_relation is not None:
            ph = np.exp(1j * self.t_phase_relation)
            out["t_L=e^{ia}t_R"] = rel(abs(c.t_l - ph * c.t_r), c.t_l, c.t_r)
        if self.r_modulus:
            out["|r_L|=|r_R|"] = rel(abs(abs(c.r_l) - abs(c.r_r)), c.r_l, c.r_r)
        if self.r_complex:
            out["r_L=r_R"] = rel(abs(c.r_l - c.r_r), c.r_l, c.r_r)
        return out


def _f(h: np.ndarray, kind: str) -> np.ndarray:
    if kind == "C":
        return h.T
    if kind == "K":
        return h.conj()
    if kind == "Q":
        return h.conj().T
    return h


def apply_transform(h, spec: SymmetrySpec) -> np.ndarray:
    """``eps * U f(h) U^{-1}``."""
    h = as_cmatrix(h, square=True)
    if h.shape != spec.u.shape:
        raise DimensionMismatch(f"matrix is {h.shape}, operator is {spec.u.shape}")
    return spec.parity * spec.u @ _f(h, spec.kind) @ invert(spec.u)


def check_operator(spec: SymmetrySpec, tol: float = OPERATOR_TOL) -> int:
    """Validate the operator; return the sign of ``U U*`` for C/K (``+1`` for Q/P)."""
    u = spec.u
    if not is_unitary(u, tol):
        raise InvalidOperator(f"{spec.label}: operator is not unitary")
    eye = np.eye(u.shape[0])
    if spec.kind in ("C", "K"):
        uu = u @ u.conj()
        for sign in (1, -1):
            if frobenius_norm(uu - sign * eye) <= tol:
                return sign
        raise InvalidOperator(f"{spec.label}: U U* is not +-1")
    if frobenius_norm(u @ u - eye) > tol:
        raise InvalidOperator(f"{spec.label}: U^2 is not 1")
    return 1


def verify(h, spec: SymmetrySpec, tol: float = VERIFY_TOL) -> float:
    """Relative residual ``|h - T(h)|_F / max(1, |h|_F)``; symmetric iff it is ``<= tol``.

    ``tol`` is only used by callers; the operator itself is always validated.
    """
    check_operator(spec)
    h = as_cmatrix(h, square=True)
    return frobenius_norm(h - apply_transform(h, spec)) / max(1.0, frobenius_norm(h))


def is_symmetric(h, spec: SymmetrySpec, tol: float = VERIFY_TOL) -> bool:
    return verify(h, spec) <= tol


def _wrap(angle: float) -> float:
    """Map to ``(-pi, pi]``."""
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


def classify_mapping(u, m_site: int, n_site: int, tol: float = OPERATOR_TOL) -> MappingClass:
    """Whether ``u`` fixes (identity) or swaps (interchange) the connection sites.

    ``alpha`` is read as a phase ratio, so it does not depend on the global
    phase of ``u``: ``arg(u_nn / u_mm)`` or ``arg(u_nm / u_mn)``.
    """
    u = np.asarray(u, dtype=np.complex128)
    m, n = m_site, n_site
    others = [j for j in range(u.shape[0]) if j not in (m, n)]
    if any(abs(u[m, j]) > tol or abs(u[j, n]) > tol for j in others):
        return MappingClass(NEITHER)

    def unit(z):
        return abs(abs(z) - 1.0) <= tol

    if abs(u[m, n]) <= tol and abs(u[n, m]) <= tol and unit(u[m, m]) and unit(u[n, n]):
        return MappingClass(IDENTITY, _wrap(np.angle(u[n, n] / u[m, m])))
    if abs(u[m, m]) <= tol and abs(u[n, n]) <= tol and unit(u[m, n]) and unit(u[n, m]):
        return MappingClass(INTERCHANGE, _wrap(np.angle(u[n, m] / u[m, n])))
    return MappingClass(NEITHER)


def predict(spec: SymmetrySpec, mapping: MappingClass, tol: float = OPERATOR_TOL) -> ConstraintPrediction:
    """Coefficient equalities guaranteed by an even-parity symmetry.

    Odd parity, unclassifiable mappings, Q_I and P_1 guarantee nothing.
    C_I may force ``t_L = t_R = 0`` when ``alpha = pi``; only ``r_L = r_R``
    is claimed either way.
    """
    none = ConstraintPrediction()
    if spec.parity < 0 or mapping.variant == NEITHER:
        return none
    a = mapping.alpha
    key = (spec.kind, mapping.variant)
    if key == ("C", IDENTITY):
        return ConstraintPrediction(t_modulus=True, t_phase_relation=a)
    if key == ("C", INTERCHANGE):
        return ConstraintPrediction(r_modulus=True, r_complex=True)
    if key == ("K", IDENTITY):
        return ConstraintPrediction(r_modulus=True)
    if key == ("K", INTERCHANGE):
        return ConstraintPrediction(t_modulus=True)
    if key == ("Q", IDENTITY):
        if abs(np.exp(2j * a) - 1.0) > 1e-9:
            raise InvalidOperator(f"Q with identity mapping needs exp(2i alpha) = 1, alpha = {a}")
        return ConstraintPrediction(t_modulus=True, r_modulus=True)
    if key == ("P", INTERCHANGE):
        return ConstraintPrediction(t_modulus=True, t_phase_relation=a, r_modulus=True, r_complex=True)
    return none


# -- conditions on Delta^{-1} ----------------------------------------------------


@dataclass(frozen=True)
class DeltaConditions:
    t_equal: bool
    t_modulus: bool
    r_equal: bool
    r_modulus: bool
    accidental_r_modulus: bool


def check_delta_conditions(elements, J: float, k: float, tol: float = 1e-9) -> DeltaConditions:
    """Sufficient conditions on the port elements of ``Delta^{-1}`` for symmetric scattering.

    ``k`` does not enter any of the tests; it is accepted so callers can pass
    a full evaluation point.
    """
    mm, mn, nm, nn = (complex(x) for x in elements)

    def close(a, b):
        return abs(a - b) <= tol * max(1.0, abs(a), abs(b))

    def real(z):
        return abs(z.imag) <= tol * max(1.0, abs(z))

    cj = np.conj
    cond1 = J ** -2 + cj(mm) * cj(nn) - cj(mn) * cj(nm)
    return DeltaConditions(
        t_equal=close(mn, nm),
        t_modulus=close(abs(mn), abs(nm)),
        r_equal=close(mm, nn),
        r_modulus=real(mm) and real(nn) and real(mn * nm),
        accidental_r_modulus=abs(cond1) <= tol * max(1.0, J ** -2, abs(mm * nn), abs(mn * nm))
        and close(nn * cj(mm), mm * cj(nn)),
    )


# -- sweeps ------------------------------------------------------------------------


@dataclass
class SpecResult:
    spec: SymmetrySpec
    mapping: MappingClass
    prediction: ConstraintPrediction
    max_violation: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= CONSTRAINT_TOL for v in self.max_violation.values())


@dataclass
class SweepReport:
    ports: tuple[int, int]
    results: list[SpecResult]
    evaluated: int = 0
    skipped: list[float] = field(default_factory=list)
    max_t_asymmetry: float = 0.0
    max_r_asymmetry: float = 0.0
    tol: float = CONSTRAINT_TOL

    @property
    def passed(self) -> bool:
        return all(
            v <= self.tol for r in self.results for v in r.max_violation.values()
        )


def validate_sweep(
    net: ScatteringNetwork,
    m: int,
    n: int,
    specs,
    k_grid,
    tol: float = CONSTRAINT_TOL,
    verify_tol: float = VERIFY_TOL,
) -> SweepReport:
    """Check every predicted constraint on :func:`two_port` output over ``k_grid``.

    Specs are checked against the effective two-port center (extra leads
    folded in as self-energies) at every momentum, since those self-energies
    can break a symmetry of the bare center.  Divergent or singular points
    are skipped and listed.
    """
    if not net.is_normalized():
        raise ValidationError("validate_sweep needs every lead coupled with g = J")
    sm, sn = net.lead(m).site, net.lead(n).site
    results = []
    for spec in specs:
        mapping = classify_mapping(spec.u, sm, sn)
        results.append(SpecResult(spec, mapping, predict(spec, mapping)))
    report = SweepReport(ports=(m, n), results=results, tol=tol)
    for k in k_grid:
        k = float(k)
        h_eff = effective_two_port(net, m, n, k)
        for r in results:
            res = verify(h_eff, r.spec)
            if res > verify_tol:
                raise SymmetryNotSatisfied(
                    f"{r.spec.label} fails on the effective center at k={k}: residual {res:.3e}"
                )
        c = two_port(net, m, n, k)
        if c.divergent or not all(np.isfinite([c.t_l, c.t_r, c.r_l, c.r_r])):
            report.skipped.append(k)
            continue
        report.evaluated += 1
        report.max_t_asymmetry = max(report.max_t_asymmetry, abs(abs(c.t_l) - abs(c.t_r)))
        report.max_r_asymmetry = max(report.max_r_asymmetry, abs(abs(c.r_l) - abs(c.r_r)))
        for r in results:
            for name, v in r.prediction.violations(c).items():
                r.max_violation[name] = max(r.max_violation.get(name, 0.0), v)
    return report


# -- detection -----------------------------------------------------------------------


@dataclass(frozen=True)
class Detection:
    spec: SymmetrySpec
    mapping: MappingClass
    prediction: ConstraintPrediction


def _permutations(h, F, m, n, atol):
    """Permutations ``pi`` (fixing or swapping ``{m, n}``) with ``|h[pi a, pi b]| == |F[a, b]|``."""
    N = h.shape[0]
    ah, af = np.abs(h), np.abs(F)
    order = [m, n] + [j for j in range(N) if j not in (m, n)]
    perm = [-1] * N
    used = [False] * N

    def ok(a):
        pa = perm[a]
        if abs(h[pa, pa] - F[a, a]) > atol:
            return False
        for b in order:
            pb = perm[b]
            if pb < 0 or b == a:
                continue
            if abs(ah[pa, pb] - af[a, b]) > atol or abs(ah[pb, pa] - af[b, a]) > atol:
                return False
        return True

    def rec(i):
        if i == N:
            yield tuple(perm)
            return
        a = order[i]
        if a == m:
            choices = (m, n)
        elif a == n:
            choices = (m,) if perm[m] == n else (n,)
        else:
            choices = [j for j in range(N) if j not in (m, n)]
        for c in choices:
            if used[c]:
                continue
            perm[a], used[c] = c, True
            if ok(a):
                yield from rec(i + 1)
            perm[a], used[c] = -1, False

    yield from rec(0)


def _propagate(N, edges):
    """Solve ``theta_a - theta_b = delta`` over a spanning forest; roots get 0.

    Returns ``(theta, component)``.  Consistency is checked by the caller.
    """
    adj = [[] for _ in range(N)]
    for a, b, d in edges:
        adj[a].append((b, -d))  # theta_b = theta_a - d
        adj[b].append((a, d))   # theta_a = theta_b + d
    theta = [None] * N
    comp = [-1] * N
    c = 0
    for root in range(N):
        if theta[root] is not None:
            continue
        theta[root] = 0.0
        comp[root] = c
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for b, d in adj[a]:
                if theta[b] is None:
                    theta[b] = theta[a] + d
                    comp[b] = c
                    queue.append(b)
        c += 1
    return np.array(theta), comp


def _build_u(perm, theta):
    N = len(perm)
    u = np.zeros((N, N), dtype=np.complex128)
    for j, pj in enumerate(perm):
        u[pj, j] = np.exp(1j * theta[j])
    return u


def _involution_phases(perm, theta, comp, max_branches=16):
    """Component phase shifts making ``U^2 = 1``; yields corrected ``theta`` arrays."""
    n_comp = max(comp) + 1
    w = {}
    for j, pj in enumerate(perm):
        key = (comp[j], comp[pj])
        val = _wrap(-(theta[j] + theta[pj]))
        if key in w:
            if abs(_wrap(w[key] - val)) > 1e-9:
                return
        else:
            w[key] = val
    chi = [None] * n_comp
    self_paired = []
    for (c1, c2), val in sorted(w.items()):
        if c1 == c2:
            if chi[c1] is None:
                chi[c1] = val / 2
                self_paired.append(c1)
            elif abs(_wrap(2 * chi[c1] - val)) > 1e-9:
                return
        else:
            if chi[c1] is None and chi[c2] is None:
                chi[c1] = 0.0
            if chi[c2] is None:
                chi[c2] = val - chi[c1]
            elif chi[c1] is None:
                chi[c1] = val - chi[c2]
            elif abs(_wrap(chi[c1] + chi[c2] - val)) > 1e-9:
                return
    chi = [0.0 if x is None else x for x in chi]
    flips = self_paired[1:]
    for count, signs in enumerate(itertools.product((0.0, math.pi), repeat=len(flips))):
        if count >= max_branches:
            break
        shifted = list(chi)
        for c, s in zip(flips, signs):
            shifted[c] += s
        yield np.array([theta[j] + shifted[comp[j]] for j in range(len(perm))])


def _gauge(u, kind, m):
    row = u[m]
    j = int(np.flatnonzero(np.abs(row) > 0.5)[0])
    if kind in ("C", "K"):
        return u * np.exp(-1j * np.angle(row[j]))
    z = row[j]
    return -u if (z.real < -1e-12 or (abs(z.real) <= 1e-12 and z.imag < 0)) else u


def detect(h, m_site: int, n_site: int, tol: float = VERIFY_TOL) -> list[Detection]:
    """Find C/K/Q/P symmetries whose operator is a generalized permutation matrix.

    Only permutations that fix or swap the two connection sites are tried.
    For each one the operator phases follow from matching nonzero entries of
    ``h`` against ``eps * f(h)``.  They are propagated over a spanning forest
    of the entry graph, and every remaining entry acts as a cycle check.
    Survivors are re-checked with :func:`verify`.  Operators are
    reported up to a global phase, and the tautological ``P+`` with ``U = 1``
    is left out.  For disconnected centers only one
    representative of each continuous family of relative phases is returned.
    """
    h = as_cmatrix(h, square=True)
    N = h.shape[0]
    if N > 8:
        raise ValidationError(f"detection is limited to N <= 8, got {N}")
    if m_site == n_site:
        raise ValidationError("connection sites must differ")
    scale = max(1.0, float(np.max(np.abs(h))))
    atol = tol * scale
    zero = 1e-12 * scale
    found: list[Detection] = []

    def seen(spec):
        if spec.kind == "P" and spec.parity > 0 and np.allclose(spec.u, np.eye(N)):
            return True
        for d in found:
            if d.spec.kind == spec.kind and d.spec.parity == spec.parity:
                if abs(abs(np.trace(d.spec.u.conj().T @ spec.u)) - N) <= 1e-8:
                    return True
        return False

    for kind in KINDS:
        for parity in (1, -1):
            F = parity * _f(h, kind)
            for perm in _permutations(h, F, m_site, n_site, atol):
                edges = []
                for a in range(N):
                    for b in range(N):
                        if a != b and abs(F[a, b]) > zero:
                            edges.append((a, b, float(np.angle(h[perm[a], perm[b]] / F[a, b]))))
                if any(perm[perm[j]] != j for j in range(N)):
                    continue
                if kind in ("C", "K"):
                    variants = []
                    for beta in (0.0, math.pi):
                        extra = [(perm[j], j, beta) for j in range(N) if perm[j] != j]
                        if beta and len(extra) < N:
                            continue
                        theta, _ = _propagate(N, edges + extra)
                        variants.append(theta)
                else:
                    theta0, comp = _propagate(N, edges)
                    variants = list(_involution_phases(perm, theta0, comp))
                for theta in variants:
                    u = _build_u(perm, theta)
                    if frobenius_norm(u @ F @ u.conj().T - h) > atol * N:
                        continue
                    u = _gauge(u, kind, m_site)
                    spec = SymmetrySpec(kind, parity, u)
                    try:
                        if verify(h, spec) > tol:
                            continue
                    except InvalidOperator:
                        continue
                    if seen(spec):
                        continue
                    mapping = classify_mapping(u, m_site, n_site)
                    found.append(Detection(spec, mapping, predict(spec, mapping)))
    return found


def protecting_classes(detections) -> set[str]:
    """Labels like ``'C_I'`` for every even-parity detection that predicts something."""
    return {
        f"{d.spec.kind}_{d.mapping.subscript}"
        for d in detections
        if d.spec.parity > 0 and not d.prediction.is_empty
    }


# -- ensembles -----------------------------------------------------------------------


def generate_ensemble(kind: str, parity: int, u, seed: int, count: int, scale: float = 1.0):
    """``count`` random centers symmetric under ``(kind, parity, u)``.

    Each is ``(A + eps U f(A) U^{-1}) / 2`` for a complex Gaussian ``A``.
    """
    spec = SymmetrySpec(kind, parity, u)
    check_operator(spec)
    rng = np.random.default_rng(seed)
    N = spec.u.shape[0]
    u_inv = spec.u.conj().T
    out = []
    for _ in range(count):
        a = scale * (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
        out.append(0.5 * (a + parity * spec.u @ _f(a, kind) @ u_inv))
    return out


def random_unitary(dim: int, rng) -> np.ndarray:
    if dim == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def make_operator(kind: str, variant: str, n_sites: int, m: int, n: int, rng, alpha: float = 0.0) -> np.ndarray:
    """A random valid operator with the requested mapping of sites ``m, n``.

    The ``(m, n)`` block is ``[[1, 0], [0, e^{ia}]]`` (identity) or
    ``[[0, 1], [e^{ia}, 0]]`` (interchange); the rest is a random unitary
    block obeying the kind's involution rule.  ``alpha`` must be compatible
    with that rule (``e^{ia} = +-1`` for C/K interchange, ``e^{2ia} = 1`` for
    Q/P identity, ``0`` for Q/P interchange).
    """
    rest = [j for j in range(n_sites) if j not in (m, n)]
    u = np.zeros((n_sites, n_sites), dtype=np.complex128)
    ph = np.exp(1j * alpha)
    if variant == IDENTITY:
        u[m, m], u[n, n] = 1.0, ph
    elif variant == INTERCHANGE:
        u[m, n], u[n, m] = 1.0, ph
    else:
        raise ValueError(f"unknown mapping {variant!r}")
    d = len(rest)
    v = random_unitary(d, rng)
    if kind in ("C", "K"):
        sign = 1.0 if variant == IDENTITY else float(np.real_if_close(np.conj(ph)))
        if sign > 0:
            w = v @ np.diag(np.exp(1j * rng.uniform(-np.pi, np.pi, d))) @ v.T
        else:
            if d % 2:
                raise ValueError("U U* = -1 needs an even number of remaining sites")
            block = np.kron(np.eye(d // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
            w = v @ block @ v.T
    else:
        w = v @ np.diag(rng.choice([-1.0, 1.0], size=d)) @ v.conj().T
    if d:
        u[np.ix_(rest, rest)] = w
    return u


# -- file format ---------------------------------------------------------------------


def parse_symmetry(text: str) -> SymmetrySpec:
    from .network import _check_keys, _integer, _load_json, parse_cmatrix
    from .errors import ParseError

    doc = _load_json(text)
    _check_keys(doc, {"kind", "parity", "u"}, {"kind", "parity", "u"}, "symmetry")
    if doc["kind"] not in KINDS:
        raise ParseError(f"kind: expected one of {KINDS}, got {doc['kind']!r}")
    parity = _integer(doc["parity"], "parity")
    if parity not in (1, -1):
        raise ParseError(f"parity: expected 1 or -1, got {parity}")
    return SymmetrySpec(doc["kind"], parity, parse_cmatrix(doc["u"], "u"))


def serialize_symmetry(spec: SymmetrySpec) -> str:
    import json

    from .network import cmatrix_to_json

    return json.dumps({"kind": spec.kind, "parity": spec.parity, "u": cmatrix_to_json(spec.u)}) + "\n"
