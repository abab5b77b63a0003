"""Finite-dimensional standard subspaces: Tomita data, cutting projection, entropy.

Complex vectors ``z`` in C^n are handled through their realification
``[Re z, Im z]`` in R^(2n). Multiplication by ``i`` is the matrix ``JC``;
``Re<u, v> = u.v`` and ``Im<u, v> = -u.JC.v``. Anti-linear operators (the
Tomita operator ``S`` and the conjugation ``J``) are ordinary real matrices in
this picture, so the polar decomposition ``S = J Delta^(1/2)`` is a real one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from .errors import DegenerateInput, IllConditioned, NotFactorial

RANK_TOL = 1e-10
COND_LIMIT = 1e12
FACTORIAL_TOL = 1e-10


def complex_structure_matrix(n: int) -> np.ndarray:
    z = np.zeros((n, n))
    eye = np.eye(n)
    return np.block([[z, -eye], [eye, z]])


def realify(z) -> np.ndarray:
    """``C^n -> R^(2n)``; columns of a matrix are mapped one by one."""
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=0)


def complexify(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    return v[:n] + 1j * v[n:]


def realify_unitary(U: np.ndarray) -> np.ndarray:
    """Real ``2n x 2n`` matrix of a complex-linear map."""
    return np.block([[U.real, -U.imag], [U.imag, U.real]])


def _orth(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column span (relative singular-value cutoff)."""
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[0], 0))
    return u[:, s > tol * s[0]]


def _null(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the null space of ``M`` (rows are constraints)."""
    dim = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(M)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * top)) if top > 0 else 0
    return vt[rank:].T


def _complement(Q: np.ndarray) -> np.ndarray:
    """Real-orthogonal complement of the span of orthonormal ``Q``."""
    return _null(Q.T) if Q.shape[1] else np.eye(Q.shape[0])


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between two column spans (``pi/2`` if dims differ)."""
    if A.shape[1] != B.shape[1]:
        return math.pi / 2
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(A, B)))


def _fn_of(delta_w: np.ndarray, delta_v: np.ndarray, fn) -> np.ndarray:
    return (delta_v * fn(delta_w)) @ delta_v.T


def _A(u):
    """``A = -log(l)/(1 - l)`` as a function of ``u = log l``; ``A(1) = 1``."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    nz = u != 0.0
    out[nz] = u[nz] / np.expm1(u[nz])
    return out


def _B(u):
    """``B = l^(1/2) log(l)/(1 - l)`` as a function of ``u = log l``; ``B(1) = -1``."""
    u = np.asarray(u, dtype=float)
    out = -np.ones_like(u)
    nz = u != 0.0
    out[nz] = -(0.5 * u[nz]) / np.sinh(0.5 * u[nz])
    return out


@dataclass(frozen=True)
class ModularData:
    """Realified Tomita data of a standard subspace."""

    S: np.ndarray
    J: np.ndarray
    Delta: np.ndarray
    delta_w: np.ndarray  # eigenvalues of Delta
    delta_v: np.ndarray  # orthonormal eigenvectors (columns)
    condition: float
    residuals: dict

    def func(self, fn) -> np.ndarray:
        """``fn(Delta)`` by spectral calculus."""
        return _fn_of(self.delta_w, self.delta_v, fn)

    @property
    def log_delta(self) -> np.ndarray:
        return self.func(np.log)

    def unitary(self, s: float) -> np.ndarray:
        """``Delta^(i s)``."""
        n = self.Delta.shape[0] // 2
        return sla.expm(s * complex_structure_matrix(n) @ self.log_delta)


@dataclass(frozen=True)
class FDSubspace:
    """Real-linear span of complex vectors in C^n, with modular data if standard.

    ``basis`` is a realified orthonormal basis. For a non-standard span,
    ``component`` holds ``(U, Hs)``: ``U`` (n x m, orthonormal columns) spans the
    complex space ``(H cap iH)^perp cap (H + iH)`` and ``Hs`` is the standard
    component of ``H`` in the coordinates ``U^* z``.
    """

    ambient_dim: int
    spanning_vectors: np.ndarray
    basis: np.ndarray
    cyclic: bool
    separating: bool
    modular: ModularData | None = field(default=None, repr=False)
    modular_error: str | None = field(default=None, repr=False)
    component: tuple | None = field(default=None, repr=False)

    @property
    def standard(self) -> bool:
        return self.cyclic and self.separating

    @property
    def real_dim(self) -> int:
        return self.basis.shape[1]


def _tomita(Q: np.ndarray) -> ModularData:
    twon = Q.shape[0]
    n = twon // 2
    JC = complex_structure_matrix(n)
    M = np.hstack([Q, JC @ Q])
    cond = float(np.linalg.cond(M))
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditioned(f"H + iH change of basis has condition number {cond:.3e}")
    d = Q.shape[1]
    S = M @ np.diag(np.r_[np.ones(d), -np.ones(d)]) @ np.linalg.inv(M)
    J, root = sla.polar(S)  # S = J |S|, |S| = Delta^(1/2)
    Delta = root @ root
    Delta = 0.5 * (Delta + Delta.T)
    w, v = np.linalg.eigh(Delta)
    residuals = {
        "polar": float(np.linalg.norm(S - J @ root)),
        "S_squared": float(np.linalg.norm(S @ S - np.eye(twon))),
        "J_squared": float(np.linalg.norm(J @ J - np.eye(twon))),
        "J_antilinear": float(np.linalg.norm(J @ JC + JC @ J)),
        "J_Delta_J": float(np.linalg.norm(J @ Delta @ J - np.linalg.inv(Delta))
                           / max(1.0, np.linalg.norm(np.linalg.inv(Delta)))),
    }
    return ModularData(S, J, Delta, w, v, cond, residuals)


def _subspace_from_basis(Q: np.ndarray, vectors: np.ndarray) -> FDSubspace:
    n = Q.shape[0] // 2
    JC = complex_structure_matrix(n)
    d = Q.shape[1]
    span_rank = _orth(np.hstack([Q, JC @ Q])).shape[1] if d else 0
    cyclic = span_rank == 2 * n
    separating = span_rank == 2 * d
    modular = error = component = None
    if cyclic and separating:
        try:
            modular = _tomita(Q)
        except IllConditioned as exc:
            error = str(exc)
    elif d:
        component = _standard_component(Q)
    return FDSubspace(n, vectors, Q, cyclic, separating, modular, error, component)


def _standard_component(Q: np.ndarray) -> tuple | None:
    n = Q.shape[0] // 2
    JC = complex_structure_matrix(n)
    span = _orth(np.hstack([Q, JC @ Q]))            # H + iH
    inter = _null(np.hstack([_complement(Q), _complement(JC @ Q)]).T)  # H cap iH
    hs = _orth(Q - inter @ (inter.T @ Q)) if inter.shape[1] else Q    # H cap (H cap iH)^perp
    if hs.shape[1] == 0:
        return None
    # complex orthonormal basis of (H cap iH)^perp within H + iH
    comp = span - inter @ (inter.T @ span) if inter.shape[1] else span
    comp = _orth(comp)
    cvecs = complexify(comp)
    U = sla.orth(cvecs, rcond=RANK_TOL)
    coords = U.conj().T @ complexify(hs)
    return U, make_subspace(coords.T)


def make_subspace(vectors) -> FDSubspace:
    """Real-linear span of the given complex vectors (rows, or a list of vectors)."""
    vecs = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if vecs.size == 0 or not np.any(vecs):
        raise DegenerateInput("all spanning vectors are zero")
    Q = _orth(realify(vecs.T))
    return _subspace_from_basis(Q, vecs)


def from_real_basis(Q: np.ndarray) -> FDSubspace:
    Q = _orth(np.asarray(Q, dtype=float))
    if Q.shape[1] == 0:
        return FDSubspace(Q.shape[0] // 2, np.zeros((0, Q.shape[0] // 2), dtype=complex),
                          Q, Q.shape[0] == 0, True)
    return _subspace_from_basis(Q, complexify(Q).T)


def tomita_data(H: FDSubspace) -> tuple:
    """``(Delta, J)`` with ``S = J Delta^(1/2)`` as realified matrices."""
    if not H.standard:
        raise ValueError("Tomita data needs a standard subspace")
    if H.modular is None:
        raise IllConditioned(H.modular_error or "modular data unavailable")
    return H.modular.Delta, H.modular.J


def invariance_residuals(H: FDSubspace, s_values=(0.3, 1.0, 2.7)) -> dict:
    """Distances of ``Delta^(is) H`` to ``H`` and of ``J H`` to ``H'``."""
    md = H.modular
    out = {"Delta_is": max(subspace_distance(md.unitary(s) @ H.basis, H.basis) for s in s_values)}
    out["J_H"] = subspace_distance(md.J @ H.basis, symplectic_complement(H).basis)
    return out


def symplectic_complement(H: FDSubspace) -> FDSubspace:
    """``H' = {psi : Im<psi, phi> = 0 for phi in H} = (iH)^perp``."""
    n = H.ambient_dim
    JC = complex_structure_matrix(n)
    Q = _null((JC @ H.basis).T) if H.real_dim else np.eye(2 * n)
    if Q.shape[1] == 0:
        return FDSubspace(n, np.zeros((0, n), dtype=complex), Q, False, True)
    return _subspace_from_basis(Q, complexify(Q).T)


def is_factorial(H: FDSubspace, tol: float = FACTORIAL_TOL) -> bool:
    w = H.modular.delta_w
    return bool(np.all(np.abs(w - 1.0) > tol * np.maximum(1.0, w)))


def cutting_projection_fd(H: FDSubspace, method: str = "tomita") -> np.ndarray:
    """Realified ``P_H`` (``phi + phi' -> phi``).

    ``method``: ``"tomita"`` for ``(1 + S)(1 - Delta)^(-1)``, ``"spectral"`` for
    ``a(Delta) + J b(Delta)``, ``"direct"`` for the decomposition along ``H + H'``.
    """
    tomita_data(H)
    if not is_factorial(H):
        raise NotFactorial("Delta has eigenvalue 1: H meets its symplectic complement")
    md = H.modular
    eye = np.eye(md.Delta.shape[0])
    if method == "tomita":
        return (eye + md.S) @ md.func(lambda w: 1.0 / (1.0 - w))
    if method == "spectral":
        a = md.func(lambda w: 1.0 / (1.0 - w))
        b = md.func(lambda w: np.sqrt(w) / (1.0 - w))
        return a + md.J @ b
    if method == "direct":
        Hp = symplectic_complement(H).basis
        basis = np.hstack([H.basis, Hp])
        keep = np.hstack([H.basis, np.zeros_like(Hp)])
        return keep @ np.linalg.inv(basis)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class EntropyOperatorFD:
    """Realified entropy operator ``A(Delta) + J B(Delta)``."""

    matrix: np.ndarray
    min_eigenvalue: float
    symmetry_defect: float

    def quadratic(self, phi) -> float:
        v = realify(phi)
        return float(v @ self.matrix @ v)


def entropy_operator_fd(H: FDSubspace, mutate: bool = False) -> EntropyOperatorFD:
    """``E_H = A(Delta) + J B(Delta)`` with the limit values ``A(1) = 1``, ``B(1) = -1``.

    ``mutate`` flips the sign of the ``B`` term (used to check that the axiom
    suite detects a broken operator).
    """
    tomita_data(H)
    md = H.modular
    u = np.log(md.delta_w)
    A = _fn_of(u, md.delta_v, _A)
    Bm = _fn_of(u, md.delta_v, _B)
    E = A + (-1.0 if mutate else 1.0) * md.J @ Bm
    sym = 0.5 * (E + E.T)
    return EntropyOperatorFD(E, float(np.linalg.eigvalsh(sym)[0]),
                             float(np.linalg.norm(E - E.T) / max(1.0, np.linalg.norm(E))))


def _reduce(phi, H: FDSubspace) -> tuple:
    if H.standard:
        return np.asarray(phi, dtype=complex), H
    if H.component is None:
        return None, None
    U, Hs = H.component
    return U.conj().T @ np.asarray(phi, dtype=complex), Hs


def vector_entropy_fd(phi, H: FDSubspace, mutate: bool = False) -> float:
    """``Re<phi, E_H phi>``; a non-standard ``H`` is replaced by its standard component
    and ``phi`` by its projection onto that component's complex span."""
    phi, H = _reduce(phi, H)
    if H is None:
        return 0.0
    return entropy_operator_fd(H, mutate).quadratic(phi)


def vector_entropy_tomita(phi, H: FDSubspace) -> float:
    """``-Im<phi, P_H i log(Delta) phi>`` (factorial ``H``)."""
    P = cutting_projection_fd(H)
    JC = complex_structure_matrix(H.ambient_dim)
    v = realify(phi)
    return float(v @ JC @ P @ JC @ H.modular.log_delta @ v)


def random_standard(n: int, rng, max_tries: int = 100) -> FDSubspace:
    """Span of ``n`` vectors with i.i.d. standard normal real and imaginary parts,
    rejection-sampled until standard with usable modular data."""
    for _ in range(max_tries):
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = make_subspace(z)
        if H.standard and H.modular is not None:
            return H
    raise IllConditioned("could not sample a well-conditioned standard subspace")


def random_vector(n: int, rng) -> np.ndarray:
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


AXIOMS = ("positivity", "monotonicity", "locality", "kernel", "unitary_invariance",
          "cutting_projection", "tomita")


def _trial(n: int, rng, mutate: bool) -> dict:
    H = random_standard(n, rng)
    md = H.modular
    E = entropy_operator_fd(H, mutate)
    scale = max(1.0, float(np.linalg.norm(E.matrix, 2)))
    phi = random_vector(n, rng)
    s_phi = vector_entropy_fd(phi, H, mutate)
    out = {}

    out["positivity"] = max(0.0, -E.min_eigenvalue / scale, -s_phi / scale)

    # K: random real subspace of H (separating, standard in its own complex span)
    d = int(rng.integers(1, n + 1))
    K = from_real_basis(H.basis @ rng.standard_normal((H.real_dim, d)))
    s_k = vector_entropy_fd(phi, K, mutate)
    out["monotonicity"] = max(0.0, (s_k - s_phi) / scale)

    Hp = symplectic_complement(H)
    psi = complexify(Hp.basis @ rng.standard_normal(Hp.real_dim))
    s_shift = vector_entropy_fd(phi + psi, H, mutate)
    s_psi = vector_entropy_fd(psi, H, mutate)
    out["locality"] = max(abs(s_shift - s_phi), abs(s_psi)) / scale

    sym = 0.5 * (E.matrix + E.matrix.T)
    w, v = np.linalg.eigh(sym)
    kernel = v[:, np.abs(w) <= 1e-8 * scale]
    out["kernel"] = subspace_distance(kernel, Hp.basis)

    U = unitary_group.rvs(n, random_state=rng) if n > 1 else np.array([[np.exp(2j * np.pi * rng.random())]])
    UH = from_real_basis(realify_unitary(U) @ H.basis)
    out["unitary_invariance"] = abs(vector_entropy_fd(U @ phi, UH, mutate) - s_phi) / scale

    if is_factorial(H):
        P1 = cutting_projection_fd(H, "tomita")
        P2 = cutting_projection_fd(H, "spectral")
        P3 = cutting_projection_fd(H, "direct")
        pscale = max(1.0, float(np.linalg.norm(P3, 2)))
        out["cutting_projection"] = max(np.linalg.norm(P1 - P2, 2),
                                        np.linalg.norm(P1 - P3, 2)) / pscale
    res = md.residuals
    out["tomita"] = max(res["J_squared"], res["J_antilinear"], res["J_Delta_J"])
    return out


def axiom_suite(trials: int, max_n: int, seed: int = 0, tol: float = 1e-8,
                mutate: bool = False) -> dict:
    """Randomized check of positivity, monotonicity, locality (including
    ``ker E_H = H'``), unitary invariance, agreement of the three cutting
    projections and the Tomita relations.

    Magnitudes are relative to ``max(1, ||E_H||)`` (entropies) or
    ``max(1, ||P_H||)`` (projections); the kernel check is a principal angle.
    Trial ``t`` uses ``numpy.random.default_rng([seed, t])``.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    worst = {}
    violations = []
    skipped = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        n = int(rng.integers(1, max_n + 1))
        try:
            result = _trial(n, rng, mutate)
        except IllConditioned:
            skipped += 1
            continue
        for axiom, mag in result.items():
            mag = float(mag)
            worst[axiom] = max(worst.get(axiom, 0.0), mag)
            if mag > tol:
                violations.append({"axiom": axiom, "trial": t, "seed": seed, "n": n,
                                   "magnitude": mag})
    return {
        "trials": trials,
        "max_n": max_n,
        "seed": seed,
        "tolerance": tol,
        "mutated": mutate,
        "skipped": skipped,
        "max_violation": {k: worst[k] for k in AXIOMS if k in worst},
        "violations": violations,
    }
