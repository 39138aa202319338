"""Numerical verification of the group-averaging machinery on finite
groups.

For a finite group with a unitary irreducible representation, the sums
replacing the invariant integrals are exact, so the trace lemma and the
reconstruction identity can be checked to machine precision.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .kernel import TETRAHEDRAL_VERSORS


@dataclass(frozen=True)
class FiniteGroupRep:
    """A finite set of unitary matrices with integration weights."""

    name: str
    labels: tuple
    matrices: np.ndarray   # (num_elements, dim, dim)
    weights: np.ndarray    # (num_elements,)

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        w = np.asarray(self.weights, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        dim = mats.shape[1]
        for g in mats:
            if np.max(np.abs(g @ g.conj().T - np.eye(dim))) > 1e-12:
                raise ValueError("representation matrices must be unitary")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.matrices.shape[1]

    @property
    def order(self):
        return self.matrices.shape[0]


def closure_defect(rep):
    """Largest distance of any product R(g) R(h) from the set of
    representation matrices, allowing a global phase per product
    (projective representations are tolerated)."""
    worst = 0.0
    mats = rep.matrices
    for a in mats:
        for b in mats:
            prod = a @ b
            best = math.inf
            for c in mats:
                # compare up to phase via the polar angle of Tr[c+ prod]
                overlap = np.trace(c.conj().T @ prod)
                if abs(overlap) < 1e-12:
                    continue
                phase = overlap / abs(overlap)
                best = min(best, float(np.max(np.abs(prod - phase * c))))
            worst = max(worst, best)
    return worst


def _random_unit(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def normalize_measure(rep, rng=None, num_pairs=20, tol=1e-10):
    """Rescale the weights so sum_g w_g |<u| R(g) |v>|^2 = 1.

    The sum must not depend on the choice of |u>, |v>; a spread above
    ``tol`` across random pairs signals a reducible representation and
    raises.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    taus = []
    for _ in range(num_pairs):
        u = _random_unit(rep.dim, rng)
        v = _random_unit(rep.dim, rng)
        amps = rep.matrices @ v
        taus.append(float(np.sum(rep.weights * np.abs(amps @ u.conj()) ** 2)))
    taus = np.array(taus)
    spread = taus.max() - taus.min()
    if spread > tol * max(taus.mean(), 1.0):
        raise ValueError(
            "normalization constant depends on the test vectors "
            f"(spread {spread:.3e}); the representation is not irreducible")
    return replace(rep, weights=rep.weights / taus.mean()), float(spread)


def verify_trace_lemma(rep, operator):
    """Max-norm residual of sum_g w_g R(g) A R+(g) = Tr[A] I."""
    operator = np.asarray(operator, dtype=complex)
    acc = np.einsum("g,gij,jk,glk->il", rep.weights, rep.matrices, operator,
                    rep.matrices.conj())
    return float(np.max(np.abs(acc - np.trace(operator) * np.eye(rep.dim))))


def verify_reconstruction_identity(rep, operator):
    """Max-norm residual of sum_g w_g Tr[A R(g)] R+(g) = A."""
    operator = np.asarray(operator, dtype=complex)
    traces = np.einsum("ij,gji->g", operator, rep.matrices)
    acc = np.einsum("g,g,gji->ij", rep.weights, traces, rep.matrices.conj())
    return float(np.max(np.abs(acc - operator)))


# ---------------------------------------------------------------------------
# the two concrete groups of the discrete schemes


def pauli_rep():
    """The 8-element group {+-I, +-i sigma} represented on C^2 by
    {I, sigma_x, sigma_y, sigma_z} (each matrix appearing twice)."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    mats = [eye, eye, sx, sx, sy, sy, sz, sz]
    labels = ("I", "-I", "i sx", "-i sx", "i sy", "-i sy", "i sz", "-i sz")
    return FiniteGroupRep(name="pauli", labels=labels,
                          matrices=np.array(mats),
                          weights=np.full(8, 1.0 / 8))


def _axis_rotation(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    K = np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)


def tetrahedral_rep():
    """The 12 rotation matrices of the tetrahedral group on C^3:
    the identity, +-120 degree turns about the four body diagonals and
    180 degree turns about the coordinate axes."""
    mats = [np.eye(3)]
    labels = ["e"]
    for j in range(4):
        for sign in (1, -1):
            mats.append(_axis_rotation(TETRAHEDRAL_VERSORS[j],
                                       sign * 2 * math.pi / 3))
            labels.append(f"d{j + 1}{'+' if sign > 0 else '-'}")
    for j in range(3):
        mats.append(_axis_rotation(TETRAHEDRAL_VERSORS[4 + j], math.pi))
        labels.append(f"c{j + 1}")
    return FiniteGroupRep(name="tetrahedral", labels=tuple(labels),
                          matrices=np.array(mats, dtype=complex),
                          weights=np.full(12, 1.0 / 12))


GROUPS = {"pauli": pauli_rep, "tetrahedral": tetrahedral_rep}


def verification_report(group, trials=50, seed=0, tol=1e-10):
    """Run the lemma and theorem checks on random operators and report
    the worst residuals."""
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}")
    rep = GROUPS[group]()
    rng = np.random.default_rng(seed)
    rep, tau_spread = normalize_measure(rep, rng)
    lemma_max = 0.0
    theorem_max = 0.0
    for _ in range(trials):
        a = (rng.standard_normal((rep.dim, rep.dim))
             + 1j * rng.standard_normal((rep.dim, rep.dim)))
        lemma_max = max(lemma_max, verify_trace_lemma(rep, a))
        theorem_max = max(theorem_max, verify_reconstruction_identity(rep, a))
    return {
        "group": group,
        "dim": rep.dim,
        "order": rep.order,
        "trials": trials,
        "lemma_residual_max": lemma_max,
        "theorem_residual_max": theorem_max,
        "tau_spread": tau_spread,
        "passed": bool(lemma_max <= tol and theorem_max <= tol
                       and tau_spread <= tol),
    }
