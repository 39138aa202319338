"""Exact finite-dimensional spin algebra.

Operators, rotations, rotation matrix elements in the sz eigenbasis,
canonical states (coherent, thermal) and coupled bases for two and three
spin-1/2 particles.  Everything uses hbar = 1 and the basis ordering
m = -s, -s+1, ..., +s (ascending).
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

TWO_S_MAX = 60

# exact integer factorials are used in the rotation matrix elements up to
# this 2s; above it we switch to log-factorials with compensated summation
_TWO_S_EXACT_FACTORIAL = 30


def check_two_s(two_s):
    """Validate a doubled spin quantum number and return it as int."""
    two_s = int(two_s)
    if two_s < 1:
        raise ValueError(f"two_s must be a positive integer, got {two_s}")
    if two_s > TWO_S_MAX:
        raise ValueError(
            f"two_s={two_s} exceeds the supported maximum {TWO_S_MAX}")
    return two_s


def spin_dim(two_s):
    """Hilbert-space dimension 2s+1."""
    return check_two_s(two_s) + 1


def m_values(two_s):
    """Eigenvalues of sz in basis order (ascending, -s first)."""
    two_s = check_two_s(two_s)
    return (np.arange(-two_s, two_s + 1, 2)) / 2.0


def m_index(two_s, m):
    """Basis index of the sz eigenvalue m; rejects invalid m."""
    two_s = check_two_s(two_s)
    two_m = int(round(2 * m))
    if abs(2 * m - two_m) > 1e-9 or (two_m - two_s) % 2 != 0 or abs(two_m) > two_s:
        raise ValueError(f"m={m} is not a valid outcome for two_s={two_s}")
    return (two_m + two_s) // 2


@dataclass(frozen=True)
class Direction:
    """A measurement axis on the unit sphere, n = (cos(phi) sin(theta),
    sin(phi) sin(theta), cos(theta))."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi + 1e-12):
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def unit_vector(self):
        st = math.sin(self.theta)
        return np.array([math.cos(self.phi) * st,
                         math.sin(self.phi) * st,
                         math.cos(self.theta)])

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero vector has no direction")
        v = v / norm
        return cls(theta=math.acos(np.clip(v[2], -1.0, 1.0)),
                   phi=math.atan2(v[1], v[0]))


Z_AXIS = Direction(0.0, 0.0)
X_AXIS = Direction(math.pi / 2, 0.0)
Y_AXIS = Direction(math.pi / 2, math.pi / 2)


@dataclass(frozen=True)
class SpinOperators:
    """Spin matrices in the sz eigenbasis (m ascending)."""

    two_s: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    splus: np.ndarray
    sminus: np.ndarray


def spin_operators(two_s):
    """Build sx, sy, sz and the ladder operators for spin s = two_s/2.

    The ladder matrix elements are <m+1|s+|m> = sqrt(s(s+1) - m(m+1)),
    which fixes every other matrix.
    """
    two_s = check_two_s(two_s)
    m = m_values(two_s)
    s = two_s / 2.0
    dim = two_s + 1
    splus = np.zeros((dim, dim), dtype=complex)
    for k in range(dim - 1):
        splus[k + 1, k] = math.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sminus = splus.conj().T
    sx = (splus + sminus) / 2
    sy = (splus - sminus) / (2j)
    sz = np.diag(m).astype(complex)
    return SpinOperators(two_s=two_s, sx=sx, sy=sy, sz=sz,
                         splus=splus, sminus=sminus)


def spin_projection(two_s, direction):
    """The operator s . n for a measurement axis n."""
    ops = spin_operators(two_s)
    nx, ny, nz = direction.unit_vector
    return nx * ops.sx + ny * ops.sy + nz * ops.sz


def rotation_operator(two_s, direction, psi):
    """Group element exp(i s.n psi) of the spin-s representation."""
    sn = spin_projection(two_s, direction)
    evals, evecs = np.linalg.eigh(sn)
    return (evecs * np.exp(1j * psi * evals)) @ evecs.conj().T


def _log_factorial(n):
    return math.lgamma(n + 1)


def _lambda_entry(two_s, two_l, two_m, theta, phi):
    """One matrix element <l| exp(-i phi sz) exp(-i theta sy) exp(i phi sz) |m>.

    The angular part is the factorial-sum (Wigner) formula; the sum runs
    over the nu keeping every factorial argument non-negative.
    """
    s_plus_m = (two_s + two_m) // 2
    s_minus_m = (two_s - two_m) // 2
    s_plus_l = (two_s + two_l) // 2
    s_minus_l = (two_s - two_l) // 2
    l_minus_m = (two_l - two_m) // 2

    c = math.cos(theta / 2)
    t = math.sin(theta / 2)
    nu_min = max(0, -l_minus_m)
    nu_max = min(s_minus_l, s_plus_m)
    if nu_max < nu_min:
        return 0.0j

    vals = []
    if two_s <= _TWO_S_EXACT_FACTORIAL:
        # exact integer factorials; the ratio to each denominator stays
        # a modest rational before the float conversion
        fact_product = (math.factorial(s_plus_m) * math.factorial(s_minus_m)
                        * math.factorial(s_plus_l) * math.factorial(s_minus_l))
        for nu in range(nu_min, nu_max + 1):
            denom = (math.factorial(s_minus_l - nu) * math.factorial(s_plus_m - nu)
                     * math.factorial(nu + l_minus_m) * math.factorial(nu))
            magnitude = math.sqrt(float(Fraction(fact_product, denom * denom)))
            cos_exp = s_plus_m + s_minus_l - 2 * nu   # 2s + m - l - 2 nu
            sin_exp = l_minus_m + 2 * nu
            vals.append((-1) ** nu * magnitude
                        * (c ** cos_exp) * ((-t) ** sin_exp))
    else:
        log_root = 0.5 * (_log_factorial(s_plus_m) + _log_factorial(s_minus_m)
                          + _log_factorial(s_plus_l) + _log_factorial(s_minus_l))
        for nu in range(nu_min, nu_max + 1):
            log_denom = (_log_factorial(s_minus_l - nu)
                         + _log_factorial(s_plus_m - nu)
                         + _log_factorial(nu + l_minus_m) + _log_factorial(nu))
            magnitude = math.exp(log_root - log_denom)
            cos_exp = s_plus_m + s_minus_l - 2 * nu
            sin_exp = l_minus_m + 2 * nu
            vals.append((-1) ** nu * magnitude
                        * (c ** cos_exp) * ((-t) ** sin_exp))
    d_element = math.fsum(vals)
    # e^{i phi (m - l)}
    phase = complex(math.cos(phi * l_minus_m), -math.sin(phi * l_minus_m))
    return phase * d_element


def lambda_matrix(two_s, theta, phi):
    """Rotation matrix elements lambda[l, m] = <l | n, m> in closed form.

    lambda[l, m] = e^{i phi (m - l)} d^s_{l,m}(theta) with d from the
    factorial sum formula; rows and columns are ordered m ascending.
    The result is unitary.
    """
    two_s = check_two_s(two_s)
    if not (0.0 <= theta <= math.pi + 1e-12):
        raise ValueError(f"theta={theta} outside [0, pi]")
    dim = two_s + 1
    lam = np.empty((dim, dim), dtype=complex)
    two_ms = range(-two_s, two_s + 1, 2)
    for i, two_l in enumerate(two_ms):
        for j, two_m in enumerate(two_ms):
            lam[i, j] = _lambda_entry(two_s, two_l, two_m, theta, phi)
    return lam


def lambda_matrices(two_s, thetas, phis):
    """Batch of lambda matrices, shape (N, dim, dim).

    Evaluated through the eigendecomposition of sy (a matrix-exponential
    route, not the factorial sum), which vectorizes over samples.
    """
    two_s = check_two_s(two_s)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    ops = spin_operators(two_s)
    evals, evecs = np.linalg.eigh(ops.sy)
    # d(theta) = V exp(-i theta D) V+
    phase_d = np.exp(-1j * thetas[:, None] * evals[None, :])
    d = np.einsum("ik,nk,jk->nij", evecs, phase_d, evecs.conj())
    m = m_values(two_s)
    left = np.exp(-1j * phis[:, None] * m[None, :])   # e^{-i phi l}
    right = np.exp(1j * phis[:, None] * m[None, :])   # e^{+i phi m}
    return left[:, :, None] * d * right[:, None, :]


def eigenstate(two_s, direction, m):
    """The eigenvector |n, m> of s . n, built as exp(-i theta s.n_perp)|m>
    with n_perp = (-sin(phi), cos(phi), 0)."""
    two_s = check_two_s(two_s)
    idx = m_index(two_s, m)
    ops = spin_operators(two_s)
    generator = (-math.sin(direction.phi) * ops.sx
                 + math.cos(direction.phi) * ops.sy)
    evals, evecs = np.linalg.eigh(generator)
    rot = (evecs * np.exp(-1j * direction.theta * evals)) @ evecs.conj().T
    return rot[:, idx].copy()


def coherent_state(two_s, alpha):
    """Coherent spin state exp(alpha s+ - alpha* s-) |-s>."""
    two_s = check_two_s(two_s)
    ops = spin_operators(two_s)
    alpha = complex(alpha)
    gen = alpha * ops.splus - alpha.conjugate() * ops.sminus
    state = np.zeros(two_s + 1, dtype=complex)
    state[0] = 1.0  # |-s> sits at index 0
    return expm(gen) @ state


HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian, unit-trace matrix plus labels describing its basis.

    For a single spin the labels are the sz eigenvalues; for coupled
    multi-spin bases they are (S, M, copy) triples.  Positivity is not
    enforced at construction (reconstruction estimates can dip below
    zero); call ``is_positive`` when it matters.
    """

    matrix: np.ndarray
    basis_labels: tuple = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > TRACE_TOL or abs(np.trace(mat).imag) > TRACE_TOL:
            raise ValueError(f"density matrix trace {np.trace(mat)} != 1")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        labels = self.basis_labels
        if labels is None:
            if (mat.shape[0] - 1) <= TWO_S_MAX:
                labels = tuple(m_values(mat.shape[0] - 1)) if mat.shape[0] > 1 else (0.0,)
            else:
                labels = tuple(range(mat.shape[0]))
        object.__setattr__(self, "basis_labels", tuple(labels))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def is_positive(self, tol=1e-10):
        return bool(np.linalg.eigvalsh(self.matrix).min() >= -tol)

    @classmethod
    def from_pure(cls, state, basis_labels=None):
        state = np.asarray(state, dtype=complex)
        state = state / np.linalg.norm(state)
        return cls(np.outer(state, state.conj()), basis_labels)

    @classmethod
    def random(cls, dim, rng):
        """Random state from the Ginibre ensemble."""
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        mat = g @ g.conj().T
        return cls(mat / np.trace(mat).real)


def thermal_state(two_s, epsilon):
    """Thermal state exp(-epsilon sz) / Z, diagonal in the sz basis."""
    two_s = check_two_s(two_s)
    if not math.isfinite(epsilon):
        raise ValueError("epsilon must be finite")
    m = m_values(two_s)
    w = np.exp(-epsilon * m - np.max(-epsilon * m))
    return DensityMatrix(np.diag(w / w.sum()).astype(complex))


def outcome_probabilities(rho, direction):
    """Probabilities p(n, m) = <n,m| rho |n,m> of an s.n measurement,
    ordered m ascending."""
    if isinstance(rho, DensityMatrix):
        mat = rho.matrix
    else:
        mat = np.asarray(rho, dtype=complex)
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL:
            raise ValueError("rho is not Hermitian")
        if abs(np.trace(mat) - 1.0) > TRACE_TOL:
            raise ValueError("rho is not normalized")
    two_s = mat.shape[0] - 1
    lam = lambda_matrix(two_s, direction.theta, direction.phi)
    p = np.einsum("im,il,lm->m", lam.conj(), mat, lam).real
    if p.min() < -1e-10:
        raise ValueError(f"negative outcome probability {p.min()}")
    p = np.clip(p, 0.0, 1.0)
    total = p.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"outcome probabilities sum to {total}")
    return p / total


# ---------------------------------------------------------------------------
# coupled bases for indistinguishable spin-1/2 particles


@dataclass(frozen=True)
class Block:
    """One definite-(S, symmetry-copy) block of the coupled basis."""

    two_S: int
    copy: int
    start: int

    @property
    def dim(self):
        return self.two_S + 1

    @property
    def stop(self):
        return self.start + self.dim


@dataclass(frozen=True)
class CoupledBasis:
    """Unitary transform from the N-qubit product basis to the
    (S, M, copy) basis, with block bookkeeping.

    ``transform`` columns are the coupled vectors expressed in the
    product basis, so rho_coupled = U+ rho U.  Within a block the states
    are ordered M ascending; blocks are ordered S descending.
    """

    num_spins: int
    transform: np.ndarray
    blocks: tuple

    @property
    def dim(self):
        return self.transform.shape[0]

    @property
    def basis_labels(self):
        labels = []
        for b in self.blocks:
            for two_M in range(-b.two_S, b.two_S + 1, 2):
                labels.append((b.two_S / 2.0, two_M / 2.0, b.copy))
        return tuple(labels)

    def to_coupled(self, rho):
        mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return self.transform.conj().T @ mat @ self.transform

    def to_product(self, mat):
        return self.transform @ np.asarray(mat, dtype=complex) @ self.transform.conj().T


def total_spin_operators(num_spins):
    """Total Sx, Sy, Sz and S^2 for num_spins spin-1/2 particles in the
    product basis (kron order: particle 0 is the most significant factor)."""
    one = spin_operators(1)
    dim = 2 ** num_spins
    Sx = np.zeros((dim, dim), dtype=complex)
    Sy = np.zeros_like(Sx)
    Sz = np.zeros_like(Sx)
    for k in range(num_spins):
        ops = [np.eye(2, dtype=complex)] * num_spins
        for name, single in (("x", one.sx), ("y", one.sy), ("z", one.sz)):
            ops_k = list(ops)
            ops_k[k] = single
            full = ops_k[0]
            for o in ops_k[1:]:
                full = np.kron(full, o)
            if name == "x":
                Sx += full
            elif name == "y":
                Sy += full
            else:
                Sz += full
    S2 = Sx @ Sx + Sy @ Sy + Sz @ Sz
    return Sx, Sy, Sz, S2


def permutation_operators(num_spins):
    """Unitary representations of all particle permutations on the
    N-qubit product space."""
    from itertools import permutations

    dim = 2 ** num_spins
    out = []
    for perm in permutations(range(num_spins)):
        P = np.zeros((dim, dim))
        for idx in range(dim):
            bits = [(idx >> (num_spins - 1 - k)) & 1 for k in range(num_spins)]
            new_bits = [bits[perm[k]] for k in range(num_spins)]
            jdx = 0
            for b in new_bits:
                jdx = (jdx << 1) | b
            P[jdx, idx] = 1.0
        out.append(P)
    return out


def symmetrize(rho, num_spins):
    """Project onto the permutation-invariant part: the average of
    P rho P^-1 over all particle permutations.  This is the physical spin
    density matrix of indistinguishable particles."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    perms = permutation_operators(num_spins)
    out = sum(P @ mat @ P.T for P in perms) / len(perms)
    return DensityMatrix(out)


def _ladder_down(vec, Sminus):
    """Generate all M states of a block from its highest-M member."""
    states = [vec]
    cur = vec
    while True:
        nxt = Sminus @ cur
        norm = np.linalg.norm(nxt)
        if norm < 1e-9:
            break
        cur = nxt / norm
        states.append(cur)
    return states[::-1]  # M ascending


def _fix_phase(vec):
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def coupled_basis(num_spins):
    """Coupled (S, M, copy) basis for two or three spin-1/2 particles.

    N=2 yields the triplet block (S=1) followed by the singlet (S=0);
    N=3 the quartet (S=3/2) followed by the two mixed-symmetry doublets
    (S=1/2), distinguished by the intermediate spin of particles 1+2
    (copy 1: particles 1,2 coupled to spin 1; copy 2: to spin 0).
    """
    if num_spins not in (2, 3):
        raise ValueError(f"coupled_basis supports 2 or 3 spins, got {num_spins}")
    Sx, Sy, Sz, S2 = total_spin_operators(num_spins)
    Sminus = (Sx - 1j * Sy)
    dim = 2 ** num_spins

    # stretched state |S=N/2, M=N/2> = |up...up> (last product index)
    top = np.zeros(dim, dtype=complex)
    top[-1] = 1.0
    max_block = _ladder_down(top, Sminus)

    columns = list(max_block)
    blocks = [Block(two_S=num_spins, copy=0, start=0)]

    if num_spins == 2:
        # singlet: orthogonal complement of the triplet M=0 state inside
        # the M=0 product sector
        mz = np.real(np.diag(Sz))
        sector = [i for i in range(dim) if abs(mz[i]) < 1e-9]
        basis = np.zeros((dim, len(sector)), dtype=complex)
        for j, i in enumerate(sector):
            basis[i, j] = 1.0
        triplet_m0 = max_block[1]
        up_down = basis[:, 1]  # |up, down>
        cand = up_down - triplet_m0 * (triplet_m0.conj() @ up_down)
        singlet = cand / np.linalg.norm(cand)
        # textbook phase: positive coefficient on |up, down>
        comp = singlet.conj() @ up_down
        singlet = singlet * (comp / abs(comp))
        columns.append(singlet)
        blocks.append(Block(two_S=0, copy=0, start=3))
    else:
        # S=1/2 doublets: work in the M=+1/2 sector, project out the
        # quartet component, then split by the intermediate (s1+s2)^2
        mz = np.real(np.diag(Sz))
        sector = [i for i in range(dim) if abs(mz[i] - 0.5) < 1e-9]
        basis = np.zeros((dim, len(sector)), dtype=complex)
        for j, i in enumerate(sector):
            basis[i, j] = 1.0
        quartet_m = max_block[2]  # M = +1/2 member of S=3/2
        gram = basis - np.outer(quartet_m, quartet_m.conj() @ basis)
        # orthonormal basis of the 2-dim S=1/2, M=1/2 space
        q, r = np.linalg.qr(gram)
        keep = [j for j in range(q.shape[1]) if abs(r[j, j]) > 1e-9]
        sub = q[:, keep]

        one = spin_operators(1)
        s12 = []
        for single in (one.sx, one.sy, one.sz):
            op = (np.kron(np.kron(single, np.eye(2)), np.eye(2))
                  + np.kron(np.kron(np.eye(2), single), np.eye(2)))
            s12.append(op)
        S12_sq = sum(op @ op for op in s12)
        small = sub.conj().T @ S12_sq @ sub
        evals, evecs = np.linalg.eigh(small)
        # eigenvalues are 0 (particles 1,2 in a singlet) and 2 (triplet)
        order = np.argsort(evals)[::-1]  # intermediate spin 1 first
        start = 4
        for copy, j in enumerate(order, start=1):
            vec = _fix_phase(sub @ evecs[:, j])
            block_states = _ladder_down(vec, Sminus)
            columns.extend(block_states)
            blocks.append(Block(two_S=1, copy=copy, start=start))
            start += 2

    U = np.column_stack(columns)
    return CoupledBasis(num_spins=num_spins, transform=U, blocks=tuple(blocks))
