"""Measurement apparatus simulation.

Random measurement axes, Stern-Gerlach outcome sampling, the field plan
for the rotation magnet, and the two-/three-particle apparatus for
indistinguishable spin-1/2 systems.  All sampling is driven by numpy
Generators seeded through SeedSequence, so that shards spawned from one
seed give independent, reproducible streams.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import spincore as sc
from .spincore import DensityMatrix, Direction

#: shard size for stream generation; fixed so results do not depend on
#: the worker count
SHARD_SIZE = 65536

#: giromagnetic factors, rad s^-1 Gauss^-1
ELECTRON_GAMMA = 1.7608e7
NUCLEON_GAMMA = 2.6752e4


@dataclass(frozen=True)
class ApparatusParams:
    """Physical parameters of the rotation magnet stage."""

    gamma: float          # rad s^-1 Gauss^-1
    transit_time: float   # s

    def __post_init__(self):
        if self.gamma == 0:
            raise ValueError("gamma must be nonzero")
        if self.transit_time <= 0:
            raise ValueError("transit time must be positive")

    @classmethod
    def from_beam(cls, gamma, speed_cm_s, length_cm):
        if speed_cm_s <= 0 or length_cm <= 0:
            raise ValueError("beam speed and magnet length must be positive")
        return cls(gamma=gamma, transit_time=length_cm / speed_cm_s)

    @classmethod
    def electron(cls):
        """Electron beam at 1e9 cm/s through a 1 cm magnet."""
        return cls.from_beam(ELECTRON_GAMMA, 1e9, 1.0)

    @classmethod
    def nucleon(cls):
        """Nucleon beam at 1e7 cm/s through a 1 cm magnet."""
        return cls.from_beam(NUCLEON_GAMMA, 1e7, 1.0)


def plan_field(theta, params):
    """Magnet field B1 = -theta / (gamma t) realizing a rotation by theta."""
    return -theta / (params.gamma * params.transit_time)


def sample_directions(rng, size):
    """Uniform directions on the sphere: phi uniform, cos(theta) uniform.

    Returns (thetas, phis) arrays.
    """
    phis = rng.uniform(0.0, 2.0 * math.pi, size)
    thetas = np.arccos(rng.uniform(-1.0, 1.0, size))
    return thetas, phis


def sample_direction(rng):
    """One uniform random measurement axis."""
    thetas, phis = sample_directions(rng, 1)
    return Direction(thetas[0], phis[0])


def _sample_from_rows(prob_rows, rng):
    """Inverse-CDF sampling of one index per row of a probability table."""
    cdf = np.cumsum(prob_rows, axis=1)
    cdf[:, -1] = 1.0
    u = rng.uniform(0.0, 1.0, prob_rows.shape[0])
    return (u[:, None] > cdf).sum(axis=1)


def sample_outcomes(rho, thetas, phis, rng):
    """Outcome basis indices for s.n measurements of rho along each
    direction, drawn by inverse-CDF sampling."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    two_s = mat.shape[0] - 1
    lam = sc.lambda_matrices(two_s, thetas, phis)
    probs = np.einsum("nim,il,nlm->nm", lam.conj(), mat, lam).real
    if probs.min() < -1e-10:
        raise ValueError(f"negative outcome probability {probs.min()}")
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return _sample_from_rows(probs, rng)


def simulate_measurement(rho, direction, rng):
    """One simulated s.n measurement; returns the outcome m."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    two_s = mat.shape[0] - 1
    idx = sample_outcomes(rho, np.array([direction.theta]),
                          np.array([direction.phi]), rng)[0]
    return float(sc.m_values(two_s)[idx])


@dataclass
class SingleRecords:
    """Measurement records of one spin: a direction and an outcome each."""

    two_s: int
    thetas: np.ndarray
    phis: np.ndarray
    m: np.ndarray  # outcome values (half-integers)

    def __len__(self):
        return len(self.m)

    @property
    def m_indices(self):
        return np.round(self.m + self.two_s / 2.0).astype(int)

    def head(self, n):
        return SingleRecords(self.two_s, self.thetas[:n], self.phis[:n], self.m[:n])


@dataclass
class MultiRecords:
    """Per-particle directions and outcomes for N distinguishable spins.

    Arrays have shape (num_samples, num_particles).
    """

    two_s_list: tuple
    thetas: np.ndarray
    phis: np.ndarray
    m: np.ndarray

    def __len__(self):
        return self.m.shape[0]

    @property
    def num_particles(self):
        return len(self.two_s_list)


@dataclass
class CoupledRecords:
    """Joint (S, M) outcomes of total-spin measurements along random axes."""

    num_spins: int
    thetas: np.ndarray
    phis: np.ndarray
    total_S: np.ndarray
    total_M: np.ndarray

    def __len__(self):
        return len(self.total_S)


SCHEMES = ("continuous", "pauli_half", "tetrahedral_one")
MODES = ("single", "distinguishable", "indistinguishable")


@dataclass
class ExperimentConfig:
    true_state: DensityMatrix
    num_samples: int
    num_blocks: int = 10
    seed: int = 0
    scheme: str = "continuous"
    mode: str = "single"

    def __post_init__(self):
        if self.num_blocks < 2:
            raise ValueError("num_blocks must be >= 2")
        if self.num_samples <= 0 or self.num_samples % self.num_blocks:
            raise ValueError(
                f"num_samples={self.num_samples} must be a positive multiple "
                f"of num_blocks={self.num_blocks}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


def _shard_rngs(seed, num_samples):
    """Independent per-shard generators derived from (seed, shard index)."""
    seq = np.random.SeedSequence(seed)
    num_shards = (num_samples + SHARD_SIZE - 1) // SHARD_SIZE
    return [np.random.default_rng(child) for child in seq.spawn(num_shards)]


def run_experiment(config):
    """Generate the full record stream for a configuration.

    Samples are produced in fixed-size shards with independent RNG
    streams (shard-major order), so the output is reproducible and
    independent of any worker layout.
    """
    if config.mode == "indistinguishable":
        return run_coupled_experiment(config.true_state, config.num_samples,
                                      config.seed)
    if config.mode == "distinguishable":
        raise ValueError(
            "distinguishable mode needs per-particle states; "
            "use run_product_experiment")
    rho = config.true_state
    two_s = rho.dim - 1
    if config.scheme == "continuous":
        thetas = np.empty(config.num_samples)
        phis = np.empty(config.num_samples)
        idxs = np.empty(config.num_samples, dtype=int)
        start = 0
        for rng in _shard_rngs(config.seed, config.num_samples):
            stop = min(start + SHARD_SIZE, config.num_samples)
            t, p = sample_directions(rng, stop - start)
            thetas[start:stop] = t
            phis[start:stop] = p
            idxs[start:stop] = sample_outcomes(rho, t, p, rng)
            start = stop
        return SingleRecords(two_s, thetas, phis, sc.m_values(two_s)[idxs])

    from .kernel import finite_scheme

    scheme = finite_scheme(config.scheme)
    if scheme.two_s != two_s:
        raise ValueError(
            f"scheme {config.scheme!r} requires two_s={scheme.two_s}, "
            f"state has two_s={two_s}")
    # directions cycle round-robin so every axis gets an equal share
    dir_idx = np.arange(config.num_samples) % scheme.num_directions
    thetas = np.array([d.theta for d in scheme.directions])[dir_idx]
    phis = np.array([d.phi for d in scheme.directions])[dir_idx]
    prob_table = scheme.exact_probabilities(rho)
    idxs = np.empty(config.num_samples, dtype=int)
    start = 0
    for rng in _shard_rngs(config.seed, config.num_samples):
        stop = min(start + SHARD_SIZE, config.num_samples)
        idxs[start:stop] = _sample_from_rows(prob_table[dir_idx[start:stop]], rng)
        start = stop
    return SingleRecords(two_s, thetas, phis, sc.m_values(two_s)[idxs])


def run_product_experiment(states, num_samples, seed):
    """Record stream for distinguishable particles in a product state.

    ``states`` is one single-particle DensityMatrix per spin; every
    particle gets an independent direction and outcome per sample.
    """
    num_particles = len(states)
    two_s_list = tuple(s.dim - 1 for s in states)
    thetas = np.empty((num_samples, num_particles))
    phis = np.empty_like(thetas)
    m = np.empty_like(thetas)
    start = 0
    for rng in _shard_rngs(seed, num_samples):
        stop = min(start + SHARD_SIZE, num_samples)
        for k, rho in enumerate(states):
            t, p = sample_directions(rng, stop - start)
            idx = sample_outcomes(rho, t, p, rng)
            thetas[start:stop, k] = t
            phis[start:stop, k] = p
            m[start:stop, k] = sc.m_values(two_s_list[k])[idx]
        start = stop
    return MultiRecords(two_s_list, thetas, phis, m)


# ---------------------------------------------------------------------------
# indistinguishable particles

SYMMETRY_TOL = 1e-10


def check_permutation_symmetry(rho, num_spins):
    """Largest violation of P rho P^-1 = rho over all permutations."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    worst = 0.0
    for P in sc.permutation_operators(num_spins):
        worst = max(worst, float(np.max(np.abs(P @ mat @ P.T - mat))))
    return worst


def coupled_outcome_probabilities(rho, direction, num_spins, basis=None):
    """Probability table p(S, M) of a joint (S^2, S.n) measurement.

    Returns (outcomes, probs) with outcomes a list of (S, M) pairs.
    Copies with the same S are summed over, as in the measurement.
    """
    basis = basis if basis is not None else sc.coupled_basis(num_spins)
    residual = check_permutation_symmetry(rho, num_spins)
    if residual > SYMMETRY_TOL:
        raise ValueError(
            f"state is not permutation symmetric (residual {residual:.2e})")
    rho_c = basis.to_coupled(rho)
    table = {}
    for block in basis.blocks:
        sub = rho_c[block.start:block.stop, block.start:block.stop]
        if block.two_S == 0:
            probs = np.array([sub[0, 0].real])
        else:
            lam = sc.lambda_matrix(block.two_S, direction.theta, direction.phi)
            probs = np.einsum("im,il,lm->m", lam.conj(), sub, lam).real
        for k, two_M in enumerate(range(-block.two_S, block.two_S + 1, 2)):
            key = (block.two_S / 2.0, two_M / 2.0)
            table[key] = table.get(key, 0.0) + probs[k]
    outcomes = sorted(table)
    probs = np.clip(np.array([table[o] for o in outcomes]), 0.0, None)
    return outcomes, probs / probs.sum()


def coupled_measurement(rho, direction, rng, num_spins):
    """One simulated joint (S^2, S.n) measurement; returns (S, M)."""
    outcomes, probs = coupled_outcome_probabilities(rho, direction, num_spins)
    idx = _sample_from_rows(probs[None, :], rng)[0]
    return outcomes[idx]


def run_coupled_experiment(rho, num_samples, seed, num_spins=None):
    """Record stream of (n, S, M) outcomes for an indistinguishable system."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if num_spins is None:
        num_spins = int(round(math.log2(mat.shape[0])))
    basis = sc.coupled_basis(num_spins)
    residual = check_permutation_symmetry(rho, num_spins)
    if residual > SYMMETRY_TOL:
        raise ValueError(
            f"state is not permutation symmetric (residual {residual:.2e})")
    rho_c = basis.to_coupled(rho)
    outcomes = sorted({(b.two_S / 2.0, two_M / 2.0)
                       for b in basis.blocks
                       for two_M in range(-b.two_S, b.two_S + 1, 2)})
    col = {o: k for k, o in enumerate(outcomes)}
    S_of = np.array([o[0] for o in outcomes])
    M_of = np.array([o[1] for o in outcomes])

    thetas = np.empty(num_samples)
    phis = np.empty(num_samples)
    S = np.empty(num_samples)
    M = np.empty(num_samples)
    start = 0
    for rng in _shard_rngs(seed, num_samples):
        stop = min(start + SHARD_SIZE, num_samples)
        t, p = sample_directions(rng, stop - start)
        thetas[start:stop] = t
        phis[start:stop] = p
        table = np.zeros((stop - start, len(outcomes)))
        for block in basis.blocks:
            sub = rho_c[block.start:block.stop, block.start:block.stop]
            if block.two_S == 0:
                table[:, col[(0.0, 0.0)]] += sub[0, 0].real
                continue
            lam = sc.lambda_matrices(block.two_S, t, p)
            probs = np.einsum("nim,il,nlm->nm", lam.conj(), sub, lam).real
            for k, two_M in enumerate(range(-block.two_S, block.two_S + 1, 2)):
                table[:, col[(block.two_S / 2.0, two_M / 2.0)]] += probs[:, k]
        table = np.clip(table, 0.0, None)
        table /= table.sum(axis=1, keepdims=True)
        idx = _sample_from_rows(table, rng)
        S[start:stop] = S_of[idx]
        M[start:stop] = M_of[idx]
        start = stop
    return CoupledRecords(num_spins, thetas, phis, S, M)


# ---------------------------------------------------------------------------
# the two-spin cascade apparatus

DETECTORS = ("B", "C", "D", "E")


def _alpha_coefficients():
    """Overlaps alpha_i = <1, i|_y |1, 0> of the triplet M=0 state with the
    S_y eigenstates, from the spin-1 rotation matrix at theta = pi/2."""
    out = {}
    for m in (-1.0, 0.0, 1.0):
        v = sc.eigenstate(2, sc.Y_AXIS, m)
        out[m] = complex(v.conj()[1])  # component on |1, 0>
    return out


def apparatus_probabilities(state):
    """Exact detector probabilities of the two-spin cascade.

    ``state`` is a 4-vector (gamma_s, gamma_a(-1), gamma_a(0), gamma_a(1))
    in the coupled basis [(0,0), (1,-1), (1,0), (1,1)].  Returns a dict
    with detector probabilities and the intermediate pA, pS.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (4,):
        raise ValueError("two-spin state must have 4 coupled-basis amplitudes")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state norm {norm} != 1")
    gs, gm1, g0, gp1 = state
    pB = abs(gp1) ** 2
    pC = abs(gm1) ** 2
    pA = abs(gs) ** 2 + abs(g0) ** 2
    alpha0 = _alpha_coefficients()[0.0]
    if pA > 0:
        pS = (abs(gs) ** 2 + abs(g0) ** 2 * abs(alpha0) ** 2) / pA
    else:
        pS = 0.0
    return {"B": pB, "C": pC, "D": pA * pS, "E": pA * (1.0 - pS),
            "pA": pA, "pS": pS}


def two_spin_apparatus(state, rng):
    """Simulate one system through the cascade; returns the detector name.

    First the z gradient separates the M = +/-1 triplet components
    (detectors B and C); the surviving M = 0 beam crosses a y gradient
    that routes systems to detector D or E.
    """
    p = apparatus_probabilities(state)
    probs = np.array([p[d] for d in DETECTORS])
    idx = _sample_from_rows(probs[None, :] / probs.sum(), rng)[0]
    return DETECTORS[idx]


def two_spin_apparatus_counts(state, shots, rng):
    """Detector counts for many shots (a multinomial over the cascade)."""
    p = apparatus_probabilities(state)
    probs = np.array([p[d] for d in DETECTORS])
    counts = rng.multinomial(shots, probs / probs.sum())
    return dict(zip(DETECTORS, counts))


def invert_apparatus(pA, pS):
    """Solve the cascade equations for (|gamma_s|^2, |gamma_a(0)|^2).

    Returns (gs2, g0a2, clipped) where ``clipped`` flags results pulled
    back into [0, pA] from statistical noise.
    """
    if not (0.0 <= pA <= 1.0 and 0.0 <= pS <= 1.0):
        raise ValueError("pA and pS must be probabilities")
    alpha0_sq = abs(_alpha_coefficients()[0.0]) ** 2
    if abs(1.0 - alpha0_sq) < 1e-12:
        raise ValueError("degenerate geometry: |alpha_0|^2 = 1")
    gs2 = pA * (pS - alpha0_sq) / (1.0 - alpha0_sq)
    g0a2 = pA - gs2
    clipped = not (0.0 <= gs2 <= pA)
    gs2 = min(max(gs2, 0.0), pA)
    g0a2 = min(max(g0a2, 0.0), pA)
    return gs2, g0a2, clipped
