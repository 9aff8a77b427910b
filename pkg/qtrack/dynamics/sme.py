"""Stochastic master equation for the conditional density matrix.

Dense Pauli matrices are materialized only here (dimension 2**n <= 32);
everything else works with the symplectic form.
"""

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from ..core.errors import CodeDefinitionError, NumericalFailure
from ..stabilizer.codes import StabilizerCode
from ..stabilizer.pauli import PauliString

DensityMatrix = np.ndarray

TRACE_FLOOR = 1e-6

_SINGLE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(pauli: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string; qubit 1 is the leftmost tensor factor."""
    return reduce(np.kron, [_SINGLE[pauli.qubit_bits(q)] for q in range(1, pauli.n + 1)])


@dataclass(frozen=True, eq=False)
class SMEOperators:
    """Dense operator tables for one code, built once and shared."""

    errors: tuple[np.ndarray, ...]
    generators: tuple[np.ndarray, ...]
    projectors: np.ndarray  # (n_syndromes, dim, dim)

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]


@lru_cache(maxsize=8)
def sme_operators(code: StabilizerCode) -> SMEOperators:
    dim = 1 << code.n
    identity = np.eye(dim, dtype=complex)
    generators = tuple(pauli_matrix(g) for g in code.generators)
    projectors = np.empty((code.n_syndromes, dim, dim), dtype=complex)
    for s in range(code.n_syndromes):
        signs = [1 - 2 * ((s >> k) & 1) for k in range(len(generators))]
        projectors[s] = reduce(
            np.matmul,
            [(identity + sign * m) / 2 for sign, m in zip(signs, generators)],
            identity,
        )
    return SMEOperators(
        errors=tuple(pauli_matrix(e) for e in code.error_channels),
        generators=generators,
        projectors=projectors,
    )


def encoded_state(c0: complex, c1: complex, code: StabilizerCode) -> np.ndarray:
    """
    The code vector c0|0_L> + c1|1_L>.

    |0_L> is the stabilizer projector applied to |0...0>, normalized;
    |1_L> is the logical X applied to |0_L>.

    Raises:
        ValueError: if |c0|^2 + |c1|^2 != 1
        CodeDefinitionError: if the code encodes no logical qubit
    """
    if abs(abs(c0) ** 2 + abs(c1) ** 2 - 1.0) > 1e-12:
        raise ValueError("amplitudes must satisfy |c0|^2 + |c1|^2 = 1")
    if not code.logicals:
        raise CodeDefinitionError(f"{code.name} has no logical operators to encode with")

    ops = sme_operators(code)
    reference = np.zeros(ops.dim, dtype=complex)
    reference[0] = 1.0
    zero_l = ops.projectors[0] @ reference
    zero_l /= np.linalg.norm(zero_l)
    one_l = pauli_matrix(code.logicals[0]) @ zero_l
    return c0 * zero_l + c1 * one_l


def encode(c0: complex, c1: complex, code: StabilizerCode) -> DensityMatrix:
    """Pure-state density matrix of the encoded logical state."""
    psi = encoded_state(c0, c1, code)
    return np.outer(psi, psi.conj())


def _finish(new: DensityMatrix, dt: float) -> DensityMatrix:
    new = (new + new.conj().T) / 2
    trace = float(np.trace(new).real)
    if not np.isfinite(trace) or trace < TRACE_FLOOR:
        raise NumericalFailure("density matrix trace collapsed", dt=dt, trace=trace)
    return new / trace


def _measurement_terms(
    rho: DensityMatrix, ops: SMEOperators, kappa: float, dY: np.ndarray, dt: float
) -> DensityMatrix:
    root = np.sqrt(kappa)
    update = np.zeros_like(rho)
    for m, dy in zip(ops.generators, dY):
        expectation = float(np.trace(m @ rho).real)
        update += kappa * (m @ rho @ m - rho) * dt
        update += root * (m @ rho + rho @ m - 2 * expectation * rho) * (
            dy - 2 * root * expectation * dt
        )
    return update


def sme_step(
    rho: DensityMatrix,
    code: StabilizerCode,
    dY: np.ndarray,
    dt: float,
) -> DensityMatrix:
    """
    One Euler-Maruyama step of the quantum filtering equation.

        rho <- rho + sum_k gamma T[E_k] rho dt + sum_i kappa T[M_i] rho dt
                   + sum_i sqrt(kappa) H[M_i] rho (dY_i - 2 sqrt(kappa) Tr[M_i rho] dt)

    followed by re-Hermitization and trace renormalization.

    Raises:
        NumericalFailure: if the trace falls below 1e-6 before renormalizing
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ops = sme_operators(code)
    new = rho + _measurement_terms(rho, ops, code.kappa, np.asarray(dY, dtype=float), dt)
    for e in ops.errors:
        new += code.gamma * (e @ rho @ e.conj().T - rho) * dt
    return _finish(new, dt)


def sme_jump_step(
    rho: DensityMatrix,
    code: StabilizerCode,
    dZ: np.ndarray,
    dY: np.ndarray,
    dt: float,
) -> DensityMatrix:
    """Jump-unraveled step: gamma T[E_k] dt is replaced by T[E_k] dZ_k."""
    ops = sme_operators(code)
    new = rho + _measurement_terms(rho, ops, code.kappa, np.asarray(dY, dtype=float), dt)
    for e, jumps in zip(ops.errors, dZ):
        if jumps:
            new += jumps * (e @ rho @ e.conj().T - rho)
    return _finish(new, dt)


def syndrome_probs(rho: DensityMatrix, code: StabilizerCode) -> np.ndarray:
    """Tr[Pi_m rho] for every syndrome m."""
    ops = sme_operators(code)
    return np.einsum("sij,ji->s", ops.projectors, rho).real


def recovery_fidelity(rho: DensityMatrix, correction: PauliString, psi_e: np.ndarray) -> float:
    """<Psi_E| R rho R |Psi_E> for the self-inverse correction R."""
    r = pauli_matrix(correction)
    corrected = r @ rho @ r.conj().T
    value = float(np.vdot(psi_e, corrected @ psi_e).real)
    return min(max(value, 0.0), 1.0)


def is_density_matrix(rho: DensityMatrix, tolerance: float = 1e-10) -> bool:
    """Hermitian, unit trace, and eigenvalues >= -1e-8."""
    hermitian = np.allclose(rho, rho.conj().T, atol=tolerance)
    unit_trace = abs(np.trace(rho) - 1.0) <= tolerance
    return bool(hermitian and unit_trace and np.linalg.eigvalsh(rho).min() >= -1e-8)


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random state from the Ginibre ensemble."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
