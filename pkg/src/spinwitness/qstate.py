"""Exact 4x4 complex algebra and entanglement quantities for two qubits.

Everything here operates on plain ``numpy`` arrays: a two-qubit state is a
4x4 complex Hermitian, positive-semidefinite, unit-trace matrix with the
basis ordered |00>, |01>, |10>, |11> (index = 2*first_qubit + second_qubit).
The partial transpose acts on the second tensor factor.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PAULI",
    "PauliObservable",
    "MeasurementBasis",
    "CholeskyAngles",
    "pauli_tensor",
    "eigenbasis",
    "expectation",
    "partial_transpose",
    "negativity",
    "fidelity",
    "purity",
    "dephase",
    "cholesky_to_state",
    "state_to_cholesky_angles",
    "check_density_matrix",
    "state_to_json",
    "state_from_json",
]

# single-qubit Pauli matrices
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# columns are the +1 / -1 eigenvectors of each Pauli
_EIGVECS = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
    "Z": np.array([[1, 0], [0, 1]], dtype=complex),
}

#: a bipartite Pauli observable, e.g. ("X", "Z")
PauliObservable = tuple


def _check_obs(obs) -> None:
    left, right = obs
    if left not in PAULI or right not in PAULI:
        raise ValueError(f"Pauli labels must be in I/X/Y/Z, got {obs!r}")


def pauli_tensor(obs: PauliObservable) -> np.ndarray:
    """Kronecker product of the two single-qubit Paulis named by ``obs``."""
    _check_obs(obs)
    return np.kron(PAULI[obs[0]], PAULI[obs[1]])


@dataclass(frozen=True)
class MeasurementBasis:
    """Rank-1 eigenprojectors of a bipartite Pauli pair.

    ``projectors`` has shape (4, 4, 4); outcome j projects onto the product
    of single-qubit eigenvectors with signs (+,+), (+,-), (-,+), (-,-), and
    ``eigenvalues[j]`` is the corresponding product of signs.
    """

    observable: PauliObservable
    projectors: np.ndarray
    eigenvalues: np.ndarray


def eigenbasis(obs: PauliObservable) -> MeasurementBasis:
    """Eigenprojectors and eigenvalues of a two-qubit Pauli observable.

    The identity factor is rejected: a degenerate eigenbasis has no
    well-defined four-outcome measurement.
    """
    _check_obs(obs)
    left, right = obs
    if "I" in (left, right):
        raise ValueError("eigenbasis requires X/Y/Z on both factors")
    projs = np.empty((4, 4, 4), dtype=complex)
    vals = np.empty(4)
    k = 0
    for i, si in ((0, 1.0), (1, -1.0)):
        for j, sj in ((0, 1.0), (1, -1.0)):
            v = np.kron(_EIGVECS[left][:, i], _EIGVECS[right][:, j])
            projs[k] = np.outer(v, v.conj())
            vals[k] = si * sj
            k += 1
    return MeasurementBasis(obs, projs, vals)


def expectation(rho: np.ndarray, obs: PauliObservable) -> float:
    """Tr(rho * sigma) for the bipartite Pauli ``obs``; real for valid states."""
    return float(np.real(np.trace(rho @ pauli_tensor(obs))))


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose on the second tensor factor (rho^Gamma2)."""
    return np.asarray(rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity(rho: np.ndarray) -> float:
    """Sum of |negative eigenvalues| of the partial transpose."""
    ev = np.linalg.eigvalsh(partial_transpose(rho))
    return float(-ev[ev < 0].sum())


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2)."""
    return float(np.real(np.trace(rho @ rho)))


def _psd_sqrt(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Matrix square root via eigendecomposition, clamping eigenvalues in
    [-tol, 0) to zero."""
    w, v = np.linalg.eigh(rho)
    if w.min() < -tol:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, in [0, 1]."""
    sq = _psd_sqrt(rho)
    mid = sq @ sigma @ sq
    mid = 0.5 * (mid + mid.conj().T)
    w = np.linalg.eigvalsh(mid)
    if w.min() < -1e-9:
        raise ValueError(f"inner matrix not PSD: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return float(min(np.sqrt(w).sum() ** 2, 1.0))


def dephase(rho: np.ndarray, p: float) -> np.ndarray:
    """Apply the single-qubit phase-damping map (1-p) rho + p Z rho Z to both
    qubits."""
    out = np.asarray(rho, dtype=complex)
    for obs in (("Z", "I"), ("I", "Z")):
        z = pauli_tensor(obs)
        out = (1 - p) * out + p * (z @ out @ z)
    return out


@dataclass(frozen=True)
class CholeskyAngles:
    """Hypersphere coordinates of the Cholesky factor of a two-qubit state.

    ``thetas`` (9 angles) set the magnitudes of the ten lower-triangular
    entries of L through the usual 9-sphere recursion, ``phis`` (6 angles)
    are the phases of the six strictly-lower entries. Any real values are
    valid; the map onto states is periodic.
    """

    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        phis = np.asarray(self.phis, dtype=float)
        if thetas.shape != (9,) or phis.shape != (6,):
            raise ValueError("expected 9 thetas and 6 phis")
        if not (np.isfinite(thetas).all() and np.isfinite(phis).all()):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.thetas, self.phis])

    @classmethod
    def from_vector(cls, x) -> "CholeskyAngles":
        x = np.asarray(x, dtype=float)
        return cls(x[:9], x[9:])


# positions of l_1..l_10 in the lower-triangular factor
_L_SLOTS = [(0, 0), (1, 1), (2, 2), (3, 3),
            (1, 0), (2, 1), (3, 2),
            (2, 0), (3, 1), (3, 0)]


def cholesky_factor(angles: CholeskyAngles) -> np.ndarray:
    """Lower-triangular L with unit Frobenius norm from the angle coordinates."""
    th, ph = angles.thetas, angles.phis
    sines = np.concatenate(([1.0], np.cumprod(np.sin(th))))
    mags = np.empty(10)
    mags[:9] = sines[:9] * np.cos(th)
    mags[9] = sines[9]
    entries = mags.astype(complex)
    entries[4:] *= np.exp(1j * ph)
    L = np.zeros((4, 4), dtype=complex)
    for val, (i, j) in zip(entries, _L_SLOTS):
        L[i, j] = val
    return L


def cholesky_to_state(angles: CholeskyAngles) -> np.ndarray:
    """L L^dagger: always Hermitian, PSD and unit trace by construction."""
    L = cholesky_factor(angles)
    return L @ L.conj().T


def state_to_cholesky_angles(rho: np.ndarray, floor: float = 1e-12) -> CholeskyAngles:
    """Angle coordinates whose state reproduces ``rho`` (up to the ``floor``
    regularisation needed to Cholesky-factor rank-deficient states)."""
    w, v = np.linalg.eigh(np.asarray(rho, dtype=complex))
    w = np.clip(w, floor, None)
    reg = (v * w) @ v.conj().T
    reg /= np.real(np.trace(reg))
    L = np.linalg.cholesky(reg)
    entries = np.array([L[i, j] for i, j in _L_SLOTS])
    thetas = np.zeros(9)
    prod = 1.0
    for k in range(9):
        mag = entries[k].real if k < 4 else abs(entries[k])
        c = np.clip(mag / prod, -1.0, 1.0) if prod > 1e-300 else 1.0
        thetas[k] = np.arccos(c)
        prod *= np.sin(thetas[k])
    phis = np.array([np.angle(e) if abs(e) > 1e-300 else 0.0 for e in entries[4:]])
    return CholeskyAngles(thetas, phis)


def check_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12,
                         trace_tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
    """Raise ValueError unless ``rho`` is a valid two-qubit state."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {rho.shape}")
    if not np.isfinite(rho).all():
        raise ValueError("state has non-finite entries")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise ValueError(f"not Hermitian: max deviation {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"trace is {tr:.12g}, not 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -psd_tol:
        raise ValueError(f"not PSD: min eigenvalue {lo:.3e}")


def state_to_json(rho: np.ndarray) -> str:
    """Serialize a state as {"re": [[...]], "im": [[...]]}, row-major."""
    rho = np.asarray(rho, dtype=complex)
    return json.dumps({"re": rho.real.tolist(), "im": rho.imag.tolist()})


def state_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
