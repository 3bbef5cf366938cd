"""Dense complex linear algebra and validated quantum objects.

All operators are plain numpy arrays of dtype complex128.  Hilbert-space
factors are ordered A, B, C throughout the package: composite operators
are assembled as ``tensor(op_A, op_B, op_C)`` and never permuted
afterwards, so no permutation bookkeeping is needed anywhere else.
Dimensions stay small (<= ~16) and everything uses dense double
precision; there is no sparse or symbolic path.

The validated wrapper types (:class:`DensityOperator`, :class:`Povm`,
:class:`QuantumChannel`, :class:`BlochVector`) check their defining
properties on construction and freeze the underlying arrays, so
instances can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Absolute per-entry tolerance used when validating quantum objects.
VALIDATION_TOL = 1e-10

#: Tighter tolerance for algebraic identities (completeness sums, duals).
IDENTITY_TOL = 1e-12

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def pauli(j: int) -> np.ndarray:
    """Return the Pauli matrix sigma_j for j in {1, 2, 3}."""
    if j not in (1, 2, 3):
        raise ValueError(f"Pauli index must be 1, 2 or 3, got {j!r}")
    return _PAULI[j - 1].copy()


def tensor(*operators) -> np.ndarray:
    """Kronecker product of one or more matrices, in the given order."""
    if not operators:
        raise ValueError("tensor() needs at least one operator")
    out = np.asarray(operators[0], dtype=np.complex128)
    for op in operators[1:]:
        out = np.kron(out, np.asarray(op, dtype=np.complex128))
    return out


def partial_trace(matrix, dims, traced_factor: int) -> np.ndarray:
    """Trace out one tensor factor of a square matrix.

    ``dims`` lists the factor dimensions in order; ``traced_factor`` is the
    zero-based index of the factor to remove.  For a two-factor operator,
    ``partial_trace(m, [dA, dB], 1)`` returns Tr_B[m].
    """
    m = np.asarray(matrix, dtype=np.complex128)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(
            f"matrix shape {m.shape} does not match factor dimensions {dims}"
        )
    n = len(dims)
    if not 0 <= traced_factor < n:
        raise ValueError(f"traced_factor {traced_factor} out of range for {n} factors")
    arr = m.reshape(dims + dims)
    out = np.trace(arr, axis1=traced_factor, axis2=traced_factor + n)
    keep = total // dims[traced_factor]
    return np.ascontiguousarray(out.reshape(keep, keep))


def mats_close(a, b, tol: float = VALIDATION_TOL) -> bool:
    """Entrywise comparison with an absolute tolerance."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        return False
    return bool(np.max(np.abs(a - b)) <= tol)


def is_hermitian(matrix, tol: float = VALIDATION_TOL) -> bool:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def is_positive_semidefinite(matrix, tol: float = VALIDATION_TOL) -> bool:
    """Check positivity of a Hermitian matrix via its spectrum.

    Raises ValueError if the input is not Hermitian within ``tol``;
    positivity is only meaningful for Hermitian operators.
    """
    m = np.asarray(matrix, dtype=np.complex128)
    if not is_hermitian(m, tol):
        raise ValueError("positivity check requires a Hermitian matrix")
    return bool(np.linalg.eigvalsh(m)[0] >= -tol)


def _frozen_array(values, dtype=np.complex128) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated density operator: Hermitian, unit trace, positive."""

    matrix: np.ndarray
    tol: float = VALIDATION_TOL

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValueError("density operator must be a square matrix")
        if not is_hermitian(mat, self.tol):
            raise ValueError("density operator must be Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > self.tol:
            raise ValueError(f"density operator must have unit trace, got {tr}")
        if np.linalg.eigvalsh(mat)[0] < -self.tol:
            raise ValueError("density operator must be positive semidefinite")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, operator) -> float:
        """Tr[O rho] for a Hermitian observable O (real part returned)."""
        op = np.asarray(operator, dtype=np.complex128)
        return float(np.trace(op @ self.matrix).real)


@dataclass(frozen=True, eq=False)
class Povm:
    """A validated POVM: Hermitian positive elements summing to identity.

    Outcome order is positional and fixed by the caller's convention
    (documented at each use site within this package).
    """

    elements: tuple
    tol: float = VALIDATION_TOL

    def __post_init__(self):
        if len(self.elements) < 1:
            raise ValueError("POVM needs at least one element")
        mats = []
        dim = None
        for el in self.elements:
            m = np.array(el, dtype=np.complex128)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError("POVM elements must be square matrices")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise ValueError("POVM elements must share one dimension")
            if not is_hermitian(m, self.tol):
                raise ValueError("POVM elements must be Hermitian")
            if np.linalg.eigvalsh(m)[0] < -self.tol:
                raise ValueError("POVM elements must be positive semidefinite")
            m.setflags(write=False)
            mats.append(m)
        total = sum(mats)
        if not mats_close(total, np.eye(dim), self.tol):
            raise ValueError("POVM elements must sum to the identity")
        object.__setattr__(self, "elements", tuple(mats))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, k):
        return self.elements[k]

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map in Kraus form: rho -> sum_k K_k rho K_k^dag."""

    kraus_operators: tuple
    tol: float = VALIDATION_TOL

    def __post_init__(self):
        if len(self.kraus_operators) < 1:
            raise ValueError("channel needs at least one Kraus operator")
        mats = []
        shape = None
        for k in self.kraus_operators:
            m = np.array(k, dtype=np.complex128)
            if m.ndim != 2:
                raise ValueError("Kraus operators must be matrices")
            if shape is None:
                shape = m.shape
            elif m.shape != shape:
                raise ValueError("Kraus operators must share one shape")
            m.setflags(write=False)
            mats.append(m)
        total = sum(m.conj().T @ m for m in mats)
        if not mats_close(total, np.eye(shape[1]), self.tol):
            raise ValueError("Kraus operators must satisfy sum K^dag K = 1")
        object.__setattr__(self, "kraus_operators", tuple(mats))

    @property
    def input_dim(self) -> int:
        return self.kraus_operators[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus_operators[0].shape[0]

    def apply_to_matrix(self, x) -> np.ndarray:
        """Apply the channel to an arbitrary (not necessarily valid) operator."""
        m = np.asarray(x, dtype=np.complex128)
        return sum(k @ m @ k.conj().T for k in self.kraus_operators)


@dataclass(frozen=True, eq=False)
class AdjointChannel:
    """Heisenberg-picture dual of a CPTP map: X -> sum_k K_k^dag X K_k.

    The dual of a trace-preserving map is unital (it fixes the identity)
    but generally not trace preserving, so this is a separate type from
    :class:`QuantumChannel`.  ``kraus_operators`` are those of the
    underlying Schroedinger-picture channel.
    """

    kraus_operators: tuple

    @property
    def input_dim(self) -> int:
        return self.kraus_operators[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.kraus_operators[0].shape[1]

    def apply_to_matrix(self, x) -> np.ndarray:
        m = np.asarray(x, dtype=np.complex128)
        return sum(k.conj().T @ m @ k for k in self.kraus_operators)

    def is_unital(self, tol: float = IDENTITY_TOL) -> bool:
        d = self.input_dim
        return mats_close(self.apply_to_matrix(np.eye(d)), np.eye(self.output_dim), tol)


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Parameters (m, mu) of the binary estimator element mu*(1 + m . sigma).

    ``mu`` must be positive.  The length of ``m`` is unconstrained here;
    building a valid two-outcome POVM via :meth:`povm_pair` additionally
    requires |m| <= 1 and mu*(1 + |m|) <= 1, which that method checks by
    validating both elements.
    """

    m: np.ndarray
    mu: float

    def __post_init__(self):
        vec = np.array(self.m, dtype=np.float64)
        if vec.shape != (3,):
            raise ValueError("Bloch vector must have exactly three real components")
        if not np.all(np.isfinite(vec)):
            raise ValueError("Bloch vector components must be finite")
        mu = float(self.mu)
        if not (mu > 0.0 and np.isfinite(mu)):
            raise ValueError(f"mu must be a positive real, got {self.mu!r}")
        vec.setflags(write=False)
        object.__setattr__(self, "m", vec)
        object.__setattr__(self, "mu", mu)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.m))

    def povm_pair(self, tol: float = VALIDATION_TOL) -> Povm:
        """The POVM (M_plus, M_minus) with M_plus = mu*(1 + m.sigma).

        Element order is (outcome +1, outcome -1).  Raises ValueError if
        either element fails positivity.
        """
        plus = bloch_operator(self)
        minus = np.eye(2, dtype=np.complex128) - plus
        return Povm((plus, minus), tol=tol)


def bloch_operator(b: BlochVector) -> np.ndarray:
    """The operator mu*(1 + sum_j m_j sigma_j) for a BlochVector b."""
    out = np.eye(2, dtype=np.complex128)
    for j in (1, 2, 3):
        out = out + b.m[j - 1] * _PAULI[j - 1]
    return b.mu * out


def singlet_projector() -> np.ndarray:
    """Projector onto the two-qubit singlet, (1/4)(1x1 - sum_j sigma_j x sigma_j)."""
    out = np.eye(4, dtype=np.complex128)
    for j in (1, 2, 3):
        out = out - tensor(_PAULI[j - 1], _PAULI[j - 1])
    return out / 4.0


def werner_state(w: float) -> DensityOperator:
    """Two-qubit Werner state (1/4)(1x1 - w sum_j sigma_j x sigma_j).

    Mixes the singlet with white noise; positive exactly for
    -1/3 <= w <= 1, with spectrum {(1+3w)/4, (1-w)/4 (x3)}.
    """
    w = float(w)
    if not (-1.0 / 3.0 - 1e-12 <= w <= 1.0 + 1e-12):
        raise ValueError(f"Werner parameter must lie in [-1/3, 1], got {w}")
    mat = np.eye(4, dtype=np.complex128)
    for j in (1, 2, 3):
        mat = mat - w * tensor(_PAULI[j - 1], _PAULI[j - 1])
    return DensityOperator(mat / 4.0)


def signal_state(j: int, s: int) -> DensityOperator:
    """Qubit eigenstate projector (1/2)(1 + s sigma_j), s = +-1."""
    if s not in (1, -1):
        raise ValueError(f"signal sign must be +1 or -1, got {s!r}")
    return DensityOperator((np.eye(2, dtype=np.complex128) + s * pauli(j)) / 2.0)


def apply_channel(channel: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    """Schroedinger-picture action of a channel on a state."""
    return DensityOperator(channel.apply_to_matrix(rho.matrix))


def dual_channel(channel: QuantumChannel) -> AdjointChannel:
    """The Heisenberg-picture dual map, satisfying Tr[X phi(Y)] = Tr[phi*(X) Y]."""
    return AdjointChannel(channel.kraus_operators)


def identity_channel(dim: int = 2) -> QuantumChannel:
    return QuantumChannel((np.eye(dim, dtype=np.complex128),))


def depolarizing_channel(p: float) -> QuantumChannel:
    """Qubit depolarizing channel rho -> (1-p) rho + p 1/2.

    Kraus form: sqrt(1 - 3p/4) 1 together with sqrt(p/4) sigma_j.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing strength must lie in [0, 1], got {p}")
    kraus = [np.sqrt(1.0 - 0.75 * p) * np.eye(2, dtype=np.complex128)]
    kraus.extend(np.sqrt(p / 4.0) * _PAULI[j] for j in range(3))
    return QuantumChannel(tuple(kraus))


def amplitude_damping_channel(gamma: float) -> QuantumChannel:
    """Qubit amplitude damping with decay probability gamma (non-unital for gamma > 0)."""
    g = float(gamma)
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"damping probability must lie in [0, 1], got {gamma}")
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - g)]], dtype=np.complex128)
    k1 = np.array([[0.0, np.sqrt(g)], [0.0, 0.0]], dtype=np.complex128)
    return QuantumChannel((k0, k1))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random Hermitian matrix with complex Gaussian entries."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2.0


def random_positive(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random positive-semidefinite matrix G^dag G, G complex Gaussian."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return g.conj().T @ g


def random_density(rng: np.random.Generator, dim: int) -> DensityOperator:
    """Random full-rank density operator, G^dag G normalised to unit trace."""
    h = random_positive(rng, dim)
    return DensityOperator(h / np.trace(h).real)


def random_povm(rng: np.random.Generator, dim: int, n_outcomes: int = 2) -> Povm:
    """Random POVM: positive operators normalised against their sum.

    With S = sum_k A_k the elements are S^{-1/2} A_k S^{-1/2}, which are
    positive and sum to the identity by construction.
    """
    if n_outcomes < 1:
        raise ValueError("POVM needs at least one outcome")
    ops = [random_positive(rng, dim) for _ in range(n_outcomes)]
    total = sum(ops)
    vals, vecs = np.linalg.eigh(total)
    if vals[0] <= 0:
        raise ValueError("degenerate random POVM draw; sum is singular")
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    elements = []
    for op in ops:
        el = inv_sqrt @ op @ inv_sqrt
        elements.append((el + el.conj().T) / 2.0)
    return Povm(tuple(elements))
