"""Dense density-matrix engine over truncated Fock modes.

States are stored as a single complex matrix indexed by the mixed-radix
photon-number tuple of the mode list, row-major in list order: for modes
with dimensions ``(d_0, d_1, ..., d_k)`` the basis index of
``|n_0, n_1, ..., n_k>`` is ``((n_0 * d_1 + n_1) * d_2 + ...)``. This is
the layout ``numpy.kron`` produces, so serialized matrices are portable.

All objects are immutable; every operation returns a new state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
PURE_STATE_TOL = 1e-9

KINDS = ("light", "spinwave")
POLARIZATIONS = ("H", "V", "D", "A", "R", "L", "none")


class ModeError(ValueError):
    """Raised for unknown, duplicate or mismatched mode labels."""


class ShapeError(ValueError):
    """Raised when an operator does not fit the target subspace."""


@dataclass(frozen=True)
class ModeDescriptor:
    """A single bosonic mode.

    Attributes:
        uuid: Label, unique within a state.
        kind: ``"light"`` or ``"spinwave"``.
        wavelength: Nanometers.
        polarization: One of H, V, D, A, R, L or ``"none"``.
        bandwidth: Hertz.
        truncation: Maximum photon number; the mode dimension is
            ``truncation + 1``.
    """

    uuid: str
    kind: str = "light"
    wavelength: float = 895.0
    polarization: str = "none"
    bandwidth: float = 0.0
    truncation: int = 3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"unknown polarization {self.polarization!r}")
        if int(self.truncation) != self.truncation or self.truncation < 1:
            raise ValueError("truncation must be an integer >= 1")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if self.bandwidth < 0:
            raise ValueError("bandwidth must be non-negative")

    @property
    def dim(self) -> int:
        return self.truncation + 1

    def renamed(self, uuid: str, **changes) -> "ModeDescriptor":
        return replace(self, uuid=uuid, **changes)


@dataclass(frozen=True)
class KrausSet:
    """Ordered Kraus operators acting jointly on ``target_modes``.

    Constructors in :mod:`qmemtwin.channels` return unbound sets; attach
    them to concrete modes with :meth:`on`.
    """

    operators: tuple
    target_modes: tuple = ()

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops:
            raise ShapeError("a KrausSet needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ShapeError("Kraus operators must be square matrices")
        if any(k.shape != shape for k in ops):
            raise ShapeError("all Kraus operators must share one shape")
        for k in ops:
            k.flags.writeable = False
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "target_modes", tuple(self.target_modes))

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def on(self, *uuids: str) -> "KrausSet":
        return KrausSet(self.operators, uuids)

    def completeness(self) -> np.ndarray:
        """Return ``sum_i K_i^dagger K_i``."""
        return sum(k.conj().T @ k for k in self.operators)

    def is_trace_nonincreasing(self, tol: float = TRACE_TOL) -> bool:
        return float(np.linalg.eigvalsh(self.completeness()).max()) <= 1 + tol


def _as_matrix(op) -> np.ndarray:
    # unitaries from the channels module carry extra metadata but expose the array
    return np.asarray(getattr(op, "matrix", op), dtype=complex)


class DensityState:
    """Density matrix over an ordered list of labeled Fock modes.

    Args:
        modes: Mode descriptors, in tensor-product order.
        matrix: Square complex matrix of dimension ``prod(mode.dim)``.
        tail_mass: Probability discarded by truncation when the state was
            built (diagnostic only).
    """

    __slots__ = ("_modes", "_matrix", "tail_mass")

    def __init__(self, modes: Sequence[ModeDescriptor], matrix, tail_mass: float = 0.0):
        modes = tuple(modes)
        uuids = [m.uuid for m in modes]
        if len(set(uuids)) != len(uuids):
            raise ModeError(f"duplicate mode uuid in {uuids}")
        matrix = np.array(matrix, dtype=complex)
        dim = math.prod(m.dim for m in modes)
        if matrix.shape != (dim, dim):
            raise ShapeError(f"matrix shape {matrix.shape} does not match dimension {dim}")
        matrix.flags.writeable = False
        self._modes = modes
        self._matrix = matrix
        self.tail_mass = float(tail_mass)

    def __repr__(self):
        labels = ", ".join(f"{m.uuid}:{m.truncation}" for m in self._modes)
        return f"DensityState([{labels}], trace={self.trace:.6g})"

    @property
    def modes(self) -> tuple:
        return self._modes

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def uuids(self) -> tuple:
        return tuple(m.uuid for m in self._modes)

    @property
    def dims(self) -> tuple:
        return tuple(m.dim for m in self._modes)

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self._matrix).real)

    def mode(self, uuid: str) -> ModeDescriptor:
        return self._modes[self.index(uuid)]

    def index(self, uuid: str) -> int:
        try:
            return self.uuids.index(uuid)
        except ValueError:
            raise ModeError(f"unknown mode uuid {uuid!r}; state has {list(self.uuids)}") from None

    def relabel(self, mapping: Mapping[str, str]) -> "DensityState":
        """Rename modes; other descriptor fields are kept."""
        modes = [m.renamed(mapping.get(m.uuid, m.uuid)) for m in self._modes]
        return DensityState(modes, self._matrix, self.tail_mass)

    def is_physical(self, herm_tol: float = HERMITICITY_TOL, psd_tol: float = PSD_TOL) -> bool:
        rho = self._matrix
        if np.abs(rho - rho.conj().T).max(initial=0.0) >= herm_tol:
            return False
        if self.trace > 1 + TRACE_TOL:
            return False
        return float(np.linalg.eigvalsh(rho).min()) >= -psd_tol

    def populations(self) -> np.ndarray:
        """Diagonal reshaped to ``dims`` (joint photon-number distribution)."""
        return self._matrix.diagonal().real.reshape(self.dims)

    def to_json(self) -> str:
        """Dump modes and the row-major matrix as ``[re, im]`` pairs."""
        payload = {
            "modes": [m.__dict__ for m in self._modes],
            "tail_mass": self.tail_mass,
            "matrix": [[[z.real, z.imag] for z in row] for row in self._matrix.tolist()],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "DensityState":
        payload = json.loads(text)
        modes = [ModeDescriptor(**m) for m in payload["modes"]]
        data = np.array(payload["matrix"], dtype=float)
        return cls(modes, data[..., 0] + 1j * data[..., 1], payload.get("tail_mass", 0.0))


# --- construction -----------------------------------------------------------


def vacuum_state(modes: Sequence[ModeDescriptor]) -> DensityState:
    modes = tuple(modes)
    if not modes:
        raise ModeError("a state needs at least one mode")
    dim = math.prod(m.dim for m in modes)
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return DensityState(modes, rho)


def fock_state(n: int, mode: ModeDescriptor) -> DensityState:
    if n < 0 or n > mode.truncation:
        raise ValueError(f"photon number {n} outside truncation {mode.truncation}")
    rho = np.zeros((mode.dim, mode.dim), dtype=complex)
    rho[n, n] = 1.0
    return DensityState([mode], rho)


def coherent_amplitudes(alpha: complex, truncation: int) -> np.ndarray:
    """Untruncated coherent-state amplitudes ``<n|alpha>`` for n <= truncation."""
    amps = np.empty(truncation + 1, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, truncation + 1):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def coherent_state(alpha: complex, mode: ModeDescriptor) -> DensityState:
    """Truncated coherent state, renormalized to unit trace.

    The discarded probability ``1 - sum_{n<=N} |<n|alpha>|^2`` is kept in
    ``tail_mass``.
    """
    amps = coherent_amplitudes(alpha, mode.truncation)
    kept = float(np.vdot(amps, amps).real)
    amps = amps / math.sqrt(kept)
    return DensityState([mode], np.outer(amps, amps.conj()), tail_mass=1.0 - kept)


def pure_state(amplitudes, modes: Sequence[ModeDescriptor]) -> DensityState:
    """Density matrix of a (normalized) state vector in the mode layout."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityState(modes, np.outer(psi, psi.conj()))


def mixture(weights: Iterable[float], states: Iterable[DensityState]) -> DensityState:
    """Convex combination of states on identical mode lists."""
    weights, states = list(weights), list(states)
    first = states[0]
    for s in states[1:]:
        if s.uuids != first.uuids or s.dims != first.dims:
            raise ModeError("mixture components must share one mode list")
    rho = sum(w * s.matrix for w, s in zip(weights, states))
    return DensityState(first.modes, rho)


# --- structure --------------------------------------------------------------


def tensor(a: DensityState, b: DensityState) -> DensityState:
    clash = set(a.uuids) & set(b.uuids)
    if clash:
        raise ModeError(f"uuid collision in tensor product: {sorted(clash)}")
    return DensityState(a.modes + b.modes, np.kron(a.matrix, b.matrix),
                        tail_mass=1 - (1 - a.tail_mass) * (1 - b.tail_mass))


def add_vacuum_mode(state: DensityState, mode: ModeDescriptor) -> DensityState:
    return tensor(state, vacuum_state([mode]))


def partial_trace(state: DensityState, mode_uuid: str) -> DensityState:
    """Trace out one mode. Tracing the last mode gives a 1x1 state."""
    i = state.index(mode_uuid)
    dims = state.dims
    n = len(dims)
    rho = state.matrix.reshape(dims + dims)
    reduced = np.trace(rho, axis1=i, axis2=n + i)
    rest = dims[:i] + dims[i + 1:]
    d = math.prod(rest)
    modes = state.modes[:i] + state.modes[i + 1:]
    out = reduced.reshape(d, d)
    # restore exact Hermiticity lost to summation order
    return DensityState(modes, 0.5 * (out + out.conj().T), state.tail_mass)


def reduced_state(state: DensityState, keep: Sequence[str]) -> DensityState:
    """Trace out every mode not in ``keep``."""
    for uuid in keep:
        state.index(uuid)
    for uuid in [u for u in state.uuids if u not in keep]:
        state = partial_trace(state, uuid)
    return state


def _target_layout(state: DensityState, targets: Sequence[str]):
    idx = [state.index(u) for u in targets]
    if len(set(idx)) != len(idx):
        raise ModeError(f"repeated target modes {list(targets)}")
    rest = [i for i in range(len(state.dims)) if i not in idx]
    return idx, rest


def _apply_ops(state: DensityState, ops: Sequence[np.ndarray], targets: Sequence[str]) -> np.ndarray:
    idx, rest = _target_layout(state, targets)
    dims = state.dims
    n = len(dims)
    dt = math.prod(dims[i] for i in idx)
    dr = math.prod(dims[i] for i in rest)
    for k in ops:
        if k.shape != (dt, dt):
            raise ShapeError(
                f"operator shape {k.shape} does not match target dimension {dt} for {list(targets)}")
    perm = idx + rest
    x = state.matrix.reshape(dims + dims)
    x = x.transpose(perm + [n + p for p in perm]).reshape(dt, dr, dt, dr)
    out = np.zeros_like(x)
    for k in ops:
        y = np.tensordot(k, x, axes=(1, 0))
        out += np.tensordot(y, k.conj(), axes=(2, 1)).transpose(0, 1, 3, 2)
    pdims = [dims[p] for p in perm]
    out = out.reshape(pdims + pdims)
    inv = list(np.argsort(perm))
    out = out.transpose(inv + [n + p for p in inv]).reshape(state.dim, state.dim)
    return 0.5 * (out + out.conj().T)


def apply_kraus(state: DensityState, ks: KrausSet, targets: Sequence[str] | None = None) -> DensityState:
    """Apply ``rho -> sum_i K_i rho K_i^dagger`` on the target modes.

    ``targets`` overrides ``ks.target_modes`` when given.
    """
    targets = tuple(targets) if targets is not None else ks.target_modes
    if not targets:
        raise ModeError("KrausSet is not bound to any modes")
    rho = _apply_ops(state, ks.operators, targets)
    return DensityState(state.modes, rho, state.tail_mass)


def apply_unitary(state: DensityState, unitary, targets: Sequence[str]) -> DensityState:
    """Apply ``U rho U^dagger`` with ``U`` acting on ``targets`` (in order)."""
    rho = _apply_ops(state, [_as_matrix(unitary)], tuple(targets))
    return DensityState(state.modes, rho, state.tail_mass)


# --- observables ------------------------------------------------------------


def photon_distribution(state: DensityState, mode_uuid: str) -> np.ndarray:
    i = state.index(mode_uuid)
    pops = state.populations()
    axes = tuple(a for a in range(pops.ndim) if a != i)
    return pops.sum(axis=axes) if axes else pops


def mean_photon_number(state: DensityState, mode_uuid: str) -> float:
    p = photon_distribution(state, mode_uuid)
    return float(np.dot(np.arange(p.size), p))


Predicate = Callable[[int], bool]


def _mask(pred, dim: int) -> np.ndarray:
    ns = range(dim)
    if callable(pred):
        return np.array([bool(pred(n)) for n in ns])
    allowed = set(pred)
    return np.array([n in allowed for n in ns])


def outcome_probability(state: DensityState, predicates: Mapping[str, object]) -> float:
    """Probability that every listed mode's photon count satisfies its predicate.

    Args:
        state: The state to measure.
        predicates: ``uuid -> predicate``; a predicate is either a callable
            ``int -> bool`` or a collection of allowed photon numbers.
            Unlisted modes are unconstrained.
    """
    pops = state.populations()
    mask = np.ones(pops.shape, dtype=bool)
    for uuid, pred in predicates.items():
        i = state.index(uuid)
        m = _mask(pred, state.dims[i])
        shape = [1] * pops.ndim
        shape[i] = m.size
        mask &= m.reshape(shape)
    # populations of a PSD state can carry round-off of either sign
    return min(max(float(pops[mask].sum()), 0.0), 1.0)


def at_least(k: int) -> Predicate:
    return lambda n: n >= k


def fidelity(rho: DensityState, sigma: DensityState) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    If either argument is pure to within ``PURE_STATE_TOL`` the overlap
    ``<psi|other|psi>`` is returned instead of taking matrix square roots.
    """
    if rho.uuids != sigma.uuids or rho.dims != sigma.dims:
        raise ModeError("fidelity needs states on identical mode lists")
    for s in (rho, sigma):
        if abs(s.trace - 1) > TRACE_TOL:
            raise ValueError(f"fidelity needs normalized states (trace {s.trace})")
    w_r, v_r = np.linalg.eigh(rho.matrix)
    w_s, v_s = np.linalg.eigh(sigma.matrix)
    if w_r[-1] >= 1 - PURE_STATE_TOL:
        psi = v_r[:, -1]
        return float(np.vdot(psi, sigma.matrix @ psi).real)
    if w_s[-1] >= 1 - PURE_STATE_TOL:
        psi = v_s[:, -1]
        return float(np.vdot(psi, rho.matrix @ psi).real)
    sqrt_rho = (v_r * np.sqrt(np.clip(w_r, 0, None))) @ v_r.conj().T
    inner = sqrt_rho @ sigma.matrix @ sqrt_rho
    ev = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0, None)
    return float(np.sqrt(ev).sum() ** 2)


def pad_mode(state: DensityState, mode_uuid: str, truncation: int) -> DensityState:
    """Embed one mode into a larger truncation; new levels are unpopulated.

    The embedding is exact, which lets a later unitary act on photon-number
    blocks that the original truncation would clip.
    """
    i = state.index(mode_uuid)
    old = state.modes[i]
    if truncation < old.truncation:
        raise ValueError("pad_mode only enlarges a truncation")
    dims = state.dims
    n = len(dims)
    new_dims = dims[:i] + (truncation + 1,) + dims[i + 1:]
    x = np.zeros(new_dims + new_dims, dtype=complex)
    sl = tuple(slice(0, d) for d in dims)
    x[sl + sl] = state.matrix.reshape(dims + dims)
    d = math.prod(new_dims)
    modes = state.modes[:i] + (old.renamed(old.uuid, truncation=truncation),) + state.modes[i + 1:]
    return DensityState(modes, x.reshape(d, d), state.tail_mass)
