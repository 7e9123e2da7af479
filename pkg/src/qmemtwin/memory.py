"""Digital twin of an atomic-ensemble quantum memory.

A memory is described by a :class:`MemorySpec` (published performance
figures) and configured into a :class:`QuantumMemory` for a given storage
time. Storage and retrieval are answered as channel queries: the memory
returns the operations to apply and the caller's state is never touched
implicitly.

Efficiency model: the internal efficiency decays exponentially with the
storage time and is split evenly between read-in and read-out
(``eta_in = eta_out = sqrt(eta_int)``). The remaining end-to-end loss
``eta_trans = eta_e2e / eta_int`` and the noise photons are put on the
retrieved light by a thermal noise channel with ``kappa = eta_trans`` and
``n_bar_B = mu_1 * eta_int / (1 - eta_trans)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from .channels import (
    NoiseChannelParams,
    ThermalNoiseChannel,
    TwoModeUnitary,
    beamsplitter_unitary,
    thermal_noise_channel,
)
from .fock import (
    DensityState,
    ModeDescriptor,
    add_vacuum_mode,
    apply_kraus,
    apply_unitary,
    partial_trace,
)

WAVELENGTH_TOL_NM = 1.0

POLARIZATION_SETS = {
    "linear": ("H", "V"),
    "circular": ("R", "L"),
}

_FLOAT_FIELDS = ("wavelength", "eta_e2e_0", "eta_int_0", "mu_1", "bandwidth", "lifetime", "retrigger_time")


class MemoryStateError(RuntimeError):
    """Raised for queries that violate the storage/retrieval protocol."""


class IncompatibleModeError(ValueError):
    """Raised when a mode offered for storage fails the compatibility check."""

    def __init__(self, reason: str, detail: str):
        super().__init__(f"incompatible input ({reason}): {detail}")
        self.reason = reason


class UnknownMemoryError(KeyError):
    def __str__(self):
        return str(self.args[0])


@dataclass(frozen=True)
class MemorySpec:
    """Published figures of merit of one memory.

    Units: wavelength in nm, bandwidth in Hz, lifetime and retrigger_time
    in seconds. ``polarization`` is ``"linear"`` or ``"circular"``.
    """

    class_name: str
    atomic_species: str
    wavelength: float
    eta_e2e_0: float
    eta_int_0: float
    mu_1: float
    bandwidth: float
    lifetime: float
    retrigger_time: float
    polarization: str
    scheme: str
    protocol: str
    bandwidth_is_bound: bool = False
    eta_trans_assumed: bool = False

    def __post_init__(self):
        if not 0 < self.eta_e2e_0 <= self.eta_int_0 <= 1:
            raise ValueError(f"{self.class_name}: need 0 < eta_e2e_0 <= eta_int_0 <= 1")
        if self.mu_1 < 0:
            raise ValueError(f"{self.class_name}: mu_1 must be non-negative")
        if self.lifetime <= 0:
            raise ValueError(f"{self.class_name}: lifetime must be positive")
        if self.retrigger_time < 0:
            raise ValueError(f"{self.class_name}: retrigger_time must be non-negative")
        if self.polarization not in POLARIZATION_SETS:
            raise ValueError(f"{self.class_name}: polarization must be linear or circular")
        if self.scheme not in ("lambda", "ladder"):
            raise ValueError(f"{self.class_name}: scheme must be lambda or ladder")

    @property
    def eta_trans(self) -> float:
        return self.eta_e2e_0 / self.eta_int_0

    @property
    def accepted_polarizations(self) -> tuple:
        return POLARIZATION_SETS[self.polarization]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: Mapping) -> "MemorySpec":
        known = {f.name for f in fields(cls)}
        extra = set(record) - known
        if extra:
            raise ValueError(f"unknown registry fields: {sorted(extra)}")
        data = dict(record)
        for key in _FLOAT_FIELDS:
            if key in data:
                data[key] = float(data[key])
        return cls(**data)


def default_registry_path() -> Path:
    return Path(str(resources.files("qmemtwin") / "data" / "memories.yaml"))


def load_registry(path: str | Path | None = None) -> dict:
    """Read a registry file into ``{class_name: MemorySpec}``."""
    path = Path(path) if path is not None else default_registry_path()
    doc = yaml.safe_load(path.read_text())
    if not isinstance(doc, dict) or "memories" not in doc:
        raise ValueError(f"{path}: expected a top-level 'memories' list")
    out = {}
    for record in doc["memories"]:
        spec = MemorySpec.from_dict(record)
        if spec.class_name in out:
            raise ValueError(f"{path}: duplicate class {spec.class_name}")
        out[spec.class_name] = spec
    return out


def dump_registry(specs, path: str | Path | None = None) -> str:
    """Serialize specs in the registry format; write to ``path`` if given."""
    specs = list(specs.values()) if isinstance(specs, Mapping) else list(specs)
    text = yaml.safe_dump({"memories": [s.to_dict() for s in specs]}, sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_memory_file(path: str | Path, base: Mapping | None = None):
    """Read a user memory file in the registry format.

    Records are added to (a copy of) ``base``; a record whose class_name is
    ``"Test"`` holds :class:`TestParameters` fields instead.

    Returns:
        ``(registry, test_parameters_or_None)``.
    """
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict) or "memories" not in doc:
        raise ValueError(f"{path}: expected a top-level 'memories' list")
    registry = dict(load_registry() if base is None else base)
    test = None
    for record in doc["memories"]:
        record = dict(record)
        if record.get("class_name") == "Test":
            record.pop("class_name")
            known = {f.name for f in fields(TestParameters)}
            extra = set(record) - known
            if extra:
                raise ValueError(f"unknown Test fields: {sorted(extra)}")
            test = TestParameters(**record)
        else:
            spec = MemorySpec.from_dict(record)
            registry[spec.class_name] = spec
    return registry, test


def registry_lookup(class_name: str, registry: Mapping | None = None) -> MemorySpec:
    registry = load_registry() if registry is None else registry
    try:
        return registry[class_name]
    except KeyError:
        raise UnknownMemoryError(
            f"unknown memory class {class_name!r}; available: {', '.join(registry)}") from None


@dataclass(frozen=True)
class TestParameters:
    """Operating parameters of a user-defined ``Test`` memory.

    Defaults describe a perfect memory: full read-in and read-out
    (``t_in = t_out = 0``) and noiseless pass-through bins.
    """

    __test__ = False  # keep pytest from collecting this class

    t_in: float = 0.0
    t_out: float = 0.0
    kappa_e: float = 1.0
    kappa_l: float = 1.0
    n_bar_B_e: float = 0.0
    n_bar_B_l: float = 0.0
    wavelength: float = 895.0
    bandwidth: float = 500e6
    polarizations: tuple = ("H", "V")
    retrigger_time: float = 1e-6

    def __post_init__(self):
        for name in ("t_in", "t_out", "kappa_e", "kappa_l"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.n_bar_B_e < 0 or self.n_bar_B_l < 0:
            raise ValueError("noise photon numbers must be non-negative")
        object.__setattr__(self, "polarizations", tuple(self.polarizations))


class Occupancy(str, Enum):
    EMPTY = "empty"
    STORED = "stored"


class OpType(str, Enum):
    STORAGE = "storage"
    RETRIEVAL = "retrieval"


@dataclass(frozen=True)
class ChannelQuery:
    mode_uuid: str
    op_type: OpType

    def __post_init__(self):
        object.__setattr__(self, "op_type", OpType(self.op_type))


@dataclass(frozen=True)
class AddMode:
    mode: ModeDescriptor


@dataclass(frozen=True)
class ApplyUnitary:
    unitary: TwoModeUnitary
    targets: tuple


@dataclass(frozen=True)
class ApplyChannel:
    channel: ThermalNoiseChannel
    target: str


@dataclass(frozen=True)
class TraceOut:
    uuid: str


@dataclass(frozen=True)
class ChannelResponse:
    """Answer to a channel query.

    Attributes:
        kraus_state_indices: Ordered uuids the returned operations act on.
        operation_time: Seconds the operation occupies the memory.
        retrigger_time: Seconds before the memory may be triggered again.
        retrigger: False after storage, True after retrieval.
        new_mode: Mode the caller must add (spinwave or late bin).
        trace_out: Mode the caller must trace out afterwards, if any.
        operations: Steps to apply in order; see :func:`apply_operations`.
    """

    kraus_state_indices: tuple
    operation_time: float
    retrigger_time: float
    retrigger: bool
    new_mode: ModeDescriptor
    trace_out: str | None
    operations: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class Compatibility:
    accepted: bool
    reason: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.accepted


class QuantumMemory:
    """A configured memory with its occupancy state machine.

    Args:
        spec: Registry entry, or None together with ``test`` for a custom
            memory.
        storage_time: Logical storage time in seconds.
        memory_truncation: Photon-number truncation of the spinwave mode.
        test: Custom operating parameters; storage time then has no
            effect on the efficiencies.
        name: Prefix for the uuids of modes this memory creates.
    """

    def __init__(self, spec: MemorySpec | None = None, storage_time: float = 0.0,
                 memory_truncation: int = 3, test: TestParameters | None = None,
                 name: str | None = None):
        if (spec is None) == (test is None):
            raise ValueError("give exactly one of spec or test parameters")
        if storage_time < 0:
            raise ValueError("storage_time must be non-negative")
        if int(memory_truncation) != memory_truncation or memory_truncation < 1:
            raise ValueError("memory_truncation must be an integer >= 1")
        self.spec = spec
        self.test = test
        self.storage_time = float(storage_time)
        self.memory_truncation = int(memory_truncation)
        self.name = name or (spec.class_name if spec else "Test")
        self.occupancy = Occupancy.EMPTY
        self.retrigger_available = True
        self._counter = 0
        self._spinwave: str | None = None
        self._input_mode: ModeDescriptor | None = None
        # validate the noise parameters eagerly
        self.late_noise_params  # noqa: B018

    @property
    def is_test(self) -> bool:
        return self.test is not None

    @property
    def memory_type(self) -> str:
        return "Test" if self.is_test else self.spec.class_name

    # --- derived parameters ------------------------------------------------

    @property
    def eta_int(self) -> float:
        if self.is_test:
            return (1 - self.test.t_in) * (1 - self.test.t_out)
        return self.spec.eta_int_0 * math.exp(-self.storage_time / self.spec.lifetime)

    @property
    def eta_in(self) -> float:
        return 1 - self.test.t_in if self.is_test else math.sqrt(self.eta_int)

    @property
    def eta_out(self) -> float:
        return 1 - self.test.t_out if self.is_test else math.sqrt(self.eta_int)

    @property
    def t_in(self) -> float:
        return 1 - self.eta_in

    @property
    def t_out(self) -> float:
        return 1 - self.eta_out

    @property
    def eta_trans(self) -> float:
        return self.test.kappa_l if self.is_test else self.spec.eta_trans

    @property
    def kappa_l(self) -> float:
        return self.eta_trans

    @property
    def n_bar_B_l(self) -> float:
        if self.is_test:
            return self.test.n_bar_B_l
        if self.spec.mu_1 == 0:
            return 0.0
        if self.eta_trans >= 1:
            raise ValueError(f"{self.name}: noise with eta_trans = 1 has no thermal-channel form")
        return self.spec.mu_1 * self.eta_int / (1 - self.eta_trans)

    @property
    def kappa_e(self) -> float:
        return self.test.kappa_e if self.is_test else 1.0

    @property
    def n_bar_B_e(self) -> float:
        return self.test.n_bar_B_e if self.is_test else 0.0

    @property
    def late_noise_params(self) -> NoiseChannelParams:
        return NoiseChannelParams(self.kappa_l, self.n_bar_B_l)

    @property
    def early_noise_params(self) -> NoiseChannelParams:
        return NoiseChannelParams(self.kappa_e, self.n_bar_B_e)

    @property
    def wavelength(self) -> float:
        return self.test.wavelength if self.is_test else self.spec.wavelength

    @property
    def bandwidth(self) -> float:
        return self.test.bandwidth if self.is_test else self.spec.bandwidth

    @property
    def accepted_polarizations(self) -> tuple:
        return self.test.polarizations if self.is_test else self.spec.accepted_polarizations

    @property
    def retrigger_time(self) -> float:
        return self.test.retrigger_time if self.is_test else self.spec.retrigger_time

    @property
    def spinwave_uuid(self) -> str | None:
        return self._spinwave

    def __repr__(self):
        return (f"QuantumMemory({self.memory_type!r}, storage_time={self.storage_time!r}, "
                f"occupancy={self.occupancy.value})")

    # --- protocol ---------------------------------------------------------

    def input_mode(self, uuid: str, truncation: int = 3, polarization: str | None = None) -> ModeDescriptor:
        """A light mode that passes this memory's compatibility check."""
        pol = polarization or self.accepted_polarizations[0]
        return ModeDescriptor(uuid, "light", self.wavelength, pol, 0.0, truncation)

    def channel_query(self, state: DensityState, query: ChannelQuery) -> ChannelResponse:
        """Return the operations for a storage or retrieval step.

        Storage needs an empty memory and a compatible input mode present
        in ``state``; retrieval needs a stored excitation. The occupancy
        and retrigger flag are updated on success.
        """
        if query.op_type is OpType.STORAGE:
            return self._storage(state, query.mode_uuid)
        return self._retrieval(state)

    def _storage(self, state: DensityState, uuid: str) -> ChannelResponse:
        if self.occupancy is Occupancy.STORED:
            raise MemoryStateError(f"{self.name}: storage requested while already storing")
        mode = state.mode(uuid)
        verdict = compatibility_check(self, mode)
        if not verdict:
            raise IncompatibleModeError(verdict.reason, verdict.detail)
        self._counter += 1
        spin = ModeDescriptor(f"{self.name}.spinwave.{self._counter}", "spinwave", mode.wavelength,
                              mode.polarization, mode.bandwidth, self.memory_truncation)
        ops = [AddMode(spin),
               ApplyUnitary(beamsplitter_unitary(self.t_in, mode.truncation, spin.truncation), (uuid, spin.uuid))]
        if self.kappa_e != 1.0:
            ops.append(ApplyChannel(thermal_noise_channel(self.kappa_e, self.n_bar_B_e, mode.truncation), uuid))
        self.occupancy = Occupancy.STORED
        self.retrigger_available = False
        self._spinwave = spin.uuid
        self._input_mode = mode
        return ChannelResponse((uuid, spin.uuid), self.storage_time, self.retrigger_time, False,
                               spin, None, tuple(ops))

    def _retrieval(self, state: DensityState) -> ChannelResponse:
        if self.occupancy is Occupancy.EMPTY:
            raise MemoryStateError(f"{self.name}: retrieval requested with nothing stored")
        spin = state.mode(self._spinwave)
        src = self._input_mode
        late = ModeDescriptor(f"{self.name}.late.{self._counter}", "light", src.wavelength,
                              src.polarization, src.bandwidth, src.truncation)
        ops = [AddMode(late),
               ApplyUnitary(beamsplitter_unitary(self.t_out, spin.truncation, late.truncation),
                            (spin.uuid, late.uuid)),
               TraceOut(spin.uuid)]
        if self.kappa_l != 1.0:
            ops.append(ApplyChannel(thermal_noise_channel(self.kappa_l, self.n_bar_B_l, late.truncation),
                                    late.uuid))
        self.occupancy = Occupancy.EMPTY
        self.retrigger_available = True
        self._spinwave = None
        return ChannelResponse((spin.uuid, late.uuid), self.storage_time, self.retrigger_time, True,
                               late, spin.uuid, tuple(ops))


def init_memory(memory_type: str, storage_time: float | None = None, memory_truncation: int = 3,
                test: TestParameters | None = None, registry: Mapping | None = None,
                name: str | None = None) -> QuantumMemory:
    """Configure a memory by class name, or ``"Test"`` with custom parameters."""
    if memory_type == "Test":
        return QuantumMemory(None, 1e-6 if storage_time is None else storage_time, memory_truncation,
                             test or TestParameters(), name)
    if test is not None:
        raise ValueError("test parameters only apply to memory_type 'Test'")
    spec = registry_lookup(memory_type, registry)
    return QuantumMemory(spec, 0.0 if storage_time is None else storage_time, memory_truncation, None, name)


def compatibility_check(mem: QuantumMemory, mode: ModeDescriptor) -> Compatibility:
    """Check wavelength, then bandwidth, then polarization; report the first failure."""
    if mode.kind != "light":
        raise ValueError("only light modes can be offered to a memory")
    dl = abs(mode.wavelength - mem.wavelength)
    if dl > WAVELENGTH_TOL_NM:
        return Compatibility(False, "wavelength", f"{mode.wavelength} nm vs {mem.wavelength} nm")
    if mode.bandwidth > mem.bandwidth:
        return Compatibility(False, "bandwidth", f"{mode.bandwidth:g} Hz > {mem.bandwidth:g} Hz")
    if mode.polarization not in mem.accepted_polarizations:
        return Compatibility(False, "polarization",
                             f"{mode.polarization} not in {'/'.join(mem.accepted_polarizations)}")
    return Compatibility(True)


def apply_operations(state: DensityState, operations: Sequence) -> DensityState:
    """Execute the steps of a :class:`ChannelResponse` on ``state``."""
    for op in operations:
        if isinstance(op, AddMode):
            state = add_vacuum_mode(state, op.mode)
        elif isinstance(op, ApplyUnitary):
            state = apply_unitary(state, op.unitary, op.targets)
        elif isinstance(op, ApplyChannel):
            for stage in op.channel.stages:
                state = apply_kraus(state, stage, [op.target])
        elif isinstance(op, TraceOut):
            state = partial_trace(state, op.uuid)
        else:
            raise TypeError(f"unknown operation {op!r}")
    return state


def store(mem: QuantumMemory, state: DensityState, uuid: str, trace_early: bool = True):
    """Store mode ``uuid``; returns ``(state, response)``.

    With ``trace_early`` the transmitted early-bin light is discarded.
    """
    response = mem.channel_query(state, ChannelQuery(uuid, OpType.STORAGE))
    state = apply_operations(state, response.operations)
    if trace_early:
        state = partial_trace(state, uuid)
    return state, response


def retrieve(mem: QuantumMemory, state: DensityState):
    """Read the stored excitation out into a fresh late-bin mode."""
    response = mem.channel_query(state, ChannelQuery(mem.spinwave_uuid or "", OpType.RETRIEVAL))
    return apply_operations(state, response.operations), response


def passthrough_during_storage(mem: QuantumMemory, state: DensityState, photon: DensityState):
    """A photon arriving while the memory is busy passes untouched.

    Returns the stored state and the photon unchanged.
    """
    if mem.occupancy is not Occupancy.STORED:
        raise MemoryStateError(f"{mem.name}: pass-through only applies while storing")
    return state, photon
