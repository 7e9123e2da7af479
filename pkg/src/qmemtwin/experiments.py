"""Experiment harnesses built on the Fock engine and the memory twin.

Every harness returns a list of :class:`ExperimentRecord`, one per sweep
point, holding exact expectation values (no shot sampling) next to the
closed-form predictions where those exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import oracles
from .channels import beamsplitter_unitary, mode_selector, phase_shift, thermal_noise_channel
from .fock import (
    DensityState,
    ModeDescriptor,
    apply_kraus,
    apply_unitary,
    at_least,
    coherent_state,
    fidelity,
    fock_state,
    mean_photon_number,
    mixture,
    outcome_probability,
    pad_mode,
    partial_trace,
    tensor,
    vacuum_state,
)
from .memory import QuantumMemory, TestParameters, init_memory, load_registry, retrieve, store
from .metrics import CountRecord, fringe_visibility, snr, token_correctness

TAIL_WARN = 1e-6
CONVERGENCE_TOL = 1e-3
SECURITY_THRESHOLD = 7 / 8

# preparation angles of the token states and the measurement angle per basis
TOKEN_THETA = {"0": math.pi / 2, "1": 3 * math.pi / 4, "-": 3 * math.pi / 8, "+": 5 * math.pi / 8}
BASIS_PHI = {"z": math.pi / 2, "x": 5 * math.pi / 8}

DETECTOR_KAPPA = 0.25
DETECTOR_NB = 7e-5 / (1 - DETECTOR_KAPPA)


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep point: coordinates plus observables, both flat mappings."""

    coords: dict
    observables: dict
    flags: dict = field(default_factory=dict)

    def row(self) -> dict:
        return {**self.coords, **self.observables, **self.flags}


@dataclass(frozen=True)
class MemoryChoice:
    """Which memory to build: a registry class or ``"Test"`` with parameters."""

    memory_type: str = "Lambda895"
    test: TestParameters | None = None

    def build(self, storage_time: float, truncation: int, registry: Mapping | None = None,
              name: str | None = None) -> QuantumMemory:
        return init_memory(self.memory_type, storage_time, truncation, self.test, registry, name)


def _choice(memory) -> MemoryChoice:
    if isinstance(memory, MemoryChoice):
        return memory
    if isinstance(memory, TestParameters):
        return MemoryChoice("Test", memory)
    return MemoryChoice(str(memory))


# --- MZI ----------------------------------------------------------------------


@dataclass(frozen=True)
class MziConfig:
    """Mach-Zehnder run with a memory in arm A and a phase in arm B.

    Attributes:
        input: ``"single_photon"`` or ``"coherent"``.
        alpha: Coherent amplitude per arm (ignored for single photons).
        memory: Registry class name, ``"Test"``, or a :class:`MemoryChoice`.
        storage_time: Seconds.
        phases: Phase grid in radians.
        truncation: Photon-number truncation of every mode.
        second_beamsplitter: False removes the recombining beamsplitter.
        input_wavelength: Input mode wavelength in nm; None matches the memory.
        input_bandwidth: Input mode bandwidth in Hz.
        input_polarization: Input polarization; None takes the memory's first.
    """

    input: str = "single_photon"
    alpha: float = 0.0
    memory: object = "Lambda895"
    storage_time: float = 0.0
    phases: tuple = tuple(np.linspace(0, 2 * np.pi, 41))
    truncation: int = 3
    second_beamsplitter: bool = True
    input_wavelength: float | None = None
    input_bandwidth: float = 0.0
    input_polarization: str | None = None

    def __post_init__(self):
        if self.input not in ("single_photon", "coherent"):
            raise ValueError(f"unknown MZI input {self.input!r}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if len(self.phases) == 0:
            raise ValueError("phase grid is empty")
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))


def _mzi_memory_stage(cfg: MziConfig, mem: QuantumMemory):
    """Split the input, store and retrieve arm A; returns ``(state, late_uuid, tail)``."""
    k = cfg.truncation
    mode_a = ModeDescriptor("A", "light", cfg.input_wavelength or mem.wavelength,
                            cfg.input_polarization or mem.accepted_polarizations[0], cfg.input_bandwidth, k)
    mode_b = mode_a.renamed("B")
    if cfg.input == "single_photon":
        state = tensor(fock_state(1, mode_a), vacuum_state([mode_b]))
        state = apply_unitary(state, beamsplitter_unitary(0.5, k, k), ("A", "B"))
        tail = 0.0
        state, _ = store(mem, state, "A")
        state, resp = retrieve(mem, state)
        return state, resp.new_mode.uuid, tail
    # a 50:50 split of |sqrt2 alpha, 0> is exactly |alpha, alpha>; the memory arm is processed alone
    arm_a = coherent_state(cfg.alpha, mode_a)
    arm_b = coherent_state(cfg.alpha, mode_b)
    arm_a, _ = store(mem, arm_a, "A")
    arm_a, resp = retrieve(mem, arm_a)
    return tensor(arm_a, arm_b), resp.new_mode.uuid, arm_b.tail_mass


def _mzi_oracle(cfg: MziConfig, mem: QuantumMemory, phi: float) -> tuple:
    p = oracles.MziParams.from_memory(mem, cfg.alpha, phi)
    if cfg.input == "single_photon":
        if cfg.second_beamsplitter:
            return oracles.single_photon_fringe(p), oracles.single_photon_visibility(p)
        return oracles.single_photon_arm_mean(p), 0.0
    if cfg.second_beamsplitter:
        return oracles.coherent_fringe(p), oracles.coherent_visibility(p)
    return oracles.coherent_gamma(p.beta, p.G), 0.0


def run_mzi(cfg: MziConfig, registry: Mapping | None = None) -> list:
    """Fringe of a memory-in-one-arm interferometer over ``cfg.phases``.

    Output mode A is the first port of the recombining beamsplitter (or the
    retrieved light itself when it is removed). The recombination runs on
    modes padded to twice the truncation so its photon-number blocks are
    never clipped.
    """
    mem = _choice(cfg.memory).build(cfg.storage_time, cfg.truncation, registry, "mem")
    base, late, tail = _mzi_memory_stage(cfg, mem)
    k = cfg.truncation
    wide = 2 * k if cfg.second_beamsplitter else k
    if cfg.second_beamsplitter:
        base = pad_mode(pad_mode(base, late, wide), "B", wide)
        recombine = beamsplitter_unitary(0.5, wide, wide)
    rows = []
    for phi in cfg.phases:
        state = apply_unitary(base, phase_shift(phi, wide), ["B"])
        if cfg.second_beamsplitter:
            state = apply_unitary(state, recombine, (late, "B"))
        n_a, n_b = mean_photon_number(state, late), mean_photon_number(state, "B")
        oracle_n_a, oracle_vis = _mzi_oracle(cfg, mem, phi)
        rows.append((phi, n_a, n_b, oracle_n_a, oracle_vis))
    n_as = [r[1] for r in rows]
    vis = fringe_visibility(n_as) if max(n_as) > 0 else 0.0
    flags = {"truncation_warning": tail > TAIL_WARN}
    return [ExperimentRecord({"phi": phi},
                             {"n_A": n_a, "n_B": n_b, "oracle_n_A": o, "abs_err": abs(n_a - o),
                              "visibility": vis, "oracle_visibility": ov, "tail_mass": tail},
                             flags)
            for phi, n_a, n_b, o, ov in rows]


def run_mzi_memory_comparison(memories: Sequence, storage_times: Sequence[float],
                              truncation: int = 3, registry: Mapping | None = None) -> list:
    """Single-photon fringe visibility per memory and storage time.

    Phases 0 and pi sample both fringe extremes.
    """
    out = []
    for memory in memories:
        choice = _choice(memory)
        for ts in storage_times:
            cfg = MziConfig("single_photon", 0.0, choice, float(ts), (0.0, math.pi), truncation)
            recs = run_mzi(cfg, registry)
            vis, oracle_vis = recs[0].observables["visibility"], recs[0].observables["oracle_visibility"]
            out.append(ExperimentRecord({"memory": choice.memory_type, "storage_time": float(ts)},
                                        {"visibility": vis, "oracle_visibility": oracle_vis,
                                         "abs_err": abs(vis - oracle_vis)}))
    return out


# --- quantum tokens -----------------------------------------------------------


@dataclass(frozen=True)
class TokenConfig:
    """Quantum-token run with one memory per polarization.

    Attributes:
        memory: Registry class, ``"Test"``, :class:`MemoryChoice`, or None for
            the detectors-only baseline.
        storage_time: Seconds.
        mu_emission: Single-photon emission probability of the source.
        detector_kappa: Detector transmissivity.
        detector_nb: Detector thermal photon number.
        truncation: Photon-number truncation of every mode.
    """

    memory: object = "Lambda895"
    storage_time: float = 0.0
    mu_emission: float = 1.0
    detector_kappa: float = DETECTOR_KAPPA
    detector_nb: float = DETECTOR_NB
    truncation: int = 3

    def __post_init__(self):
        if not 0 <= self.mu_emission <= 1:
            raise ValueError("mu_emission must lie in [0, 1]")


def _token_modes(pols: tuple, k: int) -> tuple:
    return tuple(ModeDescriptor(f"P{i}", "light", 895.0, pol, 0.0, k) for i, pol in enumerate(pols))


def token_click_probabilities(cfg: TokenConfig, token: str, basis: str,
                              registry: Mapping | None = None) -> tuple:
    """Click probabilities ``(P0, P1)`` for one prepared token and measurement basis."""
    k = cfg.truncation
    mems = None
    if cfg.memory is not None:
        choice = _choice(cfg.memory)
        mems = [choice.build(cfg.storage_time, k, registry, f"mem{i}") for i in range(2)]
        wavelength = mems[0].wavelength
        pols = mems[0].accepted_polarizations
    else:
        wavelength, pols = 895.0, ("H", "V")
    m0, m1 = (m.renamed(m.uuid, wavelength=wavelength) for m in _token_modes(pols, k))
    photon = tensor(fock_state(1, m0), vacuum_state([m1]))
    state = mixture([cfg.mu_emission, 1 - cfg.mu_emission], [photon, vacuum_state([m0, m1])])
    state = apply_unitary(state, mode_selector(TOKEN_THETA[token], k, k), ("P0", "P1"))
    outs = ["P0", "P1"]
    if mems is not None:
        for mem, uuid in zip(mems, outs):
            state, _ = store(mem, state, uuid)
        outs = []
        for mem in mems:
            state, resp = retrieve(mem, state)
            outs.append(resp.new_mode.uuid)
    state = apply_unitary(state, mode_selector(BASIS_PHI[basis], k, k), tuple(outs))
    det = thermal_noise_channel(cfg.detector_kappa, cfg.detector_nb, k)
    for uuid in outs:
        for stage in det.stages:
            state = apply_kraus(state, stage, [uuid])
    click = at_least(1)
    return outcome_probability(state, {outs[0]: click}), outcome_probability(state, {outs[1]: click})


def token_correctness_values(cfg: TokenConfig, registry: Mapping | None = None) -> dict:
    """Per-state and composite correctness for one configuration."""
    out = {}
    for basis, (good0, good1) in (("z", ("0", "1")), ("x", ("+", "-"))):
        c0, _ = token_correctness(*token_click_probabilities(cfg, good0, basis, registry))
        _, c1 = token_correctness(*token_click_probabilities(cfg, good1, basis, registry))
        out[f"c0_{basis}"], out[f"c1_{basis}"] = c0, c1
        out[f"c_{basis}{basis}"] = (c0 + c1) / 2
    out["c0"] = (out["c0_z"] + out["c0_x"]) / 2
    out["c1"] = (out["c1_z"] + out["c1_x"]) / 2
    out["c"] = (out["c_xx"] + out["c_zz"]) / 2
    return out


def run_token(cfg: TokenConfig, mu_emission: Sequence[float] | None = None,
              storage_times: Sequence[float] | None = None, registry: Mapping | None = None) -> list:
    """Correctness over a sweep of emission probability and/or storage time.

    With no sweep given the single point ``cfg`` is evaluated.
    """
    mus = [cfg.mu_emission] if mu_emission is None else list(mu_emission)
    times = [cfg.storage_time] if storage_times is None else list(storage_times)
    label = "none" if cfg.memory is None else _choice(cfg.memory).memory_type
    retrigger = None
    if cfg.memory is not None:
        retrigger = _choice(cfg.memory).build(0.0, cfg.truncation, registry).retrigger_time
    out = []
    for ts in times:
        for mu in mus:
            point = replace(cfg, mu_emission=float(mu), storage_time=float(ts))
            vals = token_correctness_values(point, registry)
            flags = {"above_threshold": vals["c"] > SECURITY_THRESHOLD}
            if retrigger is not None:
                flags["exceeds_retrigger"] = float(ts) > retrigger
            out.append(ExperimentRecord({"memory": label, "mu_emission": float(mu), "storage_time": float(ts)},
                                        vals, flags))
    return out


# --- truncation and fidelity studies -----------------------------------------


def _input_state(kind: str, alpha: float, mode: ModeDescriptor) -> DensityState:
    if kind == "single_photon":
        return fock_state(1, mode)
    if kind == "coherent":
        return coherent_state(alpha, mode)
    raise ValueError(f"unknown input {kind!r}")


def memory_round_trip(mem: QuantumMemory, kind: str, alpha: float, truncation: int):
    """Store and retrieve one input; returns ``(input_state, late_state)`` on a shared label."""
    mode = mem.input_mode("in", truncation)
    rho_in = _input_state(kind, alpha, mode)
    state, _ = store(mem, rho_in, "in")
    state, resp = retrieve(mem, state)
    return rho_in, state.relabel({resp.new_mode.uuid: "in"})


def run_truncation_sweep(memory="Lambda895", input: str = "single_photon", truncations: Sequence[int] = range(1, 9),
                         alpha: float = 1.0, storage_time: float = 0.0, registry: Mapping | None = None) -> list:
    """Late-bin mean photon number against truncation.

    ``converged_at`` is the smallest truncation from which every further
    step changes the result by less than ``CONVERGENCE_TOL``.
    """
    truncations = [int(k) for k in truncations]
    if truncations != sorted(set(truncations)):
        raise ValueError("truncations must be strictly ascending")
    choice = _choice(memory)
    means = []
    for k in truncations:
        mem = choice.build(storage_time, k, registry)
        _, late = memory_round_trip(mem, input, alpha, k)
        means.append(mean_photon_number(late, "in"))
    deltas = [math.nan] + [abs(b - a) for a, b in zip(means, means[1:])]
    converged_at = None
    for i in range(len(truncations)):
        if all(d < CONVERGENCE_TOL for d in deltas[i + 1:]) and i + 1 < len(truncations):
            converged_at = truncations[i]
            break
    return [ExperimentRecord({"memory": choice.memory_type, "input": input, "truncation": k},
                             {"n_late": n, "delta": d},
                             {"converged": converged_at is not None and k >= converged_at,
                              "converged_at": converged_at})
            for k, n, d in zip(truncations, means, deltas)]


@dataclass(frozen=True)
class FidelityConfig:
    """One of the three fidelity studies.

    Attributes:
        study: ``"efficiency"`` (fidelity against internal efficiency, no
            noise), ``"noise"`` (fidelity and SNR against n_bar_B at unit
            internal efficiency) or ``"registry"`` (each registry memory).
        input: ``"single_photon"`` or ``"coherent"``.
        alpha: Coherent amplitude.
        grid: Sweep values of eta_int or n_bar_B; unused for ``"registry"``.
        kappa: Transmission used by the noise study.
        truncation: Photon-number truncation.
        memories: Registry classes for the registry study (all if None).
    """

    study: str = "efficiency"
    input: str = "single_photon"
    alpha: float = 1.0
    grid: tuple = tuple(np.linspace(0, 1, 101))
    kappa: float = 0.5
    truncation: int = 5
    memories: tuple | None = None

    def __post_init__(self):
        if self.study not in ("efficiency", "noise", "registry"):
            raise ValueError(f"unknown fidelity study {self.study!r}")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))


def _test_memory(eta_int: float, kappa: float, n_bar_B: float, k: int) -> QuantumMemory:
    t = 1 - math.sqrt(eta_int)
    return init_memory("Test", memory_truncation=k,
                       test=TestParameters(t_in=t, t_out=t, kappa_l=kappa, n_bar_B_l=n_bar_B))


def _count_record(mem: QuantumMemory, kind: str, alpha: float, k: int) -> CountRecord:
    """Signal and noise-only runs through the same (empty again) memory."""
    rho_in, late = memory_round_trip(mem, kind, alpha, k)
    state, _ = store(mem, vacuum_state(rho_in.modes), "in")
    state, resp = retrieve(mem, state)
    n_noise = mean_photon_number(state, resp.new_mode.uuid)
    n_in = mean_photon_number(rho_in, "in")
    # input referred to the detection setup, so n_in / SNR reproduces the noise figure
    return CountRecord(mean_photon_number(late, "in"), n_noise, mem.kappa_l * n_in)


def _fidelity_obs(rho_in: DensityState, late: DensityState) -> dict:
    """Fidelity of the late state conditioned on staying inside the truncation."""
    tr = late.trace
    cond = DensityState(late.modes, late.matrix / tr, late.tail_mass)
    return {"fidelity": fidelity(rho_in, cond), "trace": tr}


def run_fidelity_sweep(configs: Sequence[FidelityConfig], registry: Mapping | None = None) -> list:
    out = []
    for cfg in configs:
        k = cfg.truncation
        if cfg.study == "registry":
            registry = load_registry() if registry is None else registry
            names = cfg.memories or tuple(registry)
            for name in names:
                mem = init_memory(name, 0.0, k, registry=registry)
                rho_in, late = memory_round_trip(mem, cfg.input, cfg.alpha, k)
                out.append(ExperimentRecord(
                    {"study": cfg.study, "input": cfg.input, "memory": name},
                    {**_fidelity_obs(rho_in, late), "eta_e2e": mem.eta_int * mem.eta_trans,
                     "mu_1": mem.spec.mu_1}))
            continue
        for g in cfg.grid:
            if cfg.study == "efficiency":
                mem = _test_memory(g, 1.0, 0.0, k)
                coords = {"eta_int": g}
            else:
                mem = _test_memory(1.0, cfg.kappa, g, k)
                coords = {"n_bar_B": g}
            rho_in, late = memory_round_trip(mem, cfg.input, cfg.alpha, k)
            obs = _fidelity_obs(rho_in, late)
            if cfg.study == "noise":
                obs["snr"] = snr(_count_record(mem, cfg.input, cfg.alpha, k))
            out.append(ExperimentRecord({"study": cfg.study, "input": cfg.input, **coords}, obs))
    return out
