"""Expectation-value time series: closed-form tone sums and a brute-force oracle.

Two independent routes to every observable:

* `expectation_series` evolves each momentum mode exactly by eigenphase
  rotation and contracts <psi|O|psi> per sample (for position tags it
  integrates the velocity contraction term-by-term, exactly). It assumes
  nothing about which cross terms survive.

* The `*_series_analytic` / `*_velocity_series` / `*_position_series`
  functions build the series from the known tone structure: Larmor tones from
  same-branch opposite-spin cross terms, ZB tones from opposite-branch cross
  terms, with matrix elements contracted from the numerically labeled
  eigenspinors (closed-form element expressions are kept as cross-checks in
  `transverse_matrix_elements`, since their radical branches are ambiguous
  for negative energies).

The two routes must agree pointwise; the test suite holds them to 1e-9.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .algebra import (
    BRANCH_SPIN_LABELS,
    DiracOperatorSet,
    EigenSystem,
    ParticleConfig,
    build_hamiltonian,
    build_operators,
    eigensystem_numeric,
    label_index,
    matrix_element,
)
from .spectrum import FrequencySet, frequency_set
from .wavepacket import ModeState, Wavepacket

__all__ = [
    "OBSERVABLE_TAGS",
    "TimeSeries",
    "AmplitudeSet",
    "default_time_grid",
    "evolve_mode",
    "initial_modes",
    "expectation_series",
    "spin_x_constant",
    "transverse_spin_series_analytic",
    "longitudinal_velocity_series",
    "longitudinal_position_series",
    "transverse_position_series",
    "transverse_matrix_elements",
    "tone_amplitudes",
]

OBSERVABLE_TAGS = (
    "S_x", "S_y", "S_z",
    "alpha_x", "alpha_y", "alpha_z",
    "r_x", "r_y", "r_z",
)

_IMAG_TOL = 1e-12
CSV_HEADER = "t,value,observable,p0,delta"


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real observable values."""

    times: np.ndarray
    values: np.ndarray
    observable_tag: str

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.size < 2 or values.shape != times.shape:
            raise ValueError("need matching 1-d arrays with at least two samples")
        steps = np.diff(times)
        dt = steps[0]
        if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * abs(dt)):
            raise ValueError("time grid must be uniform and increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("samples must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def to_csv(self, target, p0: float, delta: float) -> None:
        """Write the `t,value,observable,p0,delta` contract rows (12 sig. digits)."""
        if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
            with open(target, "w", encoding="utf-8", newline="") as fh:
                self.to_csv(fh, p0, delta)
            return
        fh: io.TextIOBase = target
        fh.write(CSV_HEADER + "\n")
        for t, x in zip(self.times, self.values):
            fh.write(f"{t:.12g},{x:.12g},{self.observable_tag},{p0:.12g},{delta:.12g}\n")


@dataclass(frozen=True)
class AmplitudeSet:
    """Transverse/longitudinal ZB amplitudes at fixed momentum.

    N1/N2 are the longitudinal branch-interference amplitudes
    <+,s|alpha_x|-,s> (magnitude (m*c^2 + s*delta)/E+^s, nonzero even at
    p = 0). `larmor` holds the same-branch opposite-spin transverse elements
    keyed (axis, l); `zb` the opposite-branch elements keyed (axis, ket spin).
    `larmor_closed_magnitude` records |c*p*(hbar*omega_L -+ 2*delta)| / zeta
    (l = -1) and .../ eta (l = +1) wherever those radicands are positive;
    entries are None where the closed form degenerates to 0/0.
    """

    p: float
    delta: float
    N1: float
    N2: float
    zeta: float
    eta: float
    larmor: dict[tuple[str, int], complex]
    zb: dict[tuple[str, int], complex]
    larmor_closed_magnitude: dict[int, float | None]

    def dominance_report(self) -> dict[str, dict[str, float | str]]:
        """Compare negative- vs positive-branch Larmor-tone magnitudes per axis."""
        report: dict[str, dict[str, float | str]] = {}
        for axis in ("y", "z"):
            neg = abs(self.larmor[(axis, -1)])
            pos = abs(self.larmor[(axis, +1)])
            if pos == neg == 0.0:
                verdict = "vanishing"
            elif abs(neg - pos) <= 1e-2 * max(neg, pos):
                verdict = "comparable"
            else:
                verdict = "negative_branch" if neg > pos else "positive_branch"
            report[axis] = {"negative_branch": neg, "positive_branch": pos,
                            "dominant": verdict}
        return report


def default_time_grid(
    freqs: FrequencySet, periods: float = 20.0, samples: int = 4096
) -> np.ndarray:
    """Uniform grid spanning `periods` of the slowest tone (endpoint excluded)."""
    tones = [w for w in freqs.tones().values() if w > 1e-12]
    slowest = min(tones) if tones else freqs.omega_forbidden
    t_max = periods * 2.0 * np.pi / slowest
    return np.linspace(0.0, t_max, samples, endpoint=False)


def _mode_eigensystems(wp: Wavepacket) -> tuple[DiracOperatorSet, list[EigenSystem]]:
    ops = build_operators(wp.cfg.hbar)
    eigs = [
        eigensystem_numeric(build_hamiltonian(p, wp.cfg, ops), ops, p=p, c=wp.cfg.c)
        for p in wp.grid
    ]
    return ops, eigs


def initial_modes(wp: Wavepacket) -> list[ModeState]:
    """Per-mode t=0 spinors psi_k = sum_{l,s} c_{l,s,k} |l,s>."""
    _, eigs = _mode_eigensystems(wp)
    return [
        ModeState(p=eig.p, spinor=eig.spinors @ wp.coeffs[:, k], t=0.0)
        for k, eig in enumerate(eigs)
    ]


def evolve_mode(state: ModeState, dt: float, eig: EigenSystem, hbar: float = 1.0) -> ModeState:
    """Exact eigenphase evolution psi(t+dt) = sum_i e^{-i E_i dt/hbar} |v_i><v_i|psi(t)>."""
    if abs(state.p - eig.p) > 1e-12 * max(1.0, abs(state.p), abs(eig.p)):
        raise ValueError(f"eigensystem momentum {eig.p} does not match state momentum {state.p}")
    amps = eig.spinors.conj().T @ state.spinor
    amps = amps * np.exp(-1j * eig.energies * dt / hbar)
    return ModeState(p=state.p, spinor=eig.spinors @ amps, t=state.t + dt)


def _check_real(values: np.ndarray, what: str) -> np.ndarray:
    resid = np.max(np.abs(values.imag))
    if resid > _IMAG_TOL * max(1.0, float(np.max(np.abs(values.real)))):
        raise ValueError(f"imaginary residue {resid} in {what}; labeling/phase bug")
    return values.real


def _oracle_contraction(wp: Wavepacket, op: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    """sum_k w_k <psi_k(t)| op |psi_k(t)> evaluated by direct contraction."""
    _, eigs = _mode_eigensystems(wp)
    hbar = wp.cfg.hbar
    vals = np.zeros(t_grid.size, dtype=complex)
    for k, eig in enumerate(eigs):
        phases = np.exp(-1j * np.outer(eig.energies, t_grid) / hbar)
        psi = eig.spinors @ (phases * wp.coeffs[:, k][:, None])
        vals += wp.weights[k] * np.einsum("it,ij,jt->t", psi.conj(), op, psi)
    return _check_real(vals, "oracle contraction")


def _oracle_position(wp: Wavepacket, op: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    """Exact time integral of c*<alpha_j>, term by term over eigenpairs.

    Each cross term A_ij e^{i w_ij t} integrates to A_ij (e^{i w_ij t}-1)/(i w_ij);
    diagonal (w_ij = 0) terms integrate to A_ij * t. Plane-wave absolute position
    is ill-defined, so the series is relative to its t=0 value.
    """
    _, eigs = _mode_eigensystems(wp)
    hbar = wp.cfg.hbar
    vals = np.zeros(t_grid.size, dtype=complex)
    for k, eig in enumerate(eigs):
        c = wp.coeffs[:, k]
        elems = eig.spinors.conj().T @ op @ eig.spinors
        amps = np.outer(c.conj(), c) * elems
        omegas = (eig.energies[:, None] - eig.energies[None, :]) / hbar
        for i in range(4):
            for j in range(4):
                a = amps[i, j]
                if a == 0.0:
                    continue
                w = omegas[i, j]
                if w == 0.0:
                    vals += wp.weights[k] * a * t_grid
                else:
                    vals += wp.weights[k] * a * (np.exp(1j * w * t_grid) - 1.0) / (1j * w)
    return _check_real(wp.cfg.c * vals, "oracle position integral")


def expectation_series(wp: Wavepacket, observable_tag: str, t_grid: np.ndarray) -> TimeSeries:
    """Brute-force oracle series for any observable tag."""
    if observable_tag not in OBSERVABLE_TAGS:
        raise ValueError(f"unknown observable {observable_tag!r}; expected one of {OBSERVABLE_TAGS}")
    t_grid = np.asarray(t_grid, dtype=float)
    ops = build_operators(wp.cfg.hbar)
    kind, axis = observable_tag.split("_")
    if kind == "S":
        vals = _oracle_contraction(wp, ops.spin(axis), t_grid)
    elif kind == "alpha":
        vals = _oracle_contraction(wp, ops.alpha(axis), t_grid)
    else:
        vals = _oracle_position(wp, ops.alpha(axis), t_grid)
    return TimeSeries(times=t_grid, values=vals, observable_tag=observable_tag)


def spin_x_constant(wp: Wavepacket) -> float:
    """Helicity expectation sum_k w_k sum_{l,s} |c|^2 <l,s|S_x|l,s>; a constant of motion."""
    ops, eigs = _mode_eigensystems(wp)
    total = 0.0
    for k, eig in enumerate(eigs):
        diag = np.real(np.einsum("ik,ij,jk->k", eig.spinors.conj(), ops.spin_x, eig.spinors))
        total += wp.weights[k] * float(np.sum(np.abs(wp.coeffs[:, k]) ** 2 * diag))
    return total


def _tone_terms(
    wp: Wavepacket,
    eigs: list[EigenSystem],
    op_of_axis,
    parts: str,
):
    """Yield (weight, amplitude, omega) for every surviving cross term.

    Larmor terms pair (l,up) with (l,down) at frequency l*omega_L; ZB terms
    pair (+,s') with (-,s), s' != s, at omega_zb2.
    """
    if parts not in ("both", "larmor", "zb"):
        raise ValueError(f"parts must be 'both', 'larmor' or 'zb', got {parts!r}")
    for k, eig in enumerate(eigs):
        fs = frequency_set(wp.grid[k], wp.cfg)
        c = wp.coeffs[:, k]
        w = wp.weights[k]
        op = op_of_axis(k)
        if parts in ("both", "larmor"):
            for l in (+1, -1):
                m = matrix_element(op, eig.spinor(l, +1), eig.spinor(l, -1))
                amp = np.conj(c[label_index(l, +1)]) * c[label_index(l, -1)] * m
                yield w, amp, l * fs.omega_L
        if parts in ("both", "zb"):
            for s_bra, s_ket in ((+1, -1), (-1, +1)):
                m = matrix_element(op, eig.spinor(+1, s_bra), eig.spinor(-1, s_ket))
                amp = np.conj(c[label_index(+1, s_bra)]) * c[label_index(-1, s_ket)] * m
                yield w, amp, fs.omega_zb2


def transverse_spin_series_analytic(
    wp: Wavepacket, axis: str, t_grid: np.ndarray, parts: str = "both"
) -> TimeSeries:
    """<S_y> or <S_z> as the two-tone sum of Larmor and spin-ZB cross terms."""
    if axis not in ("y", "z"):
        raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")
    t_grid = np.asarray(t_grid, dtype=float)
    ops, eigs = _mode_eigensystems(wp)
    vals = np.zeros(t_grid.size)
    for w, amp, omega in _tone_terms(wp, eigs, lambda k: ops.spin(axis), parts):
        vals += w * 2.0 * np.real(amp * np.exp(1j * omega * t_grid))
    return TimeSeries(times=t_grid, values=vals, observable_tag=f"S_{axis}")


def longitudinal_velocity_series(wp: Wavepacket, t_grid: np.ndarray) -> TimeSeries:
    """<alpha_x>: group-velocity constant plus the omega_zb1/omega_zb3 tones.

    The branch-interference amplitudes are the contracted elements
    <+,s|alpha_x|-,s>; they survive in the rest frame (magnitude 1 at p = 0),
    where the tones reduce to textbook free ZB with shifted frequencies.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    ops, eigs = _mode_eigensystems(wp)
    vals = np.zeros(t_grid.size)
    for k, eig in enumerate(eigs):
        fs = frequency_set(wp.grid[k], wp.cfg)
        c = wp.coeffs[:, k]
        w = wp.weights[k]
        for l, s in BRANCH_SPIN_LABELS:
            group = wp.cfg.c * wp.grid[k] / eig.energy(l, s)
            vals += w * abs(c[label_index(l, s)]) ** 2 * group
        for s, omega in ((+1, fs.omega_zb1), (-1, fs.omega_zb3)):
            m = matrix_element(ops.alpha_x, eig.spinor(+1, s), eig.spinor(-1, s))
            amp = np.conj(c[label_index(+1, s)]) * c[label_index(-1, s)] * m
            vals += w * 2.0 * np.real(amp * np.exp(1j * omega * t_grid))
    return TimeSeries(times=t_grid, values=vals, observable_tag="alpha_x")


def longitudinal_position_series(
    wp: Wavepacket, t_grid: np.ndarray, r0: float = 0.0
) -> TimeSeries:
    """<r_x> = r0 + classical drift + ZB tones divided by their i*omega.

    Defined relative to the initial position: each integrated tone carries
    (e^{i w t} - 1), so the series starts at r0 and its derivative is
    c*<alpha_x> exactly.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    ops, eigs = _mode_eigensystems(wp)
    vals = np.full(t_grid.size, float(r0))
    c_light = wp.cfg.c
    for k, eig in enumerate(eigs):
        fs = frequency_set(wp.grid[k], wp.cfg)
        c = wp.coeffs[:, k]
        w = wp.weights[k]
        drift = 0.0
        for l, s in BRANCH_SPIN_LABELS:
            drift += abs(c[label_index(l, s)]) ** 2 * c_light * wp.grid[k] / eig.energy(l, s)
        vals += w * c_light * drift * t_grid
        for s, omega in ((+1, fs.omega_zb1), (-1, fs.omega_zb3)):
            m = matrix_element(ops.alpha_x, eig.spinor(+1, s), eig.spinor(-1, s))
            amp = np.conj(c[label_index(+1, s)]) * c[label_index(-1, s)] * m
            vals += w * c_light * 2.0 * np.real(
                amp * (np.exp(1j * omega * t_grid) - 1.0) / (1j * omega)
            )
    return TimeSeries(times=t_grid, values=vals, observable_tag="r_x")


def transverse_position_series(
    wp: Wavepacket, axis: str, t_grid: np.ndarray, r0: float = 0.0, parts: str = "both"
) -> TimeSeries:
    """<r_y> or <r_z>: Larmor tone over l*i*omega_L plus ZB tone over i*omega_zb2.

    The Larmor tone is the orbital effect of spin splitting; its velocity
    matrix elements scale with c*p*(hbar*omega_L -+ 2*delta), so the whole
    term vanishes in the rest frame and when delta = 0 (where omega_L = 0 and
    the integrated term degenerates to a zero-amplitude linear drift).
    """
    if axis not in ("y", "z"):
        raise ValueError(f"axis must be 'y' or 'z', got {axis!r}")
    t_grid = np.asarray(t_grid, dtype=float)
    ops, eigs = _mode_eigensystems(wp)
    vals = np.full(t_grid.size, float(r0))
    c_light = wp.cfg.c
    for w, amp, omega in _tone_terms(wp, eigs, lambda k: ops.alpha(axis), parts):
        if omega == 0.0:
            vals += w * c_light * 2.0 * np.real(amp) * t_grid
        else:
            vals += w * c_light * 2.0 * np.real(
                amp * (np.exp(1j * omega * t_grid) - 1.0) / (1j * omega)
            )
    return TimeSeries(times=t_grid, values=vals, observable_tag=f"r_{axis}")


def tone_amplitudes(wp: Wavepacket, observable_tag: str) -> dict[str, tuple[float, complex]]:
    """Coherent complex amplitude of each closed-form tone family of an observable.

    Returns {tone label: (omega, A)} such that the series contribution of the
    family is 2*Re[A*exp(i*omega*t)] (exact for single-mode packets; for
    multimode packets A aggregates the per-mode amplitudes and omega is the
    packet-center tone). A structural zero amplitude means the tone is nulled
    for this packet, e.g. the Larmor tone of r_y at p = 0 or delta = 0.
    Zero-frequency families (omega_L at delta = 0) report the coefficient of
    their constant/linear contribution instead of a spectral line. Families
    with negative frequency (omega_L under delta < 0) are folded onto the
    positive line they produce in a real series.
    """
    if observable_tag not in OBSERVABLE_TAGS:
        raise ValueError(f"unknown observable {observable_tag!r}")
    kind, axis = observable_tag.split("_")
    ops, eigs = _mode_eigensystems(wp)
    center = frequency_set(wp.mean_momentum(), wp.cfg)
    out: dict[str, tuple[float, complex]] = {}

    def add(label: str, omega: float, contribution: complex) -> None:
        prev = out.get(label, (omega, 0.0 + 0.0j))
        out[label] = (omega, prev[1] + contribution)

    def folded() -> dict[str, tuple[float, complex]]:
        # 2*Re[A e^{i w t}] == 2*Re[conj(A) e^{-i w t}]
        return {label: (omega, amp) if omega >= 0.0 else (-omega, np.conj(amp))
                for label, (omega, amp) in out.items()}

    if kind == "alpha" and axis == "x" or kind == "r" and axis == "x":
        for k, eig in enumerate(eigs):
            fs = frequency_set(wp.grid[k], wp.cfg)
            c = wp.coeffs[:, k]
            w = wp.weights[k]
            for s, label, omega_k, omega_c in (
                (+1, "omega_zb1", fs.omega_zb1, center.omega_zb1),
                (-1, "omega_zb3", fs.omega_zb3, center.omega_zb3),
            ):
                m = matrix_element(ops.alpha_x, eig.spinor(+1, s), eig.spinor(-1, s))
                amp = np.conj(c[label_index(+1, s)]) * c[label_index(-1, s)] * m
                if kind == "r":
                    amp = wp.cfg.c * amp / (1j * omega_k)
                add(label, omega_c, w * amp)
        return folded()

    if axis == "x":
        raise ValueError("S_x carries no tones; it is a constant of motion")
    op = ops.spin(axis) if kind == "S" else ops.alpha(axis)
    for k, eig in enumerate(eigs):
        fs = frequency_set(wp.grid[k], wp.cfg)
        c = wp.coeffs[:, k]
        w = wp.weights[k]
        for l in (+1, -1):
            m = matrix_element(op, eig.spinor(l, +1), eig.spinor(l, -1))
            amp = np.conj(c[label_index(l, +1)]) * c[label_index(l, -1)] * m
            if kind == "r":
                if fs.omega_L == 0.0:
                    amp = wp.cfg.c * amp  # degenerate tone: linear-coefficient bookkeeping
                else:
                    amp = wp.cfg.c * amp / (1j * l * fs.omega_L)
            # the l = -1 term oscillates at -omega_L; fold onto +omega_L by conjugation
            add("omega_L", center.omega_L, w * (amp if l > 0 else np.conj(amp)))
        for s_bra, s_ket in ((+1, -1), (-1, +1)):
            m = matrix_element(op, eig.spinor(+1, s_bra), eig.spinor(-1, s_ket))
            amp = np.conj(c[label_index(+1, s_bra)]) * c[label_index(-1, s_ket)] * m
            if kind == "r":
                amp = wp.cfg.c * amp / (1j * fs.omega_zb2)
            add("omega_zb2", center.omega_zb2, w * amp)
    return folded()


def transverse_matrix_elements(p: float, cfg: ParticleConfig) -> AmplitudeSet:
    """Contract every ZB/Larmor velocity matrix element at momentum p.

    Closed-form magnitudes are recorded for cross-checking only where the
    radicands are positive; the sign/branch of the negative-energy radicals is
    convention-dependent, so no dominance direction is hard-coded (the report
    in practice shows the two Larmor-tone magnitudes are equal).
    """
    ops = build_operators(cfg.hbar)
    eig = eigensystem_numeric(build_hamiltonian(p, cfg, ops), ops, p=p, c=cfg.c)
    fs = frequency_set(p, cfg)

    def real_elem(op: np.ndarray, bra: np.ndarray, ket: np.ndarray) -> float:
        val = matrix_element(op, bra, ket)
        if abs(val.imag) > _IMAG_TOL * max(1.0, abs(val.real)):
            raise ValueError(f"longitudinal element unexpectedly complex: {val}")
        return val.real

    n1 = real_elem(ops.alpha_x, eig.spinor(+1, +1), eig.spinor(-1, +1))
    n2 = real_elem(ops.alpha_x, eig.spinor(+1, -1), eig.spinor(-1, -1))

    larmor: dict[tuple[str, int], complex] = {}
    zb: dict[tuple[str, int], complex] = {}
    for axis in ("y", "z"):
        op = ops.alpha(axis)
        for l in (+1, -1):
            larmor[(axis, l)] = matrix_element(op, eig.spinor(l, +1), eig.spinor(l, -1))
        for s_ket in (+1, -1):
            zb[(axis, s_ket)] = matrix_element(op, eig.spinor(+1, -s_ket), eig.spinor(-1, s_ket))

    e_pu, e_pd = eig.energy(+1, +1), eig.energy(+1, -1)
    e0u, e0d = cfg.rest_energy_up, cfg.rest_energy_down
    eta_rad = e_pu * e_pd * (e_pu + e0u) * (e_pd + e0d)
    zeta_rad = (-e_pu) * (-e_pd) * (-e_pu + e0u) * (-e_pd + e0d)
    eta = 2.0 * float(np.sqrt(eta_rad))
    zeta = 2.0 * float(np.sqrt(max(zeta_rad, 0.0)))
    cp = cfg.c * p
    closed: dict[int, float | None] = {
        +1: abs(cp * (cfg.hbar * fs.omega_L + 2.0 * cfg.delta)) / eta if eta > 0 else None,
        -1: abs(cp * (cfg.hbar * fs.omega_L - 2.0 * cfg.delta)) / zeta if zeta > 0 else None,
    }

    return AmplitudeSet(
        p=float(p),
        delta=cfg.delta,
        N1=n1,
        N2=n2,
        zeta=zeta,
        eta=eta,
        larmor=larmor,
        zb=zb,
        larmor_closed_magnitude=closed,
    )
