"""Time propagation: full conservative dynamics and the reduced open system.

The full system dV/dt = -i Omega V + F is propagated spectrally: the
homogeneous part is exact (up to eigensolver accuracy) and forcing enters
through a Duhamel integral evaluated with trapezoidal quadrature.

Eliminating the hidden variables (hidden initial state zero, no hidden
forcing) leaves the observable part with a memory term,

    dv1/dt = -i Omega1 v1 - int_0^t a1(tau) v1(t - tau) dtau + f1(t),

where the delayed-response kernel is a1(t) = Gamma exp(-i Omega2 t)
Gamma^dag, held here in spectral form so it is evaluable exactly at any
time.  The reduced equation is integrated with a trapezoidal (Crank-
Nicolson style) step and trapezoidal memory quadrature, globally second
order; the exact full propagator serves as its accuracy oracle.  The
history is identically zero before t = 0, so the paper-level upper limit
of infinity in the convolution truncates to [0, t] exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .subspaces import DimensionMismatchError, check_hermitian
from .systems import BlockSystem, FullOperator

OBSERVABLE = "observable"
HIDDEN = "hidden"


@dataclass(frozen=True)
class ResponseKernel:
    """Spectral form of a delayed-response kernel.

    ``side`` selects a1 (observable, eigvals of Omega2, modes Gamma U) or
    a2 (hidden, eigvals of Omega1, modes Gamma^dag U).  The kernel at time
    t is modes @ diag(exp(-i eigvals t)) @ modes^dag, exact in t.
    """

    side: str
    eigvals: np.ndarray
    coupling_modes: np.ndarray

    @property
    def dim(self) -> int:
        return self.coupling_modes.shape[0]

    def at(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.eigvals * t)
        return (self.coupling_modes * phases) @ self.coupling_modes.conj().T

    def on_grid(self, times: np.ndarray) -> np.ndarray:
        """Kernel stack of shape (len(times), dim, dim)."""
        phases = np.exp(-1j * np.outer(times, self.eigvals))
        return np.einsum("am,tm,bm->tab", self.coupling_modes, phases,
                         self.coupling_modes.conj())


@dataclass(frozen=True)
class Trajectory:
    """Uniform time grid with one complex state vector per grid point."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=complex)
        if times.ndim != 1 or states.ndim != 2 or len(times) != len(states):
            raise DimensionMismatchError(
                f"grid/state shapes incompatible: {times.shape} vs {states.shape}"
            )
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def space_dim(self) -> int:
        return self.states.shape[1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


@dataclass(frozen=True)
class ForcingSignal:
    """Forcing sampled on the propagation grid, or the zero signal.

    ``samples`` is (n_times, dim) or None for no forcing; ``target`` names
    which equation the signal drives (full, observable, or hidden side).
    """

    samples: np.ndarray | None
    target: str = "full"

    @classmethod
    def zero(cls, target: str = "full") -> "ForcingSignal":
        return cls(None, target)

    def sampled(self, n_times: int, dim: int) -> np.ndarray:
        if self.samples is None:
            return np.zeros((n_times, dim), dtype=complex)
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (n_times, dim):
            raise DimensionMismatchError(
                f"forcing shape {samples.shape} != grid ({n_times}, {dim})"
            )
        return samples


def make_grid(t_max: float, steps: int) -> np.ndarray:
    """Uniform grid of ``steps`` intervals on [0, t_max] (steps+1 points)."""
    if t_max <= 0 or steps < 2:
        raise ValueError(f"need t_max > 0 and steps >= 2, got {t_max}, {steps}")
    return np.linspace(0.0, t_max, steps + 1)


def _uniform_step(times: np.ndarray) -> float:
    diffs = np.diff(times)
    if len(diffs) == 0:
        raise ValueError("grid needs at least two points")
    h = diffs[0]
    if np.any(np.abs(diffs - h) > 1e-12 * max(abs(h), 1.0)):
        raise ValueError("non-uniform time grid rejected")
    return float(h)


def make_kernel(sys: BlockSystem, side: str = OBSERVABLE) -> ResponseKernel:
    """Delayed-response kernel of one side via eigendecomposition of the other."""
    if side == OBSERVABLE:
        w, u = np.linalg.eigh(sys.omega2)
        modes = sys.gamma @ u
    elif side == HIDDEN:
        w, u = np.linalg.eigh(sys.omega1)
        modes = sys.gamma.conj().T @ u
    else:
        raise ValueError(f"unknown kernel side {side!r}")
    return ResponseKernel(side=side, eigvals=w, coupling_modes=modes)


def propagate_full(omega: FullOperator | np.ndarray, v0: np.ndarray,
                   forcing: ForcingSignal, times: np.ndarray) -> Trajectory:
    """Propagate dV/dt = -i Omega V + F spectrally on a uniform grid.

    The homogeneous part is exact; the Duhamel integral for the forcing is
    a cumulative trapezoid in the eigenbasis.  With zero forcing the result
    is exact up to eigensolver accuracy.
    """
    mat = omega.omega if isinstance(omega, FullOperator) else np.asarray(omega)
    mat = check_hermitian(mat, 1e-10, "full generator")
    n = mat.shape[0]
    v0 = np.asarray(v0, dtype=complex)
    if v0.shape != (n,):
        raise DimensionMismatchError(f"v0 shape {v0.shape} != ({n},)")
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)

    w, u = np.linalg.eigh(mat)
    rel = times - times[0]
    coeff0 = u.conj().T @ v0
    phases = np.exp(-1j * np.outer(rel, w))  # (nt, n)

    coeff = phases * coeff0
    if forcing.samples is not None:
        f = forcing.sampled(len(times), n)
        g = np.exp(1j * np.outer(rel, w)) * (f @ u.conj())  # integrand in eigenbasis
        cumulative = np.zeros_like(g)
        cumulative[1:] = np.cumsum((g[1:] + g[:-1]) * (h / 2), axis=0)
        coeff = phases * (coeff0 + cumulative)
    states = coeff @ u.T  # rows back to the original basis
    return Trajectory(times, states)


def propagate_reduced(sys: BlockSystem, v1_0: np.ndarray,
                      f1: ForcingSignal, times: np.ndarray) -> Trajectory:
    """Integrate the reduced open equation with memory convolution.

    Trapezoidal rule in time applied to the whole right-hand side, with
    trapezoidal quadrature of the memory integral over [0, t] (zero
    history before t = 0).  The only implicit unknown enters linearly, so
    each step is one back-substitution against a prefactored constant
    matrix.  Global error versus the projected full trajectory is O(h^2).

    Valid in the regime the reduced equation is derived in: hidden initial
    state zero and no hidden forcing.
    """
    d1 = sys.d1
    v = np.asarray(v1_0, dtype=complex)
    if v.shape != (d1,):
        raise DimensionMismatchError(f"v1_0 shape {v.shape} != ({d1},)")
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    nt = len(times)
    f = f1.sampled(nt, d1)

    kernel = make_kernel(sys, OBSERVABLE)
    k = kernel.on_grid(times - times[0])  # (nt, d1, d1)
    k0 = k[0]

    # (I + (h/2) i Omega1 + (h^2/4) K0) v_{n+1} = known terms
    lhs = (np.eye(d1, dtype=complex)
           + (h / 2) * 1j * sys.omega1
           + (h * h / 4) * k0)
    lu = lu_factor(lhs)

    states = np.zeros((nt, d1), dtype=complex)
    states[0] = v
    for n in range(nt - 1):
        vn = states[n]
        if n == 0:
            conv_n = np.zeros(d1, dtype=complex)
        else:
            conv_n = h * (0.5 * (k0 @ vn)
                          + np.einsum("jab,jb->a", k[1:n], states[n - 1:0:-1])
                          + 0.5 * (k[n] @ states[0]))
        rhs_n = -1j * (sys.omega1 @ vn) - conv_n + f[n]
        # memory at t_{n+1} excluding the unknown v_{n+1} term
        conv_next = h * (np.einsum("jab,jb->a", k[1:n + 1], states[n:0:-1])
                         + 0.5 * (k[n + 1] @ states[0]))
        rhs = vn + (h / 2) * (rhs_n + f[n + 1] - conv_next)
        states[n + 1] = lu_solve(lu, rhs)
    return Trajectory(times, states)


def reduction_discrepancy(sys: BlockSystem, v1_0: np.ndarray, t_max: float,
                          steps: int) -> dict:
    """Sup-norm gap between the reduced propagation and the projected full one.

    Runs both propagators at ``steps`` and at ``2 * steps`` (hidden initial
    state zero, no forcing) and reports the two gaps plus the empirical
    convergence order log2(coarse / fine); a second-order reduced stepper
    gives an order near 2.
    """
    from .systems import assemble_full

    d1 = sys.d1
    v1_0 = np.asarray(v1_0, dtype=complex)
    v_full = np.concatenate([v1_0, np.zeros(sys.d2, dtype=complex)])
    full_op = assemble_full(sys)

    def gap(n_steps: int) -> float:
        grid = make_grid(t_max, n_steps)
        full = propagate_full(full_op, v_full, ForcingSignal.zero(), grid)
        red = propagate_reduced(sys, v1_0, ForcingSignal.zero(OBSERVABLE), grid)
        return float(np.max(np.linalg.norm(
            full.states[:, :d1] - red.states, axis=1)))

    coarse = gap(steps)
    fine = gap(2 * steps)
    if fine > 0:
        order = float(np.log2(coarse / fine))
    else:
        order = float("inf") if coarse > 0 else 0.0
    return {
        "t_max": t_max,
        "steps": steps,
        "sup_diff_coarse": coarse,
        "sup_diff_fine": fine,
        "order": order,
    }


@dataclass(frozen=True)
class NoGainResult:
    """Outcome of the dissipation quadratic-form check over random signals."""

    min_value: float
    values: np.ndarray
    quad_error_bound: float

    @property
    def passed(self) -> bool:
        return self.min_value >= -self.quad_error_bound


def _bump_profile(times: np.ndarray, a: float, b: float) -> np.ndarray:
    """C^1 compactly supported polynomial bump on (a, b), peak height 1."""
    p = np.zeros_like(times)
    inside = (times > a) & (times < b)
    t = times[inside]
    p[inside] = ((t - a) * (b - t)) ** 2 / (((b - a) / 2) ** 4)
    return p


def no_gain_check(kernel: ResponseKernel, trials: int, times: np.ndarray,
                  seed: int) -> NoGainResult:
    """Minimum of Re  iint conj(v(t)) a(tau) v(t-tau) dt dtau over test signals.

    Signals are polynomial bumps on random subintervals of the grid times
    random complex vectors, deterministic per seed.  The double integral is
    evaluated by trapezoidal quadrature on the full square (the integrand
    vanishes where the shifted signal has no support).  The reported error
    bound comes from the composite-trapezoid estimate
    (h^2/12) * T^2 * (max |d2g/dt2| + max |d2g/dtau2|) with the second
    derivatives estimated by second differences of the sampled integrand.
    """
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    span = times[-1] - times[0]
    nt = len(times)
    d = kernel.dim
    k = kernel.on_grid(times - times[0])  # (nt, d, d)
    rng = np.random.default_rng(seed)

    weights = np.full(nt, h)
    weights[0] = weights[-1] = h / 2

    values = np.zeros(trials)
    bound = 0.0
    for trial in range(trials):
        lo, hi = np.sort(rng.uniform(times[0], times[-1], size=2))
        if hi - lo < span / 4:  # keep a few dozen points under the bump
            mid = (lo + hi) / 2
            lo, hi = mid - span / 8, mid + span / 8
        u = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        u /= np.linalg.norm(u)
        profile = _bump_profile(times, lo, hi)
        signal = profile[:, None] * u  # (nt, d)

        # g[i, j] = Re conj(v(t_i)) . a(tau_j) v(t_i - tau_j)
        kv = np.einsum("jab,ijb->ija", k, _shifted(signal))
        g = np.real(np.einsum("ia,ija->ij", signal.conj(), kv))
        values[trial] = float(weights @ g @ weights)

        if nt > 2:
            curv_t = np.max(np.abs(np.diff(g, 2, axis=0))) / h ** 2
            curv_tau = np.max(np.abs(np.diff(g, 2, axis=1))) / h ** 2
            bound = max(bound, (h ** 2 / 12) * span ** 2 * (curv_t + curv_tau))

    return NoGainResult(min_value=float(np.min(values)), values=values,
                        quad_error_bound=float(bound))


def _shifted(signal: np.ndarray) -> np.ndarray:
    """Stack s[i, j] = signal[i - j] with zero for negative indices."""
    nt, d = signal.shape
    out = np.zeros((nt, nt, d), dtype=complex)
    for j in range(nt):
        out[j:, j] = signal[: nt - j]
    return out


# --- CSV export ------------------------------------------------------------

def trajectory_to_csv(traj: Trajectory, path: str) -> None:
    """Columns: time, then re/im interleaved per state component."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["time"]
        for i in range(traj.space_dim):
            header += [f"re_{i}", f"im_{i}"]
        writer.writerow(header)
        for t, state in zip(traj.times, traj.states):
            row = [repr(float(t))]
            for z in state:
                row += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(row)


def kernel_to_csv(kernel: ResponseKernel, times: np.ndarray, path: str) -> None:
    """Columns: time, then re/im interleaved per kernel matrix entry (row-major)."""
    times = np.asarray(times, dtype=float)
    stack = kernel.on_grid(times)
    d = kernel.dim
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["time"]
        for i in range(d):
            for j in range(d):
                header += [f"re_{i}{j}", f"im_{i}{j}"]
        writer.writerow(header)
        for t, mat in zip(times, stack):
            row = [repr(float(t))]
            for z in mat.reshape(-1):
                row += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(row)
