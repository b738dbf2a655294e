"""Time integration of the front equation on the periodic line.

The linear part is diagonal in Fourier space, so stepping works on the
profile variable vhat = e^{-i tau Lambda} phihat (Lambda the linear
symbol): the linear flow is exact and the explicit stage rule only sees
the nonlinearity.  The stage rule is classical RK4 with one extra
end-point stage giving an embedded third-order error estimate:

    err = dt/6 * || k4 - f(t + dt, y_{n+1}) ||

(the extra stage is first-same-as-last, so an accepted adaptive step still
costs four fresh evaluations).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernel, specfun, spectral
from .grids import MOVING, FrontState, GridError, UniformGrid


class BlowUpError(RuntimeError):
    """Solution left the trust region; carries the last finite state."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class RunConfig:
    n: int = 512
    length: float = 80.0
    frame: str = MOVING
    jump: float = 1.0 / np.pi
    t_final: float = 10.0
    dt: float = 0.1
    adaptive: bool = False
    tol: float = 1e-9
    nonlinearity: str = "series"  # "direct" | "series" | "none"
    mu_max: int = specfun.MU_MAX_DEFAULT
    dealias: float = 2.0 / 3.0
    cadence: float = 1.0
    quad: kernel.QuadratureSpec = field(default_factory=kernel.QuadratureSpec)
    initial_family: str = "gaussian"
    initial_params: tuple = (("amplitude", 1e-2), ("width", 1.0))
    seed: int = 0
    max_growth: float = 10.0
    tail_limit: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if not 0.5 < self.dealias <= 1.0:
            raise ValueError("dealias fraction must lie in (1/2, 1]")
        if self.nonlinearity not in ("direct", "series", "none"):
            raise ValueError(f"unknown nonlinearity mode {self.nonlinearity!r}")

    @property
    def grid(self):
        return UniformGrid(self.n, self.length)


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    steps_taken: int = 0
    rhs_evaluations: int = 0
    dts: list = field(default_factory=list)

    def append(self, state):
        if self.states and state.time <= self.states[-1].time:
            raise ValueError("checkpoint times must be strictly increasing")
        self.states.append(state)

    @property
    def times(self):
        return np.array([s.time for s in self.states])


def _dealias_mask(grid, fraction):
    cut = fraction * (grid.n // 2) * grid.dxi
    return (np.abs(grid.xi) <= cut).astype(float)


class _Stepper:
    """Integrating-factor RK4(3) on the spectral coefficients."""

    def __init__(self, config):
        self.config = config
        self.grid = config.grid
        self.mask = _dealias_mask(self.grid, config.dealias)
        self.symbol = kernel.linear_multiplier(self.grid, config.frame, config.jump)
        self.rhs_count = 0
        self._fsal = None

    def _nhat(self, coef, t):
        """Masked transform of the nonlinear term at spectral state coef."""
        if self.config.nonlinearity == "none":
            return np.zeros_like(coef)
        values = spectral.inverse_real(spectral.SpectralField(self.grid, coef))
        state = FrontState(self.grid, values, time=t, frame=MOVING,
                           jump=self.config.jump)
        nl = kernel._nonlinear(state, self.config.quad,
                               self.config.nonlinearity, self.config.mu_max)
        out = spectral.transform(self.grid, nl).coefficients * self.mask
        out[0] = 0.0  # the nonlinearity is a perfect x-derivative
        self.rhs_count += 1
        return out

    def step(self, coef, t, dt):
        """One RK4(3) step; returns (new_coef, error_estimate)."""
        v = coef
        if self._fsal is not None and self._fsal[0] == t:
            k1 = self._fsal[1]
        else:
            k1 = self._nhat(v, t)
        e_half = np.exp(self.symbol * (0.5 * dt))
        e_full = np.exp(self.symbol * dt)
        # stages expressed directly on phihat: propagate, evaluate, pull back
        k2 = np.exp(-self.symbol * 0.5 * dt) * self._nhat(e_half * (v + 0.5 * dt * k1), t + 0.5 * dt)
        k3 = np.exp(-self.symbol * 0.5 * dt) * self._nhat(e_half * (v + 0.5 * dt * k2), t + 0.5 * dt)
        k4 = np.exp(-self.symbol * dt) * self._nhat(e_full * (v + dt * k3), t + dt)
        v_new = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        coef_new = e_full * v_new
        k5 = self._nhat(coef_new, t + dt)
        err = (dt / 6.0) * float(np.max(np.abs(k4 - np.exp(-self.symbol * dt) * k5)))
        self._fsal = (t + dt, k5)
        return coef_new, err


def step(state, dt, config):
    """Advance one step of size dt (negative dt runs backwards)."""
    cfg = replace(config, frame=state.frame, n=state.grid.n, length=state.grid.length,
                  jump=state.jump)
    stepper = _Stepper(cfg)
    coef = spectral.transform(state.grid, state.values).coefficients
    try:
        new_coef, _ = stepper.step(coef, state.time, dt)
    except GridError as exc:
        raise BlowUpError(f"non-finite values inside step: {exc}",
                          last_state=state) from exc
    values = spectral.inverse_real(spectral.SpectralField(state.grid, new_coef))
    if not np.all(np.isfinite(values)):
        raise BlowUpError("non-finite values after step", last_state=state)
    return state.copy_with(values=values, time=state.time + dt)


def _check_trust(state, initial_max, config):
    m = float(np.max(np.abs(state.values)))
    if initial_max > 0 and m > config.max_growth * initial_max:
        raise BlowUpError(
            f"amplitude grew to {m:.3e} (> {config.max_growth} x initial)",
            last_state=state)
    coef = np.abs(spectral.transform(state.grid, state.values).coefficients)
    peak = float(np.max(coef))
    if peak > 0:
        n8 = state.grid.n // 8
        half = state.grid.n // 2
        tail = float(np.max(coef[half - n8: half + n8]))
        if tail > config.tail_limit * peak:
            raise BlowUpError(
                f"spectral tail fraction {tail / peak:.3e} exceeds "
                f"{config.tail_limit}", last_state=state)


def run(config, initial_values=None, observer=None):
    """Integrate to t_final, checkpointing at the configured cadence.

    `observer(state)` is called at every checkpoint; returns a Trajectory.
    Deterministic for a given config (data families draw from a fixed
    seed).
    """
    from .grids import make_initial

    grid = config.grid
    if initial_values is None:
        params = dict(config.initial_params)
        params.setdefault("seed", config.seed)
        initial_values = make_initial(grid, config.initial_family, params)
    mask = _dealias_mask(grid, config.dealias)
    coef0 = spectral.transform(grid, initial_values).coefficients * mask
    values0 = spectral.inverse_real(spectral.SpectralField(grid, coef0))
    state = FrontState(grid, values0, time=0.0, frame=config.frame, jump=config.jump)
    initial_max = float(np.max(np.abs(values0)))

    stepper = _Stepper(config)
    traj = Trajectory()
    traj.append(state)
    if observer is not None:
        observer(state)

    coef = coef0.copy()
    t = 0.0
    dt = config.dt
    next_checkpoint = config.cadence
    while t < config.t_final - 1e-12:
        dt_step = min(dt, config.t_final - t, next_checkpoint - t)
        try:
            new_coef, err = stepper.step(coef, t, dt_step)
        except GridError as exc:
            raise BlowUpError(f"non-finite values inside step: {exc}",
                              last_state=traj.states[-1]) from exc
        if config.adaptive and err > config.tol and dt_step > 1e-8:
            dt = max(0.2 * dt_step, 0.9 * dt_step * (config.tol / err) ** 0.25)
            stepper._fsal = None
            continue
        coef = new_coef
        t += dt_step
        traj.steps_taken += 1
        traj.dts.append(dt_step)
        if config.adaptive and err > 0:
            dt = float(np.clip(0.9 * dt_step * (config.tol / max(err, 1e-300)) ** 0.25,
                               0.2 * dt_step, 5.0 * dt_step))
        if t >= next_checkpoint - 1e-12 or t >= config.t_final - 1e-12:
            values = spectral.inverse_real(spectral.SpectralField(grid, coef))
            if not np.all(np.isfinite(values)):
                raise BlowUpError("non-finite values", last_state=traj.states[-1])
            state = FrontState(grid, values, time=t, frame=config.frame,
                               jump=config.jump)
            _check_trust(state, initial_max, config)
            traj.append(state)
            if observer is not None:
                observer(state)
            while next_checkpoint <= t + 1e-12:
                next_checkpoint += config.cadence
    traj.rhs_evaluations = stepper.rhs_count
    return traj


def stationary_phase_points(x_over_t):
    """Frequencies where the group velocity matches x/t.

    p'(xi) = -(1 + xi^2)^{-3/2} has range [-1, 0), so solutions
    +-sqrt((t/x)^{2/3} - 1) exist exactly for 0 < x/t <= 1.
    """
    r = float(x_over_t)
    if r <= 0.0 or r > 1.0:
        return []
    root = (1.0 / r) ** (2.0 / 3.0) - 1.0
    if root < 0.0:
        return []
    v = float(np.sqrt(root))
    return [0.0] if v == 0.0 else [-v, v]


# ---------------------------------------------------------------------------
# checkpoint files
# ---------------------------------------------------------------------------

def save_checkpoint(state, path, config_hash=""):
    """Self-describing two-column checkpoint (header + x_i phi_i rows)."""
    with open(path, "w") as fh:
        fh.write(f"# t {float(state.time)!r}\n")
        fh.write(f"# n {state.grid.n}\n")
        fh.write(f"# length {float(state.grid.length)!r}\n")
        fh.write(f"# frame {state.frame}\n")
        fh.write(f"# jump {float(state.jump)!r}\n")
        fh.write(f"# config {config_hash}\n")
        for x, v in zip(state.grid.x, state.values):
            fh.write(f"{float(x)!r} {float(v)!r}\n")


def load_checkpoint(path):
    header = {}
    xs, vs = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                parts = line[1:].split(None, 1)
                header[parts[0]] = parts[1].strip() if len(parts) > 1 else ""
            else:
                a, b = line.split()
                xs.append(float(a))
                vs.append(float(b))
    grid = UniformGrid(int(header["n"]), float(header["length"]))
    return FrontState(grid, np.array(vs), time=float(header["t"]),
                      frame=header["frame"], jump=float(header["jump"]))
