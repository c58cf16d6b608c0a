"""Unfired multi-cylinder piston engine exchanging heat with an isothermal bath.

State layout: (theta, omega, S_1, ..., S_C, S_0) with crank angle theta, its
rate omega, one entropy per cylinder and the bath entropy.  The working fluid
is an ideal gas with heat capacity C_V, so P = exp(S/C_V) V^-gamma, T = P V and
U = C_V T; the bath carries U_0 = T_0 S_0.  Total energy is conserved and total
entropy produced by the thermal relaxation between cylinders and bath.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError, StepError
from ..generic import GenericOdeSystem, step_generic
from ..quadrature import IntegralOperator

AUX_TEMPERATURE_FLOOR = 1e-8


@dataclass(frozen=True)
class EngineParams:
    cylinders: int = 6
    piston_volume: float = 1.0 + 2.0**-4
    env_temperature: float = 1.0
    heat_capacity: float = 2.5

    @property
    def gamma(self):
        return 1.0 + 1.0 / self.heat_capacity

    @property
    def dim(self):
        return self.cylinders + 3

    @property
    def phases(self):
        c = np.arange(1, self.cylinders + 1)
        return 2.0 * np.pi * c / self.cylinders


@dataclass(frozen=True)
class EngineState:
    theta: float
    omega: float
    cylinder_entropies: np.ndarray
    env_entropy: float

    @property
    def array(self):
        return np.concatenate([[self.theta, self.omega],
                               np.asarray(self.cylinder_entropies, dtype=float),
                               [self.env_entropy]])

    @staticmethod
    def from_array(params: EngineParams, x):
        x = np.asarray(x, dtype=float)
        return EngineState(theta=float(x[0]), omega=float(x[1]),
                           cylinder_entropies=x[2:2 + params.cylinders].copy(),
                           env_entropy=float(x[-1]))


def volumes(params: EngineParams, theta):
    theta = np.asarray(theta, dtype=float)
    return params.piston_volume - np.cos(theta[..., None] - params.phases)


def engine_quantities(params: EngineParams, state):
    """Pressures, temperatures, energies and the E/S gradients at a state batch."""
    state = np.asarray(state, dtype=float)
    C = params.cylinders
    theta = state[..., 0]
    omega = state[..., 1]
    S_c = state[..., 2:2 + C]
    S_0 = state[..., -1]
    V = volumes(params, theta)
    if np.any(V <= 0):
        raise GeometryError("nonpositive cylinder volume (piston_volume must exceed 1)")
    P = np.exp(S_c / params.heat_capacity) * V ** (-params.gamma)
    T = P * V
    U = params.heat_capacity * T
    E = 0.5 * omega**2 + U.sum(axis=-1) + params.env_temperature * S_0
    S = S_c.sum(axis=-1) + S_0
    sin_off = np.sin(theta[..., None] - params.phases)
    torque = (P * sin_off).sum(axis=-1)
    grad_E = np.concatenate([
        -torque[..., None],
        omega[..., None],
        T,
        np.broadcast_to(params.env_temperature, theta.shape)[..., None],
    ], axis=-1)
    ones = np.ones_like(S_c)
    grad_S = np.concatenate([
        np.zeros_like(theta)[..., None],
        np.zeros_like(theta)[..., None],
        ones,
        np.ones_like(theta)[..., None],
    ], axis=-1)
    return {"P": P, "T": T, "U": U, "E": E, "S": S, "V": V,
            "torque": torque, "grad_E": grad_E, "grad_S": grad_S}


def engine_rhs(params: EngineParams, state):
    q = engine_quantities(params, state)
    T0 = params.env_temperature
    T = q["T"]
    dS_c = (T0 - T) / T
    dS_0 = ((T - T0) / T0).sum(axis=-1)
    theta_dot = np.asarray(state, dtype=float)[..., 1]
    return np.concatenate([theta_dot[..., None], q["torque"][..., None],
                           dS_c, dS_0[..., None]], axis=-1)


def energy(params: EngineParams):
    return lambda state: engine_quantities(params, state)["E"]


def entropy(params: EngineParams):
    return lambda state: engine_quantities(params, state)["S"]


def _poisson_matrix(params: EngineParams):
    d = params.dim
    B = np.zeros((d, d))
    B[0, 1] = 1.0
    B[1, 0] = -1.0
    return B


def _friction_from_temperatures(params: EngineParams, temps):
    """Thermal-relaxation block from the given (auxiliary) temperatures.

    Out-of-range temperatures yield NaN entries; the implicit solver backs off.
    """
    temps = np.asarray(temps, dtype=float)
    C = params.cylinders
    d = params.dim
    T0 = params.env_temperature
    safe = np.where(temps > AUX_TEMPERATURE_FLOOR, temps, np.nan)
    batch = temps.shape[:-1]
    D = np.zeros(batch + (d, d))
    idx = np.arange(C)
    D[..., 2 + idx, 2 + idx] = T0 / safe
    D[..., 2 + idx, d - 1] = -1.0
    D[..., d - 1, 2 + idx] = -1.0
    D[..., d - 1, d - 1] = safe.sum(axis=-1) / T0
    return D


def engine_extended_matrices(params: EngineParams, state, w_E):
    """Extended matrices evaluated on an auxiliary energy gradient.

    The Poisson matrix is the constant canonical block; the friction matrix
    replaces each cylinder temperature by the corresponding component of w_E.
    Nonpositive auxiliary temperatures are a step failure.
    """
    w_E = np.asarray(w_E, dtype=float)
    temps = w_E[..., 2:2 + params.cylinders]
    if np.any(temps <= AUX_TEMPERATURE_FLOOR):
        raise StepError("nonpositive auxiliary temperature in the friction matrix")
    return _poisson_matrix(params), _friction_from_temperatures(params, temps)


def system(params: EngineParams = EngineParams(), validate: bool = True) -> GenericOdeSystem:
    Bmat = _poisson_matrix(params)
    C = params.cylinders

    def B_ext(x, w_S):
        return np.broadcast_to(Bmat, np.shape(x)[:-1] + Bmat.shape)

    def D_ext(x, w_E):
        w_E = np.asarray(w_E, dtype=float)
        return _friction_from_temperatures(params, w_E[..., 2:2 + C])

    def D_base(x):
        q = engine_quantities(params, x)
        return _friction_from_temperatures(params, q["T"])

    def sample_state(rng):
        x = np.empty(params.dim)
        x[0] = rng.uniform(0.0, 2.0 * np.pi)
        x[1] = rng.normal(scale=4.0)
        x[2:2 + C] = rng.uniform(-1.0, 1.0, C)
        x[-1] = rng.normal()
        return x

    def sample_aux_energy(rng):
        w = rng.standard_normal(params.dim)
        w[2:2 + C] = np.exp(rng.normal(size=C))  # realisable: positive temperatures
        w[-1] = params.env_temperature           # constant bath-temperature component
        return w

    def sample_aux_entropy(rng):
        q = engine_quantities(params, sample_state(rng))
        return q["grad_S"]  # the entropy gradient is constant, so it is its own projection

    sys = GenericOdeSystem(
        dim=params.dim,
        energy=energy(params),
        entropy=entropy(params),
        grad_energy=lambda x: engine_quantities(params, x)["grad_E"],
        grad_entropy=lambda x: engine_quantities(params, x)["grad_S"],
        grads_both=lambda x: (lambda q: (q["grad_E"], q["grad_S"]))(engine_quantities(params, x)),
        B_ext=B_ext,
        D_ext=D_ext,
        B=lambda x: Bmat,
        D=D_base,
        sample_state=sample_state,
        sample_aux_energy=sample_aux_energy,
        sample_aux_entropy=sample_aux_entropy,
    )
    if validate:
        sys.validate(np.random.default_rng(1234))
    return sys


def equilibrium_entropies(params: EngineParams, theta=0.0, temperature=None):
    """Cylinder entropies giving the prescribed temperature at crank angle theta
    (equation-of-state inversion: S = C_V ln T + ln V)."""
    if temperature is None:
        temperature = params.env_temperature
    V = volumes(params, np.asarray(theta, dtype=float))
    return params.heat_capacity * np.log(temperature) + np.log(V)


def initial_state(params: EngineParams = EngineParams(), omega0: float = 8.0) -> EngineState:
    """Thermal equilibrium at theta = 0 with the bath, spinning at omega0."""
    return EngineState(theta=0.0, omega=omega0,
                       cylinder_entropies=equilibrium_entropies(params),
                       env_entropy=0.0)


def engine_step(params: EngineParams, state, dt, s, op: IntegralOperator, system_=None, **kw):
    """One energy/entropy-stable step of the engine model."""
    sys = system_ if system_ is not None else system(params, validate=False)
    x = state.array if isinstance(state, EngineState) else np.asarray(state, dtype=float)
    x_next = step_generic(sys, x, dt, s, op, **kw)
    if isinstance(state, EngineState):
        return EngineState.from_array(params, x_next)
    return x_next
