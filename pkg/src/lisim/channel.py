"""Scenario geometry, LOS channel synthesis, and uplink signal generation.

Coordinate frame: the antenna surface occupies the z = 0 plane, centered
horizontally (x in [-lis_width/2, +lis_width/2]) and centered vertically
in the room height. Users live inside the room box

    x in [-room_width/2, +room_width/2]
    y in [0, room_height]
    z in [min_user_depth, room_depth]

All distances are in meters. Panels tile the surface rectangle in
row-major order (bottom row first, left to right); that ordering is also
the daisy-chain order used by the chain module.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateChannelError, NumericalDomainError

_TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, user population, and radio parameters of one deployment.

    ``snr_rho`` is a linear power ratio (1.0 means 0 dB) and is reported
    alongside every result because absolute rates depend on it.
    """

    lis_width_m: float = 10.0
    lis_height_m: float = 1.0
    room_width_m: float = 30.0
    room_height_m: float = 3.0
    room_depth_m: float = 30.0
    panel_side_m: float = 0.2
    users_k: int = 20
    wavelength_m: float = 0.05
    snr_rho: float = 1.0
    min_user_depth_m: float = 0.5
    seed: int = 42

    def validate(self) -> None:
        """Raise ConfigError if any field is out of range or inconsistent."""
        for name in ("lis_width_m", "lis_height_m", "room_width_m",
                     "room_height_m", "room_depth_m", "panel_side_m"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive")
        if self.users_k < 1:
            raise ConfigError("users_k must be at least 1")
        if self.wavelength_m <= 0.0:
            raise ConfigError("wavelength_m must be positive")
        if self.snr_rho <= 0.0:
            raise ConfigError("snr_rho must be positive")
        if self.min_user_depth_m <= 0.0:
            raise ConfigError("min_user_depth_m must be positive")
        if self.min_user_depth_m >= self.room_depth_m:
            raise ConfigError("min_user_depth_m must be smaller than room_depth_m")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        _exact_div(self.lis_width_m, self.panel_side_m, "lis_width_m")
        _exact_div(self.lis_height_m, self.panel_side_m, "lis_height_m")
        if self.lis_width_m > self.room_width_m or self.lis_height_m > self.room_height_m:
            raise ConfigError("the surface must fit inside the room wall")


def _exact_div(length: float, step: float, name: str) -> int:
    """Integer ratio length/step, or ConfigError if it is not integral."""
    ratio = length / step
    count = round(ratio)
    if count < 1 or abs(ratio - count) > 1e-9:
        raise ConfigError(
            f"{name} ({length}) must be an integer multiple of panel_side_m ({step})"
        )
    return count


@dataclass(frozen=True)
class Panel:
    """One square sub-array: chain position, center, and antenna sites."""

    index: int
    center: np.ndarray
    antenna_positions: np.ndarray  # (Mp, 3), all rows with z = 0


@dataclass(frozen=True)
class Scenario:
    """Concrete panel layout built from a ScenarioConfig."""

    panels: tuple
    panel_side_m: float
    antennas_per_panel: int
    grid_rows: int
    grid_cols: int

    @property
    def p_count(self) -> int:
        return len(self.panels)

    @property
    def m_total(self) -> int:
        return self.p_count * self.antennas_per_panel

    @property
    def antenna_spacing_m(self) -> float:
        return self.panel_side_m / math.isqrt(self.antennas_per_panel)


@dataclass(frozen=True)
class UserSet:
    """User positions, one (x, y, z) row per user."""

    positions: np.ndarray

    @property
    def users_k(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class ChannelRealization:
    """Per-panel channel blocks after global power normalization.

    The single scale ``norm_scale`` was applied to every block so that
    the stacked matrix satisfies ``sum_i ||H_i||_F^2 = M * K``.
    """

    blocks: tuple
    norm_scale: float

    @property
    def p_count(self) -> int:
        return len(self.blocks)

    @property
    def users_k(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def m_total(self) -> int:
        return sum(b.shape[0] for b in self.blocks)

    def stacked(self) -> np.ndarray:
        """Full M x K channel matrix with blocks stacked in chain order."""
        return np.vstack(self.blocks)


def build_scenario(cfg: ScenarioConfig, mp: int) -> Scenario:
    """Tile the surface rectangle with square panels of ``mp`` antennas.

    Parameters
    ----------
    cfg : ScenarioConfig
        Validated geometry; ``panel_side_m`` must divide both surface
        dimensions.
    mp : int
        Antennas per panel; must be a perfect square. Antennas sit at the
        cell centers of a sqrt(mp) x sqrt(mp) grid inside each panel, so
        the spacing is ``panel_side_m / sqrt(mp)``.

    Returns
    -------
    Scenario
        Panels in row-major order (bottom row first, left to right).
    """
    cfg.validate()
    side = math.isqrt(int(mp))
    if mp < 1 or side * side != mp:
        raise ConfigError(f"antennas per panel must be a perfect square, got {mp}")
    cols = _exact_div(cfg.lis_width_m, cfg.panel_side_m, "lis_width_m")
    rows = _exact_div(cfg.lis_height_m, cfg.panel_side_m, "lis_height_m")

    spacing = cfg.panel_side_m / side
    offsets = (np.arange(side) + 0.5) * spacing
    local = np.zeros((mp, 3))
    local[:, 0] = np.tile(offsets, side)     # x varies fastest
    local[:, 1] = np.repeat(offsets, side)

    x0 = -cfg.lis_width_m / 2.0
    y0 = (cfg.room_height_m - cfg.lis_height_m) / 2.0
    panels = []
    for pr in range(rows):
        for pc in range(cols):
            corner = np.array([x0 + pc * cfg.panel_side_m,
                               y0 + pr * cfg.panel_side_m, 0.0])
            panels.append(Panel(
                index=pr * cols + pc,
                center=corner + np.array([cfg.panel_side_m / 2.0,
                                          cfg.panel_side_m / 2.0, 0.0]),
                antenna_positions=local + corner,
            ))
    return Scenario(panels=tuple(panels), panel_side_m=cfg.panel_side_m,
                    antennas_per_panel=mp, grid_rows=rows, grid_cols=cols)


def sample_users(scenario: Scenario, cfg: ScenarioConfig,
                 rng: np.random.Generator) -> UserSet:
    """Draw K user positions i.i.d. uniform over the room box.

    The depth coordinate is clipped away from the surface by sampling it
    uniformly on [min_user_depth_m, room_depth_m]; the gain model diverges
    at z = 0.
    """
    raw = rng.random((cfg.users_k, 3))
    positions = np.empty_like(raw)
    positions[:, 0] = (raw[:, 0] - 0.5) * cfg.room_width_m
    positions[:, 1] = raw[:, 1] * cfg.room_height_m
    positions[:, 2] = cfg.min_user_depth_m + raw[:, 2] * (
        cfg.room_depth_m - cfg.min_user_depth_m)
    return UserSet(positions=positions)


def los_gain(user, antenna, wavelength_m: float):
    """Complex line-of-sight gain between a user and one antenna.

    For a user at (x_k, y_k, z_k) and an antenna at (x, y, 0) the gain is

        sqrt(z_k) / (2 sqrt(pi) d^(3/2)) * exp(-2j pi d / wavelength)

    with d the Euclidean distance between the two points. The amplitude
    law integrates to unit captured power over an infinite surface.

    Broadcasting over leading axes is supported; the last axis must hold
    the (x, y, z) coordinates.
    """
    user = np.asarray(user, dtype=float)
    antenna = np.asarray(antenna, dtype=float)
    z = user[..., 2]
    if np.any(z <= 0.0):
        raise NumericalDomainError("user depth must be strictly positive")
    if wavelength_m <= 0.0:
        raise NumericalDomainError("wavelength must be positive")
    d = np.sqrt(np.sum((user - antenna) ** 2, axis=-1))
    amplitude = np.sqrt(z) / (_TWO_SQRT_PI * d**1.5)
    return amplitude * np.exp(-2j * np.pi * d / wavelength_m)


def panel_channel(panel: Panel, users: UserSet, wavelength_m: float) -> np.ndarray:
    """Unnormalized Mp x K channel block of one panel.

    Entry (m, k) is ``los_gain(user k, antenna m, wavelength)``.
    """
    pos = users.positions
    if np.any(pos[:, 2] <= 0.0):
        raise NumericalDomainError("user depth must be strictly positive")
    ants = panel.antenna_positions
    diff = ants[:, None, :] - pos[None, :, :]
    d = np.sqrt(np.sum(diff**2, axis=-1))
    amplitude = np.sqrt(pos[:, 2])[None, :] / (_TWO_SQRT_PI * d**1.5)
    return amplitude * np.exp(-2j * np.pi * d / wavelength_m)


def realize_channel(scenario: Scenario, users: UserSet,
                    wavelength_m: float) -> ChannelRealization:
    """Generate all panel blocks and normalize the stacked channel.

    A single scale c = sqrt(M K) / ||H_raw||_F is applied to every block
    so the stacked Frobenius norm squared equals M * K exactly.
    """
    raw = [panel_channel(p, users, wavelength_m) for p in scenario.panels]
    power = sum(float(np.sum(np.abs(b) ** 2)) for b in raw)
    if power <= 0.0:
        raise DegenerateChannelError("raw channel is identically zero")
    m_total = sum(b.shape[0] for b in raw)
    scale = math.sqrt(m_total * users.users_k / power)
    return ChannelRealization(blocks=tuple(scale * b for b in raw),
                              norm_scale=scale)


def simulate_uplink(chan: ChannelRealization, x, rho: float,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Received M-vector ``y = sqrt(rho) H x + n``.

    ``n`` is i.i.d. circularly-symmetric complex Gaussian with unit
    variance per component, or zero when ``rng`` is None (noise-free).
    """
    if rho <= 0.0:
        raise NumericalDomainError("rho must be positive")
    x = np.asarray(x, dtype=complex)
    if x.shape != (chan.users_k,):
        raise ValueError(
            f"expected a length-{chan.users_k} user vector, got shape {x.shape}")
    y = math.sqrt(rho) * (chan.stacked() @ x)
    if rng is not None:
        m = y.shape[0]
        noise = (rng.standard_normal(m) + 1j * rng.standard_normal(m))
        y = y + noise * math.sqrt(0.5)
    return y
