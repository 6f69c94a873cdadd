#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

import dataclasses
import enum
import logging
import math
import numpy as np
from scipy.spatial.distance import cdist
from xlra.utils import ConfigError, DomainError, dbm2watt, make_rng

logger = logging.getLogger(__name__)

# (lower, upper, lower inclusive, upper inclusive); None leaves a side open.
FIELD_BOUNDS = {
    'r_i': (0.0, None, False, False),
    'r_e': (0.0, None, False, False),
    'M': (2, None, True, False),
    'B': (1, None, True, False),
    'array_length': (0.0, None, False, False),
    'P_b': (0.0, 1.0, True, True),
    'P_a': (0.0, 1.0, True, True),
    'tau_ra': (1, None, True, False),
    'kappa': (0.0, None, False, False),
    'sigma_sf_db': (0.0, None, True, False),
    'noise_power': (0.0, None, False, False),
    'ue_tx_power': (0.0, None, False, False),
    'bs_tx_power': (0.0, None, False, False),
    'data_tx_power': (0.0, None, False, False),
    'T': (1, None, True, False),
    't_c': (0.0, None, False, False),
    'bandwidth_w': (0.0, None, False, False),
    'mu_pd': (1, None, True, False),
    'max_attempts': (1, None, True, False),
    'backoff_retx_prob': (0.0, 1.0, False, True),
    'sucre_bias': (0.0, None, True, False),
}


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """
    Every physical, protocol and simulation parameter of a cell.

    Defaults reproduce the crowded urban-micro cell used for the reference
    results: a 40 m, 400 antenna ULA split in 10 subarrays at the center of an
    annulus 20 m to 200 m, P_a = 0.01, tau_ra = 10 RA pilots, 0 dB decoding
    threshold. Powers are not fixed by that setup; the defaults are 1 mW for
    every transmitter and thermal noise over 20 MHz with a 9 dB noise figure,
    the point at which the attempt and failure levels of the reference results
    are met (see docs/calibrated.cfg).

    ...

    Attributes
    __________
    r_i, r_e: float
        Inner and outer cell radius (m).
    M, B: int
        Total antenna count and subarray count. M must be a multiple of B.
    P_b: float
        Probability that a subarray belongs to the visibility region of a UE.
    P_a: float
        Probability that an inactive UE attempts access in a block.
    kappa, g_db, sigma_sf_db: float
        Path-loss exponent, reference path loss (dB) and shadowing std (dB).
    noise_power, ue_tx_power, bs_tx_power, data_tx_power: float
        sigma^2, rho, q and the payload power rho_bar, all in W.
    T, t_c, bandwidth_w: float
        Channel uses per coherence block, coherence time (s), bandwidth (Hz).
    sucre_bias: float
        Margin epsilon of the strongest-user retransmission rule.
    dl_alpha_in_interference: bool
        Evaluate the DL conventional interference with beta/alpha instead of beta.
    """
    r_i: float = 20.0
    r_e: float = 200.0
    M: int = 400
    B: int = 10
    array_length: float = 40.0
    P_b: float = 0.5
    P_a: float = 0.01
    tau_ra: int = 10
    kappa: float = 3.8
    g_db: float = -34.53
    sigma_sf_db: float = 10.0
    noise_power: float = float(dbm2watt(-92.0))
    ue_tx_power: float = 1e-3
    bs_tx_power: float = 1e-3
    data_tx_power: float = 1e-3
    decode_threshold_db: float = 0.0
    T: int = 200
    t_c: float = 1e-3
    bandwidth_w: float = 2e7
    mu_pd: int = 10
    max_attempts: int = 10
    backoff_retx_prob: float = 0.5
    sucre_bias: float = 0.0
    dl_alpha_in_interference: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def M_b(self):
        return self.M // self.B

    @property
    def decode_threshold(self):
        return 10.0 ** (self.decode_threshold_db / 10.0)

    def validate(self):
        for name, (low, high, low_closed, high_closed) in FIELD_BOUNDS.items():
            value = getattr(self, name)
            if low is not None and (value < low or (value == low and not low_closed)):
                raise ConfigError('%s = %r violates lower bound %s %r' % (name, value, '>=' if low_closed else '>', low))
            if high is not None and (value > high or (value == high and not high_closed)):
                raise ConfigError('%s = %r violates upper bound %s %r' % (name, value, '<=' if high_closed else '<', high))
        if self.r_i >= self.r_e:
            raise ConfigError('r_i = %r violates bound r_i < r_e = %r' % (self.r_i, self.r_e))
        if self.M % self.B != 0:
            raise ConfigError('M = %r violates bound M mod B == 0 (B = %r)' % (self.M, self.B))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def scaled_powers(self, factor):
        """Copy with rho, q, rho_bar and sigma^2 multiplied by a common factor."""
        return self.replace(ue_tx_power=self.ue_tx_power * factor,
                            bs_tx_power=self.bs_tx_power * factor,
                            data_tx_power=self.data_tx_power * factor,
                            noise_power=self.noise_power * factor)


class UeState(enum.Enum):
    INACTIVE = 'inactive'
    BACKOFF = 'backoff'
    ACTIVE = 'active'
    FAILED = 'failed'


class VisibilityVector:
    """
    Binary length-B vector v_k; bit b is set when subarray b is visible to the UE.
    """
    def __init__(self, bits):
        self.bits = np.asarray(bits, dtype=np.int64)
        if self.bits.ndim != 1 or not np.all((self.bits == 0) | (self.bits == 1)):
            raise DomainError('Visibility vector must be a 1-d binary vector, got %r' % (bits,))

    def visible(self):
        """The set view {b : v_b = 1}."""
        return set(np.flatnonzero(self.bits).tolist())

    def overlaps(self, other):
        return int(np.dot(self.bits, np.asarray(other))) != 0

    def is_empty(self):
        return not self.bits.any()

    def __len__(self):
        return len(self.bits)

    def __eq__(self, other):
        return isinstance(other, VisibilityVector) and np.array_equal(self.bits, other.bits)

    def __repr__(self):
        return 'VisibilityVector(%s)' % ''.join(str(b) for b in self.bits)


@dataclasses.dataclass(eq=False)
class UserEquipment:
    """
    A UE of the cell together with its access lifecycle.

    ...

    Attributes
    __________
    beta: numpy.ndarray
        Subarray averaged large-scale gains; zero exactly on the blocked subarrays.
    attempts: int
        RA attempts made in the current access cycle (mu_RA).
    mu_ra: int
        Attempts it took to get the current session; kept for the spectral efficiency.
    """
    id: int
    position: np.ndarray
    visibility: VisibilityVector
    beta: np.ndarray
    state: UeState = UeState.INACTIVE
    attempts: int = 0
    chosen_pilot: int = None
    pdp_index: int = None
    remaining_intervals: int = 0
    mu_ra: int = 0

    @property
    def total_gain(self):
        return float(self.beta.sum())


def antenna_positions(config):
    """
    Coordinates of the M antennas: equally spaced on the x axis over
    array_length, centered at the origin. Rows (b-1)*M_b .. b*M_b-1 form subarray b.
    """
    if config.M < 2:
        raise DomainError('At least two antennas are needed, got M = %r' % config.M)
    x = np.linspace(-config.array_length / 2.0, config.array_length / 2.0, config.M)
    return np.column_stack([x, np.zeros(config.M)])


def pathloss(d, chi, config):
    """
    Large-scale gain 10^(-kappa log10(d) + (g + chi)/10) at distance d (m) for the
    shadowing realization chi (dB). Broadcasts over arrays.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError('Distance must be positive, got %r' % (d.min(),))
    gain = 10.0 ** (-config.kappa * np.log10(d) + (config.g_db + np.asarray(chi, dtype=float)) / 10.0)
    return float(gain) if gain.ndim == 0 else gain


def sample_visibility(config, rng):
    rng = make_rng(rng)
    return VisibilityVector((rng.random(config.B) < config.P_b).astype(np.int64))


def subarray_gains(position, visibility, antennas, config, rng):
    """
    Per-subarray average of the antenna path gains, with one shadowing draw per
    subarray; blocked subarrays get 0.
    """
    rng = make_rng(rng)
    # drawn for every subarray so the stream does not depend on the visibility
    chi = rng.normal(0.0, config.sigma_sf_db, config.B)
    distances = cdist(np.atleast_2d(position), antennas)[0].reshape(config.B, config.M_b)
    gains = pathloss(distances, chi[:, None], config).mean(axis=1)
    return np.where(visibility.bits == 1, gains, 0.0)


def drop_user(config, ue_id, position, antennas, rng):
    visibility = sample_visibility(config, rng)
    beta = subarray_gains(position, visibility, antennas, config, rng)
    return UserEquipment(id=ue_id, position=np.asarray(position, dtype=float), visibility=visibility, beta=beta)


def sample_positions(config, K, rng):
    """Area uniform points on the annulus r_i <= |p| <= r_e by inverse CDF on the radius."""
    u = rng.random(K)
    radius = np.sqrt(u * (config.r_e ** 2 - config.r_i ** 2) + config.r_i ** 2)
    angle = rng.uniform(0.0, 2.0 * math.pi, K)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def place_users(config, K, rng, first_id=0):
    """
    Drops K inactive UEs uniformly over the cell, each with a fresh visibility
    region and gain profile.

    ...

    Parameters
    __________
    config: ScenarioConfig
        The cell description.
    K: int
        Number of UEs to drop.
    rng: numpy.random.Generator or int
        Random source (or a seed for a new one).
    first_id: int
        Identity given to the first UE; the others follow consecutively.
    """
    if K < 0:
        raise DomainError('K must be non-negative, got %r' % K)
    rng = make_rng(rng)
    antennas = antenna_positions(config)
    positions = sample_positions(config, K, rng)
    users = [drop_user(config, first_id + i, positions[i], antennas, rng) for i in range(K)]
    logger.debug('Placed %d UEs starting at id %d', K, first_id)
    return users


def exclusivity_trials(P_b, n, B, trials, rng, chunk=10000):
    """
    Monte Carlo estimate of the probability that a tagged UE among n contenders
    has at least one subarray visible to it and to none of the others.

    Returns the estimate and its standard error.
    """
    rng = make_rng(rng)
    hits = 0
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        bits = rng.random((size, n, B)) < P_b
        others = bits[:, 1:, :].any(axis=1)
        hits += int((bits[:, 0, :] & ~others).any(axis=1).sum())
        done += size
    p = hits / float(trials)
    return p, math.sqrt(p * (1.0 - p) / trials)
