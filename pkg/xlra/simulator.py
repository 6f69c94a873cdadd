#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

import dataclasses
import logging
import math
import numpy as np
import pandas as pd
from xlra.analytics import gain_matrix, spectral_efficiency, sum_rate, ul_sinr_table, zf_sinr_vector
from xlra.protocols import RaBlockState, RandomAccessProtocol, form_contention, get_protocol
from xlra.scenario import UeState, antenna_positions, drop_user, place_users, sample_positions
from xlra.scheduler import PdpPool, release_pdp
from xlra.utils import DomainError, PoolCorruptionError, fail, lin2db, make_rng

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ['block', 'active', 'pdps', 'ues_per_pdp', 'sum_rate_bps', 'successes', 'failures']
SESSION_COLUMNS = ['ue', 'mu_ra', 'mu_pd']


@dataclasses.dataclass
class BlockRecord:
    block: int
    active: int
    pdps: int
    ues_per_pdp: float
    sum_rate_bps: float
    successes: int
    failures: int


@dataclasses.dataclass
class SessionRecord:
    ue: int
    mu_ra: int
    mu_pd: int


class MetricsAccumulator(object):
    """
    Steady-state statistics of a campaign.

    An access cycle is resolved when the UE is admitted or gives up after
    max_attempts; the attempt count of every resolved cycle is kept, and every
    admission also opens a session whose (mu_RA, mu_PD) pair is recorded.
    Nothing is recorded while recording is off (the warm-up).

    ...

    Attributes
    __________
    resolved_attempts: list
        mu_RA of every resolved access cycle, in resolution order.
    successes, failures: int
        Resolved cycles by outcome.
    sessions: list
        One SessionRecord per admitted UE, in admission order.
    records: list
        One BlockRecord per recorded block.
    """
    def __init__(self, max_attempts):
        self.max_attempts = max_attempts
        self.resolved_attempts = []
        self.successes = 0
        self.failures = 0
        self.sessions = []
        self.records = []
        self.recording = True

    def record_resolution(self, attempts, success):
        if not self.recording:
            return
        self.resolved_attempts.append(attempts)
        if success:
            self.successes += 1
        else:
            self.failures += 1

    def record_session(self, ue_id, mu_ra, mu_pd):
        if self.recording:
            self.sessions.append(SessionRecord(ue_id, mu_ra, mu_pd))

    def record_block(self, record):
        if self.recording:
            self.records.append(record)

    @property
    def resolved(self):
        return len(self.resolved_attempts)

    @property
    def avg_attempts(self):
        return sum(self.resolved_attempts) / float(self.resolved) if self.resolved else 0.0

    @property
    def failure_prob(self):
        return self.failures / float(self.resolved) if self.resolved else 0.0

    @property
    def markov_bound(self):
        """avg_attempts / max_attempts, evaluated as one division so that it never rounds below failure_prob."""
        if not self.resolved:
            return 0.0
        return sum(self.resolved_attempts) / float(self.resolved * self.max_attempts)

    def mean(self, field):
        if not self.records:
            return 0.0
        return float(np.mean([getattr(r, field) for r in self.records]))

    def summary(self):
        return {
            'avg_attempts': self.avg_attempts,
            'fail_prob': self.failure_prob,
            'markov_bound': self.markov_bound,
            'sum_rate_bps': self.mean('sum_rate_bps'),
            'mean_active': self.mean('active'),
            'mean_pdps': self.mean('pdps'),
            'ues_per_pdp': self.mean('ues_per_pdp'),
        }

    def to_frame(self):
        """The per-block trace as a DataFrame with TRACE_COLUMNS."""
        return pd.DataFrame([dataclasses.astuple(r) for r in self.records], columns=TRACE_COLUMNS)

    def sessions_frame(self):
        return pd.DataFrame([dataclasses.astuple(s) for s in self.sessions], columns=SESSION_COLUMNS)


class SimulationState(object):
    """
    A population of K UEs with their lifecycle states, the PDP pool, the block
    counter, the random stream and the metrics.

    A UE that gives up is retired and a fresh drop with a new id takes its place.
    """
    def __init__(self, config, K, rng=None):
        if K < 0:
            raise DomainError('K must be non-negative, got %r' % K)
        self.config = config
        self.rng = make_rng(rng)
        self.antennas = antenna_positions(config)
        self.population = {ue.id: ue for ue in place_users(config, K, self.rng)}
        self.next_ue_id = K
        self.pool = PdpPool(config.B)
        self.block = 0
        self.metrics = MetricsAccumulator(config.max_attempts)
        self.retired = []
        self.saturation_warned = False
        self.logger = logging.getLogger('Simulation ' + str(id(self)))

    def by_state(self, state):
        return [ue for ue in self.population.values() if ue.state is state]

    def replace_user(self, ue):
        """Retires ue and drops a new inactive UE in its place."""
        del self.population[ue.id]
        self.retired.append(ue.id)
        position = sample_positions(self.config, 1, self.rng)[0]
        fresh = drop_user(self.config, self.next_ue_id, position, self.antennas, self.rng)
        self.population[fresh.id] = fresh
        self.next_ue_id += 1
        return fresh

    def check_invariants(self):
        active = self.by_state(UeState.ACTIVE)
        if len(active) != self.pool.active_count:
            fail(self.logger, PoolCorruptionError,
                 'Block %d: %d active UEs but %d PDP holders' % (self.block, len(active), self.pool.active_count))
        for ue in active:
            if self.pool.pdp_of(ue.id) != ue.pdp_index:
                fail(self.logger, PoolCorruptionError, 'UE %r records PDP %r, pool says %r'
                     % (ue.id, ue.pdp_index, self.pool.pdp_of(ue.id)))
        for ue in self.population.values():
            if ue.attempts > self.config.max_attempts or ue.state is UeState.FAILED:
                fail(self.logger, PoolCorruptionError, 'UE %r in state %s after %d attempts'
                     % (ue.id, ue.state.name, ue.attempts))
        return self.pool.check_invariants()


def snapshot_sum_rate(state, phi_ra):
    """Instantaneous sum-rate (bit/s) of the active UEs under large-scale ZF."""
    config = state.config
    active = sorted(state.by_state(UeState.ACTIVE), key=lambda ue: ue.id)
    if not active:
        return 0.0
    tau_pd = len(state.pool)
    if tau_pd >= config.T:
        if not state.saturation_warned:
            state.logger.warning('%d PDPs fill the whole coherence block (T = %d); sum-rate reported as 0',
                                 tau_pd, config.T)
            state.saturation_warned = True
        return 0.0
    gamma = zf_sinr_vector(gain_matrix(active, config.B), config)
    mu_ra = np.array([ue.mu_ra for ue in active])
    rates = spectral_efficiency(mu_ra, config.mu_pd, phi_ra, tau_pd, config, gamma)
    return sum_rate([ue.id for ue in active], rates, config)


def run_block(state, config, protocol):
    """
    Advances the campaign by one RA block.

    ...

    Inactive and backoff UEs contend; every transmission counts an attempt.
    Admitted UEs become active for mu_pd blocks, UEs reaching max_attempts give
    up and are replaced, the rest back off. Sessions admitted in earlier blocks
    are then counted down and released at zero, and the block is recorded.

    Parameters
    __________
    state: SimulationState
    config: ScenarioConfig
    protocol: protocols.RandomAccessProtocol

    Returns
    _______
    SimulationState
        The same state, advanced.
    """
    running = [ue for ue in state.population.values() if ue.state is UeState.ACTIVE]
    eligible = [ue for ue in state.population.values() if ue.state in (UeState.INACTIVE, UeState.BACKOFF)]
    contention = form_contention(eligible, config, state.rng)
    block = RaBlockState(contention, dict(state.population))
    for ue_id in block.transmitters:
        state.population[ue_id].attempts += 1

    outcome = protocol.run_round(block, state.pool)
    for ue_id, pdp in outcome.successes.items():
        ue = state.population[ue_id]
        ue.state = UeState.ACTIVE
        ue.pdp_index = pdp
        ue.remaining_intervals = config.mu_pd
        ue.mu_ra = ue.attempts
        state.metrics.record_resolution(ue.attempts, True)
        state.metrics.record_session(ue.id, ue.mu_ra, config.mu_pd)
    for ue_id in outcome.failures:
        ue = state.population[ue_id]
        if ue.attempts >= config.max_attempts:
            ue.state = UeState.FAILED
            state.metrics.record_resolution(ue.attempts, False)
            state.replace_user(ue)
        else:
            ue.state = UeState.BACKOFF

    for ue in running:
        ue.remaining_intervals -= 1
        if ue.remaining_intervals == 0:
            release_pdp(state.pool, ue.id, ue.visibility)
            ue.state = UeState.INACTIVE
            ue.attempts = 0
            ue.mu_ra = 0
            ue.pdp_index = None

    active = len(state.by_state(UeState.ACTIVE))
    state.metrics.record_block(BlockRecord(
        block=state.block, active=active, pdps=len(state.pool), ues_per_pdp=state.pool.ues_per_pdp(),
        sum_rate_bps=snapshot_sum_rate(state, protocol.overhead),
        successes=len(outcome.successes), failures=len(outcome.failures)))
    state.logger.debug('Block %d: %d transmitters, %d admitted, %d active on %d PDPs', state.block,
                       len(block.transmitters), len(outcome.successes), active, len(state.pool))
    state.block += 1
    return state


def run_campaign(config, K, n_blocks, protocol, seed, warmup=100, debug=False):
    """
    Runs warmup + n_blocks sequential blocks over a fresh population of K UEs.
    Only the last n_blocks are recorded. With debug set the pool and lifecycle
    invariants are re-checked after every block.

    protocol is a protocol name or a RandomAccessProtocol. Returns the
    MetricsAccumulator; identical arguments give identical metrics.
    """
    if n_blocks < 0 or warmup < 0:
        raise DomainError('n_blocks and warmup must be non-negative, got %r and %r' % (n_blocks, warmup))
    if not isinstance(protocol, RandomAccessProtocol):
        protocol = get_protocol(protocol, config)
    state = SimulationState(config, K, seed)
    logger.info('Campaign %s K=%d seed=%r: %d warm-up + %d blocks', protocol.name, K, seed, warmup, n_blocks)
    state.metrics.recording = False
    for n in range(warmup + n_blocks):
        if n == warmup:
            state.metrics.recording = True
        run_block(state, config, protocol)
        if debug:
            state.check_invariants()
    metrics = state.metrics
    logger.info('Campaign %s K=%d seed=%r done: %d resolved, avg attempts %.4g, failure prob %.4g',
                protocol.name, K, seed, metrics.resolved, metrics.avg_attempts, metrics.failure_prob)
    return metrics


def calibrate(config, n, rng=None):
    """
    Step-1 UL SINR (dB) of n lone UEs on the cell edge at their best subarray.
    A UE that sees no subarray reports -inf.
    """
    rng = make_rng(rng)
    antennas = antenna_positions(config)
    angle = rng.uniform(0.0, 2.0 * math.pi, n)
    positions = config.r_e * np.column_stack([np.cos(angle), np.sin(angle)])
    best = np.zeros(n)
    for i, position in enumerate(positions):
        ue = drop_user(config, i, position, antennas, rng)
        betas = ue.beta[None, :]
        best[i] = ul_sinr_table(betas, config.ue_tx_power * ue.beta, config).max()
    return lin2db(best)
