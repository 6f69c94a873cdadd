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
from xlra.analytics import (ContentionSet, DecodeMatrix, HardeningConstants, alpha_squared_vector,
                            dl_sinr_all, gain_matrix, received_gain, ul_sinr_table)
from xlra.scenario import UeState
from xlra.utils import ConfigError, make_rng

NOVR_XL = 'novr-xl'
SUCRE_XL = 'sucre-xl'
MSUCRE_XL = 'msucre-xl'
PROTOCOL_NAMES = (NOVR_XL, SUCRE_XL, MSUCRE_XL)


@dataclasses.dataclass(frozen=True)
class OverheadModel:
    """
    Channel uses spent by one RA attempt, from the message contents of every
    step. Field sizes are in bits and mcs_efficiency is bits per channel use.
    """
    ra_rnti_bits: int = 16
    ta_bits: int = 8
    c_rnti_bits: int = 16
    cri_bits: int = 48
    id_bits: int = 16
    mcs_efficiency: float = 1.0

    def _uses(self, bits):
        return int(math.ceil(bits / self.mcs_efficiency))

    def step_uses(self, protocol, tau_ra, B):
        """Per-step channel uses; the RA pilots cost tau_ra each time they are sent."""
        if protocol == NOVR_XL:
            return [tau_ra + self._uses(B + self.id_bits),
                    self._uses(self.cri_bits + self.id_bits + self.ta_bits)]
        if protocol in (SUCRE_XL, MSUCRE_XL):
            report = B if protocol == MSUCRE_XL else 0
            return [tau_ra,
                    tau_ra + self._uses(self.ra_rnti_bits + self.ta_bits),
                    tau_ra + self._uses(self.c_rnti_bits + report),
                    self._uses(self.cri_bits + self.c_rnti_bits)]
        raise ConfigError('Unknown protocol %r, expected one of %s' % (protocol, ', '.join(PROTOCOL_NAMES)))

    def channel_uses(self, protocol, tau_ra, B):
        return sum(self.step_uses(protocol, tau_ra, B))


def ra_overhead(protocol, tau_ra, B, model=None):
    """phi_RA of a protocol: 88 + B + tau_ra for NOVR-XL, 104 + 3 tau_ra for SUCRe-XL, 104 + B + 3 tau_ra for mSUCRe-XL."""
    return (model or OverheadModel()).channel_uses(protocol, tau_ra, B)


@dataclasses.dataclass
class RaBlockState:
    """
    Everything the BS learns during one RA block.

    ...

    Attributes
    __________
    contention: list
        One ContentionSet per RA pilot, S_t.
    ues: dict
        UE id -> UserEquipment for every UE that may take part.
    pilot_of: dict
        UE id -> chosen pilot r(k) for every transmitter.
    retransmit: list
        The R_t sets of the SUCRe family, None for a 2-step protocol.
    decode: DecodeMatrix
    hardening: HardeningConstants
    """
    contention: list
    ues: dict = dataclasses.field(default_factory=dict)
    pilot_of: dict = dataclasses.field(default_factory=dict)
    retransmit: list = None
    decode: DecodeMatrix = None
    hardening: HardeningConstants = None

    def __post_init__(self):
        if not self.pilot_of:
            self.pilot_of = {ue_id: cs.pilot_index for cs in self.contention for ue_id in cs.members}

    @property
    def transmitters(self):
        return sorted(self.pilot_of)

    @property
    def retransmitters(self):
        if self.retransmit is None:
            return []
        return sorted(ue_id for cs in self.retransmit for ue_id in cs.members)


@dataclasses.dataclass
class RoundOutcome:
    """successes maps UE id -> PDP identity; failures lists the other transmitters."""
    successes: dict
    failures: list
    block: RaBlockState


def form_contention(eligible_ues, config, rng):
    """
    Draws who transmits in this block and on which pilot.

    Inactive UEs attempt with probability P_a, UEs in backoff retransmit with
    probability backoff_retx_prob; every transmitter picks one of the tau_ra
    pilots uniformly. Sets chosen_pilot on every eligible UE.

    Returns one ContentionSet per pilot.
    """
    rng = make_rng(rng)
    ues = sorted((ue for ue in eligible_ues if ue.state in (UeState.INACTIVE, UeState.BACKOFF)), key=lambda ue: ue.id)
    probability = np.array([config.P_a if ue.state is UeState.INACTIVE else config.backoff_retx_prob for ue in ues])
    transmit = rng.random(len(ues)) < probability
    pilots = rng.integers(config.tau_ra, size=int(transmit.sum()))
    members = [[] for _ in range(config.tau_ra)]
    chosen = iter(pilots.tolist())
    for ue, sends in zip(ues, transmit):
        ue.chosen_pilot = next(chosen) if sends else None
        if sends:
            members[ue.chosen_pilot].append(ue.id)
    return [ContentionSet(t, tuple(ids)) for t, ids in enumerate(members)]


class RandomAccessProtocol(object):
    """
    Base class of the RA protocol engines. A round takes the contention of one
    block, decides which transmitters are admitted and allocates their PDPs.
    Implementations override run_round.

    ...

    Parameters
    __________
    config: ScenarioConfig
        The cell and decoding parameters.
    overheads: OverheadModel
        Message sizes used to price an attempt.
    """
    name = None

    def __init__(self, config, overheads=None):
        self.config = config
        self.overheads = overheads or OverheadModel()
        self.logger = logging.getLogger(str(self.name) + ' protocol ' + str(id(self)))

    @property
    def overhead(self):
        """Channel uses per attempt, whatever its outcome."""
        return self.overheads.channel_uses(self.name, self.config.tau_ra, self.config.B)

    @property
    def exclusive_pdps(self):
        return False

    def run_round(self, block, pool):
        """
        Runs one RA block.

        ...

        Parameters
        __________
        block: RaBlockState
            Contention of the block; filled with the decode results.
        pool: scheduler.PdpPool
            Pool the admitted UEs are scheduled on.

        Returns
        _______
        RoundOutcome
        """
        raise NotImplementedError('Run round not implemented')

    def decode_uplink(self, block, sets):
        """
        Decodes the UL message of every member of sets at every subarray and
        fills the decode matrix and hardening constants of the block. Only the
        members of sets transmit.
        """
        config = self.config
        transmitting = [block.ues[ue_id] for cs in sets for ue_id in cs.members]
        total = received_gain(gain_matrix(transmitting, config.B), config.ue_tx_power)
        alpha_sq = np.full((config.tau_ra, config.B), config.noise_power)
        candidates, columns = [], []
        for cs in sets:
            if not cs.members:
                continue
            betas = gain_matrix((block.ues[ue_id] for ue_id in cs.members), config.B)
            alpha_sq[cs.pilot_index] = alpha_squared_vector(betas, config)
            decoded = ul_sinr_table(betas, total, config) >= config.decode_threshold
            for ue_id, row in zip(cs.members, decoded):
                if row.any():
                    candidates.append(ue_id)
                    columns.append(row)
        if columns:
            E = np.column_stack(columns).astype(np.int64)
            V = np.column_stack([block.ues[c].visibility.bits for c in candidates])
        else:
            E = np.zeros((config.B, 0), dtype=np.int64)
            V = np.zeros((config.B, 0), dtype=np.int64)
        block.decode = DecodeMatrix(candidates, E, V)
        block.hardening = HardeningConstants(alpha_sq, E.sum(axis=1))
        return block.decode

    def respond_downlink(self, block, pool):
        """
        Schedules every candidate, then keeps the PDP only if it decodes the
        precoded response; otherwise the allocation is rolled back.
        """
        successes = {}
        for ue_id, gamma in zip(block.decode.candidates, dl_sinr_all(block, self.config)):
            ue = block.ues[ue_id]
            pdp = pool.allocate(ue.visibility, ue_id, exclusive=self.exclusive_pdps)
            if gamma >= self.config.decode_threshold:
                successes[ue_id] = pdp
            else:
                pool.release(ue_id, ue.visibility)
        failures = [ue_id for ue_id in block.transmitters if ue_id not in successes]
        self.logger.debug('%d transmitters, %d candidates, %d admitted, %d PDPs in use',
                          len(block.transmitters), len(block.decode.candidates), len(successes), len(pool))
        return RoundOutcome(successes, failures, block)


class NovrXl(RandomAccessProtocol):
    """
    Two-step access: every transmitter sends its pilot together with its id and
    visibility vector; any subarray that decodes it gives the BS a channel
    estimate there, and the BS answers with a response precoded from those
    subarrays carrying the PDP chosen by the first-fit scheduler.
    """
    name = NOVR_XL

    def run_round(self, block, pool):
        self.decode_uplink(block, block.contention)
        return self.respond_downlink(block, pool)


class SucreXl(RandomAccessProtocol):
    """
    Four-step strongest-user collision resolution over the XL array.

    After the DL pilot of step 2 every contender knows the total gain of its
    pilot under channel hardening; only a UE holding more than half of it (plus
    sucre_bias) repeats its pilot in step 3. Step 3 and 4 are then decoded like
    the NOVR-XL steps with S_t replaced by R_t. The plain variant does not learn
    visibility regions and gives each admitted UE its own PDP.
    """
    name = SUCRE_XL

    def __init__(self, config, overheads=None, variant='plain'):
        if variant not in ('plain', 'modified'):
            raise ConfigError('Unknown SUCRe-XL variant %r' % (variant,))
        self.variant = variant
        if variant == 'modified':
            self.name = MSUCRE_XL
        super(SucreXl, self).__init__(config, overheads)

    @property
    def exclusive_pdps(self):
        return self.variant == 'plain'

    def strongest_users(self, block):
        config = self.config
        retransmit = []
        for cs in block.contention:
            if not cs.members:
                retransmit.append(ContentionSet(cs.pilot_index, ()))
                continue
            betas = gain_matrix((block.ues[ue_id] for ue_id in cs.members), config.B)
            total = float((alpha_squared_vector(betas, config) - config.noise_power).sum())
            own = config.ue_tx_power * config.tau_ra * betas.sum(axis=1)
            keep = tuple(ue_id for ue_id, gain in zip(cs.members, own) if gain > total / 2.0 + config.sucre_bias)
            retransmit.append(ContentionSet(cs.pilot_index, keep))
        block.retransmit = retransmit
        return retransmit

    def run_round(self, block, pool):
        self.decode_uplink(block, self.strongest_users(block))
        return self.respond_downlink(block, pool)


class ModifiedSucreXl(SucreXl):
    """SUCRe-XL whose step-3 message also reports the visibility vector, enabling PDP sharing."""
    def __init__(self, config, overheads=None):
        super(ModifiedSucreXl, self).__init__(config, overheads, variant='modified')


PROTOCOLS = {NOVR_XL: NovrXl, SUCRE_XL: SucreXl, MSUCRE_XL: ModifiedSucreXl}


def get_protocol(name, config, overheads=None):
    if name not in PROTOCOLS:
        raise ConfigError('Unknown protocol %r, expected one of %s' % (name, ', '.join(PROTOCOL_NAMES)))
    return PROTOCOLS[name](config, overheads)


def _with_population(block, population):
    for ue in population or ():
        block.ues.setdefault(ue.id, ue)
    return block


def novr_round(block, population, pool, config):
    """One NOVR-XL block over population; see NovrXl."""
    return NovrXl(config).run_round(_with_population(block, population), pool)


def sucre_round(block, population, pool, config, variant='plain'):
    """One SUCRe-XL block; variant 'modified' runs mSUCRe-XL."""
    return SucreXl(config, variant=variant).run_round(_with_population(block, population), pool)
