#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

"""
Closed-form probabilities, SINRs and rates of grant-based random access in an
XL-MIMO cell. Everything here works in linear scale and is free of side effects.
"""

import dataclasses
import logging
import numpy as np
from xlra.utils import DomainError

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class ContentionSet:
    """The UEs S_t that transmitted RA pilot t (0-based) in a block."""
    pilot_index: int
    members: tuple = ()

    def __len__(self):
        return len(self.members)

    def __contains__(self, ue_id):
        return ue_id in self.members


@dataclasses.dataclass
class DecodeMatrix:
    """
    E[b, j] = 1 when subarray b decoded the j-th candidate; V holds the
    candidates' visibility vectors as columns.
    """
    candidates: list
    E: np.ndarray
    V: np.ndarray

    def column(self, ue_id):
        try:
            return self.candidates.index(ue_id)
        except ValueError:
            raise DomainError('UE %r is not a candidate of this block' % (ue_id,))


@dataclasses.dataclass
class HardeningConstants:
    """alpha_sq[t, b] = (alpha_t^(b))^2 and delta[b] = number of candidates decoded at b."""
    alpha_sq: np.ndarray
    delta: np.ndarray


@dataclasses.dataclass(frozen=True)
class TermInstance:
    """
    One subarray's view of a step-1 decode: the tagged UE's gain, the gains of
    its co-pilot contenders and of the UEs transmitting other pilots.
    """
    beta_k: float
    copilot_betas: tuple
    other_betas: tuple
    rho_k: float
    rho_copilot: tuple
    rho_other: tuple
    tau_ra: int
    noise_power: float
    M_b: int


def gain_matrix(ues, B):
    """Stacks the beta vectors of ues into an n x B array."""
    ues = list(ues)
    if not ues:
        return np.zeros((0, B))
    return np.vstack([ue.beta for ue in ues])


def received_gain(betas, power):
    """sum_j rho beta_j^(b) for every subarray."""
    return power * np.asarray(betas).sum(axis=0)


def p_exclusive_sa(P_b, n):
    """
    Probability P_b (1 - P_b)^(n - 1) that one given subarray is visible to a
    tagged UE and to none of its n - 1 contenders.
    """
    n = np.asarray(n)
    if np.any(n < 1):
        raise DomainError('The contender count must be at least 1, got %r' % (n.min(),))
    if not 0.0 <= P_b <= 1.0:
        raise DomainError('P_b must lie in [0, 1], got %r' % (P_b,))
    p = P_b * (1.0 - P_b) ** (n - 1)
    return float(p) if p.ndim == 0 else p


def p_exclusive_any(P_b, n, B):
    """Probability that at least one of the B subarrays is exclusive to the tagged UE."""
    if B < 1:
        raise DomainError('B must be at least 1, got %r' % (B,))
    return 1.0 - (1.0 - p_exclusive_sa(P_b, n)) ** B


def ul_sinr_table(contender_betas, total_gain, config):
    """
    Step-1 UL SINR of every contender of one pilot at every subarray.

    ...

    Parameters
    __________
    contender_betas: numpy.ndarray
        n x B gains of the UEs sharing the pilot.
    total_gain: numpy.ndarray
        sum over all transmitters of the block of rho * beta, per subarray.
    config: ScenarioConfig

    Returns
    _______
    numpy.ndarray
        n x B SINRs; zero where the contender does not see the subarray.
    """
    betas = np.asarray(contender_betas, dtype=float)
    rho = config.ue_tx_power
    own = rho ** 2 * betas ** 2
    coherent = config.M_b * (own.sum(axis=0) - own)
    pilot = rho * betas.sum(axis=0) + config.noise_power / config.tau_ra
    data = total_gain + config.noise_power
    numerator = config.M_b * own
    denominator = coherent + pilot * data
    sinr = np.zeros_like(betas)
    np.divide(numerator, denominator, out=sinr, where=betas > 0)
    return sinr


def ul_sinr_step1(k, t, contenders, all_tx, b, config):
    """
    UL SINR of the step-1 message of UE k at subarray b: desired power over the
    coherent interference of co-pilot UEs plus the non-coherent interference of
    every transmitter of the block.

    contenders are the UEs that chose pilot t (k included) and all_tx every UE
    transmitting in the block.
    """
    if not 0 <= t < config.tau_ra:
        raise DomainError('Pilot index %r outside 0..%d' % (t, config.tau_ra - 1))
    contenders = list(contenders)
    ids = [ue.id for ue in contenders]
    if k.id not in ids:
        raise DomainError('UE %r is not among the contenders of pilot %r' % (k.id, t))
    if k.beta[b] == 0:
        return 0.0
    total = received_gain(gain_matrix(all_tx, config.B), config.ue_tx_power)
    table = ul_sinr_table(gain_matrix(contenders, config.B), total, config)
    return float(table[ids.index(k.id), b])


def ul_sinr_exclusive(k, b, all_tx, config):
    """Step-1 UL SINR when subarray b is visible to k only among its contenders."""
    beta = k.beta[b]
    if beta == 0:
        return 0.0
    rho = config.ue_tx_power
    total = received_gain(gain_matrix(all_tx, config.B), rho)[b]
    pilot = rho * beta + config.noise_power / config.tau_ra
    return float(config.M_b * (rho ** 2 * beta ** 2) / (pilot * (total + config.noise_power)))


def alpha_squared_vector(contender_betas, config):
    return config.ue_tx_power * config.tau_ra * np.asarray(contender_betas).sum(axis=0) + config.noise_power


def alpha_squared(t, b, contenders, config):
    """Hardening limit sum_i rho tau beta_i^(b) + sigma^2 of ||y_t^(b)||^2 / M_b, contenders being S_t."""
    if not 0 <= t < config.tau_ra:
        raise DomainError('Pilot index %r outside 0..%d' % (t, config.tau_ra - 1))
    return float(alpha_squared_vector(gain_matrix(contenders, config.B), config)[b])


def interference_set(k, b, block):
    """
    UEs whose DL response from subarray b is also beamformed toward k: same
    pilot as k, b visible to both, and decoded at b.
    """
    if k.visibility.bits[b] != 1:
        return set()
    pilot = block.pilot_of[k.id]
    result = set()
    for col, other in enumerate(block.decode.candidates):
        if other == k.id or block.pilot_of[other] != pilot:
            continue
        # E[b, k'] = 1 implies b is visible to k'
        if block.decode.E[b, col] == 1 and block.ues[other].visibility.bits[b] == 1:
            result.add(other)
    return result


def _conventional_weight(block, b, beta, config):
    if not config.dl_alpha_in_interference:
        return beta * block.hardening.delta[b]
    weight = 0.0
    for col, other in enumerate(block.decode.candidates):
        if block.decode.E[b, col] == 1:
            weight += beta / np.sqrt(block.hardening.alpha_sq[block.pilot_of[other], b])
    return weight


def dl_sinr_step2(k, block, config):
    """
    SINR of the precoded step-2 response at candidate k.

    Only subarrays that decoded somebody (delta_b > 0) transmit. The numerator
    collects the power beamformed to k by the subarrays that decoded it; the
    denominator holds directed interference from co-pilot UEs decoded at a
    subarray k also sees, the conventional interference of every precoded
    stream, and noise.
    """
    rho_tau = config.ue_tx_power * config.tau_ra
    col = block.decode.column(k.id)
    pilot = block.pilot_of[k.id]
    desired = directed = conventional = 0.0
    for b in sorted(k.visibility.visible()):
        delta = block.hardening.delta[b]
        if delta == 0:
            continue
        scale = config.bs_tx_power / (config.B * delta)
        beta = k.beta[b]
        desired += block.decode.E[b, col] * scale * rho_tau * beta ** 2 / block.hardening.alpha_sq[pilot, b]
        for other in interference_set(k, b, block):
            directed += scale * rho_tau * beta ** 2 / block.hardening.alpha_sq[block.pilot_of[other], b]
        conventional += scale * _conventional_weight(block, b, beta, config)
    desired *= config.M_b
    directed *= config.M_b
    return float(desired / (directed + conventional + config.noise_power))


def dl_sinr_all(block, config):
    """dl_sinr_step2 for every candidate of the block at once, in candidate order."""
    candidates = block.decode.candidates
    if not candidates:
        return np.zeros(0)
    E = block.decode.E.astype(float)
    V = block.decode.V.astype(float)
    betas = gain_matrix((block.ues[c] for c in candidates), config.B).T
    pilots = np.array([block.pilot_of[c] for c in candidates])
    alpha_sq = block.hardening.alpha_sq[pilots].T
    delta = block.hardening.delta.astype(float)
    scale = np.zeros_like(delta)
    np.divide(config.bs_tx_power, config.B * delta, out=scale, where=delta > 0)
    own = scale[:, None] * config.ue_tx_power * config.tau_ra * betas ** 2 / alpha_sq
    same_pilot = (pilots[:, None] == pilots[None, :]).astype(float)
    interferers = E @ same_pilot - E
    desired = config.M_b * (V * E * own).sum(axis=0)
    directed = config.M_b * (V * interferers * own).sum(axis=0)
    if config.dl_alpha_in_interference:
        weight = (E / np.sqrt(alpha_sq)).sum(axis=1)
    else:
        weight = delta
    conventional = (V * scale[:, None] * betas * weight[:, None]).sum(axis=0)
    return desired / (directed + conventional + config.noise_power)


def zf_sinr_vector(betas, config):
    """
    Large-scale ZF SINR of every active UE given their n x B gains.

    The bracket is clipped at zero: once more UEs share the subarrays than the
    expression supports it turns negative.
    """
    betas = np.asarray(betas, dtype=float)
    if betas.shape[0] == 0:
        return np.zeros(0)
    totals = betas.sum(axis=1)
    if np.any(totals <= 0):
        raise DomainError('An active UE must see at least one subarray')
    ratio = (betas @ betas.T) / totals[None, :]
    interference = ratio.sum(axis=1) - np.diag(ratio)
    bracket = config.M_b * totals - interference
    if np.any(bracket < 0):
        logger.debug('ZF SINR clipped at zero for %d of %d UEs', int((bracket < 0).sum()), len(bracket))
    return config.data_tx_power / config.noise_power * np.maximum(bracket, 0.0)


def zf_data_sinr(k, active, config):
    active = list(active)
    ids = [ue.id for ue in active]
    if k.id not in ids:
        raise DomainError('UE %r is not active' % (k.id,))
    return float(zf_sinr_vector(gain_matrix(active, config.B), config)[ids.index(k.id)])


def spectral_efficiency(mu_ra, mu_pd, phi_ra, tau_pd, config, gamma):
    """
    Spectral efficiency (bit/s/Hz) of a session after mu_ra RA attempts of
    phi_ra channel uses each, lasting mu_pd coherence intervals, with tau_pd
    channel uses of every block spent on payload pilots.
    """
    if tau_pd > config.T:
        raise DomainError('tau_pd = %r exceeds the coherence block T = %r' % (tau_pd, config.T))
    mu_ra = np.asarray(mu_ra, dtype=float)
    if np.any(mu_ra < 1) or mu_pd < 1:
        raise DomainError('mu_ra and mu_pd must be at least 1')
    payload = mu_pd * config.bandwidth_w * config.t_c
    rate = payload / (mu_ra * phi_ra + payload) * (1.0 - tau_pd / float(config.T)) * np.log2(1.0 + np.asarray(gamma))
    return float(rate) if rate.ndim == 0 else rate


def sum_rate(active, per_ue_rates, config):
    """
    W times the sum of the spectral efficiencies of the active UEs (bit/s).
    per_ue_rates is either a sequence aligned with active or a dict keyed by UE
    id covering every active UE.
    """
    active = list(active)
    if isinstance(per_ue_rates, dict):
        missing = [ue_id for ue_id in active if ue_id not in per_ue_rates]
        if missing:
            raise DomainError('No rate for active UEs %r' % (missing,))
        per_ue_rates = [per_ue_rates[ue_id] for ue_id in active]
    elif len(per_ue_rates) != len(active):
        raise DomainError('%d rates for %d active UEs' % (len(per_ue_rates), len(active)))
    return config.bandwidth_w * float(np.sum(per_ue_rates))


def expected_term_powers(instance):
    """
    (mean^2, variance) of the six terms of the step-1 decode statistic.

    ...

    The statistic y_t^H z / sqrt(tau) splits into: the own-gain term, the
    same-index terms of the co-pilot UEs, the co-pilot cross terms, pilot noise
    against co-pilot data, the pilot estimate against UEs of other pilots, and
    the pilot estimate against data noise. Only the first two have a non-zero
    mean given the data symbols.

    Parameters
    __________
    instance: TermInstance

    Returns
    _______
    list
        Six (mean^2, variance) tuples.
    """
    M_b = instance.M_b
    noise = instance.noise_power
    own = instance.rho_k * instance.beta_k
    copilot = np.asarray(instance.rho_copilot, dtype=float) * np.asarray(instance.copilot_betas, dtype=float)
    others = np.asarray(instance.rho_other, dtype=float) * np.asarray(instance.other_betas, dtype=float)
    pilot_gains = np.concatenate([[own], copilot])
    A = pilot_gains.sum()
    D = others.sum()
    pilot_noise = noise / instance.tau_ra
    cross = A ** 2 - np.sum(pilot_gains ** 2)
    return [
        (M_b ** 2 * own ** 2, M_b * own ** 2),
        (M_b ** 2 * np.sum(copilot ** 2), M_b * np.sum(copilot ** 2)),
        (0.0, M_b * cross),
        (0.0, M_b * pilot_noise * A),
        (0.0, M_b * (A + pilot_noise) * D),
        (0.0, M_b * (A + pilot_noise) * noise),
    ]


def ul_sinr_from_terms(terms):
    """Signal mean^2 over every other power, the own-term variance included."""
    signal, own_variance = terms[0]
    interference = own_variance + sum(mean_sq + variance for mean_sq, variance in terms[1:])
    return signal / interference
