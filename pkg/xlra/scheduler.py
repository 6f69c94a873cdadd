#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

import logging
import numpy as np
from xlra.scenario import VisibilityVector
from xlra.utils import DomainError, PoolCorruptionError, fail


def _as_bits(v):
    if isinstance(v, VisibilityVector):
        return v.bits
    return np.asarray(v, dtype=np.int64)


class PdpPool(object):
    """
    The payload data pilots in use and the combined visibility region of the
    UEs sharing each of them.

    Row j of F is the element-wise sum of the visibility vectors of the UEs on
    PDP j. UEs share a PDP only when their visibility regions are disjoint, so
    every entry of F stays in {0, 1}. A row that drops to zero is removed and its
    PDP retired; live PDPs keep their identity.

    ...

    Attributes
    __________
    B: int
        Number of subarrays (row length of F).
    rows: dict
        PDP identity -> combined visibility row, in creation order.
    assignments: dict
        PDP identity -> set of UE ids holding it.
    next_pdp_id: int
        Identity the next fresh PDP will get.
    """
    def __init__(self, B):
        self.B = B
        self.rows = {}
        self.assignments = {}
        self.holders = {}
        self.next_pdp_id = 0
        self.logger = logging.getLogger('PDP Pool ' + str(id(self)))

    @property
    def F(self):
        if not self.rows:
            return np.zeros((0, self.B), dtype=np.int64)
        return np.vstack(list(self.rows.values()))

    @property
    def active_count(self):
        return len(self.holders)

    def __len__(self):
        return len(self.rows)

    def ues_per_pdp(self):
        return self.active_count / float(len(self)) if self.rows else 0.0

    def pdp_of(self, ue_id):
        return self.holders[ue_id][0]

    def find_row(self, bits):
        """First row, in creation order, orthogonal to bits; None when there is none."""
        for pdp, row in self.rows.items():
            if int(np.dot(row, bits)) == 0:
                return pdp
        return None

    def allocate(self, v_k, ue_id, exclusive=False):
        """Gives the UE the first orthogonal PDP, or a fresh one when none fits or exclusive is set."""
        bits = _as_bits(v_k)
        if not bits.any():
            raise DomainError('UE %r has an empty visibility region and cannot be scheduled' % (ue_id,))
        if ue_id in self.holders:
            raise DomainError('UE %r already holds PDP %r' % (ue_id, self.holders[ue_id][0]))
        pdp = None if exclusive else self.find_row(bits)
        if pdp is None:
            pdp = self.next_pdp_id
            self.next_pdp_id += 1
            self.rows[pdp] = bits.copy()
            self.assignments[pdp] = set()
        else:
            self.rows[pdp] = self.rows[pdp] + bits
        if np.any(self.rows[pdp] > 1):
            fail(self.logger, PoolCorruptionError, 'PDP %r combined VR %r has overlapping members' % (pdp, self.rows[pdp]))
        self.assignments[pdp].add(ue_id)
        self.holders[ue_id] = (pdp, bits.copy())
        self.logger.debug('UE %r -> PDP %r (%d PDPs in use)', ue_id, pdp, len(self.rows))
        return pdp

    def release(self, ue_id, v_k):
        if ue_id not in self.holders:
            raise DomainError('UE %r holds no PDP' % (ue_id,))
        pdp, _ = self.holders.pop(ue_id)
        row = self.rows[pdp] - _as_bits(v_k)
        if np.any(row < 0):
            fail(self.logger, PoolCorruptionError, 'Releasing UE %r drives PDP %r row negative: %r' % (ue_id, pdp, row))
        self.assignments[pdp].discard(ue_id)
        if row.any():
            self.rows[pdp] = row
        elif self.assignments[pdp]:
            fail(self.logger, PoolCorruptionError, 'PDP %r has a null row but holders %r' % (pdp, sorted(self.assignments[pdp])))
        else:
            del self.rows[pdp]
            del self.assignments[pdp]
            self.logger.debug('PDP %r retired', pdp)
        return pdp

    def check_invariants(self):
        """Recomputes F from the holders and checks disjointness and the absence of null rows."""
        rebuilt = {}
        for ue_id, (pdp, bits) in self.holders.items():
            if ue_id not in self.assignments.get(pdp, ()):
                fail(self.logger, PoolCorruptionError, 'UE %r missing from the assignments of PDP %r' % (ue_id, pdp))
            rebuilt[pdp] = rebuilt.get(pdp, 0) + bits
        if set(rebuilt) != set(self.rows):
            fail(self.logger, PoolCorruptionError, 'PDPs %r do not match rebuilt %r' % (sorted(self.rows), sorted(rebuilt)))
        for pdp, row in self.rows.items():
            if not np.array_equal(row, rebuilt[pdp]):
                fail(self.logger, PoolCorruptionError, 'PDP %r row %r differs from members sum %r' % (pdp, row, rebuilt[pdp]))
            if not row.any() or np.any((row != 0) & (row != 1)):
                fail(self.logger, PoolCorruptionError, 'PDP %r row %r is null or not binary' % (pdp, row))
        return True

    def dump(self):
        """One line per PDP: identity, combined VR and holders."""
        lines = []
        for pdp, row in self.rows.items():
            members = ','.join(str(u) for u in sorted(self.assignments[pdp]))
            lines.append('pdp=%d vr=%s ues=%s' % (pdp, ''.join(str(int(b)) for b in row), members))
        return '\n'.join(lines)


def allocate_pdp(pool, v_k, ue_id, exclusive=False):
    """
    First-fit PDP allocation.

    Scans the PDPs in creation order and gives the UE the first one whose
    combined visibility region is orthogonal to v_k, adding v_k to it; when none
    fits a new PDP with row v_k is appended. With exclusive set the scan is
    skipped and the UE always gets a fresh PDP.

    Returns the PDP identity.
    """
    return pool.allocate(v_k, ue_id, exclusive)


def release_pdp(pool, ue_id, v_k):
    """Subtracts v_k from the UE's PDP row and retires the PDP once the row is null."""
    pool.release(ue_id, v_k)
