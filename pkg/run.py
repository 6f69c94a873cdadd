#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

import logging
import os
from xlra.cli import emit_results, ordering_test, parse_config, record_settings, run_sweep
from xlra.protocols import MSUCRE_XL, NOVR_XL, PROTOCOL_NAMES, SUCRE_XL, ra_overhead

logging.basicConfig(level=logging.INFO)

# The calibrated cell and its sweep; edit the file or pass another one.
config, spec = parse_config(os.path.join(os.path.dirname(os.path.abspath(__file__)), 'docs', 'calibrated.cfg'))

for protocol in PROTOCOL_NAMES:
    print('%-10s %d channel uses per attempt' % (protocol, ra_overhead(protocol, config.tau_ra, config.B)))

result = run_sweep(spec, config)
emit_results(result.table, 'csv', 'results.csv')
record_settings(config, spec, 'results.csv')
print(result.aggregate[['protocol', 'K', 'avg_attempts_mean', 'fail_prob_mean', 'sum_rate_bps_mean', 'ues_per_pdp_mean']])

for better, worse in ((NOVR_XL, MSUCRE_XL), (MSUCRE_XL, SUCRE_XL)):
    wins, pairs, p_value = ordering_test(result.table, better, worse)
    print('%s beats %s in %d of %d paired campaigns (p = %.3g)' % (better, worse, wins, pairs, p_value))
