#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

from context import xlra
from xlra.cli import *
from xlra.protocols import MSUCRE_XL, NOVR_XL, PROTOCOL_NAMES, SUCRE_XL
from xlra.scenario import ScenarioConfig
from xlra.utils import ConfigError
import json
import os
import tempfile
import unittest
import pandas as pd


class TestConfigFiles(unittest.TestCase):
    def test_empty_gives_defaults(self):
        config, spec = parse_config_text('')
        self.assertEqual(config, ScenarioConfig())
        self.assertEqual(spec, SweepSpec())

    def test_out_of_range(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config_text('P_b = 1.5')
        self.assertIn('P_b', str(ctx.exception))
        self.assertIn('upper bound', str(ctx.exception))

    def test_bad_lines(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config_text('P_a = 0.1\nlambda = 3', source='cell.cfg')
        self.assertIn('lambda', str(ctx.exception))
        self.assertIn('cell.cfg:2', str(ctx.exception))
        self.assertRaises(ConfigError, parse_config_text, 'B = 10\nB = 20')
        self.assertRaises(ConfigError, parse_config_text, 'B 10')
        self.assertRaises(ConfigError, parse_config_text, 'B = ten')
        self.assertRaises(ConfigError, parse_config_text, 'dl_alpha_in_interference = maybe')
        self.assertRaises(ConfigError, parse_config_text, 'protocols = aloha')

    def test_comments_and_lists(self):
        text = '# crowded cell\nP_b = 0.3  # half-blocked\n\nk_values = 500, 1000,\nprotocols = novr-xl\n' \
               'dl_alpha_in_interference = yes\n'
        config, spec = parse_config_text(text)
        self.assertEqual(config.P_b, 0.3)
        self.assertTrue(config.dl_alpha_in_interference)
        self.assertEqual(spec.k_values, (500, 1000))
        self.assertEqual(spec.protocols, (NOVR_XL,))

    def test_round_trip(self):
        config = ScenarioConfig(P_b=0.25, B=20, tau_ra=16, sucre_bias=0.5, dl_alpha_in_interference=True)
        spec = SweepSpec(protocols=(MSUCRE_XL, NOVR_XL), k_values=(100, 300), seeds=(1, 2, 3), n_blocks=50,
                         format='json-lines')
        self.assertEqual(parse_config_text(format_config(config, spec)), (config, spec))
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, 'cell.cfg')
            with open(path, 'w') as handle:
                handle.write(format_config(config))
            self.assertEqual(parse_config(path), (config, SweepSpec()))
            self.assertRaises(OSError, parse_config, os.path.join(folder, 'missing.cfg'))

    def test_shipped_calibration(self):
        path = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'docs', 'calibrated.cfg')
        config, spec = parse_config(path)
        self.assertEqual(config, ScenarioConfig())
        self.assertEqual(config.ue_tx_power, 1e-3)
        self.assertIn(2000, spec.k_values)
        self.assertEqual(len(spec.seeds), 10)
        self.assertEqual(set(spec.protocols), set(PROTOCOL_NAMES))

    def test_sweep_spec(self):
        self.assertRaises(ConfigError, SweepSpec, k_values=())
        self.assertRaises(ConfigError, SweepSpec, k_values=(0,))
        self.assertRaises(ConfigError, SweepSpec, format='xml')
        self.assertEqual(SweepSpec().replace(seeds=None, n_blocks=7).n_blocks, 7)


class TestEmit(unittest.TestCase):
    def setUp(self):
        self.folder = tempfile.TemporaryDirectory()
        self.row = {'protocol': NOVR_XL, 'K': 2000, 'seed': 0, 'avg_attempts': 1.23456789, 'fail_prob': 0.001,
                    'markov_bound': 0.123456789, 'sum_rate_bps': 1.5e9, 'mean_active': 180.25,
                    'mean_pdps': 40.5, 'ues_per_pdp': 4.45}

    def tearDown(self):
        self.folder.cleanup()

    def path(self, name):
        return os.path.join(self.folder.name, name)

    def read(self, name):
        with open(self.path(name)) as handle:
            return handle.read()

    def test_empty_csv_is_header(self):
        emit_results(pd.DataFrame(columns=RESULT_COLUMNS), 'csv', self.path('empty.csv'))
        self.assertEqual(self.read('empty.csv').strip(), ','.join(RESULT_COLUMNS))
        emit_results(pd.DataFrame(columns=RESULT_COLUMNS), 'json-lines', self.path('empty.jsonl'))
        self.assertEqual(self.read('empty.jsonl'), '')

    def test_csv_row(self):
        emit_results(pd.DataFrame([self.row]), 'csv', self.path('one.csv'))
        table = pd.read_csv(self.path('one.csv'))
        self.assertEqual(list(table.columns), RESULT_COLUMNS)
        self.assertEqual(table['protocol'][0], NOVR_XL)
        self.assertEqual(table['K'][0], 2000)
        self.assertAlmostEqual(table['avg_attempts'][0], 1.23457)
        self.assertEqual(table['sum_rate_bps'][0], 1.5e9)

    def test_json_lines(self):
        emit_results(pd.DataFrame([self.row, dict(self.row, seed=1)]), 'json-lines', self.path('rows.jsonl'))
        lines = self.read('rows.jsonl').splitlines()
        self.assertEqual(len(lines), 2)
        record = json.loads(lines[1])
        self.assertEqual(list(record), RESULT_COLUMNS)
        self.assertEqual(record['seed'], 1)
        self.assertEqual(record['markov_bound'], 0.123457)

    def test_reproducible_bytes(self):
        table = pd.DataFrame([self.row])
        for fmt in FORMATS:
            emit_results(table, fmt, self.path('a'))
            emit_results(table, fmt, self.path('b'))
            self.assertEqual(self.read('a'), self.read('b'))

    def test_unknown_format(self):
        self.assertRaises(ConfigError, emit_results, pd.DataFrame([self.row]), 'xml', self.path('x'))


class TestSweep(unittest.TestCase):
    def test_cardinality(self):
        spec = SweepSpec(k_values=(30, 60), seeds=(0, 1), n_blocks=5, warmup=0)
        result = run_sweep(spec, ScenarioConfig(), progress=False)
        self.assertEqual(len(result.table), 12)
        self.assertEqual(list(result.table.columns), RESULT_COLUMNS)
        self.assertEqual(list(result.table['protocol'].unique()), list(PROTOCOL_NAMES))
        self.assertEqual(list(result.table['K'][:4]), [30, 30, 60, 60])
        self.assertTrue((result.table['markov_bound'] >= result.table['fail_prob']).all())
        self.assertEqual(len(result.aggregate), 6)
        self.assertTrue((result.aggregate['seeds'] == 2).all())
        self.assertIn('sum_rate_bps_se', result.aggregate.columns)

    def test_aggregate_empty(self):
        self.assertTrue(aggregate(pd.DataFrame(columns=RESULT_COLUMNS)).empty)

    def test_ordering(self):
        rows = []
        for seed in range(10):
            rows.append({'protocol': NOVR_XL, 'K': 100, 'seed': seed, 'sum_rate_bps': 2.0 + seed})
            rows.append({'protocol': SUCRE_XL, 'K': 100, 'seed': seed, 'sum_rate_bps': 1.0 + seed})
        rows.append({'protocol': SUCRE_XL, 'K': 100, 'seed': 99, 'sum_rate_bps': 50.0})
        table = pd.DataFrame(rows)
        wins, pairs, p = ordering_test(table, NOVR_XL, SUCRE_XL)
        self.assertEqual((wins, pairs), (10, 10))
        self.assertAlmostEqual(p, 0.5 ** 10)
        self.assertEqual(ordering_test(table, SUCRE_XL, NOVR_XL)[0], 0)
        self.assertEqual(ordering_test(table, NOVR_XL, NOVR_XL)[1:], (0, 1.0))


class TestOperatingPoint(unittest.TestCase):
    """The shipped calibration at K = 2000, B = 10, P_b = 0.5 over ten seeds."""
    @classmethod
    def setUpClass(cls):
        spec = SweepSpec(k_values=(2000,), seeds=tuple(range(10)), n_blocks=200, warmup=100)
        cls.table = run_sweep(spec, ScenarioConfig(), progress=False).table

    def column(self, protocol, metric):
        return self.table[self.table['protocol'] == protocol].set_index('seed')[metric]

    def test_sum_rate_ordering(self):
        for better, worse in ((NOVR_XL, MSUCRE_XL), (MSUCRE_XL, SUCRE_XL)):
            wins, pairs, p = ordering_test(self.table, better, worse)
            self.assertLess(p, 0.05, '%s over %s: %d of %d' % (better, worse, wins, pairs))

    def test_novr_needs_fewer_attempts_every_seed(self):
        for metric in ('avg_attempts', 'fail_prob'):
            self.assertTrue((self.column(NOVR_XL, metric) < self.column(SUCRE_XL, metric)).all(), metric)

    def test_reference_levels(self):
        for protocol, attempts, failure in ((NOVR_XL, 6.363, 0.5505), (SUCRE_XL, 8.064, 0.7393)):
            self.assertLess(abs(self.column(protocol, 'avg_attempts').mean() / attempts - 1.0), 0.2, protocol)
            self.assertLess(abs(self.column(protocol, 'fail_prob').mean() / failure - 1.0), 0.2, protocol)

    def test_bounds_and_sharing(self):
        self.assertTrue((self.table['markov_bound'] >= self.table['fail_prob']).all())
        self.assertTrue((self.column(SUCRE_XL, 'ues_per_pdp') <= 1.0).all())
        self.assertGreater(self.column(NOVR_XL, 'ues_per_pdp').mean(), 1.0)


class TestTables(unittest.TestCase):
    def test_exclusivity_table(self):
        table = exclusivity_table(0.5)
        self.assertEqual(len(table), 120)
        self.assertTrue((table['p_exclusive'].diff()[table['contenders'] > 1] <= 0).all())
        table = exclusivity_table(0.5, b_values=(5,), max_contenders=3, trials=2000)
        self.assertIn('mc_se', table.columns)

    def test_overhead_table(self):
        table = overhead_table(ScenarioConfig())
        self.assertEqual(dict(zip(table['protocol'], table['channel_uses'])),
                         {SUCRE_XL: 134, MSUCRE_XL: 144, NOVR_XL: 108})


class TestMain(unittest.TestCase):
    def setUp(self):
        self.folder = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.folder.cleanup()

    def path(self, name):
        return os.path.join(self.folder.name, name)

    def test_overheads(self):
        self.assertEqual(main(['overheads', '--out', self.path('o.csv')]), 0)
        table = pd.read_csv(self.path('o.csv'))
        self.assertEqual(list(table['channel_uses']), [108, 134, 144])

    def test_exclusivity(self):
        self.assertEqual(main(['exclusivity', '--out', self.path('e.csv')]), 0)
        self.assertEqual(len(pd.read_csv(self.path('e.csv'))), 120)

    def test_calibrate(self):
        self.assertEqual(main(['calibrate', '--samples', '100', '--out', self.path('c.csv')]), 0)
        table = pd.read_csv(self.path('c.csv'))
        self.assertIn('p50', list(table['statistic']))

    def test_run_with_trace(self):
        config = self.path('cell.cfg')
        with open(config, 'w') as handle:
            handle.write('P_a = 0.05\n')
        argv = ['run', '--config', config, '--protocol', 'msucre-xl', '--k', '80', '--seed', '3',
                '--blocks', '6', '--warmup', '2', '--out', self.path('r.csv'), '--trace', self.path('t.csv')]
        self.assertEqual(main(argv), 0)
        row = pd.read_csv(self.path('r.csv'))
        self.assertEqual(list(row.columns), RESULT_COLUMNS)
        self.assertEqual((row['protocol'][0], row['K'][0], row['seed'][0]), (MSUCRE_XL, 80, 3))
        trace = pd.read_csv(self.path('t.csv'))
        self.assertEqual(list(trace['block']), list(range(2, 8)))

    def test_sweep_summary(self):
        argv = ['sweep', '--protocol', 'novr-xl,sucre-xl', '--k', '40', '--seed', '0,1', '--blocks', '3',
                '--warmup', '0', '--format', 'json-lines', '--out', self.path('s.jsonl'),
                '--summary', self.path('agg.csv')]
        self.assertEqual(main(argv), 0)
        with open(self.path('s.jsonl')) as handle:
            self.assertEqual(len(handle.read().splitlines()), 4)
        self.assertEqual(len(pd.read_csv(self.path('agg.csv'))), 2)
        self.assertTrue(os.path.exists(self.path('agg.csv.cfg')))
        self.assertTrue(os.path.exists(self.path('s.jsonl.cfg')))

    def test_settings_sidecar(self):
        config = self.path('cell.cfg')
        with open(config, 'w') as handle:
            handle.write('ue_tx_power = 0.002\nP_b = 0.4\n')
        argv = ['run', '--config', config, '--k', '50', '--seed', '2', '--blocks', '4', '--warmup', '1',
                '--out', self.path('r.csv'), '--sessions', self.path('sessions.csv')]
        self.assertEqual(main(argv), 0)
        settings, spec = parse_config(self.path('r.csv.cfg'))
        self.assertEqual(settings, ScenarioConfig(ue_tx_power=0.002, P_b=0.4))
        self.assertEqual((spec.k_values, spec.seeds, spec.n_blocks, spec.warmup), ((50,), (2,), 4, 1))
        sessions = pd.read_csv(self.path('sessions.csv'))
        self.assertEqual(list(sessions.columns), ['ue', 'mu_ra', 'mu_pd'])
        self.assertTrue((sessions['mu_pd'] == settings.mu_pd).all())
        self.assertEqual(main(['overheads', '--out', self.path('o.csv')]), 0)
        self.assertEqual(parse_config(self.path('o.csv.cfg'))[0], ScenarioConfig())

    def test_settings_logged_without_path(self):
        with self.assertLogs('xlra.cli', level='INFO') as logs:
            self.assertIsNone(record_settings(ScenarioConfig(B=20)))
        self.assertIn('B = 20', logs.output[0])

    def test_errors_exit_one(self):
        self.assertEqual(main(['run', '--config', self.path('missing.cfg')]), 1)
        self.assertEqual(main(['run', '--protocol', 'aloha', '--out', self.path('x.csv')]), 1)


if __name__ == '__main__':
    unittest.main()
