#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

"""
Command line front end: flat key-value configuration files, campaign sweeps
over protocols, K values and seeds, and CSV / JSON-lines result writers.
"""

import argparse
import concurrent.futures
import dataclasses
import logging
import sys
import numpy as np
import pandas as pd
from scipy.stats import binomtest
from tqdm import tqdm
from xlra.analytics import p_exclusive_any
from xlra.protocols import PROTOCOL_NAMES, ra_overhead
from xlra.scenario import ScenarioConfig, exclusivity_trials
from xlra.simulator import calibrate, run_campaign
from xlra.utils import ConfigError, XlraError

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['protocol', 'K', 'seed', 'avg_attempts', 'fail_prob', 'markov_bound',
                  'sum_rate_bps', 'mean_active', 'mean_pdps', 'ues_per_pdp']
METRIC_COLUMNS = RESULT_COLUMNS[3:]
FORMATS = ('csv', 'json-lines')
TRUE_WORDS = ('true', 'yes', 'on', '1')
FALSE_WORDS = ('false', 'no', 'off', '0')


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """
    The campaigns of a sweep: every (protocol, K, seed) combination.

    ...

    Attributes
    __________
    protocols: tuple
        Protocol names, in the order rows are emitted.
    k_values: tuple
        Population sizes K, all positive.
    seeds: tuple
        One campaign per seed.
    n_blocks, warmup: int
        Recorded and discarded blocks of every campaign.
    output: str
        Result path; None writes to standard output.
    format: str
        'csv' or 'json-lines'.
    """
    protocols: tuple = PROTOCOL_NAMES
    k_values: tuple = (2000,)
    seeds: tuple = (0,)
    n_blocks: int = 10000
    warmup: int = 100
    output: str = None
    format: str = 'csv'

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ('protocols', 'k_values', 'seeds'):
            if not getattr(self, name):
                raise ConfigError('%s must not be empty' % name)
        unknown = [p for p in self.protocols if p not in PROTOCOL_NAMES]
        if unknown:
            raise ConfigError('Unknown protocol %r, expected one of %s' % (unknown[0], ', '.join(PROTOCOL_NAMES)))
        if any(k <= 0 for k in self.k_values):
            raise ConfigError('k_values = %r violates lower bound > 0' % (self.k_values,))
        if self.n_blocks < 0 or self.warmup < 0:
            raise ConfigError('n_blocks and warmup violate lower bound >= 0')
        if self.format not in FORMATS:
            raise ConfigError('format = %r is not one of %s' % (self.format, ', '.join(FORMATS)))

    def replace(self, **changes):
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclasses.dataclass
class SweepResult:
    """Per-campaign rows and their per-(protocol, K) mean and standard error across seeds."""
    table: pd.DataFrame
    aggregate: pd.DataFrame


CONFIG_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}
SWEEP_TYPES = {'protocols': [str], 'k_values': [int], 'seeds': [int],
               'n_blocks': int, 'warmup': int, 'output': str, 'format': str}


def _convert(key, text, kind):
    try:
        if isinstance(kind, list):
            return tuple(kind[0](item.strip()) for item in text.split(',') if item.strip())
        if kind is bool:
            if text.lower() in TRUE_WORDS:
                return True
            if text.lower() in FALSE_WORDS:
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError:
        raise ConfigError('Cannot parse %s = %r' % (key, text))


def parse_config_text(text, source='<string>'):
    """Parses `key = value` lines into a ScenarioConfig and a SweepSpec."""
    scenario, sweep = {}, {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError('%s:%d: expected `key = value`, got %r' % (source, number, line))
        key, value = (part.strip() for part in line.split('=', 1))
        if key in CONFIG_TYPES:
            target, kind = scenario, CONFIG_TYPES[key]
        elif key in SWEEP_TYPES:
            target, kind = sweep, SWEEP_TYPES[key]
        else:
            raise ConfigError('%s:%d: unknown key %r' % (source, number, key))
        if key in target:
            raise ConfigError('%s:%d: key %r given twice' % (source, number, key))
        target[key] = _convert(key, value, kind)
    return ScenarioConfig(**scenario), SweepSpec(**sweep)


def parse_config(path):
    """
    Reads a flat configuration file. Omitted keys keep their defaults; unknown
    keys and out-of-range values raise ConfigError.

    ...

    Parameters
    __________
    path: str
        File of `key = value` lines; `#` starts a comment.

    Returns
    _______
    (ScenarioConfig, SweepSpec)
    """
    with open(path) as handle:
        return parse_config_text(handle.read(), source=path)


def format_config(config, spec=None):
    """Serialises config (and spec) in the format parse_config reads back."""
    lines = []
    for name, kind in CONFIG_TYPES.items():
        value = getattr(config, name)
        if kind is bool:
            lines.append('%s = %s' % (name, 'true' if value else 'false'))
        else:
            lines.append('%s = %r' % (name, value))
    if spec is not None:
        for name, kind in SWEEP_TYPES.items():
            value = getattr(spec, name)
            if value is None:
                continue
            if isinstance(kind, list):
                value = ', '.join(str(v) for v in value)
            lines.append('%s = %s' % (name, value))
    return '\n'.join(lines) + '\n'


def record_settings(config, spec=None, path=None):
    """
    Keeps the settings behind a result next to it: `<path>.cfg` in the format
    parse_config reads, or an info log line when results go to standard output.
    Returns the sidecar path, if any.
    """
    text = format_config(config, spec)
    if path is None:
        logger.info('Settings: %s', '; '.join(text.splitlines()))
        return None
    sidecar = path + '.cfg'
    with open(sidecar, 'w') as handle:
        handle.write(text)
    return sidecar


def run_cell(cell):
    """Runs one (protocol, K, seed) campaign and returns its result row."""
    config, protocol, K, seed, n_blocks, warmup = cell
    metrics = run_campaign(config, K, n_blocks, protocol, seed, warmup=warmup)
    row = {'protocol': protocol, 'K': K, 'seed': seed}
    row.update(metrics.summary())
    return row


def _sorted_table(rows, protocols):
    table = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    order = {p: i for i, p in enumerate(protocols)}
    table = table.assign(_order=table['protocol'].map(order))
    table = table.sort_values(['_order', 'K', 'seed'], kind='mergesort').drop(columns='_order')
    return table.reset_index(drop=True)


def aggregate(table, protocols=PROTOCOL_NAMES):
    """Mean and standard error across seeds of every metric, per (protocol, K)."""
    if table.empty:
        columns = ['protocol', 'K', 'seeds'] + [m + suffix for m in METRIC_COLUMNS for suffix in ('_mean', '_se')]
        return pd.DataFrame(columns=columns)
    rows = []
    for (protocol, K), group in table.groupby(['protocol', 'K'], sort=False):
        row = {'protocol': protocol, 'K': K, 'seeds': len(group)}
        for metric in METRIC_COLUMNS:
            row[metric + '_mean'] = group[metric].mean()
            row[metric + '_se'] = group[metric].sem() if len(group) > 1 else 0.0
        rows.append(row)
    result = pd.DataFrame(rows)
    order = {p: i for i, p in enumerate(protocols)}
    result = result.assign(_order=result['protocol'].map(order))
    return result.sort_values(['_order', 'K'], kind='mergesort').drop(columns='_order').reset_index(drop=True)


def run_sweep(spec, config=None, jobs=1, progress=True):
    """
    Runs every campaign of spec, on jobs worker processes when jobs > 1.

    Rows come back sorted by the protocol order of spec, then K, then seed,
    whatever order the campaigns finish in.
    """
    config = config or ScenarioConfig()
    cells = [(config, protocol, K, seed, spec.n_blocks, spec.warmup)
             for protocol in spec.protocols for K in spec.k_values for seed in spec.seeds]
    logger.info('Sweep of %d campaigns on %d worker(s)', len(cells), jobs)
    bar = tqdm(total=len(cells), disable=not progress, desc='campaigns')
    rows = []
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
            for row in executor.map(run_cell, cells):
                rows.append(row)
                bar.update(1)
    else:
        for cell in cells:
            rows.append(run_cell(cell))
            bar.update(1)
    bar.close()
    table = _sorted_table(rows, spec.protocols)
    return SweepResult(table, aggregate(table, spec.protocols))


def ordering_test(table, better, worse, metric='sum_rate_bps'):
    """
    One-sided sign test that protocol better beats protocol worse on metric,
    pairing campaigns by (K, seed). Ties are dropped.

    Returns (wins, pairs, p-value).
    """
    left = table[table['protocol'] == better].set_index(['K', 'seed'])[metric]
    right = table[table['protocol'] == worse].set_index(['K', 'seed'])[metric]
    left, right = left.align(right, join='inner')
    untied = left != right
    wins = int((left[untied] > right[untied]).sum())
    pairs = int(untied.sum())
    if pairs == 0:
        return wins, pairs, 1.0
    return wins, pairs, float(binomtest(wins, pairs, 0.5, alternative='greater').pvalue)


def _round_significant(table, digits=6):
    table = table.copy()
    for column in table.columns:
        if pd.api.types.is_float_dtype(table[column]):
            table[column] = [float('%.*g' % (digits, v)) for v in table[column]]
    return table


def emit_results(table, fmt, path=None):
    """
    Writes table as CSV with RESULT_COLUMNS, or as one JSON object per line with
    the same keys; floats keep 6 significant digits. path None or '-' means
    standard output.
    """
    if fmt not in FORMATS:
        raise ConfigError('format = %r is not one of %s' % (fmt, ', '.join(FORMATS)))
    table = table.reindex(columns=RESULT_COLUMNS) if set(RESULT_COLUMNS) <= set(table.columns) else table
    if fmt == 'csv':
        text = table.to_csv(index=False, float_format='%.6g')
    elif table.empty:
        text = ''
    else:
        text = _round_significant(table).to_json(orient='records', lines=True)
        text = text if text.endswith('\n') else text + '\n'
    _write(text, path)


def _write(text, path):
    if path is None or path == '-':
        sys.stdout.write(text)
        return
    with open(path, 'w') as handle:
        handle.write(text)


def exclusivity_table(P_b, b_values=(5, 10, 20, 30), max_contenders=30, trials=0, seed=0):
    """p_exclusive_any over 1..max_contenders contenders for every B, with an optional Monte Carlo column."""
    rows = []
    for B in b_values:
        for n in range(1, max_contenders + 1):
            row = {'B': B, 'contenders': n, 'p_exclusive': p_exclusive_any(P_b, n, B)}
            if trials:
                row['mc'], row['mc_se'] = exclusivity_trials(P_b, n, B, trials, np.random.default_rng([seed, B, n]))
            rows.append(row)
    return pd.DataFrame(rows)


def overhead_table(config):
    return pd.DataFrame([{'protocol': p, 'tau_ra': config.tau_ra, 'B': config.B,
                          'channel_uses': ra_overhead(p, config.tau_ra, config.B)} for p in PROTOCOL_NAMES])


def calibration_table(config, samples, seed):
    sinr_db = calibrate(config, samples, seed)
    finite = sinr_db[np.isfinite(sinr_db)]
    quantiles = [5, 25, 50, 75, 95]
    values = np.percentile(finite, quantiles) if finite.size else np.full(len(quantiles), -np.inf)
    rows = [{'statistic': 'p%d' % q, 'sinr_db': v} for q, v in zip(quantiles, values)]
    rows.append({'statistic': 'blind_fraction', 'sinr_db': 1.0 - finite.size / float(samples)})
    rows += [{'statistic': name, 'sinr_db': getattr(config, name)}
             for name in ('ue_tx_power', 'noise_power', 'decode_threshold_db')]
    return pd.DataFrame(rows)


def _list_of(kind):
    def parse(text):
        try:
            return tuple(kind(item.strip()) for item in text.split(',') if item.strip())
        except ValueError:
            raise argparse.ArgumentTypeError('expected a comma-separated list, got %r' % text)
    return parse


def build_parser():
    parser = argparse.ArgumentParser(prog='xlra', description='Random access simulations for XL-MIMO cells.')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for info, -vv for debug logs')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    def add(name, help):
        sub = commands.add_parser(name, help=help)
        sub.add_argument('--config', help='flat key = value configuration file')
        sub.add_argument('--out', help='output path (default: standard output)')
        return sub

    for name, help in (('run', 'one campaign'), ('sweep', 'every (protocol, K, seed) campaign')):
        sub = add(name, help)
        sub.add_argument('--protocol', type=_list_of(str), help='protocol name(s), comma-separated')
        sub.add_argument('--k', type=_list_of(int), help='population size(s)')
        sub.add_argument('--seed', type=_list_of(int), help='seed(s)')
        sub.add_argument('--blocks', type=int, help='recorded blocks per campaign')
        sub.add_argument('--warmup', type=int, help='discarded blocks per campaign')
        sub.add_argument('--format', choices=FORMATS)
    commands.choices['run'].add_argument('--trace', help='also write the per-block trace CSV here')
    commands.choices['run'].add_argument('--sessions', help='also write the (mu_ra, mu_pd) pair of every admission here')
    commands.choices['sweep'].add_argument('--jobs', type=int, default=1, help='worker processes')
    commands.choices['sweep'].add_argument('--summary', help='also write the across-seed aggregate CSV here')

    sub = add('exclusivity', 'exclusive-subarray probability grid')
    sub.add_argument('--trials', type=int, default=0, help='Monte Carlo trials per point (0: closed form only)')
    sub.add_argument('--seed', type=int, default=0)
    add('overheads', 'channel uses per RA attempt')
    sub = add('calibrate', 'cell-edge single-user UL SINR report')
    sub.add_argument('--samples', type=int, default=10000)
    sub.add_argument('--seed', type=int, default=0)
    return parser


def load(args):
    if args.config:
        return parse_config(args.config)
    return ScenarioConfig(), SweepSpec()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    try:
        config, spec = load(args)
        if args.command in ('run', 'sweep'):
            spec = spec.replace(protocols=args.protocol, k_values=args.k, seeds=args.seed,
                                n_blocks=args.blocks, warmup=args.warmup, output=args.out, format=args.format)
            if args.command == 'run':
                protocol, K, seed = spec.protocols[0], spec.k_values[0], spec.seeds[0]
                metrics = run_campaign(config, K, spec.n_blocks, protocol, seed, warmup=spec.warmup)
                row = dict(protocol=protocol, K=K, seed=seed, **metrics.summary())
                emit_results(pd.DataFrame([row], columns=RESULT_COLUMNS), spec.format, spec.output)
                if args.trace:
                    metrics.to_frame().to_csv(args.trace, index=False, float_format='%.6g')
                if args.sessions:
                    metrics.sessions_frame().to_csv(args.sessions, index=False)
            else:
                result = run_sweep(spec, config, jobs=args.jobs)
                emit_results(result.table, spec.format, spec.output)
                if args.summary:
                    result.aggregate.to_csv(args.summary, index=False, float_format='%.6g')
                    record_settings(config, spec, args.summary)
        elif args.command == 'exclusivity':
            _write(exclusivity_table(config.P_b, trials=args.trials, seed=args.seed)
                   .to_csv(index=False, float_format='%.6g'), args.out)
        elif args.command == 'overheads':
            _write(overhead_table(config).to_csv(index=False), args.out)
        else:
            _write(calibration_table(config, args.samples, args.seed).to_csv(index=False, float_format='%.6g'),
                   args.out)
        record_settings(config, spec if args.command in ('run', 'sweep') else None, args.out)
    except (XlraError, OSError) as err:
        sys.stderr.write('xlra: error: %s\n' % err)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
