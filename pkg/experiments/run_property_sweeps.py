"""
Property Sweeps
Runs every randomized acceptance sweep at the sizes in configs/default.yaml
and writes one CSV per sweep plus a summary table.
"""

import argparse
import os
import sys
import time

import pandas as pd

# Add src to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from property_sweeps import run_all
from settings import configure_logging, load_config


def summarize(tables: dict) -> pd.DataFrame:
    rows = []
    for name, table in tables.items():
        failed = int((~table['passed']).sum()) if len(table) else 0
        rows.append({
            'Sweep': name,
            'Instances': len(table),
            'Failed': failed,
            'Pass Rate (%)': 100.0 * (len(table) - failed) / len(table) if len(table) else 100.0,
        })
    return pd.DataFrame(rows)


def save_results(tables: dict, summary: pd.DataFrame, output_dir: str = 'results'):
    """Save every sweep table and the summary to CSV files."""
    os.makedirs(output_dir, exist_ok=True)
    for name, table in tables.items():
        table.to_csv(os.path.join(output_dir, f'sweep_{name}.csv'), index=False)
    summary_path = os.path.join(output_dir, 'sweep_summary.csv')
    summary.to_csv(summary_path, index=False)
    print(f"✓ Sweep tables saved to: {output_dir}")
    print(f"✓ Summary saved to: {summary_path}")


def print_results_summary(summary: pd.DataFrame, elapsed: float):
    print("\n" + "=" * 80)
    print("PROPERTY SWEEP SUMMARY")
    print("=" * 80)
    print(summary.to_string(index=False))
    print(f"\nTotal runtime: {elapsed:.1f} s")
    total_failed = int(summary['Failed'].sum())
    if total_failed:
        print(f"\n{total_failed} instance(s) failed; see the per-sweep CSV files")
    else:
        print("\nAll sweeps passed")
    print("=" * 80)


def main():
    parser = argparse.ArgumentParser(description='Run the randomized property sweeps')
    parser.add_argument('--config', default=None)
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--output-dir', default='results')
    args = parser.parse_args()

    config = load_config(args.config)
    configure_logging(config['logging']['level'])
    seed = args.seed if args.seed is not None else config['search']['seed']

    print("\n" + "=" * 80)
    print("PROPERTY SWEEPS")
    print("=" * 80)
    print(f"Configuration: seed={seed}")
    for key, value in config['sweeps'].items():
        print(f"  {key}: {value}")
    print("=" * 80 + "\n")

    start = time.time()
    tables = run_all(seed=seed, sizes=config['sweeps'], progress=True)
    elapsed = time.time() - start

    summary = summarize(tables)
    save_results(tables, summary, args.output_dir)
    print_results_summary(summary, elapsed)
    return 0 if int(summary['Failed'].sum()) == 0 else 1


if __name__ == '__main__':
    sys.exit(main())
