"""Run one preset study and write its report files.

    python3 scripts/run_study.py fig3 --out results/fig3
    python3 scripts/run_study.py table1 --trials 2000 --seed 4
"""

import argparse
from pathlib import Path

from sparsedft.experiments import PRESETS, ExperimentConfig, preset, run
from sparsedft.fileio import atomic_write


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("preset", choices=PRESETS)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()

    data = preset(args.preset).as_dict()
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["master_seed"] = args.seed
    report = run(ExperimentConfig.from_dict(data))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write(out / "report.json", report.to_json())
    atomic_write(out / "report.csv", report.to_csv())
    if report.histograms:
        atomic_write(out / "histogram.csv", report.histogram_csv())
    for line in report.summary_lines():
        print(line)
    print(f"wall time {report.wall_time:.1f}s, files in {out}/")


if __name__ == "__main__":
    main()
