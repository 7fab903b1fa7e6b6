"""Write the 16-sample worked example as CLI input files.

    python3 scripts/make_example_files.py data/
    sparsedft recover --signal data/example16.csv --method onestep \
        --threshold 11 --mask-file data/example16_mask.txt --out out/
"""

import sys
from pathlib import Path

from sparsedft.experiments import example16_signal
from sparsedft.fileio import write_index_file, write_signal


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    out.mkdir(parents=True, exist_ok=True)
    x, mask = example16_signal()
    write_signal(out / "example16.csv", x)
    write_index_file(out / "example16_mask.txt", mask.indices)
    print(f"wrote {out / 'example16.csv'} and {out / 'example16_mask.txt'}")


if __name__ == "__main__":
    main()
