# run.py
import sys

# Import the CLI entry point from our package
# (run.py sits outside the 'slicekit' package, so no relative import here)
from slicekit.cli import main

# Run an experiment, e.g. `python run.py approx-error --method SW --seed 0`
if __name__ == '__main__':
    sys.exit(main())
