"""Quantization error of a bandlimited signal as the oversampling rate grows.

Run with ``python demos/decay_experiment.py [outdir]``.  A reduced
evaluation grid keeps this around a minute; pass ``--full`` for the 0.01
step used by the acceptance suite.
"""
import sys
from pathlib import Path

from sigmadelta2d.bandlimited import LatticeSpec, approximation_error, decay_experiment

full = "--full" in sys.argv
args = [a for a in sys.argv[1:] if a != "--full"]
out = Path(args[0] if args else "decay_demo")
out.mkdir(parents=True, exist_ok=True)
step = 0.01 if full else 0.05

# The unquantized samples already carry a small kernel-truncation error.
# Quantization should stay above that floor and shrink towards it.
for lam in (75, 150, 275):
    print(f"lambda={lam:3d}  approximant error {approximation_error(LatticeSpec(lam), step=step):.3e}")

schemes = ["1st-RbR", "1st-A", "Opt-4", "2nd-RbR", "2nd-A33"]
report = decay_experiment(schemes, step=step)

print("\nsup-norm error per lambda")
for name in schemes:
    lam, err = report.errors(name)
    print(f"{name:8s} " + " ".join(f"{e:.1e}" for e in err))

# First-order schemes should lose about one decade per decade of lambda,
# second-order ones about two.
print("\nfitted log-log slopes")
for name, s in report.slopes.items():
    print(f"{name:8s} {s:6.2f}")

report.write_csv(out / "decay.csv")
report.write_gnuplot(out / "decay.dat")
print(f"\nwrote {out / 'decay.csv'} and {out / 'decay.dat'}")
