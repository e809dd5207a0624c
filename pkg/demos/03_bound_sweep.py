"""A small seeded verification sweep with CSV output.

Samples pairs with certified quotient separation, evaluates the kernel
norm with a rigorous truncation tail and compares with the bound.
"""

import sys

from hypbergman import VerificationConfig, emit_report, run_verification

cfg = VerificationConfig.from_dict({
    "group": "gamma2_width1",
    "k_list": [3, 4, 5],
    "delta_list": ["r", "r+1"],
    "sample_count": 5,
    "seed": 1,
})
report = run_verification(cfg, progress=lambda n: print(f"\r{n} cases", end="", file=sys.stderr))
print(file=sys.stderr)
sys.stdout.write(emit_report(report, "csv"))

s = report.summary()
print(f"violations: {s['violations']}, smallest slack {s['min_slack']:.3g}", file=sys.stderr)
