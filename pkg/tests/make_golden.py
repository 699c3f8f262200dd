"""Regenerate tests/golden/thresholds.json.

Values come from the package's bisection path and are written only if an
independent route agrees: mpmath roots of numerically differentiated r(s)
for s01, s02, s03 (1e-10) and the dense-grid argmax path for r_cr, s1cr,
s3cr (1e-8).

    python tests/make_golden.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from oracles import DenseThreshold, mp_extrema  # noqa: E402

from ksat_smj import critical  # noqa: E402

OUT = Path(__file__).parent / "golden" / "thresholds.json"


def main():
    rows = []
    for k in range(5, 11):
        th = critical.find_r_cr(k)
        cp = th.critical
        mp = mp_extrema(k, (cp.s01, cp.s02, cp.s03))
        for name, ours, ref in zip(("s01", "s02", "s03"), (cp.s01, cp.s02, cp.s03), mp):
            if abs(ours - ref) > 1e-10:
                raise SystemExit(f"k={k} {name}: {ours!r} vs mpmath {ref!r}")
        r_cr, s1, s3 = DenseThreshold(k).threshold(r_hi=1.5 * cp.r_at_s01)
        for name, ours, ref in (("r_cr", th.r_cr, r_cr), ("s1cr", th.s1cr, s1), ("s3cr", th.s3cr, s3)):
            if abs(ours - ref) > 1e-8 * max(1.0, abs(ref)):
                raise SystemExit(f"k={k} {name}: {ours!r} vs dense grid {ref!r}")
        rows.append({"k": k, "s01": cp.s01, "s02": cp.s02, "s03": cp.s03,
                     "r_s01": cp.r_at_s01, "r_s03": cp.r_at_s03,
                     "r_cr": th.r_cr, "s1cr": th.s1cr, "s3cr": th.s3cr})
        print(f"k={k}: r_cr={th.r_cr!r} dense={r_cr!r}")
    OUT.write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
