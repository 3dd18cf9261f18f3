# scripts/fold_example_masses.py

"""
Folds the six example mass functions from the worked combination table and
prints the fused focal elements, plus the pignistic vector of the printed
combined column. Run from the repository root: python scripts/fold_example_masses.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from agents.evidence import MassFunction, conjunctive_fold, format_mask, parse_mask, pignistic  # noqa: E402
from data_ingestion.preprocess import betp_to_frame, mass_to_frame  # noqa: E402

COLUMNS = {
    "m1": {"We": 0.4, "We,Re": 0.3, "OMEGA": 0.3},
    "m2": {"We": 0.62, "We,Re": 0.3, "OMEGA": 0.08},
    "m3": {"We": 0.7, "I,We": 0.2, "OMEGA": 0.1},
    "m4": {"We": 0.6, "I,We": 0.1, "OMEGA": 0.3},
    "m21": {"Re": 0.61, "We,Re": 0.34, "OMEGA": 0.05},
    "m22": {"We": 0.67, "I,We": 0.3, "OMEGA": 0.03},
}

# The combined column as printed; it sums to 0.9999011 and is rescaled before BetP.
PRINTED_COMBINED = {
    "EMPTY": 0.652, "I": 0.022, "We": 0.1637, "Re": 0.1068,
    "I,We": 0.0234, "We,Re": 0.032, "OMEGA": 0.0000011,
}


def as_mass(column: dict) -> MassFunction:
    return MassFunction.from_mapping({parse_mask(k): v for k, v in column.items()})


def printed_combined() -> MassFunction:
    total = sum(PRINTED_COMBINED.values())
    return MassFunction.from_mapping({parse_mask(k): v / total for k, v in PRINTED_COMBINED.items()})


if __name__ == "__main__":
    print("--- COMBINATION TABLE REPRODUCTION ---")
    masses = [as_mass(c) for c in COLUMNS.values()]
    fused = conjunctive_fold(masses, "conjunctive")
    print("\nConjunctive fold of m1, m2, m3, m4, m21, m22:")
    print(mass_to_frame(fused).to_string(index=False))
    print(f"\nFocal elements: {', '.join(format_mask(a) for a, _ in fused.focal)}")

    print("\nPignistic vector of the printed combined column (rescaled):")
    print(betp_to_frame(pignistic(printed_combined())).to_string(index=False))
