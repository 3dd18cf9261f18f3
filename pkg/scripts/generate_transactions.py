# scripts/generate_transactions.py

"""
Writes a labeled transaction dataset drawn from the surrogate classifier, one
`first,second|label` line per transaction, ready for `orchestrator mine`.

    python scripts/generate_transactions.py --per-cause 100 --seed 3 --out transactions.txt
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import click  # noqa: E402

from agents.evidence import Cause  # noqa: E402
from agents.rule_mining import Dataset, Transaction  # noqa: E402
from data_ingestion.preprocess import write_dataset  # noqa: E402
from data_ingestion.scenario_loader import ClassifierConfig, load_scenario  # noqa: E402
from trafficsim.training import generate_transactions  # noqa: E402


@click.command()
@click.option("--per-cause", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--causes", default="I,Wo,We,SE,Re", show_default=True, help="Comma-separated truth causes.")
@click.option("--scenario", default=None, help="Take the classifier settings from this scenario.")
@click.option("--unlabeled", is_flag=True, help="Drop the labels.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def main(per_cause, seed, causes, scenario, unlabeled, out):
    cfg = load_scenario(scenario).classifier if scenario else ClassifierConfig()
    truths = [Cause.from_code(c) for c in causes.split(",") if c.strip()]
    dataset = generate_transactions(cfg, per_cause, seed=seed, causes=truths)
    if unlabeled:
        dataset = Dataset(tuple(Transaction(t.first, t.second) for t in dataset))
    write_dataset(dataset, out)
    mispredicted = sum(1 for t in dataset if t.mispredicted)
    print(f"Wrote {dataset.N} transactions to {out} ({mispredicted} mispredicted)")


if __name__ == "__main__":
    main()
