# data_ingestion/preprocess.py

"""
Readers and writers for the plain-text inputs and CSV outputs:

* transaction datasets, one `first,second[|label]` line per transaction;
* mass files, `subset:mass` lines with blank lines between masses;
* rulebooks as `antecedent,consequent,support,confidence` CSV;
* event logs as `time,vehicle,kind,segment,payload` CSV.
"""

import io
import logging
from pathlib import Path
from typing import List, Union

import pandas as pd

from agents.evidence import (
    EMPTY,
    Cause,
    CauseVector,
    EvidenceError,
    MassFunction,
    belief,
    format_mask,
    parse_mask,
    plausibility,
)
from agents.rule_mining import AssociationRule, Dataset, MiningError, RuleBook, Transaction

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RULEBOOK_COLUMNS = ["antecedent", "consequent", "support", "confidence"]
EVENT_LOG_COLUMNS = ["time", "vehicle", "kind", "segment", "payload"]


class FormatError(ValueError):
    """Raised when an input file does not parse; carries the file and line number."""


def _lines(path: PathLike):
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            yield lineno, raw.rstrip("\n")


# --- Transaction datasets ---

def parse_transaction(text: str) -> Transaction:
    items, _, label = text.partition("|")
    codes = [c for c in items.split(",") if c.strip()]
    if len(codes) != 2:
        raise ValueError(f"expected two cause codes, got {len(codes)}")
    first, second = (Cause.from_code(c) for c in codes)
    return Transaction(first, second, Cause.from_code(label) if label.strip() else None)


def read_dataset(path: PathLike) -> Dataset:
    transactions = []
    for lineno, line in _lines(path):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        try:
            transactions.append(parse_transaction(text))
        except (ValueError, EvidenceError, MiningError) as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
    if not transactions:
        raise FormatError(f"{path}: no transactions found")
    logger.info("DataIngestion: read %d transactions from %s", len(transactions), path)
    return Dataset(tuple(transactions))


def format_transaction(t: Transaction) -> str:
    line = f"{t.first.code},{t.second.code}"
    return f"{line}|{t.label.code}" if t.label is not None else line


def write_dataset(dataset: Dataset, path: PathLike) -> None:
    Path(path).write_text("".join(format_transaction(t) + "\n" for t in dataset), encoding="utf-8")


# --- Mass files ---

def read_masses(path: PathLike) -> List[MassFunction]:
    """
    One focal element per line (`We,Re:0.3`, `OMEGA:0.3`); a blank line ends a
    mass. Lines starting with '#' are comments. Masses are parsed, not validated.
    """
    masses: List[MassFunction] = []
    current = {}

    def close_block():
        if current:
            masses.append(MassFunction(tuple(current.items())))
            current.clear()

    for lineno, line in _lines(path):
        text = line.strip()
        if text.startswith("#"):
            continue
        if not text:
            close_block()
            continue
        subset_text, sep, value_text = text.rpartition(":")
        try:
            if not sep:
                raise ValueError("expected 'subset:mass'")
            subset = parse_mask(subset_text)
            if subset in current:
                raise ValueError(f"subset {format_mask(subset)} repeated within one mass")
            current[subset] = float(value_text)
        except (ValueError, EvidenceError) as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from exc
    close_block()
    if not masses:
        raise FormatError(f"{path}: no masses found")
    return masses


def write_masses(masses: List[MassFunction], path: PathLike) -> None:
    blocks = ["\n".join(f"{format_mask(a)}:{v!r}" for a, v in m.focal) for m in masses]
    Path(path).write_text("\n\n".join(blocks) + "\n", encoding="utf-8")


def mass_to_frame(m: MassFunction) -> pd.DataFrame:
    return pd.DataFrame([(format_mask(a), v) for a, v in m.focal], columns=["subset", "mass"])


def betp_to_frame(betp: CauseVector) -> pd.DataFrame:
    return pd.DataFrame([(c.code, betp[c]) for c in Cause], columns=["cause", "betp"])


def support_to_frame(m: MassFunction) -> pd.DataFrame:
    """Belief and plausibility of every focal element except the empty set."""
    rows = [(format_mask(a), belief(m, a), plausibility(m, a)) for a, _ in m.focal if a != EMPTY]
    return pd.DataFrame(rows, columns=["subset", "bel", "pl"])


# --- Rulebooks ---

def rulebook_to_frame(book: RuleBook) -> pd.DataFrame:
    rows = [
        (format_mask(r.display_antecedent), format_mask(r.consequent), r.support, r.confidence)
        for r in book
    ]
    return pd.DataFrame(rows, columns=RULEBOOK_COLUMNS)


def rulebook_to_csv(book: RuleBook) -> str:
    buffer = io.StringIO()
    rulebook_to_frame(book).to_csv(buffer, index=False, float_format="%.6f", lineterminator="\n")
    return buffer.getvalue()


def write_rulebook(book: RuleBook, path: PathLike) -> None:
    Path(path).write_text(rulebook_to_csv(book), encoding="utf-8")


def read_rulebook(path: PathLike) -> RuleBook:
    """A row whose antecedent contains its consequent is a correction rule."""
    try:
        frame = pd.read_csv(path, dtype={"antecedent": str, "consequent": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    missing = [c for c in RULEBOOK_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    rules = []
    for i, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            antecedent = parse_mask(row.antecedent)
            consequent = parse_mask(row.consequent)
            supervised = (antecedent & consequent) == consequent and antecedent != consequent
            if supervised:
                antecedent &= ~consequent
            rules.append(AssociationRule(antecedent, consequent, float(row.support), float(row.confidence), supervised))
        except (ValueError, EvidenceError, MiningError) as exc:
            raise FormatError(f"{path}: line {i}: {exc}") from exc
    return RuleBook(tuple(rules), provenance=str(path))


# --- Event logs ---

def write_event_log(frame: pd.DataFrame, path: PathLike) -> None:
    frame.to_csv(path, index=False, columns=EVENT_LOG_COLUMNS, lineterminator="\n")


def read_event_log(path: PathLike) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype={"kind": str, "payload": str}, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    missing = [c for c in EVENT_LOG_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    logger.info("DataIngestion: read %d log records from %s", len(frame), path)
    return frame[EVENT_LOG_COLUMNS]
