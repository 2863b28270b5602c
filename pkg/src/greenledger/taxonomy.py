"""USEEIO summary commodity taxonomy: classes, NAICS composition, emission factors.

The package ships the canonical 66-class summary taxonomy as CSV data files;
`load_taxonomy` accepts any files in the same format so tests and callers can
run against smaller taxonomies. A `Taxonomy` is immutable after load and safe
to share across threads.

File formats (UTF-8, header row required):
    classes: code, title, naics_codes (pipe-separated), description (optional)
    factors: code, factor_kg_per_unit, currency_basis, factor_kind
    NAICS descriptions: naics_code, description
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

from .errors import (
    DataValidationError,
    MissingFactorError,
    ParseError,
    StateError,
    UnknownClassError,
)

CLASSES_HEADER = ["code", "title", "naics_codes", "description"]
FACTORS_HEADER = ["code", "factor_kg_per_unit", "currency_basis", "factor_kind"]
NAICS_HEADER = ["naics_code", "description"]


@dataclass(frozen=True)
class CommodityClass:
    """One summary commodity class (e.g. code 311FT)."""

    code: str
    title: str
    naics_codes: tuple[str, ...]
    description: str = ""


@dataclass(frozen=True)
class EmissionFactorRecord:
    """kg CO2e emitted per currency unit spent on a commodity class."""

    code: str
    factor: float
    currency_basis: str
    factor_kind: str


@dataclass(frozen=True)
class Taxonomy:
    """Validated, immutable class/factor lookup tables."""

    classes: dict[str, CommodityClass]
    factors: dict[str, EmissionFactorRecord]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def class_count(self) -> int:
        return len(self.classes)

    def label_order(self) -> list[str]:
        """Class codes in the canonical (lexicographic) ordering."""
        return sorted(self.classes)

    def get(self, code: str) -> CommodityClass:
        try:
            return self.classes[code]
        except KeyError:
            raise UnknownClassError(f"unknown commodity class code {code!r}") from None


def _read_rows(path: str | Path, expected_header: list[str]) -> list[list[str]]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: file is empty, expected header {expected_header}")
    if rows[0] != expected_header:
        raise ParseError(f"{path}: bad header {rows[0]}, expected {expected_header}")
    body = [r for r in rows[1:] if r]
    for i, row in enumerate(body, start=2):
        if len(row) != len(expected_header):
            raise ParseError(f"{path}: line {i}: expected {len(expected_header)} columns, got {len(row)}")
    return body


def load_taxonomy(classes_path: str | Path, factors_path: str | Path) -> Taxonomy:
    """Load and validate a taxonomy from a classes file and a factors file.

    Classes without a factor are permitted; each is recorded in
    ``taxonomy.warnings`` so classification-only workflows still run.
    """
    class_rows = _read_rows(classes_path, CLASSES_HEADER)
    if not class_rows:
        raise DataValidationError(f"{classes_path}: no commodity classes defined")

    classes: dict[str, CommodityClass] = {}
    for i, (code, title, naics, description) in enumerate(class_rows, start=2):
        code = code.strip()
        if not code:
            raise DataValidationError(f"{classes_path}: line {i}: empty class code")
        if not title.strip():
            raise DataValidationError(f"{classes_path}: line {i}: empty title for {code!r}")
        if code in classes:
            raise DataValidationError(f"{classes_path}: line {i}: duplicate class code {code!r}")
        naics_codes = tuple(n.strip() for n in naics.split("|") if n.strip())
        classes[code] = CommodityClass(code=code, title=title.strip(), naics_codes=naics_codes, description=description.strip())

    factors: dict[str, EmissionFactorRecord] = {}
    for i, (code, raw_factor, basis, kind) in enumerate(_read_rows(factors_path, FACTORS_HEADER), start=2):
        code = code.strip()
        if code not in classes:
            raise DataValidationError(f"{factors_path}: line {i}: factor for unknown class {code!r}")
        if code in factors:
            raise DataValidationError(f"{factors_path}: line {i}: duplicate factor for {code!r}")
        try:
            factor = float(raw_factor)
        except ValueError:
            raise ParseError(f"{factors_path}: line {i}: non-numeric factor {raw_factor!r}") from None
        if factor < 0:
            raise DataValidationError(f"{factors_path}: line {i}: negative factor {factor} for {code!r}")
        factors[code] = EmissionFactorRecord(code=code, factor=factor, currency_basis=basis.strip(), factor_kind=kind.strip())

    warnings = tuple(f"class {code!r} has no emission factor" for code in classes if code not in factors)
    return Taxonomy(classes=classes, factors=factors, warnings=warnings)


def serialize_taxonomy(tax: Taxonomy, classes_path: str | Path, factors_path: str | Path) -> None:
    """Write a taxonomy back to the two-file CSV format (inverse of load)."""
    with open(classes_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CLASSES_HEADER)
        for cls in tax.classes.values():
            w.writerow([cls.code, cls.title, "|".join(cls.naics_codes), cls.description])
    with open(factors_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(FACTORS_HEADER)
        for rec in tax.factors.values():
            w.writerow([rec.code, repr(rec.factor), rec.currency_basis, rec.factor_kind])


def load_naics_texts(path: str | Path) -> dict[str, str]:
    """Load the NAICS code -> description map."""
    return {code.strip(): desc.strip() for code, desc in _read_rows(path, NAICS_HEADER)}


def compose_description(cls: CommodityClass, naics_texts: dict[str, str]) -> str:
    """Concatenate the class's NAICS descriptions, in naics_codes order."""
    parts = []
    for code in cls.naics_codes:
        if code not in naics_texts:
            raise DataValidationError(f"class {cls.code!r}: no NAICS description for code {code!r}")
        parts.append(naics_texts[code])
    return " ".join(parts)


def compose_all(tax: Taxonomy, naics_texts: dict[str, str]) -> Taxonomy:
    """Return a taxonomy whose classes all carry composed descriptions."""
    composed = {
        code: dataclasses.replace(cls, description=compose_description(cls, naics_texts))
        for code, cls in tax.classes.items()
    }
    return Taxonomy(classes=composed, factors=tax.factors, warnings=tax.warnings)


def class_text(cls: CommodityClass, mode: str) -> str:
    """The text representing a class: its title or its composed description."""
    if mode == "title":
        return cls.title
    if mode == "description":
        if not cls.description:
            raise StateError(f"class {cls.code!r} has no composed description")
        return cls.description
    raise ValueError(f"mode must be 'title' or 'description', got {mode!r}")


def lookup_factor(tax: Taxonomy, code: str) -> EmissionFactorRecord:
    """Emission factor record for a class code.

    Raises UnknownClassError for codes outside the taxonomy and
    MissingFactorError for classes loaded without a factor.
    """
    if code not in tax.classes:
        raise UnknownClassError(f"unknown commodity class code {code!r}")
    try:
        return tax.factors[code]
    except KeyError:
        raise MissingFactorError(f"class {code!r} has no emission factor") from None


def canonical_data_path(name: str) -> Path:
    """Path to one of the packaged canonical data files."""
    return Path(str(files("greenledger").joinpath("data", name)))


def canonical_taxonomy() -> Taxonomy:
    """The packaged 66-class USEEIO summary taxonomy."""
    return load_taxonomy(
        canonical_data_path("useeio_summary_classes.csv"),
        canonical_data_path("useeio_summary_factors.csv"),
    )


def canonical_naics_texts() -> dict[str, str]:
    """The packaged NAICS description map."""
    return load_naics_texts(canonical_data_path("naics_descriptions.csv"))
