"""Turn ordinance documents (PDF or plain text) into ordered page text.

PDF conversion goes through a single adapter. The reference adapter shells
out to Poppler's ``pdftotext -layout``; when that executable is not on the
PATH an in-process pypdf adapter in layout mode is used instead. Plain-text
files bypass conversion entirely, with form feeds acting as page breaks.
"""

from __future__ import annotations

import enum
import logging
import re
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from ordex.errors import ConversionFailure, ConverterUnavailable, DocumentNotFound

logger = logging.getLogger(__name__)

PAGE_BREAK = "\n\f\n"


class DocFormat(str, enum.Enum):
    PDF = "pdf"
    PLAIN_TEXT = "plain_text"

    @classmethod
    def from_path(cls, path: str | Path) -> "DocFormat":
        return cls.PDF if str(path).lower().endswith(".pdf") else cls.PLAIN_TEXT


@dataclass(frozen=True, order=True)
class Jurisdiction:
    county: str
    state: str

    def __post_init__(self) -> None:
        if not self.county.strip() or not self.state.strip():
            raise ValueError("jurisdiction county and state must be non-empty")

    @property
    def slug(self) -> str:
        raw = f"{self.county}_{self.state}".lower()
        return re.sub(r"[^a-z0-9]+", "_", raw).strip("_")

    def __str__(self) -> str:
        return f"{self.county}, {self.state}"


@dataclass(frozen=True)
class RawDocument:
    source_path: Path
    format: DocFormat
    jurisdiction: Jurisdiction

    def __post_init__(self) -> None:
        # Path("") normalizes to "."
        if str(self.source_path) in ("", "."):
            raise ValueError("source_path must be non-empty")
        object.__setattr__(self, "source_path", Path(self.source_path))
        object.__setattr__(self, "format", DocFormat(self.format))


@dataclass(frozen=True)
class DocumentText:
    """Ordered page text; pages are ``(page_number, text)`` with 1-based numbers."""

    pages: tuple[tuple[int, str], ...]
    jurisdiction: Jurisdiction
    source_path: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        pages = tuple((int(n), str(t)) for n, t in self.pages)
        for expected, (number, text) in enumerate(pages, start=1):
            if number != expected:
                raise ValueError(f"page numbers must run 1..n in order; got {number} at position {expected}")
            if "\x00" in text:
                raise ValueError(f"page {number} contains a NUL byte")
        object.__setattr__(self, "pages", pages)

    @classmethod
    def from_texts(cls, texts: Sequence[str], jurisdiction: Jurisdiction, source_path: Path | None = None) -> "DocumentText":
        return cls(tuple(enumerate(texts, start=1)), jurisdiction, source_path)

    @property
    def texts(self) -> list[str]:
        return [text for _, text in self.pages]

    def joined(self) -> str:
        """Whole-document string: pages separated by a form-feed marker line."""
        return PAGE_BREAK.join(self.texts)

    def cleaned(self) -> "DocumentText":
        return DocumentText.from_texts([clean_text(t) for t in self.texts], self.jurisdiction, self.source_path)


# -- cleaning -----------------------------------------------------------------

_TRAILING_WS = re.compile(r"[^\S\n\f]+$", re.MULTILINE)
_BLANK_RUN = re.compile(r"\n{3,}")


def clean_text(text: str) -> str:
    """Normalize line endings, strip trailing blanks, and cap blank-line runs.

    Hyphenation across line breaks is left alone on purpose: "repairing" it
    mangles section citations such as ``17-3-1``.
    """
    text = text.replace("\r\n", "\n")
    text = _TRAILING_WS.sub("", text)
    return _BLANK_RUN.sub("\n\n", text)


# -- converters ---------------------------------------------------------------


class PdfConverter(Protocol):
    name: str

    def convert(self, path: Path) -> list[str]:
        """Return one text string per physical page."""
        ...


@dataclass
class PopplerConverter:
    """Subprocess adapter around ``pdftotext``.

    The executable and its arguments are configurable; the command line is
    ``<executable> <args...> <pdf> -`` and page texts are read from stdout,
    separated by form feeds.
    """

    executable: str = "pdftotext"
    args: tuple[str, ...] = ("-layout", "-enc", "UTF-8")
    timeout: float = 120.0
    name: str = "poppler"

    def available(self) -> bool:
        return shutil.which(self.executable) is not None

    def convert(self, path: Path) -> list[str]:
        exe = shutil.which(self.executable)
        if exe is None:
            raise ConverterUnavailable(f"PDF converter {self.executable!r} not found on PATH")
        try:
            proc = subprocess.run(
                [exe, *self.args, str(path), "-"],
                capture_output=True,
                timeout=self.timeout,
                check=False,
            )
        except subprocess.TimeoutExpired as exc:
            raise ConversionFailure(f"{self.executable} timed out on {path}") from exc
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace").strip()
            raise ConversionFailure(f"{self.executable} exited {proc.returncode} on {path}: {stderr}")
        out = proc.stdout.decode("utf-8", "replace")
        pages = out.split("\f")
        # pdftotext terminates every page, including the last, with \f
        if pages and pages[-1].strip() == "":
            pages.pop()
        if not pages:
            raise ConversionFailure(f"{path} produced no pages")
        return pages


@dataclass
class PypdfConverter:
    """In-process fallback using pypdf's layout extraction mode."""

    name: str = "pypdf"

    def available(self) -> bool:
        try:
            import pypdf  # noqa: F401
        except ImportError:
            return False
        return True

    def convert(self, path: Path) -> list[str]:
        try:
            import pypdf
        except ImportError as exc:
            raise ConverterUnavailable("pypdf is not installed") from exc
        try:
            reader = pypdf.PdfReader(str(path))
            pages = [page.extract_text(extraction_mode="layout") for page in reader.pages]
        except Exception as exc:  # pypdf raises a zoo of exception types on bad input
            raise ConversionFailure(f"could not parse {path}: {exc}") from exc
        if not pages:
            raise ConversionFailure(f"{path} has no pages")
        return pages


def default_converter() -> PdfConverter:
    poppler = PopplerConverter()
    if poppler.available():
        return poppler
    fallback = PypdfConverter()
    if fallback.available():
        logger.info("pdftotext not found; using pypdf layout extraction")
        return fallback
    raise ConverterUnavailable("neither pdftotext nor pypdf is available")


# -- entry points -------------------------------------------------------------


def _require_file(path: Path) -> None:
    if not path.is_file():
        raise DocumentNotFound(f"document not found: {path}")


def pdf_to_text(doc: RawDocument, converter: PdfConverter | None = None) -> DocumentText:
    if doc.format is not DocFormat.PDF:
        raise ValueError(f"pdf_to_text expects a PDF document, got {doc.format.value}")
    _require_file(doc.source_path)
    converter = converter or default_converter()
    pages = converter.convert(doc.source_path)
    return DocumentText.from_texts([p.replace("\x00", "") for p in pages], doc.jurisdiction, doc.source_path)


def load_plain_text(doc: RawDocument) -> DocumentText:
    if doc.format is not DocFormat.PLAIN_TEXT:
        raise ValueError(f"load_plain_text expects plain text, got {doc.format.value}")
    _require_file(doc.source_path)
    content = doc.source_path.read_text(encoding="utf-8", errors="replace").replace("\x00", "")
    return DocumentText.from_texts(content.split("\f"), doc.jurisdiction, doc.source_path)


def load_document(doc: RawDocument, converter: PdfConverter | None = None) -> DocumentText:
    if doc.format is DocFormat.PDF:
        return pdf_to_text(doc, converter)
    return load_plain_text(doc)
