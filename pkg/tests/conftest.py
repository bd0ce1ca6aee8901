from __future__ import annotations

import asyncio
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


def run(coro):
    return asyncio.run(coro)


def make_pdf(path: Path, pages: list[list[tuple[float, float, str]]]) -> Path:
    """Write a PDF with one page per entry; each page is a list of (x, y, text) draws."""
    from reportlab.lib.pagesizes import letter
    from reportlab.pdfgen import canvas

    c = canvas.Canvas(str(path), pagesize=letter)
    for draws in pages:
        for x, y, text in draws:
            c.drawString(x, y, text)
        c.showPage()
    c.save()
    return path


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES
