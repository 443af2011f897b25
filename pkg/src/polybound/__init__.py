"""Exact growth-constant certificates for polyomino recurrence systems."""

from importlib import resources

__version__ = "0.1.0"

from .certificate import (  # noqa: E402
    Certificate,
    iterate,
    iterate_enclosure,
    load_certificate,
    parse_certificate,
    polish,
    rationalize,
    sandwich_check,
    verify,
)
from .oracle import check_domination, check_lemma, enumerate_polyominoes, load_masks, typed_counts  # noqa: E402
from .search import SearchConfig, probe, search  # noqa: E402
from .sequences import SequenceTable, evaluate, partial_sum, ratio_report  # noqa: E402
from .system import RecurrenceSystem, builtin_system, parse_system, render_system, topo_order  # noqa: E402


def data_path(name: str):
    """Path of a shipped data file (``kr6.cert``, ``bs17.cert``, ``masks.txt``)."""
    return resources.files("polybound.data").joinpath(name)


def shipped_certificate(system: str) -> Certificate:
    return parse_certificate(data_path(f"{system.lower()}.cert").read_text(encoding="utf-8"))
