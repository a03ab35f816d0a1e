"""Input file loading and artifact writing for the paritylab CLI."""

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Optional

import click
from pydantic import ValidationError

from paritylab.errors import ParseError
from paritylab.models import NoiseParams, RunConfig
from paritylab.services.photonics import ModeNetwork
from paritylab.services.tomography import CountTable

NOISE_PRESETS = {
    "ideal": NoiseParams.ideal,
    "calibrated": NoiseParams.calibrated,
}


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})") from e


# ── Inputs ──────────────────────────────────────────────────


def load_config(path: Optional[str]) -> dict:
    """Run configuration: global keys plus one optional section per command."""
    if not path:
        return {}
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return data


def load_noise(value: Optional[str]) -> Optional[NoiseParams]:
    """A preset name (``ideal``, ``calibrated``) or a JSON file {beta, mz_dephasing, readout_flip}."""
    if value is None:
        return None
    if isinstance(value, dict):
        data = value
    elif value.lower() in NOISE_PRESETS:
        return NOISE_PRESETS[value.lower()]()
    else:
        data = _read_json(value)
    try:
        return NoiseParams.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ParseError(f"Noise config: {'.'.join(map(str, first['loc']))}: {first['msg']}") from e


def load_counts(path: str) -> CountTable:
    return CountTable.from_json(_read_json(path))


def load_network(path: str) -> ModeNetwork:
    data = _read_json(path)
    if not isinstance(data, list):
        raise ParseError(f"{path}: network must be a JSON list of elements")
    return ModeNetwork.from_dicts(data)


# ── Artifacts ───────────────────────────────────────────────


def render_json(payload: dict, config: RunConfig) -> str:
    return json.dumps({**payload, "config": config.model_dump()}, indent=2)


def render_csv(header: list[str], rows: Iterable[list], config: RunConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# config={json.dumps(config.model_dump(), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_artifact(text: str, out: Optional[str]) -> None:
    """Write to ``out`` or to stdout."""
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))
