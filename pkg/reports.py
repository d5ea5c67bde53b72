"""Single writer for run outputs: JSON documents, CSV tables and the closing manifest."""
import csv
import io
import json
import logging
import os
from datetime import datetime, timezone

import numpy as np

from config import Config
from lab.errors import OutputError
from models import RunManifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _json_text(document):
    return json.dumps(document, sort_keys=True, indent=2, default=_plain) + '\n'


def _number(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return '%.17g' % value
    return str(value)


def _write_atomic(path, text):
    tmp = path + '.tmp'
    with open(tmp, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    os.replace(tmp, path)


def _write_table(path, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_number(value) for value in row])
    _write_atomic(path, buffer.getvalue())


def field_table(field):
    """Header and rows of a RadialField CSV"""
    return ['r', 'u'], field.to_rows()


def emit_report(out_dir, subcommand, config, documents=None, tables=None):
    """Write documents {name: dict} and tables {name: (header, rows)}, then manifest.json.

    The manifest is written last and atomically, so its presence marks a
    complete run.
    """
    documents = documents or {}
    tables = tables or {}
    outputs = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, document in documents.items():
            _write_atomic(os.path.join(out_dir, name), _json_text(document))
            outputs.append(name)
        for name, (header, rows) in tables.items():
            _write_table(os.path.join(out_dir, name), header, rows)
            outputs.append(name)
        manifest = RunManifest(
            subcommand=subcommand,
            config=config,
            version=Config.VERSION,
            timestamp=datetime.now(timezone.utc).isoformat(timespec='seconds'),
            outputs=sorted(outputs),
        )
        _write_atomic(os.path.join(out_dir, MANIFEST_NAME), _json_text(manifest.to_dict()))
    except OSError as exc:
        raise OutputError(f"cannot write outputs to {out_dir}: {exc}") from exc
    logger.info('wrote %d outputs and %s to %s', len(outputs), MANIFEST_NAME, out_dir)
    return manifest
