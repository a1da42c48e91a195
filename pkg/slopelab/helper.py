import csv
import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from slopelab import app
from slopelab.models import PlusInfinity


def make_rng(seed=None):
    return np.random.default_rng(app.config['SEED'] if seed is None else seed)


def parallel_map(fn, items, threads=None):
    """
    Maps `fn` over `items` on a thread pool. Results come back in input order,
    so any reduction over them is independent of scheduling.
    """
    items = list(items)
    threads = app.config['THREADS'] if threads is None else threads

    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def chunks(count, parts):
    """
    Splits range(count) into at most `parts` contiguous index blocks.
    """
    parts = max(1, min(parts, count))
    return [block for block in np.array_split(np.arange(count), parts) if block.size]


def exact(value):
    """
    Exact rational form of a decimal input, e.g. 0.1 -> 1/10 rather than the binary float.
    """
    if isinstance(value, Fraction):
        return value
    return Fraction(str(value))


def fraction_str(value):
    value = exact(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def to_json_value(value):
    if isinstance(value, PlusInfinity):
        return value.json()
    if hasattr(value, 'json') and callable(value.json):
        return to_json_value(value.json())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_json_value(dataclasses.asdict(value))
    if isinstance(value, Fraction):
        return fraction_str(value)
    if isinstance(value, dict):
        return {str(k): to_json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_json_value(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value):
            return None
        if np.isinf(value):
            return '+inf' if value > 0 else '-inf'
        return value
    return value


def dumps(data):
    return json.dumps(to_json_value(data), sort_keys=True, indent=2, ensure_ascii=False)


def write_json(path, data):
    create_parent_dir(path)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps(data) + '\n')


def write_csv(path, header, rows):
    create_parent_dir(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])


def write_plot_data(path, pairs):
    """
    Two whitespace-separated columns, one pair per line.
    """
    create_parent_dir(path)
    np.savetxt(path, np.asarray(pairs, dtype=float).reshape(-1, 2), fmt='%.12g')


def format_cell(cell):
    cell = to_json_value(cell)
    if isinstance(cell, float):
        return f"{cell:.12g}"
    return cell


def create_parent_dir(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent)
