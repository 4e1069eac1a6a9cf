""" JSON and CSV writers for BIZ results, and the form fixture loader. """

import io
import json
import logging
import sys

import numpy as np
import pandas as pd

from fractions import Fraction

from .YLinearForm import YLinearForm

LOGGER = logging.getLogger(__name__)


class Encoder(json.JSONEncoder):
    """
    JSON encoder used as the 'cls' argument to json.dumps(). Exact rationals
    are written as strings, numpy scalars as plain numbers, named tuples as
    dicts and anything with a to_dict() through it.
    """
    def encode(self, obj):
        return super(Encoder, self).encode(_plain(obj))

    def default(self, obj):
        if isinstance(obj, Fraction):
            return str(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if hasattr(obj, "to_dict"):
            return obj.to_dict()
        return super(Encoder, self).default(obj)


def _plain(item):
    """ Named tuples become dicts before the encoder sees them as lists. """
    if isinstance(item, tuple) and hasattr(item, "_asdict"):
        return {key: _plain(val) for key, val in item._asdict().items()}
    if isinstance(item, (list, tuple)):
        return [_plain(e) for e in item]
    if isinstance(item, dict):
        return {key: _plain(val) for key, val in item.items()}
    if isinstance(item, float) and not np.isfinite(item):
        return None if np.isnan(item) else str(item)
    return item


def dumps(obj, indent=4):
    return json.dumps(obj, cls=Encoder, indent=indent, sort_keys=False)


def save_json(obj, path=None):
    """
    Write obj as JSON to path, or to stdout when path is None.
    """
    text = dumps(obj) + "\n"
    _write(text, path)
    return text


def load_form_json(path):
    """ Read a YLinearForm, or a list of them, from a JSON file. """
    with open(path) as infile:
        data = json.load(infile)
    if isinstance(data, list):
        return [YLinearForm.from_dict(d) for d in data]
    return YLinearForm.from_dict(data)


def table_text(df):
    """ CSV text: 17 significant digits, blank cells for nan. """
    buf = io.StringIO()
    df.to_csv(buf, index=False, float_format="%.17g", na_rep="", lineterminator="\n")
    return buf.getvalue()


def write_table(df, path=None, fmt="csv"):
    """
    Write a pandas.DataFrame as CSV or JSON records to path (stdout when
    None).
    """
    if fmt == "csv":
        text = table_text(df)
    else:
        text = dumps(df.astype(object).where(pd.notnull(df), None)
                       .to_dict(orient="records")) + "\n"
    _write(text, path)
    return text


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w") as outfile:
        outfile.write(text)
    LOGGER.info("wrote %s", path)
