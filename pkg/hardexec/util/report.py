# -*- coding: utf-8 -*-
#
# This file is part of Hardexec, distributed under the GNU GPLv3.

"""Module providing the report writers shared by every command"""

import csv
import json
import logging


def dumps(document):
    """Canonical JSON text of a report document"""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_json(path, document):
    """Write document to path as canonical JSON"""
    with open(path, "w") as report_file:
        report_file.write(dumps(document))
    logging.info("report written to %s", path)


def flatten(document, prefix=""):
    """Flatten nested dicts into a single level, joining keys with '.';
    lists are rendered as JSON text"""
    row = {}
    for key in sorted(document):
        value = document[key]
        name = prefix + key
        if isinstance(value, dict):
            row.update(flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            row[name] = json.dumps(list(value))
        else:
            row[name] = value
    return row


def write_csv_row(path, document):
    """Write the header and the single row of a flattened document"""
    row = flatten(document)
    write_csv_rows(path, [row], sorted(row))


def write_csv_rows(path, rows, fieldnames):
    """Write rows (dicts) under fieldnames, header first"""
    with open(path, "w") as csv_file:
        writer = csv.DictWriter(csv_file, fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    logging.info("%d csv row(s) written to %s", len(rows), path)
