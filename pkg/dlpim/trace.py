#!/usr/bin/env python3

from __future__ import annotations

import gzip
import hashlib
import os
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Iterator, Optional

from dlpim.exceptions import TraceFileNotFound, TraceParseError

GZIP_MAGIC = b'\x1f\x8b'


class Op(Enum):
    """Memory operation of a trace record."""
    READ = 'R'
    WRITE = 'W'


@dataclass(frozen=True)
class TraceRecord:
    """One memory request of a core."""
    delta: int
    core: int
    op: Op
    addr: int

    @property
    def is_write(self) -> bool:
        return self.op == Op.WRITE

    def to_line(self) -> str:
        return f'{self.delta} {self.core} {self.op.value} {self.addr:#x}'


def parse_line(line: str, path: str = '<trace>',
               line_no: int = 0) -> Optional[TraceRecord]:
    """Parses a `delta core R|W 0xADDR` line. Blank lines and comments give
    None."""
    text = line.split('#', 1)[0].strip()
    if not text:
        return None

    fields = text.split()
    if len(fields) != 4:
        raise TraceParseError(path, line_no, line,
                              f'expected 4 fields, got {len(fields)}')

    try:
        delta = int(fields[0])
        core = int(fields[1])
    except ValueError:
        raise TraceParseError(path, line_no, line,
                              'delta and core must be integers')
    if delta < 0 or core < 0:
        raise TraceParseError(path, line_no, line,
                              'delta and core must not be negative')

    try:
        op = Op(fields[2].upper())
    except ValueError:
        raise TraceParseError(path, line_no, line,
                              f'unknown operation {fields[2]!r}')

    try:
        addr = int(fields[3], 0)
    except ValueError:
        raise TraceParseError(path, line_no, line,
                              f'invalid address {fields[3]!r}')
    if addr < 0:
        raise TraceParseError(path, line_no, line,
                              'address must not be negative')

    return TraceRecord(delta, core, op, addr)


def _open(path: str) -> IO[bytes]:
    """Opens a trace file, transparently decompressing gzip files."""
    if not os.path.exists(path):
        raise TraceFileNotFound(path)

    with open(path, 'rb') as f:
        magic = f.read(2)
    if magic == GZIP_MAGIC:
        return gzip.open(path, 'rb')
    return open(path, 'rb')


def read_trace(path: str) -> Iterator[TraceRecord]:
    """Streams the records of a trace file."""
    line_no = 0
    with _open(path) as f:
        try:
            for line_no, raw in enumerate(f, start=1):
                try:
                    line = raw.decode('utf-8')
                except UnicodeDecodeError as e:
                    raise TraceParseError(
                        path, line_no, repr(raw),
                        f'not valid UTF-8 text ({e.reason})')

                record = parse_line(line, path, line_no)
                if record is not None:
                    yield record
        except (gzip.BadGzipFile, EOFError) as e:
            raise TraceParseError(path, line_no + 1, '',
                                  f'broken gzip stream ({e})')


def write_trace(path: str, records: Iterable[TraceRecord],
                header: Optional[str] = None) -> int:
    """Writes records to a trace file, gzip compressed when the name ends in
    .gz. Returns the number of records written."""
    count = 0
    opener = gzip.open if path.endswith('.gz') else open
    with opener(path, 'wt', encoding='utf-8') as f:
        if header is not None:
            for line in header.splitlines():
                f.write(f'# {line}\n')
        for record in records:
            f.write(record.to_line() + '\n')
            count += 1

    return count


def trace_digest(records: Iterable[TraceRecord]) -> str:
    """Fingerprint of a trace's contents, independent of its file format."""
    sha = hashlib.sha256()
    for record in records:
        sha.update(record.to_line().encode('utf-8'))
        sha.update(b'\n')

    return sha.hexdigest()[:16]
