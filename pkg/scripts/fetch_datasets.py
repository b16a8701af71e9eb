#!/usr/bin/env python3
"""Fetch and normalize the benchmark event streams the test suite can use.

Each dataset lands in data/ as `<name>.txt` (or `.txt.gz` for the large
ones) with one `src dst time` line per event, the format motifcast
ingests. Already-normalized files are left alone, so the script is safe
to re-run. Downloads need outbound HTTPS; on machines without network
access, copy the normalized files in from elsewhere instead.

SMS-A is not publicly mirrored; see the note printed for it.
"""

import argparse
import gzip
import io
import pathlib
import shutil
import sys
import tarfile
import urllib.request

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"

SNAP = {
    "collegemsg": "https://snap.stanford.edu/data/CollegeMsg.txt.gz",
    "email-eu": "https://snap.stanford.edu/data/email-Eu-core-temporal.txt.gz",
    "wiki-talk": "https://snap.stanford.edu/data/wiki-talk-temporal.txt.gz",
}
KONECT_FBWALL = "http://konect.cc/files/download.tsv.facebook-wosn-wall.tar.bz2"

# wiki-talk is ~160 MB as plain text; keep it compressed
COMPRESSED = {"wiki-talk"}

SMS_A_NOTE = """\
sms-a: no public mirror to download from. Obtain the SMS interaction
stream from its maintainers, convert it to one 'src dst unix_time' line
per message, and save it as {target}. The ingest layer accepts integer
ids and integer or float timestamps, extra whitespace, and a .gz suffix.
"""


def _download(url: str) -> bytes:
    print(f"  downloading {url}")
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read()


def _write_lines(target: pathlib.Path, lines) -> int:
    opener = gzip.open if target.suffix == ".gz" else open
    count = 0
    with opener(target, "wt", encoding="ascii", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            count += 1
    return count


def _normalize_snap(raw: bytes):
    """SNAP temporal lists are already 'src dst time'; strip blanks/comments."""
    with gzip.open(io.BytesIO(raw), "rt", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(("#", "%")):
                continue
            parts = line.split()
            yield f"{parts[0]} {parts[1]} {parts[2]}\n"


def _normalize_konect_wall(raw: bytes):
    """KONECT edge lists carry 'src dst weight time'; keep src dst time."""
    with tarfile.open(fileobj=io.BytesIO(raw), mode="r:bz2") as tar:
        member = next(
            m for m in tar.getmembers() if m.name.endswith("out.facebook-wosn-wall")
        )
        fh = io.TextIOWrapper(tar.extractfile(member), encoding="ascii")
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            yield f"{parts[0]} {parts[1]} {parts[3]}\n"


def target_for(name: str) -> pathlib.Path:
    suffix = ".txt.gz" if name in COMPRESSED else ".txt"
    return DATA_DIR / f"{name}{suffix}"


def fetch(name: str) -> bool:
    target = target_for(name)
    if any((DATA_DIR / f"{name}{s}").exists() for s in (".txt", ".txt.gz")):
        print(f"{name}: already present, skipping")
        return True
    print(f"{name}:")
    if name in SNAP:
        lines = _normalize_snap(_download(SNAP[name]))
    elif name == "fbwall":
        lines = _normalize_konect_wall(_download(KONECT_FBWALL))
    elif name == "sms-a":
        print(SMS_A_NOTE.format(target=target))
        return False
    else:
        raise SystemExit(f"unknown dataset {name!r}")
    tmp = target.with_name(target.name + ".part")
    try:
        count = _write_lines(tmp, lines)
        tmp.replace(target)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    print(f"  wrote {count} events to {target}")
    return True


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "datasets", nargs="*",
        default=["collegemsg", "email-eu", "fbwall", "wiki-talk", "sms-a"],
        help="datasets to fetch (default: all five)",
    )
    args = parser.parse_args(argv)
    DATA_DIR.mkdir(exist_ok=True)
    if shutil.disk_usage(DATA_DIR).free < 2 * 1024**3:
        print("warning: less than 2 GB free; wiki-talk may not fit", file=sys.stderr)
    missing = [name for name in args.datasets if not fetch(name)]
    if missing:
        print(f"not fetched: {', '.join(missing)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
