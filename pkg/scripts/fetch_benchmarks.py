"""Fetch the ISCAS-85 gate-level netlists and convert them to BENCH.

The netlists ship inside the MIT-licensed ``circuitgraph`` wheel
(``circuitgraph/netlists/c*.v``).  Usage::

    python scripts/fetch_benchmarks.py [--source DIR] [--out benchmarks/iscas85]
    python scripts/fetch_benchmarks.py --check

Without ``--source`` the wheel is downloaded with ``pip download``.  The
converted files are compared against ``SHA256SUMS`` in the output directory;
``--check`` only verifies the existing files.
"""
import argparse
import hashlib
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

from beolcamo.bench import save_bench
from beolcamo.netlist import stats
from beolcamo.verilog import read_verilog

NAMES = ["c17", "c432", "c499", "c880", "c1355", "c1908", "c2670",
         "c3540", "c5315", "c6288", "c7552"]


def download(tmp: Path) -> Path:
    subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-d", str(tmp),
                    "circuitgraph==0.2.1"], check=True)
    wheel = next(tmp.glob("circuitgraph-*.whl"))
    with zipfile.ZipFile(wheel) as z:
        z.extractall(tmp / "x")
    return tmp / "x" / "circuitgraph" / "netlists"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--source", type=Path, help="directory holding c*.v")
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "benchmarks" / "iscas85")
    ap.add_argument("--check", action="store_true", help="verify existing files only")
    args = ap.parse_args(argv)
    if args.check:
        return 0 if check(args.out) else 1
    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        src = args.source or download(Path(tmp))
        for name in NAMES:
            nl = read_verilog(src / f"{name}.v", name=name)
            s = stats(nl)
            save_bench(nl, args.out / f"{name}.bench", header=[
                f"source: circuitgraph 0.2.1 netlists/{name}.v (MIT licence)",
                f"inputs {s.inputs} outputs {s.outputs} gates {s.gates}"])
            print(f"{name}: {s.inputs} PI, {s.outputs} PO, {s.gates} gates")
    return 0 if check(args.out) else 1


def check(out: Path) -> bool:
    sums = out / "SHA256SUMS"
    if not sums.exists():
        print(f"{sums} missing; nothing to verify")
        return True
    ok = True
    for line in sums.read_text().splitlines():
        digest, name = line.split()
        got = hashlib.sha256((out / name).read_bytes()).hexdigest()
        if got != digest:
            print(f"checksum mismatch: {name}")
            ok = False
    print("checksums ok" if ok else "checksum verification failed")
    return ok


if __name__ == "__main__":
    sys.exit(main())
