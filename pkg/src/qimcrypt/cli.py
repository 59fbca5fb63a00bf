"""``qimcrypt`` command line.

Exit codes: 0 ok, 2 usage, 3 malformed PGM, 4 invalid key, 5 image side not a
power of two, 6 simulation width limit.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import sys
from importlib import resources
from pathlib import Path

import click

from . import cipher, metrics, qsim
from .pgm import PGMError, read_pgm, write_pgm
from .qcircuit import dumps_netlist, transpile_to_basis
from .qimage import ImageSizeError, build_naive_neqr_circuit, data_width, reconstruct_image
from .report import rows_csv, rows_table, synth_report
from .synth import factor_shared_controls, synthesize_minimized_encoder

EXIT_PGM = 3
EXIT_KEY = 4
EXIT_SIZE = 5
EXIT_WIDTH = 6

LARGE_ORDER = 5  # n >= 5 (18+ qubits) needs --large


def bundled(name: str) -> Path:
    return Path(str(resources.files("qimcrypt") / "data" / name))


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PGMError as exc:
            _die(f"malformed PGM: {exc}", EXIT_PGM)
        except cipher.InvalidKeyError as exc:
            _die(f"invalid key: {exc}", EXIT_KEY)
        except ImageSizeError as exc:
            _die(f"bad image size: {exc}", EXIT_SIZE)
        except qsim.WidthLimitError as exc:
            _die(f"width limit: {exc}", EXIT_WIDTH)
    return wrapper


def _die(msg: str, code: int):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _image(path: str | None):
    return read_pgm(path if path else bundled("test_2x2.pgm"))


def _key(path: str | None):
    return cipher.load_key(path if path else bundled("paper_key.json"))


def parse_gammas(spec: str) -> list[float]:
    """``a:b:step`` inclusive grid, or a comma list, or a single value."""
    try:
        if ":" in spec:
            a, b, step = (float(v) for v in spec.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            count = int(round((b - a) / step))
            grid = [round(a + i * step, 12) for i in range(count + 1)]
        else:
            grid = [float(v) for v in spec.split(",")]
    except ValueError as exc:
        raise click.BadParameter(f"cannot parse gamma grid {spec!r}: {exc}")
    if any(not 0 <= g <= 1 for g in grid):
        raise click.BadParameter("gamma grid must lie in [0, 1]")
    return grid


def _check_large(n: int, large: bool) -> None:
    if n >= LARGE_ORDER and not large:
        raise qsim.WidthLimitError(
            f"{data_width(n)}-qubit statevector; pass --large to simulate images of order >= {LARGE_ORDER}")


@click.group()
@click.version_option(package_name="qimcrypt")
def main():
    """NEQR image encoding, encryption, circuit compression and noise analysis."""


@main.command()
@click.argument("image", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="encode_out", show_default=True)
@click.option("--shots", type=click.IntRange(min=1), default=8192, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--basis", is_flag=True, help="Write the netlist lowered to {x, sx, rz, cx}.")
@click.option("--compress", type=click.Choice(["naive", "minimized", "factored"]), default="naive",
              show_default=True)
@click.option("--large", is_flag=True, help="Allow images of order 5 and above.")
@_guard
def encode(image, out_dir, shots, seed, basis, compress, large):
    """Build the NEQR circuit, simulate it and sample a histogram."""
    img = _image(image)
    _check_large(img.n, large)
    if compress == "naive":
        circ = build_naive_neqr_circuit(img)
    else:
        circ = synthesize_minimized_encoder(img)
        if compress == "factored":
            circ = factor_shared_controls(circ)
    state = qsim.run_statevector(circ).restrict(data_width(img.n))
    counts = qsim.sample_counts(state, shots, seed)
    recovered, coverage = reconstruct_image(counts, img.n)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "circuit.txt").write_text(dumps_netlist(transpile_to_basis(circ) if basis else circ))
    with open(out / "statevector.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "bitstring", "real", "imag"])
        for k, a in sorted(state.nonzero(1e-12).items()):
            w.writerow([k, format(k, f"0{state.width}b"), repr(a.real), repr(a.imag)])
    with open(out / "histogram.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bitstring", "count"])
        for bits in sorted(counts):
            w.writerow([bits, counts[bits]])
    write_pgm(out / "reconstructed.pgm", recovered)
    click.echo(f"gates={len(circ)} width={circ.width} outcomes={len(counts)} "
               f"recovered={'yes' if recovered == img else 'no'} missing={len(coverage.missing)}")


@main.command()
@click.argument("image", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False),
              help="Also tabulate encryption and decryption circuits.")
@click.option("--format", "fmt", type=click.Choice(["csv", "table"]), default="table", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@_guard
def synth(image, key_path, fmt, out):
    """Naive vs minimized vs factored gate counts, basis cost and depth."""
    img = _image(image)
    key = cipher.load_key(key_path) if key_path else None
    rows = synth_report(img, key)
    _emit(rows_csv(rows) if fmt == "csv" else rows_table(rows), out)


def _crypt(func, image, key_path, out, ascii_):
    img = read_pgm(image)
    key = _key(key_path)
    result = func(img, key)
    write_pgm(out, result, binary=not ascii_)
    click.echo(" ".join(f"{k}:{v}" for k, v in result.by_position().items()))


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False),
              help="Key file (defaults to the bundled worked-example key).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--ascii", "ascii_", is_flag=True, help="Write P2 instead of P5.")
@_guard
def encrypt(image, key_path, out, ascii_):
    """Encrypt a PGM image."""
    _crypt(cipher.encrypt, image, key_path, out, ascii_)


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "key_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--ascii", "ascii_", is_flag=True, help="Write P2 instead of P5.")
@_guard
def decrypt(image, key_path, out, ascii_):
    """Decrypt a PGM image."""
    _crypt(cipher.decrypt, image, key_path, out, ascii_)


@main.command()
@click.argument("first", type=click.Path(exists=True, dir_okay=False))
@click.argument("second", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "table"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--diff", "diff_out", type=click.Path(dir_okay=False), help="Write |a - b| as PGM.")
@_guard
def analyze(first, second, fmt, out, diff_out):
    """Correlation, NPCR, UACI, MSE and PSNR between two images."""
    a, b = read_pgm(first), read_pgm(second)
    rep = metrics.compare(a, b)
    text = metrics.reports_csv([rep]) if fmt == "csv" else metrics.reports_table([rep])
    _emit(text, out)
    if diff_out:
        write_pgm(diff_out, metrics.differential_image(a, b))


@main.command("noise-sweep")
@click.argument("image", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--gammas", default="0:1:0.1", show_default=True, help="a:b:step grid or comma list.")
@click.option("--gamma", "gamma_single", multiple=True, type=float, help="Single gamma; repeatable.")
@click.option("--noise-mode", type=click.Choice(["cptp", "paper"]), default="cptp", show_default=True)
@click.option("--channel", "channels", multiple=True, type=click.Choice(qsim.CHANNELS),
              help="Restrict to these channels (default: all six).")
@click.option("--format", "fmt", type=click.Choice(["csv", "table"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@_guard
def noise_sweep(image, gammas, gamma_single, noise_mode, channels, fmt, out):
    """Fidelity of the NEQR state under each Kraus channel over a gamma grid."""
    img = _image(image)
    if data_width(img.n) > qsim.MAX_DM_WIDTH:
        raise qsim.WidthLimitError(
            f"density-matrix noise is capped at {qsim.MAX_DM_WIDTH} qubits; "
            f"a {img.side}x{img.side} image needs {data_width(img.n)}")
    grid = list(gamma_single) if gamma_single else parse_gammas(gammas)
    if any(not 0 <= g <= 1 for g in grid):
        raise click.BadParameter("gamma must lie in [0, 1]")
    state = qsim.run_statevector(build_naive_neqr_circuit(img))
    points = qsim.noise_sweep(state, channels or qsim.CHANNELS, grid, noise_mode)
    text = qsim.sweep_csv(points)
    if fmt == "table":
        rows = list(csv.reader(io.StringIO(text)))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        text = "\n".join("  ".join(c.rjust(widths[i]) for i, c in enumerate(r)) for r in rows) + "\n"
    _emit(text, out)


@main.command()
@click.option("--order", "-n", "n", type=click.IntRange(min=1), default=1, show_default=True,
              help="Grid order n (side 2^n).")
@click.option("--seed", type=int)
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--summary/--no-summary", default=True, show_default=True,
              help="Print the keyspace summary to stderr.")
def keygen(n, seed, out, summary):
    """Emit a random valid key as JSON."""
    key = cipher.random_key(n, seed)
    _emit(json.dumps(cipher.key_to_dict(key), indent=2) + "\n", out)
    if summary:
        ks = cipher.keyspace_summary(n)
        click.echo(
            f"keyspace: affine {ks['affine_register_bits']} register bits "
            f"({ks['affine_valid_log2']:.2f} bits of valid keys), chaotic {ks['chaotic_bits']} bits; "
            f"additive 2^{ks['additive_log2']:.2f}, multiplicative 2^{ks['multiplicative_log2']} "
            f"({ks['note']})",
            err=True,
        )


if __name__ == "__main__":
    main()
