# run_pipeline.py -- typer command-line driver
"""
Experiment driver.

  python run_pipeline.py sver inputs/sver_slm_bw_9bit.json --workers 4
  python run_pipeline.py mi inputs/mi_slm_cb_2x4_m2.json --snr "-10:40:5"
  python run_pipeline.py bounds inputs/sver_slm_bw_9bit.json
  python run_pipeline.py codebook export --family SLM-BW --n-t 2 --p-max 6 --out bw.txt
  python run_pipeline.py codebook import bw.txt
  python run_pipeline.py verify

Exit codes: 0 success, 1 validation error, 2 verification failure.
"""
from typing import Any, Dict, List, Optional
import logging
import sys

import typer

from logic_blocks.errors import SLMError

app = typer.Typer(add_completion=False, help="Spatial lattice modulation simulator")
codebook_app = typer.Typer(add_completion=False, help="Codebook file export and import")
app.add_typer(codebook_app, name="codebook")

logger = logging.getLogger("run_pipeline")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2


@app.callback()
def _setup(verbose: bool = typer.Option(False, "--verbose", "-v", help="debug logging")):
    logging.basicConfig(format="[%(name)s] %(message)s", level=logging.DEBUG if verbose else logging.INFO, force=True)


def _fail(message: str, code: int = EXIT_INVALID):
    typer.echo(f"[run_pipeline] {message}", err=True)
    raise typer.Exit(code=code)


def _overrides(**options) -> Dict[str, Any]:
    from agents.config_parser import parse_set_options

    extra = parse_set_options(options.pop("set_items"))
    keys = {
        "n_r": "n_r",
        "snr": "snr_db",
        "detector": "detector",
        "seed": "seed",
        "output": "output",
        "label": "label",
        "trials": "simulation.trials",
        "target_errors": "simulation.target_errors",
        "workers": "simulation.workers",
        "chunk_size": "simulation.chunk_size",
        "channels": "mi.channels",
        "noise_samples": "mi.noise_samples",
    }
    out = {keys[k]: v for k, v in options.items() if v is not None}
    out.update(extra)
    return out


def _run_mode(mode: str, config: str, outputs_dir: str, overrides: Dict[str, Any]):
    # lazy import to avoid import-time side-effects
    from agents.orchestrator import OrchestratorAgent

    try:
        res = OrchestratorAgent().run(mode, config, overrides, outputs_dir)
    except (FileNotFoundError, SLMError, ValueError) as e:
        _fail(str(e))
    typer.echo(f"Run complete. Curves: {len(res['curves'])}, written to {res['output']}")


_N_R = typer.Option(None, "--n-r", help="receive antennas")
_SNR = typer.Option(None, "--snr", help="SNR grid, list JSON or start:stop:step")
_DET = typer.Option(None, "--detector", help="ml, mmse, zf or lsd")
_SEED = typer.Option(None, "--seed")
_OUT = typer.Option(None, "--output", help="CSV path")
_LABEL = typer.Option(None, "--label")
_SET = typer.Option(None, "--set", help="section.key=value override, repeatable")
_DIR = typer.Option("outputs", "--outputs-dir")


def _snr_value(snr: Optional[str]):
    if snr is None:
        return None
    text = snr.strip()
    if text.startswith("["):
        import json

        return json.loads(text)
    if ":" in text:
        return text
    return [float(s) for s in text.split(",") if s.strip()]


@app.command("sver")
def sver(
    config: str = typer.Argument(..., help="experiment JSON"),
    n_r: Optional[int] = _N_R,
    snr: Optional[str] = _SNR,
    detector: Optional[str] = _DET,
    trials: Optional[int] = typer.Option(None, "--trials", help="trial cap per SNR point"),
    target_errors: Optional[int] = typer.Option(None, "--target-errors"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    chunk_size: Optional[int] = typer.Option(None, "--chunk-size"),
    seed: Optional[int] = _SEED,
    output: Optional[str] = _OUT,
    label: Optional[str] = _LABEL,
    set_items: Optional[List[str]] = _SET,
    outputs_dir: str = _DIR,
):
    """Monte Carlo symbol-vector error rate sweep."""
    try:
        overrides = _overrides(
            n_r=n_r, snr=_snr_value(snr), detector=detector, trials=trials, target_errors=target_errors,
            workers=workers, chunk_size=chunk_size, seed=seed, output=output, label=label, set_items=set_items,
        )
    except (SLMError, ValueError) as e:
        _fail(str(e))
    _run_mode("sver", config, outputs_dir, overrides)


@app.command("mi")
def mi(
    config: str = typer.Argument(..., help="experiment JSON"),
    n_r: Optional[int] = _N_R,
    snr: Optional[str] = _SNR,
    channels: Optional[int] = typer.Option(None, "--channels", help="channel draws per SNR point"),
    noise_samples: Optional[int] = typer.Option(None, "--noise-samples"),
    workers: Optional[int] = typer.Option(None, "--workers"),
    seed: Optional[int] = _SEED,
    output: Optional[str] = _OUT,
    label: Optional[str] = _LABEL,
    set_items: Optional[List[str]] = _SET,
    outputs_dir: str = _DIR,
):
    """Channel-averaged mutual information, its closed-form approximation and the Gaussian reference."""
    try:
        overrides = _overrides(
            n_r=n_r, snr=_snr_value(snr), channels=channels, noise_samples=noise_samples, workers=workers,
            seed=seed, output=output, label=label, set_items=set_items,
        )
    except (SLMError, ValueError) as e:
        _fail(str(e))
    _run_mode("mi", config, outputs_dir, overrides)


@app.command("bounds")
def bounds(
    config: str = typer.Argument(..., help="experiment JSON"),
    n_r: Optional[int] = _N_R,
    snr: Optional[str] = _SNR,
    output: Optional[str] = _OUT,
    label: Optional[str] = _LABEL,
    set_items: Optional[List[str]] = _SET,
    outputs_dir: str = _DIR,
):
    """Closed-form MI and ASVEP curves only; no simulation."""
    try:
        overrides = _overrides(n_r=n_r, snr=_snr_value(snr), output=output, label=label, set_items=set_items)
    except (SLMError, ValueError) as e:
        _fail(str(e))
    _run_mode("bounds", config, outputs_dir, overrides)


@codebook_app.command("export")
def codebook_export(
    out: str = typer.Option(..., "--out", help="destination text file"),
    config: Optional[str] = typer.Option(None, "--config", help="take the codebook section from an experiment JSON"),
    family: Optional[str] = typer.Option(None, "--family"),
    n_t: Optional[int] = typer.Option(None, "--n-t"),
    m: Optional[int] = typer.Option(None, "--m"),
    p_max: Optional[int] = typer.Option(None, "--p-max"),
    constellation: Optional[str] = typer.Option(None, "--constellation", help="label, or comma list for SMX"),
    bits: Optional[int] = typer.Option(None, "--bits"),
    size: Optional[int] = typer.Option(None, "--size"),
    normalized: bool = typer.Option(False, "--normalize/--raw", help="apply the E_s scale before writing"),
):
    """Write a codebook as a header plus one vector per line."""
    from agents.orchestrator import OrchestratorAgent

    source: Any = config
    if config is None:
        if family is None or n_t is None:
            _fail("give --config or both --family and --n-t")
        section: Dict[str, Any] = {"family": family}
        if constellation is not None:
            parts = [s.strip() for s in constellation.split(",")]
            section["constellation"] = parts if len(parts) > 1 else parts[0]
        for key, value in (("m", m), ("p_max", p_max), ("bits", bits), ("size", size)):
            if value is not None:
                section[key] = value
        source = {"n_t": n_t, "n_r": 1, "snr_db": [0.0], "codebook": section}
    try:
        path = OrchestratorAgent().export(source, out, None, normalized)
    except (FileNotFoundError, SLMError, ValueError) as e:
        _fail(str(e))
    typer.echo(f"Codebook written to {path}")


@codebook_app.command("import")
def codebook_import(path: str = typer.Argument(..., help="codebook text file")):
    """Validate a codebook file and print its shell partition."""
    from logic_blocks.codebook import import_codebook, shell_partition

    try:
        cb = import_codebook(path)
    except (FileNotFoundError, SLMError, ValueError) as e:
        _fail(str(e))
    typer.echo(f"{cb.family.value} n_t={cb.n_t} param={cb.param} vectors={len(cb)} selected={cb.n_selected} bits={cb.bits}")
    typer.echo(f"power shells: {shell_partition(cb, by='power')}")


@app.command("verify")
def verify(
    goldens: Optional[str] = typer.Option(None, "--goldens", help="directory holding the golden codebooks"),
    check: Optional[List[str]] = typer.Option(None, "--check", help="run only the named check, repeatable"),
):
    """Run the built-in structural checks; exit 2 when any fails."""
    from agents.verifier import VerifierAgent

    report = VerifierAgent(goldens_dir=goldens).run(check)
    for name, res in report["checks"].items():
        typer.echo(f"{'PASS' if res['ok'] else 'FAIL'}  {name}: {res['detail']}")
    if not report["passed"]:
        raise typer.Exit(code=EXIT_VERIFY_FAILED)


def main(argv=None) -> int:
    try:
        rv = app(args=argv, standalone_mode=False)
    except typer.Exit as e:
        return e.exit_code
    except Exception as e:  # click usage errors and the like
        print(f"[run_pipeline] {e}", file=sys.stderr)
        return EXIT_INVALID
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
