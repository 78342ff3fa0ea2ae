# agents/verifier.py
"""
VerifierAgent - runs the registered structural checks (golden tables, lattice
identities, quantizer traces, flop formulas).

Each check is a function returning a short detail string on success and raising
AssertionError (or anything else) on failure. Failures are recorded per check;
one broken check never stops the others.
"""
from pathlib import Path
from typing import Callable, Dict, List, Optional
import logging
import math

import numpy as np

from logic_blocks.codebook import build_slm_bw, build_slm_cb, import_codebook, shell_partition
from logic_blocks.detect import (
    LatticeSphereDecoder,
    flops_lsd_worst,
    flops_ml_sm,
    flops_ml_slm,
    flops_ml_slm_cb_closed_form,
)
from logic_blocks.lattice import (
    QuantizerKind,
    barnes_wall_generator,
    cubic_generator,
    enumerate_shell,
    nested_voronoi_set,
    quantize,
    scaled_cubic,
)

logger = logging.getLogger("verifier")

GOLDENS_DIR = Path(__file__).resolve().parents[1] / "goldens"
SLM_CB_GOLDEN = "slm_cb_2_2.txt"
SLM_BW_GOLDEN = "slm_bw_2_6.txt"


def _compare_golden(golden: Path, built) -> None:
    ref = import_codebook(golden)
    assert ref.family is built.family, f"{golden.name}: family {ref.family.value} != {built.family.value}"
    assert ref.vectors.shape == built.vectors.shape, f"{golden.name}: shape {ref.vectors.shape} != {built.vectors.shape}"
    diff = np.nonzero(np.any(ref.vectors != built.vectors, axis=1))[0]
    assert len(diff) == 0, f"{golden.name}: first mismatch at vector {int(diff[0])}"


def check_slm_cb_golden(goldens: Path) -> str:
    cb = build_slm_cb(2, 2)
    part = shell_partition(cb, by="active")
    assert part == {0: 1, 1: 8, 2: 24, 3: 32, 4: 16}, f"active-dimension partition {part}"
    _compare_golden(goldens / SLM_CB_GOLDEN, cb)
    return "81 vectors, partition 1/8/24/32/16"


def check_slm_bw_golden(goldens: Path) -> str:
    cb = build_slm_bw(2, 6)
    part = shell_partition(cb, by="power")
    assert part == {0: 1, 2: 24, 4: 24, 6: 96}, f"power partition {part}"
    _compare_golden(goldens / SLM_BW_GOLDEN, cb)
    return "145 vectors, partition 1/24/24/96"


def check_barnes_wall_identities(goldens: Path) -> str:
    for m in range(4):
        spec = barnes_wall_generator(m)
        d2 = 2 ** m
        for p in range(1, d2):
            assert len(enumerate_shell(spec, p)) == 0, f"m={m}: nonzero vector of power {p}"
        kissing = len(enumerate_shell(spec, d2))
        expected = math.prod(2 ** i + 2 for i in range(1, m + 2))
        assert kissing == expected == spec.kissing, f"m={m}: kissing {kissing} != {expected}"
        assert spec.d2min == d2
        n = spec.dimension
        assert abs(float(spec.volume) ** (1.0 / 2 ** m) - 2 ** (m / 2)) < 1e-9, f"m={m}: volume {spec.volume}"
        assert abs(spec.coding_gain - 2 ** (m / 2)) < 1e-9, f"m={m}: coding gain {spec.coding_gain} (n={n})"
    return "m=0..3 d2min and kissing match closed forms"


def check_coding_gain(goldens: Path) -> str:
    expected = {1: 1.51, 2: 3.01, 3: 4.52}
    got = {m: barnes_wall_generator(m).coding_gain_db for m in expected}
    for m, db in expected.items():
        assert abs(got[m] - db) < 0.01, f"BW{2 ** (m + 1)} coding gain {got[m]:.3f} dB != {db}"
    return ", ".join(f"BW{2 ** (m + 1)} {got[m]:.2f} dB" for m in expected)


def check_quantizer_oracle(goldens: Path, points: int = 10_000) -> str:
    spec = barnes_wall_generator(1)
    x = np.random.default_rng(4).uniform(-4, 4, size=(points, 4))
    fast = quantize(spec, QuantizerKind.DN_FAST, x)
    d_fast = ((x - fast) ** 2).sum(axis=1)
    for i in range(points):
        ref = quantize(spec, QuantizerKind.EXACT_ENUMERATION, x[i])
        d_ref = float(((x[i] - ref) ** 2).sum())
        assert abs(d_fast[i] - d_ref) < 1e-9, f"point {i}: DnFast {d_fast[i]} vs exact {d_ref}"
    return f"{points} points agree"


def check_quantizer_traces(goldens: Path) -> str:
    spec = barnes_wall_generator(1)
    x_hat = np.array([1.32, -2.51, -0.41, 2.70])
    q = quantize(spec, QuantizerKind.DN_FAST, x_hat)
    assert q.tolist() == [1, -2, 0, 3], f"D4 quantizer gave {q.tolist()}"
    lsd = LatticeSphereDecoder(build_slm_bw(2, 6))
    start, calls = lsd.initial_point(x_hat)
    assert calls == 2 and start.tolist() == [1, -1, 0, 2], f"rescaled start {start.tolist()}"
    count = len(lsd.candidates(start))
    assert count == 12, f"candidate set has {count} vectors"
    return "[1,-2,0,3] -> [1,-1,0,2], 12 candidates"


def check_flops(goldens: Path) -> str:
    assert flops_ml_sm(2, 8, 16) == 279, "SM ML flops for (2, 8, M=16)"
    for n_t, n_r, m in ((1, 2, 2), (2, 4, 2), (2, 8, 4)):
        cb = build_slm_cb(n_t, m)
        assert flops_ml_slm(cb, n_r) == flops_ml_slm_cb_closed_form(n_t, n_r, m), f"SLM-CB ML flops ({n_t},{n_r},{m})"
    worst = flops_lsd_worst(2, 4, 24)
    by_hand = 4 * 8 + 12 * 4 * 4 + 7 * 4 + 6 * 2 * 4 - 4 * 2 + 24 * (4 * 2 * 4 + 4 * 2 + 2 * 4 - 1) + (8 * 2 - 2)
    assert worst == by_hand, f"LSD worst case {worst} != {by_hand}"
    return f"SM 279, LSD worst (2,4) {worst}"


def check_nested_set(goldens: Path) -> str:
    fine, coarse = cubic_generator(4), scaled_cubic(4, 3)
    cell = nested_voronoi_set(fine, coarse)
    cb = build_slm_cb(2, 2)
    assert np.array_equal(cell, cb.vectors), "Voronoi-cell set differs from SLM-CB(2,2)"
    return "Z^4 / 3Z^4 cell equals SLM-CB(2,2)"


def check_cardinality(goldens: Path) -> str:
    for n_t in (1, 2, 3):
        for m in (2, 4):
            part = shell_partition(build_slm_cb(n_t, m), by="active")
            for n_a, count in part.items():
                assert count == math.comb(2 * n_t, n_a) * m ** n_a, f"({n_t},{m}) N_a={n_a}: {count}"
            assert sum(part.values()) == (m + 1) ** (2 * n_t)
    return "binomial partition holds for n_t<=3, M<=4"


REGISTERED_CHECKS: Dict[str, Callable[[Path], str]] = {
    "slm_cb_golden": check_slm_cb_golden,
    "slm_bw_golden": check_slm_bw_golden,
    "barnes_wall_identities": check_barnes_wall_identities,
    "coding_gain": check_coding_gain,
    "quantizer_oracle": check_quantizer_oracle,
    "quantizer_traces": check_quantizer_traces,
    "flop_formulas": check_flops,
    "nested_voronoi_set": check_nested_set,
    "cardinality_identity": check_cardinality,
}


class VerifierAgent:
    def __init__(self, goldens_dir: str = None, config: Dict = None):
        self.goldens_dir = Path(goldens_dir) if goldens_dir else GOLDENS_DIR
        self.config = config or {}

    def run(self, only: Optional[List[str]] = None) -> Dict:
        names = only or list(REGISTERED_CHECKS)
        checks = {}
        for name in names:
            fn = REGISTERED_CHECKS.get(name)
            if fn is None:
                checks[name] = {"ok": False, "detail": "no such check"}
                continue
            try:
                checks[name] = {"ok": True, "detail": fn(self.goldens_dir)}
            except Exception as e:
                checks[name] = {"ok": False, "detail": f"{type(e).__name__}: {e}"}
            logger.info("%s: %s - %s", name, "PASS" if checks[name]["ok"] else "FAIL", checks[name]["detail"])
        return {"checks": checks, "passed": all(c["ok"] for c in checks.values())}
