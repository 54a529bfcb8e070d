"""Stochastic ensembles of defect-sampled devices.

Each sample draws independent backscatter parameters for the pump, signal
and idler resonances, solves the pipeline, and records resonance lineshape
statistics plus the f-f biphoton metrics.  Per-sample RNG streams are
spawned from one seed so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gaussring.analysis import heralded_density
from gaussring.engine import run_scenario
from gaussring.gaussdyn import NonlinearCoupling
from gaussring.lingrid import KGrid
from gaussring.model import ModelError, SolverError
from gaussring.ringscene import (
    ResonanceDefects,
    RingDefectParams,
    build_fwm_scenario,
)

_RESONANCES = ("pump", "signal", "idler")
_PARAMS = ("g", "delta_fb", "delta_bf", "c")


@dataclass(frozen=True)
class EnsembleConfig:
    """Sampling ranges and bookkeeping for a defect ensemble.

    Magnitudes are uniform on (0, max); phases uniform on (0, 2 pi); every
    parameter of every resonance is drawn independently unless
    ``per_resonance_independent`` is cleared, in which case one resonance
    draw is shared by all three.
    """

    n_samples: int = 1000
    g_max: float = 1e10
    delta_f_max: float = 0.2
    delta_b_max: float = 0.2
    c_max: float = 0.2
    seed: int = 0
    per_resonance_independent: bool = True
    engine: str = "full"

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        for name in ("g_max", "delta_f_max", "delta_b_max", "c_max"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples, "g_max": self.g_max,
            "delta_f_max": self.delta_f_max, "delta_b_max": self.delta_b_max,
            "c_max": self.c_max, "seed": self.seed,
            "per_resonance_independent": self.per_resonance_independent,
            "engine": self.engine,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleConfig":
        return cls(**d)


def _draw_resonance(rng: np.random.Generator, cfg: EnsembleConfig
                    ) -> ResonanceDefects:
    maxima = {"g": cfg.g_max, "delta_fb": cfg.delta_f_max,
              "delta_bf": cfg.delta_b_max, "c": cfg.c_max}
    vals = {}
    for name in _PARAMS:
        mag = rng.uniform(0.0, maxima[name])
        phase = rng.uniform(0.0, 2.0 * np.pi)
        vals[name] = mag * np.exp(1j * phase)
    return ResonanceDefects(**vals)


def sample_defects(config: EnsembleConfig) -> list[RingDefectParams]:
    """Draw all per-sample defect parameters up front, one spawned RNG
    stream per sample, so the list is a pure function of the seed."""
    streams = np.random.SeedSequence(config.seed).spawn(config.n_samples)
    out = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        if config.per_resonance_independent:
            draws = {r: _draw_resonance(rng, config) for r in _RESONANCES}
        else:
            shared = _draw_resonance(rng, config)
            draws = {r: shared for r in _RESONANCES}
        out.append(RingDefectParams(**draws))
    return out


@dataclass
class EnsembleSample:
    """Metrics for one ensemble member (or its recorded failure)."""

    index: int
    defects: RingDefectParams
    lineshapes: dict = field(default_factory=dict)
    purity_ff: float | None = None
    pair_probability_ff: float | None = None
    failed: bool = False
    error: str = ""

    def to_row(self) -> dict:
        row: dict = {"index": self.index, "failed": int(self.failed),
                     "error": self.error,
                     "purity_ff": self.purity_ff,
                     "pair_probability_ff": self.pair_probability_ff}
        for res in _RESONANCES:
            stats = self.lineshapes.get(res)
            row[f"{res}_center"] = None if stats is None else stats.center
            row[f"{res}_linewidth"] = None if stats is None else stats.linewidth
            row[f"{res}_min_transmission"] = (None if stats is None
                                              else stats.min_transmission)
        for res in _RESONANCES:
            d = getattr(self.defects, res)
            for p in _PARAMS:
                z = getattr(d, p)
                row[f"{res}_{p}_re"] = z.real
                row[f"{res}_{p}_im"] = z.imag
        return row


@dataclass
class EnsembleReport:
    """Per-sample rows plus aggregates over the successful samples."""

    config: EnsembleConfig
    lambda_scalar: float
    samples: list[EnsembleSample]
    ensemble_purity: float
    n_failures: int

    @property
    def successful(self) -> list[EnsembleSample]:
        return [s for s in self.samples if not s.failed]

    def aggregates(self) -> dict:
        ok = self.successful
        purities = np.array([s.purity_ff for s in ok])
        probs = np.array([s.pair_probability_ff for s in ok])
        best = ok[int(np.argmax(purities))]
        worst = ok[int(np.argmin(purities))]
        agg = {
            "n_samples": len(self.samples),
            "n_failures": self.n_failures,
            "seed": self.config.seed,
            "lambda": self.lambda_scalar,
            "mean_purity_ff": float(purities.mean()),
            "mean_pair_probability_ff": float(probs.mean()),
            "ensemble_purity": self.ensemble_purity,
            "best_sample": best.index, "best_purity": float(purities.max()),
            "worst_sample": worst.index, "worst_purity": float(purities.min()),
        }
        for res in _RESONANCES:
            widths = [s.lineshapes[res].linewidth for s in ok
                      if s.lineshapes.get(res) is not None]
            agg[f"mean_linewidth_{res}"] = (float(np.mean(widths))
                                            if widths else None)
        return agg

    def write_csv(self, path: str) -> None:
        rows = [s.to_row() for s in self.samples]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)

    def write_json(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump({"config": self.config.to_dict(),
                       "aggregates": self.aggregates()}, fh, indent=2)


def evaluate_sample(args: tuple) -> tuple[EnsembleSample, np.ndarray | None]:
    """Solve one ensemble member; returns the metrics row and the heralded
    f-f density matrix (None on failure)."""
    index, defects, lambda_scalar, grid_dict, engine = args
    from gaussring.engine import resonance_lineshapes

    grid = KGrid.from_dict(grid_dict)
    sample = EnsembleSample(index=index, defects=defects)
    try:
        sample.lineshapes = resonance_lineshapes(defects, grid)
        scenario = build_fwm_scenario(defects)
        run = run_scenario(scenario, NonlinearCoupling(lambda_scalar), grid,
                           engine=engine)
        jsa = run.jsa("ff")
        m = run.metrics(("ff",))
        sample.purity_ff = m["purity_ff"]
        sample.pair_probability_ff = m["pair_probability_ff"]
        return sample, heralded_density(jsa)
    except (SolverError, ModelError, np.linalg.LinAlgError) as exc:
        sample.failed = True
        sample.error = f"{type(exc).__name__}: {exc}"
        return sample, None


def run_ensemble(
    config: EnsembleConfig,
    coupling: NonlinearCoupling,
    grid: KGrid | None = None,
    n_workers: int = 1,
) -> EnsembleReport:
    """Run the defect ensemble.

    Defect draws happen up front from spawned RNG streams and the heralded
    densities are accumulated in sample order, so the report is identical
    for any worker count.  Failed samples are counted, never dropped.
    """
    grid = grid or KGrid.default()
    defect_sets = sample_defects(config)
    tasks = [(i, d, coupling.lambda_scalar, grid.to_dict(), config.engine)
             for i, d in enumerate(defect_sets)]

    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(evaluate_sample, tasks, chunksize=8))
    else:
        results = [evaluate_sample(t) for t in tasks]

    samples = []
    rho_sum = None
    n_ok = 0
    for sample, rho in results:
        samples.append(sample)
        if rho is not None:
            rho_sum = rho if rho_sum is None else rho_sum + rho
            n_ok += 1
    if rho_sum is None:
        raise SolverError("every ensemble sample failed")
    ens_purity = float(np.linalg.norm(rho_sum / n_ok) ** 2)
    return EnsembleReport(config=config, lambda_scalar=coupling.lambda_scalar,
                          samples=samples, ensemble_purity=ens_purity,
                          n_failures=len(samples) - n_ok)
