"""Batch front-end: config-driven runs, CSV artifacts, verification report.

Invocation:

    defosc <task> [--config FILE] [--param key=value ...] --out DIR

Tasks: spectrum, coherent, compare, commutators, displacement-check,
wavefunction, harmonic-limit.  Each run writes ``<task>.csv`` and
``report.json`` into the output directory and exits 0 only if every
declared check passed.  Output is deterministic for a fixed config:
floats are printed as shortest round-trip decimals and re-runs produce
byte-identical files.

Exit status: 0 all checks passed; 1 some check failed; 2 bad
configuration; 3 truncation failure; 4 quadrature or fitting failure;
5 domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import coherent as cs
from . import fock, models, position
from .errors import ConfigError, DefoscError, DomainError, QuadratureError, TruncationError

__all__ = ["RunConfig", "run", "emit_csv", "main"]

TASKS = (
    "spectrum",
    "coherent",
    "compare",
    "commutators",
    "displacement-check",
    "wavefunction",
    "harmonic-limit",
)

METHODS = (
    "annihilation",
    "annihilation-closed-form",
    "displacement",
    "displacement-direct",
    "displacement-factored",
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_TRUNCATION = 3
EXIT_QUADRATURE = 4
EXIT_DOMAIN = 5

_DEFAULT_CHECK_TOL = {
    "spectrum": 1e-12,
    "coherent": 1e-12,
    "compare": 1e-12,
    "commutators": 1e-12,
    "displacement-check": 1e-9,
    "wavefunction": 1e-6,
    "harmonic-limit": 1e-2,
}

_CONFIG_DEFAULTS: dict[str, Any] = {
    "model": "tpt",
    "lambda": 2.0,
    "a": 1.0,
    "s": 1.0,
    "omega": 1.0,
    "alpha_re": 0.5,
    "alpha_im": 0.0,
    "zeta_re": None,
    "zeta_im": None,
    "cutoff": 128,
    "tail_tol": 1e-12,
    "check_tol": None,
    "grid_nodes": 256,
    "lambdas": [100.0, 1000.0, 10000.0],
    "method": "annihilation",
}


@dataclass(frozen=True)
class RunConfig:
    """One resolved run: a task plus every numeric knob it may need."""

    task: str
    settings: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, task: str, config_path: Optional[str], overrides: list[str]) -> "RunConfig":
        if task not in TASKS:
            raise ConfigError(f"unknown task {task!r}; choose one of {', '.join(TASKS)}")
        merged = dict(_CONFIG_DEFAULTS)
        if config_path is not None:
            try:
                with open(config_path, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise ConfigError("config document must be a JSON object")
            for key, val in doc.items():
                if key == "task":
                    if val != task:
                        raise ConfigError(f"config names task {val!r} but {task!r} was requested")
                    continue
                if key not in merged:
                    raise ConfigError(f"unknown config key {key!r}")
                merged[key] = val
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"--param expects key=value, got {item!r}")
            key, raw = item.split("=", 1)
            if key == "task":
                raise ConfigError("the task is fixed by the positional argument")
            if key not in merged:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                merged[key] = json.loads(raw)
            except json.JSONDecodeError:
                merged[key] = raw
        if merged["check_tol"] is None:
            merged["check_tol"] = _DEFAULT_CHECK_TOL[task]
        cfg = cls(task=task, settings=merged)
        cfg._validate()
        return cfg

    def _validate(self) -> None:
        s = self.settings
        if s["model"] not in ("tpt", "pseudoharmonic", "harmonic"):
            raise ConfigError(f"unknown model {s['model']!r}")
        if s["method"] not in METHODS:
            raise ConfigError(f"unknown method {s['method']!r}; choose one of {', '.join(METHODS)}")
        if not isinstance(s["cutoff"], int) or s["cutoff"] < 2:
            raise ConfigError(f"cutoff must be an integer >= 2, got {s['cutoff']!r}")
        for key in ("tail_tol", "check_tol"):
            if not isinstance(s[key], (int, float)) or s[key] <= 0:
                raise ConfigError(f"{key} must be a positive number, got {s[key]!r}")
        if not isinstance(s["grid_nodes"], int) or s["grid_nodes"] < 2:
            raise ConfigError(f"grid_nodes must be an integer >= 2, got {s['grid_nodes']!r}")
        if not isinstance(s["lambdas"], list) or not s["lambdas"]:
            raise ConfigError("lambdas must be a nonempty list")
        try:
            self.model_params()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def model_params(self) -> models.ModelParams:
        s = self.settings
        if s["model"] == "tpt":
            return models.ModelParams.tpt(float(s["lambda"]), float(s["a"]))
        if s["model"] == "pseudoharmonic":
            return models.ModelParams.pseudoharmonic(float(s["s"]))
        return models.ModelParams.harmonic(float(s["omega"]))

    @property
    def alpha(self) -> complex:
        return complex(float(self.settings["alpha_re"]), float(self.settings["alpha_im"]))

    @property
    def zeta(self) -> Optional[complex]:
        zr, zi = self.settings["zeta_re"], self.settings["zeta_im"]
        if zr is None and zi is None:
            return None
        return complex(float(zr or 0.0), float(zi or 0.0))


def _fmt(cell: Any) -> str:
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return repr(float(cell))
    return str(cell)


def emit_csv(header: list[str], rows: list[list], path: str) -> None:
    """Write a rectangular table: UTF-8, header row, comma separators,
    shortest round-trip floats, "\\n" line terminator."""
    for row in rows:
        if len(row) != len(header):
            raise DomainError(f"row width {len(row)} does not match header width {len(header)}")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _check(check_id: str, parameters: dict, deviation: float, tolerance: float,
           excluded: Optional[list[int]] = None, passed: Optional[bool] = None) -> dict:
    return {
        "id": check_id,
        "parameters": parameters,
        "max_deviation": float(deviation),
        "tolerance": float(tolerance),
        "passed": bool(deviation <= tolerance) if passed is None else bool(passed),
        "excluded_indices": [] if excluded is None else excluded,
    }


def _deformation(p: models.ModelParams) -> models.DeformationFunction:
    return models.deformation_for(p)


def _energies(p: models.ModelParams, n: np.ndarray) -> np.ndarray:
    if p.model is models.Model.TPT:
        return np.asarray(models.tpt_energy(n, p))
    if p.model is models.Model.PSEUDOHARMONIC:
        return np.asarray(models.pseudoharmonic_energy(n, p.s))
    return p.omega * (n + 0.5)


# ---------------------------------------------------------------------------
# Task implementations; each returns (header, rows, checks, extras)


def _task_spectrum(cfg: RunConfig):
    p = cfg.model_params()
    n_levels = cfg.settings["cutoff"]
    f = _deformation(p)
    n = np.arange(n_levels, dtype=float)
    energies = _energies(p, n)
    if p.model is models.Model.PSEUDOHARMONIC:
        ham = fock.deformed_hamiltonian_antisymmetric(f, n_levels)
        check_id = "spectrum-antisymmetric-hamiltonian"
    else:
        ham = fock.deformed_hamiltonian_symmetric(f, n_levels, p.omega)
        check_id = "spectrum-symmetric-hamiltonian"
    diag = ham.entries.diagonal().real
    rel = float(np.max(np.abs(diag - energies) / np.maximum(np.abs(energies), 1e-300)))
    checks = [_check(check_id, {"model": cfg.settings["model"], "levels": n_levels},
                     rel, cfg.settings["check_tol"])]
    rows = [[int(k), float(energies[k])] for k in range(n_levels)]
    return ["n", "energy"], rows, checks, {}


def _rel_dev(computed: np.ndarray, target: np.ndarray) -> float:
    # Entrywise relative to the identity's magnitude, floored at 1 so that
    # structurally-zero entries are compared absolutely.
    return float(np.max(np.abs(computed - target) / np.maximum(1.0, np.abs(target))))


def _commutator_suite(p: models.ModelParams, cutoff: int) -> list[tuple[str, float, list[int]]]:
    f = _deformation(p)
    lowering, raising = fock.ladder_matrices(f, cutoff)
    num = fock.number_matrix(cutoff)
    eye = fock.identity_matrix(cutoff)
    out = []

    def subblock(x: np.ndarray) -> np.ndarray:
        return x[: cutoff - 1, : cutoff - 1]

    if p.model is models.Model.TPT:
        weight = eye + (1.0 / p.lam) * num  # 1 + n/lam
        c1 = fock.commutator(lowering, raising).entries.diagonal()
        target = (1.0 + np.arange(cutoff) / p.lam).astype(complex)
        out.append(("commutator-lower-raise", _rel_dev(c1[:-1], target[:-1]), [cutoff - 1]))
        d2 = fock.commutator(lowering, weight).entries
        out.append(("commutator-lower-weight",
                    _rel_dev(subblock(d2), subblock(lowering.entries) / p.lam), [cutoff - 1]))
        d3 = fock.commutator(raising, weight).entries
        out.append(("commutator-raise-weight",
                    _rel_dev(subblock(d3), -subblock(raising.entries) / p.lam), [cutoff - 1]))
    elif p.model is models.Model.PSEUDOHARMONIC:
        weight = num + (p.s + 0.5) * eye  # n + s + 1/2
        c1 = fock.commutator(lowering, raising).entries.diagonal()
        target = (2.0 * (np.arange(cutoff) + p.s + 0.5)).astype(complex)
        out.append(("commutator-lower-raise", _rel_dev(c1[:-1], target[:-1]), [cutoff - 1]))
        d2 = fock.commutator(weight, lowering).entries
        out.append(("commutator-weight-lower",
                    _rel_dev(subblock(d2), -subblock(lowering.entries)), [cutoff - 1]))
        d3 = fock.commutator(weight, raising).entries
        out.append(("commutator-weight-raise",
                    _rel_dev(subblock(d3), subblock(raising.entries)), [cutoff - 1]))
    else:
        c1 = fock.commutator(lowering, raising).entries.diagonal()
        out.append(("commutator-lower-raise", _rel_dev(c1[:-1], np.ones(cutoff - 1, dtype=complex)),
                    [cutoff - 1]))
        d2 = fock.commutator(lowering, num).entries
        out.append(("commutator-lower-number",
                    _rel_dev(subblock(d2), subblock(lowering.entries)), [cutoff - 1]))
        d3 = fock.commutator(raising, num).entries
        out.append(("commutator-raise-number",
                    _rel_dev(subblock(d3), -subblock(raising.entries)), [cutoff - 1]))
    return out


def _task_commutators(cfg: RunConfig):
    p = cfg.model_params()
    cutoff = cfg.settings["cutoff"]
    tol = cfg.settings["check_tol"]
    suite = _commutator_suite(p, cutoff)
    checks = [
        _check(cid, {"model": cfg.settings["model"], "cutoff": cutoff}, dev, tol, excluded)
        for cid, dev, excluded in suite
    ]
    rows = [[c["id"], c["max_deviation"], c["tolerance"], c["passed"]] for c in checks]
    return ["check", "max_deviation", "tolerance", "passed"], rows, checks, {}


def _build_state(cfg: RunConfig) -> cs.CoherentStateResult:
    p = cfg.model_params()
    f = _deformation(p)
    method = cfg.settings["method"]
    cutoff = cfg.settings["cutoff"]
    tail_tol = cfg.settings["tail_tol"]
    if method == "annihilation":
        return cs.annihilation_eigenstate(f, cfg.alpha, cutoff, tail_tol=tail_tol)
    if method == "annihilation-closed-form":
        vec = cs.closed_form_bg_coefficients(p, cfg.alpha, cutoff)
        return cs.CoherentStateResult(vec, cs.Method.ANNIHILATION_EIGENSTATE, cfg.alpha,
                                      1.0, vec.tail_mass, p)
    if method == "displacement":
        zeta = cfg.zeta
        if zeta is None:
            zeta = cs.zeta_from_alpha(cfg.alpha, _deformation(p).su11_scale / 2.0)
        return cs.displacement_state_closed_form(p, zeta, cutoff)
    if method == "displacement-direct":
        return cs.displacement_state_direct(f, cfg.alpha, cutoff, tail_tol=max(tail_tol, 1e-12))
    return cs.displacement_state_factored(f, cfg.alpha, cutoff, tail_tol=max(tail_tol, 1e-12))


def _task_coherent(cfg: RunConfig):
    result = _build_state(cfg)
    c = result.state.coeffs
    rows = [[int(k), float(c[k].real), float(c[k].imag), float(abs(c[k]) ** 2)] for k in range(c.size)]
    stats = cs.photon_statistics(result.state)
    checks = [
        _check("state-normalized", {"method": cfg.settings["method"]},
               abs(result.state.norm() - 1.0), 1e-12),
        _check("tail-below-tolerance", {"cutoff_used": result.state.cutoff},
               result.tail_mass, cfg.settings["tail_tol"]),
    ]
    extras = {
        "method": result.method.value,
        "parameter": {"re": result.parameter.real, "im": result.parameter.imag},
        "normalization_constant": result.normalization_constant,
        "tail_mass": result.tail_mass,
        "cutoff_used": result.state.cutoff,
        "photon_statistics": {
            "mean_n": stats.mean_n,
            "variance_n": stats.variance_n,
            "mandel_q": stats.mandel_q,
        },
    }
    return ["n", "re", "im", "abs2"], rows, checks, extras


def _task_compare(cfg: RunConfig):
    p = cfg.model_params()
    if p.model is models.Model.HARMONIC:
        raise DomainError("the compare task needs the TPT or pseudoharmonic model")
    f = _deformation(p)
    cutoff = cfg.settings["cutoff"]
    tol = cfg.settings["check_tol"]
    alpha = cfg.alpha
    bg_rec = cs.annihilation_eigenstate(f, alpha, cutoff, tail_tol=cfg.settings["tail_tol"],
                                        max_cutoff=cutoff).state
    bg_closed = cs.closed_form_bg_coefficients(p, alpha, cutoff)
    zeta = cs.zeta_from_alpha(alpha, f.su11_scale / 2.0)
    disp_closed = cs.displacement_state_closed_form(p, zeta, cutoff).state
    disp_formula = cs.deformed_displacement_coefficients(f, zeta, cutoff)
    disp_formula_vec = fock.FockVector(disp_formula).normalized()

    d1, inf1 = cs.compare_states(bg_rec, bg_closed)
    d2, inf2 = cs.compare_states(disp_closed, disp_formula_vec)
    d3, inf3 = cs.compare_states(bg_rec, disp_closed)
    rows = [
        ["bg-recurrence-vs-closed-form", d1, inf1],
        ["displacement-closed-vs-deformed-formula", d2, inf2],
        ["bg-vs-displacement", d3, inf3],
    ]
    checks = [
        _check("bg-recurrence-vs-closed-form", {"alpha_re": alpha.real, "alpha_im": alpha.imag}, d1, tol),
        _check("displacement-closed-vs-deformed-formula",
               {"zeta_re": zeta.real, "zeta_im": zeta.imag}, d2, tol),
    ]
    extras = {"bg_vs_displacement": {"max_abs_coeff_diff": d3, "infidelity": inf3}}
    return ["comparison", "max_abs_coeff_diff", "infidelity"], rows, checks, extras


def _task_displacement_check(cfg: RunConfig):
    p = cfg.model_params()
    if p.model is models.Model.HARMONIC:
        raise DomainError("the displacement-check task needs the TPT or pseudoharmonic model")
    f = _deformation(p)
    cutoff = cfg.settings["cutoff"]
    tol = cfg.settings["check_tol"]
    alpha = cfg.alpha
    tail_tol = max(cfg.settings["tail_tol"], 1e-12)
    direct = cs.displacement_state_direct(f, alpha, cutoff, tail_tol=tail_tol).state
    factored = cs.displacement_state_factored(f, alpha, cutoff, tail_tol=tail_tol).state
    zeta = cs.zeta_from_alpha(alpha, f.su11_scale / 2.0)
    closed = cs.displacement_state_closed_form(p, zeta, cutoff).state
    dev_fact = float(np.max(np.abs(direct.coeffs - factored.coeffs)))
    dev_closed = float(np.max(np.abs(direct.coeffs - closed.coeffs)))
    checks = [
        _check("displacement-direct-vs-factored",
               {"alpha_re": alpha.real, "alpha_im": alpha.imag, "cutoff": cutoff}, dev_fact, tol),
        _check("displacement-direct-vs-closed-form",
               {"zeta_re": zeta.real, "zeta_im": zeta.imag, "cutoff": cutoff}, dev_closed, tol),
    ]
    rows = [
        [int(k), float(direct.coeffs[k].real), float(direct.coeffs[k].imag),
         float(factored.coeffs[k].real), float(factored.coeffs[k].imag),
         float(closed.coeffs[k].real), float(closed.coeffs[k].imag)]
        for k in range(cutoff)
    ]
    header = ["n", "direct_re", "direct_im", "factored_re", "factored_im", "closed_re", "closed_im"]
    return header, rows, checks, {}


def _task_wavefunction(cfg: RunConfig):
    p = cfg.model_params()
    result = _build_state(cfg)
    state = result.state
    if p.model is models.Model.TPT:
        grid = position.tpt_grid(p, cfg.settings["grid_nodes"])
    elif p.model is models.Model.PSEUDOHARMONIC:
        occupied = np.nonzero(np.abs(state.coeffs) ** 2 > 1e-16)[0]
        n_eff = int(occupied[-1]) if occupied.size else 0
        grid = position.radial_grid(p.s, n_max=n_eff, order=cfg.settings["grid_nodes"])
    else:
        raise DomainError("the wavefunction task needs the TPT or pseudoharmonic model")
    gf = position.coherent_wavefunction(state, grid, p)
    norm, err = position.overlap_quadrature(gf, gf)
    norm = abs(norm)
    checks = [
        _check("wavefunction-norm", {"grid_nodes": cfg.settings["grid_nodes"]},
               abs(norm - 1.0), cfg.settings["check_tol"]),
    ]
    vals = np.asarray(gf.values, dtype=complex)
    rows = [[float(gf.nodes[i]), float(vals[i].real), float(vals[i].imag)] for i in range(gf.nodes.size)]
    extras = {"quadrature_norm": norm, "quadrature_error_estimate": err}
    return ["node", "psi_re", "psi_im"], rows, checks, extras


def _task_harmonic_limit(cfg: RunConfig):
    lambdas = [float(x) for x in cfg.settings["lambdas"]]
    if any(l <= 0.5 for l in lambdas):
        raise DomainError("all lambdas must exceed 1/2")
    devs = cs.harmonic_limit_deviation(cfg.alpha, lambdas, cfg.settings["cutoff"])
    rows = [[lambdas[i], devs[i]] for i in range(len(lambdas))]
    increases = [devs[i + 1] - devs[i] for i in range(len(devs) - 1)]
    worst_increase = max(increases) if increases else -math.inf
    checks = [
        _check("deviation-strictly-decreasing", {"lambdas": lambdas},
               worst_increase, 0.0, passed=worst_increase < 0.0),
        _check("final-deviation-small", {"lambda": lambdas[-1]},
               devs[-1], cfg.settings["check_tol"]),
    ]
    return ["lambda", "deviation"], rows, checks, {"deviations": devs}


_TASK_FN = {
    "spectrum": _task_spectrum,
    "coherent": _task_coherent,
    "compare": _task_compare,
    "commutators": _task_commutators,
    "displacement-check": _task_displacement_check,
    "wavefunction": _task_wavefunction,
    "harmonic-limit": _task_harmonic_limit,
}


def run(cfg: RunConfig, out_dir: str) -> int:
    """Execute one task, write ``<task>.csv`` and ``report.json``, return exit status."""
    os.makedirs(out_dir, exist_ok=True)
    header, rows, checks, extras = _TASK_FN[cfg.task](cfg)
    emit_csv(header, rows, os.path.join(out_dir, f"{cfg.task}.csv"))
    all_passed = all(c["passed"] for c in checks)
    report = {
        "task": cfg.task,
        "config": cfg.settings,
        "checks": checks,
        "all_passed": all_passed,
    }
    report.update(extras)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['id']}: max_deviation={c['max_deviation']!r} tolerance={c['tolerance']!r}")
    print("OK" if all_passed else "FAILED")
    return EXIT_OK if all_passed else EXIT_CHECK_FAILED


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="defosc",
        description="Deformed-oscillator coherent states: batch computations and verification.",
    )
    parser.add_argument("task", choices=TASKS, help="computation to run")
    parser.add_argument("--config", default=None, help="JSON configuration file")
    parser.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config field (repeatable)")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.build(args.task, args.config, args.param)
        return run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except QuadratureError as exc:
        print(f"quadrature error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (DomainError, DefoscError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
