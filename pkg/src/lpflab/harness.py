"""Run a configured experiment and write its CSV and JSON outputs.

CSV files depend only on the configuration, so repeated runs produce
identical bytes; the timestamp lives in the provenance JSON alone.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ExperimentConfig
from .decomposition import decomposition_check, s2_integral_report
from .dynamics import (ORBIT_HEADER, matched_block_sets, orbit_average, t_invariance_gap,
                       liouville_mean)
from .ekstats import (NormalizationSpec, ks_distance, omega_phi_center, omega_phi_prime_sum,
                      restricted_weighted_cdf, smooth_functional)
from .errors import ResourceError
from .friable import dickman_rho, euler_constant, ivic_main_term, psi_f, square_pmax_sum, tw_main_term
from .primeset import PrimeSetSpec, build_density_error, choose_y
from .sieve import DEFAULT_MEMORY_LIMIT, FactorTable, build_factor_table


@dataclass
class ExperimentResult:
    kind: str
    header: list[str]
    rows: list[list]
    provenance: dict
    files: list[str] = field(default_factory=list)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header)
            for row in self.rows:
                w.writerow([_cell(v) for v in row])


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _table_limit(cfg: ExperimentConfig) -> int:
    if cfg.kind in ("ek", "ekpnt", "ep", "dynamics", "ivic"):
        need = max(cfg.N)
    elif cfg.kind in ("friable", "identity"):
        need = max(x for x, _ in cfg.pairs)
    elif cfg.kind == "density":
        need = max(cfg.grid)
    else:
        return 0
    if cfg.kind == "dynamics" and cfg.blocks is not None:
        rho = cfg.blocks.rho
        need = max(need, math.ceil(rho ** (cfg.blocks.j_max + 1)))
    if cfg.kind in ("friable",):
        need = max(need, 10**5)  # Euler constant primes
    return max(need, 2)


def _sibling(output: Path | None, suffix: str) -> Path | None:
    if output is None:
        return None
    return output.with_name(output.stem + suffix)


def run_experiment(cfg: ExperimentConfig, table: FactorTable | None = None) -> ExperimentResult:
    """Dispatch ``cfg`` to the library and write the outputs it names."""
    limit = _table_limit(cfg)
    if limit > DEFAULT_MEMORY_LIMIT:
        raise ResourceError(f"experiment needs a table up to {limit}")
    if limit and (table is None or table.limit < limit):
        table = build_factor_table(limit)
    output = Path(cfg.output) if cfg.output else None
    runner = _RUNNERS[cfg.kind]
    header, rows, extra = runner(cfg, table, output)
    provenance = {
        "config_sha256": cfg.digest(),
        "config": json.loads(cfg.canonical_json()),
        "table_limit": table.limit if table is not None else None,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    result = ExperimentResult(cfg.kind, header, rows, provenance, files=extra)
    if output is not None:
        output.parent.mkdir(parents=True, exist_ok=True)
        result.write_csv(output)
        meta = _sibling(output, ".provenance.json")
        meta.write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n")
        result.files = [str(output), str(meta)] + extra
    return result


# --------------------------------------------------------------------------
# runners: each returns (header, rows, extra files)
# --------------------------------------------------------------------------


def _run_ek(cfg, table, output, ep: bool = False):
    weight = cfg.weight.spec()
    S = cfg.set.spec()
    F = cfg.test_function()
    header = ["N", "set", "weight", "norm", "delta", "terminal_mass", "ks_distance",
              "empirical", "target", "abs_err"]
    if ep:
        header += ["omega_phi_prime_sum", "center"]
    rows, files = [], []
    for N in cfg.N:
        norm = NormalizationSpec.ep(N) if ep else cfg.normalization.spec(N, float(weight.alpha))
        curve = restricted_weighted_cdf(table, weight, S, norm, N, statistic=cfg.statistic)
        fr = smooth_functional(curve, F)
        row = [N, S.label(), weight.label(), norm.label(), curve.delta, curve.terminal_mass,
               ks_distance(curve), fr.empirical, fr.target, abs(fr.empirical - fr.target)]
        if ep:
            row += [omega_phi_prime_sum(table, N), omega_phi_center(N)]
        rows.append(row)
        if output is not None:
            cpath = _sibling(output, f".N{N}.curve.csv")
            fpath = _sibling(output, f".N{N}.functional.json")
            output.parent.mkdir(parents=True, exist_ok=True)
            curve.to_csv(cpath)
            fr.to_json(fpath)
            files += [str(cpath), str(fpath)]
    return header, rows, files


def _run_ep(cfg, table, output):
    return _run_ek(cfg, table, output, ep=True)


def _orbit_rows(cfg, table, with_gap: bool):
    S = cfg.set.spec()
    F = cfg.test_function()
    system = cfg.system.system()
    g = cfg.system.observable()
    rows = []
    for N in cfg.N:
        norm = cfg.normalization.spec(N, 1.0)
        r = orbit_average(table, system, g, F, S, norm, N)
        row = r.row()
        if with_gap:
            row += [repr(t_invariance_gap(table, system, g, F, S, norm, N)),
                    repr(liouville_mean(table, N))]
        rows.append(row)
    return rows


def _run_ekpnt(cfg, table, output):
    return list(ORBIT_HEADER), _orbit_rows(cfg, table, False), []


def _run_dynamics(cfg, table, output):
    rows = _orbit_rows(cfg, table, True)
    files = []
    if cfg.blocks is not None:
        b = cfg.blocks
        pair = matched_block_sets(table, b.rho, b.eps, range(b.j_min, b.j_max + 1), b.per_block,
                                  coprime=b.coprime)
        if output is not None:
            path = _sibling(output, ".blocks.json")
            output.parent.mkdir(parents=True, exist_ok=True)
            pair.to_json(path)
            files.append(str(path))
    return list(ORBIT_HEADER) + ["t_gap", "liouville_mean"], rows, files


def _run_friable(cfg, table, output):
    weight = cfg.weight.spec()
    alpha = float(weight.alpha)
    us = [math.log(x) / math.log(y) for x, y in cfg.pairs]
    rho = dickman_rho(alpha, u_max=min(50.0, max(1.0, math.ceil(max(us)))), step=cfg.step)
    constant, _ = euler_constant(weight, primes=table.primes)
    rows = []
    w = table.weights(weight)
    for (x, y), u in zip(cfg.pairs, us):
        psi = psi_f(table, weight, x, y, weights=w).value
        main = tw_main_term(weight, rho, x, y, constant)
        rows.append([x, y, u, psi, main, psi / main])
    return ["x", "y", "u", "psi", "main_term", "ratio"], rows, []


def _run_rho(cfg, table, output):
    rows, files = [], []
    for alpha in cfg.alphas:
        grid = dickman_rho(alpha, u_max=cfg.u_max, step=cfg.step)
        path = ""
        if output is not None:
            p = _sibling(output, f".alpha{alpha:g}.csv")
            output.parent.mkdir(parents=True, exist_ok=True)
            grid.to_csv(p)
            files.append(str(p))
            path = p.name
        at2 = grid(2.0) if grid.u_max >= 2 else float("nan")
        rows.append([alpha, grid.step, grid.u_max, at2, path])
    return ["alpha", "step", "u_max", "rho_at_2", "file"], rows, files


def _run_density(cfg, table, output):
    S = cfg.set.spec()
    dt = build_density_error(table, S, cfg.grid)
    header = ["x", "pi_S", "delta_li", "e_S", "v_S"]
    rows = [[int(x), int(p), float(d), float(e), float(v)]
            for x, p, d, e, v in zip(dt.xs, dt.pi_S, dt.delta_li, dt.e_S, dt.v_S)]
    files = []
    if cfg.choose_y_at:
        v = dt if S.kind == "all" else dt + build_density_error(table, PrimeSetSpec.all(), cfg.grid)
        choices = [choose_y(x, v, cfg.h) for x in cfg.choose_y_at]
        if output is not None:
            path = _sibling(output, ".choose_y.csv")
            output.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["x", "h", "h_x", "beta", "y", "u"])
                for c in choices:
                    w.writerow([repr(c.x), cfg.h, repr(c.h), c.beta, repr(c.y),
                                repr(math.log(c.x) / math.log(c.y))])
            files.append(str(path))
    return header, rows, files


def _run_ivic(cfg, table, output):
    rows = []
    for x in cfg.N:
        for r in cfg.r:
            exact = square_pmax_sum(table, x, r)
            main = ivic_main_term(x, r)
            ratio = math.log(exact) / math.log(main) if exact > 0 and main > 0 and main != 1 else float("nan")
            rows.append([x, r, exact, main, ratio])
    return ["x", "r", "square_pmax_sum", "main_term", "log_ratio"], rows, []


def _run_identity(cfg, table, output):
    weight = cfg.weight.spec()
    S = cfg.set.spec()
    F = cfg.test_function()
    rows = []
    for x, y in cfg.pairs:
        norm = cfg.normalization.spec(x, float(weight.alpha))
        d = decomposition_check(table, weight, S, F, norm, x, y, statistic=cfg.statistic)
        rep = s2_integral_report(table, weight, S, F, norm, x, y, statistic=cfg.statistic)
        rows.append([x, y, weight.label(), S.label(), d.lhs, d.rhs, d.residual, d.relative,
                     rep.sum_over_p, rep.delta_times_integral, rep.difference])
    header = ["x", "y", "weight", "set", "lhs", "rhs", "residual", "relative",
              "sum_over_p", "delta_integral", "s3"]
    return header, rows, []


_RUNNERS = {
    "ek": _run_ek,
    "ep": _run_ep,
    "ekpnt": _run_ekpnt,
    "dynamics": _run_dynamics,
    "friable": _run_friable,
    "rho": _run_rho,
    "density": _run_density,
    "ivic": _run_ivic,
    "identity": _run_identity,
}
