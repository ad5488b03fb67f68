"""Command-line front end: ``dtoda <command> CONFIG [flags]``.

CONFIG is a JSON object naming either a circle map (``"gamma"``) or a pair
(``"pair"``), plus optional ``order``, ``grid``, ``tol``, ``h``, ``chart`` and
command-specific keys. Flags override config keys. JSON goes to stdout; with
``--out DIR`` the JSON and the CSV tables are written there as well.

Exit codes: 0 success, 1 usage or parse error, 2 numeric failure or failed
verification.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coords import CoordinateVector, direct_chart, extended_chart, inverse_chart, wz_moments
from .families import HomeoFamily, PairFamily, gradient_fd, hessian_fd
from .grunsky import UnivalentPair, grunsky
from .io import ConfigError, csv_text, dumps, gamma_from_config, load_config, pair_from_config, series_from_config
from .series import GridTooSmall
from .tau import FreeEnergyRecord, TailDivergence, hessian_pattern, log_tau_direct, log_tau_extended, log_tau_inverse
from .toda import lax_residual, refine, rh_residual, string_residual
from .welding import WeldingError, weld

SUITES = ("hirota", "lax", "string", "rh", "symmetry", "gradient")
CHARTS = ("inverse", "direct", "extended")

# default pass thresholds per suite
SUITE_TOL = {"hirota": 1e-5, "lax": 1e-5, "string": 1e-5, "rh": 1e-8, "symmetry": 1e-9, "gradient": 1e-6}
RATIO_BAND = (3.5, 4.5)


@dataclass
class RunConfig:
    raw: dict
    order: int | None = None
    grid: int | None = None
    tol: float | None = None
    h: float = 1e-3
    chart: str | None = None
    out: Path | None = None
    files: dict = field(default_factory=dict)

    @classmethod
    def build(cls, raw: dict, args) -> "RunConfig":
        pick = lambda name: getattr(args, name, None) if getattr(args, name, None) is not None else raw.get(name)
        try:
            order = None if pick("order") is None else int(pick("order"))
            grid = None if pick("grid") is None else int(pick("grid"))
            tol = None if pick("tol") is None else float(pick("tol"))
            h = float(pick("h") or 1e-3)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad numeric option: {e}") from e
        chart = pick("chart")
        if chart is not None and chart not in CHARTS:
            raise ConfigError(f"chart must be one of {', '.join(CHARTS)}")
        if order is not None and order < 1:
            raise ConfigError("order must be positive")
        if grid is not None and (grid & (grid - 1) or grid < 4 * ((order or 16) + 1)):
            raise ConfigError(f"grid must be a power of two >= 4(N+1), got {grid}")
        if tol is not None and not tol > 0:
            raise ConfigError("tolerances must be positive")
        if not h > 0:
            raise ConfigError("h must be positive")
        out = Path(args.out) if args.out else None
        return cls(raw, order, grid, tol, h, chart, out)

    def gamma(self):
        if "gamma" not in self.raw:
            return None
        return gamma_from_config(self.raw["gamma"])

    def pair(self) -> UnivalentPair:
        if "pair" in self.raw:
            return pair_from_config(self.raw["pair"])
        g = self.gamma()
        if g is None:
            raise ConfigError("config needs a 'gamma' or a 'pair'")
        return weld(g, order=int(self.raw.get("weld_order", 120))).pair

    def emit(self, name: str, payload: dict, tables: dict | None = None) -> None:
        text = dumps(payload)
        sys.stdout.write(text)
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            (self.out / f"{name}.json").write_text(text)
            for fname, body in (tables or {}).items():
                (self.out / fname).write_text(body)


def _coord_rows(c: CoordinateVector):
    return [(int(n), t.real, t.imag, v.real, v.imag) for n, t, v in zip(c.indices, c.t, c.v)]


COORD_HEADER = ["n", "t_re", "t_im", "v_re", "v_im"]


def _chart_of(cfg: RunConfig, default: str):
    chart = cfg.chart or default
    order = cfg.order or 16
    grid = cfg.grid or 256
    g = cfg.gamma()
    if chart == "inverse":
        if g is None:
            raise ConfigError("the inverse chart needs a circle map ('gamma')")
        return chart, inverse_chart(g, order=order, grid=grid), g, None
    pair = cfg.pair()
    fn = extended_chart if chart == "extended" else direct_chart
    return chart, fn(pair, order, grid), g, pair


# -- commands -------------------------------------------------------------------

def cmd_weld(cfg: RunConfig) -> int:
    g = cfg.gamma()
    if g is None:
        raise ConfigError("weld needs a circle map ('gamma')")
    kw = {"order": cfg.order or 120, "grid": cfg.grid}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    s = weld(g, **kw)
    theta = 2 * np.pi * np.arange(s.grid) / s.grid
    rows = [(k, th, z.real, z.imag) for k, (th, z) in enumerate(zip(theta, s.curve_samples))]
    cfg.emit("weld", s.to_json(), {"curve.csv": csv_text(["k", "theta", "x", "y"], rows)})
    return 0


def cmd_chart(cfg: RunConfig) -> int:
    chart, c, _, _ = _chart_of(cfg, "inverse" if "gamma" in cfg.raw else "direct")
    cfg.emit("chart", c.to_json(), {"chart.csv": csv_text(COORD_HEADER, _coord_rows(c))})
    return 0


def cmd_grunsky(cfg: RunConfig) -> int:
    size = cfg.order or 8
    G = grunsky(cfg.pair(), size)
    k = G.order
    rows = [(m, n, G[m, n].real, G[m, n].imag) for m in range(-k, k + 1) for n in range(-k, k + 1)]
    cfg.emit("grunsky", G.to_json(), {"grunsky.csv": csv_text(["m", "n", "re", "im"], rows)})
    return 0


def cmd_tau(cfg: RunConfig) -> int:
    chart, c, g, pair = _chart_of(cfg, "inverse" if "gamma" in cfg.raw else "direct")
    if chart == "inverse":
        val = log_tau_inverse(g, c)
    elif chart == "extended":
        val = log_tau_extended(pair, c)
    else:
        val = log_tau_direct(pair, c)
    cfg.emit("tau", FreeEnergyRecord(chart, val).to_json())
    return 0


def cmd_moments(cfg: RunConfig) -> int:
    curve = series_from_config(cfg.raw["curve"]) if "curve" in cfg.raw else cfg.pair().g
    c = wz_moments(curve, order=cfg.order or 16, grid=cfg.grid or 256)
    cfg.emit("moments", c.to_json(), {"moments.csv": csv_text(COORD_HEADER, _coord_rows(c))})
    return 0


# -- verification suites --------------------------------------------------------

def _family(cfg: RunConfig):
    chart = cfg.chart or ("inverse" if "gamma" in cfg.raw else "extended")
    kw = {} if cfg.order is None else {"order": cfg.order}
    if chart == "inverse":
        g = cfg.gamma()
        if g is None:
            raise ConfigError("the inverse chart needs a circle map ('gamma')")
        return HomeoFamily(g, **kw)
    return PairFamily(cfg.pair(), chart=chart, **kw)


def _base_spec(cfg: RunConfig) -> dict:
    return cfg.raw.get("gamma") or {"type": "pair"}


def _ratio_ok(r, tol) -> bool:
    return bool(r.residual < tol and RATIO_BAND[0] <= r.ratio <= RATIO_BAND[1])


def _suite_lax(cfg, tol):
    fam = _family(cfg)
    ns = [int(n) for n in cfg.raw.get("n", [1, -1, 2, -2])]
    checks = []
    for n in ns:
        r = refine("lax", fam, lambda h, n=n: lax_residual(fam, n, h), cfg.h, n, _base_spec(cfg))
        checks.append({**r.to_json(), "pass": _ratio_ok(r, tol)})
    return fam.chart, checks


def _suite_string(cfg, tol):
    fam = _family(cfg)
    r = refine("string", fam, lambda h: string_residual(fam, h), cfg.h, None, _base_spec(cfg))
    return fam.chart, [{**r.to_json(), "pass": _ratio_ok(r, tol)}]


def _suite_rh(cfg, tol):
    chart = cfg.chart or ("inverse" if "gamma" in cfg.raw else "direct")
    if chart == "extended":
        raise ConfigError("the rh suite runs on the direct or inverse chart")
    g = cfg.gamma()
    pair = cfg.pair()
    if chart == "inverse":
        if g is None:
            raise ConfigError("the inverse chart needs a circle map ('gamma')")
        c = inverse_chart(g, order=cfg.order or 128)
    else:
        g = None
        c = direct_chart(pair, cfg.order or 48)
    r = rh_residual(pair, c, gamma=g)
    worst = max(r.res1, r.res2, r.m_equals_mt)
    return chart, [{"check": "rh", "res1": r.res1, "res2": r.res2, "m_equals_mt": r.m_equals_mt, "pass": bool(worst < tol)}]


def _suite_symmetry(cfg, tol):
    pair = cfg.pair()
    k = cfg.order or 8
    c = direct_chart(pair, k)
    s = direct_chart(pair.swapped(), k)
    errs = []
    for n in range(-k, k + 1):
        sign = 1 if n == 0 else -1
        errs.append(max(abs(s.tn(n) - sign * c.tn(-n)), abs(s.vn(n) - sign * c.vn(-n))))
    worst = float(max(errs))
    return "direct", [{"check": "swap", "order": k, "max_error": worst, "pass": bool(worst < tol)}]


def _indices(cfg, default):
    k = int(cfg.raw.get("indices", default))
    return list(range(-k, k + 1))


def _suite_gradient(cfg, tol):
    fam = _family(cfg)
    idx = _indices(cfg, 3)
    grad = gradient_fd(fam, idx, cfg.h)
    v = fam.base.coords()
    ref = np.array([v.vn(n) for n in idx])
    err = float(np.max(np.abs(grad - ref)) / max(1.0, np.max(np.abs(ref))))
    return fam.chart, [{"check": "gradient", "indices": idx, "relative_error": err, "pass": bool(err < tol)}]


def _suite_hirota(cfg, tol):
    fam = _family(cfg)
    idx = _indices(cfg, 2)
    H = hessian_fd(fam, idx, cfg.h)
    size = max(abs(i) for i in idx) + 1
    if fam.chart == "inverse":
        G = grunsky(fam.solution(fam.base.x).pair, size)
    else:
        G = grunsky(fam.pair(fam.base.x).inverse, size)
    P = hessian_pattern(G, idx)
    err = float(np.max(np.abs(H - P)) / np.max(np.abs(P)))
    return fam.chart, [{"check": "hirota", "indices": idx, "relative_error": err, "pass": bool(err < tol)}]


SUITE_FNS = {
    "hirota": _suite_hirota,
    "lax": _suite_lax,
    "string": _suite_string,
    "rh": _suite_rh,
    "symmetry": _suite_symmetry,
    "gradient": _suite_gradient,
}


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    tol = cfg.tol if cfg.tol is not None else SUITE_TOL[suite]
    chart, checks = SUITE_FNS[suite](cfg, tol)
    ok = all(c["pass"] for c in checks)
    report = {"suite": suite, "chart": chart, "tolerance": tol, "h": cfg.h, "pass": ok, "checks": checks}
    if suite in ("lax", "string") and not ok:
        report["diagnostic"] = (
            f"expected residual < {tol:g} with h/(h/2) ratio in [{RATIO_BAND[0]}, {RATIO_BAND[1]}]"
        )
    cfg.emit(f"verify_{suite}", report)
    return 0 if ok else 2


# -- entry point ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dtoda", description="Conformal welding and dispersionless Toda checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [
        ("weld", "weld a circle map into a normalized pair"),
        ("verify", "run a verification suite"),
        ("chart", "coordinates (t_n, v_n) of a map or pair"),
        ("grunsky", "Grunsky coefficients of a pair"),
        ("tau", "log tau in a chart"),
        ("moments", "exterior harmonic moments of a curve"),
    ]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="JSON config file, or - for stdin")
        s.add_argument("--order", type=int)
        s.add_argument("--grid", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--h", type=float)
        s.add_argument("--out", help="directory for JSON and CSV artifacts")
        s.add_argument("--chart", choices=CHARTS)
        if name == "verify":
            s.add_argument("--suite", choices=SUITES, required=True)
    return p


def _fail(kind: str, message: str, code: int) -> int:
    sys.stdout.write(dumps({"error": kind, "message": message}))
    sys.stderr.write(f"dtoda: {message}\n")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.build(load_config(args.config), args)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        return {"weld": cmd_weld, "chart": cmd_chart, "grunsky": cmd_grunsky, "tau": cmd_tau, "moments": cmd_moments}[
            args.command
        ](cfg)
    except ConfigError as e:
        return _fail("config", str(e), 1)
    except GridTooSmall as e:
        return _fail("config", str(e), 1)
    except (WeldingError, TailDivergence, ArithmeticError) as e:
        return _fail(type(e).__name__, str(e), 2)
    except (ValueError, np.linalg.LinAlgError) as e:
        return _fail(type(e).__name__, str(e), 2)


if __name__ == "__main__":
    sys.exit(main())
