"""Run configuration, chain execution and persisted sample stores."""
from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ChainError, ConfigError, DataError, NumericalError
from ..kernel_approx import ROUTES, scan_approx
from ..kernel_baseline import COMPARATOR_LABEL, step_old
from ..kernel_exact import scan_exact
from ..linalg import ModelData
from ..rng import RNG_NAME, RNG_VERSION, make_rng
from ..state import ChainState, HyperParams

__all__ = ["MODES", "DEFAULT_TRACKED", "RunConfig", "SampleStore", "run_chain"]

MODES = ("exact", "approx", "old")
DEFAULT_TRACKED = 100
SCALAR_NAMES = ("log_xi", "neg2_log_sigma")


@dataclass(frozen=True)
class RunConfig:
    """What to run and what to keep.

    Scans are numbered from 1. Scan ``k`` is stored when ``k > burnin`` and
    ``(k - burnin) % thin == 0``; ``iterations - burnin`` must be a multiple
    of ``thin`` so the stored row count is exactly
    ``(iterations - burnin) / thin``.

    ``beta_indices`` and ``eta_indices`` are 0-based columns to persist;
    ``None`` keeps the first 100 (or all when ``p < 100``) and ``"all"``
    keeps every column. ``log xi`` and ``-2 log sigma`` are always kept.
    ``route`` is only read in approx mode.
    """

    mode: str = "exact"
    iterations: int = 1000
    burnin: int = 0
    thin: int = 1
    seed: int = 0
    hyper: HyperParams = field(default_factory=HyperParams)
    beta_indices: tuple[int, ...] | str | None = None
    eta_indices: tuple[int, ...] | str | None = None
    route: str = "auto"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.iterations > self.burnin >= 0):
            raise ConfigError(f"need iterations > burnin >= 0, got {self.iterations}, {self.burnin}")
        if self.thin < 1:
            raise ConfigError(f"thin must be >= 1, got {self.thin}")
        if (self.iterations - self.burnin) % self.thin:
            raise ConfigError(
                f"iterations - burnin = {self.iterations - self.burnin} is not a multiple of thin = {self.thin}"
            )
        if self.route not in ROUTES:
            raise ConfigError(f"route must be one of {ROUTES}, got {self.route!r}")
        for name in ("beta_indices", "eta_indices"):
            val = getattr(self, name)
            if isinstance(val, str) and val != "all":
                raise ConfigError(f"{name} must be a sequence of indices, None or 'all'")
            if val is not None and not isinstance(val, str):
                object.__setattr__(self, name, tuple(int(i) for i in val))

    @property
    def n_stored(self) -> int:
        return (self.iterations - self.burnin) // self.thin

    def resolve_indices(self, which: str, p: int) -> np.ndarray:
        val = getattr(self, f"{which}_indices")
        if val is None:
            return np.arange(min(p, DEFAULT_TRACKED))
        if val == "all":
            return np.arange(p)
        idx = np.asarray(val, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= p):
            raise ConfigError(f"{which} indices must lie in [0, {p - 1}]")
        return idx

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for name in ("beta_indices", "eta_indices"):
            if isinstance(d[name], tuple):
                d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["hyper"] = HyperParams(**d.get("hyper", {}))
        return cls(**d)


@dataclass
class SampleStore:
    """Stored draws and per-scan bookkeeping of one chain.

    ``beta`` and ``eta`` hold the tracked columns (``beta_indices`` and
    ``eta_indices``, 0-based), ``scalars`` holds ``log xi`` and
    ``-2 log sigma``. The per-scan arrays cover every scan, burn-in
    included: wall time, acceptance of the ``xi`` and ``sigma2`` proposals
    (``-1`` where no proposal was made) and, in approx mode, the active set
    size and whether membership changed from the previous scan.
    """

    beta: np.ndarray
    eta: np.ndarray
    scalars: np.ndarray
    beta_indices: np.ndarray
    eta_indices: np.ndarray
    scan_index: np.ndarray
    timings: np.ndarray
    xi_accepted: np.ndarray
    sigma_accepted: np.ndarray
    active_size: np.ndarray
    active_changed: np.ndarray
    meta: dict

    @property
    def n_rows(self) -> int:
        return int(self.scalars.shape[0])

    @property
    def accept_counts(self) -> dict:
        out = {}
        for name, arr in (("xi", self.xi_accepted), ("sigma2", self.sigma_accepted)):
            made = arr >= 0
            out[name] = {"accepted": int(np.sum(arr[made] == 1)), "proposed": int(np.sum(made))}
        return out

    def accept_rate(self, name: str = "xi") -> float:
        c = self.accept_counts[name]
        return c["accepted"] / c["proposed"] if c["proposed"] else float("nan")

    def column_names(self) -> list[str]:
        return (
            [f"beta_{j + 1}" for j in self.beta_indices]
            + [f"eta_{j + 1}" for j in self.eta_indices]
            + list(SCALAR_NAMES)
        )

    def draws(self) -> np.ndarray:
        """All tracked columns side by side, in :meth:`column_names` order."""
        return np.hstack([self.beta, self.eta, self.scalars])

    def log_xi(self) -> np.ndarray:
        return self.scalars[:, 0]

    # -- persistence ----------------------------------------------------
    def save(self, out_dir: str | os.PathLike) -> Path:
        """One CSV per block plus ``meta.json``. Values round-trip exactly."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        fmt = "%.17g"
        np.savetxt(out / "beta.csv", self.beta, delimiter=",", fmt=fmt,
                   header=",".join(f"beta_{j + 1}" for j in self.beta_indices), comments="")
        np.savetxt(out / "eta.csv", self.eta, delimiter=",", fmt=fmt,
                   header=",".join(f"eta_{j + 1}" for j in self.eta_indices), comments="")
        np.savetxt(out / "scalars.csv", np.column_stack([self.scan_index, self.scalars]), delimiter=",",
                   fmt=["%d", fmt, fmt], header="scan," + ",".join(SCALAR_NAMES), comments="")
        scans = np.column_stack([
            np.arange(1, self.timings.size + 1), self.timings, self.xi_accepted,
            self.sigma_accepted, self.active_size, self.active_changed,
        ])
        np.savetxt(out / "scans.csv", scans, delimiter=",",
                   fmt=["%d", fmt, "%d", "%d", "%d", "%d"],
                   header="scan,seconds,xi_accepted,sigma_accepted,active_size,active_changed", comments="")
        meta = dict(self.meta)
        meta["beta_indices"] = [int(j) for j in self.beta_indices]
        meta["eta_indices"] = [int(j) for j in self.eta_indices]
        meta["accept_counts"] = self.accept_counts
        (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        return out

    @classmethod
    def load(cls, in_dir: str | os.PathLike) -> "SampleStore":
        src = Path(in_dir)
        if not (src / "meta.json").exists():
            raise DataError(f"{src}: not a chain directory (meta.json missing)")
        meta = json.loads((src / "meta.json").read_text())
        bi = np.asarray(meta.pop("beta_indices"), dtype=int)
        ei = np.asarray(meta.pop("eta_indices"), dtype=int)
        meta.pop("accept_counts", None)

        def _read(name, ncol):
            a = np.loadtxt(src / name, delimiter=",", skiprows=1, ndmin=2)
            return a.reshape(-1, ncol) if a.size else np.empty((0, ncol))

        sc = _read("scalars.csv", 3)
        scans = _read("scans.csv", 6)
        return cls(
            beta=_read("beta.csv", bi.size) if bi.size else np.empty((sc.shape[0], 0)),
            eta=_read("eta.csv", ei.size) if ei.size else np.empty((sc.shape[0], 0)),
            scalars=sc[:, 1:],
            beta_indices=bi,
            eta_indices=ei,
            scan_index=sc[:, 0].astype(int),
            timings=scans[:, 1],
            xi_accepted=scans[:, 2].astype(np.int8),
            sigma_accepted=scans[:, 3].astype(np.int8),
            active_size=scans[:, 4].astype(np.int64),
            active_changed=scans[:, 5].astype(np.int8),
            meta=meta,
        )


def _scan_old(state, data, hp, rng):
    return step_old(state, data, hp, rng), None


def run_chain(data: ModelData, cfg: RunConfig, init: ChainState | None = None) -> SampleStore:
    """Run ``cfg.iterations`` scans of the chosen kernel and collect a :class:`SampleStore`.

    Any failure inside a kernel is re-raised as :class:`ChainError` carrying
    the 1-based scan index.
    """
    p = data.p
    hp = cfg.hyper
    rng = make_rng(cfg.seed)
    state = ChainState.initial(p) if init is None else init
    bi = cfg.resolve_indices("beta", p)
    ei = cfg.resolve_indices("eta", p)

    if cfg.mode == "exact":
        scan = scan_exact
    elif cfg.mode == "approx":
        def scan(s, d, h, r):
            return scan_approx(s, d, h, r, route=cfg.route)
    else:
        scan = _scan_old

    n_rows = cfg.n_stored
    beta = np.empty((n_rows, bi.size))
    eta = np.empty((n_rows, ei.size))
    scalars = np.empty((n_rows, 2))
    scan_index = np.empty(n_rows, dtype=int)
    timings = np.empty(cfg.iterations)
    xi_acc = np.full(cfg.iterations, -1, dtype=np.int8)
    sig_acc = np.full(cfg.iterations, -1, dtype=np.int8)
    act_size = np.full(cfg.iterations, -1, dtype=np.int64)
    act_changed = np.full(cfg.iterations, -1, dtype=np.int8)
    prev_active = None

    row = 0
    for k in range(1, cfg.iterations + 1):
        t0 = time.perf_counter()
        try:
            state, info = scan(state, data, hp, rng)
            state.validate()
        except (NumericalError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            raise ChainError(k, exc) from exc
        timings[k - 1] = time.perf_counter() - t0
        if info is not None:
            xi_acc[k - 1] = info.xi_accepted
            if info.sigma_accepted is not None:
                sig_acc[k - 1] = info.sigma_accepted
            if cfg.mode == "approx":
                act = info.active
                act_size[k - 1] = act.size
                if prev_active is not None:
                    act_changed[k - 1] = not np.array_equal(act, prev_active)
                prev_active = act
        if k > cfg.burnin and (k - cfg.burnin) % cfg.thin == 0:
            beta[row] = state.beta[bi]
            eta[row] = state.eta[ei]
            scalars[row, 0] = np.log(state.xi)
            scalars[row, 1] = -np.log(state.sigma2)
            scan_index[row] = k
            row += 1

    meta = {
        "config": cfg.to_dict(),
        "N": data.N,
        "p": p,
        "rng": RNG_NAME,
        "rng_version": RNG_VERSION,
        "final_state": {"sigma2": state.sigma2, "xi": state.xi},
    }
    if cfg.mode == "old":
        meta["label"] = COMPARATOR_LABEL
    return SampleStore(
        beta=beta,
        eta=eta,
        scalars=scalars,
        beta_indices=bi,
        eta_indices=ei,
        scan_index=scan_index,
        timings=timings,
        xi_accepted=xi_acc,
        sigma_accepted=sig_acc,
        active_size=act_size,
        active_changed=act_changed,
        meta=meta,
    )
