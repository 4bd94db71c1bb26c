"""Named experiments wiring the modules together.

``run_experiment`` resolves a config into a :class:`ResultRecord` and, when
an output directory is configured, writes one directory per experiment id
holding the config copy, the record, a metrics CSV and any artifacts.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import matching, noise, simulator, walsh, xeb
from .circuit import RandomCircuit, gate_counts, generate_random_circuit
from .circuit import loads as load_circuit
from .config import ExperimentConfig
from .errors import ConfigError

log = logging.getLogger(__name__)


@dataclass
class ResultRecord:
    experiment_id: str
    timestamp: str
    config: dict
    config_hash: str
    seed: int
    metrics: list[tuple[str, object]] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)

    def metric(self, name: str):
        for key, value in self.metrics:
            if key == name:
                return value
        raise KeyError(name)

    def to_json(self) -> str:
        body = {
            "experiment_id": self.experiment_id,
            "timestamp": self.timestamp,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "config": self.config,
            "metrics": [{"name": k, "value": v} for k, v in self.metrics],
            "artifacts": sorted(self.artifacts),
        }
        return json.dumps(body, indent=2, default=_jsonable)

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value"])
        for k, v in self.metrics:
            w.writerow([k, format(v, ".17g") if isinstance(v, float) else v])
        return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"not serializable: {type(value).__name__}")


def _noise_model(cfg: ExperimentConfig) -> noise.NoiseModel:
    def pick(v):
        return v[0] if len(v) == 1 else list(v)

    return noise.NoiseModel(pick(cfg.e1), pick(cfg.e2), pick(cfg.eq))


def _circuit(cfg: ExperimentConfig, seed: int | None = None) -> RandomCircuit:
    if cfg.circuit:
        return load_circuit(Path(cfg.circuit).read_text())
    return generate_random_circuit(cfg.n, cfg.m, cfg.seed if seed is None else seed, cfg.gate_config)


def _estimates(cfg, samples, D) -> list[xeb.FidelityEstimate]:
    fns = {"XEB": xeb.f_xeb, "V": xeb.v_estimator, "MLE": xeb.mle_estimator}
    return [fns[name](samples, D) for name in cfg.estimators]


def _estimate_metrics(estimates) -> list[tuple[str, object]]:
    out = []
    for est in estimates:
        key = est.kind.value.lower()
        out += [(f"{key}_value", est.value), (f"{key}_std_error", est.standard_error)]
    return out


# -- experiment kinds -------------------------------------------------------------


def _simulate(cfg, art):
    c = _circuit(cfg)
    D = simulator.simulate(c)
    s = simulator.sample(D, cfg.samples, cfg.seed, {"circuit": c.circuit_id})
    pt = simulator.porter_thomas_diagnostics(D)
    g1, g2 = gate_counts(c)
    art["circuit.txt"] = c.to_text()
    art["samples.txt"] = simulator.dump_samples(s)
    return [
        ("g1", g1), ("g2", g2),
        ("alpha", xeb.alpha(D).alpha),
        ("pt_first_moment", pt.first_moment),
        ("pt_second_moment", pt.second_moment),
        ("pt_ks_distance", pt.ks_distance),
    ]


def _sample(cfg, art):
    c = _circuit(cfg)
    D = simulator.simulate(c)
    mixed = noise.mix_with_uniform(D, cfg.fidelity)
    s = simulator.sample(mixed, cfg.samples, cfg.seed, {"circuit": c.circuit_id, "fidelity": cfg.fidelity})
    art["circuit.txt"] = c.to_text()
    art["samples.txt"] = simulator.dump_samples(s)
    return [
        ("fidelity", cfg.fidelity),
        ("alpha", xeb.alpha(D).alpha),
        ("expected_xeb", xeb.expected_scaled_probability(D, mixed) - 1.0),
        ("xeb_value", xeb.f_xeb(s, D).value),
    ]


def _noisy_sample(cfg, art):
    c = _circuit(cfg)
    model = _noise_model(cfg)
    D = simulator.simulate(c)
    s = noise.noisy_sampler(c, model, cfg.samples, cfg.seed)
    art["circuit.txt"] = c.to_text()
    art["samples.txt"] = simulator.dump_samples(s)
    ests = _estimates(cfg, s, D)
    art["estimates.csv"] = xeb.report_csv(xeb.report_rows(c, ests, model))
    return _estimate_metrics(ests) + list(xeb.predict(c, model).items())


def _estimate(cfg, art):
    if not cfg.input:
        raise ConfigError("estimate needs [experiment] input = <sample archive>")
    c = _circuit(cfg)
    s = simulator.load_samples(Path(cfg.input).read_text())
    if s.n != c.n:
        raise ConfigError(f"sample archive has n={s.n} but the circuit has n={c.n}")
    D = simulator.simulate(c)
    ests = _estimates(cfg, s, D)
    model = _noise_model(cfg)
    art["estimates.csv"] = xeb.report_csv(xeb.report_rows(c, ests, model))
    return [("sample_count", len(s)), ("alpha", xeb.alpha(D).alpha)] + _estimate_metrics(ests)


def _predict(cfg, art):
    c = _circuit(cfg)
    model = _noise_model(cfg)
    g1, g2 = gate_counts(c)
    f77 = xeb.formula77(model, c)
    avg = xeb.formula77_simplified(c.n, g1, g2, model.averaged)
    art["estimates.csv"] = xeb.report_csv(xeb.report_rows(c, [f77, avg], model))
    w = noise.three_part_weights(model, c)
    return [("g1", g1), ("g2", g2), *xeb.predict(c, model).items(), ("gate_success", w.F_g)]


def _walsh(cfg, art):
    c = _circuit(cfg)
    D = simulator.simulate(c)
    t = cfg.t[0]
    spec = walsh.attenuate(walsh.walsh_transform(D.probabilities), t)
    art["spectrum.csv"] = walsh.spectrum_csv(spec)
    weights = spec.weight_by_degree()
    total = weights[1:].sum()
    out = [("t", t)]
    noisy = walsh.inverse_walsh(spec)
    degrees = range(c.n + 1) if cfg.degree < 0 else [cfg.degree]
    for d in degrees:
        raw, repaired = walsh.degree_truncate(spec, d)
        out.append((f"level_weight_{d}", float(weights[d])))
        out.append((f"truncation_l1_{d}", float(np.abs(raw - noisy).sum())))
        out.append((f"repaired_tv_{d}", float(0.5 * np.abs(repaired.probabilities - noisy).sum())))
        if total > 0:
            out.append((f"retained_fraction_{d}", float(weights[1 : d + 1].sum() / total)))
    return out


def _correlation_scan(cfg, art):
    tasks = [(n, s) for n in cfg.ns for s in range(cfg.circuits)]

    def one(task):
        n, s = task
        c = generate_random_circuit(n, cfg.m, cfg.seed + s, cfg.gate_config)
        D = simulator.simulate(c)
        return [walsh.noise_correlation(D, t) for t in cfg.t]

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        values = list(pool.map(one, tasks))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "t", "mean_correlation", "std_correlation", "circuits"])
    out = []
    for n in cfg.ns:
        rows = np.array([v for (nn, _), v in zip(tasks, values) if nn == n])
        for j, t in enumerate(cfg.t):
            mean, std = float(rows[:, j].mean()), float(rows[:, j].std(ddof=1)) if len(rows) > 1 else 0.0
            w.writerow([n, format(t, "g"), format(mean, ".17g"), format(std, ".17g"), len(rows)])
            out.append((f"correlation_n{n}_t{t:g}", mean))
    art["correlation.csv"] = buf.getvalue()
    return out


def _graph(cfg) -> matching.BipartiteGraph:
    if not cfg.graph:
        raise ConfigError("matching experiments need [matching] graph = <path>")
    return matching.BipartiteGraph.from_text(Path(cfg.graph).read_text())


def _match_sample(cfg, art):
    g = _graph(cfg)
    draws = matching.sample_semi_matchings(g, cfg.samples, cfg.seed)
    keys, counts = np.unique(draws, axis=0, return_counts=True)
    denom = 1
    for nbrs in g.neighbors:
        denom *= len(nbrs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["multiset", "count", "frequency", "exact_probability"])
    for key, count in zip(keys, counts):
        C = matching.MultiSubset(tuple(int(x) for x in key))
        exact = ""
        if g.na <= matching.COUNT_MAX_A:
            exact = format(matching.count_semi_matchings(g, C) / denom, ".17g")
        w.writerow([" ".join(map(str, C.elements())), int(count), format(count / cfg.samples, ".17g"), exact])
    art["multisets.csv"] = buf.getvalue()
    return [("samples", cfg.samples), ("distinct_multisets", int(len(keys)))]


def _match_test(cfg, art):
    g = _graph(cfg)
    v = matching.lovasz_matching_test(g, cfg.prime, cfg.repetitions, cfg.seed)
    return [("verdict", v.label), ("trials", v.trials), ("error_bound", v.error_bound)]


RUNNERS = {
    "simulate": _simulate,
    "sample": _sample,
    "noisy-sample": _noisy_sample,
    "estimate": _estimate,
    "predict": _predict,
    "walsh": _walsh,
    "correlation-scan": _correlation_scan,
    "match-sample": _match_sample,
    "match-test": _match_test,
}


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ResultRecord:
    """Run ``cfg``; outputs depend only on the config (never on time or threads)."""
    cfg.check_caps()
    log.info("running %s (%s)", cfg.kind, cfg.experiment_id)
    artifacts: dict[str, str] = {}
    metrics = RUNNERS[cfg.kind](cfg, artifacts)
    record = ResultRecord(
        experiment_id=cfg.experiment_id,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        config=cfg.sections(),
        config_hash=cfg.hash(),
        seed=cfg.seed,
        metrics=metrics,
        artifacts=artifacts,
    )
    if write and cfg.out:
        write_record(record, cfg, Path(cfg.out))
    return record


def write_record(record: ResultRecord, cfg: ExperimentConfig, root: Path) -> Path:
    target = root / record.experiment_id
    target.mkdir(parents=True, exist_ok=True)
    (target / "config.txt").write_text(cfg.to_text())
    (target / "record.json").write_text(record.to_json())
    (target / "metrics.csv").write_text(record.metrics_csv())
    for name, body in record.artifacts.items():
        (target / name).write_text(body)
    log.info("wrote %s", target)
    return target
