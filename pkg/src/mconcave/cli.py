"""Command-line harness: generate corpora, run verification suites, and
hunt for counterexamples with seeded mutations.

Exit codes: 0 when every report passes, 1 when any suite reports FAIL
(a falsification), 2 on operational errors (bad config, malformed
instance files, I/O). All randomness flows from one seed; instance k
uses the derived sub-seed ``seed XOR k``, so equal configurations give
byte-identical reports regardless of --jobs.
"""

import argparse
import json
import math
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import FormatError, NEG_INF, load, store
from .duality import (
    build_restrictions,
    check_conjugate_submodular,
    check_cross_submodular,
    check_strong_quotient,
    fenchel_gap,
    _feasible_caps,
)
from .exchange import (
    ExchangeContext,
    Falsification,
    _multi_pass_margin,
    augment_lt,
    check_exc_multi,
    check_exc_single,
    check_m_concave,
    exchange_leq,
    lift,
    submasks_ascending,
)
from .families import (
    CorpusInstance,
    LaminarSpec,
    assignment_valuation,
    default_corpus,
    graphic_matroid,
    laminar_concave_fn,
    matroid_rank_fn,
    mutate,
    partition_matroid,
    random_table,
    uniform_matroid,
    weighted_basis_valuation,
)
from .reporting import VerificationReport, failed_report, passed_report

ALL_SUITES = (
    "exc_single",
    "exc_multi_bounded",
    "exc_multi_unbounded",
    "corollary1",
    "m_concave_lift",
    "fenchel",
    "lemmas_2_8",
    "duality_grid",
)

MASK64 = (1 << 64) - 1

# Instances up to this ground-set size get exhaustive multiple-exchange
# sweeps; larger ones are sampled (matches the acceptance policy).
EXHAUSTIVE_N_LIMIT = 7

FENCHEL_PAIR_N_LIMIT = 5


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    families: object = "default"  # "default" or a list of family spec dicts
    n_range: tuple = (3, 8)
    trials: int = 1000
    mode: str = "int"
    tolerance: float = 1e-9
    suites: tuple = ALL_SUITES
    out: str | None = None
    jobs: int = 1
    samples: int = 10_000

    @classmethod
    def from_dict(cls, d):
        cfg = cls()
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        fixed = dict(d)
        if "suites" in fixed:
            fixed["suites"] = _parse_suites(fixed["suites"])
        if "n_range" in fixed:
            fixed["n_range"] = tuple(fixed["n_range"])
        return replace(cfg, **fixed)


def _parse_suites(value):
    tokens = value.split(",") if isinstance(value, str) else list(value)
    tokens = [t.strip() for t in tokens if t and t.strip()]
    bad = [t for t in tokens if t not in ALL_SUITES]
    if bad:
        raise ValueError(f"unknown suites {bad}; valid: {', '.join(ALL_SUITES)}")
    chosen = set(tokens)
    return tuple(s for s in ALL_SUITES if s in chosen)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return SuiteConfig.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Family specs -> instances (used by `gen` for non-default corpora).


def _build_matroid(spec):
    kind = spec["kind"]
    if kind == "uniform":
        return uniform_matroid(spec["n"], spec["r"])
    if kind == "partition":
        return partition_matroid(spec["blocks"], spec["caps"])
    if kind == "graphic":
        return graphic_matroid(spec["num_vertices"], [tuple(e) for e in spec["edges"]])
    raise ValueError(f"unknown matroid kind {kind!r}")


def build_instance(spec, index, master_seed):
    """Build one corpus instance from a config dict. Seeded constructors
    (random, mutated) derive their seed from the master seed and the
    instance index unless the dict pins one; the seed used is recorded."""
    family = spec["family"]
    instance_id = spec.get("id", f"{family}_{index}")
    derived = (master_seed ^ index) & MASK64
    meta = {k: v for k, v in spec.items() if k not in ("family", "id")}
    if family == "matroid_rank":
        m = _build_matroid(spec["matroid"])
        return CorpusInstance(instance_id, family, meta, matroid_rank_fn(m), m)
    if family == "weighted_basis":
        m = _build_matroid(spec["matroid"])
        fn = weighted_basis_valuation(m, tuple(spec["weights"]))
        return CorpusInstance(instance_id, family, meta, fn, m)
    if family == "laminar":
        ls = LaminarSpec(spec["n"], tuple(map(tuple, spec["members"])),
                         tuple(map(tuple, spec["tables"])))
        return CorpusInstance(instance_id, family, meta, laminar_concave_fn(ls))
    if family == "assignment":
        return CorpusInstance(instance_id, family, meta,
                              assignment_valuation(spec["weights"]))
    if family == "random":
        seed = spec.get("seed", derived)
        fn = random_table(spec["n"], seed, spec.get("lo", -5), spec.get("hi", 5),
                          spec.get("neg_inf_prob", 0.2))
        meta = dict(meta, seed=seed)
        return CorpusInstance(instance_id, family, meta, fn)
    if family == "mutated":
        base = build_instance(spec["base"], index, master_seed)
        seed = spec.get("seed", derived)
        fn = mutate(base.fn, seed, spec.get("magnitude", 1),
                    spec.get("toggle_neg_inf", False))
        meta = dict(meta, seed=seed, base_id=base.instance_id)
        return CorpusInstance(instance_id, family, meta, fn)
    raise ValueError(f"unknown family {family!r}")


def resolve_instances(cfg):
    if cfg.families == "default":
        return default_corpus()
    return [build_instance(spec, i, cfg.seed) for i, spec in enumerate(cfg.families)]


# ---------------------------------------------------------------------------
# Per-instance suite runners.


def _regime_for(f):
    return "exhaustive" if f.n <= EXHAUSTIVE_N_LIMIT else "sampled"


def _suite_exc_single(instance_id, f, cfg, seed):
    return check_exc_single(f, instance_id=instance_id)


def _suite_exc_multi(bounded):
    def run(instance_id, f, cfg, seed):
        return check_exc_multi(f, bounded=bounded, regime=_regime_for(f),
                               samples=cfg.samples, seed=seed,
                               instance_id=instance_id)
    return run


def _suite_corollary1(instance_id, f, cfg, seed):
    reports = [
        check_exc_single(f, instance_id=instance_id),
        check_exc_multi(f, bounded=False, regime=_regime_for(f),
                        samples=cfg.samples, seed=seed, instance_id=instance_id),
        check_exc_multi(f, bounded=True, regime=_regime_for(f),
                        samples=cfg.samples, seed=seed, instance_id=instance_id),
    ]
    verdicts = [r.verdict for r in reports]
    agreement = len(set(verdicts)) == 1
    triples = sum(r.triples_checked for r in reports)
    if agreement and reports[0].passed:
        return passed_report("corollary1", instance_id, triples=triples,
                             regime=reports[1].regime, seed=seed)
    counter = {"verdicts": verdicts, "agreement": agreement}
    if not agreement:
        counter["reason"] = "checker verdicts disagree"
    else:
        counter["detail"] = reports[0].counterexample
    return failed_report("corollary1", instance_id, counter, triples=triples,
                         regime=reports[1].regime, seed=seed)


def _suite_m_concave_lift(instance_id, f, cfg, seed):
    lifted = lift(f)
    report = check_m_concave(lifted, instance_id=instance_id)
    s, r = f.dom_size_range()
    expected = sum(math.comb(r - s, r - m.bit_count()) for m in f.dom_masks)
    if len(lifted.dom_masks) != expected:
        counter = {"reason": "lifted domain size mismatch",
                   "expected": expected, "actual": len(lifted.dom_masks)}
        return failed_report("m_concave_lift", instance_id, counter,
                             triples=report.triples_checked)
    return VerificationReport("m_concave_lift", instance_id, report.verdict,
                              report.counterexample, None,
                              report.triples_checked, "exhaustive", None)


def _suite_lemmas(instance_id, f, cfg, seed):
    gate = check_exc_single(f, instance_id=instance_id)
    if not gate.passed:
        counter = {"reason": "single-exchange precondition fails",
                   "detail": gate.counterexample}
        return failed_report("lemmas_2_8", instance_id, counter,
                             triples=gate.triples_checked)
    checked = 0
    for xm in f.dom_masks:
        for ym in f.dom_masks:
            kx, ky = xm.bit_count(), ym.bit_count()
            X = _els(xm)
            Y = _els(ym)
            if kx <= ky:
                d = xm & ~ym
                while d:
                    ib = d & -d
                    d ^= ib
                    checked += 1
                    if exchange_leq(f, X, Y, ib.bit_length()) is None:
                        counter = {"fact": "swap_at_leq_size", "X": list(X),
                                   "Y": list(Y), "i": ib.bit_length()}
                        return failed_report("lemmas_2_8", instance_id, counter,
                                             triples=checked)
            if kx < ky:
                checked += 1
                if augment_lt(f, X, Y) is None:
                    counter = {"fact": "augment_at_lt_size",
                               "X": list(X), "Y": list(Y)}
                    return failed_report("lemmas_2_8", instance_id, counter,
                                         triples=checked)
            for im in submasks_ascending(xm & ~ym):
                checked += 1
                ctx = ExchangeContext(f.n, xm, ym, im)
                try:
                    build_restrictions(f, ctx)
                except Falsification as e:
                    counter = {"fact": "restriction_domains_nonempty",
                               "X": list(X), "Y": list(Y),
                               "I": list(_els(im)), "detail": str(e)}
                    return failed_report("lemmas_2_8", instance_id, counter,
                                         triples=checked)
    return passed_report("lemmas_2_8", instance_id, triples=checked)


def _suite_duality_grid(instance_id, f, cfg, seed):
    reports = [check_conjugate_submodular(f, seed=seed, samples=cfg.samples,
                                          instance_id=instance_id)]
    caps = list(_feasible_caps(f))
    per_k = max(1, cfg.samples // max(1, len(caps)))
    for k in caps:
        reports.append(check_cross_submodular(f, k, seed=seed, samples=per_k,
                                              instance_id=instance_id))
        reports.append(check_strong_quotient(f, k, seed=seed, samples=per_k,
                                             instance_id=instance_id))
    triples = sum(r.triples_checked for r in reports)
    regime = reports[0].regime
    failed = [r for r in reports if not r.passed]
    if failed:
        return failed_report("duality_grid", instance_id, failed[0].counterexample,
                             triples=triples, regime=regime,
                             seed=seed if regime == "sampled" else None)
    return passed_report("duality_grid", instance_id, triples=triples,
                         regime=regime, seed=seed if regime == "sampled" else None)


def _els(mask):
    return tuple(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)


_INSTANCE_SUITES = {
    "exc_single": _suite_exc_single,
    "exc_multi_bounded": _suite_exc_multi(True),
    "exc_multi_unbounded": _suite_exc_multi(False),
    "corollary1": _suite_corollary1,
    "m_concave_lift": _suite_m_concave_lift,
    "lemmas_2_8": _suite_lemmas,
    "duality_grid": _suite_duality_grid,
}


def _instance_reports(task):
    index, instance_id, f, cfg = task
    seed = (cfg.seed ^ index) & MASK64
    return [_INSTANCE_SUITES[s](instance_id, f, cfg, seed)
            for s in cfg.suites if s != "fenchel"]


def run_fenchel_pairs(instances, cfg):
    """Exact duality-gap certification over all same-n corpus pairs with
    small ground sets; a boundary-flagged result is retried once with a
    doubled box."""
    reports = []
    eligible = [(iid, f) for iid, f in instances if f.n <= FENCHEL_PAIR_N_LIMIT]
    for a in range(len(eligible)):
        for b in range(a, len(eligible)):
            id1, f1 = eligible[a]
            id2, f2 = eligible[b]
            if f1.n != f2.n:
                continue
            pair_id = f"{id1}+{id2}"
            res = fenchel_gap(f1, f2)
            if res.primal is NEG_INF:
                # Disjoint effective domains: the dual is unbounded below,
                # so the boundary hit is the expected diagnostic.
                ok = res.boundary
            else:
                if res.boundary:
                    res = fenchel_gap(f1, f2, box=2 * res.box)
                if res.mode == "int":
                    ok = res.certified and not res.boundary
                else:
                    ok = res.gap is not None and abs(res.gap) <= cfg.tolerance
            if ok:
                reports.append(passed_report("fenchel", pair_id, triples=1))
            else:
                reports.append(failed_report("fenchel", pair_id, res.to_dict(),
                                             triples=1))
    return reports


def run_check(instances, cfg):
    """All selected suites over (instance_id, SetFn) pairs, reports in
    deterministic instance order."""
    tasks = [(i, iid, f, cfg) for i, (iid, f) in enumerate(instances)]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            grouped = list(pool.map(_instance_reports, tasks))
    else:
        grouped = [_instance_reports(t) for t in tasks]
    reports = [r for group in grouped for r in group]
    if "fenchel" in cfg.suites:
        reports.extend(run_fenchel_pairs(instances, cfg))
    return reports


# ---------------------------------------------------------------------------
# Falsification campaign: seeded random tables and corpus mutations, looking
# for anything that passes the single exchange check yet fails the bounded
# multiple exchange check. Finding one would break the equivalence the
# corollary1 suite relies on.


@dataclass
class FalsifyOutcome:
    trials: int
    singles_passed: int = 0
    counterexamples: list = field(default_factory=list)
    near_misses: list = field(default_factory=list)  # (margin, trial, kind)
    kinds: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "trials": self.trials,
            "singles_passed": self.singles_passed,
            "counterexamples": self.counterexamples,
            "near_misses": [
                {"margin": m, "trial": t, "kind": k} for m, t, k in self.near_misses
            ],
            "kinds": dict(sorted(self.kinds.items())),
        }


def _falsify_bases():
    """Small corpus instances to mutate, weighted toward cheap sizes."""
    weights = {3: 3, 4: 2, 5: 1}
    bases = []
    for inst in default_corpus():
        bases.extend([inst] * weights.get(inst.fn.n, 0))
    return bases


def falsify_campaign(trials, seed, n_range=(2, 5), keep_near=5):
    n_lo = max(1, n_range[0])
    n_hi = min(5, n_range[1])  # the campaign is defined at n <= 5
    if n_lo > n_hi:
        raise ValueError(f"empty falsification range {n_range}")
    bases = [b for b in _falsify_bases() if n_lo <= b.fn.n <= n_hi] or None
    out = FalsifyOutcome(trials=trials)
    for t in range(trials):
        rng = random.Random((seed ^ t) & MASK64)
        if t % 2 == 0 or bases is None:
            n = rng.randint(n_lo, n_hi)
            f = random_table(n, rng.randrange(1 << 32))
            kind = "random"
        else:
            base = bases[rng.randrange(len(bases))]
            mseed = rng.randrange(1 << 32)
            magnitude = rng.randint(1, 3)
            if rng.random() < 0.3:
                f = mutate(base.fn, mseed, magnitude, toggle_neg_inf=True)
                if not f.dom_masks:
                    f = mutate(base.fn, mseed, magnitude)
            else:
                f = mutate(base.fn, mseed, magnitude)
            kind = "mutated"
        out.kinds[kind] = out.kinds.get(kind, 0) + 1
        if not check_exc_single(f).passed:
            continue
        out.singles_passed += 1
        ok, margin = _multi_pass_margin(f, bounded=True)
        if not ok:
            out.counterexamples.append({
                "trial": t,
                "kind": kind,
                "n": f.n,
                "values": [None if v is NEG_INF else v for v in f.values],
            })
        else:
            out.near_misses.append((margin, t, kind))
            out.near_misses.sort()
            del out.near_misses[keep_near:]
    return out


# ---------------------------------------------------------------------------
# Commands.


def _emit(lines, out_path):
    text = "".join(line + "\n" for line in lines)
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(cfg, out_dir):
    out_dir = Path(out_dir or cfg.out or "corpus")
    inst_dir = out_dir / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"seed": cfg.seed, "instances": []}
    for inst in resolve_instances(cfg):
        path = inst_dir / f"{inst.instance_id}.json"
        store(inst.fn, path)
        manifest["instances"].append({
            "id": inst.instance_id,
            "family": inst.family,
            "params": _jsonable(inst.params),
            "n": inst.fn.n,
            "mode": inst.fn.mode,
            "path": f"instances/{inst.instance_id}.json",
        })
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def load_instances(paths):
    """Instances from explicit files or from gen output directories."""
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            manifest_path = p / "manifest.json"
            if manifest_path.exists():
                with open(manifest_path, "r", encoding="utf-8") as fh:
                    manifest = json.load(fh)
                for entry in manifest["instances"]:
                    out.append((entry["id"], load(p / entry["path"])))
            else:
                for f in sorted(p.glob("*.json")):
                    out.append((f.stem, load(f)))
        else:
            out.append((p.stem, load(p)))
    return out


def cmd_check(cfg, paths):
    instances = load_instances(paths) if paths else \
        [(inst.instance_id, inst.fn) for inst in resolve_instances(cfg)]
    reports = run_check(instances, cfg)
    _emit([r.to_json_line() for r in reports], cfg.out)
    return 0 if all(r.passed for r in reports) else 1


def cmd_falsify(cfg, trials):
    trials = cfg.trials if trials is None else trials
    outcome = falsify_campaign(trials, cfg.seed, n_range=cfg.n_range)
    _emit([json.dumps(outcome.to_dict(), sort_keys=True, separators=(",", ":"))],
          cfg.out)
    return 1 if outcome.counterexamples else 0


# ---------------------------------------------------------------------------


def _add_common_flags(sp):
    sp.add_argument("--config", help="JSON config file mirroring SuiteConfig")
    sp.add_argument("--seed", type=int, help="master seed (64-bit)")
    sp.add_argument("--suites", help="comma-separated suite list")
    sp.add_argument("--out", help="output path (reports or corpus dir)")
    sp.add_argument("--jobs", type=int, help="worker processes (env DCA_JOBS)")
    sp.add_argument("--mode", choices=("int", "real"), help="numeric mode")
    sp.add_argument("--tol", type=float, help="real-mode tolerance")


def _config_from_args(args):
    cfg = load_config(args.config) if args.config else SuiteConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.suites is not None:
        overrides["suites"] = _parse_suites(args.suites)
    if args.out is not None:
        overrides["out"] = args.out
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.tol is not None:
        overrides["tolerance"] = args.tol
    jobs = args.jobs
    if jobs is None:
        jobs = int(os.environ.get("DCA_JOBS", "1"))
    overrides["jobs"] = jobs
    return replace(cfg, **overrides)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mconcave",
        description="Exchange-property and duality verification suites for "
                    "set functions with exchange structure.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp_gen = sub.add_parser("gen", help="write corpus instance files + manifest")
    _add_common_flags(sp_gen)

    sp_check = sub.add_parser("check", help="run suites over instances")
    _add_common_flags(sp_check)
    sp_check.add_argument("paths", nargs="*",
                          help="instance files or gen output dirs "
                               "(default: the built-in corpus)")

    sp_falsify = sub.add_parser("falsify", help="seeded counterexample search")
    _add_common_flags(sp_falsify)
    sp_falsify.add_argument("--trials", type=int, help="number of trials")

    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "gen":
            return cmd_gen(cfg, args.out)
        if args.command == "check":
            return cmd_check(cfg, args.paths)
        if args.command == "falsify":
            return cmd_falsify(cfg, args.trials)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (OSError, ValueError, FormatError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
