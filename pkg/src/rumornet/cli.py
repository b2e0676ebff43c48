"""Command-line entry point.

Every subcommand writes its outputs plus ``manifest.json`` (config echo, input
digests, versions) into ``--out``. Options may also come from a flat
``key = value`` file given with ``--config``; command-line flags win.

Exit codes: 0 success, 1 contract or configuration error, 2 I/O error.
Log level is read from ``RUMORNET_LOG_LEVEL`` (default WARNING).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import cascade as cas
from . import detect as det
from . import exposure as exp
from . import geolocate as geo
from . import influence as inf
from . import ingest as ing
from ._accel import USE_NUMBA
from .crawler import CrawlState, SimulatedPlatform, bfs_crawl, scrape_posts
from .errors import ConfigError, RumorNetError
from .synth import random_graph, synthetic_dataset

log = logging.getLogger("rumornet")

EXIT_OK, EXIT_CONTRACT, EXIT_IO = 0, 1, 2


# -- helpers -----------------------------------------------------------------


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in str(text).split(",") if x.strip()]


def _require(cond, field, message):
    if not cond:
        raise ConfigError(f"{field}: {message}")


def _require_file(args, field):
    value = getattr(args, field)
    _require(value is not None, f"--{field.replace('_', '-')}", "is required")
    _require(Path(value).is_file(), f"--{field.replace('_', '-')}", f"file not found: {value}")
    return value


def _dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(args, out: Path, inputs: dict):
    try:
        import numba

        numba_version = numba.__version__
    except ImportError:  # pragma: no cover
        numba_version = None
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and not k.startswith("_")}
    _dump_json({
        "command": args.command,
        "config": {k: (str(v) if isinstance(v, Path) else v) for k, v in config.items()},
        "inputs": {k: {"path": str(p), "sha256": _digest(p)} for k, p in sorted(inputs.items()) if p},
        "versions": {
            "rumornet": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "numba": numba_version,
            "numba_enabled": USE_NUMBA,
        },
        "created_unix": int(time.time()),
    }, out / "manifest.json")


def _load_posts(path):
    result = ing.load_posts(path)
    if result.rejects:
        log.warning("%s: %d malformed rows rejected", path, len(result.rejects))
    return result


def _read_profiles(path):
    out = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            out[r["id"]] = (r.get("username") or "", r.get("profile_location") or "")
    return out


def _read_follows(path):
    friends = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            a, b = r["follower"], r["followee"]
            friends.setdefault(a, set()).add(b)
            friends.setdefault(b, set()).add(a)
    return friends


# -- pipeline steps shared by subcommands and report ---------------------------


def step_detect(posts, index, verifier, tau, out: Path, dead_letter=True):
    originals = [p for p in posts if p.repost_of is None]
    outcome = det.classify_batch(
        originals, det.KeywordDensityScorer(index), index, verifier, tau=tau,
        dead_letter_path=(out / "dead_letter.jsonl") if dead_letter else None,
    )
    det.write_results(outcome.results, out / "classifications.jsonl")
    stats = det.funnel_stats(outcome.results) if outcome.results else {}
    stats["posts_classified"] = len(outcome.results)
    stats["labeled_rumor"] = sum(r.stage_reached is det.Stage.LABELED_RUMOR for r in outcome.results)
    stats["dead_letters"] = len(outcome.dead_letters)
    _dump_json(stats, out / "funnel.json")
    labeled = ing.propagate_labels(det.apply_labels(posts, outcome.results))
    # parked posts stay unlabeled; everything else that was never a candidate is explicitly non-rumor
    parked = set(outcome.dead_letters)
    return labeled, parked


def step_geolocate(users, profiles, posts, friends, parser):
    posts_by = {}
    for p in posts:
        if p.repost_of is None:
            posts_by.setdefault(p.author, []).append(p)
    first = {}
    for u in users:
        name, loc = profiles.get(u.id, ("", ""))
        first[u.id] = geo.geolocate_user(u, loc, name, posts_by.get(u.id, []), [], parser)
    out = []
    for u in users:
        a = first[u.id]
        if a is None:
            friend_states = [first[f].state for f in sorted(friends.get(u.id, ())) if first.get(f) is not None]
            name, loc = profiles.get(u.id, ("", ""))
            a = geo.geolocate_user(u, loc, name, posts_by.get(u.id, []), friend_states, parser)
        out.append(a)
    return out


def step_influence(graph, posts, thetas, ks, out: Path):
    reach = inf.RumorReach(graph, posts)
    rows = inf.influence_table(graph, reach, thetas, ks)
    inf.write_influence_table(rows, out / "influence.csv")
    robustness = {}
    if len(rows) >= 2:
        base = [(r["user"], r["base"]) for r in rows]
        n = min(50, len(rows))
        for key in rows[0]:
            if key in ("user", "base"):
                continue
            other = [(r["user"], r[key]) for r in rows]
            robustness[key] = {
                "spearman_rho": inf.spearman_rho(base, other),
                f"top{n}_overlap": inf.top_set_overlap(base, other, n),
            }
    _dump_json({"users": len(rows), "variants": robustness}, out / "influence_robustness.json")
    return rows


def step_states(posts, assignments, populations, margins, out: Path):
    rates = inf.state_rumor_rates(posts, assignments, populations, margins)
    inf.write_state_rates(rates, out / "state_rates.csv")
    _dump_json({"pearson_r_rate_vs_margin": inf.rate_margin_correlation(rates)}, out / "state_correlation.json")
    return rates


def step_exposure(graph, posts, k_max, out: Path):
    panel = exp.build_panel(graph, posts)
    exp.write_panel(panel, out / "panel.csv")
    if panel:
        exp.write_curve(exp.sharing_curve(panel, k_max), out / "sharing_curve.csv")
    return panel


def step_timeline(posts, root_id, horizon, window, out: Path):
    if root_id is None:
        index = ing.PostIndex(posts)
        best = None
        for p in posts:
            if p.repost_of is None and p.rumor_label:
                n = len(index.reposts_of_root.get(p.post_id, ()))
                if best is None or n > best[0] or (n == best[0] and p.post_id < best[1]):
                    best = (n, p.post_id)
        if best is None:
            return None
        root_id = best[1]
    tl = exp.diffusion_timeline(root_id, posts, None, horizon=horizon, similarity_window=window)
    exp.write_timeline(tl, out / "timeline.csv", out / "secondary_posters.csv")
    return tl


def step_simulate(graph, seeds, spreaders, phis, max_iter, lo, hi, rng_seed, infected_transmit, out: Path):
    sweep = cas.sweep_thresholds(graph, seeds, phis, max_iter, spreaders, infected_transmit)
    cas.write_sweep(sweep, out / "sweep.csv")
    if lo is not None and hi is not None:
        cfg = cas.CascadeConfig(cas.PerNode(lo, hi, rng_seed), seeds, max_iter, spreaders, infected_transmit)
        res = cas.run_cascade(graph, cfg)
        cas.write_state_infection(cas.state_infection(graph, res), out / "state_infection.csv")
        _dump_json({
            "lo": lo, "hi": hi, "rng_seed": rng_seed,
            "iterations_run": res.iterations_run, "converged": res.converged,
            "infected_fraction_per_iteration": [round(x, 6) for x in res.infected_fraction_per_iteration],
        }, out / "pernode_cascade.json")
    return sweep


def _apply_assignments(graph, assignments):
    for a in assignments:
        if a is not None and a.user in graph:
            node = graph.node(a.user)
            node.state, node.geo_confidence = a.state, a.confidence


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(args, out):
    posts_path = _require_file(args, "posts")
    users_path = _require_file(args, "users")
    result = _load_posts(posts_path)
    users = ing.load_users(users_path)
    graph = ing.build_graph(result.records, users, rumor_only=args.rumor_only)
    summary = ing.dataset_summary(result.records, user_count=len(users)).to_dict()
    summary.update(nodes=graph.node_count, edges=graph.edge_count, rejects=len(result.rejects))
    _dump_json(summary, out / "summary.json")
    ing.write_rejects(result.rejects, out / "rejects.jsonl")
    ing.write_posts(result.records, out / "posts.jsonl")
    with open(out / "edges.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target", "weight"])
        for e in graph.edges():
            w.writerow([e.source, e.target, e.weight])
    return {"posts": posts_path, "users": users_path}


def cmd_detect(args, out):
    posts_path = _require_file(args, "posts")
    fixture = _require_file(args, "verifier_fixture")
    _require(0.0 <= args.tau <= 1.0, "--tau", "must be in [0, 1]")
    index = det.KeywordIndex.load(args.keywords)
    posts = _load_posts(posts_path).records
    labeled, _ = step_detect(posts, index, det.MockVerifier.load(fixture), args.tau, out)
    ing.write_posts(labeled, out / "labeled_posts.jsonl")
    return {"posts": posts_path, "verifier_fixture": fixture, "keywords": args.keywords}


def cmd_geolocate(args, out):
    users_path = _require_file(args, "users")
    profiles_path = _require_file(args, "profiles")
    parser = geo.GazetteerParser.from_csv(args.gazetteer) if args.gazetteer else geo.GazetteerParser()
    posts = _load_posts(args.posts).records if args.posts else []
    friends = _read_follows(args.follows) if args.follows else {}
    users = ing.load_users(users_path)
    assignments = step_geolocate(users, _read_profiles(profiles_path), posts, friends, parser)
    geo.write_assignments(assignments, out / "assignments.csv")
    _dump_json(geo.geolocation_report(assignments), out / "geolocation_report.json")
    return {"users": users_path, "profiles": profiles_path, "posts": args.posts,
            "follows": args.follows, "gazetteer": args.gazetteer}


def cmd_influence(args, out):
    posts_path = _require_file(args, "posts")
    users_path = _require_file(args, "users")
    thetas, ks = _floats(args.theta), _ints(args.topk)
    _require(all(0.0 <= t <= 1.0 for t in thetas), "--theta", "values must be in [0, 1]")
    _require(all(k >= 1 for k in ks), "--topk", "values must be positive")
    posts = _load_posts(posts_path).records
    graph = ing.build_graph(posts, ing.load_users(users_path))
    step_influence(graph, posts, thetas, ks, out)
    if args.assignments:
        pops = inf.read_state_values(args.populations) if args.populations else geo.default_populations()
        margins = inf.read_state_values(args.margins) if args.margins else None
        step_states(posts, geo.read_assignments(args.assignments), pops, margins, out)
    return {"posts": posts_path, "users": users_path, "assignments": args.assignments,
            "populations": args.populations, "margins": args.margins}


def cmd_exposure_curve(args, out):
    _require(args.k_max >= 1, "--k-max", "must be positive")
    if args.panel:
        panel = exp.read_panel(_require_file(args, "panel"))
        _require(len(panel) > 0, "--panel", "panel is empty")
        exp.write_curve(exp.sharing_curve(panel, args.k_max), out / "sharing_curve.csv")
        return {"panel": args.panel}
    posts_path = _require_file(args, "posts")
    users_path = _require_file(args, "users")
    posts = _load_posts(posts_path).records
    graph = ing.build_graph(posts, ing.load_users(users_path))
    step_exposure(graph, posts, args.k_max, out)
    if args.root_post or args.timeline:
        step_timeline(posts, args.root_post, args.horizon, args.similarity_window, out)
    return {"posts": posts_path, "users": users_path}


def _phis(args):
    _require(1 <= args.phi_min <= args.phi_max, "--phi-min/--phi-max", "need 1 <= phi-min <= phi-max")
    return range(args.phi_min, args.phi_max + 1)


def cmd_simulate(args, out):
    phis = _phis(args)
    _require(args.max_iterations >= 1, "--max-iterations", "must be positive")
    if (args.threshold_lo is None) != (args.threshold_hi is None):
        raise ConfigError("--threshold-lo/--threshold-hi: give both or neither")
    if args.threshold_lo is not None:
        _require(1 <= args.threshold_lo <= args.threshold_hi, "--threshold-lo/--threshold-hi", "need 1 <= lo <= hi")
    inputs = {}
    if args.posts or args.users:
        inputs = {"posts": _require_file(args, "posts"), "users": _require_file(args, "users")}
        posts = _load_posts(args.posts).records
        graph = ing.build_graph(posts, ing.load_users(args.users))
        seeds, spreaders = cas.roles_from_graph(graph)
    else:
        _require(args.synthetic_nodes >= 2, "--synthetic-nodes", "must be at least 2")
        graph = random_graph(args.synthetic_nodes, args.edge_prob, np.random.default_rng(args.rng_seed))
        ids = graph.user_ids()
        seeds, spreaders = frozenset(ids[: max(1, args.synthetic_seeds)]), frozenset()
    if args.seeds:
        seeds = frozenset(s for s in args.seeds.split(",") if s)
    _require(len(seeds) > 0, "--seeds", "no seed users")
    missing = [s for s in seeds if s not in graph]
    _require(not missing, "--seeds", f"unknown users {sorted(missing)[:5]}")
    step_simulate(graph, seeds, spreaders, phis, args.max_iterations, args.threshold_lo, args.threshold_hi,
                  args.rng_seed, not args.no_infected_transmit, out)
    return inputs


def cmd_crawl_sim(args, out):
    _require(args.nodes >= 1, "--nodes", "must be positive")
    _require(args.max_users >= 1, "--max-users", "must be positive")
    _require(args.cap >= 1, "--cap", "must be positive")
    _require(args.batch_size >= 1, "--batch-size", "must be positive")
    platform_ = SimulatedPlatform.generate(args.nodes, args.mean_degree, args.rng_seed,
                                          posts_per_user=args.posts_per_user)
    seed = args.seed_user or "user00000"
    _require(seed in platform_.following, "--seed-user", f"unknown user {seed}")
    state = CrawlState()
    users = bfs_crawl(platform_, seed, args.max_users, args.cap, workers=args.workers, state=state)
    ing.write_users(users, out / "users.csv")
    clock = iter(range(1_733_100_000, 1_733_100_000 + 10 * len(users) + 10))
    posts = []
    for _ in range(-(-len(users) // args.batch_size)):
        posts.extend(scrape_posts(platform_, users, state, args.batch_size, now=lambda: next(clock)))
    ing.write_posts(posts, out / "posts.jsonl")
    return {}


def cmd_validate(args, out):
    if args.confusion:
        data = json.loads(Path(_require_file(args, "confusion")).read_text(encoding="utf-8"))
        counts = {k: data.get(k) for k in ("tp", "fp", "tn", "fn")}
    else:
        counts = {k: getattr(args, k) for k in ("tp", "fp", "tn", "fn")}
    for k, v in counts.items():
        _require(isinstance(v, int) and v >= 0, f"--{k}", "must be a non-negative integer")
    m = det.confusion_metrics(**counts)
    result = m.to_dict()
    if args.prevalence is not None:
        _require(0.0 <= args.prevalence <= 1.0, "--prevalence", "must be in [0, 1]")
        result["prevalence"] = args.prevalence
        sens, specificity = m.recall, m.specificity
        result["prevalence_adjusted_ppv"] = (
            det.prevalence_adjusted_ppv(sens, specificity, args.prevalence)
            if sens is not None and specificity is not None else None
        )
    _dump_json(result, out / "metrics.json")
    return {"confusion": args.confusion}


def cmd_report(args, out):
    _require(0.0 <= args.tau <= 1.0, "--tau", "must be in [0, 1]")
    phis = _phis(args)
    if args.data_dir:
        d = Path(args.data_dir)
        _require(d.is_dir(), "--data-dir", f"not a directory: {d}")
        paths = {k: d / f for k, f in (("users", "users.csv"), ("posts", "posts.jsonl"), ("profiles", "profiles.csv"),
                                       ("follows", "follows.csv"), ("verifier_fixture", "verifier_fixture.jsonl"),
                                       ("margins", "margins.csv"))}
        for k in ("users", "posts", "verifier_fixture"):
            _require(paths[k].is_file(), "--data-dir", f"missing {paths[k].name}")
    else:
        paths = {k: Path(v) for k, v in synthetic_dataset(rng_seed=args.rng_seed).write(out / "dataset").items()}

    users = ing.load_users(paths["users"])
    posts = _load_posts(paths["posts"]).records
    index = det.KeywordIndex.load(args.keywords)
    verifier = det.MockVerifier.load(paths["verifier_fixture"])

    sub = {name: out / name for name in ("detect", "ingest", "influence", "geolocate", "exposure", "simulate")}
    for p in sub.values():
        p.mkdir(parents=True, exist_ok=True)

    labeled, parked = step_detect(posts, index, verifier, args.tau, sub["detect"])
    # posts parked by the verifier (and reposts of them) stay unlabeled and are left out downstream
    labeled = [p for p in labeled if p.rumor_label is not None]
    ing.write_posts(labeled, sub["detect"] / "labeled_posts.jsonl")

    graph = ing.build_graph(labeled, users)
    summary = ing.dataset_summary(labeled, user_count=len(users)).to_dict()
    summary.update(nodes=graph.node_count, edges=graph.edge_count)
    _dump_json(summary, sub["ingest"] / "summary.json")

    step_influence(graph, labeled, _floats(args.theta), _ints(args.topk), sub["influence"])

    profiles = _read_profiles(paths["profiles"]) if paths["profiles"].is_file() else {}
    friends = _read_follows(paths["follows"]) if paths["follows"].is_file() else {}
    assignments = step_geolocate(users, profiles, labeled, friends, geo.GazetteerParser())
    geo.write_assignments(assignments, sub["geolocate"] / "assignments.csv")
    _dump_json(geo.geolocation_report(assignments), sub["geolocate"] / "geolocation_report.json")
    margins = inf.read_state_values(paths["margins"]) if paths["margins"].is_file() else None
    step_states(labeled, assignments, geo.default_populations(), margins, sub["influence"])
    _apply_assignments(graph, assignments)

    step_exposure(graph, labeled, args.k_max, sub["exposure"])
    step_timeline(labeled, None, args.horizon, args.similarity_window, sub["exposure"])

    seeds, spreaders = cas.roles_from_graph(graph)
    if seeds:
        step_simulate(graph, seeds, spreaders, phis, args.max_iterations, 1, args.phi_max, args.rng_seed,
                      True, sub["simulate"])
    return {k: str(v) for k, v in paths.items() if Path(v).is_file()}


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rumornet", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name, func, help_):
        p = subs.add_parser(name, help=help_)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.set_defaults(func=func)
        return p

    def sim_opts(p):
        p.add_argument("--phi-min", type=int, default=1)
        p.add_argument("--phi-max", type=int, default=10)
        p.add_argument("--max-iterations", type=int, default=cas.DEFAULT_MAX_ITERATIONS)
        p.add_argument("--rng-seed", type=int, default=0)

    p = sub("ingest", cmd_ingest, "parse posts/users, build the graph, summarize")
    p.add_argument("--posts")
    p.add_argument("--users")
    p.add_argument("--rumor-only", action="store_true", help="build edges from rumor reposts only")

    p = sub("detect", cmd_detect, "run the detection funnel with the fixture verifier")
    p.add_argument("--posts")
    p.add_argument("--keywords", help="keyword index file (default: bundled starter list)")
    p.add_argument("--verifier-fixture")
    p.add_argument("--tau", type=float, default=det.DEFAULT_TAU)

    p = sub("geolocate", cmd_geolocate, "assign states to users")
    p.add_argument("--users")
    p.add_argument("--profiles", help="CSV: id, username, profile_location")
    p.add_argument("--posts")
    p.add_argument("--follows", help="CSV: follower, followee")
    p.add_argument("--gazetteer", help="CSV: place, state")

    p = sub("influence", cmd_influence, "influence metric, robustness variants, state rates")
    p.add_argument("--posts")
    p.add_argument("--users")
    p.add_argument("--theta", default="0.25,0.5,0.75")
    p.add_argument("--topk", default="10,25,50")
    p.add_argument("--assignments")
    p.add_argument("--populations")
    p.add_argument("--margins")

    p = sub("exposure-curve", cmd_exposure_curve, "exposure panel and cumulative sharing curve")
    p.add_argument("--panel", help="CSV: user, rumor, exposure_count, first_share_exposure")
    p.add_argument("--posts")
    p.add_argument("--users")
    p.add_argument("--k-max", type=int, default=30)
    p.add_argument("--timeline", action="store_true", help="also emit the timeline of the most reposted rumor")
    p.add_argument("--root-post")
    p.add_argument("--horizon", type=int, default=24 * 3600)
    p.add_argument("--similarity-window", type=int, default=exp.DEFAULT_SIMILARITY_WINDOW)

    p = sub("simulate", cmd_simulate, "threshold cascade sweep")
    p.add_argument("--posts")
    p.add_argument("--users")
    p.add_argument("--seeds", help="comma-separated seed ids (default: Seed roles from data)")
    p.add_argument("--synthetic-nodes", type=int, default=200)
    p.add_argument("--synthetic-seeds", type=int, default=3)
    p.add_argument("--edge-prob", type=float, default=0.03)
    p.add_argument("--threshold-lo", type=int)
    p.add_argument("--threshold-hi", type=int)
    p.add_argument("--no-infected-transmit", action="store_true")
    sim_opts(p)

    p = sub("crawl-sim", cmd_crawl_sim, "BFS crawl and post scrape of a simulated platform")
    p.add_argument("--nodes", type=int, default=500)
    p.add_argument("--mean-degree", type=float, default=8.0)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--seed-user")
    p.add_argument("--max-users", type=int, default=200)
    p.add_argument("--cap", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--posts-per-user", type=float, default=3.0)
    p.add_argument("--batch-size", type=int, default=50)

    p = sub("validate", cmd_validate, "confusion-matrix validation metrics")
    p.add_argument("--confusion", help="JSON file with tp, fp, tn, fn")
    for k in ("tp", "fp", "tn", "fn"):
        p.add_argument(f"--{k}", type=int)
    p.add_argument("--prevalence", type=float)

    p = sub("report", cmd_report, "full pipeline on a dataset directory (default: bundled synthetic data)")
    p.add_argument("--data-dir")
    p.add_argument("--keywords")
    p.add_argument("--tau", type=float, default=det.DEFAULT_TAU)
    p.add_argument("--theta", default="0.25,0.5,0.75")
    p.add_argument("--topk", default="10,25,50")
    p.add_argument("--k-max", type=int, default=30)
    p.add_argument("--horizon", type=int, default=24 * 3600)
    p.add_argument("--similarity-window", type=int, default=exp.DEFAULT_SIMILARITY_WINDOW)
    sim_opts(p)
    return parser


def read_config(path) -> dict:
    values = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(parser, argv):
    """Parse once to find the subcommand and --config, then re-parse with the
    file's values installed as defaults so explicit flags still win."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ConfigError(f"{key}: unknown config key for '{args.command}'")
        if action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except ValueError:
                raise ConfigError(f"{key}: invalid value {raw!r}") from None
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Optional[list] = None) -> int:
    logging.basicConfig(level=os.environ.get("RUMORNET_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        inputs = args.func(args, out)
        _write_manifest(args, out, {k: v for k, v in (inputs or {}).items() if v})
    except (RumorNetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
