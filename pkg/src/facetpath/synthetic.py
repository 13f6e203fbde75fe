"""Deterministic synthetic shop: catalog, clickstream log, and ground truth.

The generator fabricates a small shop whose behavioral data has the same
learnable structure as real search logs:

* a taxonomy of 2-to-4 level paths whose deeper labels are reused across
  parents, so a bare "shoes" query is genuinely ambiguous;
* product descriptions made of brand, category labels and a model token;
* sessions that mostly browse one top-level category (the coherence rate
  decides, per session, between staying home and wandering);
* queries sampled from the clicked product's description tokens, with a
  configurable chance of replacing tokens with global noise.

Everything is driven by one seed and emits byte-identical files on reruns.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path as FsPath

__all__ = ["SynthConfig", "generate_synthetic", "SynthesisError"]


class SynthesisError(ValueError):
    """Raised when a config cannot produce a consistent shop."""


_TOP_LEVEL = ["sport", "home", "garden", "music", "office", "outdoor", "toys", "kitchen"]
_LEVEL2 = ["shoes", "pants", "shirts", "balls", "tools", "lamps", "chairs", "mats", "racks", "bags"]
# Deep labels are name-like and drawn mostly without replacement, so the
# node vocabulary grows with the tree and one-hot Gini ceilings stay high.
_LEVEL3 = [
    "lebron", "curry", "jordan", "serena", "federer", "bolt", "pele", "messi",
    "ronaldo", "kobe", "shaq", "durant", "giannis", "luka", "tatum", "embiid",
    "ali", "tyson", "rocky", "hamilton", "senna", "schumi", "alonso", "vettel",
    "viper", "falcon", "eagle", "hawk", "raven", "condor", "heron", "swift",
    "alpine", "nordic", "pacific", "atlantic", "arctic", "sahara", "andes", "alps",
    "cobalt", "crimson", "amber", "jade", "onyx", "pearl", "ruby", "topaz",
    "comet", "meteor", "nova", "pulsar", "quark", "nebula", "zephyr", "cyclone",
    "delta", "sigma", "omega", "alpha", "bravo", "tango", "foxtrot", "lima",
    "aurora", "borealis", "cascade", "canyon", "mesa", "dune", "tundra", "prairie",
    "ember", "frost", "blaze", "storm", "thunder", "lightning", "drizzle", "monsoon",
]
_LEVEL4 = [
    "small", "large", "blue", "red", "set", "duo", "mini", "grand",
    "lite", "plus", "turbo", "retro", "neo", "prime", "core", "edge",
    "apex", "wave", "flux", "gem", "bold", "pure", "slim", "wide",
]
_BRANDS = ["acme", "zenith", "orion", "nimbus", "vertex", "quasar", "halcyon", "kodiak"]
_LABEL_POOLS = [_TOP_LEVEL, _LEVEL2, _LEVEL3, _LEVEL4]


@dataclass(frozen=True)
class SynthConfig:
    n_products: int = 1000
    n_sessions: int = 2000
    # children per node at each depth; length = max path depth (2..4)
    branching: tuple[int, ...] = (6, 4, 3)
    session_coherence_rate: float = 0.8
    query_noise_rate: float = 0.1
    # share of (deep-product) queries naming the product's leaf label;
    # the rest name the shared second-level label and stay ambiguous
    leaf_query_rate: float = 0.5
    # popularity of top-level categories (cycled/truncated to branching[0])
    category_weights: tuple[float, ...] = (0.35, 0.15, 0.15, 0.15, 0.1, 0.1)
    n_brands: int = 6
    n_models: int = 30
    max_views_per_session: int = 6
    max_searches_per_session: int = 3
    result_set_size: int = 12
    extra_click_rate: float = 0.15
    product_depth_weights: tuple[float, ...] = ()  # over depths 2..max; empty = uniform

    def validate(self) -> None:
        if self.n_products < 1 or self.n_sessions < 1:
            raise SynthesisError("n_products and n_sessions must be positive")
        if not 2 <= len(self.branching) <= 4:
            raise SynthesisError(f"taxonomy depth must be 2..4, got {len(self.branching)}")
        for level, width in enumerate(self.branching):
            pool = _LABEL_POOLS[level]
            if not 1 <= width <= len(pool):
                raise SynthesisError(
                    f"branching[{level}]={width} infeasible: label pool holds {len(pool)}"
                )
        for name in ("session_coherence_rate", "query_noise_rate", "extra_click_rate", "leaf_query_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SynthesisError(f"{name} must be in [0, 1], got {v}")
        if not 1 <= self.n_brands <= len(_BRANDS):
            raise SynthesisError(f"n_brands must be 1..{len(_BRANDS)}")
        if self.product_depth_weights and len(self.product_depth_weights) != len(self.branching) - 1:
            raise SynthesisError("product_depth_weights must cover depths 2..max_depth")
        if self.result_set_size < 2:
            raise SynthesisError("result_set_size must be >= 2")


@dataclass
class _Product:
    pid: str
    path: tuple[str, ...]
    description: str

    @property
    def tokens(self) -> list[str]:
        return self.description.split()


@dataclass
class _Shop:
    products: list[_Product]
    by_category: dict[str, list[int]] = field(default_factory=dict)
    token_index: dict[str, list[int]] = field(default_factory=dict)

    def build_indexes(self) -> None:
        for i, prod in enumerate(self.products):
            self.by_category.setdefault(prod.path[0], []).append(i)
            for tok in dict.fromkeys(prod.tokens):
                self.token_index.setdefault(tok, []).append(i)


def _build_taxonomy(config: SynthConfig, rng: random.Random) -> list[tuple[str, ...]]:
    """All full-depth chains of the taxonomy, as label tuples.

    Second-level labels are sampled per parent from a small shared pool,
    so "shoes" exists under several categories and a bare query stays
    ambiguous. Deeper labels come from one shuffled global bag (refilled
    when empty), keeping them mostly unique across the tree.
    """
    tops = _TOP_LEVEL[: config.branching[0]]
    chains: list[tuple[str, ...]] = [(t,) for t in tops]
    for level in range(1, len(config.branching)):
        pool = _LABEL_POOLS[level]
        width = config.branching[level]
        grown: list[tuple[str, ...]] = []
        if level == 1:
            for chain in chains:
                kids = rng.sample(pool, width)
                grown.extend(chain + (kid,) for kid in sorted(kids))
        else:
            bag: list[str] = []
            for chain in chains:
                kids = []
                while len(kids) < width:
                    if not bag:
                        bag = pool.copy()
                        rng.shuffle(bag)
                    label = bag.pop()
                    if label not in kids:
                        kids.append(label)
                grown.extend(chain + (kid,) for kid in sorted(kids))
        chains = grown
    return chains


def _category_weights(config: SynthConfig) -> list[float]:
    n = config.branching[0]
    base = list(config.category_weights)
    if len(base) < n:
        base = base + [base[-1]] * (n - len(base))
    return base[:n]


def _make_products(config: SynthConfig, rng: random.Random) -> list[_Product]:
    chains = _build_taxonomy(config, rng)
    max_depth = len(config.branching)
    depths = list(range(2, max_depth + 1))
    weights = list(config.product_depth_weights) or [1.0] * len(depths)
    tops = _TOP_LEVEL[: config.branching[0]]
    cat_w = _category_weights(config)
    by_top: dict[str, list[tuple[str, ...]]] = {t: [] for t in tops}
    for chain in chains:
        by_top[chain[0]].append(chain)
    brands = _BRANDS[: config.n_brands]
    products: list[_Product] = []
    for i in range(config.n_products):
        top = rng.choices(tops, weights=cat_w)[0]
        chain = rng.choice(by_top[top])
        depth = rng.choices(depths, weights=weights)[0]
        path = chain[:depth]
        brand = rng.choice(brands)
        model = f"m{rng.randrange(config.n_models):02d}"
        description = " ".join([brand, *path, model])
        products.append(_Product(pid=f"p{i:04d}", path=path, description=description))
    return products


def _sample_query(prod: _Product, all_tokens: list[str], config: SynthConfig, rng: random.Random) -> str:
    """Query for a product: either its deep leaf label or a shared shallow one.

    The leaf shape pins the product's subtree on its own; the shallow
    shape reuses a second-level label that exists under several top
    categories, so only the session says which one is meant. Both can
    carry one extra token (parent label, brand, or top category) and are
    subject to per-token noise replacement.
    """
    path = prod.path
    brand = prod.tokens[0]
    if len(path) >= 3 and rng.random() < config.leaf_query_rate:
        # the depth-3 name is the distinctive one; depth-4 labels are shared
        picked = [path[2]]
        if len(path) >= 4 and rng.random() < 0.4:
            picked.append(path[3])
        elif rng.random() < 0.4:
            picked.append(path[1])
    else:
        picked = [path[1] if len(path) >= 2 else path[0]]
        r = rng.random()
        if r < 0.3:
            picked.append(brand)
        elif r < 0.5:
            picked.append(path[0])
    picked = [rng.choice(all_tokens) if rng.random() < config.query_noise_rate else t for t in picked]
    return " ".join(picked)


def _result_set(
    shop: _Shop, query: str, target_idx: int, config: SynthConfig, rng: random.Random
) -> list[int]:
    candidates: set[int] = set()
    for tok in query.split():
        candidates.update(shop.token_index.get(tok, ()))
    candidates.discard(target_idx)
    pool = sorted(candidates)
    n_extra = min(len(pool), config.result_set_size - 1)
    chosen = rng.sample(pool, n_extra) if n_extra else []
    serp = [target_idx] + chosen
    rng.shuffle(serp)
    return serp


def generate_synthetic(
    config: SynthConfig, seed: int, out_dir: str
) -> tuple[str, str, str]:
    """Write catalog.jsonl, events.jsonl and manifest.jsonl under ``out_dir``.

    Returns the three file paths. Deterministic: a fixed (config, seed)
    yields byte-identical files.
    """
    config.validate()
    rng = random.Random(seed)
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    products = _make_products(config, rng)
    shop = _Shop(products)
    shop.build_indexes()
    tops = sorted(shop.by_category)
    cat_w = _category_weights(config)
    top_weights = [cat_w[_TOP_LEVEL.index(t)] for t in tops]
    all_tokens = sorted(shop.token_index)

    catalog_file = out / "catalog.jsonl"
    with open(catalog_file, "w", encoding="utf-8") as fh:
        for prod in products:
            fh.write(
                json.dumps(
                    {"product_id": prod.pid, "path": list(prod.path), "description": prod.description}
                )
                + "\n"
            )

    base_ts = 1_650_000_000_000
    events: list[dict] = []
    manifest: list[dict] = []
    for s in range(config.n_sessions):
        sid = f"s{s:05d}"
        t0 = base_ts + s * 60_000
        home = rng.choices(tops, weights=top_weights)[0]
        coherent = rng.random() < config.session_coherence_rate
        away = rng.choice([t for t in tops if t != home]) if len(tops) > 1 else home
        n_views = rng.randint(0, config.max_views_per_session)
        if not coherent:
            n_views = max(n_views, 2)  # a wandering session must be able to mix

        tick = 0
        session_cats: list[str] = []
        for v in range(n_views):
            if coherent:
                cat = home
            else:
                # wandering sessions alternate so they always mix categories
                cat = home if v % 2 == 0 else away
            session_cats.append(cat)
            pid_idx = rng.choice(shop.by_category[cat])
            events.append(
                {
                    "session_id": sid,
                    "timestamp": t0 + tick * 1000,
                    "kind": "view",
                    "product_id": products[pid_idx].pid,
                }
            )
            tick += 1

        for _ in range(rng.randint(1, config.max_searches_per_session)):
            search_cat = rng.choice(session_cats) if session_cats else home
            target_idx = rng.choice(shop.by_category[search_cat])
            target = products[target_idx]
            query = _sample_query(target, all_tokens, config, rng)
            serp = _result_set(shop, query, target_idx, config, rng)
            clicked = [target.pid]
            if len(serp) > 1 and rng.random() < config.extra_click_rate:
                extra = rng.choice([i for i in serp if i != target_idx])
                clicked.append(products[extra].pid)
            events.append(
                {
                    "session_id": sid,
                    "timestamp": t0 + tick * 1000,
                    "kind": "search",
                    "query": query,
                    "result_set": [products[i].pid for i in serp],
                    "clicked": clicked,
                }
            )
            manifest.append({"query": query, "session_id": sid, "intended_path": list(target.path)})
            tick += 1

    log_file = out / "events.jsonl"
    with open(log_file, "w", encoding="utf-8") as fh:
        for row in events:
            fh.write(json.dumps(row) + "\n")
    manifest_file = out / "manifest.jsonl"
    with open(manifest_file, "w", encoding="utf-8") as fh:
        for row in manifest:
            fh.write(json.dumps(row) + "\n")
    return str(catalog_file), str(log_file), str(manifest_file)
