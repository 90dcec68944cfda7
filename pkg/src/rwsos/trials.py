"""Random congruence campaigns for Imp² and for stateful SOS specs.

Component pairs for Imp² come from rewrites that preserve the chosen
semantics on every store (sampling stores would not do: a context runs its
components on stores outside any sample). For a spec with finitely many
states, running a pair on every state certifies it outright.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from . import imp as I
from . import imp2 as I2
from .equivalence import (Imp2Language, Pass, Skipped, SpecLanguage, Violation, certified_equal,
                          congruence_trial)
from .syntax import BinOp, Num, Var, VarStore, expr_vars
from .transitions import Cut, Flavor

VARS = ("x", "y")


def _rand_expr(rng, depth=1):
    if depth <= 1 or rng.random() < 0.5:
        return Num(rng.randint(0, 2)) if rng.random() < 0.5 else Var(rng.choice(VARS))
    return BinOp(rng.choice("+-"), _rand_expr(rng, depth - 1), _rand_expr(rng, depth - 1))


def random_imp(rng: random.Random, depth=3):
    """A small Imp program; loops count down so most runs terminate."""
    k = rng.random()
    if depth <= 1 or k < 0.3:
        return I.assign(rng.choice(VARS), _rand_expr(rng, 2)) if rng.random() < 0.8 else I.SKIP
    if k < 0.8:
        return I.seq(random_imp(rng, depth - 1), random_imp(rng, depth - 1))
    x = rng.choice(VARS)
    body = I.seq(random_imp(rng, depth - 2), I.assign(x, BinOp("-", Var(x), Num(1))))
    return I.while_(Var(x), body)


def _no(x, e):
    return x not in expr_vars(e)


def rewrite(rng: random.Random, p, flavor: Flavor):
    """A program equivalent to p under ``flavor`` on every store."""
    x = rng.choice(VARS)
    e1, e2 = _rand_expr(rng, 2), _rand_expr(rng, 2)
    while not _no(x, e2):
        e2 = _rand_expr(rng, 2)
    n, m = rng.randint(0, 2), rng.randint(0, 2)
    # each option: (left, right) sound for this flavour and all stronger ones
    opts = [
        (I.seq(I.assign(x, Num(n)), I.seq(I.assign(x, Num(m)), p)),
         I.seq(I.assign(x, Num(n)), I.seq(I.assign(x, BinOp("+", Var(x), Num(m - n))), p))),
        (I.seq(I.seq(p, I.SKIP), p), I.seq(p, I.seq(I.SKIP, p))),
        (I.seq(I.assign(x, e1), p), I.seq(I.assign(x, BinOp("+", e1, Num(0))), p)),
        (I.while_(Num(0), p), I.while_(BinOp("*", Num(0), Var(x)), p)),
        (I.seq(I.SKIP, p), I.seq(I.assign(x, Var(x)), p)),
    ]
    if flavor is not Flavor.TRACE:
        opts += [
            (I.seq(I.assign(x, e1), I.seq(I.assign(x, e2), p)),
             I.seq(I.assign(x, _rand_expr(rng, 2)), I.seq(I.assign(x, e2), p))),
        ]
    if flavor is Flavor.TERMINATION:
        opts += [
            (I.seq(I.SKIP, p), p),
            (I.seq(I.assign(x, e1), I.seq(I.assign(x, e2), p)), I.seq(I.assign(x, e2), p)),
            (I.seq(I.while_(Num(0), p), p), p),
        ]
    a, b = rng.choice(opts)
    return (a, b) if rng.random() < 0.5 else (b, a)


def random_stores(rng: random.Random, n=10):
    return [VarStore({v: rng.randint(-2, 3) for v in VARS}) for _ in range(n)]


def imp2_constructors(rng: random.Random):
    """(name, arity, builder) with random fixed parts."""
    r = random_imp(rng, 2)
    e = Var(rng.choice(VARS))
    s = VarStore({v: rng.randint(0, 2) for v in VARS})
    return rng.choice([
        ("seq-left", 1, lambda cs: I.seq(cs[0], r)),
        ("seq-right", 1, lambda cs: I.seq(r, cs[0])),
        ("seq", 2, lambda cs: I.seq(cs[0], cs[1])),
        ("while", 1, lambda cs: I.while_(e, I.seq(cs[0], I.assign(e.name, Num(0))))),
        ("wseq", 1, lambda cs: I2.wseq(I2.run(cs[0], s), r)),
        ("out", 1, lambda cs: I2.out(s, I2.run(cs[0], s))),
        ("wseq-right", 1, lambda cs: I2.wseq(I2.run(r, s), cs[0])),
    ])


@dataclass
class Campaign:
    flavor: Flavor
    passed: int = 0
    skipped: int = 0
    violations: list = field(default_factory=list)
    by_constructor: Counter = field(default_factory=Counter)

    @property
    def counted(self):
        return self.passed + len(self.violations)


def imp2_campaign(seed: int, flavor, trials: int, fuel=200, n_stores=10) -> Campaign:
    """Run trials until ``trials`` of them are counted (not skipped)."""
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    rng = random.Random(seed)
    lang = Imp2Language()
    camp = Campaign(flavor)
    attempts = 0
    while camp.counted < trials and attempts < 20 * trials:
        attempts += 1
        name, arity, build = imp2_constructors(rng)
        pairs = [rewrite(rng, random_imp(rng, 2), flavor) for _ in range(arity)]
        r = congruence_trial(lang, build, pairs, random_stores(rng, n_stores), fuel, flavor)
        if isinstance(r, Skipped):
            camp.skipped += 1
        elif isinstance(r, Violation):
            camp.violations.append((name, pairs, r))
        else:
            camp.passed += 1
            camp.by_constructor[name] += 1
    return camp


def spec_campaign(spec, seed: int, flavor, trials: int, fuel=60, via_rw=False, depth=3,
                  pool_size=300) -> Campaign:
    """Congruence trials for a stateful SOS spec (or its derived L²).

    Component pairs are random terms that agree on every state; the
    constructor is a random operator of the spec.
    """
    from .sos import random_term
    from .syntax import Term
    flavor = Flavor.parse(flavor) if isinstance(flavor, str) else flavor
    rng = random.Random(seed)
    lang = SpecLanguage(spec, via_rw=via_rw)
    states = list(spec.states)
    ops = [f for f, n in spec.arities.items() if n > 0]
    camp = Campaign(flavor)
    pool = {random_term(spec, rng, rng.randint(1, depth)) for _ in range(pool_size)}
    # bucket the terms that finish everywhere by their observations
    buckets: dict = {}
    for t in sorted(pool, key=repr):
        key = tuple(flavor.observe(lang.trace(t, s, fuel)) for s in states)
        if not any(isinstance(k, Cut) for k in key):
            buckets.setdefault(key, []).append(t)
    classes = [b for b in buckets.values() if len(b) > 1] or list(buckets.values())
    if not classes or not ops:
        return camp
    attempts = 0
    while camp.counted < trials and attempts < 20 * trials:
        attempts += 1
        f = rng.choice(ops)
        n = spec.arities[f]
        pairs = []
        for _ in range(n):
            cls = rng.choice(classes)
            pairs.append(tuple(rng.sample(cls, 2)) if len(cls) > 1 else (cls[0], cls[0]))
        if not all(certified_equal(lang, p, q, states, fuel, flavor) for p, q in pairs):
            camp.skipped += 1
            continue
        r = congruence_trial(lang, lambda cs, f=f: Term(f, cs), pairs, states, fuel, flavor)
        if isinstance(r, Skipped):
            camp.skipped += 1
        elif isinstance(r, Violation):
            camp.violations.append((f, pairs, r))
        else:
            camp.passed += 1
            camp.by_constructor[f] += 1
    return camp
