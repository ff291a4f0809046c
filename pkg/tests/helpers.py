"""Shared test machinery: random instances, differentials, proof mutation."""

from __future__ import annotations

import itertools

from kequiv import CongruenceState, Session, check, closure_sets, covered
from kequiv.proofs import Assume, Project, SubRefl, Subst, Trans


def identity_partition(n_terms):
    return {i: i for i in range(n_terms)}


def random_partition(rng, n_terms):
    """Class map with a few merged groups (possibly-equal terms)."""
    class_of = identity_partition(n_terms)
    for _ in range(rng.randint(1, max(1, n_terms // 2))):
        if n_terms < 2:
            break
        a, b = rng.sample(range(n_terms), 2)
        ca, cb = class_of[a], class_of[b]
        if ca != cb:
            for t, c in class_of.items():
                if c == cb:
                    class_of[t] = ca
    return class_of


def random_instance(rng, k, max_terms=8, max_hyps=6, partitioned=False):
    """(n_terms, hypotheses, class_of) biased toward overlapping facts."""
    n_terms = rng.randint(k + 1, max_terms)
    pool = rng.sample(range(n_terms), min(n_terms, k + 1 + rng.randint(1, 2)))
    hyps = []
    for _ in range(rng.randint(0, max_hyps)):
        src = pool if rng.random() < 0.7 else list(range(n_terms))
        if rng.random() < 0.15 or len(src) < k + 1:
            xs = tuple(rng.choice(src) for _ in range(k + 1))
        else:
            xs = tuple(rng.sample(src, k + 1))
        hyps.append(xs)
    if partitioned:
        class_of = random_partition(rng, n_terms)
    else:
        class_of = identity_partition(n_terms)
    return n_terms, hyps, class_of


def build_session(k, n_terms, hyps, class_of=None):
    s = Session(k, partition=class_of)
    for i in range(n_terms):
        s.intern_term(f"t{i}")
    for h in hyps:
        s.assert_hypothesis(h)
    return s


def run_differential(k, n_terms, hyps, class_of, proof_sink=None):
    """Compare the engine against the saturation oracle on all atom queries.

    Returns the list of mismatching queries (empty means agreement).  Every
    proof the engine emits is checked; `proof_sink` collects
    (proof, conclusion, session) triples for further abuse.
    """
    s = build_session(k, n_terms, hyps, class_of)
    family = closure_sets(k, hyps, class_of)
    mismatches = []
    for combo in itertools.combinations(range(n_terms), k + 1):
        proof = s.resolve_query(combo)
        expected = covered(k, combo, family)
        if (proof is not None) != expected:
            mismatches.append(combo)
        if proof is not None:
            conclusion = check(proof, k, s.hypotheses, s.class_of)
            assert conclusion == frozenset(combo)
            if proof_sink is not None:
                proof_sink.append((proof, conclusion, s))
    s.validate()
    return mismatches


def class_groups(class_of):
    by_class = {}
    for t, c in class_of.items():
        by_class.setdefault(c, []).append(t)
    return [sorted(g) for g in by_class.values() if len(g) >= 2]


def random_congruence_instance(rng, k, max_terms=8, max_statements=7):
    """(n_terms, class_of, statements) mixing atoms and legal equalities."""
    n_terms = rng.randint(k + 1, max_terms)
    class_of = random_partition(rng, n_terms)
    groups = class_groups(class_of)
    pool = rng.sample(range(n_terms), min(n_terms, k + 1 + rng.randint(1, 2)))
    statements = []
    for _ in range(rng.randint(1, max_statements)):
        if groups and rng.random() < 0.35:
            a, b = rng.sample(rng.choice(groups), 2)
            statements.append(("eq", (a, b)))
            continue
        src = pool if rng.random() < 0.7 else list(range(n_terms))
        if rng.random() < 0.15 or len(src) < k + 1:
            xs = tuple(rng.choice(src) for _ in range(k + 1))
        else:
            xs = tuple(rng.sample(src, k + 1))
        statements.append(("atom", xs))
    return n_terms, class_of, statements


def build_congruence(k, n_terms, class_of, statements, relation="r"):
    state = CongruenceState({relation: k})
    for i in range(n_terms):
        state.intern_term(f"t{i}")
    for group in class_groups(class_of):
        state.mark_possibly_equal(group)
    for kind, payload in statements:
        if kind == "eq":
            state.assert_eq(*payload)
        else:
            state.assert_atom(relation, payload)
    return state


def run_congruence_differential(k, n_terms, class_of, statements, proof_sink=None):
    """Compare congruence-layer verdicts with the substitution oracle.

    The oracle sees the atoms and the query with every term rewritten to
    its final representative.  Returns mismatching queries.
    """
    state = build_congruence(k, n_terms, class_of, statements)
    session = state.sessions["r"]
    find = state.uf.find
    rewritten_hyps = [
        tuple(find(t) for t in payload)
        for kind, payload in statements
        if kind == "atom"
    ]
    family = closure_sets(k, rewritten_hyps, class_of)
    mismatches = []
    for combo in itertools.combinations(range(n_terms), k + 1):
        proof = state.query_atom("r", combo)
        canon = {find(t) for t in combo}
        expected = covered(k, canon, family)
        if (proof is not None) != expected:
            mismatches.append(combo)
        if proof is not None:
            conclusion = check(
                proof, k, session.hypotheses, session.class_of, state.equalities
            )
            assert conclusion == frozenset(canon)
            if proof_sink is not None:
                proof_sink.append((proof, conclusion, session))
    session.validate()
    return mismatches


class DisjointSet:
    """Minimal union-find, independent of the library (k=1 reference)."""

    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _paths(proof):
    out = [((), proof)]
    stack = [((), proof)]
    while stack:
        path, node = stack.pop()
        children = ()
        if isinstance(node, Trans):
            children = (node.left, node.right)
        elif isinstance(node, (Project, Subst)):
            children = (node.inner,)
        for i, child in enumerate(children):
            out.append((path + (i,), child))
            stack.append((path + (i,), child))
    return out


def _rebuild(proof, path, replacement):
    if not path:
        return replacement
    i, rest = path[0], path[1:]
    if isinstance(proof, Trans):
        if i == 0:
            return Trans(_rebuild(proof.left, rest, replacement), proof.right)
        return Trans(proof.left, _rebuild(proof.right, rest, replacement))
    if isinstance(proof, Project):
        return Project(_rebuild(proof.inner, rest, replacement), proof.terms)
    if isinstance(proof, Subst):
        return Subst(
            _rebuild(proof.inner, rest, replacement),
            proof.frm,
            proof.to,
            proof.eq_index,
        )
    raise AssertionError("path into a leaf")


def mutate_proof(rng, proof, conclusion, session):
    """One random single-node mutation that must be rejected or change the
    root conclusion.  Returns the mutated proof or None when the chosen
    node offers no determinate mutation."""
    fresh = len(session.term_names) + 1000 + rng.randrange(1000)
    path, node = rng.choice(_paths(proof))
    if isinstance(node, Assume):
        if not path:
            # in-range retarget only when the conclusion visibly changes
            others = [
                j
                for j, h in enumerate(session.hypotheses)
                if frozenset(h) != conclusion
            ]
            if others and rng.random() < 0.5:
                return _rebuild(proof, path, Assume(rng.choice(others)))
        return _rebuild(proof, path, Assume(len(session.hypotheses) + 7))
    if isinstance(node, SubRefl):
        grown = set(node.terms)
        while len(grown) <= session.k:
            grown.add(fresh)
            fresh += 1
        return _rebuild(proof, path, SubRefl(frozenset(grown)))
    if isinstance(node, Trans):
        # a foreign singleton shares nothing with the sibling conclusion
        side = rng.randrange(2)
        stub = SubRefl(frozenset({fresh}))
        repl = Trans(stub, node.right) if side == 0 else Trans(node.left, stub)
        return _rebuild(proof, path, repl)
    if isinstance(node, Project):
        if not path and len(node.terms) > 1 and rng.random() < 0.5:
            shrunk = set(node.terms)
            shrunk.remove(rng.choice(sorted(shrunk)))
            return _rebuild(proof, path, Project(node.inner, frozenset(shrunk)))
        widened = node.terms | {fresh}
        return _rebuild(proof, path, Project(node.inner, widened))
    if isinstance(node, Subst):
        bad = [
            e
            for e, pair in enumerate(session.equalities)
            if set(pair) != {node.frm, node.to}
        ]
        if bad:
            return _rebuild(
                proof, path, Subst(node.inner, node.frm, node.to, rng.choice(bad))
            )
        return _rebuild(
            proof,
            path,
            Subst(node.inner, node.frm, node.to, len(session.equalities) + 3),
        )
    return None
