"""Security-game oracles, scripted adversaries, and the benchmark runner.

The adversaries are a falsification harness: each one tries a concrete
attack and must be rejected. They do not prove anything about adversaries
that are not scripted here.
"""

import json
import os
import platform
import random
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import credential as crd
from . import protocol as pr
from . import zk
from .encoding import encode
from .predicate import Compare, NotInSortedList, conj, pred_eval
from .r1cs import Builder
from .relation import (
    AttrOpening,
    RelationDescription,
    Statement,
    Witness,
    gap_witness,
    issuer_set_commitment,
    public_inputs,
    synthesize,
    witness_to_bytes,
)


class OracleError(IndexError):
    pass


@dataclass
class GameState:
    seed: int
    params: pr.SystemParams
    universe: pr.AttributeUniverse
    issuers: list = field(default_factory=list)
    creds: dict = field(default_factory=dict)
    q_issue: list = field(default_factory=list)
    q_present: list = field(default_factory=list)
    q_reveal: list = field(default_factory=list)
    q_revoke: list = field(default_factory=list)
    rng: random.Random = None

    def view(self, iset) -> list:
        return [self.issuers[i].bundle() for i in iset]


class Oracles:
    """``add``, ``issue``, ``revoke``, ``present`` and ``reveal`` over one game."""

    def __init__(self, state: GameState):
        self.state = state

    def _issuer(self, i):
        if not 0 <= i < len(self.state.issuers):
            raise OracleError(f"no issuer {i}")
        return self.state.issuers[i]

    def _cred(self, i, j):
        if (i, j) not in self.state.creds:
            raise OracleError(f"no credential ({i}, {j})")
        return self.state.creds[i, j]

    def add(self, names):
        self.state.universe = pr.add_attributes(self.state.universe, names)
        return self.state.universe

    def issue(self, i, j, values):
        s = self.state
        s.creds[i, j] = pr.issue_cred(s.params, self._issuer(i), values, s.rng)
        s.q_issue.append((i, j, tuple(values)))

    def revoke(self, i, j):
        s = self.state
        cred = self._cred(i, j)
        s.q_revoke.append(cred)
        s.issuers[i] = pr.revoke(s.params, self._issuer(i), cred)
        return s.issuers[i].bundle()

    def present(self, i, j, phi, ctx, iset):
        s = self.state
        iset = tuple(sorted(set(iset)))
        for p in iset:
            self._issuer(p)
        s.q_present.append((phi, bytes(ctx), iset, (i, j)))
        return pr.present_cred(s.params, self._cred(i, j), phi, ctx, s.view(iset), s.rng)

    def reveal(self, i, j):
        self.state.q_reveal.append((i, j))
        return self._cred(i, j)


def new_game(seed: int, sizes=(8, 8, 8), backend: str = zk.TRANSPARENT,
             n_issuers: int = 3, attrs=("age", "country", "score")) -> Oracles:
    params, universe = pr.setup(128, *sizes, backend=backend, seed=b"game")
    rng = random.Random(seed)
    state = GameState(seed, params, universe, rng=rng)
    o = Oracles(state)
    o.add(list(attrs))
    for k in range(n_issuers):
        # every issuer carries attribute 1 so a one-clause predicate covers all
        extra = rng.sample(range(2, len(attrs) + 1), rng.randint(0, len(attrs) - 1))
        state.issuers.append(pr.issuer_setup(params, state.universe, [1, *extra], rng))
    return o


def oracle_suite(seed: int, **kw) -> Oracles:
    return new_game(seed, **kw)


def forgery_wins(state: GameState, pt, phi, ctx, iset) -> dict:
    """Evaluate the unforgeability win condition under both readings of the
    ``Q_Present`` exclusion: by ``(phi, ctx, IS)`` alone, and additionally by
    the presenting credential."""
    iset = tuple(sorted(set(iset)))
    if not all(0 <= p < len(state.issuers) for p in iset):
        return {"triple": False, "triple_and_holder": False, "accepted": False}
    accepted = pr.verify_presentation(state.params, pt, phi, ctx, state.view(iset))
    revealed_ok = any(
        _satisfies(phi, state.creds[i, j]) and state.creds[i, j] not in state.q_revoke
        for i, j in state.q_reveal
    )
    logged = any(q[:3] == (phi, bytes(ctx), iset) for q in state.q_present)
    return {
        "accepted": accepted,
        "triple": accepted and not logged and not revealed_ok,
        # a replay under a logged triple still wins if no logged holder matches
        "triple_and_holder": accepted and not revealed_ok,
    }


def _satisfies(phi, cred) -> bool:
    try:
        return pred_eval(phi, dict(zip(cred.attrs, cred.values)))
    except KeyError:
        return False


# -- forging helpers -------------------------------------------------------------


def raw_witness(cred, phi, view, sizes, issuer_index=None, pk=None):
    """A witness laid out like an honest one but with no validity checks."""
    view = crd.canonical_view(view)
    entries = [(b.pk, crd.revocation_root(b.revoked, sizes.n_r)) for b in view]
    itree = crd.issuer_set_tree(entries, sizes.n_i)
    keys = [b.pk for b in view]
    i_i = issuer_index if issuer_index is not None else keys.index(cred.issuer)
    atree = crd.attribute_tree(cred.pairs(), sizes.n_a)
    pos = {idx: p for p, idx in enumerate(cred.attrs)}
    attrs = []
    for idx in sorted({c.idx for c in phi.clauses}):
        p = pos.get(idx, 0)
        v = cred.values[p] if idx in pos else 0
        attrs.append(AttrOpening(p, idx, v, atree.open(p)))
    rtree = crd.sorted_list_tree(view[i_i].revoked, sizes.n_r)
    h = crd.credential_hash(cred.c_a, cred.sig)
    try:
        gap = gap_witness(rtree, h)
    except crd.Revoked:
        gap = gap_witness(rtree, h + 1)
    list_gaps = []
    values = {a.idx: a.value for a in attrs}
    for c in phi.clauses:
        if isinstance(c, NotInSortedList):
            t = crd.sorted_list_tree(c.values, 1 << c.depth)
            try:
                list_gaps.append(gap_witness(t, values[c.idx]))
            except crd.Revoked:
                list_gaps.append(gap_witness(t, values[c.idx] + 1))
    w = Witness(cred.c_a, cred.sig, i_i, pk or cred.issuer, entries[i_i][1],
                itree.open(i_i), tuple(attrs), gap, tuple(list_gaps))
    return itree.root, w


def unchecked_proof(params, phi, stmt, w) -> bytes:
    """Run the backend prover without the relation pre-check.

    Uses published keys only: the shape must already have been keyed by an
    honest party, as the adversary never sees the trapdoor.
    """
    desc = RelationDescription.for_predicate(phi, params.sizes)
    pk, _ = zk.zk_keygen(params.zk.public(), desc)
    pub = public_inputs(stmt)
    head = bytes([zk.BACKEND_IDS[pk.backend]])
    if pk.backend == zk.TRANSPARENT:
        return head + encode((zk.binding_tag(pk.shape_id, pub), witness_to_bytes(w)))
    native_pk, circuit = pk.native
    _, z = synthesize(desc, pub, w)
    return head + zk.native().prove(native_pk, circuit, zk.field_bytes(z), os.urandom(32))


# -- suites ------------------------------------------------------------------------


ADVERSARIES = ("a_replay_fresh_ctx", "b_replay_after_revoke", "c_tamper_bytes",
               "d_rogue_issuer", "e_predicate_violation")


def unforgeability_suite(seed: int, backend: str = zk.TRANSPARENT, flips: int = 100,
                         sizes=(8, 8, 8)) -> dict:
    """Run every scripted adversary once; ``passed`` is True iff all fail."""
    o = new_game(seed, sizes, backend)
    s = o.state
    rng = random.Random(seed ^ 0x5EED)
    phi = conj(Compare(1, ">=", 18))
    iset = range(len(s.issuers))
    results = {}

    def attempt(name, pt, phi_, ctx, iset_):
        w = forgery_wins(s, pt, phi_, ctx, iset_)
        results.setdefault(name, {"trials": 0, "accepted": 0, "wins": 0})
        r = results[name]
        r["trials"] += 1
        r["accepted"] += w["accepted"]
        r["wins"] += w["triple"]
        r["wins_holder_reading"] = r.get("wins_holder_reading", 0) + w["triple_and_holder"]

    o.issue(0, 0, [30] + [rng.randrange(100) for _ in s.issuers[0].attrs[1:]])
    ctx = rng.randbytes(8)
    pt = o.present(0, 0, phi, ctx, iset)

    # (a) the logged token under a fresh context
    attempt("a_replay_fresh_ctx", pt, phi, ctx + b"\x01", iset)
    # logged only: a verbatim replay under the logged triple verifies (tokens
    # are bearer objects); it is a win only if the holder is part of the
    # exclusion, so it is reported but does not gate the suite
    replay = forgery_wins(s, pt, phi, ctx, iset)

    # (b) revoke the presented credential, then replay against the new view
    o.revoke(0, 0)
    attempt("b_replay_after_revoke", pt, phi, ctx, iset)

    # (c) byte flips on a fresh, valid token
    o.issue(1, 0, [40] + [rng.randrange(100) for _ in s.issuers[1].attrs[1:]])
    ctx2 = rng.randbytes(8)
    good = o.present(1, 0, phi, ctx2, iset)
    for _ in range(flips):
        raw = bytearray(good.proof)
        k = rng.randrange(len(raw))
        raw[k] ^= 1 << rng.randrange(8)
        attempt("c_tamper_bytes", pr.PresentationToken(good.shape_id, bytes(raw)), phi,
                ctx2, iset)

    # (d) a self-made issuer key outside the committed set
    rogue = pr.issuer_setup(s.params, s.universe, [1], rng)
    forged = pr.issue_cred(s.params, rogue, [50], rng)
    view = s.view(iset)
    c, w = raw_witness(forged, phi, view, s.params.sizes, issuer_index=0)
    ctx3 = rng.randbytes(8)
    proof = unchecked_proof(s.params, phi, Statement(phi, c, ctx3), w)
    attempt("d_rogue_issuer", pr.PresentationToken(pt.shape_id, proof), phi, ctx3, iset)

    # (e) a genuine credential whose values fail the predicate
    o.issue(2, 0, [10] + [rng.randrange(100) for _ in s.issuers[2].attrs[1:]])
    minor = o.reveal(2, 0)
    c, w = raw_witness(minor, phi, s.view(iset), s.params.sizes)
    ctx4 = rng.randbytes(8)
    proof = unchecked_proof(s.params, phi, Statement(phi, c, ctx4), w)
    attempt("e_predicate_violation", pr.PresentationToken(pt.shape_id, proof), phi, ctx4, iset)

    passed = all(r["accepted"] == 0 for r in results.values())
    return {"seed": seed, "backend": backend, "passed": passed, "adversaries": results,
            "same_triple_replay": replay}


def witness_encodings(cred) -> list:
    """Byte strings whose presence in a token would leak the witness."""
    out = [cred.issuer.to_bytes(), encode(cred.c_a)]
    for x in (cred.issuer.x, cred.issuer.y, cred.c_a, *cred.values):
        out.append(x.to_bytes(32, "little"))
        out.append(x.to_bytes(32, "big"))
    return out


def unlinkability_suite(seed: int, backend: str = zk.GROTH16, pairs: int = 1,
                        sizes=(8, 8, 8)) -> dict:
    o = new_game(seed, sizes, backend)
    s = o.state
    rng = random.Random(seed ^ 0x11AC)
    phi = conj(Compare(1, ">", 18))
    iset = tuple(range(len(s.issuers)))
    checks = []
    for k in range(pairs):
        i0, i1 = rng.sample(iset, 2)
        for i in (i0, i1):
            o.issue(i, k, [rng.randint(19, 120)] + [rng.randrange(1 << 32)
                                                    for _ in s.issuers[i].attrs[1:]])
        ctx = rng.randbytes(16)
        tokens = [o.present(i, k, phi, ctx, iset) for i in (i0, i1)]
        view = s.view(iset)
        leaks = [
            enc for i, t in zip((i0, i1), tokens)
            for enc in witness_encodings(s.creds[i, k]) if enc in t.to_bytes()
        ]
        checks.append({
            "equal_length": len(tokens[0].to_bytes()) == len(tokens[1].to_bytes()),
            "leaks": len(leaks),
            "both_verify": all(pr.verify_presentation(s.params, t, phi, ctx, view)
                               for t in tokens),
        })
    passed = all(c["equal_length"] and not c["leaks"] and c["both_verify"] for c in checks)
    return {"seed": seed, "backend": backend, "passed": passed, "pairs": checks}


# -- benchmarks ----------------------------------------------------------------------


@dataclass
class BenchConfig:
    n_a: int = 1 << 7
    n_r: int = 1 << 15
    n_i: int = 1 << 7
    repeats: int = 5
    circuit_logs: tuple = (12, 13, 14, 15, 16)
    banlist: int = 1 << 15
    revoke_fill: int = 1 << 15
    out_dir: str = "bench"


def _time(fn, repeats):
    samples = []
    out = None
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        samples.append(time.perf_counter() - t)
    return samples, out


def synthetic_circuit(log_n: int):
    """A squaring chain of exactly ``2**log_n`` constraints, the first of
    which binds the single public input."""
    cs = Builder()
    x0 = cs.public(3)
    x = cs.private(3)
    cs.assert_equal(x, x0)
    for _ in range((1 << log_n) - 1):
        x = cs.mul(x, x)
    return cs.finish()


def hardware() -> dict:
    return {
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "cpus": os.cpu_count(),
        "python": platform.python_version(),
        "system": platform.platform(),
    }


def _stats(samples):
    return {"median_s": statistics.median(samples), "min_s": min(samples),
            "samples_s": samples}


def bench_circuits(logs, repeats: int = 5) -> dict:
    g = zk.native()
    out = {}
    for k in logs:
        cs, z = synthetic_circuit(k)
        circuit = g.Circuit(cs.num_public, cs.num_vars, zk.constraint_bytes(cs))
        setup, (pkey, vkey) = _time(lambda: g.setup(circuit, b"bench"), 1)
        wb = zk.field_bytes(z)
        prove, proof = _time(lambda: g.prove(pkey, circuit, wb, os.urandom(32)), repeats)
        pub = zk.field_bytes(z[1 : 1 + cs.num_public])
        verify, ok = _time(lambda: g.verify(vkey, pub, proof), repeats * 10)
        if not ok:
            raise RuntimeError(f"synthetic circuit 2^{k} failed to verify")
        out[k] = {"constraints": len(cs), "setup": _stats(setup), "prove": _stats(prove),
                  "verify": _stats(verify), "proof_bytes": len(proof)}
    return out


def bench_protocol(cfg: BenchConfig) -> dict:
    rng = random.Random(1)
    params, u = pr.setup(128, cfg.n_a, cfg.n_r, cfg.n_i, backend=zk.GROTH16, seed=b"bench")
    u = pr.add_attributes(u, ["age", "id"])
    res = {}
    t, issuer = _time(lambda: pr.issuer_setup(params, u, ["age", "id"], rng), cfg.repeats)
    res["issuer_setup"] = _stats(t)
    t, cred = _time(lambda: pr.issue_cred(params, issuer, [30, 7], rng), cfg.repeats)
    res["issue_cred"] = _stats(t)
    t, _ = _time(lambda: pr.verify_cred(params, cred, issuer.pk, issuer.attrs), cfg.repeats)
    res["verify_cred"] = _stats(t)

    # revocation at a near-full list: rebuild the whole layout once
    filler = set()
    while len(filler) < min(cfg.revoke_fill, cfg.n_r - 3):
        filler.add(rng.getrandbits(200) | 1)
    filler = sorted(filler)
    full = pr.IssuerState(issuer.sk, issuer.pk, issuer.attrs, tuple(filler), 0)
    crd._sorted_list_tree.cache_clear()
    t, _ = _time(lambda: pr.revoke(params, full, (1 << 201) + rng.randrange(1 << 64)), 1)
    res["revoke"] = _stats(t)
    res["revoke"]["list_size"] = len(filler) + 1

    others = [pr.issuer_setup(params, u, ["age", "id"], rng).bundle() for _ in range(cfg.n_i - 1)]
    view = [issuer.bundle(), *others]
    banlist = tuple(sorted(rng.sample(range(1 << 40, 1 << 41), cfg.banlist)))
    preds = {
        "age_over_18": conj(Compare(1, ">", 18)),
        "not_in_banlist": conj(NotInSortedList(2, banlist)),
    }
    for name, phi in preds.items():
        desc = RelationDescription.for_predicate(phi, params.sizes)
        keygen, _ = _time(lambda: zk.zk_keygen(params.zk, desc), 1)
        present, tok = _time(lambda: pr.present_cred(params, cred, phi, b"bench", view),
                             cfg.repeats)
        verify, ok = _time(lambda: pr.verify_presentation(params, tok, phi, b"bench", view),
                           cfg.repeats)
        if not ok:
            raise RuntimeError(f"{name}: honest presentation rejected")
        c = issuer_set_commitment(view, params.sizes)
        _, vk = zk.zk_keygen(params.zk, desc)
        stmt = Statement(phi, c, b"bench")
        proof_check, _ = _time(lambda: zk.zk_verify(vk, stmt, tok.proof), cfg.repeats * 10)
        res[f"zk_verify[{name}]"] = _stats(proof_check)
        desc_cs = zk.relation_build(desc)
        res[f"present[{name}]"] = _stats(present)
        res[f"verify_presentation[{name}]"] = _stats(verify)
        res[f"present[{name}]"].update(constraints=len(desc_cs), keygen_s=keygen[0],
                                       token_bytes=len(tok.to_bytes()))
    return res


def bench_run(cfg: BenchConfig | None = None) -> dict:
    cfg = cfg or BenchConfig()
    report = {
        "config": {k: v for k, v in cfg.__dict__.items() if k != "out_dir"},
        "hardware": hardware(),
        "backend": "groth16/bn254 (arkworks)",
        "circuits": bench_circuits(cfg.circuit_logs, cfg.repeats),
        "operations": bench_protocol(cfg),
    }
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, default=str))
    (out / "report.txt").write_text(summary_table(report))
    return report


def summary_table(report: dict) -> str:
    lines = ["operation                               median", "-" * 50]
    for name, r in report["operations"].items():
        lines.append(f"{name:<38}{_fmt(r['median_s']):>12}")
    lines += ["", "constraints   setup      prove      verify", "-" * 50]
    for k, r in report["circuits"].items():
        lines.append(f"2^{k:<11}{_fmt(r['setup']['median_s']):>9}"
                     f"{_fmt(r['prove']['median_s']):>11}{_fmt(r['verify']['median_s']):>11}")
    return "\n".join(lines) + "\n"


def _fmt(seconds: float) -> str:
    return f"{seconds * 1e3:.1f} ms" if seconds < 1 else f"{seconds:.2f} s"


def verify_flatness(circuits: dict, lo: int = 12, hi: int = 16) -> float:
    return circuits[hi]["verify"]["median_s"] / circuits[lo]["verify"]["median_s"]


def main(argv=None):
    import argparse

    p = argparse.ArgumentParser(prog="python -m irac.harness")
    p.add_argument("--out", default="bench")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--small", action="store_true", help="toy sizes for a quick run")
    args = p.parse_args(argv)
    cfg = BenchConfig(repeats=args.repeats, out_dir=args.out)
    if args.small:
        cfg = BenchConfig(n_a=8, n_r=64, n_i=8, repeats=args.repeats, circuit_logs=(10, 12),
                          banlist=32, revoke_fill=32, out_dir=args.out)
    report = bench_run(cfg)
    print(summary_table(report), end="")


if __name__ == "__main__":
    main()
