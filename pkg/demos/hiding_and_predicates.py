"""
What the verifier learns
========================

Two holders with credentials from different issuers answer the same
request. The tokens are the same size and verify against the same
statement, so the verifier cannot tell the issuers apart. The request
mixes all three clause kinds.
"""

import random

import irac
from irac import Compare, MemberOf, NotInSortedList, conj, parse_predicate

rng = random.Random(7)

setup_params, universe = irac.setup(n_a=8, n_r=16, n_i=8, seed=b"hiding")
params = setup_params.public()
universe = irac.add_attributes(universe, ["age", "country", "id"])
age, country, ident = (universe.index(n) for n in ("age", "country", "id"))

issuers = [irac.issuer_setup(params, universe, ["age", "country", "id"], rng) for _ in range(3)]
view = [i.bundle() for i in issuers]

# %%
# Adults from a listed country whose id is not on a banlist. The banlist is
# committed as a sorted Merkle list and proved absent with a gap, exactly
# like revocation.
banned = tuple(rng.sample(range(10_000, 20_000), 40))
request = conj(
    Compare(age, ">=", 18),
    MemberOf(country, (250, 276, 380)),
    NotInSortedList(ident, banned, depth=6),
)
irac.load_keys(params, request, irac.publish_keys(setup_params, request))

alice = irac.issue_cred(params, issuers[0], [29, 276, 424_242], rng)
bob = irac.issue_cred(params, issuers[2], [61, 380, 515_151], rng)

ctx = rng.randbytes(16)
tokens = [irac.present_cred(params, c, request, ctx, view, rng) for c in (alice, bob)]
for name, t in zip(("alice", "bob"), tokens):
    ok = irac.verify_presentation(params, t, request, ctx, view)
    print(f"{name}: {len(t.to_bytes())} bytes, accepted={ok}")

# %%
# A banned id cannot produce a token at all: the holder finds no gap.
carol = irac.issue_cred(params, issuers[1], [40, 250, banned[0]], rng)
try:
    irac.present_cred(params, carol, request, ctx, view, rng)
except irac.protocol.PredicateUnsatisfied:
    print("carol: banned id, no token")

# %%
# The same request in the text grammar used by the command line.
text = "age >= 18 and country in {250, 276, 380}"
print(parse_predicate(text, {"age": age, "country": country, "id": ident}))
