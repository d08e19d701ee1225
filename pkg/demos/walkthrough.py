"""
Issue, present, verify, revoke
==============================

One credential from issuance to revocation with the Groth16 backend, at
small vector sizes so it runs in a few seconds.
"""

import random

import irac
from irac import Compare, conj

rng = random.Random(2024)

# %%
# The setup holder fixes the vector sizes and keeps the trapdoor. Everyone
# else works from ``params.public()``, which is what ``to_bytes`` writes.
setup_params, universe = irac.setup(n_a=8, n_r=16, n_i=8, seed=b"walkthrough")
params = setup_params.public()
universe = irac.add_attributes(universe, ["age", "country", "member_since"])

# %%
# Three issuers with different schemas. Only their public bundles travel.
gov = irac.issuer_setup(params, universe, ["age", "country"], rng)
bank = irac.issuer_setup(params, universe, ["age"], rng)
club = irac.issuer_setup(params, universe, ["age", "member_since"], rng)
view = [gov.bundle(), bank.bundle(), club.bundle()]

cred = irac.issue_cred(params, gov, [34, 276], rng)
print("credential verifies:", irac.verify_cred(params, cred, gov.pk, gov.attrs))

# %%
# The verifier asks for an adult. Circuit keys depend only on the predicate
# shape, so the setup holder publishes them once and parties load them.
adult = conj(Compare(universe.index("age"), ">", 18))
irac.load_keys(params, adult, irac.publish_keys(setup_params, adult))

token = irac.present_cred(params, cred, adult, b"session-17", view, rng)
print("token bytes:", len(token.to_bytes()))
print("accepted:", irac.verify_presentation(params, token, adult, b"session-17", view))
print("replayed in another session:",
      irac.verify_presentation(params, token, adult, b"session-18", view))

# %%
# A constant change keeps the shape, so the same keys serve a stricter rule,
# which this credential fails.
senior = conj(Compare(universe.index("age"), ">=", 65))
try:
    irac.present_cred(params, cred, senior, b"session-19", view, rng)
except irac.protocol.PredicateUnsatisfied as e:
    print("senior check refused:", e)

# %%
# Revocation changes the issuer's list root, hence the issuer-set commitment
# the verifier recomputes. The old token stops verifying and no new one can
# be made.
gov = irac.revoke(params, gov, cred)
view = [gov.bundle(), bank.bundle(), club.bundle()]
print("after revocation:",
      irac.verify_presentation(params, token, adult, b"session-17", view))
try:
    irac.present_cred(params, cred, adult, b"session-20", view, rng)
except irac.Revoked:
    print("presentation refused: revoked")
