"""Issuer-hiding anonymous credentials with revocation.

The protocol layer lives in :mod:`irac.protocol`; the most used names are
re-exported here::

    >>> import irac
    >>> params, universe = irac.setup(n_a=8, n_r=8, n_i=8, backend="transparent")
"""

from .predicate import Compare, MemberOf, NotInSortedList, conj, parse_predicate
from .protocol import (
    AttributeUniverse,
    Credential,
    IssuerState,
    PresentationToken,
    Revoked,
    SystemParams,
    add_attributes,
    credential_hash,
    issue_cred,
    issuer_setup,
    load_keys,
    present_cred,
    publish_keys,
    revoke,
    setup,
    verify_cred,
    verify_presentation,
)

__version__ = "0.1.0"
