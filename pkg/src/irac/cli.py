"""Command-line front end for issuers, holders and verifiers.

All state lives in files under ``--state-dir``. Each file is a small text
envelope::

    IRAC-<KIND> v1
    sizes: <n_a> <n_r> <n_I>
    <hex payload, 64 characters per line>

The hex payload is the canonical binary encoding and is authoritative.
Exit codes are listed in ``EXIT_CODES``.

With the production backend, ``setup`` also writes ``setup.key``. It holds
the trapdoor that circuit keys are derived from and must not be shared:
its holder runs ``keys publish`` once per predicate shape and hands out
the resulting key files, which holders and verifiers read from ``--keys``.
"""

import argparse
import contextlib
import fcntl
import os
import random
import sys
from pathlib import Path

from . import protocol as pr
from . import zk
from .credential import Credential, IssuerBundle
from .encoding import BYTES, EncodingError, decode, encode
from .predicate import PredicateError, parse_predicate, parse_value
from .relation import (
    AttributeNotCovered,
    IssuerNotInSet,
    PredicateUnsatisfied,
    RelationDescription,
)

VERSION = 1
TEST_MODE_ENV = "IRAC_TEST_MODE"

EXIT_CODES = {
    "ok": 0,
    "reject": 1,
    "usage": 2,
    "bad-file": 3,
    "duplicate-attribute": 4,
    "unknown-attribute": 5,
    "too-many-attributes": 6,
    "value-out-of-range": 7,
    "length-mismatch": 8,
    "revoked": 9,
    "issuer-not-in-set": 10,
    "attribute-not-covered": 11,
    "predicate-unsatisfied": 12,
    "revocation-capacity": 13,
    "hiding-set-too-large": 14,
    "bad-predicate": 15,
    "test-backend-refused": 16,
    "backend-unavailable": 17,
    "circuit-too-large": 18,
    "invalid-credential": 19,
    "bad-input": 20,
    "keys-unavailable": 21,
}

# most specific first
_ERRORS = [
    (pr.DuplicateAttributeName, "duplicate-attribute"),
    (pr.UnknownAttribute, "unknown-attribute"),
    (pr.TooManyAttributes, "too-many-attributes"),
    (pr.ValueOutOfRange, "value-out-of-range"),
    (pr.LengthMismatch, "length-mismatch"),
    (pr.Revoked, "revoked"),
    (IssuerNotInSet, "issuer-not-in-set"),
    (AttributeNotCovered, "attribute-not-covered"),
    (PredicateUnsatisfied, "predicate-unsatisfied"),
    (pr.RevocationCapacityExceeded, "revocation-capacity"),
    (pr.HidingSetTooLarge, "hiding-set-too-large"),
    (PredicateError, "bad-predicate"),
    (zk.BackendUnavailable, "backend-unavailable"),
    (zk.CircuitTooLarge, "circuit-too-large"),
    (zk.KeysUnavailable, "keys-unavailable"),
    (EncodingError, "bad-file"),
    (OSError, "bad-file"),
    (ValueError, "bad-input"),
]


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# -- envelopes ---------------------------------------------------------------


def write_envelope(path: Path, kind: str, sizes, payload: bytes, note: str = "") -> None:
    h = payload.hex()
    lines = [f"IRAC-{kind} v{VERSION}", "sizes: " + " ".join(map(str, sizes))]
    if note:
        lines.append(f"# {note}")
    lines += [h[i : i + 64] for i in range(0, len(h), 64)]
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_envelope(path: Path, kind: str, sizes=None) -> bytes:
    try:
        lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    except OSError as e:
        raise CliError("bad-file", f"{path}: {e.strerror}") from None
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 2 or lines[0] != f"IRAC-{kind} v{VERSION}":
        raise CliError("bad-file", f"{path}: not an IRAC-{kind} v{VERSION} file")
    found = lines[1].removeprefix("sizes:").split()
    if sizes is not None and found != [str(n) for n in sizes]:
        raise CliError("bad-file", f"{path}: made for sizes {' '.join(found)}")
    try:
        return bytes.fromhex("".join(lines[2:]))
    except ValueError:
        raise CliError("bad-file", f"{path}: payload is not hex") from None


# -- state ---------------------------------------------------------------------


class State:
    def __init__(self, args):
        self.dir = Path(args.state_dir)
        self.params_path = Path(args.params) if args.params else self.dir / "params.irac"
        self._params = None

    @property
    def params(self) -> pr.SystemParams:
        if self._params is None:
            data = read_envelope(self.params_path, "PARAMS")
            self._params = pr.SystemParams.from_bytes(data)
        return self._params

    @property
    def sizes(self):
        s = self.params.sizes
        return (s.n_a, s.n_r, s.n_i)

    @property
    def setup_key_path(self):
        return self.dir / "setup.key"

    def keys_dir(self, args):
        return Path(args.keys) if getattr(args, "keys", None) else self.dir / "keys"

    def read(self, path, kind) -> bytes:
        return read_envelope(path, kind, self.sizes)

    def write(self, path, kind, payload, note=""):
        write_envelope(Path(path), kind, self.sizes, payload, note)

    @property
    def universe_path(self):
        return self.dir / "universe.irac"

    def universe(self) -> pr.AttributeUniverse:
        return pr.AttributeUniverse.from_bytes(self.read(self.universe_path, "UNIVERSE"))

    def issuer_path(self, name):
        return self.dir / "issuers" / f"{name}.key"

    def issuer(self, name) -> pr.IssuerState:
        return pr.IssuerState.from_bytes(self.read(self.issuer_path(name), "ISSUER-KEY"))

    @property
    def wallet_path(self):
        return self.dir / "wallet.irac"

    def wallet(self) -> dict:
        if not self.wallet_path.exists():
            return {}
        entries = decode(self.read(self.wallet_path, "WALLET"), [(BYTES, BYTES)])
        return {k.decode(): Credential.from_bytes(v) for k, v in entries}

    @contextlib.contextmanager
    def locked(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        with open(self.dir / ".lock", "w") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)


def _rng(args, *salt):
    if args.seed is None:
        return None
    return random.Random("/".join((args.seed, args.command, *salt)))


def _test_mode() -> bool:
    return os.environ.get(TEST_MODE_ENV) == "1"


def _guard_backend(args, params: pr.SystemParams) -> None:
    wanted = {"prod": zk.GROTH16, "test": zk.TRANSPARENT}.get(args.backend)
    if wanted is not None and wanted != params.zk.backend:
        raise CliError("usage", f"parameters were created for the {params.zk.backend} backend")
    if params.zk.backend == zk.TRANSPARENT and not _test_mode():
        raise CliError(
            "test-backend-refused",
            f"the test backend is not zero-knowledge; set {TEST_MODE_ENV}=1 to use it",
        )


def _shape_file(st: State, args, phi) -> tuple:
    desc = RelationDescription.for_predicate(phi, st.params.sizes)
    return desc, st.keys_dir(args) / f"{desc.shape_id.hex()[:32]}.keys"


def _load_keys(st: State, args, phi) -> None:
    if st.params.zk.backend != zk.GROTH16:
        return
    desc, path = _shape_file(st, args, phi)
    if not path.exists():
        raise CliError("keys-unavailable",
                       f"no keys for this predicate shape in {path.parent}; "
                       "the setup holder makes them with `irac keys publish`")
    zk.import_keys(st.params.zk, desc, st.read(path, "CIRCUIT-KEYS"))


def _names(universe):
    return {n: i + 1 for i, n in enumerate(universe.names)}


def _predicate(st: State, path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise CliError("bad-file", f"{path}: {e.strerror}") from None
    return parse_predicate(text, _names(st.universe()), base_dir=path.parent)


def _ctx(hexstr) -> bytes:
    try:
        return bytes.fromhex(hexstr)
    except ValueError:
        raise CliError("usage", "--ctx must be hex") from None


def _bundles(st: State, paths) -> list:
    if not paths:
        raise CliError("usage", "--issuer-set needs at least one bundle file")
    return [IssuerBundle.from_bytes(st.read(p, "ISSUER-BUNDLE")) for p in paths]


# -- commands --------------------------------------------------------------------


def cmd_setup(args, st: State):
    backend = zk.TRANSPARENT if args.backend == "test" else zk.GROTH16
    if backend == zk.TRANSPARENT and not _test_mode():
        raise CliError("test-backend-refused",
                       f"the test backend is not zero-knowledge; set {TEST_MODE_ENV}=1")
    seed = (args.seed or "").encode()
    params, universe = pr.setup(args.security, args.n_a, args.n_r, args.n_i, backend, seed,
                                args.max_constraints)
    with st.locked():
        write_envelope(st.params_path, "PARAMS", (args.n_a, args.n_r, args.n_i),
                       params.to_bytes(), f"backend {backend}")
        st.write(st.universe_path, "UNIVERSE", universe.to_bytes())
        if backend == zk.GROTH16:
            st.write(st.setup_key_path, "SETUP-KEY", params.zk.trapdoor,
                     "SECRET: anyone holding this can forge proofs")
    print(f"parameters written to {st.params_path}")


def cmd_keys_publish(args, st: State):
    params = st.params
    if params.zk.backend != zk.GROTH16:
        raise CliError("usage", "the test backend needs no keys")
    path = Path(args.setup_key) if args.setup_key else st.setup_key_path
    pp = params.zk.with_trapdoor(st.read(path, "SETUP-KEY"))
    phi = _predicate(st, args.predicate)
    desc, out = _shape_file(st, args, phi)
    st.write(out, "CIRCUIT-KEYS", zk.export_keys(pp, desc))
    print(out)


def cmd_universe_add(args, st: State):
    with st.locked():
        u = pr.add_attributes(st.universe(), args.names)
        st.write(st.universe_path, "UNIVERSE", u.to_bytes())
    for n in args.names:
        print(f"{u.index(n)}\t{n}")


def cmd_issuer_init(args, st: State):
    attrs = [a for a in (args.attrs or "").split(",") if a]
    with st.locked():
        path = st.issuer_path(args.name)
        if path.exists():
            raise CliError("usage", f"issuer {args.name!r} already exists")
        issuer = pr.issuer_setup(st.params, st.universe(), attrs, _rng(args, args.name))
        st.write(path, "ISSUER-KEY", issuer.to_bytes(), "SECRET: contains a signing key")
    print(issuer.pk.to_bytes().hex())


def _parse_values(st, issuer, pairs):
    names = _names(st.universe())
    given = {}
    for item in pairs:
        key, sep, val = item.partition("=")
        if not sep:
            raise CliError("usage", f"expected NAME=VALUE, got {item!r}")
        idx = int(key[1:]) if key.startswith("#") else names.get(key)
        if idx is None:
            raise pr.UnknownAttribute(key)
        given[idx] = parse_value(val)
    if set(given) != set(issuer.attrs):
        raise pr.LengthMismatch("values must cover exactly the issuer's attributes")
    return [given[i] for i in issuer.attrs]


def cmd_issuer_issue(args, st: State):
    issuer = st.issuer(args.name)
    values = _parse_values(st, issuer, args.value)
    cred = pr.issue_cred(st.params, issuer, values, _rng(args, args.name, *args.value))
    st.write(args.out, "CREDENTIAL", cred.to_bytes(), f"issued by {args.name}")
    print(f"{pr.credential_hash(cred):064x}")


def cmd_issuer_revoke(args, st: State):
    if (args.credential is None) == (args.hash is None):
        raise CliError("usage", "give exactly one of --credential or --hash")
    if args.credential:
        target = Credential.from_bytes(st.read(args.credential, "CREDENTIAL"))
    else:
        target = int(args.hash, 16)
    with st.locked():
        issuer = pr.revoke(st.params, st.issuer(args.name), target)
        st.write(st.issuer_path(args.name), "ISSUER-KEY", issuer.to_bytes(),
                 "SECRET: contains a signing key")
    print(f"{len(issuer.revoked)} revoked")


def cmd_issuer_publish(args, st: State):
    issuer = st.issuer(args.name)
    out = Path(args.out) if args.out else st.dir / "bundles" / f"{args.name}.bundle"
    st.write(out, "ISSUER-BUNDLE", issuer.bundle().to_bytes(), f"issuer {args.name}")
    print(out)


def cmd_holder_store(args, st: State):
    cred = Credential.from_bytes(st.read(args.credential, "CREDENTIAL"))
    if not pr.verify_cred(st.params, cred, cred.issuer, cred.attrs):
        raise CliError("invalid-credential", "credential signature does not verify")
    with st.locked():
        wallet = st.wallet()
        wallet[args.label] = cred
        payload = encode([(k.encode(), v.to_bytes()) for k, v in sorted(wallet.items())])
        st.write(st.wallet_path, "WALLET", payload)
    print(f"stored {args.label}")


def cmd_holder_present(args, st: State):
    params = st.params
    _guard_backend(args, params)
    wallet = st.wallet()
    if args.label not in wallet:
        raise CliError("usage", f"no credential labelled {args.label!r} in the wallet")
    view = _bundles(st, args.issuer_set)
    if len({b.pk for b in view}) == 1:
        print("warning: a hiding set of one issuer hides nothing", file=sys.stderr)
    phi = _predicate(st, args.predicate)
    _load_keys(st, args, phi)
    rng = _rng(args, args.label, args.ctx)
    token = pr.present_cred(params, wallet[args.label], phi, _ctx(args.ctx), view, rng)
    st.write(args.out, "TOKEN", token.to_bytes())
    print(args.out)


def cmd_verifier_verify(args, st: State):
    params = st.params
    _guard_backend(args, params)
    token = pr.PresentationToken.from_bytes(st.read(args.token, "TOKEN"))
    phi = _predicate(st, args.predicate)
    _load_keys(st, args, phi)
    ok = pr.verify_presentation(params, token, phi, _ctx(args.ctx), _bundles(st, args.issuer_set))
    print("ACCEPT" if ok else "REJECT")
    return EXIT_CODES["ok"] if ok else EXIT_CODES["reject"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irac", description=__doc__.split("\n")[0])
    p.add_argument("--state-dir", default="irac-state")
    p.add_argument("--params", help="parameter file (default: STATE_DIR/params.irac)")
    p.add_argument("--backend", choices=["prod", "test"])
    p.add_argument("--seed", help="fix all randomness (tests and demos only)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("setup")
    s.add_argument("--security", type=int, default=128)
    s.add_argument("--n-a", type=int, default=1 << 7)
    s.add_argument("--n-r", type=int, default=1 << 15)
    s.add_argument("--n-i", type=int, default=1 << 10)
    s.add_argument("--max-constraints", type=int, default=pr.DEFAULT_MAX_CONSTRAINTS)
    s.set_defaults(func=cmd_setup)

    k = sub.add_parser("keys").add_subparsers(dest="action", required=True)
    a = k.add_parser("publish")
    a.add_argument("--predicate", required=True)
    a.add_argument("--setup-key", help="trapdoor file (default: STATE_DIR/setup.key)")
    a.add_argument("--keys", help="output directory (default: STATE_DIR/keys)")
    a.set_defaults(func=cmd_keys_publish)

    u = sub.add_parser("universe").add_subparsers(dest="action", required=True)
    a = u.add_parser("add")
    a.add_argument("names", nargs="+")
    a.set_defaults(func=cmd_universe_add)

    i = sub.add_parser("issuer").add_subparsers(dest="action", required=True)
    a = i.add_parser("init")
    a.add_argument("name")
    a.add_argument("--attrs", help="comma-separated attribute names")
    a.set_defaults(func=cmd_issuer_init)
    a = i.add_parser("issue")
    a.add_argument("name")
    a.add_argument("--value", action="append", default=[], metavar="NAME=VALUE")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_issuer_issue)
    a = i.add_parser("revoke")
    a.add_argument("name")
    a.add_argument("--credential")
    a.add_argument("--hash", help="credential hash in hex")
    a.set_defaults(func=cmd_issuer_revoke)
    a = i.add_parser("publish")
    a.add_argument("name")
    a.add_argument("--out")
    a.set_defaults(func=cmd_issuer_publish)

    h = sub.add_parser("holder").add_subparsers(dest="action", required=True)
    a = h.add_parser("store")
    a.add_argument("credential")
    a.add_argument("--label", required=True)
    a.set_defaults(func=cmd_holder_store)
    a = h.add_parser("present")
    a.add_argument("--label", required=True)
    a.add_argument("--predicate", required=True)
    a.add_argument("--ctx", required=True)
    a.add_argument("--issuer-set", nargs="+", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--keys", help="published circuit keys (default: STATE_DIR/keys)")
    a.set_defaults(func=cmd_holder_present)

    v = sub.add_parser("verifier").add_subparsers(dest="action", required=True)
    a = v.add_parser("verify")
    a.add_argument("--token", required=True)
    a.add_argument("--predicate", required=True)
    a.add_argument("--ctx", required=True)
    a.add_argument("--issuer-set", nargs="+", required=True)
    a.add_argument("--keys", help="published circuit keys (default: STATE_DIR/keys)")
    a.set_defaults(func=cmd_verifier_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    st = State(args)
    try:
        rc = args.func(args, st)
    except CliError as e:
        code = e.code
        msg = str(e)
    except Exception as e:
        for exc, code in _ERRORS:
            if isinstance(e, exc):
                break
        else:
            raise
        msg = f"{type(e).__name__}: {e}"
    else:
        return rc or 0
    print(f"error[{code}]: {msg}", file=sys.stderr)
    return EXIT_CODES[code]


if __name__ == "__main__":
    sys.exit(main())
