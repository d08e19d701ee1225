import pytest

from irac import cli
from irac import protocol as pr
from irac import zk
from irac.cli import EXIT_CODES, main, read_envelope


class Shell:
    def __init__(self, tmp_path, capsys, seed="cli-tests"):
        self.dir = tmp_path / "state"
        self.tmp = tmp_path
        self.capsys = capsys
        self.seed = seed

    def __call__(self, *argv, code=0):
        rc = main(["--state-dir", str(self.dir), "--seed", self.seed, *argv])
        out = self.capsys.readouterr()
        assert rc == code, out.err
        return out

    def path(self, name):
        return str(self.tmp / name)


@pytest.fixture
def sh(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.TEST_MODE_ENV, "1")
    s = Shell(tmp_path, capsys)
    s("--backend", "test", "setup", "--n-a", "8", "--n-r", "8", "--n-i", "8")
    s("universe", "add", "age", "country")
    for name, attrs in (("gov", "age,country"), ("bank", "age"), ("club", "age,country")):
        s("issuer", "init", name, "--attrs", attrs)
        s("issuer", "publish", name)
    (tmp_path / "adult.pred").write_text("age >= 18\n")
    return s


def bundles(sh):
    return [str(sh.dir / "bundles" / f"{n}.bundle") for n in ("gov", "bank", "club")]


def issue_and_store(sh, label="alice", age="30"):
    sh("issuer", "issue", "gov", "--value", f"age={age}", "--value", "country=7",
       "--out", sh.path(f"{label}.cred"))
    sh("holder", "store", sh.path(f"{label}.cred"), "--label", label)


def present(sh, label="alice", ctx="00ff", code=0):
    return sh("holder", "present", "--label", label, "--predicate", sh.path("adult.pred"),
              "--ctx", ctx, "--issuer-set", *bundles(sh), "--out", sh.path("tok"), code=code)


def verify(sh, ctx="00ff", code=0):
    return sh("verifier", "verify", "--token", sh.path("tok"), "--predicate",
              sh.path("adult.pred"), "--ctx", ctx, "--issuer-set", *bundles(sh), code=code)


def test_happy_path_and_revocation(sh):
    issue_and_store(sh)
    present(sh)
    assert verify(sh).out.strip() == "ACCEPT"
    assert verify(sh, ctx="00fe", code=1).out.strip() == "REJECT"
    sh("issuer", "revoke", "gov", "--credential", sh.path("alice.cred"))
    sh("issuer", "publish", "gov")
    assert verify(sh, code=1).out.strip() == "REJECT"
    err = present(sh, code=EXIT_CODES["revoked"]).err
    assert err.startswith("error[revoked]")


def test_envelope_format(sh):
    text = (sh.dir / "bundles" / "gov.bundle").read_text().splitlines()
    assert text[0] == "IRAC-ISSUER-BUNDLE v1"
    assert text[1] == "sizes: 8 8 8"
    assert all(len(line) <= 64 for line in text[3:])
    assert "SECRET" in (sh.dir / "issuers" / "gov.key").read_text()


def test_bundles_carry_no_signing_key(sh):
    issue_and_store(sh)
    key = pr.IssuerState.from_bytes(
        read_envelope(sh.dir / "issuers" / "gov.key", "ISSUER-KEY"))
    secret = key.sk.scalar.to_bytes(32, "little").hex()
    for b in bundles(sh):
        assert secret not in "".join((sh.tmp / b).read_text().split())


def test_seeded_runs_are_reproducible(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.TEST_MODE_ENV, "1")
    outs = []
    for k in range(2):
        s = Shell(tmp_path / str(k), capsys)
        s("--backend", "test", "setup", "--n-a", "8", "--n-r", "8", "--n-i", "8")
        s("universe", "add", "age")
        outs.append(s("issuer", "init", "gov", "--attrs", "age").out)
    assert outs[0] == outs[1]


def test_test_backend_refused(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv(cli.TEST_MODE_ENV, raising=False)
    s = Shell(tmp_path, capsys)
    err = s("--backend", "test", "setup", code=EXIT_CODES["test-backend-refused"]).err
    assert "not zero-knowledge" in err


def test_refused_when_parameters_are_test_backend(sh, monkeypatch):
    issue_and_store(sh)
    monkeypatch.delenv(cli.TEST_MODE_ENV)
    present(sh, code=EXIT_CODES["test-backend-refused"])


@pytest.mark.parametrize("argv,code", [
    (("universe", "add", "age"), "duplicate-attribute"),
    (("issuer", "init", "x", "--attrs", "height"), "unknown-attribute"),
    (("issuer", "issue", "gov", "--value", "age=1", "--out", "o"), "length-mismatch"),
    (("issuer", "issue", "bank", "--value", f"age={2**254}", "--out", "o"), "value-out-of-range"),
    (("issuer", "revoke", "gov"), "usage"),
    (("holder", "store", "missing.cred", "--label", "x"), "bad-file"),
])
def test_error_codes(sh, argv, code):
    err = sh(*argv, code=EXIT_CODES[code]).err
    assert err.startswith(f"error[{code}]")


def test_presentation_errors(sh):
    issue_and_store(sh, "minor", age="12")
    present(sh, "minor", code=EXIT_CODES["predicate-unsatisfied"])
    present(sh, "nobody", code=EXIT_CODES["usage"])
    (sh.tmp / "adult.pred").write_text("age >>> 3\n")
    issue_and_store(sh)
    present(sh, code=EXIT_CODES["bad-predicate"])


def test_single_issuer_warning(sh):
    issue_and_store(sh)
    out = sh("holder", "present", "--label", "alice", "--predicate", sh.path("adult.pred"),
             "--ctx", "01", "--issuer-set", bundles(sh)[0], "--out", sh.path("tok"))
    assert "hides nothing" in out.err


def test_wrong_sizes_rejected(sh, tmp_path, capsys):
    other = Shell(tmp_path / "other", capsys)
    other("--backend", "test", "setup", "--n-a", "4", "--n-r", "8", "--n-i", "8")
    other("universe", "add", "age")
    other("issuer", "init", "x", "--attrs", "age")
    other("issuer", "publish", "x")
    issue_and_store(sh)
    out = sh("holder", "present", "--label", "alice", "--predicate", sh.path("adult.pred"),
             "--ctx", "01", "--issuer-set", str(other.dir / "bundles" / "x.bundle"),
             "--out", sh.path("tok"), code=EXIT_CODES["bad-file"])
    assert "sizes" in out.err


def test_production_backend_round_trip(tmp_path, capsys):
    s = Shell(tmp_path, capsys)
    s("--backend", "prod", "setup", "--n-a", "8", "--n-r", "8", "--n-i", "8")
    s("universe", "add", "age", "country")
    for name in ("gov", "bank"):
        s("issuer", "init", name, "--attrs", "age")
        s("issuer", "publish", name)
    (tmp_path / "adult.pred").write_text("age > 18\n")
    s("issuer", "issue", "gov", "--value", "age=44", "--out", s.path("c"))
    s("holder", "store", s.path("c"), "--label", "me")
    sets = [str(s.dir / "bundles" / f"{n}.bundle") for n in ("gov", "bank")]
    present = ("holder", "present", "--label", "me", "--predicate", s.path("adult.pred"),
               "--ctx", "aa", "--issuer-set", *sets, "--out", s.path("tok"))
    verify = ("verifier", "verify", "--token", s.path("tok"), "--predicate",
              s.path("adult.pred"), "--ctx", "aa", "--issuer-set", *sets)

    # the trapdoor lives only in setup.key, never in the public parameters
    trapdoor = read_envelope(s.dir / "setup.key", "SETUP-KEY")
    assert trapdoor.hex() not in "".join((s.dir / "params.irac").read_text().split())
    zk._cache.clear()
    err = s(*present, code=EXIT_CODES["keys-unavailable"]).err
    assert "keys publish" in err

    s("keys", "publish", "--predicate", s.path("adult.pred"))
    zk._cache.clear()
    s(*present)
    zk._cache.clear()
    assert s(*verify).out.strip() == "ACCEPT"
    # a different constant keeps the shape, so the same keys serve it
    (tmp_path / "adult.pred").write_text("age > 50\n")
    assert s(*verify, code=1).out.strip() == "REJECT"


def test_publish_needs_matching_trapdoor(tmp_path, capsys):
    a, b = Shell(tmp_path / "a", capsys), Shell(tmp_path / "b", capsys, seed="other")
    for sh_ in (a, b):
        sh_("--backend", "prod", "setup", "--n-a", "8", "--n-r", "8", "--n-i", "8")
        sh_("universe", "add", "age")
    (tmp_path / "p.pred").write_text("age > 1\n")
    err = a("keys", "publish", "--predicate", a.path("p.pred"),
            "--setup-key", str(b.dir / "setup.key"), code=EXIT_CODES["bad-input"]).err
    assert "trapdoor" in err
