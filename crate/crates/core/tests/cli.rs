use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

struct Run {
    dir: TempDir,
    backend: &'static str,
}

impl Run {
    fn new(backend: &'static str) -> Self {
        Run {
            dir: tempfile::tempdir().unwrap(),
            backend,
        }
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn raw(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_maabe"))
            .args(["--backend", self.backend, "--seed", "7"])
            .args(args)
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.raw(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn code(&self, args: &[&str]) -> i32 {
        self.raw(args).status.code().unwrap()
    }

    /// Setup, two authorities and a key for `alice` over
    /// `(2of2 (leaf 1:1) (leaf 1:2))` and `(leaf 2:1)`.
    fn deploy(&self) {
        self.ok(&["setup", "--authorities", "2", "--mpk", "mpk", "--msk", "msk"]);
        for k in ["1", "2"] {
            self.ok(&[
                "authority-setup", "--index", k, "--attributes", "3", "--msk", "msk",
                "--secret", &format!("auth{k}"), "--public", &format!("auth{k}.pub"),
            ]);
        }
        self.issue("alice", "alice.key");
    }

    fn issue(&self, id: &str, out: &str) {
        self.ok(&["request-key", "--mpk", "mpk", "--id", id, "--state", "state", "--out", "req"]);
        self.ok(&["grant", "--mpk", "mpk", "--authority", "auth1", "--id", id,
            "--tree", "(2of2 (leaf 1:1) (leaf 1:2))", "--out", "share1"]);
        self.ok(&["grant", "--mpk", "mpk", "--authority", "auth2", "--id", id,
            "--tree", "(leaf 2:1)", "--out", "share2"]);
        self.ok(&["issue-key", "--mpk", "mpk", "--msk", "msk", "--table", "table", "--request", "req",
            "--share", "share1", "--share", "share2", "--out", "partial"]);
        self.ok(&["finalize-key", "--mpk", "mpk", "--state", "state", "--partial", "partial", "--id", id,
            "--out", out]);
    }

    fn encrypt(&self, attrs: &str, out: &str) {
        std::fs::write(self.p("msg"), b"attack at dawn").unwrap();
        self.ok(&["encrypt", "--mpk", "mpk", "--authority", "auth1.pub", "--authority", "auth2.pub",
            "--attrs", attrs, "--in", "msg", "--out", out]);
    }
}

fn exists(p: &Path) -> bool {
    p.try_exists().unwrap()
}

#[test]
fn full_flow_on_both_backends() {
    for backend in ["toy", "curve"] {
        let r = Run::new(backend);
        r.deploy();
        r.encrypt("1:1,1:2,1:3,2:1", "ct");
        r.ok(&["decrypt", "--mpk", "mpk", "--key", "alice.key", "--in", "ct", "--out", "plain"]);
        assert_eq!(std::fs::read(r.p("plain")).unwrap(), b"attack at dawn");
        let traced = r.ok(&["trace", "--mpk", "mpk", "--table", "table", "--key", "alice.key", "--json"]);
        let v: serde_json::Value = serde_json::from_str(&traced).unwrap();
        assert_eq!(v["identity"], "alice");
    }
}

#[test]
fn exit_codes() {
    let r = Run::new("toy");
    r.deploy();

    // policy not satisfied; no output file appears
    r.encrypt("1:1,2:1", "ct-short");
    assert_eq!(r.code(&["decrypt", "--mpk", "mpk", "--key", "alice.key", "--in", "ct-short", "--out", "x"]), 3);
    assert!(!exists(&r.p("x")));

    // tampered ciphertext file
    r.encrypt("1:1,1:2,2:1", "ct");
    let mut bytes = std::fs::read(r.p("ct")).unwrap();
    let n = bytes.len();
    bytes[n / 2] ^= 1;
    std::fs::write(r.p("ct-bad"), &bytes).unwrap();
    assert_eq!(r.code(&["decrypt", "--mpk", "mpk", "--key", "alice.key", "--in", "ct-bad", "--out", "x"]), 6);

    // a curve run cannot read toy files
    let curve = Command::new(env!("CARGO_BIN_EXE_maabe"))
        .args(["--backend", "curve", "decrypt", "--mpk", "mpk", "--key", "alice.key", "--in", "ct", "--out", "x"])
        .current_dir(r.dir.path())
        .output()
        .unwrap();
    assert_eq!(curve.status.code(), Some(6));

    // a table that never saw alice
    let other = Run::new("toy");
    other.ok(&["setup", "--authorities", "2", "--mpk", "mpk", "--msk", "msk"]);
    other.ok(&["register", "--msk", "msk", "--table", "table", "--id", "bob"]);
    std::fs::copy(r.p("mpk"), other.p("mpk")).unwrap();
    std::fs::copy(r.p("alice.key"), other.p("alice.key")).unwrap();
    assert_eq!(other.code(&["trace", "--mpk", "mpk", "--table", "table", "--key", "alice.key"]), 5);

    // usage error
    assert_eq!(r.code(&["decrypt"]), 2);
}

#[test]
fn proof_for_another_identity_is_rejected() {
    let r = Run::new("toy");
    r.deploy();
    r.ok(&["request-key", "--mpk", "mpk", "--id", "carol", "--state", "state", "--out", "req"]);
    // swap the identity inside the request; the proof binds the original one
    let bytes = std::fs::read(r.p("req")).unwrap();
    let payload_end = bytes.len() - 32;
    let mut body = bytes[..payload_end].to_vec();
    let at = body.windows(5).position(|w| w == b"carol").unwrap();
    body[at..at + 5].copy_from_slice(b"carl_");
    let digest = <sha2::Sha256 as sha2::Digest>::digest(&body);
    body.extend_from_slice(&digest);
    std::fs::write(r.p("req"), body).unwrap();
    r.ok(&["grant", "--mpk", "mpk", "--authority", "auth1", "--id", "carl_",
        "--tree", "(leaf 1:1)", "--out", "share1"]);
    r.ok(&["grant", "--mpk", "mpk", "--authority", "auth2", "--id", "carl_",
        "--tree", "(leaf 2:1)", "--out", "share2"]);
    let code = r.code(&["issue-key", "--mpk", "mpk", "--msk", "msk", "--table", "table", "--request", "req",
        "--share", "share1", "--share", "share2", "--out", "partial-carl"]);
    assert_eq!(code, 4);
    assert!(!exists(&r.p("partial-carl")));
}

#[test]
fn reports_are_json() {
    let r = Run::new("curve");
    let bench = r.ok(&["bench", "--authorities", "1", "--k1", "2", "--k2", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&bench).unwrap();
    assert!(v.is_object());
    let t = Run::new("toy");
    let game = t.ok(&["game", "--adversary", "planted", "--runs", "20", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&game).unwrap();
    assert_eq!(v["wins"], 20);
}
