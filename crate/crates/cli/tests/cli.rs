use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

fn bfid(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfid")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Daemon {
    child: Child,
    addr: String,
}

impl Daemon {
    fn start(dir: &Path, log: Option<&str>) -> Daemon {
        let mut args = vec!["serve", "--listen", "127.0.0.1:0"];
        if let Some(l) = log {
            args.extend(["--log", l]);
        }
        let mut child = Command::new(env!("CARGO_BIN_EXE_bfid"))
            .args(&args)
            .current_dir(dir)
            .stdout(Stdio::piped())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line.split_whitespace().nth(2).unwrap().to_string();
        Daemon { child, addr }
    }
}

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[test]
fn hash_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("msg"), b"fixed content\n").unwrap();
    let init = bfid(&["hash-init", "--seed", "11", "--out", "iv.txt"], dir.path());
    assert!(init.status.success(), "{}", String::from_utf8_lossy(&init.stderr));
    let a = bfid(&["hash", "msg", "--iv", "iv.txt"], dir.path());
    let b = bfid(&["hash", "msg", "--iv", "iv.txt"], dir.path());
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).trim().len(), 20);
    let again = tempfile::tempdir().unwrap();
    std::fs::write(again.path().join("msg"), b"fixed content\n").unwrap();
    bfid(&["hash-init", "--seed", "11", "--out", "iv.txt"], again.path());
    assert_eq!(stdout(&bfid(&["hash", "msg", "--iv", "iv.txt"], again.path())), stdout(&a));
    let sha = bfid(&["hash", "msg"], dir.path());
    assert_eq!(stdout(&sha).trim().len(), 64);
}

#[test]
fn seeded_keygen_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = bfid(&["keygen", "--profile", "toy24", "--seed", "7", "--out-dir", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["public.key", "private.key"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let o = bfid(&["keygen", "--profile", "toy24", "--seed", "8", "--out-dir", "c"], dir.path());
    assert!(o.status.success());
    assert_ne!(
        std::fs::read(dir.path().join("a/private.key")).unwrap(),
        std::fs::read(dir.path().join("c/private.key")).unwrap()
    );
}

#[test]
fn sign_verify_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    bfid(&["keygen", "--profile", "toy32", "--seed", "3", "--out-dir", "k"], p);
    std::fs::write(p.join("m1"), b"one").unwrap();
    std::fs::write(p.join("m2"), b"two").unwrap();
    let s = bfid(&["sign", "--key", "k/private.key", "m1", "--out", "sig", "--seed", "1"], p);
    assert!(s.status.success());
    let ok = bfid(&["verify", "--key", "k/public.key", "m1", "--sig", "sig", "--strict"], p);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok).trim(), "ACCEPT");
    let soft = bfid(&["verify", "--key", "k/public.key", "m2", "--sig", "sig"], p);
    assert_eq!(soft.status.code(), Some(0));
    assert_eq!(stdout(&soft).trim(), "REJECT");
    let hard = bfid(&["verify", "--key", "k/public.key", "m2", "--sig", "sig", "--strict"], p);
    assert_eq!(hard.status.code(), Some(3));
    assert_eq!(bfid(&["keygen", "--profile", "toy99"], p).status.code(), Some(2));
    assert_eq!(bfid(&["frobnicate"], p).status.code(), Some(2));
    assert_eq!(
        bfid(&["ipv6plus", "pack", "--nation", "86", "--routing", "1", "--subnet", "1", "--iid", "1", "--layout", "32,16"], p)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn query_fresh_daemon_and_transport_failure() {
    let dir = tempfile::tempdir().unwrap();
    let d = Daemon::start(dir.path(), None);
    let q = bfid(&["query", "0123456789ABCDEF", "--platform", &d.addr], dir.path());
    assert_eq!(q.status.code(), Some(0));
    assert_eq!(stdout(&q).trim(), "UNKNOWN");
    let strict = bfid(&["query", "0123456789ABCDEF", "--platform", &d.addr, "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(3));
    let bad = bfid(&["query", "ILOU", "--platform", &d.addr], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    drop(d);

    let gone = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = gone.local_addr().unwrap().to_string();
    drop(gone);
    let t = bfid(&["query", "0123456789ABCDEF", "--platform", &addr, "--timeout", "2"], dir.path());
    assert_eq!(t.status.code(), Some(4));
}

#[test]
fn register_query_and_restart() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    bfid(&["keygen", "--profile", "toy32", "--seed", "5", "--out-dir", "k"], p);
    let bfid_text;
    {
        let d = Daemon::start(p, Some("platform.log"));
        let plat = ["--platform", d.addr.as_str()];
        let r = bfid(&[&["register-subject", "--id", "acme", "--key", "k/private.key", "--seed", "1"][..], &plat].concat(), p);
        assert_eq!(stdout(&r).trim(), "REGISTERED acme", "{}", String::from_utf8_lossy(&r.stderr));
        let r = bfid(
            &[&["register-id", "--subject", "acme", "--key", "k/private.key", "--attr", "serial=42", "--seed", "2"][..], &plat]
                .concat(),
            p,
        );
        let out = stdout(&r);
        bfid_text = out.lines().next().unwrap().split(' ').nth(1).unwrap().to_string();
        let q = bfid(&[&["query", bfid_text.as_str()][..], &plat].concat(), p);
        assert_eq!(stdout(&q).trim(), "ACCEPT merchandise from acme: serial=42");
    }
    let d = Daemon::start(p, Some("platform.log"));
    let q = bfid(&["query", &bfid_text, "--platform", &d.addr, "--strict"], p);
    assert_eq!(q.status.code(), Some(0));
    assert!(stdout(&q).starts_with("ACCEPT"));
}
