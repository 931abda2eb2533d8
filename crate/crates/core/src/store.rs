//! Delta-based version storage: a base graph plus one forward delta per
//! commit, kept in the label scope of the base.
//!
//! Every commit matches the incoming graph against the current head and
//! stores the delta in source labels, so blank node labels already in the
//! store never change. On disk a repository is a directory holding
//! `base.nt`, `0001.rdfd`, `0002.rdfd`, … and a `manifest` listing the
//! version count and a SHA-256 per file. Writers take a `lock` file.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::delta::{apply_delta, compose, delta_mapped, reverse_delta, DeltaScript, Direction};
use crate::equiv::EquivalenceRelation;
use crate::error::{Error, Result};
use crate::matcher::{solve_bm, MatcherConfig};
use crate::ntriples::{parse_str, serialize_ntriples};
use crate::rdf::Graph;

#[derive(Debug, Clone)]
pub struct VersionLog {
    base: Graph,
    deltas: Vec<DeltaScript>,
    cfg: MatcherConfig,
}

impl VersionLog {
    pub fn new(base: Graph) -> VersionLog {
        VersionLog {
            base,
            deltas: Vec::new(),
            cfg: MatcherConfig::default(),
        }
    }

    pub fn with_config(mut self, cfg: MatcherConfig) -> VersionLog {
        self.cfg = cfg;
        self
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn deltas(&self) -> &[DeltaScript] {
        &self.deltas
    }

    pub fn version_count(&self) -> usize {
        1 + self.deltas.len()
    }

    /// Operations stored across all deltas.
    pub fn stored_operations(&self) -> usize {
        self.deltas.iter().map(DeltaScript::size).sum()
    }

    pub fn head(&self) -> Graph {
        self.checkout(self.version_count()).expect("head is in range")
    }

    /// Appends the delta from the head to `graph` and returns it.
    pub fn commit(&mut self, graph: &Graph) -> &DeltaScript {
        let head = self.head();
        let m = solve_bm(&head, graph, &EquivalenceRelation::exact(), &self.cfg);
        let d = delta_mapped(&head, graph, &m, Direction::ForwardIntoSourceLabels)
            .expect("matcher mappings are injections between the two graphs");
        self.deltas.push(d);
        self.deltas.last().expect("just pushed")
    }

    fn check(&self, index: usize) -> Result<()> {
        if index == 0 || index > self.version_count() {
            return Err(Error::VersionOutOfRange {
                index,
                count: self.version_count(),
            });
        }
        Ok(())
    }

    /// Version `index` (1-based): the base with the first `index - 1`
    /// deltas applied.
    pub fn checkout(&self, index: usize) -> Result<Graph> {
        self.check(index)?;
        let mut g = self.base.clone();
        for d in &self.deltas[..index - 1] {
            g = apply_delta(&g, d).graph;
        }
        g.set_id(format!("v{index}"));
        Ok(g)
    }

    /// Version `index` rebuilt backwards from the head by reversed deltas.
    pub fn checkout_backwards(&self, index: usize) -> Result<Graph> {
        self.check(index)?;
        let mut g = self.head();
        for d in self.deltas[index - 1..].iter().rev() {
            g = apply_delta(&g, &reverse_delta(&d.without_mapping())).graph;
        }
        g.set_id(format!("v{index}"));
        Ok(g)
    }

    /// One script taking a client holding version `from` to version `to`.
    pub fn make_sync_patch(&self, from: usize, to: usize) -> Result<DeltaScript> {
        self.check(from)?;
        self.check(to)?;
        if from > to {
            return Err(Error::VersionOutOfRange {
                index: from,
                count: to,
            });
        }
        Ok(self.deltas[from - 1..to - 1]
            .iter()
            .fold(DeltaScript::empty(), |acc, d| compose(&acc, &d.without_mapping())))
    }
}

/// A version log persisted in a directory.
#[derive(Debug, Clone)]
pub struct Repository {
    path: PathBuf,
}

const MANIFEST: &str = "manifest";
const LOCK: &str = "lock";
const BASE: &str = "base.nt";

fn delta_file(index: usize) -> String {
    format!("{index:04}.rdfd")
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Removes the lock file when dropped.
struct LockGuard(PathBuf);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

impl Repository {
    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Creates a repository with `base` as version 1. The directory may
    /// exist but must not already hold a repository.
    pub fn init(path: impl Into<PathBuf>, base: &Graph) -> Result<Repository> {
        let path = path.into();
        fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
        if path.join(MANIFEST).exists() {
            return Err(Error::Repository {
                path,
                message: "repository already initialised".into(),
            });
        }
        let repo = Repository { path };
        let _lock = repo.lock()?;
        repo.write_file(BASE, serialize_ntriples(base).as_bytes())?;
        repo.write_manifest(0)?;
        Ok(repo)
    }

    pub fn open(path: impl Into<PathBuf>) -> Result<Repository> {
        let path = path.into();
        if !path.join(MANIFEST).is_file() {
            return Err(Error::Repository {
                path,
                message: "not a repository (no manifest)".into(),
            });
        }
        Ok(Repository { path })
    }

    fn lock(&self) -> Result<LockGuard> {
        let p = self.path.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&p) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard(p))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Repository {
                path: p,
                message: "repository is locked by another writer".into(),
            }),
            Err(e) => Err(Error::io(p, e)),
        }
    }

    fn read_file(&self, name: &str) -> Result<String> {
        let p = self.path.join(name);
        fs::read_to_string(&p).map_err(|e| Error::io(p, e))
    }

    /// Writes through a temporary file and a rename.
    fn write_file(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path.join(name);
        let tmp = self.path.join(format!(".{name}.tmp"));
        let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &p).map_err(|e| Error::io(p, e))
    }

    fn write_manifest(&self, deltas: usize) -> Result<()> {
        let mut out = format!("versions {}\n", deltas + 1);
        for name in std::iter::once(BASE.to_string()).chain((1..=deltas).map(delta_file)) {
            let bytes = self.read_file(&name)?;
            out.push_str(&format!("{} {}\n", name, digest(bytes.as_bytes())));
        }
        self.write_file(MANIFEST, out.as_bytes())
    }

    /// Reads the manifest and every file it lists, checking the hashes.
    pub fn load(&self) -> Result<VersionLog> {
        let manifest = self.read_file(MANIFEST)?;
        let bad = |message: String| Error::Repository {
            path: self.path.join(MANIFEST),
            message,
        };
        let mut lines = manifest.lines();
        let versions: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("versions "))
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| bad("missing version count".into()))?;
        let mut entries = Vec::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (name, hash) = line
                .split_once(' ')
                .ok_or_else(|| bad(format!("malformed entry '{line}'")))?;
            entries.push((name.to_string(), hash.trim().to_string()));
        }
        if versions == 0 || entries.len() != versions {
            return Err(bad(format!("{} entries for {versions} versions", entries.len())));
        }
        let mut texts = Vec::new();
        for (i, (name, hash)) in entries.iter().enumerate() {
            let expected = if i == 0 { BASE.to_string() } else { delta_file(i) };
            if name != &expected {
                return Err(bad(format!("expected {expected}, found {name}")));
            }
            let text = self.read_file(name)?;
            if &digest(text.as_bytes()) != hash {
                return Err(Error::Repository {
                    path: self.path.join(name),
                    message: "content hash does not match manifest".into(),
                });
            }
            texts.push(text);
        }
        let with_path = |name: &str, e: Error| Error::Repository {
            path: self.path.join(name),
            message: e.to_string(),
        };
        let mut base = parse_str(&texts[0]).map_err(|e| with_path(BASE, e))?.graph;
        base.set_id("v1");
        let mut log = VersionLog::new(base);
        for (i, text) in texts.iter().enumerate().skip(1) {
            log.deltas
                .push(DeltaScript::parse(text).map_err(|e| with_path(&delta_file(i), e))?);
        }
        Ok(log)
    }

    /// Commits `graph` as the next version and returns the stored delta.
    pub fn commit(&self, graph: &Graph) -> Result<DeltaScript> {
        let _lock = self.lock()?;
        let mut log = self.load()?;
        let d = log.commit(graph).clone();
        let n = log.deltas.len();
        self.write_file(&delta_file(n), d.to_file_string().as_bytes())?;
        self.write_manifest(n)?;
        Ok(d)
    }

    pub fn checkout(&self, index: usize) -> Result<Graph> {
        self.load()?.checkout(index)
    }

    pub fn make_sync_patch(&self, from: usize, to: usize) -> Result<DeltaScript> {
        self.load()?.make_sync_patch(from, to)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::test_equivalence;

    fn g(src: &str) -> Graph {
        parse_str(src).unwrap().graph
    }

    fn versions() -> Vec<Graph> {
        vec![
            g("_:a <http://p> \"1\" .\n_:a <http://q> _:b .\n_:b <http://r> \"x\" ."),
            g("_:c <http://p> \"1\" .\n_:c <http://q> _:d .\n_:d <http://r> \"y\" ."),
            g("_:e <http://p> \"2\" .\n_:e <http://q> _:f .\n_:f <http://r> \"y\" .\n_:g <http://p> \"1\" ."),
        ]
    }

    #[test]
    fn log_reconstructs_every_version() {
        let vs = versions();
        let mut log = VersionLog::new(vs[0].clone());
        for v in &vs[1..] {
            log.commit(v);
        }
        assert_eq!(log.version_count(), 3);
        assert!(log.checkout(1).unwrap().same_triples(&vs[0]));
        for (i, v) in vs.iter().enumerate() {
            assert!(test_equivalence(&log.checkout(i + 1).unwrap(), v));
            assert!(test_equivalence(&log.checkout_backwards(i + 1).unwrap(), v));
        }
        assert!(matches!(log.checkout(0), Err(Error::VersionOutOfRange { .. })));
        assert!(log.checkout(4).is_err());
    }

    #[test]
    fn identical_commit_is_empty() {
        let vs = versions();
        let mut log = VersionLog::new(vs[0].clone());
        assert!(log.commit(&vs[0]).is_empty());
    }

    #[test]
    fn sync_patches() {
        let vs = versions();
        let mut log = VersionLog::new(vs[0].clone());
        for v in &vs[1..] {
            log.commit(v);
        }
        assert!(log.make_sync_patch(1, 1).unwrap().is_empty());
        assert!(log.make_sync_patch(3, 1).is_err());
        for from in 1..=3 {
            for to in from..=3 {
                let p = log.make_sync_patch(from, to).unwrap();
                let out = apply_delta(&log.checkout(from).unwrap(), &p);
                assert!(out.warnings.is_empty());
                assert!(out.graph.same_triples(&log.checkout(to).unwrap()));
            }
        }
    }

    #[test]
    fn repository_roundtrip_and_tamper_detection() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("repo");
        let vs = versions();
        let repo = Repository::init(&path, &vs[0]).unwrap();
        assert!(Repository::init(&path, &vs[0]).is_err());
        for v in &vs[1..] {
            repo.commit(v).unwrap();
        }
        let repo = Repository::open(&path).unwrap();
        for (i, v) in vs.iter().enumerate() {
            assert!(test_equivalence(&repo.checkout(i + 1).unwrap(), v));
        }
        assert!(!path.join(LOCK).exists());

        fs::write(path.join(LOCK), "0").unwrap();
        assert!(matches!(repo.commit(&vs[0]), Err(Error::Repository { .. })));
        fs::remove_file(path.join(LOCK)).unwrap();

        fs::write(path.join("0001.rdfd"), "# direction=source\n").unwrap();
        assert!(matches!(repo.load(), Err(Error::Repository { .. })));
        assert!(Repository::open(dir.path().join("nope")).is_err());
    }
}
