//! Synthetic graph pairs with a planted blank node mapping, for comparing
//! the matcher's strategies.
//!
//! `G1` is drawn from small IRI and literal pools so that distance ties are
//! common. `G2` is `G1` with its blank nodes relabeled by a random
//! permutation, followed by random triple additions and deletions. The
//! relabeling, restricted to blank nodes that survive, is the planted truth.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equiv::EquivalenceRelation;
use crate::error::{Error, Result};
use crate::matcher::{exact_feasible, mapping_cost, solve_with, BnodeMapping, MatcherConfig, Method};
use crate::ntriples::{parse_ntriples, serialize_ntriples};
use crate::rdf::{Graph, Renaming, Term, Triple};

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub bnode_count: usize,
    pub ground_triples: usize,
    /// Triples mentioning at least one blank node; `None` means three per
    /// blank node. Every blank node gets at least one.
    pub bnode_triples: Option<usize>,
    /// Probability that a blank node triple links two blank nodes.
    pub connectivity: f64,
    pub mutation_ops: usize,
    pub seed: u64,
    pub iri_pool: usize,
    pub literal_pool: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            bnode_count: 5,
            ground_triples: 5,
            bnode_triples: None,
            connectivity: 0.0,
            mutation_ops: 0,
            seed: 0,
            iri_pool: 20,
            literal_pool: 30,
        }
    }
}

impl GenSpec {
    pub fn new(bnode_count: usize, ground_triples: usize, connectivity: f64, mutation_ops: usize, seed: u64) -> GenSpec {
        GenSpec {
            bnode_count,
            ground_triples,
            connectivity,
            mutation_ops,
            seed,
            ..GenSpec::default()
        }
    }

    fn bnode_triple_target(&self) -> usize {
        self.bnode_triples.unwrap_or(3 * self.bnode_count).max(self.bnode_count)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.connectivity) {
            return Err(Error::InfeasibleSpec(format!("connectivity {} outside [0, 1]", self.connectivity)));
        }
        if self.bnode_count == 0 && self.bnode_triples.is_some_and(|n| n > 0) {
            return Err(Error::InfeasibleSpec("blank node triples requested without blank nodes".into()));
        }
        if self.iri_pool == 0 || self.literal_pool == 0 {
            return Err(Error::InfeasibleSpec("vocabulary pools must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedPair {
    pub g1: Graph,
    pub g2: Graph,
    /// The planted mapping; its cost is the objective value it achieves.
    pub truth: BnodeMapping,
    /// Net number of triples added or deleted by the mutations.
    pub true_delta_size: usize,
}

struct Vocab {
    iris: Vec<Term>,
    literals: Vec<Term>,
}

impl Vocab {
    fn new(spec: &GenSpec) -> Vocab {
        Vocab {
            iris: (0..spec.iri_pool).map(|i| Term::iri(format!("http://example.org/gen/r{i}"))).collect(),
            literals: (0..spec.literal_pool).map(|i| Term::literal(format!("v{i}"))).collect(),
        }
    }

    fn iri(&self, rng: &mut ChaCha8Rng) -> Term {
        self.iris.choose(rng).expect("non-empty pool").clone()
    }

    fn value(&self, rng: &mut ChaCha8Rng) -> Term {
        if rng.gen_bool(0.5) {
            self.iri(rng)
        } else {
            self.literals.choose(rng).expect("non-empty pool").clone()
        }
    }

    fn ground(&self, rng: &mut ChaCha8Rng) -> Triple {
        Triple::new(self.iri(rng), self.iri(rng), self.value(rng)).expect("well-formed")
    }

    /// A triple mentioning `owner`, possibly linking it to another of `bnodes`.
    fn around(&self, rng: &mut ChaCha8Rng, owner: &Term, bnodes: &[Term], connectivity: f64) -> Triple {
        let p = self.iri(rng);
        let linked = bnodes.len() > 1 && connectivity > 0.0 && rng.gen_bool(connectivity);
        let (s, o) = if linked {
            let other = loop {
                let c = bnodes.choose(rng).expect("non-empty");
                if c != owner {
                    break c.clone();
                }
            };
            if rng.gen_bool(0.5) {
                (owner.clone(), other)
            } else {
                (other, owner.clone())
            }
        } else if rng.gen_bool(0.7) {
            (owner.clone(), self.value(rng))
        } else {
            (self.iri(rng), owner.clone())
        };
        Triple::new(s, p, o).expect("well-formed")
    }
}

/// Deterministic in `spec.seed`.
pub fn generate_pair(spec: &GenSpec) -> Result<GeneratedPair> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab = Vocab::new(spec);
    let a: Vec<Term> = (0..spec.bnode_count).map(|k| Term::blank(format!("a{k}"))).collect();

    let mut g1 = Graph::new("g1");
    for owner in &a {
        g1.insert(vocab.around(&mut rng, owner, &a, spec.connectivity));
    }
    let bnode_target = if a.is_empty() { 0 } else { spec.bnode_triple_target() };
    let target = bnode_target + spec.ground_triples;
    let mut attempts = 0;
    let mut ground = 0;
    while g1.len() < target && attempts < 20 * target {
        attempts += 1;
        let with_bnode = g1.len() - ground < bnode_target;
        if with_bnode {
            let owner = a.choose(&mut rng).expect("non-empty").clone();
            g1.insert(vocab.around(&mut rng, &owner, &a, spec.connectivity));
        } else if g1.insert(vocab.ground(&mut rng)) {
            ground += 1;
        }
    }

    let mut perm: Vec<usize> = (0..a.len()).collect();
    perm.shuffle(&mut rng);
    let b: Vec<Term> = (0..a.len()).map(|k| Term::blank(format!("b{k}"))).collect();
    let rho = Renaming::from_pairs(a.iter().cloned().zip(perm.iter().map(|&k| b[k].clone())))?;
    let relabeled = g1.rename(&rho);

    let mut g2 = relabeled.clone();
    g2.set_id("g2");
    for _ in 0..spec.mutation_ops {
        if rng.gen_bool(0.5) && !g2.is_empty() {
            let all: Vec<Triple> = g2.iter().cloned().collect();
            g2.remove(all.choose(&mut rng).expect("non-empty"));
        } else {
            for _ in 0..20 {
                let t = if b.is_empty() || rng.gen_bool(0.3) {
                    vocab.ground(&mut rng)
                } else {
                    let owner = b.choose(&mut rng).expect("non-empty").clone();
                    vocab.around(&mut rng, &owner, &b, spec.connectivity)
                };
                if g2.insert(t) {
                    break;
                }
            }
        }
    }
    let true_delta_size = relabeled.triples().symmetric_difference(g2.triples()).count();

    let survivors = g2.bnodes();
    let pairs: Vec<(Term, Term)> = rho
        .iter()
        .filter(|(_, img)| survivors.contains(*img))
        .map(|(x, y)| (x.clone(), y.clone()))
        .collect();
    let planted = BnodeMapping::from_pairs(pairs.clone(), 0, Method::Given)?;
    let cost = mapping_cost(&g1, &g2, &planted, &EquivalenceRelation::exact());
    let truth = BnodeMapping::from_pairs(pairs, cost, Method::Given)?;
    Ok(GeneratedPair {
        g1,
        g2,
        truth,
        true_delta_size,
    })
}

/// Writes `g1.nt`, `g2.nt`, `truth.bm` and `meta.txt` into `dir`.
pub fn write_pair(dir: &Path, spec: &GenSpec, pair: &GeneratedPair) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut meta = String::new();
    let _ = writeln!(meta, "bnodes={}", spec.bnode_count);
    let _ = writeln!(meta, "ground_triples={}", spec.ground_triples);
    let _ = writeln!(meta, "bnode_triples={}", spec.bnode_triple_target());
    let _ = writeln!(meta, "connectivity={}", spec.connectivity);
    let _ = writeln!(meta, "mutations={}", spec.mutation_ops);
    let _ = writeln!(meta, "seed={}", spec.seed);
    let _ = writeln!(meta, "true_delta_size={}", pair.true_delta_size);
    let _ = writeln!(meta, "truth_cost={}", pair.truth.cost());
    for (name, body) in [
        ("g1.nt", serialize_ntriples(&pair.g1)),
        ("g2.nt", serialize_ntriples(&pair.g2)),
        ("truth.bm", pair.truth.to_bm_string()),
        ("meta.txt", meta),
    ] {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub tier: Method,
    pub cost: usize,
    /// Cost of the planted mapping, when `truth.bm` is present.
    pub optimum_bound: Option<usize>,
    pub wall_ms: f64,
}

pub const BENCH_HEADER: &str = "instance,tier,cost,optimum_bound,wall_time_ms";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let bound = self.optimum_bound.map(|b| b.to_string()).unwrap_or_default();
        format!("{},{},{},{},{:.3}", self.instance, self.tier, self.cost, bound, self.wall_ms)
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let report = parse_ntriples(std::io::BufReader::new(f)).map_err(|e| Error::Repository {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(report.graph)
}

/// Instance directories: `root` itself if it holds `g1.nt` and `g2.nt`,
/// otherwise each such immediate subdirectory, sorted by name.
pub fn find_instances(root: &Path) -> Result<Vec<PathBuf>> {
    let is_pair = |d: &Path| d.join("g1.nt").is_file() && d.join("g2.nt").is_file();
    if is_pair(root) {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let p = entry.map_err(|e| Error::io(root, e))?.path();
        if p.is_dir() && is_pair(&p) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Runs every strategy on each instance. The branch-and-bound search is
/// skipped where it would be too large.
pub fn bench(root: &Path, cfg: &MatcherConfig) -> Result<Vec<BenchRow>> {
    let rel = EquivalenceRelation::exact();
    let mut rows = Vec::new();
    for dir in find_instances(root)? {
        let g1 = read_graph(&dir.join("g1.nt"))?;
        let g2 = read_graph(&dir.join("g2.nt"))?;
        let truth_path = dir.join("truth.bm");
        let bound = if truth_path.is_file() {
            let text = fs::read_to_string(&truth_path).map_err(|e| Error::io(&truth_path, e))?;
            let truth = BnodeMapping::parse_bm(&text)?;
            Some(mapping_cost(&g1, &g2, &truth, &rel))
        } else {
            None
        };
        let instance = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        let mut tiers = vec![Method::Assignment, Method::Refinement];
        if exact_feasible(g1.bnodes().len(), g2.bnodes().len()) {
            tiers.insert(0, Method::BruteForce);
        }
        for tier in tiers {
            let start = Instant::now();
            let m = solve_with(&g1, &g2, &rel, cfg, tier);
            rows.push(BenchRow {
                instance: instance.clone(),
                tier,
                cost: m.cost(),
                optimum_bound: bound,
                wall_ms: start.elapsed().as_secs_f64() * 1000.0,
            });
        }
    }
    Ok(rows)
}
