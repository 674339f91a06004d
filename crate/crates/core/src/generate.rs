//! Seeded synthetic ranking streams.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)`, so a stream
//! is fixed by its parameters.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::oracle::Domain;
use crate::universe::{ElementId, Ranking, SymbolTable};

pub const DEFAULT_PHI: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Uniform,
    Biased,
    Mallows,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Uniform => "uniform",
            Model::Biased => "biased",
            Model::Mallows => "mallows",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Model::Uniform),
            "biased" => Ok(Model::Biased),
            "mallows" => Ok(Model::Mallows),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Parameters of one synthetic stream.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    /// Pair count of the biased model.
    pub k: Option<usize>,
    /// Dispersion of the Mallows model.
    pub phi: Option<f64>,
    /// Biased model: draw the `k` pairs once for the whole stream.
    pub fixed_pairs: bool,
    /// Real elements of the base or reference ranking; identity if absent.
    pub base: Option<Vec<ElementId>>,
}

impl GenSpec {
    pub fn new(model: Model, n: usize, m: usize, seed: u64) -> Self {
        GenSpec {
            model,
            n,
            m,
            seed,
            k: None,
            phi: None,
            fixed_pairs: false,
            base: None,
        }
    }

    /// Fills the biased `k = n` and Mallows `phi = 0.9` defaults.
    pub fn with_defaults(mut self) -> Self {
        match self.model {
            Model::Biased => self.k = self.k.or(Some(self.n)),
            Model::Mallows => self.phi = self.phi.or(Some(DEFAULT_PHI)),
            Model::Uniform => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        match self.model {
            Model::Biased if self.k.is_none() => {
                return Err(Error::Config("biased model requires k".into()))
            }
            Model::Mallows => match self.phi {
                None => return Err(Error::Config("mallows model requires phi".into())),
                Some(phi) if !(phi > 0.0 && phi <= 1.0) => return Err(Error::PhiOutOfRange(phi)),
                _ => {}
            },
            _ => {}
        }
        if self.model != Model::Biased && self.k.is_some() {
            return Err(Error::Config("k applies only to the biased model".into()));
        }
        if self.model != Model::Mallows && self.phi.is_some() {
            return Err(Error::Config(
                "phi applies only to the mallows model".into(),
            ));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Domain> {
        self.validate()?;
        let table = Arc::new(SymbolTable::numbered(self.n)?);
        let base = match &self.base {
            Some(real) => Ranking::from_real_order(table.universe(), real.clone())?,
            None => Ranking::identity(table.universe()),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let rankings = match self.model {
            Model::Uniform => uniform(&table, self.m, &mut rng),
            Model::Biased => biased(
                &table,
                self.m,
                self.k.unwrap_or(self.n),
                self.fixed_pairs,
                &base,
                &mut rng,
            ),
            Model::Mallows => mallows(
                &table,
                self.m,
                self.phi.unwrap_or(DEFAULT_PHI),
                &base,
                &mut rng,
            ),
        };
        Domain::new(table, rankings)
    }
}

pub fn gen_uniform(n: usize, m: usize, seed: u64) -> Result<Domain> {
    GenSpec::new(Model::Uniform, n, m, seed).generate()
}

pub fn gen_biased(n: usize, m: usize, k: usize, seed: u64) -> Result<Domain> {
    GenSpec {
        k: Some(k),
        ..GenSpec::new(Model::Biased, n, m, seed)
    }
    .generate()
}

pub fn gen_mallows(n: usize, m: usize, phi: f64, seed: u64) -> Result<Domain> {
    GenSpec {
        phi: Some(phi),
        ..GenSpec::new(Model::Mallows, n, m, seed)
    }
    .generate()
}

fn real_ids(table: &SymbolTable) -> Vec<ElementId> {
    (0..table.real_count() as u32).map(ElementId).collect()
}

fn uniform(table: &SymbolTable, m: usize, rng: &mut ChaCha8Rng) -> Vec<Ranking> {
    let mut ids = real_ids(table);
    (0..m)
        .map(|_| {
            ids.shuffle(rng);
            Ranking::from_real_order(table.universe(), ids.clone())
                .expect("shuffle is a permutation")
        })
        .collect()
}

/// Two distinct real elements, uniformly.
fn draw_pair(n: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn biased(
    table: &SymbolTable,
    m: usize,
    k: usize,
    fixed_pairs: bool,
    base: &Ranking,
    rng: &mut ChaCha8Rng,
) -> Vec<Ranking> {
    let n = table.real_count();
    let fixed: Vec<(usize, usize)> = if fixed_pairs && n >= 2 {
        (0..k).map(|_| draw_pair(n, rng)).collect()
    } else {
        Vec::new()
    };
    let mut ids = real_ids(table);
    // pos[e] is the 0-based slot of e in ids
    let mut pos = vec![0usize; n];
    (0..m)
        .map(|_| {
            ids.shuffle(rng);
            for (i, e) in ids.iter().enumerate() {
                pos[e.index()] = i;
            }
            if n >= 2 {
                for t in 0..k {
                    let (a, b) = match fixed.get(t) {
                        Some(&pair) => pair,
                        None => draw_pair(n, rng),
                    };
                    let (ea, eb) = (ElementId(a as u32), ElementId(b as u32));
                    let here = pos[a] < pos[b];
                    let there = base.position(ea) < base.position(eb);
                    if here != there {
                        ids.swap(pos[a], pos[b]);
                        pos.swap(a, b);
                    }
                }
            }
            Ranking::from_real_order(table.universe(), ids.clone())
                .expect("swaps keep a permutation")
        })
        .collect()
}

/// Displacement `d` in `0..i` with probability proportional to `phi^d`.
fn insertion_displacement(i: usize, phi: f64, rng: &mut ChaCha8Rng) -> usize {
    if phi >= 1.0 {
        return rng.gen_range(0..i);
    }
    let u: f64 = rng.gen();
    let mass = 1.0 - phi.powi(i as i32);
    let d = ((1.0 - u * mass).ln() / phi.ln()).floor();
    (d.max(0.0) as usize).min(i - 1)
}

fn mallows(
    table: &SymbolTable,
    m: usize,
    phi: f64,
    reference: &Ranking,
    rng: &mut ChaCha8Rng,
) -> Vec<Ranking> {
    let reference: Vec<ElementId> = reference.real_order().collect();
    let n = reference.len();
    let mut order = Vec::with_capacity(n);
    (0..m)
        .map(|_| {
            order.clear();
            for (idx, &e) in reference.iter().enumerate() {
                let i = idx + 1;
                let d = insertion_displacement(i, phi, rng);
                order.insert(i - 1 - d, e);
            }
            Ranking::from_real_order(table.universe(), order.clone())
                .expect("insertion keeps a permutation")
        })
        .collect()
}
