//! Evaluation against the oracles, the experiment grid, and grade-matrix
//! ingestion.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::generate::{GenSpec, Model};
use crate::oracle::{
    average_position_aggregation, footrule_real_to_domain, median_position_aggregation,
    optimal_footrule, Domain,
};
use crate::universe::{ElementId, Ranking, SymbolTable};

/// Largest real universe the assignment oracle accepts.
pub const ORACLE_LIMIT: usize = 1024;

/// `cost / opt`; two zero costs compare as equal.
pub fn ratio(cost: u64, opt: u64) -> f64 {
    if opt == 0 {
        if cost == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        cost as f64 / opt as f64
    }
}

fn guard(n: usize) -> Result<()> {
    if n > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// Replays `domain` through one engine and returns it.
pub fn replay(domain: &Domain, seed: u64) -> Result<Engine> {
    let mut engine = Engine::with_table(domain.table().clone(), seed);
    for pi in domain.rankings() {
        engine.push_ranking(pi)?;
    }
    Ok(engine)
}

/// Index and cost of the best input ranking, scored with the engine's rank trees.
pub fn best_input(engine: &Engine, domain: &Domain) -> Result<(usize, u64)> {
    let mut best: Option<(usize, u64)> = None;
    for (i, pi) in domain.rankings().iter().enumerate() {
        let cost = engine.cost(pi)?;
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((i, cost));
        }
    }
    best.ok_or(Error::EmptyStream)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    Lr,
    Pap,
    Bir,
    Opt,
    Median,
    Average,
    Given { name: String, ranking: Ranking },
}

impl Candidate {
    pub fn name(&self) -> &str {
        match self {
            Candidate::Lr => "lr",
            Candidate::Pap => "pap",
            Candidate::Bir => "bir",
            Candidate::Opt => "opt",
            Candidate::Median => "median",
            Candidate::Average => "average",
            Candidate::Given { name, .. } => name,
        }
    }
}

impl FromStr for Candidate {
    type Err = Error;

    /// Built-in candidates only.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lr" => Candidate::Lr,
            "pap" => Candidate::Pap,
            "bir" => Candidate::Bir,
            "opt" => Candidate::Opt,
            "median" => Candidate::Median,
            "average" => Candidate::Average,
            other => return Err(Error::Config(format!("unknown candidate `{other}`"))),
        })
    }
}

/// One evaluated candidate. `None` marks a candidate that produced no
/// ranking (median with colliding medians) or a ratio without an optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub candidate: String,
    pub ranking: Option<Ranking>,
    pub cost: Option<u64>,
    pub cost_real: Option<u64>,
    pub alpha: Option<f64>,
}

/// Scores each candidate against `domain`. The optimum is computed for the
/// ratios whenever `n` is within the oracle limit; requesting `opt` beyond
/// it fails.
pub fn evaluate(domain: &Domain, candidates: &[Candidate], seed: u64) -> Result<Vec<EvalRow>> {
    if domain.m() == 0 {
        return Err(Error::EmptyStream);
    }
    let n = domain.universe().real();
    if candidates.contains(&Candidate::Opt) {
        guard(n)?;
    }
    let opt = (n <= ORACLE_LIMIT).then(|| optimal_footrule(domain));
    let needs_engine = candidates
        .iter()
        .any(|c| matches!(c, Candidate::Lr | Candidate::Pap | Candidate::Bir));
    let engine = needs_engine.then(|| replay(domain, seed)).transpose()?;

    candidates
        .iter()
        .map(|c| {
            let ranking = match c {
                Candidate::Lr | Candidate::Pap => {
                    let step = engine.as_ref().expect("engine replayed").current()?;
                    Some(if *c == Candidate::Lr {
                        step.lr.clone()
                    } else {
                        step.pap.clone()
                    })
                }
                Candidate::Bir => {
                    let (i, _) = best_input(engine.as_ref().expect("engine replayed"), domain)?;
                    Some(domain.rankings()[i].clone())
                }
                Candidate::Opt => opt.as_ref().map(|(r, _)| r.clone()),
                Candidate::Median => median_position_aggregation(domain),
                Candidate::Average => average_position_aggregation(domain),
                Candidate::Given { ranking, .. } => {
                    domain.universe().check(&ranking.universe())?;
                    Some(ranking.clone())
                }
            };
            let (cost, cost_real) = match &ranking {
                Some(r) => (
                    Some(crate::oracle::footrule_to_domain(r, domain)?),
                    Some(footrule_real_to_domain(r, domain)?),
                ),
                None => (None, None),
            };
            let alpha = cost.zip(opt.as_ref()).map(|(c, (_, o))| ratio(c, *o));
            Ok(EvalRow {
                candidate: c.name().to_owned(),
                ranking,
                cost,
                cost_real,
                alpha,
            })
        })
        .collect()
}

fn opt_cell<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn float(v: f64) -> String {
    format!("{v:.6}")
}

pub const EVAL_HEADER: [&str; 4] = ["candidate", "cost", "cost_real", "alpha"];

pub fn write_eval_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVAL_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.candidate.clone(),
            opt_cell(r.cost),
            opt_cell(r.cost_real),
            r.alpha.map(float).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// One experiment cell's result.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub model: Model,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub k: Option<usize>,
    pub phi: Option<f64>,
    pub cost_opt: u64,
    pub cost_lr: u64,
    pub cost_pap: u64,
    pub cost_bir: u64,
    /// Mean wall time of one engine push, in microseconds.
    pub push_us: f64,
    /// Wall time of the assignment oracle, in milliseconds.
    pub opt_ms: f64,
}

impl BenchRow {
    pub fn alpha_lr(&self) -> f64 {
        ratio(self.cost_lr, self.cost_opt)
    }
    pub fn alpha_pap(&self) -> f64 {
        ratio(self.cost_pap, self.cost_opt)
    }
    pub fn alpha_bir(&self) -> f64 {
        ratio(self.cost_bir, self.cost_opt)
    }
}

/// Generates the cell's stream, runs one engine over it and scores the
/// final aggregations against the optimum.
pub fn run_cell(spec: &GenSpec) -> Result<BenchRow> {
    guard(spec.n)?;
    let domain = spec.generate()?;
    let mut engine = Engine::with_table(domain.table().clone(), spec.seed);
    let start = Instant::now();
    for pi in domain.rankings() {
        engine.push_ranking(pi)?;
    }
    let push_us = start.elapsed().as_secs_f64() * 1e6 / domain.m() as f64;
    let step = engine.current()?.clone();
    let (_, cost_bir) = best_input(&engine, &domain)?;
    let start = Instant::now();
    let (_, cost_opt) = optimal_footrule(&domain);
    let opt_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRow {
        model: spec.model,
        n: spec.n,
        m: spec.m,
        seed: spec.seed,
        k: spec.k,
        phi: spec.phi,
        cost_opt,
        cost_lr: step.lr_cost,
        cost_pap: step.pap_cost,
        cost_bir,
        push_us,
        opt_ms,
    })
}

/// Runs every cell in parallel; rows come back in grid order.
pub fn bench(cells: &[GenSpec], threads: Option<usize>) -> Result<Vec<BenchRow>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| cells.par_iter().map(run_cell).collect())
}

pub const BENCH_HEADER: [&str; 16] = [
    "model",
    "n",
    "m",
    "seed",
    "k",
    "phi",
    "cost_opt",
    "cost_lr",
    "cost_pap",
    "cost_bir",
    "alpha_lr",
    "alpha_pap",
    "alpha_bir",
    "push_us",
    "opt_ms",
    "version",
];

/// Report format version written in every row.
pub const REPORT_VERSION: u32 = 1;

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.model.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.seed.to_string(),
            opt_cell(r.k),
            r.phi.map(float).unwrap_or_default(),
            r.cost_opt.to_string(),
            r.cost_lr.to_string(),
            r.cost_pap.to_string(),
            r.cost_bir.to_string(),
            float(r.alpha_lr()),
            float(r.alpha_pap()),
            float(r.alpha_bir()),
            float(r.push_us),
            float(r.opt_ms),
            REPORT_VERSION.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// A student-by-lesson grade matrix.
#[derive(Debug, Clone)]
pub struct Grades {
    table: Arc<SymbolTable>,
    lessons: Vec<String>,
    /// `grades[s][l]` for student `s` in row order.
    grades: Vec<Vec<f64>>,
}

impl Grades {
    /// Header row of lesson names after a label column, then one row per
    /// student.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = reader.headers().map_err(csv_err)?.clone();
        let lessons: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        if lessons.is_empty() {
            return Err(Error::Parse("grade table has no lesson columns".into()));
        }
        let mut students = Vec::new();
        let mut grades = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| csv_err(e).at_line(line))?;
            let student = record.get(0).unwrap_or_default().to_owned();
            let found = record.len().saturating_sub(1);
            if found != lessons.len() {
                return Err(Error::RaggedRows {
                    student,
                    found,
                    expected: lessons.len(),
                }
                .at_line(line));
            }
            let row = record
                .iter()
                .skip(1)
                .map(|v| match v.parse::<f64>() {
                    Ok(g) if g.is_finite() => Ok(g),
                    _ => Err(Error::NonNumericGrade {
                        student: student.clone(),
                        value: v.to_owned(),
                    }
                    .at_line(line)),
                })
                .collect::<Result<Vec<_>>>()?;
            students.push(student);
            grades.push(row);
        }
        Ok(Grades {
            table: Arc::new(SymbolTable::new(students)?),
            lessons,
            grades,
        })
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn lessons(&self) -> &[String] {
        &self.lessons
    }

    /// Students by descending key; equal keys keep row order.
    fn ranking_by(&self, key: impl Fn(&[f64]) -> f64) -> Ranking {
        let keys: Vec<f64> = self.grades.iter().map(|g| key(g)).collect();
        let mut ids: Vec<ElementId> = (0..keys.len() as u32).map(ElementId).collect();
        ids.sort_by(|a, b| keys[b.index()].total_cmp(&keys[a.index()]));
        Ranking::from_real_order(self.table.universe(), ids)
            .expect("sorted students form a permutation")
    }

    /// One ranking per lesson, best grade first, ties by row order.
    pub fn lesson_rankings(&self) -> Domain {
        let rankings = (0..self.lessons.len())
            .map(|l| self.ranking_by(|g| g[l]))
            .collect();
        Domain::new(self.table.clone(), rankings).expect("rankings share the table")
    }

    /// Students by descending mean grade, ties by row order.
    pub fn average_ranking(&self) -> Ranking {
        let lessons = self.lessons.len() as f64;
        self.ranking_by(|g| g.iter().sum::<f64>() / lessons)
    }
}
