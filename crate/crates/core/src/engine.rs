//! Streaming engine: LR aggregation and a reservoir sample, each scored
//! against the whole stream after every arrival.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lr_aggregation::{AggEntry, AggregationArray};
use crate::lr_tree::{LrForest, LrNode};
use crate::oracle::footrule;
use crate::rank_tree::{Counts, RankForest};
use crate::reservoir::{Reservoir, RngState};
use crate::universe::{ElementId, Ranking, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    Lr,
    Pap,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Lr => "lr",
            Winner::Pap => "pap",
        })
    }
}

/// Longest stream an engine accepts; tree counters are 32-bit.
pub const MAX_RANKINGS: u64 = u32::MAX as u64;

/// Outcome of one push. Rankings are over the padded universe and costs
/// include the constant dummy contribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub m: u64,
    pub lr: Ranking,
    pub pap: Ranking,
    pub lr_cost: u64,
    pub pap_cost: u64,
    pub winner: Winner,
}

impl StepResult {
    pub fn best(&self) -> &Ranking {
        match self.winner {
            Winner::Lr => &self.lr,
            Winner::Pap => &self.pap,
        }
    }

    pub fn best_cost(&self) -> u64 {
        self.lr_cost.min(self.pap_cost)
    }

    /// Labels of the winning ranking with dummies stripped.
    pub fn best_labels<'a>(&self, table: &'a SymbolTable) -> Vec<&'a str> {
        table.labels_of(self.best())
    }
}

pub type Observer = Box<dyn FnMut(&StepResult) + Send>;

pub struct Engine {
    table: Arc<SymbolTable>,
    seed: u64,
    lr_forest: LrForest,
    agg: AggregationArray,
    ranks: RankForest,
    reservoir: Reservoir,
    m: u64,
    last: Option<StepResult>,
    observer: Option<Observer>,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("n", &self.table.real_count())
            .field("padded", &self.table.padded_count())
            .field("m", &self.m)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl Engine {
    pub fn new<I, S>(labels: I, seed: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Ok(Self::with_table(Arc::new(SymbolTable::new(labels)?), seed))
    }

    pub fn with_table(table: Arc<SymbolTable>, seed: u64) -> Self {
        let u = table.universe();
        Engine {
            seed,
            lr_forest: LrForest::new(u),
            agg: AggregationArray::new(u),
            ranks: RankForest::new(u),
            reservoir: Reservoir::new(u, seed),
            m: 0,
            last: None,
            observer: None,
            table,
        }
    }

    pub fn table(&self) -> &Arc<SymbolTable> {
        &self.table
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Called with every step result after it is computed.
    pub fn set_observer(&mut self, observer: Option<Observer>) {
        self.observer = observer;
    }

    /// Pushes a ranking given as real labels, best first.
    pub fn push<S: AsRef<str>>(&mut self, labels_in_order: &[S]) -> Result<StepResult> {
        let pi = self.table.ranking(labels_in_order)?;
        self.push_ranking(&pi)
    }

    pub fn push_ranking(&mut self, pi: &Ranking) -> Result<StepResult> {
        self.table.universe().check(&pi.universe())?;
        if !pi.is_tail_padded() {
            return Err(Error::NotAPermutation(
                "dummy elements must trail in id order".into(),
            ));
        }
        if self.m >= MAX_RANKINGS {
            return Err(Error::StreamFull {
                limit: MAX_RANKINGS,
            });
        }
        self.agg.aggregate(pi, &mut self.lr_forest)?;
        self.ranks.absorb(pi)?;
        let replaced = self.reservoir.offer(pi)?;
        let lr = self.agg.ranking();
        let pap = self
            .reservoir
            .sample()
            .expect("reservoir holds a sample after an offer")
            .clone();
        let lr_cost = self.ranks.footrule(&lr)?;
        // a kept sample's cost grows by its distance to the new ranking
        let pap_cost = match &self.last {
            Some(last) if !replaced => last.pap_cost + footrule(&pap, pi)?,
            _ => self.ranks.footrule(&pap)?,
        };
        debug_assert_eq!(Ok(pap_cost), self.ranks.footrule(&pap));
        let winner = if lr_cost < pap_cost {
            Winner::Lr
        } else {
            Winner::Pap
        };
        self.m += 1;
        let step = StepResult {
            m: self.m,
            lr,
            pap,
            lr_cost,
            pap_cost,
            winner,
        };
        if let Some(obs) = &mut self.observer {
            obs(&step);
        }
        self.last = Some(step.clone());
        Ok(step)
    }

    pub fn current(&self) -> Result<&StepResult> {
        self.last.as_ref().ok_or(Error::EmptyStream)
    }

    /// Footrule distance from `pi` to every ranking pushed so far.
    pub fn cost(&self, pi: &Ranking) -> Result<u64> {
        self.ranks.footrule(pi)
    }

    /// Heap bytes held by the engine's state.
    pub fn state_bytes(&self) -> usize {
        let ranking_bytes = |r: &Ranking| {
            std::mem::size_of_val(r.order()) + std::mem::size_of_val(r.positions())
        };
        let sample = self.reservoir.sample().map_or(0, ranking_bytes);
        let last = self
            .last
            .as_ref()
            .map_or(0, |s| ranking_bytes(&s.lr) + ranking_bytes(&s.pap));
        self.lr_forest.heap_bytes()
            + self.ranks.heap_bytes()
            + std::mem::size_of_val(self.agg.entries()) * 2
            + sample
            + last
    }

    /// Serializes the full state. The observer is not included.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(VERSION);
        w.u64(self.seed);
        let labels = self.table.real_labels();
        w.u64(labels.len() as u64);
        for label in labels {
            w.u64(label.len() as u64);
            w.bytes(label.as_bytes());
        }
        let counters = self.lr_forest.counters();
        w.u64(counters.len() as u64);
        counters.iter().for_each(|&c| w.u32(c));
        let entries = self.agg.entries();
        w.u64(entries.len() as u64);
        for e in entries {
            w.u32(e.element.0);
            w.u32(e.cursor.0);
            w.i64(e.score);
        }
        let nodes = self.ranks.nodes();
        w.u64(nodes.len() as u64);
        for n in nodes {
            w.u64(n.sum);
            w.u32(n.size);
        }
        w.ranking_opt(self.reservoir.sample());
        w.u64(self.reservoir.seen());
        let rng = self.reservoir.rng_state();
        w.bytes(&rng.seed);
        w.u64(rng.stream);
        w.u128(rng.word_pos);
        w.u64(self.m);
        match &self.last {
            None => w.u8(0),
            Some(s) => {
                w.u8(1);
                w.u64(s.m);
                w.ranking(&s.lr);
                w.ranking(&s.pap);
                w.u64(s.lr_cost);
                w.u64(s.pap_cost);
                w.u8(matches!(s.winner, Winner::Pap) as u8);
            }
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let seed = r.u64()?;
        let count = r.len()?;
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let len = r.len()?;
            let raw = r.take(len)?;
            labels.push(
                String::from_utf8(raw.to_vec())
                    .map_err(|_| Error::Snapshot("label is not UTF-8".into()))?,
            );
        }
        let table = Arc::new(SymbolTable::new(labels)?);
        let u = table.universe();
        let padded = u.padded();

        let count = r.len()?;
        let counters = (0..count).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let lr_forest = LrForest::from_counters(padded, counters)?;

        let count = r.len()?;
        if count != padded {
            return Err(Error::Snapshot(
                "aggregation array has the wrong length".into(),
            ));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            entries.push(AggEntry {
                element: ElementId(r.u32()?),
                cursor: LrNode(r.u32()?),
                score: r.i64()?,
            });
        }
        let order = Ranking::from_order(u, entries.iter().map(|e| e.element).collect())
            .map_err(|e| Error::Snapshot(e.to_string()))?;
        let mut agg = AggregationArray::from_ranking(&order);
        agg.entries_mut().copy_from_slice(&entries);

        let count = r.len()?;
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            nodes.push(Counts {
                sum: r.u64()?,
                size: r.u32()?,
            });
        }
        let ranks = RankForest::from_nodes(u, nodes)?;

        let sample = r.ranking_opt(&table)?;
        let seen = r.u64()?;
        let mut rng_seed = [0u8; 32];
        rng_seed.copy_from_slice(r.take(32)?);
        let rng = RngState {
            seed: rng_seed,
            stream: r.u64()?,
            word_pos: r.u128()?,
        };
        let reservoir = Reservoir::from_parts(u, sample, seen, rng.restore());
        let m = r.u64()?;
        let last = match r.u8()? {
            0 => None,
            1 => Some(StepResult {
                m: r.u64()?,
                lr: r.ranking(&table)?,
                pap: r.ranking(&table)?,
                lr_cost: r.u64()?,
                pap_cost: r.u64()?,
                winner: if r.u8()? == 0 {
                    Winner::Lr
                } else {
                    Winner::Pap
                },
            }),
            t => return Err(Error::Snapshot(format!("bad result tag {t}"))),
        };
        if r.pos != bytes.len() {
            return Err(Error::Snapshot("trailing bytes".into()));
        }
        if lr_forest.absorbed() as u64 != m || reservoir.seen() != m {
            return Err(Error::Snapshot("stream counters disagree".into()));
        }
        let consistent = match &last {
            None => m == 0,
            Some(s) => {
                s.m == m
                    && Some(&s.pap) == reservoir.sample()
                    && ranks.footrule(&s.pap)? == s.pap_cost
            }
        };
        if !consistent {
            return Err(Error::Snapshot(
                "last result disagrees with the state".into(),
            ));
        }
        Ok(Engine {
            table,
            seed,
            lr_forest,
            agg,
            ranks,
            reservoir,
            m,
            last,
            observer: None,
        })
    }
}

const MAGIC: &[u8] = b"RSTRM";
const VERSION: u32 = 1;

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.bytes(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.bytes(&v.to_le_bytes());
    }
    fn ranking(&mut self, r: &Ranking) {
        self.u64(r.len() as u64);
        r.order().iter().for_each(|e| self.u32(e.0));
    }
    fn ranking_opt(&mut self, r: Option<&Ranking>) {
        match r {
            None => self.u8(0),
            Some(r) => {
                self.u8(1);
                self.ranking(r);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&end| end <= self.buf.len())
            .ok_or_else(|| Error::Snapshot("truncated".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("slice has length K"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.array()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.array()?))
    }
    /// A length prefix, bounded by the remaining input.
    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > (self.buf.len() - self.pos) as u64 {
            return Err(Error::Snapshot("length prefix exceeds input".into()));
        }
        Ok(v as usize)
    }
    fn ranking(&mut self, table: &SymbolTable) -> Result<Ranking> {
        let len = self.len()?;
        let order = (0..len)
            .map(|_| self.u32().map(ElementId))
            .collect::<Result<Vec<_>>>()?;
        Ranking::from_order(table.universe(), order).map_err(|e| Error::Snapshot(e.to_string()))
    }
    fn ranking_opt(&mut self, table: &SymbolTable) -> Result<Option<Ranking>> {
        match self.u8()? {
            0 => Ok(None),
            1 => self.ranking(table).map(Some),
            t => Err(Error::Snapshot(format!("bad sample tag {t}"))),
        }
    }
}
