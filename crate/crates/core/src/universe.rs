//! Element universe and ranking representation.
//!
//! Every universe is padded to `N`, the smallest power of two that is at
//! least `max(n, 2)`. The ids `n..N` are dummy elements; an input ranking
//! always carries them at positions `n+1..=N` in id order, so they contribute
//! nothing to distances between inputs.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Dense element index in `[0, N)`, assigned in first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(pub u32);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Prefix of the reserved labels given to padding elements.
pub const DUMMY_PREFIX: &str = "~pad";

/// Identity of a universe, cheap to copy into every ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    fingerprint: u64,
    real: u32,
    padded: u32,
}

impl Universe {
    /// Number of real elements `n`.
    pub fn real(&self) -> usize {
        self.real as usize
    }

    /// Padded size `N`.
    pub fn padded(&self) -> usize {
        self.padded as usize
    }

    pub fn is_dummy(&self, e: ElementId) -> bool {
        e.0 >= self.real
    }

    pub(crate) fn check(&self, other: &Universe) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::UniverseMismatch)
        }
    }
}

/// Smallest power of two `>= max(n, 2)`.
pub fn padded_size(n: usize) -> usize {
    n.max(2).next_power_of_two()
}

/// Label interning for one universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    labels: Vec<String>,
    index: HashMap<String, ElementId>,
    universe: Universe,
}

impl SymbolTable {
    /// Interns `labels` as ids `0..n` and appends dummy ids `n..N`.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut all: Vec<String> = labels.into_iter().map(Into::into).collect();
        if all.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        let real = all.len();
        let padded = padded_size(real);
        all.extend((real..padded).map(|i| format!("{DUMMY_PREFIX}{i}")));

        let mut index = HashMap::with_capacity(padded);
        for (i, label) in all.iter().enumerate() {
            if index.insert(label.clone(), ElementId(i as u32)).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }

        let mut hasher = DefaultHasher::new();
        real.hash(&mut hasher);
        all.hash(&mut hasher);
        let universe = Universe {
            fingerprint: hasher.finish(),
            real: real as u32,
            padded: padded as u32,
        };
        Ok(SymbolTable {
            labels: all,
            index,
            universe,
        })
    }

    /// Universe of `n` elements labelled `"1"..="n"`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| i.to_string()))
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn real_count(&self) -> usize {
        self.universe.real()
    }

    pub fn padded_count(&self) -> usize {
        self.universe.padded()
    }

    /// Real labels, in id order.
    pub fn real_labels(&self) -> &[String] {
        &self.labels[..self.real_count()]
    }

    pub fn label(&self, e: ElementId) -> &str {
        &self.labels[e.index()]
    }

    pub fn id(&self, label: &str) -> Option<ElementId> {
        self.index.get(label).copied()
    }

    /// Builds a padded ranking from the real labels in rank order.
    pub fn ranking<S: AsRef<str>>(&self, labels_in_order: &[S]) -> Result<Ranking> {
        let n = self.real_count();
        if labels_in_order.len() != n {
            return Err(Error::NotAPermutation(format!(
                "expected {n} labels, got {}",
                labels_in_order.len()
            )));
        }
        let mut ids = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for label in labels_in_order {
            let label = label.as_ref();
            match self.id(label) {
                Some(id) if !self.universe.is_dummy(id) => {
                    if std::mem::replace(&mut seen[id.index()], true) {
                        return Err(Error::NotAPermutation(format!("label `{label}` repeated")));
                    }
                    ids.push(id);
                }
                _ => return Err(Error::NotAPermutation(format!("unknown label `{label}`"))),
            }
        }
        Ranking::from_real_order(self.universe, ids)
    }

    /// Labels of the real elements of `ranking`, in rank order.
    pub fn labels_of<'a>(&'a self, ranking: &Ranking) -> Vec<&'a str> {
        ranking.real_order().map(|e| self.label(e)).collect()
    }
}

/// A permutation of the padded universe, with its inverse.
///
/// `order[r - 1]` is the element at rank `r`; `position[e]` is the 1-based
/// rank of element `e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    universe: Universe,
    order: Vec<ElementId>,
    position: Vec<u32>,
}

impl Ranking {
    /// Validates `order` as a permutation of `[0, N)`.
    pub fn from_order(universe: Universe, order: Vec<ElementId>) -> Result<Self> {
        let padded = universe.padded();
        if order.len() != padded {
            return Err(Error::NotAPermutation(format!(
                "expected {padded} elements, got {}",
                order.len()
            )));
        }
        let mut position = vec![0u32; padded];
        for (i, e) in order.iter().enumerate() {
            let slot = position
                .get_mut(e.index())
                .ok_or_else(|| Error::NotAPermutation(format!("{e} outside universe")))?;
            if *slot != 0 {
                return Err(Error::NotAPermutation(format!("{e} repeated")));
            }
            *slot = i as u32 + 1;
        }
        Ok(Ranking {
            universe,
            order,
            position,
        })
    }

    /// Real elements in rank order; dummies are appended in id order.
    pub fn from_real_order(universe: Universe, mut real: Vec<ElementId>) -> Result<Self> {
        let n = universe.real();
        if real.len() != n {
            return Err(Error::NotAPermutation(format!(
                "expected {n} real elements, got {}",
                real.len()
            )));
        }
        if let Some(e) = real.iter().find(|e| universe.is_dummy(**e)) {
            return Err(Error::NotAPermutation(format!("{e} is not a real element")));
        }
        real.extend((n..universe.padded()).map(|i| ElementId(i as u32)));
        Self::from_order(universe, real)
    }

    /// Elements in id order.
    pub fn identity(universe: Universe) -> Self {
        let padded = universe.padded();
        Ranking {
            universe,
            order: (0..padded as u32).map(ElementId).collect(),
            position: (1..=padded as u32).collect(),
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Padded length `N`.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[ElementId] {
        &self.order
    }

    /// 1-based rank of `e`.
    #[inline]
    pub fn position(&self, e: ElementId) -> usize {
        self.position[e.index()] as usize
    }

    /// Positions indexed by element id.
    pub fn positions(&self) -> &[u32] {
        &self.position
    }

    /// Element at 1-based `rank`.
    pub fn at(&self, rank: usize) -> ElementId {
        self.order[rank - 1]
    }

    /// Rank order with dummy elements removed.
    pub fn real_order(&self) -> impl Iterator<Item = ElementId> + '_ {
        let universe = self.universe;
        self.order
            .iter()
            .copied()
            .filter(move |e| !universe.is_dummy(*e))
    }

    /// Whether every dummy sits at the tail in id order.
    pub fn is_tail_padded(&self) -> bool {
        let n = self.universe.real();
        self.order[n..]
            .iter()
            .enumerate()
            .all(|(i, e)| e.index() == n + i)
    }

    /// The same real order re-padded with dummies at the tail.
    pub fn tail_padded(&self) -> Ranking {
        if self.is_tail_padded() {
            return self.clone();
        }
        Ranking::from_real_order(self.universe, self.real_order().collect())
            .expect("real order of a valid ranking")
    }
}
