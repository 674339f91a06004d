//! Streaming Spearman-footrule rank aggregation.
//!
//! [`Engine`] consumes a stream of complete rankings and after every arrival
//! reports the better of two aggregations: the median-partition (LR)
//! aggregation maintained in presence-counter trees, and a reservoir sample
//! of the inputs. Both are scored exactly against the whole stream in
//! `O(n log n)` per ranking and `O(n^2)` memory: per-element rank trees
//! answer the LR cost, and a kept sample's cost grows by its distance to
//! each new ranking.
//!
//! ```
//! use rankstream::Engine;
//!
//! let mut engine = Engine::new(["a", "b", "c"], 0)?;
//! engine.push(&["b", "a", "c"])?;
//! let step = engine.push(&["b", "c", "a"])?;
//! assert_eq!(step.m, 2);
//! assert_eq!(step.best_labels(engine.table())[0], "b");
//! # Ok::<(), rankstream::Error>(())
//! ```
//!
//! The [`oracle`] module holds independent reference computations,
//! including the footrule-optimal aggregation by minimum-cost assignment.

pub mod engine;
pub mod error;
pub mod generate;
pub mod harness;
pub mod lr_aggregation;
pub mod lr_tree;
pub mod oracle;
pub mod rank_tree;
pub mod reservoir;
pub mod text;
pub mod universe;

pub use engine::{Engine, StepResult, Winner};
pub use error::{Error, Result};
pub use oracle::Domain;
pub use universe::{ElementId, Ranking, SymbolTable, Universe};
