//! Rankings text format: one ranking per line, labels separated by spaces
//! or commas, `#` starting a comment line. The label set comes from the
//! first data line.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::Domain;
use crate::universe::{Ranking, SymbolTable};

/// Labels of one data line.
pub fn split_labels(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Data lines of a rankings file with their 1-based line numbers.
pub struct DataLines<R> {
    reader: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> DataLines<R> {
    pub fn new(reader: R) -> Self {
        DataLines {
            reader,
            line: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for DataLines<R> {
    type Item = Result<(usize, Vec<String>)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Error::from(e).at_line(self.line))),
            }
            let trimmed = self.buf.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let labels = split_labels(trimmed)
                .into_iter()
                .map(str::to_owned)
                .collect();
            return Some(Ok((self.line, labels)));
        }
    }
}

/// Reads every ranking; errors carry the offending line number.
pub fn read_domain<R: BufRead>(reader: R) -> Result<Domain> {
    let mut table: Option<Arc<SymbolTable>> = None;
    let mut rankings = Vec::new();
    for item in DataLines::new(reader) {
        let (line, labels) = item?;
        let t = match &table {
            Some(t) => t,
            None => table.insert(Arc::new(
                SymbolTable::new(labels.iter().cloned()).map_err(|e| e.at_line(line))?,
            )),
        };
        rankings.push(t.ranking(&labels).map_err(|e| e.at_line(line))?);
    }
    let table = table.ok_or_else(|| Error::Parse("no rankings in input".into()))?;
    Domain::new(table, rankings)
}

pub fn parse_domain(text: &str) -> Result<Domain> {
    read_domain(text.as_bytes())
}

/// Real labels of `ranking`, space separated.
pub fn format_ranking(table: &SymbolTable, ranking: &Ranking) -> String {
    table.labels_of(ranking).join(" ")
}

pub fn write_domain<W: Write>(domain: &Domain, mut out: W) -> Result<()> {
    for r in domain.rankings() {
        writeln!(out, "{}", format_ranking(domain.table(), r))?;
    }
    out.flush()?;
    Ok(())
}
