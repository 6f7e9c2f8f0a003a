//! Bundled invariant tables. Cells are stored exactly as typeset (LaTeX,
//! including typos); everything here parses them into comparable values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shtuka_core::tate::KodairaType;

use crate::CliError;

const TABLES_JSON: &str = include_str!("../fixtures/tables.json");

/// How the types column of a table is laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellFormat {
    /// `(K, n)`: one entry per place, `n` its degree.
    Places,
    /// `K × n`: the census over the algebraic closure.
    Closure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub q: u64,
    /// `None` on tables stated for generic `(P, Q)`.
    #[serde(rename = "P")]
    pub p: Option<String>,
    #[serde(rename = "Q")]
    pub q_val: Option<String>,
    pub b2: i64,
    #[serde(rename = "rank_T")]
    pub rank_t: i64,
    pub bf: u32,
    pub types: String,
}

/// The closed-form rows at the bottom of a table (conjectural for even q).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaRow {
    pub q: String,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q")]
    pub q_val: String,
    pub b2: String,
    #[serde(rename = "rank_T")]
    pub rank_t: String,
    pub bf: String,
    pub types: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableFixture {
    pub table: u8,
    pub part: Option<u8>,
    pub shape: String,
    pub caption: String,
    pub format: CellFormat,
    pub rows: Vec<FixtureRow>,
    pub formula_rows: Vec<FormulaRow>,
}

impl TableFixture {
    /// Rows are checked through specialization trials when the table gives
    /// no `(P, Q)`.
    pub fn is_generic(&self) -> bool {
        self.rows.iter().all(|r| r.p.is_none())
    }

    pub fn label(&self) -> String {
        match self.part {
            Some(p) => format!("{}.{}", self.table, p),
            None => self.table.to_string(),
        }
    }
}

pub fn all_tables() -> Vec<TableFixture> {
    serde_json::from_str(TABLES_JSON).expect("bundled fixtures parse")
}

/// Fixtures for table `id` (every part).
pub fn table(id: u8) -> Result<Vec<TableFixture>, CliError> {
    let t: Vec<TableFixture> = all_tables().into_iter().filter(|t| t.table == id).collect();
    if t.is_empty() {
        return Err(CliError::Usage(format!("no table {id}; tables are 1 to 5")));
    }
    Ok(t)
}

/// Strips math-mode markup: `$`, `\text{..}`, braces, `^*`, `\times`.
pub fn normalize_cell(s: &str) -> String {
    let mut t = s.replace('$', "");
    for cmd in ["\\textnormal", "\\text", "\\mathrm"] {
        t = t.replace(cmd, "");
    }
    t = t.replace("\\times", "×");
    t = t.replace(['{', '}'], "");
    t = t.replace("^*", "*");
    t.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `(K, n)` groups. Tolerates a missing comma inside or between groups.
pub fn parse_places(cell: &str) -> Result<Vec<(KodairaType, u32)>, CliError> {
    let t = normalize_cell(cell);
    let bad = || CliError::Fixture(format!("cannot parse places cell {cell:?}"));
    let mut out = Vec::new();
    let mut rest = t.as_str();
    while let Some(open) = rest.find('(') {
        let close = rest[open..].find(')').ok_or_else(bad)? + open;
        let inner = rest[open + 1..close].replace(',', " ");
        let mut parts: Vec<&str> = inner.split_whitespace().collect();
        let n: u32 = parts.pop().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
        let k = KodairaType::parse(&parts.concat()).ok_or_else(bad)?;
        out.push((k, n));
        rest = &rest[close + 1..];
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// `K × n, K, ...` items.
pub fn parse_closure(cell: &str) -> Result<Vec<(KodairaType, u32)>, CliError> {
    let t = normalize_cell(cell);
    let bad = || CliError::Fixture(format!("cannot parse census cell {cell:?}"));
    t.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|item| {
            let (k, n) = match item.split_once('×') {
                Some((k, n)) => (k, n.trim().parse().map_err(|_| bad())?),
                None => (item, 1),
            };
            Ok((KodairaType::parse(k).ok_or_else(bad)?, n))
        })
        .collect()
}

/// Census over the algebraic closure: type to number of geometric fibers.
pub type Census = BTreeMap<KodairaType, u32>;

pub fn census_of(entries: &[(KodairaType, u32)]) -> Census {
    let mut c = Census::new();
    for (k, n) in entries {
        *c.entry(*k).or_default() += n;
    }
    c
}

pub fn format_census(c: &Census) -> String {
    // largest fibers first, as in the tables
    let mut v: Vec<(&KodairaType, &u32)> = c.iter().collect();
    v.sort_by(|a, b| b.0.cmp(a.0));
    v.iter()
        .map(|(k, n)| {
            if **n == 1 {
                k.to_string()
            } else {
                format!("{k}×{n}")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Expected census of a row, whatever the table's format.
pub fn expected_census(t: &TableFixture, row: &FixtureRow) -> Result<Census, CliError> {
    let entries = match t.format {
        CellFormat::Places => parse_places(&row.types)?,
        CellFormat::Closure => parse_closure(&row.types)?,
    };
    Ok(census_of(&entries))
}
