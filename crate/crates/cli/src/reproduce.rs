//! Table reproduction: build and analyze each fixture row, compare with the
//! printed invariants and report PASS, FAIL or SKIPPED with a diff.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shtuka_core::moduli::Deg4Shape;
use shtuka_core::tate::KodairaType;

use crate::fixtures::{
    census_of, expected_census, format_census, table, CellFormat, FixtureRow, FormulaRow,
    TableFixture,
};
use crate::pipeline::{analyze, default_specs, AnalyzeOptions, BuildRequest, SurfaceSpec};
use crate::CliError;

pub const REPRODUCE_VERSION: u32 = 1;
pub const DEFAULT_BUDGET_SECONDS: f64 = 60.0;
pub const DEFAULT_TRIALS: usize = 6;

/// Which `(P, Q)` to try on rows printed without them.
#[derive(Clone, Debug, PartialEq)]
pub enum TrialSpec {
    /// The first `n` admissible pairs in enumeration order.
    Default(usize),
    /// Explicit pairs, as value expressions.
    Pairs(Vec<(String, String)>),
}

impl TrialSpec {
    /// `6` or `1,2;α_9,α_9^2`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if let Ok(n) = s.trim().parse::<usize>() {
            if n == 0 {
                return Err(CliError::Usage("--trials needs at least one pair".into()));
            }
            return Ok(TrialSpec::Default(n));
        }
        let pairs = s
            .split(';')
            .map(|pq| {
                let pq = pq.trim().trim_start_matches('(').trim_end_matches(')');
                pq.split_once(',')
                    .map(|(p, q)| (p.trim().to_string(), q.trim().to_string()))
                    .ok_or_else(|| CliError::Usage(format!("bad trial pair {pq:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TrialSpec::Pairs(pairs))
    }
}

impl Default for TrialSpec {
    fn default() -> Self {
        TrialSpec::Default(DEFAULT_TRIALS)
    }
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    /// Values of `q` to run; `None` for every row.
    pub rows: Option<Vec<u64>>,
    pub trials: TrialSpec,
    pub budget_seconds: f64,
    pub analyze: AnalyzeOptions,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            rows: None,
            trials: TrialSpec::default(),
            budget_seconds: DEFAULT_BUDGET_SECONDS,
            analyze: AnalyzeOptions::default(),
        }
    }
}

/// `q=2,q=3` or `2,3`.
pub fn parse_rows(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            x.strip_prefix("q=")
                .unwrap_or(x)
                .parse()
                .map_err(|_| CliError::Usage(format!("bad row selector {x:?}")))
        })
        .collect()
}

/// A priori worst-case running time of one build-and-analyze, in seconds.
/// In characteristic 2 and 3 the point search may try every polynomial of
/// degree ≤ `deg_bound` over `F_s`, each costing about `q²`; Tate's
/// algorithm runs over `~12(q+1)` candidate places. Constants are fitted to
/// the slowest observed rows with a safety factor of about 3.
pub fn estimate_seconds(spec: &SurfaceSpec, deg_bound: u32) -> f64 {
    let s = spec.field.order() as f64;
    let q = spec.q as f64;
    let search = if spec.field.characteristic() < 5 {
        1.7e-4 * q * q * s.powi(deg_bound as i32 + 1)
    } else {
        0.0
    };
    let tate = 2e-5 * (q + 1.0).powi(3) * spec.field.degree() as f64;
    search + tate
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observed {
    pub b2: i64,
    #[serde(rename = "rank_T")]
    pub rank_t: i64,
    pub bf: u32,
    pub pa: i64,
    /// Upper bound for `pₐ` from the multidegree.
    pub pa_bound: i64,
    /// Closure census, largest fibers first.
    pub census: String,
    /// Places over the working field with their degrees.
    pub places: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TrialOutcome {
    Match { observed: Observed },
    Mismatch { observed: Observed },
    Error { message: String },
    OverBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q")]
    pub q_val: String,
    pub field: String,
    pub estimate_seconds: f64,
    #[serde(flatten)]
    pub outcome: TrialOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowStatus {
    Pass,
    Fail,
    Skipped,
}

impl std::fmt::Display for RowStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RowStatus::Pass => "PASS",
            RowStatus::Fail => "FAIL",
            RowStatus::Skipped => "SKIPPED",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(rename = "P")]
    pub p: Option<String>,
    #[serde(rename = "Q")]
    pub q_val: Option<String>,
    pub b2: i64,
    #[serde(rename = "rank_T")]
    pub rank_t: i64,
    pub bf: u32,
    /// The cell as printed.
    pub types: String,
    pub census: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowOutcome {
    pub table: String,
    pub shape: String,
    pub q: u64,
    pub status: RowStatus,
    pub expected: Expected,
    pub trials: Vec<TrialRecord>,
    pub diff: Vec<String>,
    /// Informational comparisons (place degrees, closed forms).
    pub notes: Vec<String>,
}

impl RowOutcome {
    /// The trial that decided the status: the match, else the first
    /// analyzed trial.
    pub fn decisive(&self) -> Option<&TrialRecord> {
        self.trials
            .iter()
            .find(|t| matches!(t.outcome, TrialOutcome::Match { .. }))
            .or_else(|| {
                self.trials
                    .iter()
                    .find(|t| matches!(t.outcome, TrialOutcome::Mismatch { .. }))
            })
    }

    pub fn observed(&self) -> Option<&Observed> {
        match &self.decisive()?.outcome {
            TrialOutcome::Match { observed } | TrialOutcome::Mismatch { observed } => {
                Some(observed)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub version: u32,
    pub table: u8,
    pub budget_seconds: f64,
    pub rows: Vec<RowOutcome>,
    pub summary: Summary,
}

impl ReproduceReport {
    pub fn all_pass_or_skip(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn row(&self, q: u64) -> Option<&RowOutcome> {
        self.rows.iter().find(|r| r.q == q)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!("table {} q={}: {}", r.table, r.q, r.status));
            if let (Some(t), Some(o)) = (r.decisive(), r.observed()) {
                out.push_str(&format!(
                    "  (P,Q)=({},{}) over {}  b2={} rkT={} #BF={} [{}]",
                    t.p, t.q_val, t.field, o.b2, o.rank_t, o.bf, o.census
                ));
            }
            out.push('\n');
            for t in &r.trials {
                match &t.outcome {
                    TrialOutcome::Error { message } => out.push_str(&format!(
                        "  trial ({},{}) over {}: {message}\n",
                        t.p, t.q_val, t.field
                    )),
                    TrialOutcome::OverBudget => out.push_str(&format!(
                        "  trial ({},{}) over {}: estimated {:.0} s exceeds budget\n",
                        t.p, t.q_val, t.field, t.estimate_seconds
                    )),
                    _ => {}
                }
            }
            for d in &r.diff {
                out.push_str(&format!("  {d}\n"));
            }
            for n in &r.notes {
                out.push_str(&format!("  note: {n}\n"));
            }
        }
        out.push_str(&format!(
            "summary: {} passed, {} failed, {} skipped\n",
            self.summary.pass, self.summary.fail, self.summary.skipped
        ));
        out
    }
}

fn trial_specs(
    t: &TableFixture,
    row: &FixtureRow,
    trials: &TrialSpec,
) -> Result<Vec<Result<SurfaceSpec, (String, String, CliError)>>, CliError> {
    let request = |p: &str, q: &str| BuildRequest {
        shape: t.shape.clone(),
        q: row.q,
        p: Some(p.to_string()),
        q_val: Some(q.to_string()),
        r: None,
    };
    let resolve = |p: &str, q: &str| {
        SurfaceSpec::resolve(&request(p, q)).map_err(|e| (p.to_string(), q.to_string(), e))
    };
    if let (Some(p), Some(q)) = (&row.p, &row.q_val) {
        return Ok(vec![resolve(p, q)]);
    }
    match trials {
        TrialSpec::Pairs(pairs) => Ok(pairs.iter().map(|(p, q)| resolve(p, q)).collect()),
        TrialSpec::Default(n) => {
            let shape = Deg4Shape::parse(&t.shape).map_err(|e| CliError::Fixture(e.to_string()))?;
            Ok(default_specs(shape, row.q, *n)?
                .into_iter()
                .map(Ok)
                .collect())
        }
    }
}

fn observe(spec: &SurfaceSpec, opts: AnalyzeOptions) -> Result<Observed, CliError> {
    let tf = spec.build()?;
    let a = analyze(spec, &tf, opts)?;
    let s = &a.surface;
    let entries: Vec<(KodairaType, u32)> = s
        .closure_census
        .iter()
        .map(|c| {
            (
                KodairaType::parse(&c.kind).expect("census labels parse"),
                c.count,
            )
        })
        .collect();
    Ok(Observed {
        b2: s.b2,
        rank_t: s.rank_t,
        bf: s.bad_fibers,
        pa: s.pa,
        pa_bound: a.pa_bound,
        census: format_census(&census_of(&entries)),
        places: s.places_row(),
    })
}

fn sorted_places(cell: &str) -> Result<Vec<(KodairaType, u32)>, CliError> {
    let mut v = crate::fixtures::parse_places(cell)?;
    v.sort();
    Ok(v)
}

fn unified_diff(row: &RowOutcome, obs: &Observed, trial: &TrialRecord) -> Vec<String> {
    let e = &row.expected;
    let mut d = vec![
        format!("--- table {} q={} (printed)", row.table, row.q),
        format!(
            "+++ (P,Q)=({},{}) over {} (computed)",
            trial.p, trial.q_val, trial.field
        ),
    ];
    let fields = [
        ("b2", e.b2.to_string(), obs.b2.to_string()),
        ("rank_T", e.rank_t.to_string(), obs.rank_t.to_string()),
        ("#BF", e.bf.to_string(), obs.bf.to_string()),
        ("types", e.census.clone(), obs.census.clone()),
    ];
    for (name, a, b) in fields {
        if a == b {
            d.push(format!(" {name} = {a}"));
        } else {
            d.push(format!("-{name} = {a}"));
            d.push(format!("+{name} = {b}"));
        }
    }
    d
}

/// `3q + 10`, `8q`, `12q - 2`, `2`; `None` when not of that form.
pub fn eval_linear(expr: &str, q: u64) -> Option<i64> {
    let t: String = expr
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '$')
        .collect();
    if t.is_empty() {
        return None;
    }
    let mut total = 0i64;
    let mut term = String::new();
    let flush = |term: &mut String, total: &mut i64| -> Option<()> {
        if term.is_empty() {
            return Some(());
        }
        let (sign, body) = match term.strip_prefix('-') {
            Some(b) => (-1, b),
            None => (1, term.trim_start_matches('+')),
        };
        let v = match body.strip_suffix('q') {
            Some("") => q as i64,
            Some(c) => c.parse::<i64>().ok()? * q as i64,
            None => body.parse::<i64>().ok()?,
        };
        *total += sign * v;
        term.clear();
        Some(())
    };
    for c in t.chars() {
        if (c == '+' || c == '-') && !term.is_empty() {
            flush(&mut term, &mut total)?;
        }
        term.push(c);
    }
    flush(&mut term, &mut total)?;
    Some(total)
}

fn formula_applies(f: &FormulaRow, q: u64) -> bool {
    let label = f.q.replace(' ', "");
    let parity = if label.contains("even") {
        q % 2 == 0
    } else if label.contains("odd") {
        q % 2 == 1
    } else {
        true
    };
    parity && (!label.contains(">2") || q > 2)
}

fn formula_notes(t: &TableFixture, row: &FixtureRow, obs: &Observed) -> Vec<String> {
    let mut notes = Vec::new();
    for f in t.formula_rows.iter().filter(|f| formula_applies(f, row.q)) {
        let mut parts = Vec::new();
        for (name, expr, got) in [
            ("b2", &f.b2, obs.b2),
            ("rank_T", &f.rank_t, obs.rank_t),
            ("#BF", &f.bf, obs.bf as i64),
        ] {
            if let Some(v) = eval_linear(expr, row.q) {
                let mark = if v == got { "agrees" } else { "differs" };
                parts.push(format!("{name} {v} {mark}"));
            }
        }
        if !parts.is_empty() {
            let label = f.q.replace('$', "");
            notes.push(format!("closed form for {label}: {}", parts.join(", ")));
        }
    }
    notes
}

fn run_row(
    t: &TableFixture,
    row: &FixtureRow,
    opts: &ReproduceOptions,
) -> Result<RowOutcome, CliError> {
    let expected_c = expected_census(t, row)?;
    let expected = Expected {
        p: row.p.clone(),
        q_val: row.q_val.clone(),
        b2: row.b2,
        rank_t: row.rank_t,
        bf: row.bf,
        types: row.types.clone(),
        census: format_census(&expected_c),
    };
    let mut out = RowOutcome {
        table: t.label(),
        shape: t.shape.clone(),
        q: row.q,
        status: RowStatus::Skipped,
        expected,
        trials: Vec::new(),
        diff: Vec::new(),
        notes: Vec::new(),
    };
    for spec in trial_specs(t, row, &opts.trials)? {
        let spec = match spec {
            Ok(s) => s,
            Err((p, q, e)) => {
                out.trials.push(TrialRecord {
                    p,
                    q_val: q,
                    field: "-".into(),
                    estimate_seconds: 0.0,
                    outcome: TrialOutcome::Error {
                        message: e.to_string(),
                    },
                });
                continue;
            }
        };
        let f = &spec.field;
        let est = estimate_seconds(&spec, opts.analyze.deg_bound);
        let mut rec = TrialRecord {
            p: f.display(spec.p),
            q_val: f.display(spec.q_val),
            field: spec.field_label(),
            estimate_seconds: (est * 10.0).round() / 10.0,
            outcome: TrialOutcome::OverBudget,
        };
        if est <= opts.budget_seconds {
            rec.outcome = match observe(&spec, opts.analyze) {
                Err(e) => TrialOutcome::Error {
                    message: e.to_string(),
                },
                Ok(obs) => {
                    let same = obs.b2 == row.b2
                        && obs.rank_t == row.rank_t
                        && obs.bf == row.bf
                        && obs.census == out.expected.census;
                    if same {
                        TrialOutcome::Match { observed: obs }
                    } else {
                        TrialOutcome::Mismatch { observed: obs }
                    }
                }
            };
        }
        let done = matches!(rec.outcome, TrialOutcome::Match { .. });
        out.trials.push(rec);
        if done {
            break;
        }
    }
    let analyzed = out.trials.iter().any(|t| {
        matches!(
            t.outcome,
            TrialOutcome::Match { .. } | TrialOutcome::Mismatch { .. }
        )
    });
    let matched = out
        .trials
        .iter()
        .any(|t| matches!(t.outcome, TrialOutcome::Match { .. }));
    let any_error = out
        .trials
        .iter()
        .any(|t| matches!(t.outcome, TrialOutcome::Error { .. }));
    out.status = if matched {
        RowStatus::Pass
    } else if analyzed || any_error {
        RowStatus::Fail
    } else {
        RowStatus::Skipped
    };
    if let (Some(trial), Some(obs)) = (out.decisive().cloned(), out.observed().cloned()) {
        if out.status == RowStatus::Fail {
            out.diff = unified_diff(&out, &obs, &trial);
        }
        if t.format == CellFormat::Places {
            let printed = sorted_places(&row.types)?;
            let mark = if printed == sorted_places(&obs.places)? {
                "same as printed"
            } else {
                "printed degrees differ"
            };
            out.notes.push(format!(
                "places over {}: {} ({mark})",
                trial.field, obs.places
            ));
        }
        out.notes.extend(formula_notes(t, row, &obs));
    }
    if out.status == RowStatus::Pass {
        // specializations that do not realize the printed row
        let others: Vec<String> = out
            .trials
            .iter()
            .filter_map(|t| match &t.outcome {
                TrialOutcome::Mismatch { observed } => {
                    Some(format!("({},{}) gives [{}]", t.p, t.q_val, observed.census))
                }
                TrialOutcome::Error { .. } => Some(format!("({},{}) fails", t.p, t.q_val)),
                _ => None,
            })
            .collect();
        if !others.is_empty() {
            out.notes
                .push(format!("degenerate specializations: {}", others.join("; ")));
        }
    }
    Ok(out)
}

/// Runs the requested rows of every part of table `id`, in fixture order.
pub fn reproduce(id: u8, opts: &ReproduceOptions) -> Result<ReproduceReport, CliError> {
    let tables = table(id)?;
    let mut jobs: Vec<(&TableFixture, &FixtureRow)> = Vec::new();
    for t in &tables {
        for r in &t.rows {
            if opts.rows.as_ref().map_or(true, |qs| qs.contains(&r.q)) {
                jobs.push((t, r));
            }
        }
    }
    if let Some(qs) = &opts.rows {
        for q in qs {
            if !jobs.iter().any(|(_, r)| r.q == *q) {
                return Err(CliError::Usage(format!("table {id} has no row q={q}")));
            }
        }
    }
    let rows: Vec<RowOutcome> = jobs
        .par_iter()
        .map(|(t, r)| run_row(t, r, opts))
        .collect::<Result<_, _>>()?;
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let summary = Summary {
        pass: count(RowStatus::Pass),
        fail: count(RowStatus::Fail),
        skipped: count(RowStatus::Skipped),
    };
    Ok(ReproduceReport {
        version: REPRODUCE_VERSION,
        table: id,
        budget_seconds: opts.budget_seconds,
        rows,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_formulas() {
        assert_eq!(eval_linear("$3q + 10$", 4), Some(22));
        assert_eq!(eval_linear("$12q - 2$", 3), Some(34));
        assert_eq!(eval_linear("$8q$", 3), Some(24));
        assert_eq!(eval_linear("2", 9), Some(2));
        assert_eq!(eval_linear("", 9), None);
        assert_eq!(eval_linear("$q + 2$", 8), Some(10));
    }

    #[test]
    fn trial_and_row_syntax() {
        assert_eq!(TrialSpec::parse("3").unwrap(), TrialSpec::Default(3));
        assert_eq!(
            TrialSpec::parse("(1,2);(α_9,α_9^2)").unwrap(),
            TrialSpec::Pairs(vec![
                ("1".into(), "2".into()),
                ("α_9".into(), "α_9^2".into())
            ])
        );
        assert_eq!(parse_rows("q=2,q=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_rows("16").unwrap(), vec![16]);
    }
}
