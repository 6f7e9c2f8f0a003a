//! build and analyze: parameter parsing, working-field choice, surface
//! files and the analysis report.

use serde::{Deserialize, Serialize};
use shtuka_core::fibration::{generic_fiber, FiberOptions, Provenance};
use shtuka_core::field::{alpha, embed, make_field, prime_power, FieldDescriptor};
use shtuka_core::geometry::{
    genus_upper_bound, search_singular_points, stated_singular_points, verify_singular_points,
    SearchBudget, SingularPointReport,
};
use shtuka_core::moduli::{build_gamma0_deg4, Deg4Params, Deg4Shape, FormConvention, TriForm};
use shtuka_core::tate::{analyze_surface, SurfaceMeta, SurfaceReport};
use shtuka_core::{Fe, FiniteField};

use crate::CliError;

pub const SURFACE_VERSION: u32 = 1;
pub const REPORT_VERSION: u32 = 1;

/// Largest field the default-pair search will extend to.
const MAX_DEFAULT_EXTENSION: u32 = 4;

/// A field element as written on the command line or in a table cell:
/// an integer, `α_r^k` (also `\alpha_{r}^{k}`, `alpha_r^k`) or packed
/// coefficients `[c0,c1,...]` over `F_{p^len}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueExpr {
    Int(i64),
    Alpha { r: u64, k: u64 },
    Packed(Vec<u32>),
}

impl ValueExpr {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("cannot parse field element {s:?}"));
        let t: String = s
            .replace(['{', '}', '$', ' '], "")
            .replace("\\alpha", "a")
            .replace("alpha", "a")
            .replace('α', "a");
        if t.starts_with('[') {
            let body = t
                .strip_prefix('[')
                .and_then(|x| x.strip_suffix(']'))
                .ok_or_else(bad)?;
            let c: Result<Vec<u32>, _> = body.split(',').map(|x| x.parse()).collect();
            return Ok(ValueExpr::Packed(c.map_err(|_| bad())?));
        }
        if let Some(rest) = t.strip_prefix('a') {
            let rest = rest.strip_prefix('_').unwrap_or(rest);
            let (r, k) = match rest.split_once('^') {
                Some((r, k)) => (r, k.parse().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let r: u64 = r.parse().map_err(|_| bad())?;
            prime_power(r).ok_or_else(bad)?;
            return Ok(ValueExpr::Alpha { r, k });
        }
        t.parse().map(ValueExpr::Int).map_err(|_| bad())
    }

    /// Degree over `F_p` of a field that must contain this value.
    pub fn degree(&self) -> u32 {
        match self {
            ValueExpr::Int(_) => 1,
            ValueExpr::Alpha { r, .. } => prime_power(*r).map(|(_, k)| k).unwrap_or(1),
            ValueExpr::Packed(c) => c.len().max(1) as u32,
        }
    }

    pub fn eval(&self, field: &FiniteField) -> Result<Fe, CliError> {
        let p = field.characteristic() as u64;
        match self {
            ValueExpr::Int(n) => Ok(field.from_int(*n)),
            ValueExpr::Alpha { r, k } => Ok(field.pow(alpha(*r, field)?, *k)),
            ValueExpr::Packed(c) => {
                let sub = make_field(p, c.len().max(1) as u32)?;
                Ok(embed(sub.from_coeffs(c)?, &sub, field)?)
            }
        }
    }
}

impl std::fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValueExpr::Int(n) => write!(f, "{n}"),
            ValueExpr::Alpha { r, k: 1 } => write!(f, "α_{r}"),
            ValueExpr::Alpha { r, k } => write!(f, "α_{r}^{k}"),
            ValueExpr::Packed(c) => {
                let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", s.join(","))
            }
        }
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

/// Degree of the smallest field the shape itself needs: `F_q` for the
/// even squarefree shape (it uses `α_q`), else the prime field.
fn shape_degree(shape: Deg4Shape, q: u64) -> u32 {
    match (shape, prime_power(q)) {
        (Deg4Shape::Squarefree, Some((2, k))) => k,
        _ => 1,
    }
}

/// Everything needed to rebuild a specialized surface.
#[derive(Clone, Debug)]
pub struct SurfaceSpec {
    pub shape: Deg4Shape,
    pub q: u64,
    pub field: FiniteField,
    pub p: Fe,
    pub q_val: Fe,
    pub r: Option<Fe>,
    pub convention: FormConvention,
}

/// Parameters as given by the user, before a field is chosen.
#[derive(Clone, Debug, Default)]
pub struct BuildRequest {
    pub shape: String,
    pub q: u64,
    pub p: Option<String>,
    pub q_val: Option<String>,
    pub r: Option<String>,
}

fn check_q(q: u64) -> Result<u32, CliError> {
    prime_power(q)
        .map(|(p, _)| p)
        .ok_or_else(|| CliError::Usage(format!("q = {q} is not a prime power")))
}

impl SurfaceSpec {
    pub fn params(&self) -> Deg4Params {
        Deg4Params {
            shape: self.shape,
            q: self.q,
            p_val: self.p,
            q_val: self.q_val,
            r_val: self.r,
            convention: self.convention,
        }
    }

    /// Resolves a request. Missing `P, Q` (and `R`) take the first
    /// admissible values; see [`default_specs`].
    pub fn resolve(req: &BuildRequest) -> Result<SurfaceSpec, CliError> {
        let shape = Deg4Shape::parse(&req.shape).map_err(|e| CliError::Usage(e.to_string()))?;
        let p = check_q(req.q)?;
        if shape == Deg4Shape::Squarefree && req.q == 2 {
            return Err(CliError::Usage(
                "shape sqfree requires q odd or q > 2 even".into(),
            ));
        }
        let exprs: Vec<Option<ValueExpr>> = [&req.p, &req.q_val, &req.r]
            .iter()
            .map(|x| x.as_deref().map(ValueExpr::parse).transpose())
            .collect::<Result<_, _>>()?;
        let (Some(pe), Some(qe)) = (&exprs[0], &exprs[1]) else {
            if exprs[0].is_some() || exprs[1].is_some() {
                return Err(CliError::Usage("give both --P and --Q or neither".into()));
            }
            return default_specs(shape, req.q, 1)?
                .into_iter()
                .next()
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "no admissible (P,Q) for {shape} over extensions of degree ≤ {MAX_DEFAULT_EXTENSION}"
                    ))
                });
        };
        let mut k = lcm(pe.degree(), qe.degree());
        k = lcm(k, shape_degree(shape, req.q));
        if let Some(re) = &exprs[2] {
            k = lcm(k, re.degree());
        }
        for e in exprs.iter().flatten() {
            if let ValueExpr::Alpha { r, .. } = e {
                if prime_power(*r).map(|(pp, _)| pp) != Some(p) {
                    return Err(CliError::Usage(format!(
                        "α_{r} is not in characteristic {p}"
                    )));
                }
            }
        }
        let field = make_field(p as u64, k)?;
        let pv = pe.eval(&field)?;
        let qv = qe.eval(&field)?;
        let r = match (&exprs[2], shape) {
            (Some(re), Deg4Shape::ZeroOneInfR) => Some(re.eval(&field)?),
            (None, Deg4Shape::ZeroOneInfR) => Some(default_r(&field, pv, qv).ok_or_else(|| {
                CliError::Usage("no admissible R in the working field; pass --R".into())
            })?),
            (Some(_), _) => return Err(CliError::Usage(format!("--R does not apply to {shape}"))),
            (None, _) => None,
        };
        Ok(SurfaceSpec {
            shape,
            q: req.q,
            field,
            p: pv,
            q_val: qv,
            r,
            convention: FormConvention::default(),
        })
    }

    pub fn build(&self) -> Result<TriForm, CliError> {
        build_gamma0_deg4(&self.field, &self.params()).map_err(|e| CliError::Stage {
            stage: "build",
            message: e.to_string(),
            hint: None,
        })
    }

    pub fn field_label(&self) -> String {
        format!("F_{}", self.field.order())
    }

    pub fn meta(&self) -> SurfaceMeta {
        SurfaceMeta {
            shape: Some(self.shape.name().to_string()),
            q: Some(self.q),
            field: Some(self.field_label()),
            p: Some(self.field.display(self.p)),
            q_val: Some(self.field.display(self.q_val)),
            r: self.r.map(|r| self.field.display(r)),
        }
    }
}

fn default_r(field: &FiniteField, p: Fe, q: Fe) -> Option<Fe> {
    field
        .elements()
        .skip(2)
        .find(|&r| r != p && r != q && r != field.neg(p) && r != field.neg(q))
}

/// Admissible specializations in enumeration order: over `F_q` (or the
/// field the shape needs) first, then its extensions, pairs ordered by
/// packed value. A pair is admissible when the surface builds. At most
/// `limit` are returned.
pub fn default_specs(shape: Deg4Shape, q: u64, limit: usize) -> Result<Vec<SurfaceSpec>, CliError> {
    let p = check_q(q)?;
    let k0 = lcm(prime_power(q).unwrap().1, shape_degree(shape, q));
    let mut out = Vec::new();
    for k in (k0..=k0 * MAX_DEFAULT_EXTENSION).filter(|k| k % k0 == 0) {
        let field = make_field(p as u64, k)?;
        let elems: Vec<Fe> = field.elements().collect();
        for &pv in &elems {
            for &qv in &elems {
                if pv == qv || out.len() >= limit {
                    continue;
                }
                // only pairs that need this extension
                if k > k0 && in_smaller_field(&field, k0, pv) && in_smaller_field(&field, k0, qv) {
                    continue;
                }
                let r = match shape {
                    Deg4Shape::ZeroOneInfR => match default_r(&field, pv, qv) {
                        Some(r) => Some(r),
                        None => continue,
                    },
                    _ => None,
                };
                let spec = SurfaceSpec {
                    shape,
                    q,
                    field: field.clone(),
                    p: pv,
                    q_val: qv,
                    r,
                    convention: FormConvention::default(),
                };
                if spec.build().is_ok() {
                    out.push(spec);
                }
            }
        }
        if out.len() >= limit {
            break;
        }
    }
    Ok(out)
}

fn in_smaller_field(field: &FiniteField, k0: u32, x: Fe) -> bool {
    let s = (field.characteristic() as u64).pow(k0);
    field.pow(x, s) == x
}

/// `pₐ` bound and multidegree of a built surface.
pub fn genus_bound(tf: &TriForm) -> Result<i64, CliError> {
    let [a, b, c] = tf.multidegree;
    genus_upper_bound(a, b, c).map_err(|e| CliError::Stage {
        stage: "build",
        message: e.to_string(),
        hint: None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub version: u32,
    pub shape: String,
    pub q: u64,
    pub field: FieldDescriptor,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "Q")]
    pub q_val: String,
    #[serde(rename = "R")]
    pub r: Option<String>,
    pub convention: FormConvention,
    pub multidegree: [u32; 3],
    pub pa_bound: i64,
    pub equation: String,
}

impl SurfaceFile {
    pub fn new(spec: &SurfaceSpec, tf: &TriForm) -> Result<Self, CliError> {
        let f = &spec.field;
        Ok(SurfaceFile {
            version: SURFACE_VERSION,
            shape: spec.shape.name().to_string(),
            q: spec.q,
            field: f.descriptor(),
            p: f.format_element(spec.p),
            q_val: f.format_element(spec.q_val),
            r: spec.r.map(|r| f.format_element(r)),
            convention: spec.convention,
            multidegree: tf.multidegree,
            pa_bound: genus_bound(tf)?,
            equation: tf.poly.to_string(),
        })
    }

    /// Rebuilds the surface and checks it against the stored equation.
    pub fn load(&self) -> Result<(SurfaceSpec, TriForm), CliError> {
        if self.version != SURFACE_VERSION {
            return Err(CliError::Usage(format!(
                "surface file version {} is not supported",
                self.version
            )));
        }
        let field = self.field.to_field()?;
        let shape = Deg4Shape::parse(&self.shape).map_err(|e| CliError::Usage(e.to_string()))?;
        let spec = SurfaceSpec {
            shape,
            q: self.q,
            p: field.parse_element(&self.p)?,
            q_val: field.parse_element(&self.q_val)?,
            r: self
                .r
                .as_deref()
                .map(|r| field.parse_element(r))
                .transpose()?,
            field,
            convention: self.convention,
        };
        let tf = spec.build()?;
        if tf.poly.to_string() != self.equation {
            return Err(CliError::Usage(
                "stored equation does not match the rebuilt surface".into(),
            ));
        }
        Ok((spec, tf))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalyzeOptions {
    pub deg_bound: u32,
    /// Run the exhaustive singular-point search up to this extension
    /// degree (over the working field).
    pub sing_ext: Option<u32>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            deg_bound: FiberOptions::default().deg_bound,
            sing_ext: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub max_ext: u32,
    /// Singular points over each extension `F_{s^j}`, `j = 1..=max_ext`.
    pub counts: Vec<u64>,
    pub orbits: Vec<(Vec<String>, u32)>,
    pub non_isolated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSection {
    /// The stated candidate list, when the shape has one.
    pub stated: Option<Vec<SingularPointReport>>,
    pub search: Option<SearchSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub version: u32,
    pub multidegree: [u32; 3],
    pub pa_bound: i64,
    /// `pₐ` from the fibration equals the bound.
    pub pa_attains_bound: bool,
    pub weierstrass: Vec<String>,
    pub provenance: Provenance,
    pub singular: SingularSection,
    pub surface: SurfaceReport,
}

impl AnalysisReport {
    pub fn text_row(&self) -> String {
        self.surface.text_row()
    }
}

fn stage(stage: &'static str, hint: Option<&'static str>) -> impl Fn(String) -> CliError {
    move |message| CliError::Stage {
        stage,
        message,
        hint: hint.map(str::to_string),
    }
}

const DEGENERATE_HINT: &str = "this specialization is degenerate; try a different (P,Q)";

/// Singular verification, fibration, Tate analysis.
pub fn analyze(
    spec: &SurfaceSpec,
    tf: &TriForm,
    opts: AnalyzeOptions,
) -> Result<AnalysisReport, CliError> {
    let f = &spec.field;
    let alpha_q = alpha(spec.q, f).ok();
    let stated = match stated_singular_points(spec.shape, spec.q, f, spec.p, spec.q_val, alpha_q) {
        Some(pts) => Some(
            verify_singular_points(tf, f, &pts)
                .map_err(|e| stage("singular", None)(e.to_string()))?,
        ),
        None => None,
    };
    let search = match opts.sing_ext {
        Some(k) => {
            let s = search_singular_points(tf, k, SearchBudget::default())
                .map_err(|e| stage("singular", None)(e.to_string()))?;
            Some(SearchSummary {
                max_ext: s.max_ext,
                counts: s.counts.clone(),
                orbits: s.orbits.iter().map(|o| (o.display(), o.degree)).collect(),
                non_isolated: s.non_isolated,
            })
        }
        None => None,
    };
    let fopts = FiberOptions {
        deg_bound: opts.deg_bound,
        ..FiberOptions::default()
    };
    let gf = generic_fiber(tf, fopts)
        .map_err(|e| stage("fibration", Some(DEGENERATE_HINT))(e.to_string()))?;
    let surface = analyze_surface(&gf.curve, spec.meta())
        .map_err(|e| stage("tate", Some(DEGENERATE_HINT))(e.to_string()))?;
    let pa_bound = genus_bound(tf)?;
    Ok(AnalysisReport {
        version: REPORT_VERSION,
        multidegree: tf.multidegree,
        pa_bound,
        pa_attains_bound: surface.pa == pa_bound,
        weierstrass: gf.curve.a_strings(),
        provenance: gf.provenance,
        singular: SingularSection { stated, search },
        surface,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_spellings() {
        assert_eq!(
            ValueExpr::parse("\\alpha_{16}^2").unwrap(),
            ValueExpr::Alpha { r: 16, k: 2 }
        );
        assert_eq!(
            ValueExpr::parse("α9").unwrap(),
            ValueExpr::Alpha { r: 9, k: 1 }
        );
        assert_eq!(
            ValueExpr::parse("alpha_8^3").unwrap(),
            ValueExpr::Alpha { r: 8, k: 3 }
        );
        assert_eq!(ValueExpr::parse("-1").unwrap(), ValueExpr::Int(-1));
        assert_eq!(
            ValueExpr::parse("[0, 1]").unwrap(),
            ValueExpr::Packed(vec![0, 1])
        );
        assert!(ValueExpr::parse("\\alpha_6").is_err());
    }

    #[test]
    fn working_field_covers_alphas() {
        let req = BuildRequest {
            shape: "2(0)+(1)+(inf)".into(),
            q: 2,
            p: Some("\\alpha_8".into()),
            q_val: Some("\\alpha_8^3".into()),
            r: None,
        };
        let s = SurfaceSpec::resolve(&req).unwrap();
        assert_eq!(s.field.order(), 8);
    }

    #[test]
    fn default_pair_needs_an_extension_over_f2() {
        let s = default_specs(Deg4Shape::FourZero, 2, 1).unwrap();
        assert_eq!(s[0].field.order(), 4);
    }
}
