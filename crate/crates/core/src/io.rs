//! File formats: problem and run-config JSON, trace and iterate CSV.
//!
//! Problem file:
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "components": [
//!     { "A": [1.0, 0.0, 0.0, -0.5], "b": [0.1, 0.2], "c0_term": 0.0 }
//!   ],
//!   "nonsmooth": { "kind": "box", "lo": [-1, -1], "hi": [1, 1] }
//! }
//! ```
//!
//! `A` is row-major with `dimension^2` entries. A component may declare
//! `lipschitz` and `concave_modulus`; otherwise they come from the spectrum of
//! `A`. `nonsmooth.kind` is one of `zero`, `l1` (`lambda`), `box` (`lo`, `hi`)
//! or `box_plus_l1` (`lo`, `hi`, `lambda`). Unknown fields are rejected.
//!
//! Run-config file (every field optional):
//!
//! ```json
//! {
//!   "alpha": "auto_lemma2",
//!   "tau": 3,
//!   "schedule": { "kind": "cyclic", "block": 2 },
//!   "max_iters": 100000,
//!   "tol": 1e-8,
//!   "x0": "zeros",
//!   "seed": 7,
//!   "c0": null
//! }
//! ```
//!
//! `alpha` is a number, `"auto_lemma2"` (the default, `0.9 alpha_lemma2`) or
//! `"auto_c8"` (needs `c0`). Schedule kinds: `none`, `cyclic` (`block`,
//! default the smallest admissible), `uniform_random` (`seed`, default the
//! top-level seed) and `adversarial_max`. Further fields: `trace_every`,
//! `check_every`, `enforce_theory`, `full_log`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::delay::{DelaySchedule, ScheduleKind};
use crate::error::{PiagError, Result};
use crate::model::{NonsmoothTerm, Problem, Quadratic, Vector};
use crate::solver::{SmoothnessBounds, SolverConfig, StepsizeRule, TraceRecord};

/// Header of the trace CSV.
pub const TRACE_HEADER: &str = "k,F,step_norm,prox_residual,max_staleness,delta_k";

fn parse_error(what: &str, e: serde_json::Error) -> PiagError {
    // serde_json's message ends with "at line L column C"
    PiagError::Parse(format!("{what}: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0_term: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concave_modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonsmoothFile {
    Zero,
    L1 { lambda: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    BoxPlusL1 { lo: Vec<f64>, hi: Vec<f64>, lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub components: Vec<ComponentFile>,
    pub nonsmooth: NonsmoothFile,
}

impl ProblemFile {
    pub fn from_problem(problem: &Problem) -> Result<Self> {
        let quads = problem
            .quadratics()
            .ok_or_else(|| PiagError::NotAvailable("only quadratic problems can be written".into()))?;
        let d = problem.dimension();
        let components = quads
            .iter()
            .map(|q| ComponentFile {
                a: (0..d * d).map(|idx| q.matrix()[(idx / d, idx % d)]).collect(),
                b: q.linear().iter().copied().collect(),
                c0_term: (q.offset() != 0.0).then_some(q.offset()),
                lipschitz: Some(crate::model::SmoothComponent::lipschitz(*q)),
                concave_modulus: Some(crate::model::SmoothComponent::concave_modulus(*q)),
            })
            .collect();
        let vec = |v: &Vector| v.iter().copied().collect::<Vec<_>>();
        let nonsmooth = match problem.nonsmooth() {
            NonsmoothTerm::Zero => NonsmoothFile::Zero,
            NonsmoothTerm::L1 { lambda } => NonsmoothFile::L1 { lambda: *lambda },
            NonsmoothTerm::Box { lo, hi } => NonsmoothFile::Box { lo: vec(lo), hi: vec(hi) },
            NonsmoothTerm::BoxPlusL1 { lo, hi, lambda } => {
                NonsmoothFile::BoxPlusL1 { lo: vec(lo), hi: vec(hi), lambda: *lambda }
            }
        };
        Ok(Self { dimension: d, components, nonsmooth })
    }

    pub fn into_problem(self) -> Result<Problem> {
        let d = self.dimension;
        if d == 0 {
            return Err(PiagError::invalid("dimension must be positive"));
        }
        let mut quads = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.into_iter().enumerate() {
            if c.a.len() != d * d || c.b.len() != d {
                return Err(PiagError::invalid(format!(
                    "component {i}: expected {} matrix entries and {d} linear entries, got {} and {}",
                    d * d,
                    c.a.len(),
                    c.b.len()
                )));
            }
            let a = DMatrix::from_row_slice(d, d, &c.a);
            let b = Vector::from_vec(c.b);
            let offset = c.c0_term.unwrap_or(0.0);
            let q = match (c.lipschitz, c.concave_modulus) {
                (None, None) => Quadratic::new(a, b, offset),
                (lip, conc) => {
                    let auto = Quadratic::new(a.clone(), b.clone(), offset)?;
                    use crate::model::SmoothComponent;
                    Quadratic::with_constants(
                        a,
                        b,
                        offset,
                        lip.unwrap_or(auto.lipschitz()),
                        conc.unwrap_or(auto.concave_modulus()),
                    )
                }
            }
            .map_err(|e| PiagError::invalid(format!("component {i}: {e}")))?;
            quads.push(q);
        }
        let to_vec = |v: Vec<f64>| -> Result<Vector> {
            if v.len() != d {
                return Err(PiagError::invalid(format!("box bounds must have {d} entries, got {}", v.len())));
            }
            Ok(Vector::from_vec(v))
        };
        let h = match self.nonsmooth {
            NonsmoothFile::Zero => NonsmoothTerm::Zero,
            NonsmoothFile::L1 { lambda } => NonsmoothTerm::l1(lambda)?,
            NonsmoothFile::Box { lo, hi } => NonsmoothTerm::boxed(to_vec(lo)?, to_vec(hi)?)?,
            NonsmoothFile::BoxPlusL1 { lo, hi, lambda } => {
                NonsmoothTerm::box_plus_l1(to_vec(lo)?, to_vec(hi)?, lambda)?
            }
        };
        Problem::from_quadratics(quads, h)
    }
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| parse_error("problem file", e))?;
    file.into_problem()
}

pub fn problem_to_json(problem: &Problem) -> Result<String> {
    let file = ProblemFile::from_problem(problem)?;
    serde_json::to_string_pretty(&file).map_err(|e| PiagError::Parse(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaRule {
    AutoLemma2,
    AutoC8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Rule(AlphaRule),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Rule(AlphaRule::AutoLemma2)
    }
}

impl AlphaSpec {
    pub fn rule(&self) -> StepsizeRule {
        match *self {
            AlphaSpec::Value(a) => StepsizeRule::Fixed(a),
            AlphaSpec::Rule(AlphaRule::AutoLemma2) => StepsizeRule::AutoLemma2,
            AlphaSpec::Rule(AlphaRule::AutoC8) => StepsizeRule::AutoC8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleFile {
    None,
    Cyclic {
        #[serde(default)]
        block: Option<usize>,
    },
    UniformRandom {
        #[serde(default)]
        seed: Option<u64>,
    },
    AdversarialMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Keyword {
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    Keyword(X0Keyword),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub alpha: AlphaSpec,
    #[serde(default)]
    pub tau: Option<usize>,
    #[serde(default)]
    pub schedule: Option<ScheduleFile>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub x0: Option<X0Spec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub c0: Option<f64>,
    #[serde(default)]
    pub trace_every: Option<usize>,
    #[serde(default)]
    pub check_every: Option<usize>,
    #[serde(default)]
    pub enforce_theory: Option<bool>,
    #[serde(default)]
    pub full_log: Option<bool>,
}

pub fn parse_run_config(text: &str) -> Result<RunConfigFile> {
    serde_json::from_str(text).map_err(|e| parse_error("run config", e))
}

impl RunConfigFile {
    /// The schedule for `n` components. Without an explicit schedule, `tau = 0`
    /// means no delay and `tau > 0` the cyclic schedule with the smallest block.
    pub fn schedule_for(&self, n: usize, tau: usize) -> Result<DelaySchedule> {
        let kind = match self.schedule {
            None if tau == 0 => ScheduleKind::None,
            None => ScheduleKind::Cyclic { block: DelaySchedule::min_cyclic_block(n, tau) },
            Some(ScheduleFile::None) => ScheduleKind::None,
            Some(ScheduleFile::Cyclic { block }) => {
                ScheduleKind::Cyclic { block: block.unwrap_or_else(|| DelaySchedule::min_cyclic_block(n, tau)) }
            }
            Some(ScheduleFile::UniformRandom { seed }) => {
                let seed = seed.or(self.seed).ok_or_else(|| {
                    PiagError::InvalidConfiguration("uniform_random schedule needs a seed".into())
                })?;
                ScheduleKind::UniformRandom { seed }
            }
            Some(ScheduleFile::AdversarialMax) => ScheduleKind::AdversarialMax,
        };
        let schedule = DelaySchedule::new(kind, if kind == ScheduleKind::None { 0 } else { tau });
        schedule.validate(n)?;
        Ok(schedule)
    }

    /// Resolves the file against a problem. `tau_override` replaces `tau`.
    pub fn resolve(&self, problem: &Problem, tau_override: Option<usize>) -> Result<SolverConfig> {
        let tau = tau_override.or(self.tau).unwrap_or(0);
        let schedule = self.schedule_for(problem.num_components(), tau)?;
        let bounds = SmoothnessBounds::for_problem(problem, schedule.tau)?;
        let alpha = self.alpha.rule().resolve(&bounds, self.c0)?;
        let d = problem.dimension();
        let x0 = match &self.x0 {
            None | Some(X0Spec::Keyword(X0Keyword::Zeros)) => Vector::zeros(d),
            Some(X0Spec::Vector(v)) => {
                if v.len() != d {
                    return Err(PiagError::invalid(format!("x0 has {} entries, expected {d}", v.len())));
                }
                Vector::from_column_slice(v)
            }
        };
        let mut config = SolverConfig::new(alpha, schedule, x0);
        if let Some(n) = self.max_iters {
            config.max_iters = n;
        }
        if let Some(t) = self.tol {
            config.prox_residual_tol = t;
        }
        if let Some(n) = self.trace_every {
            config.trace_every = n;
        }
        if let Some(n) = self.check_every {
            config.check_every = n;
        }
        config.enforce_theory = self.enforce_theory.unwrap_or(false);
        config.c0 = self.c0;
        config.record_iterates = self.full_log.unwrap_or(false);
        Ok(config)
    }
}

fn fmt_float(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

/// Trace CSV with 17 significant digits per float.
pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},", r.k);
        fmt_float(&mut out, r.objective);
        out.push(',');
        fmt_float(&mut out, r.step_norm);
        out.push(',');
        fmt_float(&mut out, r.prox_residual);
        let _ = write!(out, ",{},", r.max_staleness);
        fmt_float(&mut out, r.delta_k);
        out.push('\n');
    }
    out
}

fn field<T: std::str::FromStr>(s: &str, line: usize, name: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| PiagError::Parse(format!("line {line}: cannot parse {name} from {s:?}")))
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        Some(_) => return Err(PiagError::Parse(format!("line 1: expected header {TRACE_HEADER}"))),
        None => return Err(PiagError::Parse("empty trace".into())),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(PiagError::Parse(format!("line {line_no}: expected 6 columns, got {}", cols.len())));
        }
        out.push(TraceRecord {
            k: field(cols[0], line_no, "k")?,
            objective: field(cols[1], line_no, "F")?,
            step_norm: field(cols[2], line_no, "step_norm")?,
            prox_residual: field(cols[3], line_no, "prox_residual")?,
            max_staleness: field(cols[4], line_no, "max_staleness")?,
            delta_k: field(cols[5], line_no, "delta_k")?,
        });
    }
    Ok(out)
}

/// Iterates as CSV: `k,x0,x1,...`.
pub fn iterates_to_csv(iterates: &[Vector]) -> String {
    let d = iterates.first().map_or(0, |x| x.len());
    let mut out = String::from("k");
    for j in 0..d {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for (k, x) in iterates.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in x.iter() {
            out.push(',');
            fmt_float(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

pub fn parse_iterates_csv(text: &str) -> Result<Vec<Vector>> {
    let mut lines = text.lines().enumerate();
    let d = match lines.next() {
        Some((_, h)) if h.starts_with('k') => h.split(',').count() - 1,
        _ => return Err(PiagError::Parse("line 1: expected iterate header".into())),
    };
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != d + 1 {
            return Err(PiagError::Parse(format!("line {line_no}: expected {} columns", d + 1)));
        }
        let k: usize = field(cols[0], line_no, "k")?;
        if k != out.len() {
            return Err(PiagError::Parse(format!("line {line_no}: iterates must be consecutive from 0")));
        }
        let vals = cols[1..].iter().map(|c| field(c, line_no, "coordinate")).collect::<Result<Vec<f64>>>()?;
        out.push(Vector::from_vec(vals));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOX_1D: &str = r#"{
        "dimension": 1,
        "components": [ { "A": [-1.0], "b": [0.0] } ],
        "nonsmooth": { "kind": "box", "lo": [-1.0], "hi": [1.0] }
    }"#;

    #[test]
    fn parses_problem_file() {
        let p = parse_problem(BOX_1D).unwrap();
        assert_eq!(p.dimension(), 1);
        assert_eq!(p.smoothness_totals(), (1.0, 1.0));
    }

    #[test]
    fn rejects_unknown_fields_with_line() {
        let bad = "{\n  \"dimension\": 1,\n  \"colour\": 3,\n  \"components\": [], \"nonsmooth\": {\"kind\":\"zero\"}\n}";
        match parse_problem(bad) {
            Err(PiagError::Parse(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_sizes() {
        let bad = r#"{"dimension": 2, "components": [{"A": [1.0], "b": [0.0, 0.0]}], "nonsmooth": {"kind": "zero"}}"#;
        assert!(matches!(parse_problem(bad), Err(PiagError::InvalidArgument(_))));
    }

    #[test]
    fn problem_round_trip() {
        let p = crate::problems::make_quadratic_box(3, 2, 9, 0.5).unwrap();
        let text = problem_to_json(&p).unwrap();
        let q = parse_problem(&text).unwrap();
        let x = Vector::from_column_slice(&[0.25, -0.5]);
        assert_eq!(p.eval_f(&x).unwrap(), q.eval_f(&x).unwrap());
        assert_eq!(p.smoothness_totals(), q.smoothness_totals());
        assert_eq!(p.nonsmooth(), q.nonsmooth());
    }

    #[test]
    fn run_config_variants() {
        let p = parse_problem(BOX_1D).unwrap();
        let c = parse_run_config(r#"{"alpha": 0.1, "tau": 0, "x0": [0.5]}"#).unwrap();
        let s = c.resolve(&p, None).unwrap();
        assert_eq!(s.alpha, 0.1);
        assert_eq!(s.x0[0], 0.5);
        let c = parse_run_config(r#"{"alpha": "auto_lemma2", "x0": "zeros"}"#).unwrap();
        // L = 1, l = 1, tau = 0: alpha_lemma2 = 2
        assert!((c.resolve(&p, None).unwrap().alpha - 1.8).abs() < 1e-15);
        let c = parse_run_config(r#"{"alpha": "auto_c8"}"#).unwrap();
        assert!(c.resolve(&p, None).is_err());
        let c = parse_run_config(r#"{"tau": 2, "schedule": {"kind": "uniform_random"}}"#).unwrap();
        assert!(matches!(c.resolve(&p, None), Err(PiagError::InvalidConfiguration(_))));
        let c = parse_run_config(r#"{"tau": 2, "seed": 4, "schedule": {"kind": "uniform_random"}}"#).unwrap();
        let s = c.resolve(&p, None).unwrap();
        assert_eq!(s.schedule.kind, ScheduleKind::UniformRandom { seed: 4 });
        assert!(parse_run_config(r#"{"alpha": "fast"}"#).is_err());
        assert!(parse_run_config("{\n\"tau\": -1}").is_err());
    }

    #[test]
    fn trace_round_trip() {
        let recs = vec![
            TraceRecord { k: 0, objective: -0.1, step_norm: 1.0 / 3.0, prox_residual: 2e-9, max_staleness: 0, delta_k: 0.0 },
            TraceRecord { k: 1, objective: 1e300, step_norm: 0.0, prox_residual: f64::NAN, max_staleness: 3, delta_k: 5e-310 },
        ];
        let text = trace_to_csv(&recs);
        assert!(text.starts_with("k,F,step_norm,prox_residual,max_staleness,delta_k\n"));
        assert!(text.contains("3.3333333333333331e-1"));
        let back = parse_trace_csv(&text).unwrap();
        assert_eq!(back[0], recs[0]);
        assert_eq!(back[1].objective, 1e300);
        assert!(back[1].prox_residual.is_nan());
        assert_eq!(back[1].delta_k, 5e-310);
    }

    #[test]
    fn trace_parse_errors() {
        assert!(parse_trace_csv("").is_err());
        let bad = format!("{TRACE_HEADER}\n0,1,2,3,0,0\n1,x,2,3,0,0\n");
        match parse_trace_csv(&bad) {
            Err(PiagError::Parse(m)) => assert!(m.contains("line 3")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn iterate_round_trip() {
        let xs = vec![Vector::from_column_slice(&[0.1, -2.0]), Vector::from_column_slice(&[1e-20, 7.0])];
        assert_eq!(parse_iterates_csv(&iterates_to_csv(&xs)).unwrap(), xs);
    }
}
