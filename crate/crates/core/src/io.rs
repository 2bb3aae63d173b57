//! Instance files and JSON reports.
//!
//! Instances are JSON objects `{"name"?, "n", "A": [[..]], "x": [..]}`
//! where `A` is given row by row and its columns generate the lattice.
//! A plain-text form is also accepted: `n` lines of `n + 1` integers, the
//! augmented matrix `(A|x)`, with `#` comments.
//!
//! Every report carries `format_version` and writes integers as decimal
//! strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{decs, undecs, Dec};
use crate::lattice::{BoundReport, CvpInstance, ReducedInstance};
use crate::linalg::IntMatrix;
use crate::pipeline::{Certificate, CvpOutcome, CvpSolution, VerifyReport};
use crate::qubo::{coefficient_bound, EncodingParams};
use crate::solve::SolveResult;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Dec>>,
    pub x: Vec<Dec>,
}

impl InstanceFile {
    pub fn from_instance(inst: &CvpInstance, name: Option<String>) -> Self {
        Self {
            name,
            n: inst.dim(),
            a: inst.basis().to_rows().iter().map(|r| decs(r)).collect(),
            x: decs(inst.target()),
        }
    }

    /// Validates the shape and nonsingularity.
    pub fn to_instance(&self) -> Result<CvpInstance> {
        if self.n == 0 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        if self.a.len() != self.n || self.a.iter().any(|r| r.len() != self.n) {
            return Err(Error::InvalidInstance(format!("A must be {0}x{0}", self.n)));
        }
        if self.x.len() != self.n {
            return Err(Error::InvalidInstance(format!("x must have length {}", self.n)));
        }
        let rows: Vec<Vec<BigInt>> = self.a.iter().map(|r| undecs(r.clone())).collect();
        CvpInstance::new(IntMatrix::from_rows(&rows)?, undecs(self.x.clone()))
    }

    /// Parses either the JSON form or the plain-text augmented matrix.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                msg: e.to_string(),
            })
        } else {
            parse_plain(text)
        }
    }
}

fn parse_plain(text: &str) -> Result<InstanceFile> {
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let row = l
            .split_whitespace()
            .map(|t| {
                t.parse::<BigInt>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("invalid integer '{t}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse { line: 0, msg: "empty instance".into() });
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n + 1) {
        return Err(Error::InvalidInstance(format!(
            "row {} has {} entries; the augmented matrix (A|x) needs {} per row",
            bad + 1,
            rows[bad].len(),
            n + 1
        )));
    }
    Ok(InstanceFile {
        name: None,
        n,
        a: rows.iter().map(|r| decs(&r[..n])).collect(),
        x: rows.iter().map(|r| Dec(r[n].clone())).collect(),
    })
}

fn rational(r: &BigRational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

fn s(v: &BigInt) -> Value {
    Value::String(v.to_string())
}

fn sv(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(s).collect())
}

pub fn bounds_json(inst: &CvpInstance, rep: &BoundReport) -> Value {
    let n = inst.dim();
    let m = rep.m();
    let params = EncodingParams::new(n, m);
    json!({
        "format_version": FORMAT_VERSION,
        "n": n,
        "b": s(inst.max_entry()),
        "det": s(inst.det()),
        "kappa_sq_upper": rational(&rep.kappa_sq_upper),
        "kappa_upper": rational(&rep.kappa_upper),
        "z_norm_sq_upper": rational(&rep.z_norm_sq_upper),
        "m_paper": rep.m_paper,
        "m_tight": rep.m_tight,
        "mode": rep.mode_used.as_str(),
        "m": m,
        "N": params.n_vars(),
        "coefficient_bound": s(&coefficient_bound(n, m, inst.max_entry())),
    })
}

pub fn reduced_json(red: &ReducedInstance) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "n": red.dim(),
        "x": sv(red.base.target()),
        "x_hat": sv(&red.x_hat),
        "lambda0": sv(&red.lambda0),
        "floor_coords": sv(&red.floor_coords),
    })
}

pub fn solve_result_json(r: &SolveResult) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "assignment": r.assignment.to_string(),
        "value": s(&r.value),
        "method": r.method.as_str(),
        "proven_optimal": r.proven_optimal,
        "evaluations": r.stats.evaluations.to_string(),
        "wall_time_ms": r.stats.wall_time.as_secs_f64() * 1e3,
    })
}

pub fn solution_json(sol: &CvpSolution) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "z": sv(&sol.z),
        "lambda": sv(&sol.lambda),
        "dist_sq": s(&sol.dist_sq),
        "certificate": sol.certificate.as_str(),
    })
}

/// Reads a solution document; accepts the output of [`solution_json`] or
/// [`outcome_json`] (which nests it under `"solution"`).
pub fn parse_solution(text: &str) -> Result<CvpSolution> {
    #[derive(Deserialize)]
    struct Doc {
        z: Vec<Dec>,
        lambda: Vec<Dec>,
        dist_sq: Dec,
        certificate: Option<String>,
    }
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    let body = v.get("solution").cloned().unwrap_or(v);
    let doc: Doc = serde_json::from_value(body).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    Ok(CvpSolution {
        z: undecs(doc.z),
        lambda: undecs(doc.lambda),
        dist_sq: doc.dist_sq.0,
        certificate: match doc.certificate {
            Some(c) => c.parse().map_err(|e: String| Error::Parse { line: 0, msg: e })?,
            None => Certificate::Heuristic,
        },
    })
}

pub fn verify_json(rep: &VerifyReport) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "passed": rep.passed(),
        "lambda_ok": rep.lambda_ok,
        "dist_sq_ok": rep.dist_sq_ok,
        "recomputed_dist_sq": s(&rep.recomputed_dist_sq),
        "qubo_identity_ok": rep.qubo_identity_ok,
        "identity_samples": rep.identity_samples,
        "m": rep.m,
        "oracle_dist_sq": rep.oracle_dist_sq.as_ref().map(s),
        "oracle_radius": rep.oracle_radius.as_ref().map(s),
        "matches_oracle": rep.matches_oracle,
        "range_boundary_hit": rep.range_boundary_hit,
    })
}

pub fn outcome_json(out: &CvpOutcome) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "solution": solution_json(&out.solution),
        "report": verify_json(&out.report),
        "m": out.params.m,
        "N": out.params.n_vars(),
        "mode": out.bounds.mode_used.as_str(),
        "qubo": solve_result_json(&out.qubo_result),
        "qubo_objective": s(&out.qubo_objective),
    })
}
