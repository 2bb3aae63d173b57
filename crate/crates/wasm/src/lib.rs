//! wasm-bindgen entry points for the demo page in `www/`.
//!
//! Every function takes and returns JSON text. The `*_impl` versions are
//! plain Rust so they can be tested without a browser.

use cvp_qubo::io::{bounds_json, outcome_json, InstanceFile};
use cvp_qubo::{
    build_qubo, encoding_bits, reduce_to_parallelepiped, solve_exact, BoundMode, CvpInstance, EncodingParams, Error,
    MethodChoice, SignMode, SolveOptions,
};
use num_bigint::BigInt;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest Q-matrix the heatmap will draw.
pub const HEATMAP_MAX_VARS: usize = 256;
/// Largest number of candidate points scanned for the plane view.
const WINDOW_SCAN_CAP: u64 = 40_000;

fn instance(text: &str) -> Result<CvpInstance, String> {
    InstanceFile::parse(text).and_then(|f| f.to_instance()).map_err(|e| e.to_string())
}

fn mode(s: &str) -> Result<BoundMode, String> {
    s.parse()
}

fn sign(s: &str) -> Result<SignMode, String> {
    s.parse()
}

/// Both bound modes side by side. A mode that does not apply to this
/// dimension is `null`.
pub fn bounds_impl(instance_text: &str) -> Result<String, String> {
    let inst = instance(instance_text)?;
    let mut out = json!({});
    for m in [BoundMode::Tight, BoundMode::Paper] {
        out[m.as_str()] = match encoding_bits(&inst, m) {
            Ok(rep) => bounds_json(&inst, &rep),
            Err(Error::UnsupportedMode { .. }) => Value::Null,
            Err(e) => return Err(e.to_string()),
        };
    }
    Ok(out.to_string())
}

/// The Q-matrix with its entries as decimal strings, plus the (coordinate, bit) label of each variable.
pub fn qubo_matrix_impl(instance_text: &str, mode_name: &str, sign_name: &str) -> Result<String, String> {
    let inst = instance(instance_text)?;
    let rep = encoding_bits(&inst, mode(mode_name)?).map_err(|e| e.to_string())?;
    let params = EncodingParams::new(inst.dim(), rep.m());
    let n_vars = params.n_vars();
    if n_vars > HEATMAP_MAX_VARS {
        return Err(format!("{n_vars} variables is too many to draw (limit {HEATMAP_MAX_VARS})"));
    }
    let red = reduce_to_parallelepiped(&inst).map_err(|e| e.to_string())?;
    let q = build_qubo(&red, &params, sign(sign_name)?).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<String>> = (1..=n_vars).map(|h| (1..=n_vars).map(|r| q.get(h - 1, r - 1).to_string()).collect()).collect();
    let labels: Vec<Value> = (1..=n_vars)
        .map(|h| {
            let (i, j) = params.coords_of(h).expect("index in range");
            json!([i, j])
        })
        .collect();
    Ok(json!({
        "n": params.n,
        "m": params.m,
        "N": n_vars,
        "constant": q.constant.to_string(),
        "q": rows,
        "labels": labels,
    })
    .to_string())
}

/// Solves the instance. For planar lattices the output also lists the
/// lattice points within `half_width` of the target, for plotting.
pub fn solve_impl(
    instance_text: &str,
    mode_name: &str,
    sign_name: &str,
    method: &str,
    seed: u64,
    half_width: u32,
) -> Result<String, String> {
    let inst = instance(instance_text)?;
    let method = match method {
        "auto" => MethodChoice::Auto,
        "exhaustive" => MethodChoice::Exhaustive,
        "sa" => MethodChoice::Sa(None),
        other => return Err(format!("unknown method '{other}'")),
    };
    let opts = SolveOptions {
        bound_mode: mode(mode_name)?,
        sign: sign(sign_name)?,
        method,
        seed,
        ..SolveOptions::default()
    };
    let out = cvp_qubo::solve_cvp(&inst, &opts).map_err(|e| e.to_string())?;
    let mut v = outcome_json(&out);
    if inst.dim() == 2 {
        let a = inst.basis();
        v["plane"] = json!({
            "basis": [[a.get(0, 0).to_string(), a.get(1, 0).to_string()], [a.get(0, 1).to_string(), a.get(1, 1).to_string()]],
            "target": inst.target().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "points": window_points(&inst, half_width)?,
        });
    }
    Ok(v.to_string())
}

/// Lattice points in the square of half-width `w` around the target.
fn window_points(inst: &CvpInstance, w: u32) -> Result<Vec<[String; 2]>, String> {
    let a = inst.basis();
    let t = inst.target();
    let w = BigInt::from(w);
    let mut lo: Option<[BigInt; 2]> = None;
    let mut hi: Option<[BigInt; 2]> = None;
    // Coordinates are linear in the point, so the corners give their range.
    for (dx, dy) in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
        let corner = [&t[0] + &w * dx, &t[1] + &w * dy];
        let c = solve_exact(a, &corner).map_err(|e| e.to_string())?;
        let f = c.floor();
        let g: Vec<BigInt> = c.0.iter().map(|r| r.ceil().to_integer()).collect();
        lo = Some(match lo {
            None => [f[0].clone(), f[1].clone()],
            Some(l) => [l[0].clone().min(f[0].clone()), l[1].clone().min(f[1].clone())],
        });
        hi = Some(match hi {
            None => [g[0].clone(), g[1].clone()],
            Some(h) => [h[0].clone().max(g[0].clone()), h[1].clone().max(g[1].clone())],
        });
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    let span = (&hi[0] - &lo[0] + 1u32) * (&hi[1] - &lo[1] + 1u32);
    if span > BigInt::from(WINDOW_SCAN_CAP) {
        return Err("view window is too large for this basis".into());
    }
    let mut pts = Vec::new();
    let mut l0 = lo[0].clone();
    while l0 <= hi[0] {
        let mut l1 = lo[1].clone();
        while l1 <= hi[1] {
            let p = a.mul_vec(&[l0.clone(), l1.clone()]).map_err(|e| e.to_string())?;
            if (&p[0] - &t[0]).magnitude() <= w.magnitude() && (&p[1] - &t[1]).magnitude() <= w.magnitude() {
                pts.push([p[0].to_string(), p[1].to_string()]);
            }
            l1 += 1;
        }
        l0 += 1;
    }
    Ok(pts)
}

#[wasm_bindgen]
pub fn bounds(instance_text: &str) -> Result<String, JsValue> {
    bounds_impl(instance_text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn qubo_matrix(instance_text: &str, mode: &str, sign: &str) -> Result<String, JsValue> {
    qubo_matrix_impl(instance_text, mode, sign).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve(instance_text: &str, mode: &str, sign: &str, method: &str, seed: u32, half_width: u32) -> Result<String, JsValue> {
    solve_impl(instance_text, mode, sign, method, seed as u64, half_width).map_err(|e| JsValue::from_str(&e))
}
