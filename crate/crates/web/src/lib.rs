//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON document (as a string) with a `report` and an
//! `svg` field; errors surface as thrown JS errors.

use quadnet::bounds::{build_report, ReportOptions};
use quadnet::bvp::Solve;
use quadnet::example::{check_published, reconstruct};
use quadnet::mesh::{
    derive_network, generate_grid, parse_quadnet, ConductanceSampler, DiagonalRule, GridSpec, Triangulation,
};
use quadnet::numeric::{int, Rational};
use quadnet::paths::ThickPath;
use quadnet::svg::render_svg;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid side the demo accepts.
pub const MAX_SIDE: usize = 14;

fn analyse<S: Solve>(t: &Triangulation, name: &str) -> Result<Value, String> {
    let network = derive_network(t).map_err(|e| e.to_string())?;
    let report = build_report::<S>(&network, name, ReportOptions::default()).map_err(|e| e.to_string())?;
    let paths: Vec<&ThickPath<S>> =
        [&report.vertical, &report.horizontal].into_iter().filter_map(|p| p.as_ref().ok()).collect();
    let svg = render_svg(t, Some(&report.metric), &paths);
    Ok(json!({ "report": report.to_json(&network, false), "svg": svg }))
}

fn analyse_mode(t: &Triangulation, name: &str, exact: bool) -> Result<Value, String> {
    if exact {
        analyse::<Rational>(t, name)
    } else {
        analyse::<f64>(t, name)
    }
}

/// Generates a grid and runs the full pipeline on it.
pub fn grid(rows: usize, cols: usize, diagonal: &str, seed: u32, unit: bool, exact: bool) -> Result<Value, String> {
    if rows > MAX_SIDE || cols > MAX_SIDE {
        return Err(format!("grid sides are limited to {MAX_SIDE}"));
    }
    let rule: DiagonalRule = diagonal.parse()?;
    let sampler =
        if unit { ConductanceSampler::Constant(int(1)) } else { ConductanceSampler::log_uniform(seed.into()) };
    let t = generate_grid(&GridSpec::new(rows, cols, rule).with_conductance(sampler)).map_err(|e| e.to_string())?;
    analyse_mode(&t, &format!("grid{rows}x{cols}"), exact)
}

/// Runs the full pipeline on a `.quadnet` document.
pub fn quadnet_text(text: &str, exact: bool) -> Result<Value, String> {
    let t = parse_quadnet(text).map_err(|e| e.to_string())?;
    analyse_mode(&t, "input", exact)
}

/// Rebuilds the five-vertex-wheel example, checks it against the published
/// values and runs the pipeline on the first match.
pub fn example() -> Result<Value, String> {
    let rec = reconstruct();
    let first = rec.matches.first().ok_or("reconstruction found no match")?;
    let checks = check_published(&first.triangulation);
    let mut out = analyse::<Rational>(&first.triangulation, "example")?;
    out["reconstruction"] = json!({
        "linkOrders": rec.link_orders,
        "solvedLeaves": rec.solved_leaves,
        "matches": rec.matches.len(),
        "distinctSignatures": rec.distinct_signatures(),
    });
    out["checks"] =
        checks.items.iter().map(|(name, ok, detail)| json!({ "name": name, "ok": ok, "detail": detail })).collect();
    Ok(out)
}

fn to_js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = analyseGrid)]
pub fn analyse_grid(
    rows: usize,
    cols: usize,
    diagonal: &str,
    seed: u32,
    unit: bool,
    exact: bool,
) -> Result<String, JsError> {
    to_js(grid(rows, cols, diagonal, seed, unit, exact))
}

#[wasm_bindgen(js_name = analyseQuadnet)]
pub fn analyse_quadnet(text: &str, exact: bool) -> Result<String, JsError> {
    to_js(quadnet_text(text, exact))
}

#[wasm_bindgen(js_name = workedExample)]
pub fn worked_example() -> Result<String, JsError> {
    to_js(example())
}
