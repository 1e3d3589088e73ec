//! Browser bindings: build and certify a planar net, measure dyadic
//! distances between clicked points, and tabulate `|Ω_j|`.
//!
//! Every export returns a JSON string. The plain functions in [`ops`] do the
//! work so they can be tested off the browser.

use wasm_bindgen::prelude::*;

pub mod ops;

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// `{p: [[x, y]], z: [[x, y, parent]], certified, clauses: [{id, pass}]}`.
#[wasm_bindgen]
pub fn net(setting: &str, m: u32, k: u32, seed: u32) -> Result<String, JsError> {
    js(ops::net(setting, m, k, seed as u64))
}

/// Points are `"x y"` with dyadic coordinates such as `3/2^4`.
#[wasm_bindgen]
pub fn distance(family: &str, p: &str, q: &str) -> Result<String, JsError> {
    js(ops::distance(family, p, q))
}

#[wasm_bindgen]
pub fn omega(family: &str, dim: usize, max_j: u32) -> Result<String, JsError> {
    js(ops::omega(family, dim, max_j))
}
