//! Browser bindings. Each exported function has a plain Rust counterpart in
//! [`ops`] that the native tests call directly.

use wasm_bindgen::prelude::*;

pub mod ops;

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

/// Kernel values `K_0 .. K_{L-1}`.
#[wasm_bindgen]
pub fn kernel(init: &str, n: usize, l: usize, dt: f64, rule: &str, softmax: bool, seed: u64) -> Result<Vec<f64>, JsError> {
    ops::kernel(init, n, l, dt, rule, softmax, seed).map_err(js_err)
}

/// Stored eigenvalues as interleaved `[re0, im0, re1, im1, ...]`.
#[wasm_bindgen]
pub fn spectrum(init: &str, n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    ops::spectrum(init, n, seed).map_err(js_err)
}

/// Real parts of the basis, row-major with `points` columns.
#[wasm_bindgen]
pub fn basis(system: &str, n: usize, rows: usize, t_end: f64, points: usize) -> Result<Vec<f64>, JsError> {
    ops::basis(system, n, rows, t_end, points).map_err(js_err)
}
