use std::fmt::Write;

use serde_json::{json, Value};

use super::reduction::{NahmTriple, Trajectory};
use crate::CMat;

fn entries(m: &CMat) -> Vec<[f64; 2]> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |k| [m[(i, k)].re, m[(i, k)].im])).collect()
}

impl NahmTriple {
    pub fn to_json(&self) -> Value {
        json!({
            "phi1": entries(&self.phi1),
            "phi2": entries(&self.phi2),
            "phi3": entries(&self.phi3),
        })
    }
}

impl Trajectory {
    /// One row per matrix entry: `y,field,i,k,re,im`, fields numbered 1 to 3.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,field,i,k,re,im\n");
        for (idx, p) in self.points.iter().enumerate() {
            let y = self.y(idx);
            for (f, m) in p.fields().iter().enumerate() {
                for i in 0..m.nrows() {
                    for k in 0..m.ncols() {
                        let z = m[(i, k)];
                        writeln!(out, "{y:e},{},{i},{k},{:e},{:e}", f + 1, z.re, z.im).expect("write to string");
                    }
                }
            }
        }
        out
    }

    /// Parameters plus one object per point with row-major `[re, im]` entries.
    pub fn to_json(&self) -> Value {
        let first = &self.points[0];
        let points: Vec<Value> = self
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let mut v = p.to_json();
                v["y"] = json!(self.y(k));
                v
            })
            .collect();
        json!({
            "step": self.step,
            "dim": first.dim(),
            "alpha": [first.alpha.re, first.alpha.im],
            "beta": [first.beta.re, first.beta.im],
            "points": points,
        })
    }
}
