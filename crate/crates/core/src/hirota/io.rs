use std::fmt::Write;

use serde_json::{json, Value};

use super::LatticeField;

impl LatticeField {
    /// One row per matrix entry: `n,j,r,i,k,re,im`.
    pub fn to_csv(&self) -> String {
        let g = self.grid();
        let mut out = String::from("n,j,r,i,k,re,im\n");
        for (idx, m) in self.values().iter().enumerate() {
            let (n, j, r) = g.coords(idx);
            for i in 0..g.dim {
                for k in 0..g.dim {
                    let z = m[(i, k)];
                    writeln!(out, "{n},{j},{r},{i},{k},{:e},{:e}", z.re, z.im).expect("write to string");
                }
            }
        }
        out
    }

    /// Grid header plus `[re, im]` pairs in `n, j, r, i, k` order.
    pub fn to_json(&self) -> Value {
        let g = self.grid();
        let values: Vec<[f64; 2]> = self
            .values()
            .iter()
            .flat_map(|m| (0..g.dim).flat_map(move |i| (0..g.dim).map(move |k| [m[(i, k)].re, m[(i, k)].im])))
            .collect();
        json!({
            "ln": g.ln,
            "lj": g.lj,
            "lr": g.lr,
            "dim": g.dim,
            "direction": format!("{:?}", g.direction).to_lowercase(),
            "values": values,
        })
    }
}
