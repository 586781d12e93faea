//! Closed-form modular data of the Temperley-Lieb quotient at Coxeter number h.
//!
//! Conventions: labels are `1..h`, label `a` carries `a − 1` strands;
//! d(a) = (−1)^{a−1}[a], S_ab = (−1)^{a+b}[ab], T_aa is the positive curl
//! scalar (−1)^{a−1}A^{a²−1}. Only ratios of T entries carry meaning.

use crate::cyclo::{order_for, quantum_integer, skein_a, CycNumber};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MtcError {
    #[error("Coxeter number must be at least 3, got {0}")]
    Level(u32),
    #[error("label {0} out of range 1..={1}")]
    Label(usize, usize),
    #[error("matrix must be {0}×{0}")]
    Shape(usize),
    #[error("matrix entries must be non-negative")]
    Negative,
}

#[derive(Debug, Clone)]
pub struct ModularData {
    pub h: u32,
    pub labels: Vec<usize>,
    pub d: Vec<CycNumber>,
    pub s: Vec<Vec<CycNumber>>,
    pub t: Vec<CycNumber>,
    /// `fusion[a-1][b-1][c-1]`
    pub fusion: Vec<Vec<Vec<u32>>>,
    pub global_dim: CycNumber,
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn quantum_dim(a: usize, h: u32) -> CycNumber {
    quantum_integer(a as i64, h).scale_int(sign(a - 1))
}

pub fn s_entry(a: usize, b: usize, h: u32) -> CycNumber {
    quantum_integer((a * b) as i64, h).scale_int(sign(a + b))
}

pub fn t_entry(a: usize, h: u32) -> CycNumber {
    skein_a(h)
        .pow((a * a - 1) as u32)
        .scale_int(sign(a - 1))
}

fn fusion_rule(a: usize, b: usize, c: usize, h: usize) -> u32 {
    let odd = (a + b + c) % 2 == 1;
    let lower = a.abs_diff(b) < c;
    let upper = c < (a + b).min(2 * h - a - b);
    u32::from(odd && lower && upper)
}

pub fn fusion_mult(a: usize, b: usize, c: usize, h: u32) -> Result<u32, MtcError> {
    if h < 3 {
        return Err(MtcError::Level(h));
    }
    for x in [a, b, c] {
        if x == 0 || x >= h as usize {
            return Err(MtcError::Label(x, h as usize - 1));
        }
    }
    Ok(fusion_rule(a, b, c, h as usize))
}

pub fn modular_data(h: u32) -> Result<Arc<ModularData>, MtcError> {
    if h < 3 {
        return Err(MtcError::Level(h));
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ModularData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = cache.lock().unwrap().get(&h) {
        return Ok(m.clone());
    }
    let r = h as usize - 1;
    let labels: Vec<usize> = (1..=r).collect();
    let d: Vec<CycNumber> = labels.iter().map(|&a| quantum_dim(a, h)).collect();
    let s = labels
        .iter()
        .map(|&a| labels.iter().map(|&b| s_entry(a, b, h)).collect())
        .collect();
    let t = labels.iter().map(|&a| t_entry(a, h)).collect();
    let fusion = labels
        .iter()
        .map(|&a| {
            labels
                .iter()
                .map(|&b| labels.iter().map(|&c| fusion_rule(a, b, c, h as usize)).collect())
                .collect()
        })
        .collect();
    let mut global_dim = CycNumber::zero(order_for(h));
    for x in &d {
        global_dim = global_dim.add(&x.mul(x));
    }
    let m = Arc::new(ModularData {
        h,
        labels,
        d,
        s,
        t,
        fusion,
        global_dim,
    });
    cache.lock().unwrap().insert(h, m.clone());
    Ok(m)
}

/// χ_m(a) = S_am / S_1m.
pub fn verlinde_character(m: usize, a: usize, h: u32) -> Result<CycNumber, MtcError> {
    let r = h as usize - 1;
    for x in [m, a] {
        if x == 0 || x > r {
            return Err(MtcError::Label(x, r));
        }
    }
    Ok(s_entry(a, m, h)
        .div(&s_entry(1, m, h))
        .expect("S_1m is a nonzero quantum integer"))
}

/// χ_m(2) = −2cos(πm/h) under the embedding; this is the sign realized by
/// the S convention above, and the spectral diagonal consumes it.
pub const CHARACTER_TWO_SIGN: i32 = -1;

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub commutes_with_t: bool,
    pub commutes_with_s: bool,
    pub haploid: bool,
    pub dim_condition: bool,
    pub s_defect: Option<CycNumber>,
}

impl InvarianceReport {
    pub fn all_pass(&self) -> bool {
        self.commutes_with_t && self.commutes_with_s && self.haploid && self.dim_condition
    }
}

fn int_combo(row: &[i64], col: impl Fn(usize) -> CycNumber, order: u32) -> CycNumber {
    let mut acc = CycNumber::zero(order);
    for (k, &z) in row.iter().enumerate() {
        if z != 0 {
            acc = acc.add(&col(k).scale_int(z));
        }
    }
    acc
}

pub fn invariance_report(z: &[Vec<i64>], h: u32) -> Result<InvarianceReport, MtcError> {
    let md = modular_data(h)?;
    let r = md.labels.len();
    if z.len() != r || z.iter().any(|row| row.len() != r) {
        return Err(MtcError::Shape(r));
    }
    if z.iter().flatten().any(|&v| v < 0) {
        return Err(MtcError::Negative);
    }
    let order = order_for(h);
    let commutes_with_t = (0..r).all(|a| (0..r).all(|b| z[a][b] == 0 || md.t[a] == md.t[b]));
    let zt: Vec<Vec<i64>> = (0..r).map(|b| (0..r).map(|a| z[a][b]).collect()).collect();
    let mut commutes_with_s = true;
    'outer: for a in 0..r {
        for b in 0..r {
            let zs = int_combo(&z[a], |k| md.s[k][b].clone(), order);
            let sz = int_combo(&zt[b], |k| md.s[a][k].clone(), order);
            if zs != sz {
                commutes_with_s = false;
                break 'outer;
            }
        }
    }
    let haploid = z[0][0] == 1;
    let mut total = CycNumber::zero(order);
    for a in 0..r {
        for b in 0..r {
            if z[a][b] != 0 {
                total = total.add(&md.d[a].mul(&md.d[b]).scale_int(z[a][b]));
            }
        }
    }
    let dim_condition = total == md.global_dim;
    let s_defect = if commutes_with_s {
        None
    } else {
        // S⁻¹ = S / d(C)
        let mut acc = CycNumber::zero(order);
        for a in 0..r {
            for b in 0..r {
                if z[a][b] != 0 {
                    acc = acc.add(&md.s[0][a].mul(&md.s[b][0]).scale_int(z[a][b]));
                }
            }
        }
        Some(acc.div(&md.global_dim).expect("d(C) ≠ 0"))
    };
    Ok(InvarianceReport {
        commutes_with_t,
        commutes_with_s,
        haploid,
        dim_condition,
        s_defect,
    })
}

fn cyc_json(c: &CycNumber, precision: u32) -> Value {
    let z = c.embed_complex(precision);
    json!({ "exact": c, "approx": [z.re, z.im] })
}

impl ModularData {
    pub fn to_json(&self, precision: u32) -> Value {
        json!({
            "h": self.h,
            "labels": self.labels,
            "d": self.d.iter().map(|x| cyc_json(x, precision)).collect::<Vec<_>>(),
            "abs_d": self.labels.iter().map(|&a| {
                let v = quantum_integer(a as i64, self.h).embed_complex(precision);
                v.re
            }).collect::<Vec<_>>(),
            "S": self.s.iter().map(|row| row.iter().map(|x| cyc_json(x, precision)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "T": self.t.iter().map(|x| cyc_json(x, precision)).collect::<Vec<_>>(),
            "fusion": self.fusion,
            "global_dim": cyc_json(&self.global_dim, precision),
        })
    }
}
