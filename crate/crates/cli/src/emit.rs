//! Text renderers. Everything here is a pure function of its input, so
//! identical runs print identical bytes.

use serde_json::Value;
use std::fmt::Write;
use tubeinv::frob::FrobReport;
use tubeinv::mtc::ModularData;

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn approx(c: &tubeinv::cyclo::CycNumber) -> String {
    let z = c.embed_complex(6);
    if z.im.abs() < 1e-9 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

pub fn pretty_modular(md: &ModularData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "h = {}, labels 1..{}", md.h, md.labels.len());
    let _ = writeln!(s, "d(C) = {}", md.global_dim);
    for (k, &a) in md.labels.iter().enumerate() {
        let _ = writeln!(s, "  d({a}) = {}    T({a}) = {}", md.d[k], md.t[k]);
    }
    let _ = writeln!(s, "S (numerical):");
    for row in &md.s {
        let cells: Vec<String> = row.iter().map(approx).collect();
        let _ = writeln!(s, "  {}", cells.join("  "));
    }
    let _ = writeln!(s, "fusion N_ab^c:");
    for (a, rows) in md.fusion.iter().enumerate() {
        for (b, cs) in rows.iter().enumerate() {
            let outs: Vec<String> = cs
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(c, _)| (c + 1).to_string())
                .collect();
            let _ = writeln!(s, "  {} x {} = {}", a + 1, b + 1, outs.join(" + "));
        }
    }
    s
}

fn latex_matrix<T>(rows: &[Vec<T>], cell: impl Fn(&T) -> String) -> String {
    let body: Vec<String> = rows
        .iter()
        .map(|r| r.iter().map(&cell).collect::<Vec<_>>().join(" & "))
        .collect();
    format!("\\begin{{pmatrix}}\n{}\n\\end{{pmatrix}}", body.join(" \\\\\n"))
}

pub fn latex_modular(md: &ModularData) -> String {
    let t: Vec<Vec<_>> = vec![md.t.clone()];
    format!(
        "% h = {}\nS \\approx {}\n\nT \\approx {}\n",
        md.h,
        latex_matrix(&md.s, approx),
        latex_matrix(&t, approx)
    )
}

fn matrix_text(z: &[Vec<i64>]) -> String {
    z.iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn pretty_invariant(v: &Value, z: &[Vec<i64>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "quiver {} at h = {} ({} backend)", v["quiver"].as_str().unwrap_or("?"), v["h"], v["backend"].as_str().unwrap_or("?"));
    let _ = writeln!(s, "Z =\n{}", matrix_text(z));
    let _ = writeln!(s, "Z = {}", partition_text(z).unwrap_or_else(|| "(not a sum of rank-one blocks)".into()));
    for key in ["T", "S", "haploid", "dim_condition"] {
        let _ = writeln!(s, "  {key:<14}{}", if v["checks"][key] == Value::Bool(true) { "pass" } else { "FAIL" });
    }
    if !v["checks"]["s_defect"].is_null() {
        let _ = writeln!(s, "  s_defect      {}", v["checks"]["s_defect"]);
    }
    let _ = writeln!(s, "CIZ match: {}", v["ciz_match"].as_str().unwrap_or("none"));
    if let Some(g) = v["min_rank_gap"].as_object() {
        let _ = writeln!(s, "rank gap: kept ≥ {}, dropped ≤ {}", g["kept_min"], g["dropped_max"]);
    }
    s
}

/// Writes Z as Σ m_k |Σ_{a ∈ B_k} χ_a|² when its support splits into
/// disjoint square blocks with constant entries; None otherwise.
fn rank_one_blocks(z: &[Vec<i64>]) -> Option<Vec<(i64, Vec<usize>)>> {
    let n = z.len();
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for a in 0..n {
        if seen[a] {
            continue;
        }
        let support: Vec<usize> = (0..n).filter(|&b| z[a][b] != 0).collect();
        if support.is_empty() {
            continue;
        }
        let m = z[a][support[0]];
        for &b in &support {
            if seen[b] || z[b] != z[a] {
                return None;
            }
            if support.iter().any(|&c| z[b][c] != m) {
                return None;
            }
        }
        // all rows in the support are equal, so the block is m · 1·1ᵀ
        if !support.contains(&a) {
            return None;
        }
        for &b in &support {
            seen[b] = true;
        }
        blocks.push((m, support));
    }
    Some(blocks)
}

fn partition_text(z: &[Vec<i64>]) -> Option<String> {
    let blocks = rank_one_blocks(z)?;
    let terms: Vec<String> = blocks
        .iter()
        .map(|(m, b)| {
            let sum: Vec<String> = b.iter().map(|a| format!("χ{}", a + 1)).collect();
            let coef = if *m == 1 { String::new() } else { m.to_string() };
            format!("{coef}|{}|²", sum.join(" + "))
        })
        .collect();
    Some(if terms.is_empty() { "0".into() } else { terms.join(" + ") })
}

pub fn latex_partition(z: &[Vec<i64>]) -> String {
    match rank_one_blocks(z) {
        Some(blocks) if !blocks.is_empty() => {
            let terms: Vec<String> = blocks
                .iter()
                .map(|(m, b)| {
                    let sum: Vec<String> = b.iter().map(|a| format!("\\chi_{{{}}}", a + 1)).collect();
                    let coef = if *m == 1 { String::new() } else { m.to_string() };
                    format!("{coef}|{}|^2", sum.join(" + "))
                })
                .collect();
            format!("Z = {}\n", terms.join(" + "))
        }
        _ => format!("Z = {}\n", latex_matrix(z, |v| v.to_string())),
    }
}

pub fn pretty_diagonal(name: &str, h: u32, diag: &[i64], matches: Option<bool>) -> String {
    let mut s = format!("quiver {name} at h = {h}\ndiagonal: {diag:?}\n");
    let ones: Vec<usize> = diag.iter().enumerate().filter(|(_, &v)| v > 0).map(|(k, _)| k + 1).collect();
    let _ = writeln!(s, "nonzero at: {ones:?}");
    match matches {
        Some(true) => s.push_str("CIZ diagonal: match\n"),
        Some(false) => s.push_str("CIZ diagonal: MISMATCH\n"),
        None => {}
    }
    s
}

pub fn latex_diagonal(diag: &[i64]) -> String {
    format!("\\operatorname{{diag}} Z = {}\n", latex_matrix(&[diag.to_vec()], |v| v.to_string()))
}

pub fn pretty_frobenius(r: &FrobReport) -> String {
    let mut s = format!("quiver {} at h = {}\nZ =\n{}\n", r.quiver, r.h, matrix_text(&r.z));
    for (name, ok) in r.checks() {
        let _ = writeln!(s, "  {name:<24}{}", if ok { "pass" } else { "FAIL" });
    }
    for f in &r.failures {
        let _ = writeln!(s, "  failure {} at {:?}: {} vs {}", f.check, f.labels, f.lhs, f.rhs);
    }
    s
}

pub fn latex_frobenius(r: &FrobReport) -> String {
    let mut s = format!("% {} at h = {}\n\\begin{{tabular}}{{ll}}\n", r.quiver, r.h);
    for (name, ok) in r.checks() {
        let _ = writeln!(s, "\\texttt{{{}}} & {} \\\\", name.replace('_', "\\_"), if ok { "pass" } else { "fail" });
    }
    s.push_str("\\end{tabular}\n");
    s
}
