use proptest::prelude::*;
use std::sync::Arc;

use tubeinv::alphainv::{diagonal_spectrum, tm_basis, z_matrix, Backend, SolveOptions};
use tubeinv::cyclo::CycNumber;
use tubeinv::linalg::{mat_mul, Tolerance};
use tubeinv::mtc::t_entry;
use tubeinv::quivmod::{ade_quiver, AdeQuiver, QuiverModule};
use tubeinv::tl::cabled_curl;

const SMALL: [&str; 10] = ["A2", "A3", "A4", "A5", "A6", "A7", "D4", "D5", "A8", "D6"];

fn exact(q: AdeQuiver) -> QuiverModule<CycNumber> {
    QuiverModule::new(Arc::new(q), Tolerance::default())
}

/// The builtin quiver with its vertices renamed and listed in a shuffled order.
fn relabeled(name: &str, perm_seed: &[usize]) -> AdeQuiver {
    let q = ade_quiver(name).unwrap();
    let n = q.len();
    let mut order: Vec<usize> = (0..n).collect();
    for (k, &s) in perm_seed.iter().enumerate().take(n) {
        order.swap(k, k + s % (n - k));
    }
    let names: Vec<String> = order.iter().map(|&v| format!("v{}", q.vertices[v])).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if q.adj[i][j] == 1 {
                edges.push(format!(r#"["v{}","v{}"]"#, q.vertices[i], q.vertices[j]));
            }
        }
    }
    let json = format!(
        r#"{{"name":"{name}-relabeled","vertices":[{}],"edges":[{}],"h":{}}}"#,
        names.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(","),
        edges.join(","),
        q.h
    );
    AdeQuiver::from_json(&json).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn diagonal_spectrum_is_the_diagonal_of_z(k in 0usize..SMALL.len()) {
        let q = ade_quiver(SMALL[k]).unwrap();
        let z = z_matrix(&q, Backend::Exact, Tolerance::default(), false).unwrap();
        let diag = diagonal_spectrum(&q);
        for m in 0..diag.len() {
            prop_assert_eq!(diag[m], z.z[m][m]);
        }
    }

    #[test]
    fn tm_basis_is_fixed_by_jones_wenzl(k in 0usize..7, a in 1usize..7, b in 1usize..7) {
        let q = ade_quiver(SMALL[k]).unwrap();
        let (a, b) = (1 + (a - 1) % (q.h as usize - 1), 1 + (b - 1) % (q.h as usize - 1));
        let m = exact(q);
        let t = tm_basis(&m, a, b, SolveOptions::default()).unwrap();
        let (ea, eb) = (m.essential(a - 1).unwrap(), m.essential(b - 1).unwrap());
        let zero = m.w.zero.clone();
        for s in &t.slots {
            let (i, j) = (s.i, s.j);
            let duals = m.projected_duals(a - 1, i, j).unwrap();
            let pa = m.jw_matrix(a - 1, i, j);
            let pb = m.jw_matrix(b - 1, i, j);
            for sol in 0..t.dim() {
                let f = t.block(sol, i, j).unwrap();
                // F = V_b · f · D_a on path coordinates
                let vb: Vec<Vec<CycNumber>> = {
                    let vecs = &eb.block(i, j).vectors;
                    let size = m.paths(b - 1).block(i, j).size();
                    (0..size).map(|r| vecs.iter().map(|v| v[r].clone()).collect()).collect()
                };
                let fpath = mat_mul(&mat_mul(&vb, &f, &zero), &duals, &zero);
                prop_assert!(ea.block(i, j).dim() == f[0].len());
                let sandwiched = mat_mul(&mat_mul(&pb, &fpath, &zero), &pa, &zero);
                prop_assert_eq!(&sandwiched, &fpath);
            }
        }
    }

    #[test]
    fn z_is_independent_of_vertex_labels(k in 0usize..7, seed in prop::collection::vec(0usize..16, 8)) {
        let name = SMALL[k];
        let plain = z_matrix(&ade_quiver(name).unwrap(), Backend::Exact, Tolerance::default(), false).unwrap();
        let shuffled = z_matrix(&relabeled(name, &seed), Backend::Exact, Tolerance::default(), false).unwrap();
        prop_assert_eq!(plain.z, shuffled.z);
    }

    #[test]
    fn cabled_curl_is_the_twist(h in 3u32..=30, a in 1usize..30) {
        let a = 1 + (a - 1) % (h as usize - 1);
        prop_assert_eq!(cabled_curl(a, h).unwrap(), t_entry(a, h));
    }
}

#[test]
fn float_and_exact_backends_agree() {
    for name in ["A5", "A7", "D4", "D5", "D6"] {
        let q = ade_quiver(name).unwrap();
        let e = z_matrix(&q, Backend::Exact, Tolerance::default(), false).unwrap();
        let f = z_matrix(&q, Backend::Float, Tolerance::default(), false).unwrap();
        assert_eq!(e.z, f.z, "{name}");
        assert!(e.gap.is_none());
        let gap = f.gap.expect("float run reports a gap");
        assert!(gap.kept_min > 1e-6 && gap.dropped_max < 1e-6, "{name}: {gap:?}");
    }
}

#[test]
fn z_matrix_is_deterministic() {
    let q = ade_quiver("D5").unwrap();
    let runs: Vec<String> = (0..3)
        .map(|_| serde_json::to_string(&z_matrix(&q, Backend::Exact, Tolerance::default(), false).unwrap()).unwrap())
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}
