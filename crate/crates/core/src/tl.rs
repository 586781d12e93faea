//! Temperley-Lieb diagram calculus with loop value β = −[2]_q.
//!
//! A diagram with `m` bottom and `n` top points stores a perfect matching on
//! boundary indices: bottom points are `0..m` (left to right), top points are
//! `m..m+n` (left to right).

use crate::cyclo::{loop_value, order_for, quantum_integer, skein_a, CycNumber};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TlError {
    #[error("arity mismatch: {0} top points against {1} bottom points")]
    Arity(usize, usize),
    #[error("Coxeter numbers differ ({0} vs {1})")]
    Level(u32, u32),
    #[error("matching is not a planar perfect matching")]
    NotPlanar,
    #[error("no Jones-Wenzl projector on {n} strands at h = {h}")]
    NoProjector { n: usize, h: u32 },
    #[error("label {0} out of range 1..={1}")]
    Label(usize, usize),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlanarDiagram {
    m: u16,
    n: u16,
    partner: Vec<u16>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

impl PlanarDiagram {
    pub fn new(m: usize, n: usize, partner: Vec<usize>) -> Result<PlanarDiagram, TlError> {
        if (m + n) % 2 != 0 || partner.len() != m + n {
            return Err(TlError::NotPlanar);
        }
        for (i, &p) in partner.iter().enumerate() {
            if p >= m + n || p == i || partner[p] != i {
                return Err(TlError::NotPlanar);
            }
        }
        // Walk the boundary circle: bottom left→right, then top right→left.
        let order: Vec<usize> = (0..m).chain((m..m + n).rev()).collect();
        let mut stack = Vec::new();
        let mut seen = vec![false; m + n];
        for &p in &order {
            if seen[partner[p]] {
                if stack.pop() != Some(partner[p]) {
                    return Err(TlError::NotPlanar);
                }
            } else {
                stack.push(p);
            }
            seen[p] = true;
        }
        Ok(PlanarDiagram {
            m: m as u16,
            n: n as u16,
            partner: partner.into_iter().map(|p| p as u16).collect(),
        })
    }

    pub fn bottom(&self) -> usize {
        self.m as usize
    }

    pub fn top(&self) -> usize {
        self.n as usize
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partner[i] as usize
    }

    pub fn identity(n: usize) -> PlanarDiagram {
        let partner = (0..n).map(|i| i + n).chain(0..n).collect();
        PlanarDiagram::new(n, n, partner).expect("identity is planar")
    }

    /// The generator e_k on n strands joining strands k and k+1 (1-based).
    pub fn e(n: usize, k: usize) -> PlanarDiagram {
        assert!(k >= 1 && k < n);
        let mut partner: Vec<usize> = (0..n).map(|i| i + n).chain(0..n).collect();
        let (a, b) = (k - 1, k);
        partner[a] = b;
        partner[b] = a;
        partner[n + a] = n + b;
        partner[n + b] = n + a;
        PlanarDiagram::new(n, n, partner).expect("e_k is planar")
    }

    /// `n → n + 2k` inserting `k` nested cups whose leftmost endpoint lies at
    /// top position `pos` (0-based, `pos ≤ n`).
    pub fn nested_cups(n: usize, pos: usize, k: usize) -> PlanarDiagram {
        assert!(pos <= n);
        let top = n + 2 * k;
        let mut partner = vec![0usize; n + top];
        for i in 0..n {
            let t = if i < pos { i } else { i + 2 * k };
            partner[i] = n + t;
            partner[n + t] = i;
        }
        for j in 0..k {
            let a = n + pos + j;
            let b = n + pos + 2 * k - 1 - j;
            partner[a] = b;
            partner[b] = a;
        }
        PlanarDiagram::new(n, top, partner).expect("cups are planar")
    }

    /// `n → n − 2k` closing `k` nested caps starting at bottom position `pos`.
    pub fn nested_caps(n: usize, pos: usize, k: usize) -> PlanarDiagram {
        let cups = PlanarDiagram::nested_cups(n - 2 * k, pos, k);
        cups.flip()
    }

    /// Reflection top ↔ bottom.
    pub fn flip(&self) -> PlanarDiagram {
        let (m, n) = (self.m as usize, self.n as usize);
        let map = |i: usize| if i < m { n + i } else { i - m };
        let mut partner = vec![0usize; m + n];
        for i in 0..m + n {
            partner[map(i)] = map(self.partner(i));
        }
        PlanarDiagram::new(n, m, partner).expect("flip preserves planarity")
    }

    /// Stack `g` on top of `f`; returns the glued diagram and the number of closed loops.
    pub fn glue(f: &PlanarDiagram, g: &PlanarDiagram) -> Result<(PlanarDiagram, usize), TlError> {
        let (m, k, n) = (f.m as usize, f.n as usize, g.n as usize);
        if g.m as usize != k {
            return Err(TlError::Arity(k, g.m as usize));
        }
        // nodes: f points 0..m+k, g points offset by m+k
        let off = m + k;
        let mut uf = UnionFind::new(off + k + n);
        for i in 0..m + k {
            uf.union(i, f.partner(i));
        }
        for i in 0..k + n {
            uf.union(off + i, off + g.partner(i));
        }
        for t in 0..k {
            uf.union(m + t, off + t);
        }
        let outer: Vec<usize> = (0..m).chain((off + k)..(off + k + n)).collect();
        let mut first: HashMap<usize, usize> = HashMap::new();
        let mut partner = vec![0usize; m + n];
        let mut with_outer = std::collections::HashSet::new();
        for (idx, &node) in outer.iter().enumerate() {
            let r = uf.find(node);
            with_outer.insert(r);
            if let Some(&other) = first.get(&r) {
                partner[idx] = other;
                partner[other] = idx;
            } else {
                first.insert(r, idx);
            }
        }
        let mut loop_roots = std::collections::HashSet::new();
        for t in 0..k {
            let r = uf.find(m + t);
            if !with_outer.contains(&r) {
                loop_roots.insert(r);
            }
        }
        Ok((PlanarDiagram::new(m, n, partner)?, loop_roots.len()))
    }

    /// Side-by-side juxtaposition, `self` on the left.
    pub fn tensor(&self, o: &PlanarDiagram) -> PlanarDiagram {
        let (m1, n1, m2, n2) = (self.m as usize, self.n as usize, o.m as usize, o.n as usize);
        let map1 = |i: usize| if i < m1 { i } else { m1 + m2 + (i - m1) };
        let map2 = |i: usize| if i < m2 { m1 + i } else { m1 + m2 + n1 + (i - m2) };
        let mut partner = vec![0usize; m1 + m2 + n1 + n2];
        for i in 0..m1 + n1 {
            partner[map1(i)] = map1(self.partner(i));
        }
        for i in 0..m2 + n2 {
            partner[map2(i)] = map2(o.partner(i));
        }
        PlanarDiagram::new(m1 + m2, n1 + n2, partner).expect("juxtaposition is planar")
    }

    /// Loops formed by connecting bottom point i to top point i.
    pub fn closure_loops(&self) -> usize {
        let n = self.m as usize;
        assert_eq!(n, self.n as usize);
        let mut uf = UnionFind::new(2 * n);
        for i in 0..2 * n {
            uf.union(i, self.partner(i));
        }
        for i in 0..n {
            uf.union(i, n + i);
        }
        let mut roots = std::collections::HashSet::new();
        for i in 0..2 * n {
            roots.insert(uf.find(i));
        }
        roots.len()
    }
}

impl fmt::Debug for PlanarDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// ASCII chord notation: bottom points `b0..`, top points `t0..`.
impl fmt::Display for PlanarDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.m as usize;
        let name = |i: usize| if i < m { format!("b{i}") } else { format!("t{}", i - m) };
        write!(f, "{}->{}:", self.m, self.n)?;
        for i in 0..self.partner.len() {
            let p = self.partner(i);
            if i < p {
                write!(f, " {}-{}", name(i), name(p))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TLMorphism {
    m: usize,
    n: usize,
    h: u32,
    terms: BTreeMap<PlanarDiagram, CycNumber>,
}

impl TLMorphism {
    pub fn zero(m: usize, n: usize, h: u32) -> TLMorphism {
        TLMorphism {
            m,
            n,
            h,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_diagram(d: PlanarDiagram, h: u32) -> TLMorphism {
        let mut t = TLMorphism::zero(d.bottom(), d.top(), h);
        t.terms.insert(d, CycNumber::one(order_for(h)));
        t
    }

    pub fn identity(n: usize, h: u32) -> TLMorphism {
        TLMorphism::from_diagram(PlanarDiagram::identity(n), h)
    }

    pub fn e(n: usize, k: usize, h: u32) -> TLMorphism {
        TLMorphism::from_diagram(PlanarDiagram::e(n, k), h)
    }

    pub fn source(&self) -> usize {
        self.m
    }

    pub fn target(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.h
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PlanarDiagram, &CycNumber)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, d: &PlanarDiagram) -> CycNumber {
        self.terms.get(d).cloned().unwrap_or_else(|| CycNumber::zero(order_for(self.h)))
    }

    fn accumulate(&mut self, d: PlanarDiagram, c: CycNumber) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(d) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &TLMorphism) -> TLMorphism {
        assert_eq!((self.m, self.n, self.h), (o.m, o.n, o.h), "shape mismatch");
        let mut r = self.clone();
        for (d, c) in &o.terms {
            r.accumulate(d.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &TLMorphism) -> TLMorphism {
        self.add(&o.scale(&CycNumber::from_int(order_for(self.h), -1)))
    }

    pub fn scale(&self, c: &CycNumber) -> TLMorphism {
        let mut r = TLMorphism::zero(self.m, self.n, self.h);
        if c.is_zero() {
            return r;
        }
        for (d, x) in &self.terms {
            r.terms.insert(d.clone(), x.mul(c));
        }
        r
    }

    pub fn tensor(&self, o: &TLMorphism) -> TLMorphism {
        assert_eq!(self.h, o.h);
        let mut r = TLMorphism::zero(self.m + o.m, self.n + o.n, self.h);
        for (d1, c1) in &self.terms {
            for (d2, c2) in &o.terms {
                r.accumulate(d1.tensor(d2), c1.mul(c2));
            }
        }
        r
    }

    /// Right-multiply by a single diagram (stack it on top) with coefficient 1.
    pub fn then_diagram(&self, g: &PlanarDiagram) -> TLMorphism {
        let beta = loop_value(self.h);
        let mut r = TLMorphism::zero(self.m, g.top(), self.h);
        let mut pow_cache: Vec<CycNumber> = vec![CycNumber::one(order_for(self.h))];
        for (d, c) in &self.terms {
            let (glued, loops) = PlanarDiagram::glue(d, g).expect("arity checked by caller");
            while pow_cache.len() <= loops {
                let next = pow_cache.last().unwrap().mul(&beta);
                pow_cache.push(next);
            }
            r.accumulate(glued, c.mul(&pow_cache[loops]));
        }
        r
    }

    /// Apply a crossing at strands (k, k+1), 1-based, on top of `self`.
    pub fn then_crossing(&self, k: usize, sign: Sign) -> TLMorphism {
        let a = skein_a(self.h);
        let (ca, ce) = match sign {
            Sign::Pos => (a.clone(), a.conj()),
            Sign::Neg => (a.conj(), a.clone()),
        };
        let via_e = self.then_diagram(&PlanarDiagram::e(self.n, k));
        self.scale(&ca).add(&via_e.scale(&ce))
    }

    pub fn flip(&self) -> TLMorphism {
        let mut r = TLMorphism::zero(self.n, self.m, self.h);
        for (d, c) in &self.terms {
            r.terms.insert(d.flip(), c.clone());
        }
        r
    }
}

/// Stack `g` on top of `f` (apply `f` first).
pub fn tl_compose(f: &TLMorphism, g: &TLMorphism) -> Result<TLMorphism, TlError> {
    if f.h != g.h {
        return Err(TlError::Level(f.h, g.h));
    }
    if f.n != g.m {
        return Err(TlError::Arity(f.n, g.m));
    }
    let mut r = TLMorphism::zero(f.m, g.n, f.h);
    for (dg, cg) in &g.terms {
        let part = f.then_diagram(dg);
        for (d, c) in part.terms {
            r.accumulate(d, c.mul(cg));
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// σ⁺ = A·id + A⁻¹·e₁, σ⁻ = A⁻¹·id + A·e₁.
pub fn crossing(sign: Sign, h: u32) -> TLMorphism {
    TLMorphism::identity(2, h).then_crossing(1, sign)
}

pub fn jones_wenzl(n: usize, h: u32) -> Result<Arc<TLMorphism>, TlError> {
    if n >= h as usize {
        return Err(TlError::NoProjector { n, h });
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<TLMorphism>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&(n, h)) {
        return Ok(p.clone());
    }
    let p = if n <= 1 {
        TLMorphism::identity(n, h)
    } else {
        // p_n = p' + ([n-1]/[n]) p' e_{n-1} p' with p' = p_{n-1} ⊗ 1
        let prev = jones_wenzl(n - 1, h)?;
        let lifted = prev.tensor(&TLMorphism::identity(1, h));
        let ratio = quantum_integer(n as i64 - 1, h)
            .div(&quantum_integer(n as i64, h))
            .expect("[n] ≠ 0 below h");
        let mid = lifted.then_diagram(&PlanarDiagram::e(n, n - 1));
        let sandwich = tl_compose(&mid, &lifted)?;
        lifted.add(&sandwich.scale(&ratio))
    };
    let p = Arc::new(p);
    cache.lock().unwrap().insert((n, h), p.clone());
    Ok(p)
}

pub fn markov_trace(f: &TLMorphism) -> CycNumber {
    assert_eq!(f.m, f.n, "trace needs an endomorphism");
    let beta = loop_value(f.h);
    let mut acc = CycNumber::zero(order_for(f.h));
    for (d, c) in &f.terms {
        acc = acc.add(&c.mul(&beta.pow(d.closure_loops() as u32)));
    }
    acc
}

/// Crossing positions (1-based) that move a block of `y` strands sitting to the
/// right of `x` strands over to the left, in application order.
pub fn block_swap_word(x: usize, y: usize) -> Vec<usize> {
    let mut w = Vec::new();
    for j in 0..y {
        for p in (j..x + j).rev() {
            w.push(p + 1);
        }
    }
    w
}

fn check_label(a: usize, h: u32) -> Result<(), TlError> {
    if a == 0 || a >= h as usize {
        Err(TlError::Label(a, h as usize - 1))
    } else {
        Ok(())
    }
}

/// Hopf link coloured by the simples `a` and `b`, evaluated by skein expansion.
pub fn hopf_link(a: usize, b: usize, h: u32) -> Result<CycNumber, TlError> {
    check_label(a, h)?;
    check_label(b, h)?;
    let (x, y) = (a - 1, b - 1);
    let px = jones_wenzl(x, h)?;
    let py = jones_wenzl(y, h)?;
    let mut t = px.tensor(&py);
    for k in block_swap_word(x, y) {
        t = t.then_crossing(k, Sign::Pos);
    }
    for k in block_swap_word(y, x) {
        t = t.then_crossing(k, Sign::Pos);
    }
    Ok(markov_trace(&t))
}

/// Scalar by which a positive curl acts on the simple `a`.
pub fn curl_scalar(a: usize, h: u32) -> Result<CycNumber, TlError> {
    check_label(a, h)?;
    let x = a - 1;
    let p = jones_wenzl(x, h)?;
    let mut t = p.then_diagram(&PlanarDiagram::nested_cups(x, x, x));
    for k in block_swap_word(x, x) {
        t = t.then_crossing(k, Sign::Pos);
    }
    let t = t.then_diagram(&PlanarDiagram::nested_caps(3 * x, x, x));
    Ok(t.coefficient(&PlanarDiagram::identity(x)))
}

/// Curl on the simple `a` via cabling: a curl on x parallel strands is the
/// full twist (σ₁⋯σ_{x−1})^x followed by x single-strand curls. Any diagram
/// with fewer than x through-strands is killed by p_x, and composing never
/// restores through-strands, so those terms are dropped after each crossing.
/// Agrees with `curl_scalar` and stays cheap for every label.
pub fn cabled_curl(a: usize, h: u32) -> Result<CycNumber, TlError> {
    check_label(a, h)?;
    let x = a - 1;
    let id = PlanarDiagram::identity(x);
    let mut t = TLMorphism::identity(x, h);
    for _ in 0..x {
        for k in 1..x {
            let c = t.then_crossing(k, Sign::Pos).coefficient(&id);
            t = TLMorphism::identity(x, h).scale(&c);
        }
    }
    let single = if x == 0 { one_of(h) } else { curl_scalar(2, h)? };
    Ok(t.coefficient(&id).mul(&single.pow(x as u32)))
}

fn one_of(h: u32) -> CycNumber {
    CycNumber::one(order_for(h))
}
