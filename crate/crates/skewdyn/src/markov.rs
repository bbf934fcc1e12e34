//! Markov coding of 𝒦 on the level-N cover: transition graph, Parry
//! vector, cylinder masses and equidistribution of iterated preimages.

use num_traits::{One, Signed, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::{fmt_q, qi, Q};
use crate::berk::FieldView;
use crate::cover::{Ball, Cover};
use crate::error::{Error, Result};
use crate::par;
use crate::series::PuiseuxSeries as PS;
use crate::skew::SkewMap;

/// Vertex classes and the adjacency between them.
pub type Quotient = (Vec<Vec<usize>>, Vec<Vec<u8>>);

#[derive(Clone, Debug)]
pub struct MarkovGraph {
    pub vertices: Vec<Ball>,
    /// adj[v][w] = 1 iff f_⋄(B_v) ⊇ B_w.
    pub adj: Vec<Vec<u8>>,
    pub level: usize,
    pub c: u64,
    pub view: FieldView,
    /// Generic multiplicity b of each vertex's boundary point.
    pub generic_mults: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParryData {
    /// Right eigenvector A·M = c·M with Σ M_v = 1.
    pub m: Vec<Q>,
    pub c: u64,
    adj: Vec<Vec<u8>>,
}

/// Graph on the level-n balls; level n−1 must be free of critical branches.
pub fn build_graph(cover: &Cover, n: usize) -> Result<MarkovGraph> {
    for b in cover.level(n - 1) {
        if b.contains_critical || b.meets_critical(cover.map())? {
            return Err(Error::CriticalInK);
        }
    }
    build_graph_unchecked(cover, n)
}

/// Same as [`build_graph`] without the critical-freeness precondition.
pub fn build_graph_unchecked(cover: &Cover, n: usize) -> Result<MarkovGraph> {
    if n == 0 || n > cover.depth() {
        return Err(Error::Invalid(format!("no level {n} in a cover of depth {}", cover.depth())));
    }
    let f = cover.map();
    let verts = cover.level(n).to_vec();
    if verts.len() < 2 {
        return Err(Error::NoCover);
    }
    let images = par::try_map(&verts, |b| f.image_ball(b))?;
    let adj: Vec<Vec<u8>> = images
        .iter()
        .map(|img| verts.iter().map(|w| img.contains_ball(w) as u8).collect())
        .collect();
    let generic_mults = verts
        .iter()
        .map(|b| b.boundary().generic_multiplicity())
        .collect::<Result<Vec<u64>>>()?;
    Ok(MarkovGraph {
        vertices: verts,
        adj,
        level: n,
        c: f.c(),
        view: FieldView::OverL,
        generic_mults,
    })
}

impl MarkovGraph {
    pub fn from_adjacency(adj: Vec<Vec<u8>>, c: u64) -> Self {
        MarkovGraph {
            vertices: Vec::new(),
            generic_mults: vec![1; adj.len()],
            adj,
            level: 0,
            c,
            view: FieldView::OverL,
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.len())
            .map(|w| self.adj.iter().map(|row| row[w] as u64).sum())
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (v, row) in self.adj.iter().enumerate() {
            for (w, &a) in row.iter().enumerate() {
                if a == 1 {
                    e.push((v, w));
                }
            }
        }
        e
    }

    /// Some power of A has all entries positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return false;
        }
        let bound = n * n - 2 * n + 2; // Wielandt
        let mut p: Vec<Vec<bool>> = self.adj.iter().map(|r| r.iter().map(|&a| a == 1).collect()).collect();
        for _ in 1..=bound.max(1) {
            if p.iter().all(|r| r.iter().all(|&x| x)) {
                return true;
            }
            p = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).any(|k| p[i][k] && self.adj[k][j] == 1))
                        .collect()
                })
                .collect();
        }
        p.iter().all(|r| r.iter().all(|&x| x))
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&v| v < self.len())
            && word.windows(2).all(|w| self.adj[w[0]][w[1]] == 1)
    }

    /// Classes of vertices whose balls are Galois conjugate, with the
    /// induced adjacency. Only a coarse picture when multiplicities exceed 1.
    pub fn galois_quotient(&self) -> Result<Quotient> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut key_of: Vec<String> = Vec::new();
        for (v, b) in self.vertices.iter().enumerate() {
            let conj = b.center.galois_conjugates()?;
            let rep = conj.iter().min_by(|x, y| x.cmp_canonical(y)).unwrap();
            let key = format!("{rep}|{}|{}", fmt_q(&b.t), b.kind.name());
            match key_of.iter().position(|k| *k == key) {
                Some(i) => classes[i].push(v),
                None => {
                    key_of.push(key);
                    classes.push(vec![v]);
                }
            }
        }
        let k = classes.len();
        let mut adj = vec![vec![0u8; k]; k];
        for (i, ci) in classes.iter().enumerate() {
            for (j, cj) in classes.iter().enumerate() {
                if ci.iter().any(|&v| cj.iter().any(|&w| self.adj[v][w] == 1)) {
                    adj[i][j] = 1;
                }
            }
        }
        Ok((classes, adj))
    }

    pub fn to_json(&self, parry: Option<&ParryData>) -> Value {
        let verts: Vec<Value> = self.vertices.iter().map(Ball::to_json).collect();
        let edges: Vec<Value> = self.edges().into_iter().map(|(a, b)| json!([a, b])).collect();
        let mut v = json!({
            "level": self.level,
            "vertices": verts,
            "edges": edges,
            "generic_multiplicities": self.generic_mults,
        });
        if let Some(p) = parry {
            v["parry"] = Value::Array(p.m.iter().map(|x| Value::String(fmt_q(x))).collect());
        }
        v
    }
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][col].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let k = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &k * y;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Exact Parry vector: kernel of A − cI, normalized to total mass 1.
pub fn parry(g: &MarkovGraph) -> Result<ParryData> {
    let n = g.len();
    let c = qi(g.c as i64);
    let mut m: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| qi(g.adj[i][j] as i64) - if i == j { c.clone() } else { Q::zero() })
                .collect()
        })
        .collect();
    let pivots = rref(&mut m);
    let nullity = n - pivots.len();
    if nullity != 1 {
        return Err(Error::DegenerateEigenspace(nullity));
    }
    let free = (0..n).find(|j| !pivots.contains(j)).unwrap();
    let mut v = vec![Q::zero(); n];
    v[free] = Q::one();
    for (r, &p) in pivots.iter().enumerate() {
        v[p] = -m[r][free].clone();
    }
    let total: Q = v.iter().sum();
    for x in v.iter_mut() {
        *x /= &total;
    }
    if v.iter().any(|x| !x.is_positive()) {
        return Err(Error::DegenerateEigenspace(nullity));
    }
    let data = ParryData {
        m: v,
        c: g.c,
        adj: g.adj.clone(),
    };
    debug_assert!(data.residual().iter().all(Q::is_zero));
    Ok(data)
}

impl ParryData {
    /// A·M − c·M, exactly.
    pub fn residual(&self) -> Vec<Q> {
        let c = qi(self.c as i64);
        (0..self.m.len())
            .map(|i| {
                let am: Q = (0..self.m.len())
                    .filter(|&j| self.adj[i][j] == 1)
                    .map(|j| self.m[j].clone())
                    .sum();
                am - &c * &self.m[i]
            })
            .collect()
    }

    /// μ([v_0 … v_n]) = c^{-n} A_{v_0 v_1} ⋯ A_{v_{n−1} v_n} M_{v_n}.
    pub fn cylinder_mass(&self, word: &[usize]) -> Result<Q> {
        if word.is_empty() {
            return Err(Error::Invalid("empty word".into()));
        }
        if let Some(&v) = word.iter().find(|&&v| v >= self.m.len()) {
            return Err(Error::UnknownVertex(v));
        }
        if word.windows(2).any(|w| self.adj[w[0]][w[1]] == 0) {
            return Ok(Q::zero());
        }
        let n = word.len() as u32 - 1;
        let scale = Q::new(1.into(), num_bigint::BigInt::from(self.c).pow(n));
        Ok(scale * &self.m[*word.last().unwrap()])
    }

    /// Markov chain sample of the Parry measure, reproducible per seed.
    pub fn sample_itinerary(&self, length: usize, seed: u64) -> Vec<usize> {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(seed), length)
    }

    /// Parry-Markov word drawn from a caller-owned generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, length: usize) -> Vec<usize> {
        let mut word = Vec::with_capacity(length);
        if length == 0 {
            return word;
        }
        let to_f = crate::arith::q_to_f64;
        let init = WeightedIndex::new(self.m.iter().map(to_f)).expect("positive masses");
        let mut v = init.sample(rng);
        word.push(v);
        let c = self.c as f64;
        while word.len() < length {
            let w: Vec<f64> = (0..self.m.len())
                .map(|u| self.adj[v][u] as f64 * to_f(&self.m[u]) / (c * to_f(&self.m[v])))
                .collect();
            v = WeightedIndex::new(&w).expect("some transition").sample(rng);
            word.push(v);
        }
        word
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquidistributionReport {
    pub n: usize,
    /// Preimage counts (with multiplicity) per vertex.
    pub counts: Vec<u64>,
    /// Preimages outside every vertex ball.
    pub outside: u64,
    pub weights: Vec<Q>,
    /// weights[v] − M_v.
    pub deviation: Vec<Q>,
}

impl EquidistributionReport {
    pub fn is_exact(&self) -> bool {
        self.outside == 0 && self.deviation.iter().all(Q::is_zero)
    }
}

/// All n-th rigid preimages of x0 with multiplicity.
pub fn iterated_preimages(f: &SkewMap, x0: &PS, n: usize, prec: &Q) -> Result<Vec<(PS, u64)>> {
    let mut layer: Vec<(PS, u64)> = vec![(x0.clone(), 1)];
    for _ in 0..n {
        let next = par::try_map(&layer, |(psi, mult)| {
            f.preimages_rigid(psi, prec).map(|v| {
                v.into_iter()
                    .map(|p| (p.root, mult * p.r as u64))
                    .collect::<Vec<_>>()
            })
        })?;
        layer = next.into_iter().flatten().collect();
    }
    Ok(layer)
}

/// Bins (d^n/c^n)(f_⋄^n)^*δ_{x0}, restricted to rigid preimages over 𝕃,
/// by the graph's balls and compares with the Parry masses.
pub fn equidistribution_check(
    f: &SkewMap,
    g: &MarkovGraph,
    p: &ParryData,
    x0: &PS,
    n: usize,
) -> Result<EquidistributionReport> {
    let tmax = g.vertices.iter().map(|b| b.t.clone()).max().unwrap_or_else(Q::zero);
    let prec = tmax + qi(2);
    let pre = iterated_preimages(f, x0, n, &prec)?;
    let mut counts = vec![0u64; g.len()];
    let mut outside = 0;
    for (phi, mult) in &pre {
        match g.vertices.iter().position(|b| b.contains_series(phi)) {
            Some(v) => counts[v] += mult,
            None => outside += mult,
        }
    }
    let total = Q::from_integer(num_bigint::BigInt::from(f.c()).pow(n as u32));
    let weights: Vec<Q> = counts.iter().map(|&k| qi(k as i64) / &total).collect();
    let deviation = weights.iter().zip(&p.m).map(|(w, m)| w - m).collect();
    Ok(EquidistributionReport {
        n,
        counts,
        outside,
        weights,
        deviation,
    })
}
