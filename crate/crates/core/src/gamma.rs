//! Gamma modules: finitely generated Q-subspaces of `(ParamScalar)^K`.
//!
//! A vector of `K` scalars over a basis of size `d` is flattened to `K * d`
//! rational coordinates (entry `e`, coordinate `c` at position `e * d + c`).
//! Modules are compared through the reduced row-echelon form of their
//! generators.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{mul_q, rref, rref_with_transform, transpose, QMatrix};
use crate::measures::MeasureVector;
use crate::scalars::{ParamScalar, Rational};
use crate::words::GeneratingSequence;

#[derive(Debug)]
pub struct GammaModule {
    k: usize,
    dim: usize,
    generators: Vec<Vec<Rational>>,
    canonical: OnceLock<Vec<Vec<Rational>>>,
}

impl Clone for GammaModule {
    fn clone(&self) -> Self {
        GammaModule {
            k: self.k,
            dim: self.dim,
            generators: self.generators.clone(),
            canonical: self.canonical.clone(),
        }
    }
}

impl PartialEq for GammaModule {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.dim == other.dim
            && self.canonical_basis() == other.canonical_basis()
    }
}

impl Eq for GammaModule {}

fn flatten(dim: usize, v: &[ParamScalar]) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(v.len() * dim);
    for s in v {
        if s.coords().len() > dim {
            return Err(Error::BasisMismatch(format!(
                "scalar with {} coordinates in a module over {dim} basis entries",
                s.coords().len()
            )));
        }
        out.extend(s.padded(dim));
    }
    Ok(out)
}

impl GammaModule {
    pub fn new(k: usize, dim: usize, generators: &[Vec<ParamScalar>]) -> Result<Self> {
        let rows = generators
            .iter()
            .map(|g| {
                if g.len() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "generator has {} entries, expected {k}",
                        g.len()
                    )));
                }
                flatten(dim, g)
            })
            .collect::<Result<_>>()?;
        Self::from_rows(k, dim, rows)
    }

    pub fn from_rows(k: usize, dim: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if k == 0 || dim == 0 {
            return Err(Error::DimensionMismatch(
                "K and basis size must be positive".into(),
            ));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != k * dim) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} in a module of width {}",
                r.len(),
                k * dim
            )));
        }
        Ok(GammaModule {
            k,
            dim,
            generators: rows,
            canonical: OnceLock::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis_dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<Rational>] {
        &self.generators
    }

    /// Reduced row-echelon basis of the span (zero rows dropped).
    pub fn canonical_basis(&self) -> &[Vec<Rational>] {
        self.canonical.get_or_init(|| {
            if self.generators.is_empty() {
                return Vec::new();
            }
            rref(self.generators.clone()).basis().to_vec()
        })
    }

    /// Dimension of the module as a Q-vector space.
    pub fn dimension(&self) -> usize {
        self.canonical_basis().len()
    }

    /// The same module over a basis widened to `dim` entries.
    pub fn widened(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::DimensionMismatch("cannot narrow a module".into()));
        }
        let rows = self
            .generators
            .iter()
            .map(|r| {
                let mut out = Vec::with_capacity(self.k * dim);
                for e in 0..self.k {
                    out.extend_from_slice(&r[e * self.dim..(e + 1) * self.dim]);
                    out.extend(std::iter::repeat_n(Rational::zero(), dim - self.dim));
                }
                out
            })
            .collect();
        Self::from_rows(self.k, dim, rows)
    }

    /// `phi(G)`: entry `e` of every vector moves to position `perm[e]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if !is_permutation(perm, self.k) {
            return Err(Error::DimensionMismatch(format!(
                "{perm:?} is not a permutation of {}",
                self.k
            )));
        }
        let d = self.dim;
        let rows = self
            .generators
            .iter()
            .map(|r| {
                let mut out = vec![Rational::zero(); r.len()];
                for (e, &to) in perm.iter().enumerate() {
                    out[to * d..(to + 1) * d].clone_from_slice(&r[e * d..(e + 1) * d]);
                }
                out
            })
            .collect();
        Self::from_rows(self.k, d, rows)
    }

    /// The all-ones vector `1^K`, flattened.
    pub fn ones(&self) -> Vec<Rational> {
        flatten(self.dim, &vec![ParamScalar::one(); self.k]).expect("constant fits any basis")
    }

    /// Coefficients of `v` over the canonical basis, if `v` lies in the module.
    pub fn membership(&self, v: &[ParamScalar]) -> Result<Option<Vec<Rational>>> {
        if v.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} entries, module has K={}",
                v.len(),
                self.k
            )));
        }
        let flat = match flatten(self.dim, v) {
            Ok(f) => f,
            Err(_) => return Ok(None),
        };
        Ok(self.membership_flat(&flat))
    }

    fn membership_flat(&self, flat: &[Rational]) -> Option<Vec<Rational>> {
        let basis = self.canonical_basis();
        let mut coeffs = Vec::with_capacity(basis.len());
        let mut rest = flat.to_vec();
        for row in basis {
            let pivot = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            let a = rest[pivot].clone();
            if !a.is_zero() {
                for (x, y) in rest.iter_mut().zip(row) {
                    *x -= &a * y;
                }
            }
            coeffs.push(a);
        }
        rest.iter().all(|x| x.is_zero()).then_some(coeffs)
    }

    /// Coefficients of `v` over the stored generators (one solution), if any.
    pub fn generator_coefficients(&self, v: &[ParamScalar]) -> Result<Option<Vec<Rational>>> {
        let Some(coeffs) = self.membership(v)? else {
            return Ok(None);
        };
        if self.generators.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let (_, e) = rref_with_transform(self.generators.clone());
        let mut out = vec![Rational::zero(); self.generators.len()];
        for (r, a) in coeffs.iter().enumerate() {
            for (g, x) in out.iter_mut().enumerate() {
                *x += a * &e[r][g];
            }
        }
        Ok(Some(out))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("gamma K={} dim={}\n", self.k, self.dim);
        for row in self.canonical_basis() {
            let cells: Vec<String> = row.iter().map(|q| q.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty gamma module text".into()))?;
        let mut k = None;
        let mut dim = None;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("gamma") {
            return Err(Error::InvalidConfig(
                "gamma header must start with `gamma`".into(),
            ));
        }
        for f in fields {
            if let Some(v) = f.strip_prefix("K=") {
                k = v.parse().ok();
            } else if let Some(v) = f.strip_prefix("dim=") {
                dim = v.parse().ok();
            }
        }
        let (Some(k), Some(dim)) = (k, dim) else {
            return Err(Error::InvalidConfig(
                "gamma header needs K= and dim=".into(),
            ));
        };
        let rows = lines
            .map(|l| {
                l.split(',')
                    .map(|c| c.trim().parse::<Rational>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::InvalidConfig(format!("bad gamma row `{l}`: {e}")))
            })
            .collect::<Result<_>>()?;
        Self::from_rows(k, dim, rows)
    }
}

impl fmt::Display for GammaModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn is_permutation(perm: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    perm.len() == k
        && perm
            .iter()
            .all(|&p| p < k && !std::mem::replace(&mut seen[p], true))
}

/// Next permutation in lexicographic order, in place; false after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// First permutation (lexicographic) `phi` with `phi(g2) = g1`, if any.
pub fn orbit_equivalent(g1: &GammaModule, g2: &GammaModule) -> Option<Vec<usize>> {
    if g1.k != g2.k {
        return None;
    }
    let dim = g1.dim.max(g2.dim);
    let a = g1.widened(dim).ok()?;
    let b = g2.widened(dim).ok()?;
    if a.dimension() != b.dimension() {
        return None;
    }
    let mut perm: Vec<usize> = (0..a.k).collect();
    loop {
        let moved = b.permuted(&perm).ok()?;
        if moved.canonical_basis() == a.canonical_basis() {
            return Some(perm);
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

/// Decision line for [`orbit_equivalent`]; permutations print one-based.
pub fn decision_text(perm: Option<&[usize]>) -> String {
    match perm {
        Some(p) => {
            let cells: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
            format!("equivalent: yes perm=({})", cells.join(","))
        }
        None => "equivalent: no".to_string(),
    }
}

/// Per-level dimension of the truncated module, for stabilization reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stabilization {
    pub dims: Vec<(usize, usize)>,
}

impl Stabilization {
    /// Whether the last two recorded dimensions agree.
    pub fn stable(&self) -> bool {
        matches!(self.dims.as_slice(), [.., (_, a), (_, b)] if a == b)
    }
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, d) in &self.dims {
            writeln!(f, "gamma dim through level {n}: {d}")?;
        }
        Ok(())
    }
}

/// Gamma module of a uniquely ergodic system: the span of `1` and every
/// cylinder measure `c[n][i]` with `n <= up_to`.
pub fn gamma_from_system(
    gs: &GeneratingSequence,
    mv: &MeasureVector,
    up_to: usize,
    dim: usize,
) -> Result<(GammaModule, Stabilization)> {
    gamma_from_measures(gs, std::slice::from_ref(mv), up_to, dim)
}

/// Gamma module for `K = mvs.len()` measures: span of `1^K` and, per cylinder,
/// the vector of its measures.
pub fn gamma_from_measures(
    gs: &GeneratingSequence,
    mvs: &[MeasureVector],
    up_to: usize,
    dim: usize,
) -> Result<(GammaModule, Stabilization)> {
    let k = mvs.len();
    if k == 0 {
        return Err(Error::DimensionMismatch("no measure vectors".into()));
    }
    let up_to = up_to.min(gs.last_level());
    let mut gens: Vec<Vec<ParamScalar>> = vec![vec![ParamScalar::one(); k]];
    let mut dims = Vec::new();
    for n in gs.first_level()..=up_to {
        let count = gs.word_count(n)?;
        for i in 0..count {
            let v = mvs
                .iter()
                .map(|mv| {
                    mv.get(n, i).cloned().ok_or_else(|| {
                        Error::InconsistentMeasure(format!("no measure for level {n} word {i}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            gens.push(v);
        }
        let partial = GammaModule::new(k, dim, &gens)?;
        dims.push((n, partial.dimension()));
    }
    Ok((GammaModule::new(k, dim, &gens)?, Stabilization { dims }))
}

fn span_rows(v: &[ParamScalar], dim: usize) -> QMatrix {
    v.iter()
        .map(|s| s.padded(dim))
        .chain(std::iter::once(ParamScalar::one().padded(dim)))
        .collect()
}

fn fn_dim(xs: &[ParamScalar], ys: &[ParamScalar]) -> usize {
    xs.iter()
        .chain(ys)
        .map(|s| s.coords().len())
        .max()
        .unwrap_or(0)
        .max(1)
}

/// Whether `span{x.., 1} = span{y.., 1}` over Q.
pub fn fn_equivalent(xs: &[ParamScalar], ys: &[ParamScalar]) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    let dim = fn_dim(xs, ys);
    rref(span_rows(xs, dim)).basis() == rref(span_rows(ys, dim)).basis()
}

/// An invertible `M` with `(x.., 1) M = (y.., 1)` when the spans agree.
pub fn fn_witness(xs: &[ParamScalar], ys: &[ParamScalar]) -> Option<QMatrix> {
    if xs.len() != ys.len() {
        return None;
    }
    let dim = fn_dim(xs, ys);
    let (rx, ex) = rref_with_transform(span_rows(xs, dim));
    let (ry, ey) = rref_with_transform(span_rows(ys, dim));
    if rx.rows != ry.rows {
        return None;
    }
    let ey_inv = crate::linalg::inverse(&ey)?;
    // Y = P X with P = E_y^-1 E_x, and (x, 1) M = (y, 1) reads Y = M^T X.
    Some(transpose(&mul_q(&ey_inv, &ex)))
}

/// Checks `(x.., 1) M = (y.., 1)` exactly.
pub fn check_fn_witness(xs: &[ParamScalar], ys: &[ParamScalar], m: &QMatrix) -> bool {
    let n = xs.len() + 1;
    if m.len() != n || m.iter().any(|r| r.len() != n) || ys.len() + 1 != n {
        return false;
    }
    let mut left: Vec<ParamScalar> = xs.to_vec();
    left.push(ParamScalar::one());
    let mut right: Vec<ParamScalar> = ys.to_vec();
    right.push(ParamScalar::one());
    (0..n).all(|col| {
        let column: Vec<Rational> = m.iter().map(|r| r[col].clone()).collect();
        ParamScalar::combine(column.iter().zip(&left)) == right[col]
    }) && crate::linalg::inverse(m).is_some()
}

/// The all-ones generator of a module is always a member.
pub fn contains_ones(g: &GammaModule) -> bool {
    g.membership_flat(&g.ones()).is_some()
}

/// `1` as a rational, for callers building generator rows by hand.
pub fn unit() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat, ParamBasis};

    fn basis() -> ParamBasis {
        ParamBasis::sqrt_primes(&[2, 3]).unwrap()
    }

    fn e(b: &ParamBasis, s: &str) -> ParamScalar {
        b.parse_expr(s).unwrap()
    }

    fn span(b: &ParamBasis, items: &[&str]) -> GammaModule {
        let mut gens = vec![vec![ParamScalar::one()]];
        gens.extend(items.iter().map(|s| vec![e(b, s)]));
        GammaModule::new(1, b.len(), &gens).unwrap()
    }

    #[test]
    fn canonical_examples() {
        let q = |rows: &[&[i64]]| -> Vec<Vec<Rational>> {
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
                .collect()
        };
        let g = GammaModule::from_rows(1, 2, q(&[&[1, 3], &[2, 5]])).unwrap();
        assert_eq!(g.canonical_basis(), q(&[&[1, 0], &[0, 1]]).as_slice());
        let z = GammaModule::from_rows(1, 2, q(&[&[0, 0]])).unwrap();
        assert!(z.canonical_basis().is_empty());
        let d = GammaModule::from_rows(1, 2, q(&[&[2, 0], &[1, 0]])).unwrap();
        assert_eq!(d.canonical_basis(), q(&[&[1, 0]]).as_slice());
    }

    #[test]
    fn orbit_examples() {
        let b = basis();
        assert_eq!(
            orbit_equivalent(&span(&b, &["sqrt2"]), &span(&b, &["3*sqrt2+1/2"])),
            Some(vec![0])
        );
        assert_eq!(
            orbit_equivalent(&span(&b, &["sqrt2"]), &span(&b, &["sqrt3"])),
            None
        );

        let g1 = GammaModule::new(
            2,
            b.len(),
            &[
                vec![ParamScalar::one(), ParamScalar::one()],
                vec![e(&b, "sqrt2"), e(&b, "1/3")],
            ],
        )
        .unwrap();
        let g2 = g1.permuted(&[1, 0]).unwrap();
        assert_eq!(orbit_equivalent(&g1, &g2), Some(vec![1, 0]));
        assert_eq!(decision_text(Some(&[1, 0])), "equivalent: yes perm=(2,1)");
    }

    #[test]
    fn fn_examples() {
        let b = basis();
        let x = [e(&b, "sqrt2")];
        let y = [e(&b, "2*sqrt2+1/3")];
        assert!(fn_equivalent(&x, &y));
        let m = fn_witness(&x, &y).unwrap();
        assert_eq!(
            m,
            vec![vec![rat(2, 1), rat(0, 1)], vec![rat(1, 3), rat(1, 1)]]
        );
        assert!(check_fn_witness(&x, &y, &m));
        assert!(!fn_equivalent(&x, &[e(&b, "sqrt3")]));
        assert!(fn_equivalent(&x, &x));
    }

    #[test]
    fn membership_examples() {
        let b = ParamBasis::sqrt_primes(&[2, 3, 5]).unwrap();
        let g =
            GammaModule::new(1, b.len(), &[vec![e(&b, "sqrt2")], vec![e(&b, "sqrt3+1")]]).unwrap();
        assert!(g.membership(&[e(&b, "sqrt5")]).unwrap().is_none());
        let sum = e(&b, "sqrt2+sqrt3+1");
        assert_eq!(
            g.generator_coefficients(&[sum]).unwrap(),
            Some(vec![rat(1, 1), rat(1, 1)])
        );
        assert!(contains_ones(&span(&b, &["sqrt2"])));
    }

    #[test]
    fn text_round_trip() {
        let b = basis();
        let g = span(&b, &["sqrt2", "sqrt3/7"]);
        let back = GammaModule::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn module() -> impl Strategy<Value = GammaModule> {
            proptest::collection::vec(proptest::collection::vec(-3i64..4, 6), 1..4).prop_map(
                |rows| {
                    let rows = rows
                        .into_iter()
                        .map(|r| r.into_iter().map(|x| rat(x, 1)).collect())
                        .collect();
                    GammaModule::from_rows(3, 2, rows).unwrap()
                },
            )
        }

        proptest! {
            #[test]
            fn orbit_relation_laws(g in module(), p in 0usize..6, q in 0usize..6) {
                let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                let h = g.permuted(&perms[p]).unwrap();
                let k = h.permuted(&perms[q]).unwrap();
                prop_assert!(orbit_equivalent(&g, &g).is_some());
                let w = orbit_equivalent(&h, &g).unwrap();
                prop_assert_eq!(g.permuted(&w).unwrap(), h.clone());
                let back = orbit_equivalent(&g, &h).unwrap();
                prop_assert_eq!(h.permuted(&back).unwrap(), g.clone());
                let wk = orbit_equivalent(&k, &g).unwrap();
                prop_assert_eq!(g.permuted(&wk).unwrap(), k);
            }

            #[test]
            fn fn_witness_transports(a in -4i64..5, b0 in 1i64..5, c in -4i64..5, d in 1i64..5) {
                prop_assume!(a != 0);
                let basis = ParamBasis::sqrt_primes(&[2, 3]).unwrap();
                let x = [basis.param(1)];
                let y = [&basis.param(1).scale(&rat(a, b0)) + &ParamScalar::rational(rat(c, d))];
                prop_assert!(fn_equivalent(&x, &y));
                let m = fn_witness(&x, &y).unwrap();
                prop_assert!(check_fn_witness(&x, &y, &m));
            }
        }
    }
}
