//! Finite-dimensional graded DGLAs by structure constants and the Deligne
//! 2-groupoid `MC^2(g ⊗ m)`: Maurer-Cartan elements, gauge transformations,
//! 2-morphisms and their compositions.
//!
//! Conventions fixed here and used everywhere else:
//! * degrees below -1 are rejected;
//! * an MC element is a degree-1 element `γ` with coefficients in `m` and
//!   `dγ + 1/2 [γ,γ] = 0`;
//! * `exp g^0` acts by `(exp X)·γ = γ - Σ_i (ad X)^i/(i+1)! (dX + [γ,X])`;
//! * equality of gauge transforms / 2-morphisms is equality of logarithms;
//! * BCH products are evaluated through the Dynkin series, truncated at
//!   bracket length `N-1` (longer terms lie in `m^N = 0`).

use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

use crate::coefficients::{ArtinRing, RElement, Rational};
use crate::error::CoreError;
use crate::linalg::Mat;

/// Minimal graded-Lie interface the Deligne 2-groupoid operations need.
/// Implemented by [`Dgla`] and by the cosimplicial slices of the descent
/// machinery.
pub trait Gla {
    type Elt: Clone + PartialEq + std::fmt::Debug;

    fn ring(&self) -> ArtinRing;
    fn degree(&self, e: &Self::Elt) -> i64;
    fn zero(&self, degree: i64) -> Self::Elt;
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn neg(&self, a: &Self::Elt) -> Self::Elt;
    fn scale_rat(&self, c: &Rational, a: &Self::Elt) -> Self::Elt;
    fn d(&self, a: &Self::Elt) -> Self::Elt;
    fn bracket(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn is_zero(&self, a: &Self::Elt) -> bool;
    /// All coordinates in the maximal ideal.
    fn in_maximal_ideal(&self, a: &Self::Elt) -> bool;
    /// Smallest t-adic valuation over all coordinates (N for zero).
    fn valuation(&self, a: &Self::Elt) -> usize;

    fn sub(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt {
        self.add(a, &self.neg(b))
    }
}

/// `dγ + 1/2 [γ, γ]`; zero iff `γ` is Maurer-Cartan.
pub fn mc_residual<G: Gla>(g: &G, gamma: &G::Elt) -> Result<G::Elt, CoreError> {
    if g.degree(gamma) != 1 {
        return Err(CoreError::DegreeMismatch {
            expected: 1,
            got: g.degree(gamma),
        });
    }
    if !g.in_maximal_ideal(gamma) {
        return Err(CoreError::Precondition(
            "MC candidates must have coefficients in the maximal ideal".into(),
        ));
    }
    let half = BigRational::new(1.into(), 2.into());
    Ok(g.add(&g.d(gamma), &g.scale_rat(&half, &g.bracket(gamma, gamma))))
}

pub fn is_mc<G: Gla>(g: &G, gamma: &G::Elt) -> bool {
    mc_residual(g, gamma)
        .map(|r| g.is_zero(&r))
        .unwrap_or(false)
}

/// `exp(ad x)(a)`, truncated by nilpotency of `m`.
pub fn exp_ad<G: Gla>(g: &G, x: &G::Elt, a: &G::Elt) -> G::Elt {
    let n = g.ring().order();
    let mut acc = a.clone();
    let mut term = a.clone();
    let mut kfact = BigRational::one();
    for k in 1..n {
        term = g.bracket(x, &term);
        if g.is_zero(&term) {
            break;
        }
        kfact = kfact * BigRational::from_integer((k as i64).into());
        acc = g.add(&acc, &g.scale_rat(&(BigRational::one() / &kfact), &term));
    }
    acc
}

/// Gauge action `(exp X)·γ = γ - Σ_{i≥0} (ad X)^i/(i+1)! (dX + [γ, X])`.
///
/// `X` must be degree 0 with coefficients in `m`; `γ` must be Maurer-Cartan.
pub fn gauge_act<G: Gla>(g: &G, x: &G::Elt, gamma: &G::Elt) -> Result<G::Elt, CoreError> {
    if g.degree(x) != 0 {
        return Err(CoreError::DegreeMismatch {
            expected: 0,
            got: g.degree(x),
        });
    }
    if !g.in_maximal_ideal(x) {
        return Err(CoreError::Precondition("gauge log must lie in m".into()));
    }
    let res = mc_residual(g, gamma)?;
    if !g.is_zero(&res) {
        return Err(CoreError::Precondition(
            "gauge_act needs a Maurer-Cartan element".into(),
        ));
    }
    Ok(gauge_act_unchecked(g, x, gamma))
}

/// Same series without the MC precondition check (used internally where the
/// input is MC by construction).
pub fn gauge_act_unchecked<G: Gla>(g: &G, x: &G::Elt, gamma: &G::Elt) -> G::Elt {
    let n = g.ring().order();
    let u = g.add(&g.d(x), &g.bracket(gamma, x));
    let mut out = gamma.clone();
    let mut term = u;
    let mut fact = BigRational::one(); // (i+1)! at i = 0
    for i in 0..n {
        if g.is_zero(&term) {
            break;
        }
        fact = fact * BigRational::from_integer((i as i64 + 1).into());
        out = g.sub(&out, &g.scale_rat(&(BigRational::one() / &fact), &term));
        term = g.bracket(x, &term);
    }
    out
}

/// Twisted degree -1 bracket `[a, b]_γ = [a, db + [γ, b]]`.
pub fn twisted_bracket<G: Gla>(
    g: &G,
    gamma: &G::Elt,
    a: &G::Elt,
    b: &G::Elt,
) -> Result<G::Elt, CoreError> {
    for e in [a, b] {
        if g.degree(e) != -1 {
            return Err(CoreError::DegreeMismatch {
                expected: -1,
                got: g.degree(e),
            });
        }
    }
    Ok(twisted_bracket_unchecked(g, gamma, a, b))
}

fn twisted_bracket_unchecked<G: Gla>(g: &G, gamma: &G::Elt, a: &G::Elt, b: &G::Elt) -> G::Elt {
    g.bracket(a, &g.add(&g.d(b), &g.bracket(gamma, b)))
}

/// `l_γ(t) = dt + [γ, t]`, the log of the gauge transform a 2-morphism acts by.
pub fn two_morphism_gauge_log<G: Gla>(g: &G, gamma: &G::Elt, t: &G::Elt) -> G::Elt {
    g.add(&g.d(t), &g.bracket(gamma, t))
}

fn factorial(k: usize) -> BigRational {
    let mut f = BigRational::one();
    for i in 2..=k {
        f = f * BigRational::from_integer((i as i64).into());
    }
    f
}

/// All block sequences ((r_1,s_1),...,(r_n,s_n)), each nonzero, total = len.
fn dynkin_blocks(len: usize) -> Vec<Vec<(usize, usize)>> {
    fn extend(acc: &mut Vec<Vec<(usize, usize)>>, cur: &mut Vec<(usize, usize)>, rem: usize) {
        if rem == 0 {
            acc.push(cur.clone());
            return;
        }
        for r in 0..=rem {
            for s in 0..=(rem - r) {
                if r + s == 0 {
                    continue;
                }
                cur.push((r, s));
                extend(acc, cur, rem - r - s);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut out, &mut Vec::new(), len);
    out
}

/// `log(exp X exp Y)` by the Dynkin series with an arbitrary bracket.
/// Terms of bracket length `>= N` vanish since all inputs lie in `m`.
fn dynkin<E: Clone, B: Fn(&E, &E) -> E, A: Fn(&E, &Rational) -> E, P: Fn(&E, &E) -> E>(
    x: &E,
    y: &E,
    zero: E,
    brk: B,
    scale: A,
    plus: P,
    max_len: usize,
) -> E {
    let mut acc = zero;
    for len in 1..=max_len {
        for blocks in dynkin_blocks(len) {
            // word letters: true = X, false = Y
            let mut letters = Vec::with_capacity(len);
            let mut denom = BigRational::from_integer((len as i64).into());
            for &(r, s) in &blocks {
                letters.extend(std::iter::repeat(true).take(r));
                letters.extend(std::iter::repeat(false).take(s));
                denom = denom * factorial(r) * factorial(s);
            }
            let n = blocks.len();
            denom = denom * BigRational::from_integer((n as i64).into());
            let mut coeff = BigRational::one() / denom;
            if n % 2 == 0 {
                coeff = -coeff;
            }
            // right-nested bracket of the word
            let letter = |b: bool| if b { x.clone() } else { y.clone() };
            let mut val = letter(letters[len - 1]);
            for &l in letters[..len - 1].iter().rev() {
                val = brk(&letter(l), &val);
            }
            acc = plus(&acc, &scale(&val, &coeff));
        }
    }
    acc
}

/// BCH product in `exp g^0`: `log(exp X exp Y)` for degree-0 logs in `m`.
pub fn bch_plain<G: Gla>(g: &G, x: &G::Elt, y: &G::Elt) -> Result<G::Elt, CoreError> {
    for e in [x, y] {
        if g.degree(e) != 0 {
            return Err(CoreError::DegreeMismatch {
                expected: 0,
                got: g.degree(e),
            });
        }
        if !g.in_maximal_ideal(e) {
            return Err(CoreError::Precondition("BCH logs must lie in m".into()));
        }
    }
    let max_len = g.ring().order().saturating_sub(1);
    Ok(dynkin(
        x,
        y,
        g.zero(0),
        |a, b| g.bracket(a, b),
        |a, c| g.scale_rat(c, a),
        |a, b| g.add(a, b),
        max_len,
    ))
}

/// BCH product in the unipotent group `exp_γ g^{-1}` (twisted bracket).
pub fn bch_twisted<G: Gla>(
    g: &G,
    gamma: &G::Elt,
    x: &G::Elt,
    y: &G::Elt,
) -> Result<G::Elt, CoreError> {
    for e in [x, y] {
        if g.degree(e) != -1 {
            return Err(CoreError::DegreeMismatch {
                expected: -1,
                got: g.degree(e),
            });
        }
        if !g.in_maximal_ideal(e) {
            return Err(CoreError::Precondition("BCH logs must lie in m".into()));
        }
    }
    let max_len = g.ring().order().saturating_sub(1);
    Ok(dynkin(
        x,
        y,
        g.zero(-1),
        |a, b| twisted_bracket_unchecked(g, gamma, a, b),
        |a, c| g.scale_rat(c, a),
        |a, b| g.add(a, b),
        max_len,
    ))
}

/// 2-morphism action on 1-morphisms:
/// `(exp_γ t)·(exp X) = exp(dt + [γ,t]) exp X`, returned as its log.
pub fn two_morphism_act<G: Gla>(
    g: &G,
    gamma: &G::Elt,
    t: &G::Elt,
    x: &G::Elt,
) -> Result<G::Elt, CoreError> {
    if g.degree(t) != -1 {
        return Err(CoreError::DegreeMismatch {
            expected: -1,
            got: g.degree(t),
        });
    }
    bch_plain(g, &two_morphism_gauge_log(g, gamma, t), x)
}

/// Vertical composition in `exp_γ g^{-1}`: `second · first` (logs).
pub fn vertical_compose<G: Gla>(
    g: &G,
    gamma: &G::Elt,
    second: &G::Elt,
    first: &G::Elt,
) -> Result<G::Elt, CoreError> {
    bch_twisted(g, gamma, second, first)
}

/// Horizontal composition of 2-morphisms. `outer` sits over gauge transforms
/// `γ2 -> γ3` with source log `x_outer`, `inner` over `γ1 -> γ2`. The result
/// (a 2-morphism between the composed gauge transforms) has log
/// `bch_γ3(t_outer, e^{ad x_outer}(t_inner))`.
pub fn horizontal_compose<G: Gla>(
    g: &G,
    gamma3: &G::Elt,
    t_outer: &G::Elt,
    x_outer: &G::Elt,
    t_inner: &G::Elt,
) -> Result<G::Elt, CoreError> {
    bch_twisted(g, gamma3, t_outer, &exp_ad(g, x_outer, t_inner))
}

// ---------------------------------------------------------------------------
// Structure-constant DGLAs
// ---------------------------------------------------------------------------

/// Bracket table for a fixed degree pair: `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
type BracketTable = Vec<Vec<Vec<Rational>>>;

/// A finite-dimensional graded DGLA presented by structure constants,
/// concentrated in degrees >= -1.
#[derive(Debug, Clone)]
pub struct Dgla {
    ring: ArtinRing,
    dims: BTreeMap<i64, usize>,
    /// differential blocks: degree p -> matrix `dim(p+1) x dim(p)`
    diff: BTreeMap<i64, Mat>,
    /// bracket tables per degree pair
    brackets: BTreeMap<(i64, i64), BracketTable>,
}

impl Dgla {
    pub fn new(ring: ArtinRing, dims: BTreeMap<i64, usize>) -> Result<Self, CoreError> {
        if dims.keys().any(|&p| p < -1) {
            return Err(CoreError::Invalid("DGLA has basis in degree < -1".into()));
        }
        Ok(Dgla {
            ring,
            dims,
            diff: BTreeMap::new(),
            brackets: BTreeMap::new(),
        })
    }

    pub fn dim(&self, degree: i64) -> usize {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        self.dims.iter().map(|(&p, &d)| (p, d))
    }

    /// Set the whole differential block `g^p -> g^{p+1}`.
    pub fn set_diff_block(&mut self, degree: i64, m: Mat) -> Result<(), CoreError> {
        if m.cols != self.dim(degree) || m.rows != self.dim(degree + 1) {
            return Err(CoreError::Invalid(format!(
                "differential block at degree {degree} has shape {}x{}, expected {}x{}",
                m.rows,
                m.cols,
                self.dim(degree + 1),
                self.dim(degree)
            )));
        }
        self.diff.insert(degree, m);
        Ok(())
    }

    /// Set a single structure constant `c^k_{ij}` for `[e_i^{pa}, e_j^{pb}]`.
    pub fn set_bracket(
        &mut self,
        pa: i64,
        pb: i64,
        i: usize,
        j: usize,
        k: usize,
        c: Rational,
    ) -> Result<(), CoreError> {
        let (da, db, dk) = (self.dim(pa), self.dim(pb), self.dim(pa + pb));
        if i >= da || j >= db || k >= dk {
            return Err(CoreError::Invalid(format!(
                "bracket index out of range: ({pa},{pb}) i={i} j={j} k={k}"
            )));
        }
        let table = self
            .brackets
            .entry((pa, pb))
            .or_insert_with(|| vec![vec![vec![BigRational::zero(); dk]; db]; da]);
        table[i][j][k] = c;
        Ok(())
    }

    /// Convenience: set `[e_i^{pa}, e_j^{pb}] = v` and the graded-antisymmetric
    /// mirror `[e_j, e_i] = -(-1)^{pa·pb} v`.
    pub fn set_bracket_pair(
        &mut self,
        pa: i64,
        pb: i64,
        i: usize,
        j: usize,
        v: &[(usize, Rational)],
    ) -> Result<(), CoreError> {
        for (k, c) in v {
            self.set_bracket(pa, pb, i, j, *k, c.clone())?;
            let sign = if (pa * pb) % 2 == 0 {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            if (pa, i) != (pb, j) {
                self.set_bracket(pb, pa, j, i, *k, c * sign)?;
            }
        }
        Ok(())
    }

    pub fn diff_block(&self, degree: i64) -> Mat {
        self.diff
            .get(&degree)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.dim(degree + 1), self.dim(degree)))
    }

    fn bracket_table(&self, pa: i64, pb: i64) -> Option<&BracketTable> {
        self.brackets.get(&(pa, pb))
    }

    pub fn element(&self, degree: i64, coeffs: Vec<RElement>) -> Result<DglaElement, CoreError> {
        if coeffs.len() != self.dim(degree) {
            return Err(CoreError::Invalid(format!(
                "element in degree {degree} needs {} coefficients, got {}",
                self.dim(degree),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.ring() != self.ring) {
            return Err(CoreError::RingMismatch {
                left: self.ring.order(),
                right: 0,
            });
        }
        Ok(DglaElement { degree, coeffs })
    }

    pub fn basis_element(&self, degree: i64, idx: usize, scalar: RElement) -> DglaElement {
        let mut coeffs = vec![self.ring.zero(); self.dim(degree)];
        coeffs[idx] = scalar;
        DglaElement { degree, coeffs }
    }

    /// ad(x) as an R-matrix on `g^p` (x of degree 0).
    fn ad_matrix(&self, x: &DglaElement, p: i64) -> RMat {
        let dp = self.dim(p);
        let mut m = RMat::zeros(self.ring, dp, dp);
        if let Some(table) = self.bracket_table(0, p) {
            for (i, xi) in x.coeffs.iter().enumerate() {
                if xi.is_zero() {
                    continue;
                }
                for j in 0..dp {
                    for k in 0..dp {
                        let c = &table[i][j][k];
                        if !c.is_zero() {
                            let v = m.at(k, j).add(&xi.scale(c)).unwrap();
                            m.set(k, j, v);
                        }
                    }
                }
            }
        }
        m
    }

    /// ad(γ) block `g^p -> g^{p+1}` for γ of degree 1, over R.
    fn ad1_matrix(&self, gamma: &DglaElement, p: i64) -> RMat {
        let dp = self.dim(p);
        let dq = self.dim(p + 1);
        let mut m = RMat::zeros(self.ring, dq, dp);
        if let Some(table) = self.bracket_table(1, p) {
            for (i, gi) in gamma.coeffs.iter().enumerate() {
                if gi.is_zero() {
                    continue;
                }
                for j in 0..dp {
                    for k in 0..dq {
                        let c = &table[i][j][k];
                        if !c.is_zero() {
                            let v = m.at(k, j).add(&gi.scale(c)).unwrap();
                            m.set(k, j, v);
                        }
                    }
                }
            }
        }
        m
    }

    /// Verify `d + ad γ2 = Ad(exp X) ∘ (d + ad γ1) ∘ Ad(exp(-X))` exactly on
    /// every graded piece (full operator conjugation).
    pub fn check_conjugation(
        &self,
        x: &DglaElement,
        gamma1: &DglaElement,
        gamma2: &DglaElement,
    ) -> Result<bool, CoreError> {
        if x.degree != 0 || gamma1.degree != 1 || gamma2.degree != 1 {
            return Err(CoreError::Precondition(
                "check_conjugation wants X in degree 0 and γ's in degree 1".into(),
            ));
        }
        let neg_x = DglaElement {
            degree: 0,
            coeffs: x.coeffs.iter().map(|c| c.neg()).collect(),
        };
        let degrees: Vec<i64> = self.dims.keys().copied().collect();
        for &p in &degrees {
            let dp = self.dim(p);
            let dq = self.dim(p + 1);
            if dp == 0 && dq == 0 {
                continue;
            }
            let dmat = RMat::from_mat(self.ring, &self.diff_block(p));
            let lhs = dmat.add(&self.ad1_matrix(gamma2, p));
            let mid =
                RMat::from_mat(self.ring, &self.diff_block(p)).add(&self.ad1_matrix(gamma1, p));
            let e_q = self.ad_matrix(x, p + 1).exp_nilpotent();
            let e_p_inv = self.ad_matrix(&neg_x, p).exp_nilpotent();
            let rhs = e_q.mul(&mid).mul(&e_p_inv);
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Basis of `ker(d: g^1 -> g^2) / im(d: g^0 -> g^1)` over Q: the
    /// first-order shadow of `MC^2` over `Q[t]/(t^2)`.
    pub fn first_order_classes(&self) -> Vec<Vec<Rational>> {
        let d1 = self.diff_block(1);
        let d0 = self.diff_block(0);
        let kernel = d1.nullspace();
        let dim1 = self.dim(1);
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for j in 0..d0.cols {
            rows.push((0..dim1).map(|i| d0.at(i, j).clone()).collect());
        }
        let im_rank = if rows.is_empty() {
            0
        } else {
            Mat::from_rows(rows.clone()).rank()
        };
        let mut classes = Vec::new();
        for v in kernel {
            rows.push(v.clone());
            let r = Mat::from_rows(rows.clone()).rank();
            if r > im_rank + classes.len() {
                classes.push(v);
            } else {
                rows.pop();
            }
        }
        classes
    }

    /// Check all DGLA axioms on basis elements; returns violation reports.
    pub fn validate(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for (&p, _) in &self.dims {
            let a = self.diff_block(p + 1).mul(&self.diff_block(p));
            if !a.is_zero() {
                bad.push(format!("d^2 != 0 starting at degree {p}"));
            }
        }
        let degs: Vec<i64> = self.dims.keys().copied().collect();
        let basis = |p: i64| -> Vec<DglaElement> {
            (0..self.dim(p))
                .map(|i| self.basis_element(p, i, self.ring.one()))
                .collect()
        };
        for &p in &degs {
            for &q in &degs {
                for (i, x) in basis(p).iter().enumerate() {
                    for (j, y) in basis(q).iter().enumerate() {
                        let xy = self.bracket(x, y);
                        let yx = self.bracket(y, x);
                        let sign = if (p * q) % 2 == 0 {
                            BigRational::one()
                        } else {
                            -BigRational::one()
                        };
                        let lhs = self.add(&xy, &self.scale_rat(&sign, &yx));
                        if !self.is_zero(&lhs) {
                            bad.push(format!(
                                "antisymmetry fails on (deg {p} #{i}, deg {q} #{j})"
                            ));
                        }
                    }
                }
            }
        }
        // graded Leibniz: d[x,y] = [dx,y] + (-1)^|x| [x,dy]
        for &p in &degs {
            for &q in &degs {
                for (i, x) in basis(p).iter().enumerate() {
                    for (j, y) in basis(q).iter().enumerate() {
                        let lhs = self.d(&self.bracket(x, y));
                        let sign = if p % 2 == 0 {
                            BigRational::one()
                        } else {
                            -BigRational::one()
                        };
                        let rhs = self.add(
                            &self.bracket(&self.d(x), y),
                            &self.scale_rat(&sign, &self.bracket(x, &self.d(y))),
                        );
                        if lhs != rhs {
                            bad.push(format!("Leibniz fails on (deg {p} #{i}, deg {q} #{j})"));
                        }
                    }
                }
            }
        }
        // graded Jacobi in adjoint form:
        // [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|} [y,[x,z]]
        for &p in &degs {
            for &q in &degs {
                for &r in &degs {
                    for (i, x) in basis(p).iter().enumerate() {
                        for (j, y) in basis(q).iter().enumerate() {
                            for (k, z) in basis(r).iter().enumerate() {
                                let lhs = self.bracket(x, &self.bracket(y, z));
                                let sign = if (p * q) % 2 == 0 {
                                    BigRational::one()
                                } else {
                                    -BigRational::one()
                                };
                                let rhs = self.add(
                                    &self.bracket(&self.bracket(x, y), z),
                                    &self.scale_rat(&sign, &self.bracket(y, &self.bracket(x, z))),
                                );
                                if lhs != rhs {
                                    bad.push(format!(
                                        "Jacobi fails on (deg {p} #{i}, deg {q} #{j}, deg {r} #{k})"
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        bad
    }
}

/// Homogeneous element of a [`Dgla`], coefficients in R.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DglaElement {
    pub degree: i64,
    pub coeffs: Vec<RElement>,
}

impl Gla for Dgla {
    type Elt = DglaElement;

    fn ring(&self) -> ArtinRing {
        self.ring
    }

    fn degree(&self, e: &DglaElement) -> i64 {
        e.degree
    }

    fn zero(&self, degree: i64) -> DglaElement {
        DglaElement {
            degree,
            coeffs: vec![self.ring.zero(); self.dim(degree)],
        }
    }

    fn add(&self, a: &DglaElement, b: &DglaElement) -> DglaElement {
        assert_eq!(a.degree, b.degree, "degree mismatch in add");
        DglaElement {
            degree: a.degree,
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x.add(y).expect("ring mismatch"))
                .collect(),
        }
    }

    fn neg(&self, a: &DglaElement) -> DglaElement {
        DglaElement {
            degree: a.degree,
            coeffs: a.coeffs.iter().map(|x| x.neg()).collect(),
        }
    }

    fn scale_rat(&self, c: &Rational, a: &DglaElement) -> DglaElement {
        DglaElement {
            degree: a.degree,
            coeffs: a.coeffs.iter().map(|x| x.scale(c)).collect(),
        }
    }

    fn d(&self, a: &DglaElement) -> DglaElement {
        let m = self.diff_block(a.degree);
        let mut out = self.zero(a.degree + 1);
        for (j, aj) in a.coeffs.iter().enumerate() {
            if aj.is_zero() {
                continue;
            }
            for i in 0..m.rows {
                let c = m.at(i, j);
                if !c.is_zero() {
                    out.coeffs[i] = out.coeffs[i].add(&aj.scale(c)).unwrap();
                }
            }
        }
        out
    }

    fn bracket(&self, a: &DglaElement, b: &DglaElement) -> DglaElement {
        let mut out = self.zero(a.degree + b.degree);
        let Some(table) = self.bracket_table(a.degree, b.degree) else {
            return out;
        };
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let prod = ai.mul(bj).unwrap();
                for (k, c) in table[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out.coeffs[k] = out.coeffs[k].add(&prod.scale(c)).unwrap();
                    }
                }
            }
        }
        out
    }

    fn is_zero(&self, a: &DglaElement) -> bool {
        a.coeffs.iter().all(|c| c.is_zero())
    }

    fn in_maximal_ideal(&self, a: &DglaElement) -> bool {
        a.coeffs.iter().all(|c| c.in_maximal_ideal())
    }

    fn valuation(&self, a: &DglaElement) -> usize {
        a.coeffs
            .iter()
            .map(|c| c.valuation())
            .min()
            .unwrap_or(self.ring.order())
    }
}

/// Gauge transformation `exp X`, stored by its degree-0 logarithm.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransform {
    pub log: DglaElement,
}

impl GaugeTransform {
    pub fn new(g: &Dgla, log: DglaElement) -> Result<Self, CoreError> {
        if log.degree != 0 {
            return Err(CoreError::DegreeMismatch {
                expected: 0,
                got: log.degree,
            });
        }
        if !g.in_maximal_ideal(&log) {
            return Err(CoreError::Precondition("gauge log must lie in m".into()));
        }
        Ok(GaugeTransform { log })
    }
}

/// Act with a 2-morphism on a gauge transform (struct-level wrapper): the
/// 2-morphism's base must be the target MC element of `x`.
pub fn two_morphism_act_on(
    g: &Dgla,
    t: &TwoMorphismElt,
    x: &GaugeTransform,
    target_mc: &DglaElement,
) -> Result<GaugeTransform, CoreError> {
    if t.base_mc != *target_mc {
        return Err(CoreError::Precondition(
            "2-morphism base does not match the gauge transform's target".into(),
        ));
    }
    let log = two_morphism_act(g, &t.base_mc, &t.log, &x.log)?;
    GaugeTransform::new(g, log)
}

/// 2-morphism `exp_γ t`; `base_mc` is the MC element twisting the degree -1
/// bracket (the common target of the gauge transforms it mediates between).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoMorphismElt {
    pub base_mc: DglaElement,
    pub log: DglaElement,
}

impl TwoMorphismElt {
    pub fn new(g: &Dgla, base_mc: DglaElement, log: DglaElement) -> Result<Self, CoreError> {
        if log.degree != -1 {
            return Err(CoreError::DegreeMismatch {
                expected: -1,
                got: log.degree,
            });
        }
        if !g.in_maximal_ideal(&log) {
            return Err(CoreError::Precondition(
                "2-morphism log must lie in m".into(),
            ));
        }
        if !is_mc(g, &base_mc) {
            return Err(CoreError::Precondition(
                "2-morphism base must be Maurer-Cartan".into(),
            ));
        }
        Ok(TwoMorphismElt { base_mc, log })
    }
}

// ---------------------------------------------------------------------------
// R-matrices (matrices with entries in R), for operator identities
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    ring: ArtinRing,
    pub rows: usize,
    pub cols: usize,
    data: Vec<RElement>,
}

impl RMat {
    pub fn zeros(ring: ArtinRing, rows: usize, cols: usize) -> Self {
        RMat {
            ring,
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: ArtinRing, n: usize) -> Self {
        let mut m = RMat::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = ring.one();
        }
        m
    }

    pub fn from_mat(ring: ArtinRing, m: &Mat) -> Self {
        let mut out = RMat::zeros(ring, m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                out.data[i * m.cols + j] = ring.from_rational(m.at(i, j).clone());
            }
        }
        out
    }

    pub fn at(&self, r: usize, c: usize) -> &RElement {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: RElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add(&self, other: &RMat) -> RMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RMat {
            ring: self.ring,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.add(b).unwrap())
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> RMat {
        RMat {
            ring: self.ring,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn mul(&self, other: &RMat) -> RMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RMat::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        let v = out.at(i, j).add(&a.mul(b).unwrap()).unwrap();
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn is_m_valued(&self) -> bool {
        self.data.iter().all(|e| e.in_maximal_ideal())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == RMat::identity(self.ring, self.rows)
    }

    /// exp of an m-valued matrix (finite by nilpotency).
    pub fn exp_nilpotent(&self) -> RMat {
        assert!(self.is_m_valued(), "exp needs an m-valued matrix");
        let n = self.ring.order();
        let mut acc = RMat::identity(self.ring, self.rows);
        let mut pow = RMat::identity(self.ring, self.rows);
        let mut fact = BigRational::one();
        for k in 1..n {
            pow = pow.mul(self);
            fact = fact * BigRational::from_integer((k as i64).into());
            acc = acc.add(&pow.scale(&(BigRational::one() / &fact)));
        }
        acc
    }

    /// log of a unipotent matrix `I + U` with `U` m-valued.
    pub fn log_unipotent(&self) -> RMat {
        let n = self.ring.order();
        let mut u = self.clone();
        for i in 0..self.rows {
            let v = u.at(i, i).sub(&self.ring.one()).unwrap();
            u.set(i, i, v);
        }
        assert!(u.is_m_valued(), "log needs a unipotent matrix");
        let mut acc = RMat::zeros(self.ring, self.rows, self.cols);
        let mut pow = RMat::identity(self.ring, self.rows);
        for k in 1..n {
            pow = pow.mul(&u);
            let c = BigRational::from_integer(if k % 2 == 1 { 1.into() } else { (-1).into() })
                / BigRational::from_integer((k as i64).into());
            acc = acc.add(&pow.scale(&c));
        }
        acc
    }
}
